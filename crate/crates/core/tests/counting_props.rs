mod common;

use biproj::counting::{
    count_box, count_box_chunked, count_projective, moebius_assembly, shell_table, BoxSpec,
    ExclusionPredicate, Predicates, Rational, ShellFunction,
};
use biproj::{BihomogeneousForm, FormSystem, Monomial};
use num_rational::Ratio;
use proptest::prelude::*;

fn r(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// Small forms whose height exponents are both positive.
fn counted_form() -> impl Strategy<Value = BihomogeneousForm> {
    prop_oneof![
        common::form(2, 2, 1, 1, 3),
        common::form(3, 3, 1, 1, 4),
        common::form(3, 2, 2, 1, 4),
    ]
}

fn flip_x(f: &BihomogeneousForm, j: usize) -> BihomogeneousForm {
    let terms = f.monomials().iter().map(|m| {
        let sign = if m.xexp[j] % 2 == 1 { -1 } else { 1 };
        Monomial::new(&m.coeff * sign, m.xexp.clone(), m.yexp.clone())
    });
    BihomogeneousForm::new(f.n1(), f.n2(), f.d1(), f.d2(), terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn moebius_identity_is_exact(f in counted_form(), p in 1u128..=120, zeros in 0usize..=2) {
        let s = FormSystem::single(f);
        let preds = if zeros == 0 {
            Predicates::all()
        } else {
            Predicates::new(ExclusionPredicate::DiagonalZeroCount(zeros), ExclusionPredicate::AllPoints)
        };
        let (b1, b2) = biproj::counting::height_exponents(&s).unwrap();
        let table = shell_table(&s, &preds, p).unwrap();
        for q in [p / 3, p / 2, p] {
            prop_assert_eq!(moebius_assembly(&table, b1, b2, q), Ratio::from_integer(table.projective_count(q) as i128));
        }
    }

    #[test]
    fn shells_partition_the_box(f in common::form(2, 2, 1, 1, 3), big_l in 1u64..=6, big_m in 1u64..=6) {
        let s = FormSystem::single(f);
        let h = ShellFunction::new(&s, &Predicates::all());
        let mut shells = 0u128;
        for l in 1..=big_l {
            for m in 1..=big_m {
                shells += h.counts(l, m).all as u128;
            }
        }
        let boxed = count_box(&s, r(big_l as i64), r(big_m as i64), &BoxSpec::unit(2, 2));
        let (nx, ny) = ((2 * big_l + 1).pow(2) as u128, (2 * big_m + 1).pow(2) as u128);
        prop_assert_eq!(shells, boxed - (nx + ny - 1));
    }

    #[test]
    fn counts_grow_with_the_box(f in common::shaped_form(3), p1 in 1i64..=4, p2 in 1i64..=4) {
        let s = FormSystem::single(f);
        let bx = BoxSpec::unit(s.n1(), s.n2());
        let c = count_box(&s, r(p1), r(p2), &bx);
        prop_assert!(count_box(&s, r(p1 + 1), r(p2), &bx) >= c);
        prop_assert!(count_box(&s, r(p1), r(p2 + 1), &bx) >= c);
    }

    #[test]
    fn projective_counts_grow_with_height(f in common::form(2, 2, 1, 1, 3), p in 1u128..=60) {
        let s = FormSystem::single(f);
        let table = shell_table(&s, &Predicates::all(), 2 * p).unwrap();
        prop_assert!(table.projective_count(p) <= table.projective_count(p + 1));
        prop_assert!(table.projective_count(p + 1) <= table.projective_count(2 * p));
        prop_assert_eq!(count_projective(&s, p, &Predicates::all()).unwrap(), table.projective_count(p));
    }

    #[test]
    fn partition_does_not_change_counts(f in common::shaped_form(3), p in 1i64..=4, chunk in 1u64..=40) {
        let s = FormSystem::single(f);
        let bx = BoxSpec::new(
            vec![(Ratio::new(-1, 2), r(1)); s.n1()],
            vec![(r(-1), Ratio::new(2, 3)); s.n2()],
        ).unwrap();
        let reference = count_box_chunked(&s, r(p), r(p), &bx, 1 << 20);
        prop_assert_eq!(count_box_chunked(&s, r(p), r(p), &bx, chunk), reference);
    }

    #[test]
    fn sign_changes_preserve_counts(f in common::shaped_form(4), p in 1i64..=4, j in 0usize..3) {
        let j = j % f.n1();
        let s = FormSystem::single(f.clone());
        let flipped = FormSystem::single(flip_x(&f, j));
        let bx = BoxSpec::unit(s.n1(), s.n2());
        prop_assert_eq!(count_box(&s, r(p), r(p), &bx), count_box(&flipped, r(p), r(p), &bx));
    }
}
