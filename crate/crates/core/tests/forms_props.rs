mod common;

use biproj::forms::to_rationals;
use biproj::{FormSystem, HomogeneousForm};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-20i64..=20, n)
}

fn with_points() -> impl Strategy<Value = (biproj::BihomogeneousForm, Vec<i64>, Vec<i64>)> {
    common::shaped_form(5).prop_flat_map(|f| {
        let (n1, n2) = (f.n1(), f.n2());
        (Just(f), point(n1), point(n2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scaling_each_block((f, x, y) in with_points(), lam in -6i64..=6, mu in -6i64..=6) {
        let lx: Vec<i64> = x.iter().map(|v| lam * v).collect();
        let my: Vec<i64> = y.iter().map(|v| mu * v).collect();
        let lhs = f.evaluate(&lx, &my).unwrap();
        let rhs = BigInt::from(lam).pow(f.d1()) * BigInt::from(mu).pow(f.d2()) * f.evaluate(&x, &y).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn euler_relation((f, x, y) in with_points()) {
        let mut sum = BigInt::from(0);
        for (j, xj) in x.iter().enumerate() {
            sum += BigInt::from(*xj) * f.partial_x(j).unwrap().evaluate(&x, &y).unwrap();
        }
        prop_assert_eq!(sum, BigInt::from(f.d1()) * f.evaluate(&x, &y).unwrap());
        let mut sum = BigInt::from(0);
        for (j, yj) in y.iter().enumerate() {
            sum += BigInt::from(*yj) * f.partial_y(j).unwrap().evaluate(&x, &y).unwrap();
        }
        prop_assert_eq!(sum, BigInt::from(f.d2()) * f.evaluate(&x, &y).unwrap());
    }

    #[test]
    fn specialization_commutes((f, x, y) in with_points()) {
        let direct = f.evaluate(&x, &y).unwrap();
        let fy: HomogeneousForm = f.specialize_y(&y).unwrap();
        prop_assert_eq!(fy.evaluate(&x).unwrap(), direct.clone());
        prop_assert_eq!(f.specialize_x(&x).unwrap().evaluate(&y).unwrap(), direct);
    }

    #[test]
    fn rank_ignores_row_scaling(
        (f, g, x, y) in (1usize..=3, 1usize..=3).prop_flat_map(|(n1, n2)| {
            (common::form(n1, n2, 2, 1, 4), common::form(n1, n2, 2, 1, 4), point(n1), point(n2))
        }),
        s in -5i64..=5,
        t in 1i64..=5,
    ) {
        prop_assume!(s != 0);
        let sys = FormSystem::new(vec![f.clone(), g.clone()]).unwrap();
        // scaling a row by s/t changes neither rank; the integer form scales by s*t
        let scaled = FormSystem::new(vec![f.scaled(s * t), g]).unwrap();
        let (xr, yr) = (to_rationals(&x), to_rationals(&y));
        prop_assert_eq!(sys.jacobian_rank_x(&xr, &yr).unwrap(), scaled.jacobian_rank_x(&xr, &yr).unwrap());
        prop_assert_eq!(sys.jacobian_rank_y(&xr, &yr).unwrap(), scaled.jacobian_rank_y(&xr, &yr).unwrap());
        let half: Vec<BigRational> = xr.iter().map(|v| v / BigInt::from(t)).collect();
        prop_assert_eq!(sys.jacobian_rank_x(&xr, &yr).unwrap(), sys.jacobian_rank_x(&half, &yr).unwrap());
    }
}
