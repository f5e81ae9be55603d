mod common;

use biproj::densities::{
    count_mod, count_mod_with, sigma_infty_leray, sigma_infty_mc, star_comparison, ChartPolicy,
    CountMode, DEFAULT_BUDGET,
};
use biproj::parser::parse_system;
use biproj::FormSystem;
use proptest::prelude::*;

fn small_system() -> impl Strategy<Value = FormSystem> {
    prop_oneof![
        common::form(1, 1, 1, 1, 2),
        common::form(2, 1, 1, 2, 3),
        common::form(2, 2, 1, 1, 4),
        common::form(2, 2, 2, 1, 4),
    ]
    .prop_map(FormSystem::single)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exhaustive_and_lifting_agree(s in small_system(), p in prop::sample::select(vec![2u64, 3, 5]), r in 1u32..=3) {
        prop_assume!((p as u128).pow(r * 4) <= 1_000_000);
        let ex = count_mod_with(&s, p, r, CountMode::Exhaustive, DEFAULT_BUDGET).unwrap();
        let li = count_mod_with(&s, p, r, CountMode::Lifting, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(ex, li);
        let conv = count_mod_with(&s, p, r, CountMode::Convolution, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(ex, conv);
    }
}

#[test]
fn six_variable_systems_agree() {
    for form in ["x1*y1 + x2*y2 + x3*y3", "x1*y1 - 2*x2*y3 + x3*y2"] {
        let s = parse_system(&[form], 3, 3).unwrap();
        for (p, r) in [(2u64, 1u32), (2, 2), (3, 1)] {
            let ex = count_mod_with(&s, p, r, CountMode::Exhaustive, DEFAULT_BUDGET).unwrap();
            let li = count_mod_with(&s, p, r, CountMode::Lifting, DEFAULT_BUDGET).unwrap();
            assert_eq!(ex, li, "{form} p={p} r={r}");
        }
    }
}

#[test]
fn single_product_counts() {
    let s = parse_system(&["x1*y1"], 1, 1).unwrap();
    for p in [2u64, 3, 5, 7, 11, 13] {
        assert_eq!(count_mod(&s, p, 1).unwrap(), 2 * p as u128 - 1);
    }
}

#[test]
fn star_gap_shrinks_on_smooth_systems() {
    for (form, n, p, r) in [("x1*y1 - x2*y2", 2, 3u64, 3u32), ("x1*y1 + x2*y2 + x3*y3", 3, 3, 2), ("x1*y1 - x2*y2", 2, 5, 2)] {
        let s = parse_system(&[form], n, n).unwrap();
        let rows = star_comparison(&s, p, r, CountMode::Lifting, DEFAULT_BUDGET).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].gap < w[0].gap, "{form} p={p}: {} then {}", w[0].gap, w[1].gap);
        }
    }
}

#[test]
fn seeded_estimates_repeat_bit_for_bit() {
    let s = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
    let a = sigma_infty_mc(&s, 0.05, 200_000, 7).unwrap();
    let b = sigma_infty_mc(&s, 0.05, 200_000, 7).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
    let c = sigma_infty_leray(&s, 200_000, 7, ChartPolicy::Smooth).unwrap();
    let d = sigma_infty_leray(&s, 200_000, 7, ChartPolicy::Smooth).unwrap();
    assert_eq!(c.estimate.to_bits(), d.estimate.to_bits());
    let e = sigma_infty_mc(&s, 0.05, 200_000, 8).unwrap();
    assert_ne!(a.estimate.to_bits(), e.estimate.to_bits());
}

#[test]
fn seeded_estimates_ignore_worker_count() {
    let s = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sigma_infty_leray(&s, 300_000, 3, ChartPolicy::Argmax).unwrap().estimate)
    };
    assert_eq!(run(1).to_bits(), run(3).to_bits());
}
