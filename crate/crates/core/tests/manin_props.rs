use biproj::forms::to_rationals;
use biproj::manin::{
    diagonal_exclusion, g1, hypothesis_check, peyre_constant, solve_b1, Shape,
    ASSEMBLY_TOLERANCE,
};
use biproj::{BihomogeneousForm, FormSystem};
use proptest::prelude::*;

fn b1_residual(b: f64, delta: f64, d1: u32, d2: u32, r: u32) -> f64 {
    let rf = r as f64;
    let arg = rf * (b * d1 as f64 + d2 as f64) + delta;
    let lhs = 2f64.powi((d1 + d2) as i32 - 2) * rf * (b * d1 as f64 + d2 as f64);
    lhs - 2f64.powi(d1 as i32 - 1) * (g1(1.0 / b, delta, d1, d2, r) + rf * (rf + 1.0) * (d1 as f64 - 1.0)) - arg.ceil()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn assemblies_agree(
        sigma_inf in 1e-3f64..1e3,
        factors in proptest::collection::vec(0.01f64..10.0, 0..25),
        n1 in 3u64..12, n2 in 3u64..12, d1 in 1u32..=2, d2 in 1u32..=2,
    ) {
        prop_assume!(n1 >= d1 as u64 + 2 && n2 >= d2 as u64 + 2);
        let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];
        let sigma_p: Vec<(u64, f64)> = primes.iter().copied().zip(factors).collect();
        let rep = peyre_constant(sigma_inf, &sigma_p, n1, n2, d1, d2, 1).unwrap();
        prop_assert!((rep.c_pey_factorwise - rep.c_pey).abs() <= ASSEMBLY_TOLERANCE * rep.c_pey);
    }

    #[test]
    fn hypothesis_constants_are_consistent(
        d1 in 2u32..=4, d2 in 2u32..=4, r in 1u32..=3,
        n1 in 1u64..2000, n2 in 1u64..2000, v1 in 0u64..500, v2 in 0u64..500,
        delta in 0.001f64..0.5,
    ) {
        let rep = hypothesis_check(Shape { n1, n2, d1, d2, r, dim_v1: v1, dim_v2: v2, delta }).unwrap();
        let k1 = ((n1 + n2) as f64 - v1 as f64 - rep.lambda1 as f64) / 2f64.powi(d1 as i32 - 1);
        let k2 = ((n1 + n2) as f64 - v2 as f64 - rep.lambda2 as f64) / 2f64.powi(d2 as i32 - 1);
        prop_assert_eq!(rep.k1, k1);
        prop_assert_eq!(rep.k2, k2);
        let rf = r as f64;
        prop_assert_eq!(rep.lambda1, (rf * (rep.b1.relaxed * d1 as f64 + d2 as f64) + delta).ceil() as i64);
        let phi = 2f64.powi((d1 + d2) as i32 - 2) * rf
            * (rep.b1.relaxed * d1 as f64 + d2 as f64).max(rep.b2.relaxed * d2 as f64 + d1 as f64);
        prop_assert!((rep.phi - phi).abs() <= 1e-12 * phi);
    }

    #[test]
    fn b1_bracket_changes_sign(d1 in 2u32..=6, d2 in 2u32..=6, r in 1u32..=4, delta in 0.001f64..0.9) {
        let b = solve_b1(delta, d1, d2, r).unwrap();
        prop_assert!(b1_residual(b.bracket.0, delta, d1, d2, r) < 0.0);
        prop_assert!(b1_residual(b.bracket.1, delta, d1, d2, r) >= 0.0);
    }
}

/// `V1*(y)` of the diagonal form is spanned by the `e_i` where the x-gradient
/// vanishes identically, so its dimension is read off the Jacobian at each `e_i`.
#[test]
fn exclusion_matches_jacobian_dimension() {
    use rand::{Rng, SeedableRng};
    let n = 4;
    let system = FormSystem::single(BihomogeneousForm::diagonal(n, 2, 2));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let y: Vec<i64> = (0..n).map(|_| if rng.random_bool(0.4) { 0 } else { rng.random_range(-9..=9) }).collect();
        let yr = to_rationals(&y);
        let dim = (0..n)
            .filter(|&i| {
                let mut e = vec![0i64; n];
                e[i] = 1;
                system.jacobian_rank_x(&to_rationals(&e), &yr).unwrap() == 0
            })
            .count() as u64;
        for lambda in 0..=n as u64 + 1 {
            assert_eq!(diagonal_exclusion(&y, lambda), dim < lambda, "y = {y:?}, lambda = {lambda}");
        }
    }
}
