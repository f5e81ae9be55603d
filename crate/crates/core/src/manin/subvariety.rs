//! The diagonal family `sum_i x_i^d1 y_i^d2`: its exclusion set and the
//! subvariety `x_1 = 0, y_2 = ... = y_n = 0` that outgrows the main term.

use super::ManinError;
use crate::arith::{iroot, mobius_table};
use crate::counting::enumerate::par_fold_box;
use crate::stats::{ols, LineFit};

/// `y` lies in the admissible set when fewer than `lambda` coordinates
/// vanish; the zero count is the dimension of the singular locus of the
/// fiber over `y`.
pub fn diagonal_exclusion(y: &[i64], lambda: u64) -> bool {
    (y.iter().filter(|&&v| v == 0).count() as u64) < lambda
}

/// Number of `y` in `(-P, P)^n` outside the admissible set.
pub fn excluded_count(n: usize, lambda: u64, p: i64, budget: u128) -> Result<u128, ManinError> {
    let side = (2 * p - 1).max(0) as u128;
    let needed = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(ManinError::BudgetExceeded { needed, budget });
    }
    let lo = vec![-(p - 1); n];
    let hi = vec![p - 1; n];
    Ok(par_fold_box(&lo, &hi, 1 << 14, || 0u128, |acc, y| *acc += !diagonal_exclusion(y, lambda) as u128, |a, b| a + b))
}

/// Primitive vectors of `Z^k` with max norm at most `b`, up to sign.
pub fn primitive_up_to_sign(k: u32, b: u64) -> u128 {
    let mu = mobius_table(b as usize);
    let mut total: i128 = 0;
    for j in 1..=b {
        let m = mu[j as usize];
        if m != 0 {
            let side = 2 * (b / j) as i128 + 1;
            total += m as i128 * (side.pow(k) - 1);
        }
    }
    (total / 2) as u128
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubvarietyReport {
    pub n: u32,
    pub d1: u32,
    /// `(n - 1) / (n - d1)`.
    pub target: f64,
    /// `(P, number of points of height at most P)`.
    pub points: Vec<(u128, u128)>,
    pub fit: Option<LineFit>,
}

/// Points `(0, x_2, ..., x_n; 1, 0, ..., 0)` of height `|x|^(n - d1) <= P`.
/// The `y` factor has height one, so these are the primitive `x` in
/// `Z^(n-1)` with `|x| <= P^(1/(n - d1))`, up to sign.
pub fn subvariety_growth(n: u32, d1: u32, grid: &[u128]) -> Result<SubvarietyReport, ManinError> {
    if n <= d1 || n < 2 {
        return Err(ManinError::Precondition("need n > d1 and n >= 2".into()));
    }
    let e = n - d1;
    let points: Vec<(u128, u128)> = grid
        .iter()
        .map(|&p| (p, primitive_up_to_sign(n - 1, iroot(p, e) as u64)))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(p, c)| ((p as f64).ln(), (c as f64).ln()))
        .unzip();
    Ok(SubvarietyReport {
        n,
        d1,
        target: (n - 1) as f64 / e as f64,
        points,
        fit: ols(&xs, &ys),
    })
}
