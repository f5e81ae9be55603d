use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{specialize, ExpSumError};
use crate::counting::enumerate::par_fold_box;
use crate::forms::{FormSystem, HomogeneousForm};
use crate::linalg::integer_rank;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearReport {
    /// `matrix[i][j] = Gamma^{(i)}(e_j, xhat_2, ..., xhat_{d1})`.
    pub matrix: Vec<Vec<BigInt>>,
    pub rank: usize,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |a, k| a * k)
}

fn eval_big(f: &HomogeneousForm, x: &[BigInt]) -> BigInt {
    f.terms()
        .iter()
        .map(|(c, ex)| {
            ex.iter()
                .zip(x)
                .fold(c.clone(), |acc, (&k, xi)| acc * xi.pow(k))
        })
        .sum()
}

/// Full polarization of `G = d2! F_i(.; y)`:
/// `sum_{S subset of slots} (-1)^{d1 - |S|} G(sum_{j in S} h_j)`.
/// Symmetric and multilinear in the `d1` slots, with
/// `Gamma(x, ..., x) = d1! G(x)`.
pub fn polarized_value(system: &FormSystem, y: &[i64], form: usize, slots: &[Vec<i64>]) -> Result<BigInt, ExpSumError> {
    let d1 = system.d1() as usize;
    if slots.len() != d1 || slots.iter().any(|s| s.len() != system.n1()) || form >= system.r() {
        return Err(ExpSumError::Precondition("need d1 slot vectors of length n1".into()));
    }
    let forms = specialize(system, y)?;
    Ok(polarize(&forms[form], slots) * factorial(system.d2()))
}

fn polarize(f: &HomogeneousForm, slots: &[Vec<i64>]) -> BigInt {
    let d = slots.len();
    let n = f.n();
    let mut total = BigInt::zero();
    for mask in 0u32..(1 << d) {
        let mut x = vec![BigInt::zero(); n];
        for (j, s) in slots.iter().enumerate() {
            if mask >> j & 1 == 1 {
                for (xi, si) in x.iter_mut().zip(s) {
                    *xi += *si;
                }
            }
        }
        let v = eval_big(f, &x);
        if (d - mask.count_ones() as usize).is_multiple_of(2) {
            total += v;
        } else {
            total -= v;
        }
    }
    total
}

/// Coefficient tensor `T_i[j, k_2, ..., k_d] = Gamma^{(i)}(e_j, e_{k_2}, ...)`
/// flattened with `j` as the fastest index.
fn unit_tensor(forms: &[HomogeneousForm], n: usize, d: usize, scale: &BigInt) -> Vec<Vec<BigInt>> {
    let total = n.pow(d as u32);
    forms
        .iter()
        .map(|f| {
            (0..total)
                .map(|mut idx| {
                    let slots: Vec<Vec<i64>> = (0..d)
                        .map(|_| {
                            let mut e = vec![0i64; n];
                            e[idx % n] = 1;
                            idx /= n;
                            e
                        })
                        .collect();
                    polarize(f, &slots) * scale
                })
                .collect()
        })
        .collect()
}

fn contract(t: &[BigInt], n: usize, d: usize, xhat: &[i64]) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); n];
    let tail = n.pow(d as u32 - 1);
    for rest in 0..tail {
        let mut coef = BigInt::from(1);
        let mut r = rest;
        for m in 0..d - 1 {
            coef *= xhat[m * n + r % n];
            r /= n;
        }
        if coef.is_zero() {
            continue;
        }
        for (j, out) in row.iter_mut().enumerate() {
            *out += &t[rest * n + j] * &coef;
        }
    }
    row
}

/// The `R x n1` matrix `Gamma^{(i)}(e_j, xhat)` and its rank, where `xhat`
/// holds the `d1 - 1` remaining slot vectors.
pub fn multilinear_forms(system: &FormSystem, y: &[i64], xhat: &[Vec<i64>]) -> Result<MultilinearReport, ExpSumError> {
    let (n, d) = (system.n1(), system.d1() as usize);
    if d < 2 {
        return Err(ExpSumError::Precondition("differencing needs d1 >= 2".into()));
    }
    if xhat.len() != d - 1 || xhat.iter().any(|v| v.len() != n) {
        return Err(ExpSumError::Precondition(format!("need {} vectors of length {n}", d - 1)));
    }
    let forms = specialize(system, y)?;
    let t = unit_tensor(&forms, n, d, &factorial(system.d2()));
    let flat: Vec<i64> = xhat.concat();
    let matrix: Vec<Vec<BigInt>> = t.iter().map(|ti| contract(ti, n, d, &flat)).collect();
    let rank = integer_rank(matrix.clone());
    Ok(MultilinearReport { matrix, rank })
}

/// Number of `xhat` in `(-H, H)^{n1 (d1 - 1)}`, `H = p1^theta`, for which the
/// matrix of [`multilinear_forms`] has rank below `R`.
pub fn rank_deficiency_count(system: &FormSystem, y: &[i64], theta: f64, p1: f64, budget: u128) -> Result<u128, ExpSumError> {
    let (n, d, r) = (system.n1(), system.d1() as usize, system.r());
    if d < 2 {
        return Err(ExpSumError::Precondition("differencing needs d1 >= 2".into()));
    }
    let h = p1.powf(theta);
    let k = if h.fract() == 0.0 { h - 1.0 } else { h.floor() };
    let k = k.max(0.0) as i64;
    let dim = n * (d - 1);
    let needed = ((2 * k + 1) as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(ExpSumError::BudgetExceeded { needed, budget });
    }
    let forms = specialize(system, y)?;
    let t = unit_tensor(&forms, n, d, &factorial(system.d2()));
    let small: Option<Vec<Vec<i128>>> = t
        .iter()
        .map(|ti| ti.iter().map(|c| c.to_i128().filter(|c| c.unsigned_abs() < 1 << 60)).collect())
        .collect();
    let lo = vec![-k; dim];
    let hi = vec![k; dim];
    let deficient = |xhat: &[i64]| -> bool {
        match (&small, k < 1 << 20) {
            (Some(ts), true) if r == 1 => {
                // rank < 1 exactly when every entry vanishes
                let ti = &ts[0];
                let tail = n.pow(d as u32 - 1);
                (0..n).all(|j| {
                    (0..tail)
                        .map(|rest| {
                            let mut c = ti[rest * n + j];
                            let mut rr = rest;
                            for m in 0..d - 1 {
                                c *= xhat[m * n + rr % n] as i128;
                                rr /= n;
                            }
                            c
                        })
                        .sum::<i128>()
                        == 0
                })
            }
            _ => {
                let m: Vec<Vec<BigInt>> = t.iter().map(|ti| contract(ti, n, d, xhat)).collect();
                integer_rank(m) < r
            }
        }
    };
    Ok(par_fold_box(&lo, &hi, 1 << 12, || 0u128, |acc, x| *acc += deficient(x) as u128, |a, b| a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    fn diag() -> FormSystem {
        parse_system(&["x1^2*y1^2 + x2^2*y2^2 + x3^2*y3^2"], 3, 3).unwrap()
    }

    #[test]
    fn hessian_action() {
        let rep = multilinear_forms(&diag(), &[1, 1, 1], &[vec![1, 0, 0]]).unwrap();
        let as_i: Vec<i64> = rep.matrix[0].iter().map(|v| v.to_i64().unwrap()).collect();
        assert_eq!(as_i, vec![4, 0, 0]);
        assert_eq!(rep.rank, 1);
        let s = parse_system(&["x1*x2*y1 + 3*x3^2*y2"], 3, 2).unwrap();
        let rep = multilinear_forms(&s, &[2, 1], &[vec![1, 5, 7]]).unwrap();
        // G = 2*x1*x2 + 3*x3^2, Hessian rows (0,2,0), (2,0,0), (0,0,6)
        let as_i: Vec<i64> = rep.matrix[0].iter().map(|v| v.to_i64().unwrap()).collect();
        assert_eq!(as_i, vec![10, 2, 42]);
    }

    #[test]
    fn diagonal_polarization() {
        let s = diag();
        let x = vec![2i64, -1, 3];
        let v = polarized_value(&s, &[1, 1, 1], 0, &[x.clone(), x.clone()]).unwrap();
        // d1! * d2! * F(x; y)
        assert_eq!(v, BigInt::from(2 * 2 * 14));
    }

    #[test]
    fn deficiency_counts() {
        let s = diag();
        assert_eq!(rank_deficiency_count(&s, &[1, 1, 1], 1.0, 4.0, 1 << 20).unwrap(), 1);
        // one zero coordinate frees one direction: (2H - 1) points
        assert_eq!(rank_deficiency_count(&s, &[1, 0, 1], 1.0, 4.0, 1 << 20).unwrap(), 7);
        assert!(matches!(
            rank_deficiency_count(&s, &[1, 1, 1], 1.0, 100.0, 10),
            Err(ExpSumError::BudgetExceeded { .. })
        ));
        let lin = parse_system(&["x1*y1"], 2, 1).unwrap();
        assert!(multilinear_forms(&lin, &[1], &[]).is_err());
    }
}
