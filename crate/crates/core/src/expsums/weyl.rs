use num_complex::Complex64;
use num_integer::Integer;

use super::{e, specialize, ComplexSum, ExpSumError};
use crate::counting::enumerate::par_fold_box;
use crate::counting::solver::{fits_machine, Specializer};
use crate::counting::{BoxSpec, Rational};
use crate::forms::FormSystem;

const CHUNK: u64 = 1 << 12;

/// A point `alpha` of the torus, optionally given exactly as `a / q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPoint {
    pub alpha: Vec<f64>,
    pub rational: Option<(Vec<u64>, u64)>,
}

impl ArcPoint {
    /// Reduces each coordinate into `[0, 1)`.
    pub fn real(alpha: Vec<f64>) -> Self {
        ArcPoint {
            alpha: alpha.into_iter().map(|a| a - a.floor()).collect(),
            rational: None,
        }
    }

    pub fn rational(a: Vec<u64>, q: u64) -> Result<Self, ExpSumError> {
        if q == 0 || a.iter().any(|&ai| ai >= q) {
            return Err(ExpSumError::Precondition(format!("need 0 <= a_i < q, got a = {a:?}, q = {q}")));
        }
        if a.iter().fold(q, |g, &ai| g.gcd(&ai)) != 1 {
            return Err(ExpSumError::Precondition(format!("gcd(q, a) must be 1, got a = {a:?}, q = {q}")));
        }
        Ok(ArcPoint {
            alpha: a.iter().map(|&ai| ai as f64 / q as f64).collect(),
            rational: Some((a, q)),
        })
    }

    /// The point `-alpha`.
    pub fn negated(&self) -> Self {
        match &self.rational {
            Some((a, q)) => ArcPoint {
                alpha: a.iter().map(|&ai| ((q - ai) % q) as f64 / *q as f64).collect(),
                rational: Some((a.iter().map(|&ai| (q - ai) % q).collect(), *q)),
            },
            None => ArcPoint::real(self.alpha.iter().map(|a| -a).collect()),
        }
    }
}

/// `alpha * f mod 1` in `[-1/2, 1/2]`, computed without forming `alpha * f`
/// in a single rounding.
pub(crate) fn frac_mul(alpha: f64, f: i128) -> f64 {
    const SHIFT: i32 = 40;
    let split: i128 = 1 << SHIFT;
    let hi = f / split;
    let lo = f % split;
    let mut t = 0.0;
    if hi != 0 {
        let scaled = alpha * 2f64.powi(SHIFT);
        t += frac_mul(scaled - scaled.floor(), hi);
    }
    let b = lo as f64;
    let p = alpha * b;
    let err = alpha.mul_add(b, -p);
    t += (p - p.round()) + err;
    t - t.round()
}

/// `S_y(alpha)`: the sum of `e(sum_i alpha_i F_i(x; y))` over integer `x` in
/// `p1 * box`.
pub fn weyl_sum(system: &FormSystem, y: &[i64], p1: Rational, bx: &BoxSpec, arc: &ArcPoint) -> Result<Complex64, ExpSumError> {
    specialize(system, y)?;
    if arc.alpha.len() != system.r() || bx.x.len() != system.n1() {
        return Err(ExpSumError::Precondition("arc point or box has the wrong dimension".into()));
    }
    let (lo, hi) = bx.x_ranges(p1);
    let polys = Specializer::new(system, true)
        .specialize(y)
        .filter(|p| fits_machine(p, &lo, &hi))
        .ok_or_else(|| ExpSumError::Precondition("form values exceed 126 bits on this box".into()))?;

    let table: Option<Vec<Complex64>> = match &arc.rational {
        Some((_, q)) if *q <= 1 << 20 => Some((0..*q).map(|k| e(k as f64 / *q as f64)).collect()),
        _ => None,
    };
    let phase = |x: &[i64]| -> Complex64 {
        match &arc.rational {
            Some((a, q)) => {
                let q = *q as i128;
                let mut k = 0i128;
                for (ai, p) in a.iter().zip(&polys) {
                    k = (k + (*ai as i128) * p.eval(x).rem_euclid(q)) % q;
                }
                match &table {
                    Some(t) => t[k as usize],
                    None => e(k as f64 / q as f64),
                }
            }
            None => {
                let mut t = 0.0;
                for (al, p) in arc.alpha.iter().zip(&polys) {
                    t += frac_mul(*al, p.eval(x));
                }
                e(t)
            }
        }
    };
    let sum = par_fold_box(
        &lo,
        &hi,
        CHUNK,
        ComplexSum::default,
        |acc, x| acc.add(phase(x)),
        |mut a, b| {
            a.merge(b);
            a
        },
    );
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    #[test]
    fn frac_mul_matches_exact_rationals() {
        assert!((frac_mul(0.25, 3) - (-0.25)).abs() < 1e-15);
        let big: i128 = (1 << 80) + 3;
        assert!((frac_mul(0.5, big) - 0.5).abs() < 1e-12 || (frac_mul(0.5, big) + 0.5).abs() < 1e-12);
        assert!((frac_mul(0.125, -(1i128 << 70) - 1) + 0.125).abs() < 1e-12);
    }

    #[test]
    fn small_sums() {
        let s = parse_system(&["x1*y1"], 1, 1).unwrap();
        let bx = BoxSpec::unit(1, 1);
        let one = Rational::from_integer(1);
        let v = weyl_sum(&s, &[1], one, &bx, &ArcPoint::rational(vec![1], 2).unwrap()).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let v = weyl_sum(&s, &[1], one, &bx, &ArcPoint::real(vec![0.5])).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let z = weyl_sum(&s, &[1], Rational::from_integer(3), &bx, &ArcPoint::real(vec![0.0])).unwrap();
        assert_eq!(z, Complex64::new(7.0, 0.0));
    }

    #[test]
    fn rejects_bad_arc_points() {
        assert!(ArcPoint::rational(vec![2], 4).is_err());
        assert!(ArcPoint::rational(vec![5], 4).is_err());
        assert!(ArcPoint::rational(vec![2, 1], 4).is_ok());
        assert_eq!(ArcPoint::rational(vec![0], 1).unwrap().negated().rational, Some((vec![0], 1)));
    }
}
