use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::cyclotomic::residue_counts;
use super::{e, specialize, ComplexSum, ExpSumError};
use crate::arith::{divisors, mobius};
use crate::forms::FormSystem;

/// Tolerance on the imaginary part of the truncated series.
const IMAG_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub q: u64,
    pub term: f64,
    pub partial: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub q_max: u64,
    pub value: f64,
    /// Largest imaginary part seen in any single term.
    pub imag: f64,
    pub terms: Vec<SeriesTerm>,
}

fn primitive_tuples(q: u64, r: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = q.pow(r as u32);
    (0..total).filter_map(move |mut idx| {
        let mut a = Vec::with_capacity(r);
        for _ in 0..r {
            a.push(idx % q);
            idx /= q;
        }
        (a.iter().fold(q, |g, &x| g.gcd(&x)) == 1).then_some(a)
    })
}

/// `S(Q) = sum_{q <= Q} q^{-n1} sum_a S_{a,q}(y)` over `0 <= a_i < q` with
/// `gcd(q, a) = 1`, evaluated numerically from residue histograms.
pub fn truncated_singular_series(system: &FormSystem, y: &[i64], q_max: u64) -> Result<SeriesReport, ExpSumError> {
    if q_max == 0 {
        return Err(ExpSumError::Precondition("Q must be at least 1".into()));
    }
    let forms = specialize(system, y)?;
    let (n1, r) = (system.n1() as i32, system.r());
    let mut partial = ComplexSum::default();
    let mut terms = Vec::with_capacity(q_max as usize);
    let mut imag: f64 = 0.0;
    for q in 1..=q_max {
        let counts = residue_counts(&forms, q)?;
        let roots: Vec<_> = (0..q).map(|k| e(k as f64 / q as f64)).collect();
        let mut s = ComplexSum::default();
        for a in primitive_tuples(q, r) {
            for (idx, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut rest = idx as u64;
                let mut k = 0u128;
                for &ai in &a {
                    k = (k + ai as u128 * (rest % q) as u128) % q as u128;
                    rest /= q;
                }
                s.add(roots[k as usize] * c as f64);
            }
        }
        let term = s.value() / (q as f64).powi(n1);
        imag = imag.max(term.im.abs());
        partial.add(term);
        terms.push(SeriesTerm {
            q,
            term: term.re,
            partial: partial.value().re,
        });
    }
    if imag > IMAG_TOLERANCE {
        return Err(ExpSumError::Precondition(format!("series term has imaginary part {imag:e}")));
    }
    Ok(SeriesReport {
        q_max,
        value: partial.value().re,
        imag,
        terms,
    })
}

/// The `q`-th series term as an exact rational:
/// `sum_{d | q} mu(q/d) d^{R - n1} N_y(d)` with `N_y(d)` the number of
/// zeros modulo `d` of the specialized system.
pub fn singular_series_term_exact(system: &FormSystem, y: &[i64], q: u64) -> Result<BigRational, ExpSumError> {
    let forms = specialize(system, y)?;
    term_exact(&forms, system.r(), system.n1(), q)
}

fn term_exact(forms: &[crate::forms::HomogeneousForm], r: usize, n1: usize, q: u64) -> Result<BigRational, ExpSumError> {
    let mut total = BigRational::zero();
    for d in divisors(q) {
        let mu = mobius(q / d);
        if mu == 0 {
            continue;
        }
        let zeros = residue_counts(forms, d)?[0];
        let dpow = |k: usize| BigInt::from(d).pow(k as u32);
        let scale = if r >= n1 {
            BigRational::from_integer(dpow(r - n1))
        } else {
            BigRational::new(BigInt::one(), dpow(n1 - r))
        };
        total += scale * BigInt::from(zeros) * BigInt::from(mu);
    }
    Ok(total)
}

/// Exact partial sums `(q, S(q))` for `q <= Q`.
pub fn truncated_singular_series_exact(system: &FormSystem, y: &[i64], q_max: u64) -> Result<Vec<(u64, BigRational)>, ExpSumError> {
    let forms = specialize(system, y)?;
    let mut acc = BigRational::zero();
    let mut out = Vec::new();
    for q in 1..=q_max {
        acc += term_exact(&forms, system.r(), system.n1(), q)?;
        out.push((q, acc.clone()));
    }
    Ok(out)
}

#[allow(dead_code)]
pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}
