use std::ops::AddAssign;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{e, specialize, ComplexSum, ExpSumError};
use crate::arith::{divisors, mobius};
use crate::counting::enumerate::par_fold_box;
use crate::forms::{FormSystem, HomogeneousForm};

/// Largest residue table `q^R` held in memory.
const MAX_TABLE: u64 = 1 << 24;

/// `sum_k m_k zeta_q^k` with nonnegative integer multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicSum {
    q: u64,
    mult: Vec<u128>,
}

impl CyclotomicSum {
    pub fn new(q: u64, mult: Vec<u128>) -> Self {
        assert_eq!(mult.len() as u64, q, "one multiplicity per residue");
        CyclotomicSum { q, mult }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn multiplicities(&self) -> &[u128] {
        &self.mult
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut s = ComplexSum::default();
        for (k, &m) in self.mult.iter().enumerate() {
            if m != 0 {
                s.add(e(k as f64 / self.q as f64) * m as f64);
            }
        }
        s.value()
    }

    /// Canonical coordinates in `Z[t] / Phi_q(t)`; two sums are equal as
    /// algebraic numbers exactly when these agree.
    pub fn reduced(&self) -> Vec<BigInt> {
        let phi = cyclotomic_polynomial(self.q);
        let deg = phi.len() - 1;
        let mut r: Vec<BigInt> = self.mult.iter().map(|&m| BigInt::from(m)).collect();
        for top in (deg..r.len()).rev() {
            let c = r[top].clone();
            if c == BigInt::from(0) {
                continue;
            }
            for (j, pc) in phi.iter().enumerate() {
                r[top - deg + j] -= &c * pc;
            }
        }
        r.truncate(deg);
        r.resize(deg, BigInt::from(0));
        r
    }

    /// Exact test for the sum being the integer `c`.
    pub fn equals_integer(&self, c: &BigInt) -> bool {
        let r = self.reduced();
        r[0] == *c && r[1..].iter().all(|v| *v == BigInt::from(0))
    }
}

impl AddAssign<&CyclotomicSum> for CyclotomicSum {
    fn add_assign(&mut self, o: &CyclotomicSum) {
        assert_eq!(self.q, o.q);
        for (a, b) in self.mult.iter_mut().zip(&o.mult) {
            *a += b;
        }
    }
}

/// Coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    assert!(n >= 1);
    // t^n - 1 divided by Phi_d for every proper divisor d.
    let mut num: Vec<BigInt> = vec![BigInt::from(0); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::from(1);
    for d in divisors(n) {
        if d == n {
            continue;
        }
        num = divide_monic(&num, &cyclotomic_polynomial(d));
    }
    num
}

fn divide_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dd = den.len() - 1;
    let mut r = num.to_vec();
    let mut quot = vec![BigInt::from(0); num.len() - dd];
    for top in (dd..r.len()).rev() {
        let c = r[top].clone();
        quot[top - dd] = c.clone();
        for (j, pc) in den.iter().enumerate() {
            r[top - dd + j] -= &c * pc;
        }
    }
    debug_assert!(r.iter().all(|v| *v == BigInt::from(0)));
    quot
}

fn reduce(c: &BigInt, q: u64) -> u64 {
    let m = c % BigInt::from(q);
    let m = if m < BigInt::from(0) { m + q } else { m };
    m.to_u64().expect("residue below q")
}

type ModTerms = Vec<Vec<(u128, Vec<(usize, u32)>)>>;

/// Histogram of `(F_1(z), ..., F_R(z)) mod q` over `z mod q`, indexed by
/// `sum_i v_i q^i`. Variable-disjoint pieces are counted separately and
/// combined by convolution on `(Z/q)^R`.
pub fn residue_counts(forms: &[HomogeneousForm], q: u64) -> Result<Vec<u128>, ExpSumError> {
    let r = forms.len() as u32;
    let cells = q.checked_pow(r).filter(|&c| c <= MAX_TABLE).ok_or_else(|| {
        ExpSumError::Precondition(format!("residue table q^R = {q}^{r} is too large"))
    })?;
    let n = forms.first().map_or(0, |f| f.n());
    let reduced: ModTerms = forms
        .iter()
        .map(|f| {
            f.terms()
                .iter()
                .map(|(c, ex)| {
                    let vars = ex.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k)).collect();
                    (reduce(c, q) as u128, vars)
                })
                .filter(|(c, _)| *c != 0)
                .collect()
        })
        .collect();
    let groups = if cells <= 4096 {
        components(&reduced, n)
    } else {
        vec![(0..n).collect()]
    };
    let mut free = n;
    let mut total: Option<Vec<u128>> = None;
    for vars in groups {
        free -= vars.len();
        let local: ModTerms = reduced
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter(|(_, tv)| tv.iter().all(|(i, _)| vars.contains(i)))
                    .map(|(c, tv)| (*c, tv.iter().map(|&(i, k)| (vars.iter().position(|&v| v == i).unwrap(), k)).collect()))
                    .collect()
            })
            .collect();
        let h = histogram(&local, vars.len(), q, cells as usize);
        total = Some(match total {
            None => h,
            Some(t) => convolve(&t, &h, q, r),
        });
    }
    let mut out = total.unwrap_or_else(|| {
        let mut v = vec![0u128; cells as usize];
        v[0] = 1;
        v
    });
    let scale = (q as u128).pow(free as u32);
    for c in out.iter_mut() {
        *c *= scale;
    }
    Ok(out)
}

fn components(reduced: &ModTerms, n: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut used = vec![false; n];
    for (_, vars) in reduced.iter().flatten() {
        for &(i, _) in vars {
            used[i] = true;
        }
        for w in vars.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
            parent[a] = b;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in (0..n).filter(|&i| used[i]) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

fn convolve(a: &[u128], b: &[u128], q: u64, r: u32) -> Vec<u128> {
    let mut out = vec![0u128; a.len()];
    let add = |mut i: usize, mut j: usize| -> usize {
        let (mut k, mut place) = (0usize, 1usize);
        for _ in 0..r {
            k += ((i as u64 % q + j as u64 % q) % q) as usize * place;
            i /= q as usize;
            j /= q as usize;
            place *= q as usize;
        }
        k
    };
    for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
        for (j, &y) in b.iter().enumerate().filter(|(_, y)| **y != 0) {
            out[add(i, j)] += x * y;
        }
    }
    out
}

fn histogram(reduced: &ModTerms, n: usize, q: u64, cells: usize) -> Vec<u128> {
    let q128 = q as u128;
    let lo = vec![0i64; n];
    let hi = vec![q as i64 - 1; n];
    par_fold_box(
        &lo,
        &hi,
        1 << 14,
        || vec![0u128; cells],
        |acc, z| {
            let mut idx = 0u128;
            let mut place = 1u128;
            for terms in reduced {
                let mut v = 0u128;
                for (c, vars) in terms {
                    let mut t = *c;
                    for &(i, k) in vars {
                        for _ in 0..k {
                            t = t * z[i] as u128 % q128;
                        }
                    }
                    v = (v + t) % q128;
                }
                idx += v * place;
                place *= q128;
            }
            acc[idx as usize] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

/// Phase index `a . v mod q` for every residue tuple.
pub(crate) fn phase_histogram(counts: &[u128], a: &[u64], q: u64) -> Vec<u128> {
    let mut mult = vec![0u128; q as usize];
    for (idx, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut rest = idx as u64;
        let mut k = 0u128;
        for &ai in a {
            let v = rest % q;
            rest /= q;
            k = (k + ai as u128 * v as u128) % q as u128;
        }
        mult[k as usize] += c;
    }
    mult
}

/// `S_{a,q}(y)`: the complete sum of `e(sum_i a_i F_i(z; y) / q)` over
/// `z mod q`, kept as an exact element of the cyclotomic field.
pub fn complete_sum(system: &FormSystem, y: &[i64], q: u64, a: &[u64]) -> Result<CyclotomicSum, ExpSumError> {
    if q == 0 || a.len() != system.r() {
        return Err(ExpSumError::Precondition("need q >= 1 and one numerator per form".into()));
    }
    let forms = specialize(system, y)?;
    let counts = residue_counts(&forms, q)?;
    Ok(CyclotomicSum::new(q, phase_histogram(&counts, a, q)))
}

/// Euler phi via the Moebius function, used by tests.
#[allow(dead_code)]
pub(crate) fn totient(n: u64) -> u64 {
    divisors(n)
        .into_iter()
        .map(|d| mobius(n / d) as i64 * d as i64)
        .sum::<i64>() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::count_mod;
    use crate::parser::parse_system;

    #[test]
    fn cyclotomic_polynomials() {
        let as_i = |n| cyclotomic_polynomial(n).iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(as_i(1), vec![-1, 1]);
        assert_eq!(as_i(4), vec![1, 0, 1]);
        assert_eq!(as_i(6), vec![1, -1, 1]);
        for n in 1..40 {
            assert_eq!(cyclotomic_polynomial(n).len() as u64 - 1, totient(n));
        }
    }

    #[test]
    fn split_counts_match_direct_enumeration() {
        let s = parse_system(&["x1^2*y1 + x1*x2*y2 - 3*x3^2*y1", "x2^2*y2 + x4^2*y1"], 5, 2).unwrap();
        let forms = s.specialize_y(&[1, 2]).unwrap();
        for q in [1u64, 2, 3, 4, 6, 7] {
            let fast = residue_counts(&forms, q).unwrap();
            let mut slow = vec![0u128; (q * q) as usize];
            let lo = vec![0i64; 5];
            let hi = vec![q as i64 - 1; 5];
            crate::counting::solver::for_each_point(&lo, &hi, &mut |z| {
                let v: Vec<u64> = forms
                    .iter()
                    .map(|f| reduce(&f.evaluate(z).unwrap(), q))
                    .collect();
                slow[(v[0] + q * v[1]) as usize] += 1;
            });
            assert_eq!(fast, slow, "q = {q}");
        }
    }

    #[test]
    fn small_complete_sums() {
        let s = parse_system(&["x1*y1"], 1, 1).unwrap();
        let c = complete_sum(&s, &[1], 2, &[1]).unwrap();
        assert!(c.equals_integer(&BigInt::from(0)));
        assert!(c.to_complex().norm() < 1e-15);
        let one = complete_sum(&s, &[1], 1, &[0]).unwrap();
        assert!(one.equals_integer(&BigInt::from(1)));
    }

    #[test]
    fn orthogonality_is_exact() {
        let s = parse_system(&["x1^2*y1^2 + x2^2*y2^2 - x3^2*y3^2"], 3, 3).unwrap();
        let y = [1i64, 2, 1];
        let forms = s.specialize_y(&y).unwrap();
        let fiber = crate::expsums::fiber_system(&s, &y).unwrap();
        for q in 1..=30u64 {
            let mut total = CyclotomicSum::new(q, vec![0; q as usize]);
            for a in 0..q {
                total += &complete_sum(&s, &y, q, &[a]).unwrap();
            }
            let zeros = residue_counts(&forms, q).unwrap()[0];
            assert!(total.equals_integer(&BigInt::from(q as u128 * zeros)), "q = {q}");
            if crate::arith::is_prime(q) {
                // the lifted system has a free second block of size q
                assert_eq!(count_mod(&fiber, q, 1).unwrap(), q as u128 * zeros);
            }
        }
    }
}
