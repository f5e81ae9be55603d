//! Enumeration of integer zeros of a specialized system inside a box.
//!
//! One coordinate is eliminated: the first nonzero form is written as a
//! polynomial in that coordinate and its integer roots are found directly
//! (division for linear, exact roots for binomials, a divisor-filtered scan
//! otherwise). The remaining forms are checked on each candidate.
//!
//! Fast paths use `i128` and are only taken when the worst-case magnitude of
//! every term over the box is below `2^126`; otherwise evaluation falls back
//! to arbitrary precision.

use num_traits::{ToPrimitive, Zero};

use crate::arith::iroot;
use crate::forms::{FormSystem, HomogeneousForm};

const SAFE_BOUND: u128 = 1 << 126;

/// Sparse monomial: coefficient and `(variable, exponent)` pairs.
#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub coeff: i128,
    pub vars: Vec<(usize, u32)>,
}

/// A homogeneous polynomial with machine coefficients.
#[derive(Debug, Clone, Default)]
pub(crate) struct Poly {
    pub n: usize,
    pub terms: Vec<Term>,
}

impl Poly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Upper bound on `sum |term|` over the box with coordinate radii `radius`.
    pub(crate) fn magnitude_bound(&self, radius: &[u128]) -> u128 {
        let mut total: u128 = 0;
        for t in &self.terms {
            let mut b = t.coeff.unsigned_abs();
            for &(v, e) in &t.vars {
                b = b.saturating_mul(radius[v].saturating_pow(e));
            }
            total = total.saturating_add(b);
        }
        total
    }

    #[inline]
    pub fn eval(&self, z: &[i64]) -> i128 {
        let mut acc = 0i128;
        for t in &self.terms {
            acc += t.coeff * monomial(&t.vars, z);
        }
        acc
    }
}

#[inline]
fn monomial(vars: &[(usize, u32)], z: &[i64]) -> i128 {
    let mut m = 1i128;
    for &(v, e) in vars {
        let b = z[v] as i128;
        for _ in 0..e {
            m *= b;
        }
    }
    m
}

fn sparse(e: &[u32]) -> Vec<(usize, u32)> {
    e.iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| (i, k))
        .collect()
}

/// Precomputed substitution of one variable block into a system.
#[derive(Debug, Clone)]
pub(crate) struct Specializer {
    inner_n: usize,
    /// Per form: groups of terms sharing the inner exponent.
    forms: Vec<Vec<(Vec<(usize, u32)>, Vec<(i128, Vec<(usize, u32)>)>)>>,
    /// Fallback when coefficients do not fit in `i128`.
    big: Option<FormSystem>,
    fix_y: bool,
    system: FormSystem,
}

impl Specializer {
    /// `fix_y = true` substitutes `y` and leaves a system in `x`.
    pub fn new(system: &FormSystem, fix_y: bool) -> Self {
        let inner_n = if fix_y { system.n1() } else { system.n2() };
        let mut forms = Vec::with_capacity(system.r());
        let mut fits = true;
        for f in system.forms() {
            let mut groups: Vec<(Vec<(usize, u32)>, Vec<(i128, Vec<(usize, u32)>)>)> = Vec::new();
            for m in f.monomials() {
                let (inner, outer) = if fix_y {
                    (&m.xexp, &m.yexp)
                } else {
                    (&m.yexp, &m.xexp)
                };
                let Some(c) = m.coeff.to_i128() else {
                    fits = false;
                    break;
                };
                let key = sparse(inner);
                match groups.iter_mut().find(|g| g.0 == key) {
                    Some(g) => g.1.push((c, sparse(outer))),
                    None => groups.push((key, vec![(c, sparse(outer))])),
                }
            }
            forms.push(groups);
        }
        Specializer {
            inner_n,
            forms,
            big: (!fits).then(|| system.clone()),
            fix_y,
            system: system.clone(),
        }
    }

    /// Machine-width specialization, or `None` if a coefficient overflows.
    pub fn specialize(&self, outer: &[i64]) -> Option<Vec<Poly>> {
        if self.big.is_some() {
            return None;
        }
        let mut out = Vec::with_capacity(self.forms.len());
        for groups in &self.forms {
            let mut terms = Vec::new();
            for (inner, parts) in groups {
                let mut c: i128 = 0;
                for (coeff, vars) in parts {
                    let mut t = *coeff;
                    for &(v, e) in vars {
                        for _ in 0..e {
                            t = t.checked_mul(outer[v] as i128)?;
                        }
                    }
                    c = c.checked_add(t)?;
                }
                if c != 0 {
                    terms.push(Term {
                        coeff: c,
                        vars: inner.clone(),
                    });
                }
            }
            out.push(Poly {
                n: self.inner_n,
                terms,
            });
        }
        Some(out)
    }

    /// Exact specialization.
    pub fn specialize_big(&self, outer: &[i64]) -> Vec<HomogeneousForm> {
        let r = if self.fix_y {
            self.system.specialize_y(outer)
        } else {
            self.system.specialize_x(outer)
        };
        r.expect("dimensions fixed at construction")
    }

    /// Visits every zero of the specialized system in `[lo, hi]`.
    pub fn for_each_zero(&self, outer: &[i64], lo: &[i64], hi: &[i64], visit: &mut impl FnMut(&[i64])) {
        if let Some(polys) = self.specialize(outer) {
            if solve_box(&polys, lo, hi, visit) {
                return;
            }
        }
        brute_force_box(&self.specialize_big(outer), lo, hi, visit);
    }
}

/// True when every term of every form stays below `2^126` on the box.
pub(crate) fn fits_machine(polys: &[Poly], lo: &[i64], hi: &[i64]) -> bool {
    let radius: Vec<u128> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| a.unsigned_abs().max(b.unsigned_abs()) as u128)
        .collect();
    polys.iter().all(|p| p.magnitude_bound(&radius) < SAFE_BOUND)
}

/// Visits every point of the box.
pub(crate) fn for_each_point(lo: &[i64], hi: &[i64], visit: &mut impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut z = lo.to_vec();
    loop {
        visit(&z);
        let mut i = 0;
        loop {
            if i == z.len() {
                return;
            }
            if z[i] < hi[i] {
                z[i] += 1;
                break;
            }
            z[i] = lo[i];
            i += 1;
        }
    }
}

/// Arbitrary-precision exhaustive search; the oracle for [`solve_box`].
pub(crate) fn brute_force_box(forms: &[HomogeneousForm], lo: &[i64], hi: &[i64], visit: &mut impl FnMut(&[i64])) {
    for_each_point(lo, hi, &mut |z| {
        if forms.iter().all(|f| f.evaluate(z).map(|v| v.is_zero()).unwrap_or(false)) {
            visit(z);
        }
    });
}

/// Enumerates zeros of `polys` in the box. Returns `false` without visiting
/// anything when the magnitude bound rules out machine arithmetic.
pub(crate) fn solve_box(polys: &[Poly], lo: &[i64], hi: &[i64], visit: &mut impl FnMut(&[i64])) -> bool {
    let n = lo.len();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return true;
    }
    let radius: Vec<u128> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| a.unsigned_abs().max(b.unsigned_abs()) as u128)
        .collect();
    if polys.iter().any(|p| p.magnitude_bound(&radius) >= SAFE_BOUND) {
        return false;
    }
    let active: Vec<&Poly> = polys.iter().filter(|p| !p.is_zero()).collect();
    if active.is_empty() {
        for_each_point(lo, hi, visit);
        return true;
    }
    let lead = active[0];
    let rest = &active[1..];
    // a nonzero constant never vanishes
    if lead.terms.iter().all(|t| t.vars.is_empty()) {
        return true;
    }

    let k = choose_variable(lead, lo, hi);
    let deg = lead
        .terms
        .iter()
        .map(|t| exponent_of(&t.vars, k))
        .max()
        .unwrap_or(0) as usize;
    // coefficient of z_k^j as a polynomial in the other variables
    let mut by_power: Vec<Vec<Term>> = vec![Vec::new(); deg + 1];
    for t in &lead.terms {
        let j = exponent_of(&t.vars, k) as usize;
        by_power[j].push(Term {
            coeff: t.coeff,
            vars: t.vars.iter().copied().filter(|&(v, _)| v != k).collect(),
        });
    }

    let others: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let mut z: Vec<i64> = lo.to_vec();
    let mut c = vec![0i128; deg + 1];
    let mut cands: Vec<i64> = Vec::new();
    loop {
        for (j, terms) in by_power.iter().enumerate() {
            let mut s = 0i128;
            for t in terms {
                s += t.coeff * monomial(&t.vars, &z);
            }
            c[j] = s;
        }
        cands.clear();
        roots_in_range(&c, lo[k], hi[k], &mut cands);
        for &r in &cands {
            z[k] = r;
            if rest.iter().all(|p| p.eval(&z) == 0) {
                visit(&z);
            }
        }
        // advance the odometer over the other coordinates
        let mut idx = 0;
        loop {
            if idx == others.len() {
                return true;
            }
            let i = others[idx];
            if z[i] < hi[i] {
                z[i] += 1;
                break;
            }
            z[i] = lo[i];
            idx += 1;
        }
    }
}

fn exponent_of(vars: &[(usize, u32)], k: usize) -> u32 {
    vars.iter().find(|&&(v, _)| v == k).map_or(0, |&(_, e)| e)
}

/// Prefers the lowest degree, then a constant leading coefficient, then the
/// widest range (eliminating it saves the most work).
fn choose_variable(p: &Poly, lo: &[i64], hi: &[i64]) -> usize {
    let mut best: Option<(usize, (u32, bool, i128))> = None;
    for k in 0..p.n {
        let deg = p
            .terms
            .iter()
            .map(|t| exponent_of(&t.vars, k))
            .max()
            .unwrap_or(0);
        if deg == 0 {
            continue;
        }
        let lead_constant = p
            .terms
            .iter()
            .filter(|t| exponent_of(&t.vars, k) == deg)
            .all(|t| t.vars.len() == 1);
        let width = hi[k] as i128 - lo[k] as i128;
        let key = (deg, !lead_constant, -width);
        if best.as_ref().is_none_or(|(_, b)| key < *b) {
            best = Some((k, key));
        }
    }
    best.expect("nonconstant polynomial has a variable").0
}

/// Integer roots of `sum c[j] z^j` with `lo <= z <= hi`, each once.
fn roots_in_range(c: &[i128], lo: i64, hi: i64, out: &mut Vec<i64>) {
    let Some(top) = c.iter().rposition(|&v| v != 0) else {
        out.extend(lo..=hi);
        return;
    };
    if top == 0 {
        return;
    }
    let low = c.iter().position(|&v| v != 0).unwrap();
    let push = |z: i128, out: &mut Vec<i64>| {
        if z >= lo as i128 && z <= hi as i128 {
            out.push(z as i64);
        }
    };
    if low == top {
        // c_top z^top = 0
        push(0, out);
        return;
    }
    let middle_zero = c[1..top].iter().all(|&v| v == 0);
    if middle_zero && low == 0 {
        // binomial: c_top z^top = -c_0
        let num = -c[0];
        if num % c[top] != 0 {
            return;
        }
        let v = num / c[top];
        let e = top as u32;
        if v == 0 {
            push(0, out);
            return;
        }
        if v < 0 && e.is_multiple_of(2) {
            return;
        }
        let r = iroot(v.unsigned_abs(), e);
        if r.checked_pow(e) != Some(v.unsigned_abs()) {
            return;
        }
        let r = r as i128;
        if v < 0 {
            push(-r, out);
        } else if e.is_multiple_of(2) {
            push(-r, out);
            push(r, out);
        } else {
            push(r, out);
        }
        return;
    }
    // z = 0 is a root exactly when c_0 = 0; a nonzero root divides c_low
    if low > 0 {
        push(0, out);
    }
    let cl = c[low];
    for z in lo..=hi {
        if z == 0 {
            continue;
        }
        let zz = z as i128;
        if cl % zz != 0 {
            continue;
        }
        let mut acc = 0i128;
        for j in (low..=top).rev() {
            acc = acc * zz + c[j];
        }
        if acc == 0 {
            out.push(z);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    fn both(sys: &FormSystem, y: &[i64], r: i64) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
        let sp = Specializer::new(sys, true);
        let n = sys.n1();
        let lo = vec![-r; n];
        let hi = vec![r; n];
        let mut fast = Vec::new();
        let polys = sp.specialize(y).unwrap();
        assert!(solve_box(&polys, &lo, &hi, &mut |z| fast.push(z.to_vec())));
        let mut slow = Vec::new();
        brute_force_box(&sp.specialize_big(y), &lo, &hi, &mut |z| slow.push(z.to_vec()));
        fast.sort();
        slow.sort();
        (fast, slow)
    }

    #[test]
    fn solver_matches_brute_force() {
        let systems: Vec<(Vec<&str>, usize, usize)> = vec![
            (vec!["x1*y1 - x2*y2"], 2, 2),
            (vec!["x1*y1 + x2*y2 + x3*y3"], 3, 3),
            (vec!["x1^2*y1^2 + x2^2*y2^2 - x3^2*y3^2"], 3, 3),
            (vec!["x1^2*y1 + 3*x1*x2*y2 - x2^2*y1 + x3^2*y2"], 3, 2),
            (vec!["x1^3*y1 - 2*x2^3*y2"], 2, 2),
            (vec!["x1*y1 - x2*y2", "x1*y2 - x3*y1"], 3, 2),
            (vec!["x1^2*y1 - x2*x3*y2 + x1*x3*y1"], 3, 2),
        ];
        for (texts, n1, n2) in systems {
            let sys = parse_system(&texts, n1, n2).unwrap();
            for y in [[1i64, 1, 1], [0, 2, -1], [3, -2, 5], [0, 0, 0], [-1, 4, 0]] {
                let (fast, slow) = both(&sys, &y[..n2], 4);
                assert_eq!(fast, slow, "{texts:?} y={y:?}");
            }
        }
    }

    #[test]
    fn roots_cover_cases() {
        let mut out = Vec::new();
        roots_in_range(&[-9, 0, 1], -5, 5, &mut out);
        assert_eq!(out, vec![-3, 3]);
        out.clear();
        roots_in_range(&[8, 0, 0, 1], -5, 5, &mut out);
        assert_eq!(out, vec![-2]);
        out.clear();
        roots_in_range(&[6, -5, 1], -5, 5, &mut out);
        assert_eq!(out, vec![2, 3]);
        out.clear();
        roots_in_range(&[0, 0, 0], -1, 1, &mut out);
        assert_eq!(out, vec![-1, 0, 1]);
        out.clear();
        roots_in_range(&[0, -4, 0, 1], -5, 5, &mut out);
        out.sort();
        assert_eq!(out, vec![-2, 0, 2]);
    }

    #[test]
    fn falls_back_on_large_magnitudes() {
        let sys = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let sp = Specializer::new(&sys, true);
        let polys = sp.specialize(&[i64::MAX, i64::MAX]).unwrap();
        let lo = [-i64::MAX; 2];
        let hi = [i64::MAX; 2];
        assert!(!solve_box(&polys, &lo, &hi, &mut |_| {}));
    }
}
