//! Exact enumeration over boxes, fibers and height regions.

use std::collections::HashMap;

use rayon::prelude::*;

use super::region::{cardinality, BoxSpec, Predicates, Rational};
use super::solver::{for_each_point, Specializer};
use crate::arith::{gcd_slice, iroot, max_norm};
use crate::forms::FormSystem;

/// Outer vectors handled per parallel task.
pub const DEFAULT_CHUNK: u64 = 512;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CountError {
    #[error("height exponent n{block} - R*d{block} = {beta} is not positive; the height needs n{block} > R d{block}")]
    DegenerateHeight { block: u8, beta: i64 },
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("box is too large to enumerate")]
    TooLarge,
}

fn decode(mut idx: u64, lo: &[i64], hi: &[i64], out: &mut [i64]) {
    for i in 0..lo.len() {
        let w = (hi[i] - lo[i] + 1) as u64;
        out[i] = lo[i] + (idx % w) as i64;
        idx /= w;
    }
}

/// Folds `step` over every point of the box in parallel chunks and merges
/// the chunk results in index order.
pub(crate) fn par_fold_box<A, I, S, M>(lo: &[i64], hi: &[i64], chunk: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &[i64]) + Sync,
    M: Fn(A, A) -> A,
{
    let total = cardinality(lo, hi);
    if total == 0 {
        return init();
    }
    let total = u64::try_from(total).expect("box cardinality fits in u64");
    let chunk = chunk.max(1);
    let nchunks = total.div_ceil(chunk);
    let parts: Vec<A> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let mut v = vec![0i64; lo.len()];
            let end = ((c + 1) * chunk).min(total);
            for idx in c * chunk..end {
                decode(idx, lo, hi, &mut v);
                step(&mut acc, &v);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// Number of `(x, y)` in the scaled boxes with every form vanishing.
pub fn count_box(system: &FormSystem, p1: Rational, p2: Rational, bx: &BoxSpec) -> u128 {
    count_box_chunked(system, p1, p2, bx, DEFAULT_CHUNK)
}

/// [`count_box`] with an explicit partition of the outer loop.
pub fn count_box_chunked(system: &FormSystem, p1: Rational, p2: Rational, bx: &BoxSpec, chunk: u64) -> u128 {
    let (xlo, xhi) = bx.x_ranges(p1);
    let (ylo, yhi) = bx.y_ranges(p2);
    let outer_is_y = cardinality(&ylo, &yhi) <= cardinality(&xlo, &xhi);
    let (olo, ohi, ilo, ihi) = if outer_is_y {
        (ylo, yhi, xlo, xhi)
    } else {
        (xlo, xhi, ylo, yhi)
    };
    let sp = Specializer::new(system, outer_is_y);
    par_fold_box(
        &olo,
        &ohi,
        chunk,
        || 0u128,
        |acc, w| sp.for_each_zero(w, &ilo, &ihi, &mut |_| *acc += 1),
        |a, b| a + b,
    )
}

/// Number of `x` in `p1 * box1` solving the system specialized at `y`.
pub fn count_fiber(system: &FormSystem, y: &[i64], p1: Rational, bx: &BoxSpec) -> u128 {
    let (lo, hi) = bx.x_ranges(p1);
    let sp = Specializer::new(system, true);
    let mut n = 0u128;
    sp.for_each_zero(y, &lo, &hi, &mut |_| n += 1);
    n
}

/// Gcd-unrestricted and primitive counts on one shell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShellCounts {
    pub all: u64,
    pub primitive: u64,
}

impl std::ops::AddAssign for ShellCounts {
    fn add_assign(&mut self, o: Self) {
        self.all += o.all;
        self.primitive += o.primitive;
    }
}

pub(crate) type ShellMap = HashMap<(u64, u64), ShellCounts>;

fn merge_maps(mut a: ShellMap, b: ShellMap) -> ShellMap {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

/// True for the representative of `{v, -v}` whose first nonzero entry is positive.
fn is_sign_representative(v: &[i64]) -> bool {
    v.iter().find(|c| **c != 0).is_some_and(|c| *c > 0)
}

pub fn height_exponents(system: &FormSystem) -> Result<(u32, u32), CountError> {
    let (b1, b2) = system.height_exponents();
    if b1 < 1 {
        return Err(CountError::DegenerateHeight { block: 1, beta: b1 });
    }
    if b2 < 1 {
        return Err(CountError::DegenerateHeight { block: 2, beta: b2 });
    }
    Ok((b1 as u32, b2 as u32))
}

/// Every solution with `x != 0`, `y != 0`, both kept by the predicates and
/// `|x|^b1 |y|^b2 <= p`, histogrammed by `(|x|, |y|)`.
///
/// Pairs with `|x|^(2 b1) <= p` are found with `x` outside and `y` solved;
/// the rest have `|y|^(2 b2) < p` and are found the other way round.
pub(crate) fn enumerate_height_region(
    system: &FormSystem,
    preds: &Predicates,
    b1: u32,
    b2: u32,
    p: u128,
    chunk: u64,
) -> ShellMap {
    if p == 0 {
        return ShellMap::new();
    }
    let l_half = iroot(p, 2 * b1) as i64;
    let m_half = iroot(p, 2 * b2) as i64;
    let n1 = system.n1();
    let n2 = system.n2();

    let by_x = Specializer::new(system, false);
    let part_a = par_fold_box(
        &vec![-l_half; n1],
        &vec![l_half; n1],
        chunk,
        ShellMap::new,
        |acc, x| {
            if !is_sign_representative(x) || !preds.on_x.allows(x) {
                return;
            }
            let l = max_norm(x);
            let mmax = iroot(p / (l as u128).pow(b1), b2) as i64;
            let gx = gcd_slice(x);
            by_x.for_each_zero(x, &vec![-mmax; n2], &vec![mmax; n2], &mut |y| {
                let m = max_norm(y);
                if m == 0 || !preds.on_y.allows(y) {
                    return;
                }
                let prim = gx == 1 && gcd_slice(y) == 1;
                *acc.entry((l, m)).or_default() += ShellCounts {
                    all: 2,
                    primitive: if prim { 2 } else { 0 },
                };
            });
        },
        merge_maps,
    );

    let by_y = Specializer::new(system, true);
    let part_b = par_fold_box(
        &vec![-m_half; n2],
        &vec![m_half; n2],
        chunk,
        ShellMap::new,
        |acc, y| {
            if !is_sign_representative(y) || !preds.on_y.allows(y) {
                return;
            }
            let m = max_norm(y);
            let lmax = iroot(p / (m as u128).pow(b2), b1) as i64;
            if lmax <= l_half {
                return;
            }
            let gy = gcd_slice(y);
            by_y.for_each_zero(y, &vec![-lmax; n1], &vec![lmax; n1], &mut |x| {
                let l = max_norm(x);
                if l as i64 <= l_half || !preds.on_x.allows(x) {
                    return;
                }
                let prim = gy == 1 && gcd_slice(x) == 1;
                *acc.entry((l, m)).or_default() += ShellCounts {
                    all: 2,
                    primitive: if prim { 2 } else { 0 },
                };
            });
        },
        merge_maps,
    );
    merge_maps(part_a, part_b)
}

/// Counts on the single shell `|x| = l`, `|y| = m`.
pub(crate) fn single_shell(system: &FormSystem, preds: &Predicates, l: u64, m: u64) -> ShellCounts {
    if l == 0 || m == 0 {
        return ShellCounts::default();
    }
    let n1 = system.n1() as i32;
    let n2 = system.n2() as i32;
    let on_shell = |r: u64, n: i32| (2 * r as u128 + 1).pow(n as u32) - (2 * r as u128 - 1).pow(n as u32);
    let outer_is_x = on_shell(l, n1) <= on_shell(m, n2);
    let (r_out, r_in) = if outer_is_x { (l, m) } else { (m, l) };
    let n_out = if outer_is_x { system.n1() } else { system.n2() };
    let n_in = if outer_is_x { system.n2() } else { system.n1() };
    let sp = Specializer::new(system, !outer_is_x);
    let (pred_out, pred_in) = if outer_is_x {
        (&preds.on_x, &preds.on_y)
    } else {
        (&preds.on_y, &preds.on_x)
    };
    let ro = r_out as i64;
    let ri = r_in as i64;
    par_fold_box(
        &vec![-ro; n_out],
        &vec![ro; n_out],
        DEFAULT_CHUNK,
        ShellCounts::default,
        |acc, w| {
            if max_norm(w) != r_out || !is_sign_representative(w) || !pred_out.allows(w) {
                return;
            }
            let gw = gcd_slice(w);
            sp.for_each_zero(w, &vec![-ri; n_in], &vec![ri; n_in], &mut |z| {
                if max_norm(z) != r_in || !pred_in.allows(z) {
                    return;
                }
                let prim = gw == 1 && gcd_slice(z) == 1;
                *acc += ShellCounts {
                    all: 2,
                    primitive: if prim { 2 } else { 0 },
                };
            });
        },
        |mut a, b| {
            a += b;
            a
        },
    )
}

/// Every point of a box, for tests and small oracles.
pub fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_point(lo, hi, &mut |z| out.push(z.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    fn r(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    #[test]
    fn box_examples() {
        let sys = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let b = BoxSpec::unit(2, 2);
        assert_eq!(count_box(&sys, r(1), r(1), &b), 33);
        assert_eq!(count_box(&sys, r(0), r(0), &b), 1);
        let plus = parse_system(&["x1*y1 + x2*y2"], 2, 2).unwrap();
        assert_eq!(count_box(&plus, r(1), r(1), &b), 33);
    }

    #[test]
    fn box_matches_exhaustive() {
        let sys = parse_system(&["x1^2*y1 - x2*x3*y2", "x1*x2*y2 - x3^2*y1"], 3, 2).unwrap();
        let b = BoxSpec::unit(3, 2);
        for (p1, p2) in [(2, 3), (3, 1), (1, 4)] {
            let mut brute = 0u128;
            for x in box_points(&[-p1; 3], &[p1; 3]) {
                for y in box_points(&[-p2; 2], &[p2; 2]) {
                    if sys.is_solution(&x, &y).unwrap() {
                        brute += 1;
                    }
                }
            }
            assert_eq!(count_box(&sys, r(p1), r(p2), &b), brute);
        }
    }

    #[test]
    fn fiber_examples() {
        let sys = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let b = BoxSpec::unit(2, 2);
        assert_eq!(count_fiber(&sys, &[1, 1], r(1), &b), 3);
        assert_eq!(count_fiber(&sys, &[0, 0], r(3), &b), 49);
        assert_eq!(count_fiber(&sys, &[2, 5], r(0), &b), 1);
    }

    #[test]
    fn shell_of_bilinear() {
        let sys = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let s = single_shell(&sys, &Predicates::all(), 1, 1);
        assert_eq!(s.all, 16);
        assert_eq!(s.primitive, 16);
    }

    #[test]
    fn degenerate_height_is_named() {
        let sys = parse_system(&["x1^2*y1 - x2^2*y2"], 2, 2).unwrap();
        let e = height_exponents(&sys).unwrap_err();
        assert!(e.to_string().contains("n1 > R d1"));
    }
}
