//! Arithmetic functions of two variables, shell tables, the summatory
//! function over the height region and its Möbius inversion.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_rational::Ratio;

use super::enumerate::{
    enumerate_height_region, height_exponents, single_shell, CountError, ShellCounts, DEFAULT_CHUNK,
};
use super::region::Predicates;
use crate::arith::{iroot, mobius_table};
use crate::forms::FormSystem;

/// `h(l, m)` on positive integers, with optional fast partial sums.
pub trait ArithmeticFunction2: Sync {
    fn value(&self, l: u64, m: u64) -> i128;

    /// `sum_{m_lo <= m <= m_hi} h(l, m)`.
    fn row_sum(&self, l: u64, m_lo: u64, m_hi: u64) -> i128 {
        (m_lo.max(1)..=m_hi).map(|m| self.value(l, m)).sum()
    }

    /// `sum_{l_lo <= l <= l_hi} h(l, m)`.
    fn col_sum(&self, m: u64, l_lo: u64, l_hi: u64) -> i128 {
        (l_lo.max(1)..=l_hi).map(|l| self.value(l, m)).sum()
    }

    /// `sum_{l^b1 m^b2 <= q} h(l, m)`.
    fn upsilon(&self, b1: u32, b2: u32, q: u128) -> i128 {
        upsilon_by_rows(self, b1, b2, q)
    }
}

/// `h = c` everywhere.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub i128);

impl ArithmeticFunction2 for Constant {
    fn value(&self, _: u64, _: u64) -> i128 {
        self.0
    }
    fn row_sum(&self, _: u64, lo: u64, hi: u64) -> i128 {
        let lo = lo.max(1);
        if hi < lo {
            0
        } else {
            self.0 * (hi - lo + 1) as i128
        }
    }
    fn col_sum(&self, m: u64, lo: u64, hi: u64) -> i128 {
        self.row_sum(m, lo, hi)
    }
}

/// Wraps a closure.
pub struct FromFn<F>(pub F);

impl<F: Fn(u64, u64) -> i128 + Sync> ArithmeticFunction2 for FromFn<F> {
    fn value(&self, l: u64, m: u64) -> i128 {
        (self.0)(l, m)
    }
}

/// Finitely supported `h` with prefix sums along rows and columns.
#[derive(Debug, Clone, Default)]
pub struct SparseTable {
    rows: HashMap<u64, (Vec<u64>, Vec<i128>)>,
    cols: HashMap<u64, (Vec<u64>, Vec<i128>)>,
    values: HashMap<(u64, u64), i128>,
}

fn prefix_index(keys: &[u64], prefix: &[i128], lo: u64, hi: u64) -> i128 {
    if hi < lo {
        return 0;
    }
    let a = keys.partition_point(|&k| k < lo);
    let b = keys.partition_point(|&k| k <= hi);
    prefix[b] - prefix[a]
}

impl SparseTable {
    pub fn new(entries: impl IntoIterator<Item = ((u64, u64), i128)>) -> Self {
        let mut values: HashMap<(u64, u64), i128> = HashMap::new();
        for (k, v) in entries {
            *values.entry(k).or_default() += v;
        }
        values.retain(|_, v| *v != 0);
        let mut rows: BTreeMap<u64, Vec<(u64, i128)>> = BTreeMap::new();
        let mut cols: BTreeMap<u64, Vec<(u64, i128)>> = BTreeMap::new();
        for (&(l, m), &v) in &values {
            rows.entry(l).or_default().push((m, v));
            cols.entry(m).or_default().push((l, v));
        }
        let build = |map: BTreeMap<u64, Vec<(u64, i128)>>| {
            map.into_iter()
                .map(|(k, mut v)| {
                    v.sort_unstable();
                    let keys = v.iter().map(|e| e.0).collect();
                    let mut prefix = vec![0i128];
                    for (_, x) in &v {
                        prefix.push(prefix.last().unwrap() + x);
                    }
                    (k, (keys, prefix))
                })
                .collect()
        };
        SparseTable {
            rows: build(rows),
            cols: build(cols),
            values,
        }
    }

    pub fn support(&self) -> impl Iterator<Item = (&(u64, u64), &i128)> {
        self.values.iter()
    }
}

impl ArithmeticFunction2 for SparseTable {
    fn value(&self, l: u64, m: u64) -> i128 {
        self.values.get(&(l, m)).copied().unwrap_or(0)
    }
    fn row_sum(&self, l: u64, lo: u64, hi: u64) -> i128 {
        self.rows
            .get(&l)
            .map_or(0, |(k, p)| prefix_index(k, p, lo, hi))
    }
    fn col_sum(&self, m: u64, lo: u64, hi: u64) -> i128 {
        self.cols
            .get(&m)
            .map_or(0, |(k, p)| prefix_index(k, p, lo, hi))
    }
}

fn upsilon_by_rows<H: ArithmeticFunction2 + ?Sized>(h: &H, b1: u32, b2: u32, q: u128) -> i128 {
    if q == 0 {
        return 0;
    }
    let lmax = iroot(q, b1) as u64;
    (1..=lmax)
        .map(|l| {
            let mmax = iroot(q / (l as u128).pow(b1), b2) as u64;
            h.row_sum(l, 1, mmax)
        })
        .sum()
}

/// `sum_{l^b1 m^b2 <= p} h(l, m)` with the constraint tested in integers.
pub fn upsilon_direct<H: ArithmeticFunction2 + ?Sized>(h: &H, b1: u32, b2: u32, p: u128) -> i128 {
    upsilon_by_rows(h, b1, b2, p)
}

/// Result of a summation whose region boundary was decided in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximate {
    pub value: i128,
    pub approximate: bool,
}

/// [`upsilon_direct`] for real exponents. Boundary points may be
/// misclassified, so the result is flagged as approximate.
pub fn upsilon_direct_real<H: ArithmeticFunction2 + ?Sized>(h: &H, b1: f64, b2: f64, p: f64) -> Approximate {
    let mut value = 0i128;
    if p >= 1.0 {
        let lmax = p.powf(1.0 / b1).floor() as u64;
        for l in 1..=lmax {
            let mmax = (p / (l as f64).powf(b1)).powf(1.0 / b2).floor() as u64;
            value += h.row_sum(l, 1, mmax);
        }
    }
    Approximate {
        value,
        approximate: true,
    }
}

/// `(1/4) sum mu(e1) mu(e2) Upsilon(p / (e1^b1 e2^b2))` over `e1^b1 e2^b2 <= p`.
///
/// Since `l^b1 m^b2` is an integer, `l^b1 m^b2 <= p / k` is the same test as
/// `l^b1 m^b2 <= floor(p / k)`.
pub fn moebius_assembly<H: ArithmeticFunction2 + ?Sized>(h: &H, b1: u32, b2: u32, p: u128) -> Ratio<i128> {
    Ratio::new(moebius_sum(h, b1, b2, p), 4)
}

/// Four times [`moebius_assembly`], as an integer.
pub fn moebius_sum<H: ArithmeticFunction2 + ?Sized>(h: &H, b1: u32, b2: u32, p: u128) -> i128 {
    if p == 0 {
        return 0;
    }
    let e1max = iroot(p, b1) as usize;
    let e2max = iroot(p, b2) as usize;
    let mu = mobius_table(e1max.max(e2max));
    let mut total = 0i128;
    for e1 in 1..=e1max {
        if mu[e1] == 0 {
            continue;
        }
        let k1 = (e1 as u128).pow(b1);
        let rem = p / k1;
        let lim2 = iroot(rem, b2) as usize;
        for e2 in 1..=lim2 {
            if mu[e2] == 0 {
                continue;
            }
            let k = k1 * (e2 as u128).pow(b2);
            total += (mu[e1] * mu[e2]) as i128 * h.upsilon(b1, b2, p / k);
        }
    }
    total
}

/// Complete shell counts for one system over a height region
/// `|x|^b1 |y|^b2 <= p_max`.
#[derive(Debug, Clone)]
pub struct ShellTable {
    b1: u32,
    b2: u32,
    p_max: u128,
    all: SparseTable,
    /// `(height, cumulative all, cumulative primitive)` sorted by height.
    by_height: Vec<(u128, i128, i128)>,
    entries: Vec<(u64, u64, ShellCounts)>,
}

impl ShellTable {
    pub(crate) fn from_map(b1: u32, b2: u32, p_max: u128, map: HashMap<(u64, u64), ShellCounts>) -> Self {
        let mut entries: Vec<(u64, u64, ShellCounts)> = map
            .into_iter()
            .filter(|(_, c)| c.all > 0)
            .map(|((l, m), c)| (l, m, c))
            .collect();
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut heights: Vec<(u128, i128, i128)> = entries
            .iter()
            .map(|&(l, m, c)| {
                (
                    (l as u128).pow(b1) * (m as u128).pow(b2),
                    c.all as i128,
                    c.primitive as i128,
                )
            })
            .collect();
        heights.sort_unstable_by_key(|h| h.0);
        let mut by_height: Vec<(u128, i128, i128)> = Vec::with_capacity(heights.len());
        for (h, a, p) in heights {
            match by_height.last_mut() {
                Some(last) if last.0 == h => {
                    last.1 += a;
                    last.2 += p;
                }
                Some(&mut (_, ca, cp)) => by_height.push((h, ca + a, cp + p)),
                None => by_height.push((h, a, p)),
            }
        }
        let all = SparseTable::new(entries.iter().map(|&(l, m, c)| ((l, m), c.all as i128)));
        ShellTable {
            b1,
            b2,
            p_max,
            all,
            by_height,
            entries,
        }
    }

    pub fn exponents(&self) -> (u32, u32) {
        (self.b1, self.b2)
    }

    pub fn p_max(&self) -> u128 {
        self.p_max
    }

    /// Nonzero shells as `(l, m, counts)`, sorted.
    pub fn entries(&self) -> &[(u64, u64, ShellCounts)] {
        &self.entries
    }

    fn cumulative(&self, q: u128) -> (i128, i128) {
        assert!(q <= self.p_max, "height {q} is outside the enumerated region");
        let i = self.by_height.partition_point(|e| e.0 <= q);
        if i == 0 {
            (0, 0)
        } else {
            (self.by_height[i - 1].1, self.by_height[i - 1].2)
        }
    }

    /// Sum of `h` over `l^b1 m^b2 <= q`.
    pub fn upsilon_at(&self, q: u128) -> i128 {
        self.cumulative(q).0
    }

    /// Primitive pairs with height at most `q`, counted with all four signs.
    pub fn primitive_pairs(&self, q: u128) -> i128 {
        self.cumulative(q).1
    }

    /// Biprojective points of height at most `q`.
    pub fn projective_count(&self, q: u128) -> u128 {
        let p = self.primitive_pairs(q);
        debug_assert_eq!(p % 4, 0);
        (p / 4) as u128
    }

    fn check(&self, l: u64, m: u64) {
        let inside = (l as u128)
            .checked_pow(self.b1)
            .and_then(|a| (m as u128).checked_pow(self.b2).and_then(|b| a.checked_mul(b)))
            .is_some_and(|h| h <= self.p_max);
        assert!(inside, "shell ({l}, {m}) is outside the enumerated region");
    }
}

impl ArithmeticFunction2 for ShellTable {
    fn value(&self, l: u64, m: u64) -> i128 {
        self.check(l, m);
        self.all.value(l, m)
    }
    fn row_sum(&self, l: u64, lo: u64, hi: u64) -> i128 {
        if hi >= lo.max(1) {
            self.check(l, hi);
        }
        self.all.row_sum(l, lo, hi)
    }
    fn col_sum(&self, m: u64, lo: u64, hi: u64) -> i128 {
        if hi >= lo.max(1) {
            self.check(hi, m);
        }
        self.all.col_sum(m, lo, hi)
    }
    fn upsilon(&self, b1: u32, b2: u32, q: u128) -> i128 {
        if (b1, b2) == (self.b1, self.b2) {
            self.upsilon_at(q)
        } else {
            upsilon_by_rows(self, b1, b2, q)
        }
    }
}

/// `h(l, m)`: solutions in the open set with `|x| = l`, `|y| = m`.
/// Values are memoized; whole height regions can be filled at once.
pub struct ShellFunction {
    system: FormSystem,
    preds: Predicates,
    memo: RwLock<HashMap<(u64, u64), ShellCounts>>,
    /// Regions `(b1, b2, p)` known to be complete in the memo.
    regions: RwLock<Vec<(u32, u32, u128)>>,
}

impl ShellFunction {
    pub fn new(system: &FormSystem, preds: &Predicates) -> Self {
        ShellFunction {
            system: system.clone(),
            preds: preds.clone(),
            memo: RwLock::new(HashMap::new()),
            regions: RwLock::new(Vec::new()),
        }
    }

    pub fn counts(&self, l: u64, m: u64) -> ShellCounts {
        if let Some(c) = self.memo.read().unwrap().get(&(l, m)) {
            return *c;
        }
        let covered = self.regions.read().unwrap().iter().any(|&(b1, b2, p)| {
            crate::arith::power_product_le(l, b1, m, b2, p)
        });
        if covered {
            return ShellCounts::default();
        }
        let c = single_shell(&self.system, &self.preds, l, m);
        self.memo.write().unwrap().insert((l, m), c);
        c
    }

    pub fn h(&self, l: u64, m: u64) -> u64 {
        self.counts(l, m).all
    }

    /// Enumerates the region `|x|^b1 |y|^b2 <= p` in one pass and returns it
    /// as a table; the memo is filled as a side effect.
    pub fn fill(&self, b1: u32, b2: u32, p: u128) -> ShellTable {
        let map = enumerate_height_region(&self.system, &self.preds, b1, b2, p, DEFAULT_CHUNK);
        {
            let mut memo = self.memo.write().unwrap();
            for (k, v) in &map {
                memo.insert(*k, *v);
            }
        }
        self.regions.write().unwrap().push((b1, b2, p));
        ShellTable::from_map(b1, b2, p, map)
    }
}

impl ArithmeticFunction2 for ShellFunction {
    fn value(&self, l: u64, m: u64) -> i128 {
        self.h(l, m) as i128
    }
}

/// Shell table of the system at its anticanonical height exponents.
pub fn shell_table(system: &FormSystem, preds: &Predicates, p: u128) -> Result<ShellTable, CountError> {
    let (b1, b2) = height_exponents(system)?;
    Ok(shell_table_with(system, preds, b1, b2, p, DEFAULT_CHUNK))
}

/// Shell table for explicit exponents and outer-loop partition size.
pub fn shell_table_with(system: &FormSystem, preds: &Predicates, b1: u32, b2: u32, p: u128, chunk: u64) -> ShellTable {
    ShellTable::from_map(b1, b2, p, enumerate_height_region(system, preds, b1, b2, p, chunk))
}

/// Number of biprojective points of anticanonical height at most `p`.
pub fn count_projective(system: &FormSystem, p: u128, preds: &Predicates) -> Result<u128, CountError> {
    Ok(shell_table(system, preds, p)?.projective_count(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    #[test]
    fn divisor_sums() {
        assert_eq!(upsilon_direct(&Constant(1), 1, 1, 4), 8);
        assert_eq!(upsilon_direct(&Constant(1), 1, 1, 100), 482);
        assert_eq!(upsilon_direct(&Constant(1), 1, 1, 0), 0);
        let d100: i128 = (1..=100).map(|l| 100 / l).sum();
        assert_eq!(d100, 482);
        let r = upsilon_direct_real(&Constant(1), 1.0, 1.0, 100.0);
        assert_eq!(r.value, 482);
        assert!(r.approximate);
    }

    #[test]
    fn moebius_examples() {
        assert_eq!(moebius_assembly(&Constant(0), 1, 1, 50), Ratio::from_integer(0));
        let single = FromFn(|l, m| if l == 1 && m == 1 { 4 } else { 0 });
        assert_eq!(moebius_assembly(&single, 1, 1, 1), Ratio::from_integer(1));
        let sys = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let t = shell_table(&sys, &Predicates::all(), 1).unwrap();
        assert_eq!(moebius_assembly(&t, 1, 1, 1), Ratio::from_integer(4));
        assert_eq!(count_projective(&sys, 1, &Predicates::all()).unwrap(), 4);
        assert_eq!(count_projective(&sys, 0, &Predicates::all()).unwrap(), 0);
    }

    #[test]
    fn table_matches_shell_function() {
        let sys = parse_system(&["x1*y1 + x2*y2 - x3*y3"], 3, 3).unwrap();
        let f = ShellFunction::new(&sys, &Predicates::all());
        let t = shell_table_with(&sys, &Predicates::all(), 1, 1, 12, 7);
        for l in 1..=12u64 {
            for m in 1..=12 / l {
                assert_eq!(t.value(l, m), f.value(l, m), "({l},{m})");
            }
        }
        let filled = f.fill(1, 1, 12);
        assert_eq!(filled.entries(), t.entries());
        assert_eq!(f.h(5, 2), t.value(5, 2) as u64);
    }

    #[test]
    fn sparse_table_sums() {
        let t = SparseTable::new([((1, 1), 3), ((1, 4), 2), ((2, 4), -1), ((1, 4), 1)]);
        assert_eq!(t.row_sum(1, 1, 4), 6);
        assert_eq!(t.row_sum(1, 2, 3), 0);
        assert_eq!(t.col_sum(4, 1, 2), 2);
        assert_eq!(upsilon_direct(&t, 1, 1, 4), 6);
        assert_eq!(upsilon_direct(&t, 1, 1, 8), 5);
    }
}
