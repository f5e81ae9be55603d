//! Summation of an arithmetic function `h(l, m)` over the hyperbolic
//! region `l^b1 m^b2 <= P`: the exact three-region split, dyadic slicing of
//! the middle range, and fitting of `C P log P + B P`.

use crate::arith::iroot;
use crate::counting::{upsilon_direct, upsilon_direct_real, ArithmeticFunction2};
use crate::stats::two_parameter_fit;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HyperbolaError {
    #[error("mu = {mu} is outside (0, {limit})")]
    MuOutOfRange { mu: f64, limit: f64 },
    #[error("need at least {needed} grid points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("normal equations are singular for this grid")]
    Singular,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// The height exponents; integer exponents allow exact boundary tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeightGeometry {
    Exact { b1: u32, b2: u32 },
    Real { b1: f64, b2: f64 },
}

impl HeightGeometry {
    pub fn betas(&self) -> (f64, f64) {
        match *self {
            HeightGeometry::Exact { b1, b2 } => (b1 as f64, b2 as f64),
            HeightGeometry::Real { b1, b2 } => (b1, b2),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HeightGeometry::Exact { .. })
    }

    /// Largest `m` with `l^b1 m^b2 <= p`.
    fn m_max(&self, l: u64, p: u128) -> u64 {
        match *self {
            HeightGeometry::Exact { b1, b2 } => match (l as u128).checked_pow(b1) {
                Some(lb) if lb <= p => iroot(p / lb, b2) as u64,
                _ => 0,
            },
            HeightGeometry::Real { b1, b2 } => ((p as f64) / (l as f64).powf(b1)).powf(1.0 / b2).floor() as u64,
        }
    }

    fn l_max(&self, m: u64, p: u128) -> u64 {
        self.swapped().m_max(m, p)
    }

    fn swapped(&self) -> Self {
        match *self {
            HeightGeometry::Exact { b1, b2 } => HeightGeometry::Exact { b1: b2, b2: b1 },
            HeightGeometry::Real { b1, b2 } => HeightGeometry::Real { b1: b2, b2: b1 },
        }
    }

    /// Largest `l` with `l^{2 b1} <= p`.
    fn half_l(&self, p: u128) -> u64 {
        match *self {
            HeightGeometry::Exact { b1, .. } => iroot(p, 2 * b1) as u64,
            HeightGeometry::Real { b1, .. } => (p as f64).powf(0.5 / b1).floor() as u64,
        }
    }

    fn half_m(&self, p: u128) -> u64 {
        self.swapped().half_l(p)
    }

    fn upsilon<H: ArithmeticFunction2 + ?Sized>(&self, h: &H, p: u128) -> i128 {
        match *self {
            HeightGeometry::Exact { b1, b2 } => upsilon_direct(h, b1, b2, p),
            HeightGeometry::Real { b1, b2 } => upsilon_direct_real(h, b1, b2, p as f64).value,
        }
    }
}

/// `H(L, M) = sum_{l <= L} sum_{m <= M} h(l, m)`.
pub fn partial_sum_h<H: ArithmeticFunction2 + ?Sized>(h: &H, l: u64, m: u64) -> i128 {
    (1..=l).map(|li| h.row_sum(li, 1, m)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompositionReport {
    pub t1: i128,
    pub t2: i128,
    pub t1_sym: i128,
    pub t2_sym: i128,
    pub corner: i128,
    pub total: i128,
    /// Boundaries were decided in integer arithmetic.
    pub exact: bool,
}

fn cut(p: u128, mu: f64) -> u64 {
    (p as f64).powf(mu).floor() as u64
}

fn check_mu(geom: &HeightGeometry, mu: f64) -> Result<(), HyperbolaError> {
    let limit = 0.5 / geom.betas().0;
    if !(mu > 0.0 && mu < limit) {
        return Err(HyperbolaError::MuOutOfRange { mu, limit });
    }
    Ok(())
}

/// Splits the hyperbolic sum into the rows with `m^{2 b2} > P` (cut at
/// `l <= P^mu` into `t1`, `t2`), the symmetric columns with `l^{2 b1} > P`
/// and the corner `l^{2 b1} <= P, m^{2 b2} <= P`.
pub fn decompose<H: ArithmeticFunction2 + ?Sized>(h: &H, geom: HeightGeometry, p: u128, mu: f64) -> Result<DecompositionReport, HyperbolaError> {
    check_mu(&geom, mu)?;
    let (l0, m0) = (geom.half_l(p), geom.half_m(p));
    let lmu = cut(p, mu).min(l0);
    let mmu = cut(p, mu).min(m0);
    let row = |l: u64| h.row_sum(l, m0 + 1, geom.m_max(l, p));
    let col = |m: u64| h.col_sum(m, l0 + 1, geom.l_max(m, p));
    let t1 = (1..=lmu).map(row).sum();
    let t2 = (lmu + 1..=l0).map(row).sum();
    let t1_sym = (1..=mmu).map(col).sum();
    let t2_sym = (mmu + 1..=m0).map(col).sum();
    let corner = partial_sum_h(h, l0, m0);
    Ok(DecompositionReport {
        t1,
        t2,
        t1_sym,
        t2_sym,
        corner,
        total: t1 + t2 + t1_sym + t2_sym + corner,
        exact: geom.is_exact(),
    })
}

/// `Upsilon_h(P)` under the given geometry.
pub fn upsilon<H: ArithmeticFunction2 + ?Sized>(h: &H, geom: HeightGeometry, p: u128) -> i128 {
    geom.upsilon(h, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slice {
    /// Rows `l_lo < l <= l_hi`.
    pub l_lo: u64,
    pub l_hi: u64,
    pub v: i128,
    /// Inner range frozen at the slice's largest row.
    pub v_minus: i128,
    /// Inner range frozen at the slice's smallest row.
    pub v_plus: i128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub theta: f64,
    pub slices: Vec<Slice>,
}

/// Cuts the middle range `P^mu < l <= P^{1/(2 b1)}` at
/// `L_j = P^mu (1 + theta)^j`, `(1 + theta)^J = P^{1/(2 b1) - mu}`.
/// The sandwich `v_minus <= v <= v_plus` holds for nonnegative `h`.
pub fn dyadic_slices<H: ArithmeticFunction2 + ?Sized>(h: &H, geom: HeightGeometry, p: u128, mu: f64, j: u32) -> Result<SliceReport, HyperbolaError> {
    check_mu(&geom, mu)?;
    if j == 0 {
        return Err(HyperbolaError::InvalidParams("need at least one slice".into()));
    }
    let b1 = geom.betas().0;
    let (l0, m0) = (geom.half_l(p), geom.half_m(p));
    let lmu = cut(p, mu).min(l0);
    let pf = p as f64;
    let theta = pf.powf((0.5 / b1 - mu) / j as f64) - 1.0;
    let mut cuts = vec![lmu];
    for k in 1..j {
        let c = (pf.powf(mu) * (1.0 + theta).powi(k as i32)).floor() as u64;
        cuts.push(c.clamp(*cuts.last().unwrap(), l0));
    }
    cuts.push(l0);
    let slices = cuts
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let (mut v, mut v_minus, mut v_plus) = (0, 0, 0);
            if hi > lo {
                let m_small = geom.m_max(hi, p);
                let m_large = geom.m_max(lo + 1, p);
                for l in lo + 1..=hi {
                    v += h.row_sum(l, m0 + 1, geom.m_max(l, p));
                    v_minus += h.row_sum(l, m0 + 1, m_small);
                    v_plus += h.row_sum(l, m0 + 1, m_large);
                }
            }
            Slice {
                l_lo: lo,
                l_hi: hi,
                v,
                v_minus,
                v_plus,
            }
        })
        .collect();
    Ok(SliceReport { theta, slices })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbFit {
    pub c: f64,
    pub b: f64,
    /// `(P, (Upsilon - fit) / Upsilon)` per grid point.
    pub residuals: Vec<(u128, f64)>,
    /// Change in `c` that the residuals cannot rule out: the largest
    /// residual of `Upsilon / P`, spread over the span of `log P`, doubled.
    pub c_envelope: f64,
}

/// Fits `Upsilon_h(P) ~ C P log P + B P` with weights `1 / P`, i.e. a
/// straight line of `Upsilon / P` against `log P`.
pub fn fit_cb<H: ArithmeticFunction2 + ?Sized>(h: &H, geom: HeightGeometry, grid: &[u128]) -> Result<CbFit, HyperbolaError> {
    if grid.len() < 4 {
        return Err(HyperbolaError::TooFewPoints { needed: 4, got: grid.len() });
    }
    let ups: Vec<f64> = grid.iter().map(|&p| geom.upsilon(h, p) as f64).collect();
    fit_values(grid, &ups)
}

/// [`fit_cb`] on precomputed values `Upsilon(P)`.
pub fn fit_values(grid: &[u128], ups: &[f64]) -> Result<CbFit, HyperbolaError> {
    if grid.len() < 4 || ups.len() != grid.len() {
        return Err(HyperbolaError::TooFewPoints { needed: 4, got: grid.len().min(ups.len()) });
    }
    let logs: Vec<f64> = grid.iter().map(|&p| (p as f64).ln()).collect();
    let ones = vec![1.0; grid.len()];
    let scaled: Vec<f64> = ups.iter().zip(grid).map(|(u, &p)| u / p as f64).collect();
    let (c, b) = two_parameter_fit(&logs, &ones, &scaled).ok_or(HyperbolaError::Singular)?;
    let mut worst: f64 = 0.0;
    let residuals = grid
        .iter()
        .zip(&scaled)
        .zip(&logs)
        .map(|((&p, &s), &lg)| {
            let fit = c * lg + b;
            worst = worst.max((s - fit).abs());
            let rel = if s == 0.0 { s - fit } else { (s - fit) / s };
            (p, rel)
        })
        .collect();
    let span = logs.iter().cloned().fold(f64::MIN, f64::max) - logs.iter().cloned().fold(f64::MAX, f64::min);
    if span <= 0.0 {
        return Err(HyperbolaError::Singular);
    }
    Ok(CbFit {
        c,
        b,
        residuals,
        c_envelope: 2.0 * worst / span,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CEstimate {
    pub index: u64,
    /// One estimate per grid value.
    pub estimates: Vec<f64>,
    /// Relative change between the last two estimates.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CFunctionReport {
    pub grid: Vec<u64>,
    /// `c1(m) ~ sum_{l <= L} h(l, m) / L^b1`.
    pub c1: Vec<CEstimate>,
    /// `c2(l) ~ sum_{m <= M} h(l, m) / M^b2`.
    pub c2: Vec<CEstimate>,
    /// `(L, sum_{l <= L} c2(l) / L^b1)` with `c2` at the largest grid value.
    pub c2_partial_ratio: Vec<(u64, f64)>,
}

fn drift(v: &[f64]) -> f64 {
    match v {
        [.., a, b] if *b != 0.0 => ((b - a) / b).abs(),
        [.., a, b] if a == b => 0.0,
        [.., _, _] => f64::INFINITY,
        _ => f64::NAN,
    }
}

/// Empirical limits `c1(m)` and `c2(l)` for `m, l <= index_max`.
pub fn estimate_c_functions<H: ArithmeticFunction2 + ?Sized>(h: &H, geom: HeightGeometry, grid: &[u64], index_max: u64) -> Result<CFunctionReport, HyperbolaError> {
    if grid.is_empty() || index_max == 0 {
        return Err(HyperbolaError::TooFewPoints { needed: 1, got: 0 });
    }
    let (b1, b2) = geom.betas();
    let c1: Vec<CEstimate> = (1..=index_max)
        .map(|m| {
            let estimates: Vec<f64> = grid.iter().map(|&l| h.col_sum(m, 1, l) as f64 / (l as f64).powf(b1)).collect();
            CEstimate { index: m, drift: drift(&estimates), estimates }
        })
        .collect();
    let c2: Vec<CEstimate> = (1..=index_max)
        .map(|l| {
            let estimates: Vec<f64> = grid.iter().map(|&m| h.row_sum(l, 1, m) as f64 / (m as f64).powf(b2)).collect();
            CEstimate { index: l, drift: drift(&estimates), estimates }
        })
        .collect();
    let mut acc = 0.0;
    let c2_partial_ratio = c2
        .iter()
        .map(|e| {
            acc += e.estimates.last().copied().unwrap_or(0.0);
            (e.index, acc / (e.index as f64).powf(b1))
        })
        .collect();
    Ok(CFunctionReport {
        grid: grid.to_vec(),
        c1,
        c2,
        c2_partial_ratio,
    })
}

/// Constants of the summation conditions on `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionParams {
    pub c: f64,
    pub delta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub nu: f64,
    pub d: f64,
}

impl ConditionParams {
    pub fn validate(&self) -> Result<(), HyperbolaError> {
        let ok = self.c >= 0.0 && self.delta > 0.0 && self.beta1 > 0.0 && self.beta2 > 0.0 && self.nu > 0.0 && self.d >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(HyperbolaError::InvalidParams(format!("{self:?}")))
        }
    }

    /// `D = n2 - 1 + 2R(R+1) d2` and `nu = (d1 - 1) / ((3R - 1) d2)`.
    pub fn for_shape(n2: usize, d1: u32, d2: u32, r: usize, c: f64, delta: f64, beta1: f64, beta2: f64) -> Self {
        let rf = r as f64;
        ConditionParams {
            c,
            delta,
            beta1,
            beta2,
            nu: (d1 as f64 - 1.0) / ((3.0 * rf - 1.0) * d2 as f64),
            d: n2 as f64 - 1.0 + 2.0 * rf * (rf + 1.0) * d2 as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuConstraint {
    /// `mu (1 + nu b1 / b2) <= nu / b2`.
    Growth,
    /// `mu (D - b1 + 1 + delta b1 / b2) < delta / (2 b2)`.
    Error,
    /// `b1 mu < 1/2`.
    Half,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuReport {
    /// Supremum of admissible `mu`.
    pub sup: f64,
    /// Constraints attaining the supremum.
    pub binding: Vec<MuConstraint>,
    /// True when the supremum itself is excluded.
    pub strict: bool,
    /// A value strictly inside the admissible set, if there is one.
    pub usable: Option<f64>,
}

pub fn admissible_mu(params: &ConditionParams) -> Result<MuReport, HyperbolaError> {
    params.validate()?;
    let ConditionParams { delta, beta1: b1, beta2: b2, nu, d, .. } = *params;
    let growth = (nu / b2) / (1.0 + nu * b1 / b2);
    let k = d - b1 + 1.0 + delta * b1 / b2;
    let error = if k > 0.0 { delta / (2.0 * b2 * k) } else { f64::INFINITY };
    let half = 0.5 / b1;
    let sup = growth.min(error).min(half);
    let tight = |v: f64| (v - sup).abs() <= 1e-12 * sup.abs().max(1.0);
    let mut binding = Vec::new();
    for (c, v) in [(MuConstraint::Growth, growth), (MuConstraint::Error, error), (MuConstraint::Half, half)] {
        if tight(v) {
            binding.push(c);
        }
    }
    let strict = binding.iter().any(|c| *c != MuConstraint::Growth);
    let usable = (sup > 0.0).then_some(if strict { sup * (1.0 - 1e-6) } else { sup });
    Ok(MuReport { sup, binding, strict, usable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{Constant, FromFn, SparseTable};

    const UNIT: HeightGeometry = HeightGeometry::Exact { b1: 1, b2: 1 };

    #[test]
    fn divisor_decomposition() {
        let h = Constant(1);
        let r = decompose(&h, UNIT, 100, 0.2).unwrap();
        assert_eq!(r.total, 482);
        assert!(r.exact);
        assert_eq!(decompose(&h, UNIT, 4, 0.2).unwrap().total, 8);
        let z = decompose(&Constant(0), UNIT, 100, 0.2).unwrap();
        assert_eq!((z.t1, z.t2, z.corner, z.total), (0, 0, 0, 0));
        assert!(decompose(&h, UNIT, 100, 0.5).is_err());
    }

    #[test]
    fn decomposition_matches_direct_sum() {
        let h = FromFn(|l: u64, m: u64| ((l * 7 + m * 3) % 5) as i128 - 1);
        for (b1, b2) in [(1, 1), (1, 2), (2, 1), (3, 2)] {
            let g = HeightGeometry::Exact { b1, b2 };
            for p in [1u128, 17, 100, 1000, 12345] {
                for mu in [0.05, 0.1, 0.2] {
                    if mu * b1 as f64 >= 0.5 {
                        continue;
                    }
                    assert_eq!(decompose(&h, g, p, mu).unwrap().total, upsilon_direct(&h, b1, b2, p));
                }
            }
        }
    }

    #[test]
    fn partial_sums() {
        assert_eq!(partial_sum_h(&Constant(1), 3, 5), 15);
        assert_eq!(partial_sum_h(&Constant(1), 0, 5), 0);
    }

    #[test]
    fn slices_partition_t2() {
        let h = Constant(1);
        for j in [1u32, 2, 3, 5] {
            let s = dyadic_slices(&h, UNIT, 100, 0.2, j).unwrap();
            let t2 = decompose(&h, UNIT, 100, 0.2).unwrap().t2;
            assert_eq!(s.slices.iter().map(|x| x.v).sum::<i128>(), t2);
            assert!(s.slices.iter().all(|x| x.v_minus <= x.v && x.v <= x.v_plus));
        }
        let one = dyadic_slices(&h, UNIT, 10_000, 0.2, 1).unwrap();
        assert_eq!(one.slices.len(), 1);
        assert_eq!((one.slices[0].l_lo, one.slices[0].l_hi), (6, 100));
    }

    #[test]
    fn bounded_function_has_no_log_term() {
        let h = SparseTable::new(vec![((1, 1), 4)]);
        let grid: Vec<u128> = (10..16).map(|k| 1u128 << k).collect();
        let f = fit_cb(&h, UNIT, &grid).unwrap();
        let far: Vec<u128> = grid.iter().map(|p| p << 8).collect();
        let g = fit_cb(&h, UNIT, &far).unwrap();
        assert!(f.c.abs() < 4.0 / 1024.0 && g.c.abs() < f.c.abs() / 100.0);
        let z = fit_cb(&Constant(0), UNIT, &grid).unwrap();
        assert_eq!((z.c, z.b), (0.0, 0.0));
        assert!(fit_cb(&h, UNIT, &grid[..3]).is_err());
    }

    #[test]
    fn c_functions_of_constant() {
        let r = estimate_c_functions(&Constant(1), UNIT, &[100, 1000], 5).unwrap();
        assert!(r.c1.iter().all(|e| e.estimates.iter().all(|&v| v == 1.0)));
        assert!(r.c2_partial_ratio.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn mu_constraints() {
        let p = ConditionParams { c: 1.0, delta: 0.5, beta1: 1.0, beta2: 1.0, nu: 1.0, d: 0.0 };
        let r = admissible_mu(&p).unwrap();
        assert!((r.sup - 0.5).abs() < 1e-12);
        assert!(r.strict && r.usable.unwrap() < 0.5);
        let tiny = admissible_mu(&ConditionParams { nu: 1e-9, ..p }).unwrap();
        assert!(tiny.sup < 1e-8 && tiny.binding == vec![MuConstraint::Growth] && !tiny.strict);
    }
}
