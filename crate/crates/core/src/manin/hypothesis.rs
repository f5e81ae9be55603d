//! Arithmetic of the dimension hypotheses: the exponents `b1`, `b2`, the
//! exclusion levels `lambda`, the constants `K` and the thresholds.

use super::ManinError;

/// Parameters of a hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub n1: u64,
    pub n2: u64,
    pub d1: u32,
    pub d2: u32,
    pub r: u32,
    pub dim_v1: u64,
    pub dim_v2: u64,
    pub delta: f64,
}

/// Root of the `b` equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BRoot {
    /// Root with the ceiling replaced by its argument.
    pub relaxed: f64,
    /// Exact root of the piecewise equation on a plateau next to the
    /// relaxed root, if one exists.
    pub plateau: Option<f64>,
    /// `lhs - rhs` is negative at `bracket.0` and nonnegative at `bracket.1`.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl Check {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Check { name, lhs, rhs, ok: lhs > rhs }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub shape: Shape,
    pub b1: BRoot,
    pub b2: BRoot,
    pub lambda1: i64,
    pub lambda2: i64,
    pub k1: f64,
    pub k2: f64,
    /// `g1` at `u = 1 / b1` and `g2` at `u = b2`.
    pub g1: f64,
    pub g2: f64,
    pub phi: f64,
    /// `3 * 2^(d1+d2) d1 d2 R^3`.
    pub height_threshold: f64,
    /// `K1 - R(R+1)(d1-1) > g1`.
    pub fiber_x: Check,
    /// `K2 - R(R+1)(d2-1) > g2`.
    pub fiber_y: Check,
    /// `n1 + n2 - max dim V* > phi`.
    pub box_count: Check,
    /// `n1 + n2 - max dim V* > height_threshold`.
    pub height_count: Check,
    /// `min(n1, n2) > 1 + 3 * 2^(d1+d2) d1 d2`, for a single form.
    pub hypersurface: Option<Check>,
}

impl HypothesisReport {
    /// One line per inequality with its margin.
    pub fn summary(&self) -> String {
        let s = &self.shape;
        let mut out = format!(
            "shape: n1={} n2={} d1={} d2={} R={} dimV1={} dimV2={} delta={}\n",
            s.n1, s.n2, s.d1, s.d2, s.r, s.dim_v1, s.dim_v2, s.delta
        );
        let root = |b: &BRoot| match b.plateau {
            Some(p) => format!("{:.9} (plateau {:.9})", b.relaxed, p),
            None => format!("{:.9}", b.relaxed),
        };
        out.push_str(&format!("b1 = {}\nb2 = {}\n", root(&self.b1), root(&self.b2)));
        out.push_str(&format!(
            "lambda1 = {}, lambda2 = {}, K1 = {}, K2 = {}, phi = {:.6}\n",
            self.lambda1, self.lambda2, self.k1, self.k2, self.phi
        ));
        let mut checks = vec![&self.fiber_x, &self.fiber_y, &self.box_count, &self.height_count];
        if let Some(h) = &self.hypersurface {
            checks.push(h);
        }
        for c in checks {
            out.push_str(&format!(
                "{:<13} {:>14.6} > {:<14.6} margin {:>14.6}  {}\n",
                c.name,
                c.lhs,
                c.rhs,
                c.margin(),
                if c.ok { "ok" } else { "FAILS" }
            ));
        }
        out
    }
}

/// `g1(u, delta)`; infinite outside `u d2 (2R^2 + 3R) + delta < 1`.
pub fn g1(u: f64, delta: f64, d1: u32, d2: u32, r: u32) -> f64 {
    let rf = r as f64;
    let den = 1.0 - u * d2 as f64 * (2.0 * rf * rf + 3.0 * rf) - delta;
    if den <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 * rf + 3.0) * rf * (d1 as f64 - 1.0) * (u * d2 as f64 * rf * (2.0 * rf + 1.0) + 2.0 * delta) / den
}

/// `g2(u, delta)`; infinite outside `d1 (2R^2 + 3R) + u delta < u`.
pub fn g2(u: f64, delta: f64, d1: u32, d2: u32, r: u32) -> f64 {
    let rf = r as f64;
    let den = u - d1 as f64 * (2.0 * rf * rf + 3.0 * rf) - u * delta;
    if den <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 * rf + 3.0) * rf * (d2 as f64 - 1.0) * (d1 as f64 * rf * (2.0 * rf + 1.0) + 2.0 * u * delta) / den
}

/// `lhs - rhs` of the `b1` equation with the given treatment of the ceiling.
fn residual(b: f64, delta: f64, d1: u32, d2: u32, r: u32, ceiling: Option<f64>) -> f64 {
    let rf = r as f64;
    let arg = rf * (b * d1 as f64 + d2 as f64) + delta;
    let c = ceiling.unwrap_or(arg);
    let lhs = 2f64.powi((d1 + d2) as i32 - 2) * rf * (b * d1 as f64 + d2 as f64);
    let rhs = 2f64.powi(d1 as i32 - 1) * (g1(1.0 / b, delta, d1, d2, r) + rf * (rf + 1.0) * (d1 as f64 - 1.0)) + c;
    lhs - rhs
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

const B_MAX: f64 = 1e6;

/// Solves the `b1` equation on `(d2 (2R^2 + 3R), 10^6]`.
pub fn solve_b1(delta: f64, d1: u32, d2: u32, r: u32) -> Result<BRoot, ManinError> {
    if d1 < 2 || d2 < 2 {
        return Err(ManinError::Precondition("the b equations need d1, d2 >= 2".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ManinError::Precondition("delta must lie in (0, 1)".into()));
    }
    let rf = r as f64;
    // g1(1/b) is finite only for b > d2 (2R^2 + 3R) / (1 - delta)
    let lo = d2 as f64 * (2.0 * rf * rf + 3.0 * rf) / (1.0 - delta) * (1.0 + 1e-12);
    let exact = |b: f64| {
        let arg = rf * (b * d1 as f64 + d2 as f64) + delta;
        residual(b, delta, d1, d2, r, Some(arg.ceil()))
    };
    let relaxed_f = |b: f64| residual(b, delta, d1, d2, r, None);
    if relaxed_f(lo) >= 0.0 || relaxed_f(B_MAX) < 0.0 || exact(B_MAX) < 0.0 {
        return Err(ManinError::NoRoot { lo, hi: B_MAX });
    }
    let (a, b) = bisect(relaxed_f, lo, B_MAX);
    let relaxed = 0.5 * (a + b);
    let bracket = bisect(exact, lo, B_MAX);

    let arg = rf * (relaxed * d1 as f64 + d2 as f64) + delta;
    let k = arg.ceil();
    let mut plateau = None;
    for c in [k, k - 1.0, k + 1.0] {
        // b with ceil(R(b d1 + d2) + delta) = c
        let left = ((c - 1.0 - delta) / rf - d2 as f64) / d1 as f64;
        let right = ((c - delta) / rf - d2 as f64) / d1 as f64;
        let (left, right) = (left.max(lo), right.min(B_MAX));
        if left >= right {
            continue;
        }
        let f = |b: f64| residual(b, delta, d1, d2, r, Some(c));
        if f(left) < 0.0 && f(right) >= 0.0 {
            let (x, y) = bisect(f, left, right);
            plateau = Some(0.5 * (x + y));
            break;
        }
    }
    Ok(BRoot { relaxed, plateau, bracket })
}

/// The `b2` equation is the `b1` equation with the blocks exchanged.
pub fn solve_b2(delta: f64, d1: u32, d2: u32, r: u32) -> Result<BRoot, ManinError> {
    solve_b1(delta, d2, d1, r)
}

/// `3 * 2^(d1+d2) d1 d2 R^3`.
pub fn height_threshold(d1: u32, d2: u32, r: u32) -> f64 {
    3.0 * 2f64.powi((d1 + d2) as i32) * d1 as f64 * d2 as f64 * (r as f64).powi(3)
}

/// `1 + 3 * 2^(d1+d2) d1 d2`.
pub fn hypersurface_threshold(d1: u32, d2: u32) -> f64 {
    1.0 + height_threshold(d1, d2, 1)
}

pub fn hypothesis_check(shape: Shape) -> Result<HypothesisReport, ManinError> {
    let Shape { n1, n2, d1, d2, r, dim_v1, dim_v2, delta } = shape;
    let b1 = solve_b1(delta, d1, d2, r)?;
    let b2 = solve_b2(delta, d1, d2, r)?;
    let rf = r as f64;
    let lambda1 = (rf * (b1.relaxed * d1 as f64 + d2 as f64) + delta).ceil() as i64;
    let lambda2 = (rf * (b2.relaxed * d2 as f64 + d1 as f64) + delta).ceil() as i64;
    let total = (n1 + n2) as f64;
    let k1 = (total - dim_v1 as f64 - lambda1 as f64) / 2f64.powi(d1 as i32 - 1);
    let k2 = (total - dim_v2 as f64 - lambda2 as f64) / 2f64.powi(d2 as i32 - 1);
    let gx = g1(1.0 / b1.relaxed, delta, d1, d2, r);
    let gy = g2(b2.relaxed, delta, d1, d2, r);
    let phi = 2f64.powi((d1 + d2) as i32 - 2)
        * rf
        * (b1.relaxed * d1 as f64 + d2 as f64).max(b2.relaxed * d2 as f64 + d1 as f64);
    let free = total - dim_v1.max(dim_v2) as f64;
    let threshold = height_threshold(d1, d2, r);
    Ok(HypothesisReport {
        shape,
        b1,
        b2,
        lambda1,
        lambda2,
        k1,
        k2,
        g1: gx,
        g2: gy,
        phi,
        height_threshold: threshold,
        fiber_x: Check::new("fiber-x", k1 - rf * (rf + 1.0) * (d1 as f64 - 1.0), gx),
        fiber_y: Check::new("fiber-y", k2 - rf * (rf + 1.0) * (d2 as f64 - 1.0), gy),
        box_count: Check::new("box", free, phi),
        height_count: Check::new("height", free, threshold),
        hypersurface: (r == 1).then(|| Check::new("hypersurface", n1.min(n2) as f64, hypersurface_threshold(d1, d2))),
    })
}
