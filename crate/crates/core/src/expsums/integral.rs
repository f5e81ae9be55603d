use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::series::truncated_singular_series;
use super::{e, require_nondegenerate, specialize, ComplexSum, ExpSumError};
use crate::counting::{count_fiber, BoxSpec, Rational};
use crate::forms::{FormSystem, HomogeneousForm};
use crate::stats::GL8;

/// Default number of trapezoid intervals per axis on the coarse level.
pub const DEFAULT_GRID: usize = 16;

/// Cap on tensor grid points per component and level.
const MAX_POINTS: f64 = 6.7e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryReport {
    pub value: Complex64,
    /// Richardson difference between the two grid levels.
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralReport {
    pub value: f64,
    pub error: f64,
    pub b: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct RealPoly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl RealPoly {
    fn combine(forms: &[HomogeneousForm], weights: &[f64]) -> Self {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (f, &w) in forms.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (c, ex) in f.terms() {
                *acc.entry(ex.clone()).or_insert(0.0) += w * c.to_f64().unwrap_or(f64::INFINITY);
            }
        }
        RealPoly {
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(ex, c)| (c, ex.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k)).collect()))
                .collect(),
        }
    }

    fn eval(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, vars)| c * vars.iter().map(|&(i, k)| v[i].powi(k as i32)).product::<f64>())
            .sum()
    }

    fn magnitude(&self, radius: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, vars)| c.abs() * vars.iter().map(|&(i, k)| radius[i].powi(k as i32)).product::<f64>())
            .sum()
    }

    fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, v)| v.iter().map(|p| p.1).sum::<u32>()).max().unwrap_or(0)
    }

    /// Splits into variable-disjoint pieces; each piece lists its variables
    /// and the terms re-indexed into them.
    fn components(&self, n: usize) -> (Vec<(Vec<usize>, RealPoly)>, Vec<usize>) {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut used = vec![false; n];
        for (_, vars) in &self.terms {
            for &(i, _) in vars {
                used[i] = true;
            }
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
                parent[a] = b;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in (0..n).filter(|&i| used[i]) {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        let comps = groups
            .into_values()
            .map(|vars| {
                let terms = self
                    .terms
                    .iter()
                    .filter(|(_, tv)| tv.first().is_some_and(|(i, _)| vars.contains(i)))
                    .map(|(c, tv)| {
                        let local = tv.iter().map(|&(i, k)| (vars.iter().position(|&v| v == i).unwrap(), k)).collect();
                        (*c, local)
                    })
                    .collect();
                (vars, RealPoly { terms })
            })
            .collect();
        let free = (0..n).filter(|&i| !used[i]).collect();
        (comps, free)
    }
}

fn intervals(bx: &BoxSpec) -> Vec<(f64, f64)> {
    bx.x.iter()
        .map(|(a, b)| (a.to_f64().unwrap_or(0.0), b.to_f64().unwrap_or(0.0)))
        .collect()
}

/// Tensor trapezoid of `f` with `g` intervals per axis.
fn trapezoid<F: Fn(&[f64]) -> Complex64 + Sync>(iv: &[(f64, f64)], g: usize, f: &F) -> Complex64 {
    let dim = iv.len();
    let nodes: Vec<Vec<(f64, f64)>> = iv
        .iter()
        .map(|&(a, b)| {
            let h = (b - a) / g as f64;
            (0..=g)
                .map(|k| (a + h * k as f64, if k == 0 || k == g { h / 2.0 } else { h }))
                .collect()
        })
        .collect();
    let per = g + 1;
    let total = per.pow(dim as u32);
    let chunk = 1 << 12;
    let parts: Vec<ComplexSum> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut s = ComplexSum::default();
            let mut v = vec![0.0; dim];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = idx;
                let mut w = 1.0;
                for d in 0..dim {
                    let (x, wx) = nodes[d][rest % per];
                    v[d] = x;
                    w *= wx;
                    rest /= per;
                }
                s.add(f(&v) * w);
            }
            s
        })
        .collect();
    let mut s = ComplexSum::default();
    for p in parts {
        s.merge(p);
    }
    s.value()
}

/// Two-level trapezoid with Richardson extrapolation; the grid is raised
/// until the phase is resolved.
fn richardson<F: Fn(&[f64]) -> Complex64 + Sync>(iv: &[(f64, f64)], grid: usize, oscillations: f64, f: &F) -> (Complex64, f64) {
    let dim = iv.len().max(1) as f64;
    let mut g = grid.max((24.0 * oscillations).ceil() as usize).max(8);
    let cap = (MAX_POINTS.powf(1.0 / dim) / 2.0).floor() as usize;
    g = g.min(cap.max(8));
    let coarse = trapezoid(iv, g, f);
    let fine = trapezoid(iv, 2 * g, f);
    let diff = (fine - coarse) / 3.0;
    (fine + diff, diff.norm())
}

/// `I_y(beta)`: the integral of `e(sum_i beta_i F_i(v; y))` over the box
/// by tensor trapezoid at two levels. Variable-disjoint pieces of the phase
/// are integrated separately and multiplied.
pub fn oscillatory_integral(system: &FormSystem, y: &[i64], beta: &[f64], grid: usize, bx: &BoxSpec) -> Result<OscillatoryReport, ExpSumError> {
    if grid < 8 {
        return Err(ExpSumError::Precondition("grid needs at least 8 points per axis".into()));
    }
    if beta.len() != system.r() || bx.x.len() != system.n1() {
        return Err(ExpSumError::Precondition("beta or box has the wrong dimension".into()));
    }
    let forms = specialize(system, y)?;
    Ok(integrate_phase(&RealPoly::combine(&forms, beta), &intervals(bx), grid))
}

fn integrate_phase(g: &RealPoly, iv: &[(f64, f64)], grid: usize) -> OscillatoryReport {
    let (comps, free) = g.components(iv.len());
    let mut value = Complex64::new(free.iter().map(|&i| iv[i].1 - iv[i].0).product(), 0.0);
    let mut parts = Vec::new();
    for (vars, poly) in &comps {
        let civ: Vec<(f64, f64)> = vars.iter().map(|&i| iv[i]).collect();
        let radius: Vec<f64> = civ.iter().map(|(a, b)| a.abs().max(b.abs())).collect();
        let width = civ.iter().map(|(a, b)| b - a).fold(0.0, f64::max);
        // phase change along one axis is at most deg * max|G| * width / radius
        let osc = poly.degree() as f64 * poly.magnitude(&radius) * width / radius.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
        let (v, err) = richardson(&civ, grid, osc, &|x: &[f64]| e(poly.eval(x)));
        parts.push((v, err));
        value *= v;
    }
    let mut error = 0.0;
    for (i, (_, err)) in parts.iter().enumerate() {
        let others: f64 = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (v, _))| v.norm()).product();
        let free_vol: f64 = free.iter().map(|&k| iv[k].1 - iv[k].0).product();
        error += err * others * free_vol;
    }
    OscillatoryReport { value, error }
}

/// Gauss-Legendre rule on `[-b, b]` with `panels` equal panels.
fn gl_nodes(b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * b / panels as f64;
    let mut out = Vec::with_capacity(panels * GL8.len());
    for p in 0..panels {
        let mid = -b + h * (p as f64 + 0.5);
        for (x, w) in GL8 {
            out.push((mid + x * h / 2.0, w * h / 2.0));
        }
    }
    out
}

fn tensor_gl(forms: &[HomogeneousForm], iv: &[(f64, f64)], grid: usize, b: f64, panels: usize) -> (f64, f64) {
    let r = forms.len();
    let nodes = gl_nodes(b, panels);
    let per = nodes.len();
    let total = per.pow(r as u32);
    // beta and -beta give conjugate values; visit one of each pair
    let results: Vec<(f64, f64)> = (0..total)
        .into_par_iter()
        .filter(|&idx| idx < total - 1 - idx)
        .map(|idx| {
            let mut rest = idx;
            let mut beta = vec![0.0; r];
            let mut w = 2.0;
            for bi in beta.iter_mut() {
                let (x, wx) = nodes[rest % per];
                *bi = x;
                w *= wx;
                rest /= per;
            }
            let rep = integrate_phase(&RealPoly::combine(forms, &beta), iv, grid);
            (w * rep.value.re, w * rep.error)
        })
        .collect();
    let mut v = crate::stats::CompensatedSum::default();
    let mut err = 0.0;
    for (x, e) in results {
        v.add(x);
        err += e;
    }
    (v.value(), err)
}

/// `J_y(B)`: the integral of `I_y(beta)` over `|beta_i| <= B`, by
/// Gauss-Legendre panels in `beta` sized to the oscillation of `I_y`.
pub fn truncated_singular_integral(system: &FormSystem, y: &[i64], b: f64, grid: usize, bx: &BoxSpec) -> Result<IntegralReport, ExpSumError> {
    if !(b > 0.0) {
        return Err(ExpSumError::Precondition("B must be positive".into()));
    }
    if grid < 8 || bx.x.len() != system.n1() {
        return Err(ExpSumError::Precondition("grid below 8 or box of the wrong dimension".into()));
    }
    let forms = specialize(system, y)?;
    let iv = intervals(bx);
    let radius: Vec<f64> = iv.iter().map(|(a, b)| a.abs().max(b.abs())).collect();
    let fmax = forms
        .iter()
        .map(|f| RealPoly::combine(std::slice::from_ref(f), &[1.0]).magnitude(&radius))
        .fold(0.0, f64::max);
    // I_y oscillates in beta at frequency at most max|F|
    let panels = ((2.0 * b * fmax * 2.0).ceil() as usize).max(2);
    let panels = panels + panels % 2;
    let (coarse, e1) = tensor_gl(&forms, &iv, grid, b, panels);
    let (fine, e2) = tensor_gl(&forms, &iv, grid, b, 2 * panels);
    Ok(IntegralReport {
        value: fine,
        error: (fine - coarse).abs() + e1.max(e2),
        b,
        panels: 2 * panels,
    })
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - (std::f64::consts::PI * u).powi(2) / 6.0
    } else {
        (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
    }
}

/// `J_y(B)` by the other order of integration: the `beta` integral is done
/// in closed form, leaving the integral over the box of
/// `prod_i 2B sinc(2B F_i(v; y))`. Practical for small `B` only.
pub fn singular_integral_sinc(system: &FormSystem, y: &[i64], b: f64, grid: usize, bx: &BoxSpec) -> Result<OscillatoryReport, ExpSumError> {
    let forms = specialize(system, y)?;
    let polys: Vec<RealPoly> = forms.iter().map(|f| RealPoly::combine(std::slice::from_ref(f), &[1.0])).collect();
    let iv = intervals(bx);
    let radius: Vec<f64> = iv.iter().map(|(a, b)| a.abs().max(b.abs())).collect();
    let osc = polys.iter().map(|p| p.degree() as f64 * p.magnitude(&radius) * 2.0 * b).fold(0.0, f64::max);
    let (v, err) = richardson(&iv, grid, osc, &|v: &[f64]| {
        Complex64::new(polys.iter().map(|p| 2.0 * b * sinc(2.0 * b * p.eval(v))).product(), 0.0)
    });
    Ok(OscillatoryReport { value: v, error: err })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberPrediction {
    pub series_value: f64,
    pub integral_value: f64,
    pub q_max: u64,
    pub b: f64,
    pub p1: u64,
    pub exponent: i64,
    pub prediction: f64,
    pub exact: u128,
    pub relative_error: f64,
}

impl FiberPrediction {
    /// Recomputes the prediction from the stored parts.
    pub fn recompute(&self) -> f64 {
        self.series_value * self.integral_value * (self.p1 as f64).powi(self.exponent as i32)
    }
}

/// Compares `S_y(Q) J_y(B) P1^{n1 - R d1}` with the exact fiber count on
/// `P1 * [-1, 1]^{n1}`.
pub fn fiber_prediction(system: &FormSystem, y: &[i64], p1: u64, q_max: u64, b: f64, grid: usize) -> Result<FiberPrediction, ExpSumError> {
    let exponent = system.n1() as i64 - system.r() as i64 * system.d1() as i64;
    if exponent <= 0 {
        return Err(ExpSumError::Precondition("the fiber prediction needs n1 > R d1".into()));
    }
    require_nondegenerate(&specialize(system, y)?, y)?;
    let bx = BoxSpec::unit(system.n1(), system.n2());
    let series = truncated_singular_series(system, y, q_max)?;
    let integral = truncated_singular_integral(system, y, b, grid, &bx)?;
    let exact = count_fiber(system, y, Rational::from_integer(p1 as i64), &bx);
    let mut out = FiberPrediction {
        series_value: series.value,
        integral_value: integral.value,
        q_max,
        b,
        p1,
        exponent,
        prediction: 0.0,
        exact,
        relative_error: 0.0,
    };
    out.prediction = out.recompute();
    out.relative_error = (out.prediction - exact as f64).abs() / (exact as f64).max(1.0);
    Ok(out)
}
