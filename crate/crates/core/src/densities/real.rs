//! The real density on the box `[-1, 1]^(n1 + n2)`: slab-volume Monte Carlo
//! and integration over the zero set in coordinate charts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::DensityError;
use crate::forms::{BihomogeneousForm, FormSystem};

/// Samples drawn from one RNG stream; streams are merged in index order so
/// results do not depend on the number of workers.
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealMethod {
    MonteCarloSlab,
    LerayChart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealDensityReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub method: RealMethod,
    pub samples: u64,
    /// Slab half-width, slab estimates only.
    pub epsilon: Option<f64>,
    pub seed: u64,
    /// `(n1 - d1)(n2 - d2) / 4` times the estimate, when both factors are positive.
    pub tau_infty: Option<f64>,
}

/// A real polynomial in `x` then `y`.
#[derive(Debug, Clone)]
struct RealPoly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl RealPoly {
    fn new(f: &BihomogeneousForm) -> Self {
        use num_traits::ToPrimitive;
        RealPoly {
            terms: f
                .monomials()
                .iter()
                .map(|m| {
                    let vars = m
                        .xexp
                        .iter()
                        .chain(&m.yexp)
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (i, e))
                        .collect();
                    (m.coeff.to_f64().unwrap_or(f64::NAN), vars)
                })
                .collect(),
        }
    }

    #[inline]
    fn eval(&self, z: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, vars) in &self.terms {
            let mut t = *c;
            for &(v, e) in vars {
                t *= z[v].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    fn degree_in(&self, k: usize) -> u32 {
        self.terms
            .iter()
            .map(|(_, vars)| vars.iter().find(|v| v.0 == k).map_or(0, |v| v.1))
            .max()
            .unwrap_or(0)
    }

    /// Coefficients of the polynomial in `z_k` with the other coordinates fixed.
    fn slice(&self, k: usize, z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|c| *c = 0.0);
        for (c, vars) in &self.terms {
            let mut t = *c;
            let mut j = 0usize;
            for &(v, e) in vars {
                if v == k {
                    j = e as usize;
                } else {
                    t *= z[v].powi(e as i32);
                }
            }
            out[j] += t;
        }
    }
}

fn sample_point(rng: &mut ChaCha8Rng, z: &mut [f64]) {
    for v in z.iter_mut() {
        *v = 2.0 * rng.random::<f64>() - 1.0;
    }
}

fn chunks(samples: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..samples.div_ceil(CHUNK)).map(move |c| (c, (samples - c * CHUNK).min(CHUNK)))
}

fn tau_factor(system: &FormSystem) -> Option<f64> {
    let a = system.n1() as i64 - system.d1() as i64;
    let b = system.n2() as i64 - system.d2() as i64;
    (a > 0 && b > 0).then(|| (a * b) as f64 / 4.0)
}

/// The slab ladder `2^-3, ..., 2^-8`.
pub fn default_epsilons() -> Vec<f64> {
    (3..=8).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabLadder {
    /// One report per half-width, in the order given.
    pub rungs: Vec<RealDensityReport>,
    /// `2 e(eps/2) - e(eps)` from the last two rungs when they halve.
    pub richardson: Option<f64>,
    /// Estimates grow steadily as the slab shrinks, typical of a singular
    /// zero set with infinite density.
    pub exploding: bool,
}

/// Estimates `(2 eps)^-R vol{ |F_i| <= eps for all i }` on `[-1,1]^(n1+n2)`.
pub fn sigma_infty_mc(system: &FormSystem, epsilon: f64, samples: u64, seed: u64) -> Result<RealDensityReport, DensityError> {
    Ok(sigma_infty_mc_ladder(system, &[epsilon], samples, seed)?.rungs.remove(0))
}

/// One sample set shared by every half-width in `epsilons`.
pub fn sigma_infty_mc_ladder(system: &FormSystem, epsilons: &[f64], samples: u64, seed: u64) -> Result<SlabLadder, DensityError> {
    if samples == 0 || epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(DensityError::Precondition(
            "need samples >= 1 and positive slab widths".into(),
        ));
    }
    let polys: Vec<RealPoly> = system.forms().iter().map(RealPoly::new).collect();
    let n = system.n1() + system.n2();
    let per_chunk: Vec<Vec<u64>> = chunks(samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, m)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut z = vec![0.0; n];
            let mut hits = vec![0u64; epsilons.len()];
            for _ in 0..m {
                sample_point(&mut rng, &mut z);
                let worst = polys.iter().map(|p| p.eval(&z).abs()).fold(0.0, f64::max);
                for (h, &e) in hits.iter_mut().zip(epsilons) {
                    if worst <= e {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .collect();
    let mut hits = vec![0u64; epsilons.len()];
    for h in per_chunk {
        for (a, b) in hits.iter_mut().zip(h) {
            *a += b;
        }
    }
    let volume = 2f64.powi(n as i32);
    let r = system.r() as i32;
    let tau = tau_factor(system);
    let rungs: Vec<RealDensityReport> = epsilons
        .iter()
        .zip(&hits)
        .map(|(&e, &h)| {
            let f = h as f64 / samples as f64;
            let scale = volume / (2.0 * e).powi(r);
            let estimate = scale * f;
            RealDensityReport {
                estimate,
                standard_error: scale * (f * (1.0 - f) / samples as f64).sqrt(),
                method: RealMethod::MonteCarloSlab,
                samples,
                epsilon: Some(e),
                seed,
                tau_infty: tau.map(|t| t * estimate),
            }
        })
        .collect();
    let k = rungs.len();
    let richardson = (k >= 2
        && (rungs[k - 2].epsilon.unwrap() / rungs[k - 1].epsilon.unwrap() - 2.0).abs() < 1e-12)
        .then(|| 2.0 * rungs[k - 1].estimate - rungs[k - 2].estimate);
    let exploding = k >= 3 && {
        let (a, b, c) = (rungs[k - 3].estimate, rungs[k - 2].estimate, rungs[k - 1].estimate);
        a > 0.0 && a < b && b < c && c > 1.2 * a
    };
    Ok(SlabLadder {
        rungs,
        richardson,
        exploding,
    })
}

/// How the zero set is split among coordinate charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartPolicy {
    /// Each zero is assigned to the coordinate with the largest `|dF/dz_k|`.
    Argmax,
    /// Every chart contributes with weight `(dF/dz_k)^2 / |grad F|^2`.
    Smooth,
    /// Solve for one coordinate (index into `x` then `y`) everywhere.
    Fixed(usize),
}

/// Real roots of `sum c[j] t^j` in `[lo, hi]`.
pub(crate) fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let Some(deg) = c.iter().rposition(|&v| v != 0.0) else {
        return Vec::new();
    };
    let c = &c[..=deg];
    let eval = |t: f64| c.iter().rev().fold(0.0, |a, &b| a * t + b);
    let mut out = Vec::new();
    match deg {
        0 => {}
        1 => {
            let t = -c[0] / c[1];
            if (lo..=hi).contains(&t) {
                out.push(t);
            }
        }
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc >= 0.0 {
                let s = disc.sqrt();
                let qv = -0.5 * (b + if b >= 0.0 { s } else { -s });
                let mut roots = Vec::new();
                if qv != 0.0 {
                    roots.push(qv / a);
                    roots.push(cc / qv);
                } else {
                    roots.push(0.0);
                }
                roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
                roots.dedup();
                out.extend(roots.into_iter().filter(|t| (lo..=hi).contains(t)));
            }
        }
        _ => {
            let d: Vec<f64> = (1..=deg).map(|j| j as f64 * c[j]).collect();
            let mut cuts = vec![lo];
            cuts.extend(real_roots(&d, lo, hi));
            cuts.push(hi);
            for w in cuts.windows(2) {
                let (mut a, mut b) = (w[0], w[1]);
                let (mut fa, fb) = (eval(a), eval(b));
                if fa == 0.0 {
                    if out.last() != Some(&a) {
                        out.push(a);
                    }
                    continue;
                }
                if fb == 0.0 {
                    out.push(b);
                    continue;
                }
                if fa.signum() == fb.signum() {
                    continue;
                }
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = eval(m);
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
    }
    out
}

/// Integrates `1/|dF/dz_k|` over the zero set of a single form.
pub fn sigma_infty_leray(system: &FormSystem, samples: u64, seed: u64, policy: ChartPolicy) -> Result<RealDensityReport, DensityError> {
    if system.r() != 1 {
        return Err(DensityError::Precondition(
            "chart integration needs a single form".into(),
        ));
    }
    if samples == 0 {
        return Err(DensityError::Precondition("need samples >= 1".into()));
    }
    let form = &system.forms()[0];
    let n1 = system.n1();
    let n = n1 + system.n2();
    let poly = RealPoly::new(form);
    let grads: Vec<RealPoly> = (0..n)
        .map(|k| {
            let d = if k < n1 {
                form.partial_x(k)
            } else {
                form.partial_y(k - n1)
            };
            RealPoly::new(&d.expect("index in range"))
        })
        .collect();
    let charts: Vec<usize> = match policy {
        ChartPolicy::Fixed(k) => {
            if k >= n || poly.degree_in(k) == 0 {
                return Err(DensityError::ChartDegenerate(format!(
                    "dF/dz_{} vanishes identically",
                    k + 1
                )));
            }
            vec![k]
        }
        _ => (0..n).filter(|&k| poly.degree_in(k) > 0).collect(),
    };
    if charts.is_empty() {
        return Err(DensityError::ChartDegenerate("form is constant".into()));
    }
    let per_chart = (samples / charts.len() as u64).max(1);
    let cube = 2f64.powi(n as i32 - 1);
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (ci, &k) in charts.iter().enumerate() {
        let deg = poly.degree_in(k) as usize;
        let sums: Vec<(f64, f64)> = chunks(per_chart)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(c, m)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((ci as u64) << 40) | c);
                let mut z = vec![0.0; n];
                let mut coeffs = vec![0.0; deg + 1];
                let mut g = vec![0.0; n];
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..m {
                    sample_point(&mut rng, &mut z);
                    poly.slice(k, &z, &mut coeffs);
                    let mut val = 0.0;
                    for t in real_roots(&coeffs, -1.0, 1.0) {
                        z[k] = t;
                        let dk = grads[k].eval(&z);
                        if dk == 0.0 {
                            continue;
                        }
                        val += match policy {
                            ChartPolicy::Fixed(_) => 1.0 / dk.abs(),
                            ChartPolicy::Argmax => {
                                for (j, gj) in g.iter_mut().enumerate() {
                                    *gj = grads[j].eval(&z).abs();
                                }
                                let owner = (0..n)
                                    .max_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap().then(b.cmp(&a)))
                                    .unwrap();
                                if owner == k {
                                    1.0 / dk.abs()
                                } else {
                                    0.0
                                }
                            }
                            ChartPolicy::Smooth => {
                                let norm2: f64 = grads.iter().map(|gr| gr.eval(&z).powi(2)).sum();
                                dk.abs() / norm2
                            }
                        };
                    }
                    s += val;
                    s2 += val * val;
                }
                (s, s2)
            })
            .collect();
        let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let m = per_chart as f64;
        let mean = s / m;
        let var = (s2 / m - mean * mean).max(0.0) / m;
        estimate += cube * mean;
        variance += cube * cube * var;
    }
    Ok(RealDensityReport {
        estimate,
        standard_error: variance.sqrt(),
        method: RealMethod::LerayChart,
        samples: per_chart * charts.len() as u64,
        epsilon: None,
        seed,
        tau_infty: tau_factor(system).map(|t| t * estimate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    #[test]
    fn root_finder() {
        let mut r = real_roots(&[-0.25, 0.0, 1.0], -1.0, 1.0);
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] + 0.5).abs() < 1e-15 && (r[1] - 0.5).abs() < 1e-15);
        // (t - 0.1)(t + 0.3)(t - 0.7)
        let c = [0.021, -0.17, -0.5, 1.0];
        let r = real_roots(&c, -1.0, 1.0);
        let want = [-0.3, 0.1, 0.7];
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{r:?}");
        }
        assert!(real_roots(&[1.0, 0.0, 1.0], -1.0, 1.0).is_empty());
        assert_eq!(real_roots(&[-2.0, 1.0], -1.0, 1.0), Vec::<f64>::new());
    }

    #[test]
    fn seeded_runs_repeat() {
        let s = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let a = sigma_infty_mc(&s, 0.125, 20_000, 7).unwrap();
        let b = sigma_infty_mc(&s, 0.125, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| sigma_infty_mc(&s, 0.125, 20_000, 7).unwrap());
        assert_eq!(a.estimate.to_bits(), c.estimate.to_bits());
        let l1 = sigma_infty_leray(&s, 20_000, 3, ChartPolicy::Argmax).unwrap();
        let l2 = pool.install(|| sigma_infty_leray(&s, 20_000, 3, ChartPolicy::Argmax).unwrap());
        assert_eq!(l1.estimate.to_bits(), l2.estimate.to_bits());
    }

    #[test]
    fn empty_real_zero_set() {
        // |x|^2 |y|^2 vanishes only on x = 0 or y = 0
        let terms: Vec<String> = (1..=3)
            .flat_map(|i| (1..=3).map(move |j| format!("x{i}^2*y{j}^2")))
            .collect();
        let s = parse_system(&[terms.join(" + ")], 3, 3).unwrap();
        let lad = sigma_infty_mc_ladder(&s, &default_epsilons(), 200_000, 1).unwrap();
        let est: Vec<f64> = lad.rungs.iter().map(|r| r.estimate).collect();
        assert!(est.windows(2).all(|w| w[1] < w[0]), "{est:?}");
        assert!(!lad.exploding);
    }

    #[test]
    fn degenerate_chart_is_reported() {
        let s = parse_system(&["x1*y1 - x2*y2"], 3, 2).unwrap();
        assert!(matches!(
            sigma_infty_leray(&s, 100, 1, ChartPolicy::Fixed(2)),
            Err(DensityError::ChartDegenerate(_))
        ));
    }
}
