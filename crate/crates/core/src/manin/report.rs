//! Side-by-side comparison of projective counts with the predicted
//! leading constant.

use super::zeta::{zeta, zeta_prime};
use super::ManinError;
use crate::arith::mobius_table;
use crate::counting::{shell_table, Predicates};
use crate::densities::{euler_product, sigma_infty_leray, ChartPolicy, EulerReport, LevelPolicy, RealDensityReport};
use crate::forms::FormSystem;
use crate::hyperbola::{fit_values, CbFit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConfig {
    pub p_max: u64,
    pub level: LevelPolicy,
    pub samples: u64,
    pub seed: u64,
    pub chart: ChartPolicy,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            p_max: 100,
            level: LevelPolicy::Budget { max_work: 100_000_000, max_r: 4 },
            samples: 1_000_000,
            seed: 1,
            chart: ChartPolicy::Argmax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRow {
    pub p: u128,
    pub count: u128,
    /// `count / (predicted P log P)`.
    pub ratio: f64,
}

/// A truncated Moebius sum against its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialSumRow {
    pub p: u128,
    pub value: f64,
    pub limit: f64,
    pub envelope: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManinReport {
    pub betas: (u32, u32),
    pub rows: Vec<CountRow>,
    pub fit: CbFit,
    pub sigma_inf: RealDensityReport,
    pub euler: EulerReport,
    /// `(4 zeta(b1) zeta(b2))^-1 sigma_inf prod sigma_p`.
    pub predicted: f64,
    pub ratio: f64,
    /// Ratio range from two standard errors of `sigma_inf`.
    pub ratio_interval: (f64, f64),
    pub s1: Vec<PartialSumRow>,
    pub s2: Vec<PartialSumRow>,
}

/// `sum mu(e1) mu(e2) (e1^b1 e2^b2)^-1` and the same weighted by
/// `log(e1^b1 e2^b2)`, over `e1^b1 e2^b2 <= P`.
pub fn moebius_weight_sums(b1: u32, b2: u32, p: u128) -> (f64, f64) {
    let lmax = crate::arith::iroot(p, b1) as u64;
    let mu = mobius_table(lmax.max(crate::arith::iroot(p, b2) as u64) as usize);
    let (mut s1, mut s2) = (0.0, 0.0);
    for e1 in 1..=lmax {
        if mu[e1 as usize] == 0 {
            continue;
        }
        let w1 = (e1 as u128).pow(b1);
        let mmax = crate::arith::iroot(p / w1, b2) as u64;
        for e2 in 1..=mmax {
            let m = mu[e1 as usize] * mu[e2 as usize];
            if m == 0 {
                continue;
            }
            let w = (w1 * (e2 as u128).pow(b2)) as f64;
            s1 += m as f64 / w;
            s2 += m as f64 * w.ln() / w;
        }
    }
    (s1, s2)
}

/// Limits of [`moebius_weight_sums`].
pub fn moebius_weight_limits(b1: u32, b2: u32) -> (f64, f64) {
    let (z1, z2) = (zeta(b1 as f64), zeta(b2 as f64));
    let s1 = 1.0 / (z1 * z2);
    let s2 = (b2 as f64 * zeta_prime(b2 as f64) / (z2 * z2)) / z1 + (b1 as f64 * zeta_prime(b1 as f64) / (z1 * z1)) / z2;
    (s1, s2)
}

pub fn manin_report(system: &FormSystem, preds: &Predicates, grid: &[u128], cfg: &DensityConfig) -> Result<ManinReport, ManinError> {
    if system.r() != 1 {
        return Err(ManinError::Precondition("the density prediction is for a single form".into()));
    }
    let (b1, b2) = crate::counting::height_exponents(system)?;
    if b1 < 2 || b2 < 2 {
        return Err(ManinError::Precondition(format!("need both height exponents >= 2, got ({b1}, {b2})")));
    }
    let p_max = *grid.iter().max().ok_or_else(|| ManinError::Precondition("empty grid".into()))?;
    let table = shell_table(system, preds, p_max)?;
    let counts: Vec<u128> = grid.iter().map(|&p| table.projective_count(p)).collect();
    let fit = fit_values(grid, &counts.iter().map(|&c| c as f64).collect::<Vec<_>>())?;

    let sigma_inf = sigma_infty_leray(system, cfg.samples, cfg.seed, cfg.chart)?;
    let euler = euler_product(system, cfg.p_max, cfg.level)?;
    let scale = euler.product / (4.0 * zeta(b1 as f64) * zeta(b2 as f64));
    let predicted = scale * sigma_inf.estimate;
    let lo = scale * (sigma_inf.estimate - 2.0 * sigma_inf.standard_error);
    let hi = scale * (sigma_inf.estimate + 2.0 * sigma_inf.standard_error);
    let ratio = fit.c / predicted;
    let ratio_interval = (fit.c / hi, if lo > 0.0 { fit.c / lo } else { f64::INFINITY });

    let rows = grid
        .iter()
        .zip(&counts)
        .map(|(&p, &count)| {
            let pf = p as f64;
            CountRow { p, count, ratio: count as f64 / (predicted * pf * pf.ln()) }
        })
        .collect();
    let (l1, l2) = moebius_weight_limits(b1, b2);
    let (mut s1, mut s2) = (Vec::new(), Vec::new());
    for &p in grid {
        let (v1, v2) = moebius_weight_sums(b1, b2, p);
        let env1 = (p as f64).powf(-1.0 / 3.0);
        // the log weight costs a factor log P in the tail
        let env2 = env1 * (1.0 + (p as f64).ln());
        s1.push(PartialSumRow { p, value: v1, limit: l1, envelope: env1, within: (v1 - l1).abs() <= env1 });
        s2.push(PartialSumRow { p, value: v2, limit: l2, envelope: env2, within: (v2 - l2).abs() <= env2 });
    }
    Ok(ManinReport {
        betas: (b1, b2),
        rows,
        fit,
        sigma_inf,
        euler,
        predicted,
        ratio,
        ratio_interval,
        s1,
        s2,
    })
}

impl ManinReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("height exponents: {:?}\n", self.betas));
        s.push_str(&format!(
            "sigma_inf = {:.6} +- {:.6}, euler product (p <= {}) = {:.6}\n",
            self.sigma_inf.estimate, self.sigma_inf.standard_error, self.euler.p_max, self.euler.product
        ));
        s.push_str(&format!("predicted C = {:.6}\n", self.predicted));
        s.push_str(&format!("fitted C = {:.6}, B = {:.6}\n", self.fit.c, self.fit.b));
        s.push_str(&format!(
            "C ratio = {:.4} (interval {:.4} .. {:.4})\n",
            self.ratio, self.ratio_interval.0, self.ratio_interval.1
        ));
        let within = |rows: &[PartialSumRow]| rows.iter().all(|r| r.within);
        s.push_str(&format!("S1 within envelope: {}\nS2 within envelope: {}\n", within(&self.s1), within(&self.s2)));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_sums_converge() {
        let (l1, l2) = moebius_weight_limits(2, 2);
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((l1 - 1.0 / (z2 * z2)).abs() < 1e-14);
        let (v1, v2) = moebius_weight_sums(2, 2, 1_000_000);
        assert!((v1 - l1).abs() < 1e-2 && (v2 - l2).abs() < 5e-2, "{v1} {l1} {v2} {l2}");
        assert_eq!(moebius_weight_sums(3, 2, 1), (1.0, 0.0));
    }
}
