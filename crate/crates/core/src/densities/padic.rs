//! Solution counts modulo prime powers and the local densities built on them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use super::DensityError;
use crate::arith::is_prime;
use crate::forms::FormSystem;

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

/// How `N(r)` is computed. All modes give identical counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Every residue class of `(x, y)` modulo `p^r`.
    Exhaustive,
    /// Depth-first extension of solutions modulo `p^k` by all `p^(n1+n2)` increments.
    Lifting,
    /// Single forms only: residue histograms of variable-disjoint pieces,
    /// combined by cyclic convolution.
    Convolution,
    /// Cheapest applicable mode within the budget.
    Auto,
}

/// A system with coefficients reduced modulo `p^r`, variables `x` then `y`.
#[derive(Debug, Clone)]
struct ModSystem {
    n1: usize,
    n: usize,
    forms: Vec<Vec<(u64, Vec<(usize, u32)>)>>,
}

fn reduce(c: &BigInt, m: u64) -> u64 {
    c.mod_floor(&BigInt::from(m)).to_u64().expect("reduced below modulus")
}

impl ModSystem {
    fn new(system: &FormSystem, modulus: u64) -> Self {
        let n1 = system.n1();
        let forms = system
            .forms()
            .iter()
            .map(|f| {
                f.monomials()
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
                        (reduce(&m.coeff, modulus), vars)
                    })
                    .filter(|(c, _)| *c != 0)
                    .collect()
            })
            .collect();
        ModSystem {
            n1,
            n: n1 + system.n2(),
            forms,
        }
    }

    #[inline]
    fn eval(&self, form: usize, z: &[u64], m: u64) -> u64 {
        let mm = m as u128;
        let mut acc: u128 = 0;
        for (c, vars) in &self.forms[form] {
            let mut t = (*c as u128) % mm;
            for &(v, e) in vars {
                let b = z[v] as u128 % mm;
                for _ in 0..e {
                    t = t * b % mm;
                }
            }
            acc += t;
            if acc >= mm {
                acc -= mm;
            }
        }
        acc as u64
    }

    #[inline]
    fn vanishes(&self, z: &[u64], m: u64) -> bool {
        (0..self.forms.len()).all(|i| self.eval(i, z, m) == 0)
    }

    /// `x ≢ 0` and `y ≢ 0` modulo `p`.
    fn is_star(&self, z: &[u64], p: u64) -> bool {
        z[..self.n1].iter().any(|v| v % p != 0) && z[self.n1..].iter().any(|v| v % p != 0)
    }
}

/// `N(1..=r)` and, when requested, `N*(1..=r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountLadder {
    pub p: u64,
    pub all: Vec<u128>,
    pub star: Vec<u128>,
    pub mode: CountMode,
}

fn modulus(p: u64, r: u32) -> Result<u64, DensityError> {
    p.checked_pow(r)
        .filter(|&q| q < 1 << 62)
        .ok_or(DensityError::ModulusTooLarge { p, r })
}

fn check_prime(p: u64) -> Result<(), DensityError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(DensityError::NotPrime(p))
    }
}

/// Estimated elementary steps for computing the ladder up to `r`.
pub fn work_estimate(system: &FormSystem, p: u64, r: u32, mode: CountMode) -> Option<u128> {
    let n = (system.n1() + system.n2()) as u32;
    let pn = (p as u128).checked_pow(n)?;
    match mode {
        CountMode::Exhaustive => (1..=r).try_fold(0u128, |acc, k| {
            acc.checked_add((p as u128).checked_pow(k * n)?)
        }),
        CountMode::Lifting => {
            let dim = n.saturating_sub(system.r() as u32);
            (1..r).try_fold(pn, |acc, k| {
                acc.checked_add((p as u128).checked_pow(k * dim)?.checked_mul(pn)?)
            })
        }
        CountMode::Convolution => {
            if system.r() != 1 {
                return None;
            }
            let comps = components(system);
            (1..=r).try_fold(0u128, |acc, k| {
                let q = (p as u128).checked_pow(k)?;
                let per: u128 = comps
                    .iter()
                    .map(|c| q.checked_pow(c.len() as u32))
                    .try_fold(0u128, |a, v| a.checked_add(v?))?;
                // four inclusion-exclusion terms for the star count
                acc.checked_add(per.checked_add(q.checked_mul(comps.len() as u128)?)?.checked_mul(4)?)
            })
        }
        CountMode::Auto => [CountMode::Exhaustive, CountMode::Lifting, CountMode::Convolution]
            .iter()
            .filter_map(|&m| work_estimate(system, p, r, m))
            .min(),
    }
}

fn resolve_mode(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<CountMode, DensityError> {
    let chosen = match mode {
        CountMode::Auto => {
            let mut best: Option<(u128, CountMode)> = None;
            for m in [CountMode::Convolution, CountMode::Lifting, CountMode::Exhaustive] {
                if let Some(w) = work_estimate(system, p, r, m) {
                    if best.is_none_or(|(bw, _)| w < bw) {
                        best = Some((w, m));
                    }
                }
            }
            best.map(|b| b.1).unwrap_or(CountMode::Lifting)
        }
        CountMode::Convolution if system.r() != 1 => {
            return Err(DensityError::Precondition(
                "convolution counting needs a single form".into(),
            ))
        }
        m => m,
    };
    let needed = work_estimate(system, p, r, chosen).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(DensityError::BudgetExceeded { needed, budget });
    }
    Ok(chosen)
}

/// `N(k)` and `N*(k)` for `k = 1..=r`.
pub fn count_ladder(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<CountLadder, DensityError> {
    check_prime(p)?;
    if r == 0 {
        return Err(DensityError::Precondition("level r must be at least 1".into()));
    }
    let q = modulus(p, r)?;
    let mode = resolve_mode(system, p, r, mode, budget)?;
    let ms = ModSystem::new(system, q);
    let (all, star) = match mode {
        CountMode::Exhaustive => (1..=r)
            .map(|k| exhaustive(&ms, p, p.pow(k)))
            .unzip(),
        CountMode::Lifting => lifting(&ms, p, r),
        CountMode::Convolution => (1..=r)
            .map(|k| convolution(system, &ms, p, p.pow(k)))
            .unzip(),
        CountMode::Auto => unreachable!("resolved above"),
    };
    Ok(CountLadder { p, all, star, mode })
}

fn exhaustive(ms: &ModSystem, p: u64, q: u64) -> (u128, u128) {
    let n = ms.n as u32;
    let total = (q as u128).pow(n) as u64;
    let chunk: u64 = 1 << 14;
    (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = (0u128, 0u128);
            let mut z = vec![0u64; ms.n];
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = idx;
                for v in z.iter_mut() {
                    *v = rest % q;
                    rest /= q;
                }
                if ms.vanishes(&z, q) {
                    acc.0 += 1;
                    if ms.is_star(&z, p) {
                        acc.1 += 1;
                    }
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn lifting(ms: &ModSystem, p: u64, r: u32) -> (Vec<u128>, Vec<u128>) {
    let lo = vec![0i64; ms.n];
    let hi = vec![p as i64 - 1; ms.n];
    let mut base: Vec<Vec<u64>> = Vec::new();
    crate::counting::solver::for_each_point(&lo, &hi, &mut |z| {
        let z: Vec<u64> = z.iter().map(|&v| v as u64).collect();
        if ms.vanishes(&z, p) {
            base.push(z);
        }
    });
    let per: Vec<(Vec<u128>, Vec<u128>)> = base
        .par_iter()
        .map(|z| {
            let mut all = vec![0u128; r as usize];
            let mut star = vec![0u128; r as usize];
            let is_star = ms.is_star(z, p);
            let mut counts = vec![0u128; r as usize];
            let mut work = z.clone();
            lift(ms, p, 1, p, r, &mut work, &mut counts);
            for k in 0..r as usize {
                all[k] = counts[k];
                if is_star {
                    star[k] = counts[k];
                }
            }
            (all, star)
        })
        .collect();
    let mut all = vec![0u128; r as usize];
    let mut star = vec![0u128; r as usize];
    for (a, s) in per {
        for k in 0..r as usize {
            all[k] += a[k];
            star[k] += s[k];
        }
    }
    (all, star)
}

/// `z` solves modulo `pk = p^k`; counts it at level `k` and descends.
fn lift(ms: &ModSystem, p: u64, k: u32, pk: u64, r: u32, z: &mut Vec<u64>, counts: &mut [u128]) {
    counts[k as usize - 1] += 1;
    if k == r {
        return;
    }
    let next = pk * p;
    let base = z.clone();
    let n = ms.n;
    let mut t = vec![0u64; n];
    loop {
        for i in 0..n {
            z[i] = base[i] + pk * t[i];
        }
        if ms.vanishes(z, next) {
            lift(ms, p, k + 1, next, r, z, counts);
        }
        let mut i = 0;
        loop {
            if i == n {
                z.copy_from_slice(&base);
                return;
            }
            t[i] += 1;
            if t[i] < p {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

/// Variables grouped into classes linked by shared monomials.
fn components(system: &FormSystem) -> Vec<Vec<usize>> {
    let n1 = system.n1();
    let n = n1 + system.n2();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for f in system.forms() {
        for m in f.monomials() {
            let vars: Vec<usize> = m
                .xexp
                .iter()
                .chain(&m.yexp)
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, _)| i)
                .collect();
            for w in vars.windows(2) {
                let a = find(&mut parent, w[0]);
                let b = find(&mut parent, w[1]);
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Number of zeros modulo `q` of a single form when the variables in
/// `restricted` are confined to multiples of `p`.
fn convolution_restricted(ms: &ModSystem, comps: &[Vec<usize>], p: u64, q: u64, restricted: &[bool]) -> u128 {
    let qs = q as usize;
    let mut acc: Option<Vec<u128>> = None;
    for comp in comps {
        let terms: Vec<&(u64, Vec<(usize, u32)>)> = ms.forms[0]
            .iter()
            .filter(|(_, vars)| vars.iter().any(|(v, _)| comp.contains(v)))
            .collect();
        let mut hist = vec![0u128; qs];
        let lo = vec![0i64; comp.len()];
        let hi: Vec<i64> = comp
            .iter()
            .map(|&v| if restricted[v] { (q / p) as i64 - 1 } else { q as i64 - 1 })
            .collect();
        let mut z = vec![0u64; ms.n];
        crate::counting::solver::for_each_point(&lo, &hi, &mut |w| {
            for (j, &v) in comp.iter().enumerate() {
                z[v] = if restricted[v] { w[j] as u64 * p } else { w[j] as u64 };
            }
            let mut s: u128 = 0;
            let mm = q as u128;
            for (c, vars) in &terms {
                let mut t = *c as u128 % mm;
                for &(v, e) in vars {
                    for _ in 0..e {
                        t = t * z[v] as u128 % mm;
                    }
                }
                s = (s + t) % mm;
            }
            hist[s as usize] += 1;
        });
        acc = Some(match acc {
            None => hist,
            Some(prev) => cyclic_convolve(&prev, &hist),
        });
    }
    acc.map_or(1, |h| h[0])
}

fn cyclic_convolve(a: &[u128], b: &[u128]) -> Vec<u128> {
    let q = a.len();
    let nz: Vec<(usize, u128)> = a.iter().copied().enumerate().filter(|(_, v)| *v != 0).collect();
    let mut out = vec![0u128; q];
    for (i, av) in nz {
        for (j, &bv) in b.iter().enumerate() {
            if bv != 0 {
                out[(i + j) % q] += av * bv;
            }
        }
    }
    out
}

fn convolution(system: &FormSystem, ms: &ModSystem, p: u64, q: u64) -> (u128, u128) {
    let comps = components(system);
    let n1 = ms.n1;
    let none = vec![false; ms.n];
    let xs: Vec<bool> = (0..ms.n).map(|i| i < n1).collect();
    let ys: Vec<bool> = (0..ms.n).map(|i| i >= n1).collect();
    let both = vec![true; ms.n];
    let all = convolution_restricted(ms, &comps, p, q, &none);
    let x0 = convolution_restricted(ms, &comps, p, q, &xs);
    let y0 = convolution_restricted(ms, &comps, p, q, &ys);
    let xy0 = convolution_restricted(ms, &comps, p, q, &both);
    (all, all + xy0 - x0 - y0)
}

/// `N(r)`: classes of `(x, y)` modulo `p^r` on which every form vanishes.
pub fn count_mod(system: &FormSystem, p: u64, r: u32) -> Result<u128, DensityError> {
    count_mod_with(system, p, r, CountMode::Auto, DEFAULT_BUDGET)
}

pub fn count_mod_with(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<u128, DensityError> {
    Ok(*count_ladder(system, p, r, mode, budget)?.all.last().unwrap())
}

/// `N*(r)`: as [`count_mod`] with `x ≢ 0` and `y ≢ 0` modulo `p`. Single forms only.
pub fn count_mod_star(system: &FormSystem, p: u64, r: u32) -> Result<u128, DensityError> {
    count_mod_star_with(system, p, r, CountMode::Auto, DEFAULT_BUDGET)
}

pub fn count_mod_star_with(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<u128, DensityError> {
    require_single(system)?;
    Ok(*count_ladder(system, p, r, mode, budget)?.star.last().unwrap())
}

fn require_single(system: &FormSystem) -> Result<(), DensityError> {
    if system.r() != 1 {
        return Err(DensityError::Precondition(format!(
            "defined for a single form, got {} forms",
            system.r()
        )));
    }
    Ok(())
}

fn pow_rational(p: u64, e: u64) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(p), e as usize))
}

/// Relative tolerance for an approximate plateau.
pub const PLATEAU_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PadicReport {
    pub p: u64,
    pub r: u32,
    pub n_r: u128,
    /// `N(r) / p^(r (n1 + n2 - R))`.
    pub sigma_estimate: BigRational,
    /// `(level, N(level), estimate)` for every level up to `r`.
    pub ladder: Vec<(u32, u128, BigRational)>,
    /// Successive differences of the estimates.
    pub differences: Vec<BigRational>,
    pub stabilized: bool,
    pub mode: CountMode,
}

impl PadicReport {
    pub fn sigma_f64(&self) -> f64 {
        self.sigma_estimate.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn plateau(a: &BigRational, b: &BigRational) -> bool {
    if a == b {
        return true;
    }
    let (fa, fb) = (a.to_f64().unwrap_or(0.0), b.to_f64().unwrap_or(0.0));
    (fa - fb).abs() <= PLATEAU_TOLERANCE * fa.abs().max(fb.abs())
}

/// Normalized counts `N(k) / p^(k (n1 + n2 - R))` for `k <= r`.
pub fn sigma_p_estimate(system: &FormSystem, p: u64, r: u32) -> Result<PadicReport, DensityError> {
    sigma_p_estimate_with(system, p, r, CountMode::Auto, DEFAULT_BUDGET)
}

pub fn sigma_p_estimate_with(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<PadicReport, DensityError> {
    let ladder = count_ladder(system, p, r, mode, budget)?;
    Ok(report_from_ladder(system, &ladder))
}

pub(crate) fn report_from_ladder(system: &FormSystem, ladder: &CountLadder) -> PadicReport {
    let p = ladder.p;
    let dim = (system.n1() + system.n2() - system.r()) as u64;
    let rows: Vec<(u32, u128, BigRational)> = ladder
        .all
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let k = i as u32 + 1;
            (k, n, BigRational::from_integer(BigInt::from(n)) / pow_rational(p, k as u64 * dim))
        })
        .collect();
    let differences: Vec<BigRational> = rows.windows(2).map(|w| &w[1].2 - &w[0].2).collect();
    let stabilized = rows.len() >= 2 && plateau(&rows[rows.len() - 2].2, &rows[rows.len() - 1].2);
    let last = rows.last().expect("r >= 1");
    PadicReport {
        p,
        r: last.0,
        n_r: last.1,
        sigma_estimate: last.2.clone(),
        differences,
        stabilized,
        ladder: rows,
        mode: ladder.mode,
    }
}

/// `(1 - p^-(n1-d1)) (1 - p^-(n2-d2))`.
pub fn star_factor(p: u64, a: u32, b: u32) -> BigRational {
    let one = BigRational::one();
    (&one - pow_rational(p, a as u64).recip()) * (&one - pow_rational(p, b as u64).recip())
}

fn codims(system: &FormSystem) -> Result<(u32, u32), DensityError> {
    let a = system.n1() as i64 - system.d1() as i64;
    let b = system.n2() as i64 - system.d2() as i64;
    if a < 1 || b < 1 {
        return Err(DensityError::Precondition(format!(
            "needs n1 > d1 and n2 > d2, got n1 - d1 = {a}, n2 - d2 = {b}"
        )));
    }
    Ok((a as u32, b as u32))
}

/// Both sides of the finite-level relation between `N*(k)` and `N(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarComparison {
    pub level: u32,
    /// `N*(k) / p^(k (n1 + n2 - 1))`.
    pub star_normalized: BigRational,
    /// `(1 - p^-(n1-d1)) (1 - p^-(n2-d2)) N(k) / p^(k (n1 + n2 - 1))`.
    pub predicted: BigRational,
    pub gap: BigRational,
}

pub fn star_comparison(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<Vec<StarComparison>, DensityError> {
    require_single(system)?;
    let (a, b) = codims(system)?;
    let ladder = count_ladder(system, p, r, mode, budget)?;
    let dim = (system.n1() + system.n2() - 1) as u64;
    let f = star_factor(p, a, b);
    Ok((0..r as usize)
        .map(|i| {
            let k = i as u64 + 1;
            let norm = pow_rational(p, k * dim);
            let s = BigRational::from_integer(BigInt::from(ladder.star[i])) / &norm;
            let pred = &f * BigRational::from_integer(BigInt::from(ladder.all[i])) / &norm;
            let gap = (&s - &pred).abs();
            StarComparison {
                level: k as u32,
                star_normalized: s,
                predicted: pred,
                gap,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaReport {
    pub sigma: PadicReport,
    pub omega_p: BigRational,
    pub tau_p: BigRational,
}

/// `omega_p = (1-p^-(n1-d1))(1-p^-(n2-d2)) / (1-p^-1)^2 * sigma_p` and
/// `tau_p = (1-p^-1)^2 omega_p`, from the level-`r` estimate of `sigma_p`.
pub fn omega_p(system: &FormSystem, p: u64, r: u32) -> Result<OmegaReport, DensityError> {
    omega_p_with(system, p, r, CountMode::Auto, DEFAULT_BUDGET)
}

pub fn omega_p_with(system: &FormSystem, p: u64, r: u32, mode: CountMode, budget: u128) -> Result<OmegaReport, DensityError> {
    require_single(system)?;
    let (a, b) = codims(system)?;
    let sigma = sigma_p_estimate_with(system, p, r, mode, budget)?;
    let f = star_factor(p, a, b);
    let one = BigRational::one();
    let inv = &one - pow_rational(p, 1).recip();
    let l = &inv * &inv;
    let omega = &f / &l * &sigma.sigma_estimate;
    let tau = &l * &omega;
    Ok(OmegaReport {
        sigma,
        omega_p: omega,
        tau_p: tau,
    })
}

/// Choice of level per prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelPolicy {
    Fixed(u32),
    /// Largest level up to `max_r` whose estimated work fits `max_work`.
    Budget { max_work: u128, max_r: u32 },
}

pub fn level_for(system: &FormSystem, p: u64, policy: LevelPolicy) -> u32 {
    match policy {
        LevelPolicy::Fixed(r) => r,
        LevelPolicy::Budget { max_work, max_r } => (1..=max_r)
            .take_while(|&r| {
                modulus(p, r).is_ok()
                    && work_estimate(system, p, r, CountMode::Auto).is_some_and(|w| w <= max_work)
            })
            .last()
            .unwrap_or(1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerReport {
    pub p_max: u64,
    pub factors: Vec<PadicReport>,
    pub product: f64,
    /// Running products after each prime.
    pub partial_products: Vec<(u64, f64)>,
    /// `p_max^(1 - min(n1 - d1, n2 - d2))`, the expected size of the tail.
    pub tail_heuristic: f64,
}

/// Product of `sigma_p` estimates over primes up to `p_max`.
pub fn euler_product(system: &FormSystem, p_max: u64, policy: LevelPolicy) -> Result<EulerReport, DensityError> {
    if p_max < 2 {
        return Err(DensityError::Precondition("p_max must be at least 2".into()));
    }
    let primes = crate::arith::primes_up_to(p_max);
    let budget = match policy {
        LevelPolicy::Budget { max_work, .. } => max_work.max(DEFAULT_BUDGET),
        LevelPolicy::Fixed(_) => u128::MAX,
    };
    let mut factors = Vec::with_capacity(primes.len());
    for &p in &primes {
        let r = level_for(system, p, policy);
        factors.push(sigma_p_estimate_with(system, p, r, CountMode::Auto, budget)?);
    }
    let mut product = 1.0;
    let mut partial_products = Vec::with_capacity(factors.len());
    for f in &factors {
        product *= f.sigma_f64();
        partial_products.push((f.p, product));
    }
    let a = system.n1() as f64 - system.d1() as f64;
    let b = system.n2() as f64 - system.d2() as f64;
    Ok(EulerReport {
        p_max,
        factors,
        product,
        partial_products,
        tail_heuristic: (p_max as f64).powf(1.0 - a.min(b)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_system;

    fn sys(t: &str, n1: usize, n2: usize) -> FormSystem {
        parse_system(&[t], n1, n2).unwrap()
    }

    #[test]
    fn small_counts() {
        let f = sys("x1*y1", 1, 1);
        for mode in [CountMode::Exhaustive, CountMode::Lifting, CountMode::Convolution] {
            assert_eq!(count_mod_with(&f, 2, 1, mode, DEFAULT_BUDGET).unwrap(), 3);
        }
        for p in [2u64, 3, 5, 7] {
            assert_eq!(count_mod(&f, p, 1).unwrap() as u64, 2 * p - 1);
        }
        let g = sys("x1*y1 - x2*y2", 2, 2);
        assert_eq!(count_mod_with(&g, 2, 1, CountMode::Exhaustive, DEFAULT_BUDGET).unwrap(), 10);
        assert_eq!(count_mod_star_with(&g, 2, 1, CountMode::Exhaustive, DEFAULT_BUDGET).unwrap(), 3);
        let rep = sigma_p_estimate(&g, 2, 1).unwrap();
        assert_eq!(rep.sigma_estimate, BigRational::new(10.into(), 8.into()));
    }

    #[test]
    fn modes_agree() {
        let systems = [
            sys("x1*y1 - x2*y2", 2, 2),
            sys("x1^2*y1 + 3*x1*x2*y2 - x2^2*y1", 2, 2),
            sys("x1^2*y1^2 + x2^2*y2^2 - x3^2*y1*y2", 3, 2),
        ];
        for s in &systems {
            for p in [2u64, 3] {
                let e = count_ladder(s, p, 2, CountMode::Exhaustive, DEFAULT_BUDGET).unwrap();
                let l = count_ladder(s, p, 2, CountMode::Lifting, DEFAULT_BUDGET).unwrap();
                let c = count_ladder(s, p, 2, CountMode::Convolution, DEFAULT_BUDGET).unwrap();
                assert_eq!(e.all, l.all);
                assert_eq!(e.star, l.star);
                assert_eq!(e.all, c.all);
                assert_eq!(e.star, c.star);
            }
        }
    }

    #[test]
    fn errors() {
        let g = sys("x1*y1 - x2*y2", 2, 2);
        assert!(matches!(count_mod(&g, 4, 1), Err(DensityError::NotPrime(4))));
        assert!(matches!(
            count_mod_with(&g, 5, 6, CountMode::Exhaustive, 1000),
            Err(DensityError::BudgetExceeded { .. })
        ));
        let two = parse_system(&["x1*y1", "x2*y2"], 2, 2).unwrap();
        assert!(count_mod_star(&two, 2, 1).is_err());
        assert!(count_mod_with(&two, 2, 1, CountMode::Convolution, DEFAULT_BUDGET).is_err());
        assert_eq!(count_mod(&two, 2, 1).unwrap(), 9);
    }

    #[test]
    fn omega_relations() {
        let g = sys("x1*y1 + x2*y2 + x3*y3", 3, 3);
        let o = omega_p(&g, 2, 2).unwrap();
        let ratio = &o.tau_p / &o.sigma.sigma_estimate;
        assert_eq!(ratio, BigRational::new(9.into(), 16.into()));
        assert_eq!(star_factor(2, 2, 2), BigRational::new(9.into(), 16.into()));
    }

    #[test]
    fn bilinear_closed_form_at_level_one() {
        // N(1) = p^(2n-1) + p^n - p^(n-1) for sum x_i y_i
        for n in 2..=3usize {
            let terms: Vec<String> = (1..=n).map(|i| format!("x{i}*y{i}")).collect();
            let s = sys(&terms.join(" + "), n, n);
            for p in [2u64, 3, 5] {
                let expect = p.pow(2 * n as u32 - 1) + p.pow(n as u32) - p.pow(n as u32 - 1);
                assert_eq!(count_mod(&s, p, 1).unwrap(), expect as u128);
            }
        }
    }

    #[test]
    fn euler_product_single_factor() {
        let g = sys("x1*y1 + x2*y2 + x3*y3", 3, 3);
        let e = euler_product(&g, 2, LevelPolicy::Fixed(2)).unwrap();
        assert_eq!(e.factors.len(), 1);
        assert!(e.product > 0.0);
    }
}
