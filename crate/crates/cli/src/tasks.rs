use std::time::Instant;

use biproj::arith::iroot;
use biproj::counting::{
    cardinality, count_box, count_fiber, height_exponents, shell_table, shell_table_with,
    upsilon_direct, ArithmeticFunction2, BoxSpec, Constant, ExclusionPredicate, Predicates,
    Rational, DEFAULT_CHUNK,
};
use biproj::densities::{
    default_epsilons, euler_product, level_for, sigma_infty_leray, sigma_infty_mc_ladder,
    sigma_p_estimate_with, smooth_zero_mod_p, ChartPolicy, CountMode, LevelPolicy,
};
use biproj::expsums::{
    complete_sum, fiber_prediction, truncated_singular_integral, truncated_singular_series,
    truncated_singular_series_exact, weyl_sum, ArcPoint, DEFAULT_GRID,
};
use biproj::hyperbola::{admissible_mu, decompose, dyadic_slices, fit_cb, ConditionParams, HeightGeometry};
use biproj::manin::{
    hypothesis_check, manin_report as run_manin_report, peyre_constant, subvariety_growth,
    DensityConfig, Shape,
};
use biproj::output::config_hash;
use biproj::FormSystem;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::args::{
    check_task_params, read_config, resolve, Common, CountParams, DensityInfParams,
    DensityPParams, ExpsumParams, FiberParams, HyperbolaParams, HypothesisParams, Job,
    ManinParams, PeyreParams, SeriesParams, SubvarietyParams,
};
use crate::{CliError, Report};

type Outcome = Result<Report, CliError>;

pub fn execute<P>(task: &'static str, common: Common, flags: P, f: fn(&Job<P>) -> Outcome) -> Result<(), CliError>
where
    P: Serialize + DeserializeOwned + Send + Sync,
{
    let job = resolve(task, common, flags)?;
    let hash = config_hash(&job.canonical);
    eprintln!("biproj {} task={} seed={} config-hash={}", env!("CARGO_PKG_VERSION"), task, job.seed, hash);
    let report = match job.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Failed(format!("workers: {e}")))?
            .install(|| f(&job))?,
        None => f(&job)?,
    };
    report.emit(job.output.as_deref(), &hash)
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("{field}: missing"))
}

fn require<T: Clone>(v: &Option<T>, field: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| missing(field))
}

fn within_budget(field: &str, work: f64, budget: u128) -> Result<(), CliError> {
    if work > budget as f64 {
        return Err(CliError::Budget(format!("{field}: about {work:.3e} steps, budget {budget}")));
    }
    Ok(())
}

fn seconds(job_timings: bool, s: f64) -> String {
    if job_timings {
        format!("{s:.6}")
    } else {
        String::new()
    }
}

fn predicates(x_zeros: Option<usize>, y_zeros: Option<usize>) -> Predicates {
    let side = |z: Option<usize>| match z {
        Some(l) if l > 0 => ExclusionPredicate::DiagonalZeroCount(l),
        _ => ExclusionPredicate::AllPoints,
    };
    Predicates::new(side(x_zeros), side(y_zeros))
}

/// Steps to enumerate the height region: both halves, one coordinate solved.
fn height_work(system: &FormSystem, b1: u32, b2: u32, p: u128) -> f64 {
    let (n1, n2) = (system.n1() as i32, system.n2() as i32);
    let side = |v: u128| 2.0 * v as f64 + 1.0;
    let half_a = side(iroot(p, 2 * b1)).powi(n1) * side(iroot(p, b2)).powi(n2 - 1);
    let half_b = side(iroot(p, 2 * b2)).powi(n2) * side(iroot(p, b1)).powi(n1 - 1);
    half_a + half_b
}

fn box_work(system: &FormSystem, p1: Rational, p2: Rational) -> f64 {
    let bx = BoxSpec::unit(system.n1(), system.n2());
    let (xl, xh) = bx.x_ranges(p1);
    let (yl, yh) = bx.y_ranges(p2);
    let (cx, cy) = (cardinality(&xl, &xh) as f64, cardinality(&yl, &yh) as f64);
    let (outer, inner, side) = if cy <= cx {
        (cy, cx, (xh[0] - xl[0] + 1).max(1) as f64)
    } else {
        (cx, cy, (yh[0] - yl[0] + 1).max(1) as f64)
    };
    outer * inner / side
}

pub fn validate(common: Common) -> Result<(), CliError> {
    let config = read_config(&common)?;
    let (task, forms, n1, n2) = match &config {
        Some(c) => {
            let params = c.params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            check_task_params(&c.task, &params)?;
            let forms = if common.forms.is_empty() { c.forms.clone() } else { common.forms.clone() };
            (c.task.clone(), forms, common.n1.or(Some(c.n1)), common.n2.or(Some(c.n2)))
        }
        None => ("validate".to_string(), common.forms.clone(), common.n1, common.n2),
    };
    if forms.is_empty() {
        if config.is_some() && ["hypothesis", "subvariety", "peyre", "hyperbola"].contains(&task.as_str()) {
            println!("ok: task {task} without forms");
            return Ok(());
        }
        return Err(missing("forms"));
    }
    let job = biproj::JobConfig {
        n1: n1.ok_or_else(|| missing("n1"))?,
        n2: n2.ok_or_else(|| missing("n2"))?,
        forms,
        task: task.clone(),
        params: Default::default(),
        bidegree: config.as_ref().and_then(|c| c.bidegree),
        seed: None,
        output: None,
        workers: None,
    };
    let system = job.system()?;
    println!(
        "ok: task {task}, {} form(s), n1={} n2={}, bidegree ({}, {}), fingerprint {}",
        system.r(),
        system.n1(),
        system.n2(),
        system.d1(),
        system.d2(),
        system.fingerprint()
    );
    Ok(())
}

pub fn count(job: &Job<CountParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let preds = predicates(p.x_zeros, p.y_zeros);
    if let Some(heights) = &p.heights {
        let grid: Vec<u128> = heights.iter().map(|&h| h as u128).collect();
        let pmax = *grid.iter().max().ok_or_else(|| missing("heights"))?;
        let (b1, b2) = height_exponents(&system)?;
        within_budget("heights", height_work(&system, b1, b2, pmax), job.budget)?;
        let start = Instant::now();
        let table = shell_table(&system, &preds, pmax)?;
        let took = start.elapsed().as_secs_f64();
        let mut report = Report::table(&["P", "count", "seconds"]);
        for &h in &grid {
            let c = table.projective_count(h);
            report.rows.push(vec![h.to_string(), c.to_string(), seconds(job.timings, took)]);
            report.summary.push_str(&format!("P = {h}: {c}\n"));
        }
        return Ok(report);
    }
    let p1 = require(&p.p1, "p1")?.0;
    let p2 = p.p2.map(|r| r.0).unwrap_or(p1);
    within_budget("p1", box_work(&system, p1, p2), job.budget)?;
    if p.x_zeros.is_some() || p.y_zeros.is_some() {
        return Err(CliError::Config("x_zeros: predicates apply to height counts only".into()));
    }
    let start = Instant::now();
    let c = count_box(&system, p1, p2, &BoxSpec::unit(system.n1(), system.n2()));
    let took = start.elapsed().as_secs_f64();
    let mut report = Report::table(&["P1", "P2", "count", "seconds"]);
    report.rows.push(vec![p1.to_string(), p2.to_string(), c.to_string(), seconds(job.timings, took)]);
    report.summary = format!("{c}\n");
    report.summary_first = true;
    Ok(report)
}

pub fn fiber(job: &Job<FiberParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let y = require(&p.y, "y")?;
    let p1s = require(&p.p1, "p1")?;
    let grid = p.grid.unwrap_or(DEFAULT_GRID);
    let b = p.b.unwrap_or(10.0);
    let bx = BoxSpec::unit(system.n1(), system.n2());
    for &p1 in &p1s {
        within_budget("p1", (2.0 * p1 as f64 + 1.0).powi(system.n1() as i32 - 1), job.budget)?;
    }
    let mut report;
    if let Some(q_max) = p.q_max {
        report = Report::table(&["P1", "count", "series", "integral", "prediction", "relative_error"]);
        for &p1 in &p1s {
            let f = fiber_prediction(&system, &y, p1, q_max, b, grid)?;
            report.rows.push(vec![
                p1.to_string(),
                f.exact.to_string(),
                f.series_value.to_string(),
                f.integral_value.to_string(),
                f.prediction.to_string(),
                f.relative_error.to_string(),
            ]);
            report.summary.push_str(&format!(
                "P1 = {p1}: count {} prediction {:.6} relative error {:.4}\n",
                f.exact, f.prediction, f.relative_error
            ));
        }
    } else {
        report = Report::table(&["P1", "count"]);
        for &p1 in &p1s {
            let c = count_fiber(&system, &y, Rational::from_integer(p1 as i64), &bx);
            report.rows.push(vec![p1.to_string(), c.to_string()]);
            report.summary.push_str(&format!("P1 = {p1}: {c}\n"));
        }
    }
    Ok(report)
}

fn count_mode(text: Option<&str>) -> Result<CountMode, CliError> {
    match text.unwrap_or("auto") {
        "auto" => Ok(CountMode::Auto),
        "exhaustive" => Ok(CountMode::Exhaustive),
        "lifting" => Ok(CountMode::Lifting),
        "convolution" => Ok(CountMode::Convolution),
        other => Err(CliError::Config(format!("mode: unknown mode {other:?}"))),
    }
}

pub fn density_p(job: &Job<DensityPParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let mode = count_mode(p.mode.as_deref())?;
    let policy = LevelPolicy::Budget { max_work: job.budget, max_r: p.max_r.unwrap_or(4) };
    let mut report = Report::table(&["p", "r", "N_r", "sigma_estimate"]);
    if let Some(p_max) = p.p_max {
        let e = euler_product(&system, p_max, policy)?;
        for f in &e.factors {
            for (r, n, s) in &f.ladder {
                report.rows.push(vec![f.p.to_string(), r.to_string(), n.to_string(), to_f64(s).to_string()]);
            }
        }
        report.summary = format!(
            "product over p <= {p_max}: {:.10}\ntail size estimate: {:.3e}\n",
            e.product, e.tail_heuristic
        );
        return Ok(report);
    }
    let prime = require(&p.p, "p")?;
    let r = p.r.unwrap_or_else(|| level_for(&system, prime, policy));
    let est = sigma_p_estimate_with(&system, prime, r, mode, job.budget)?;
    for (r, n, s) in &est.ladder {
        report.rows.push(vec![prime.to_string(), r.to_string(), n.to_string(), to_f64(s).to_string()]);
    }
    report.summary = format!(
        "sigma_{prime} ~ {} = {:.12} at r = {}, stabilized: {}\n",
        est.sigma_estimate,
        est.sigma_f64(),
        est.r,
        est.stabilized
    );
    match smooth_zero_mod_p(&system, prime, job.budget) {
        Ok(Some(z)) => report.summary.push_str(&format!(
            "non-singular zero mod {prime} at x = {:?}, y = {:?}: sigma_{prime} > 0\n",
            z.x, z.y
        )),
        Ok(None) => report.summary.push_str(&format!("no non-singular zero mod {prime}; positivity undecided\n")),
        Err(_) => report.summary.push_str("smooth zero search skipped: over budget\n"),
    }
    Ok(report)
}

fn to_f64(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn chart_policy(text: Option<&str>) -> Result<ChartPolicy, CliError> {
    match text.unwrap_or("argmax") {
        "argmax" => Ok(ChartPolicy::Argmax),
        "smooth" => Ok(ChartPolicy::Smooth),
        other => other
            .parse()
            .map(ChartPolicy::Fixed)
            .map_err(|_| CliError::Config(format!("chart: expected argmax, smooth or an index, got {other:?}"))),
    }
}

pub fn density_inf(job: &Job<DensityInfParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let samples = p.samples.unwrap_or(1_000_000);
    let method = p.method.as_deref().unwrap_or("both");
    if !["slab", "chart", "both"].contains(&method) {
        return Err(CliError::Config(format!("method: expected slab, chart or both, got {method:?}")));
    }
    let eps = p.epsilon.clone().unwrap_or_else(default_epsilons);
    let runs = if method == "both" { eps.len() + 1 } else if method == "slab" { eps.len() } else { 1 };
    within_budget("samples", (samples as f64) * runs as f64 * (system.n1() + system.n2()) as f64, job.budget)?;
    let mut report = Report::table(&["epsilon", "estimate", "stderr", "samples", "seed"]);
    if method != "chart" {
        let ladder = sigma_infty_mc_ladder(&system, &eps, samples, job.seed)?;
        for r in &ladder.rungs {
            report.rows.push(vec![
                r.epsilon.map(|e| e.to_string()).unwrap_or_default(),
                r.estimate.to_string(),
                r.standard_error.to_string(),
                r.samples.to_string(),
                r.seed.to_string(),
            ]);
            report.summary.push_str(&format!(
                "slab eps = {}: {:.6} +- {:.6}\n",
                r.epsilon.unwrap_or(f64::NAN),
                r.estimate,
                r.standard_error
            ));
        }
        if let Some(x) = ladder.richardson {
            report.summary.push_str(&format!("slab extrapolation: {x:.6}\n"));
        }
        if ladder.exploding {
            report.summary.push_str("slab estimates grow as eps shrinks: the zero set looks singular\n");
        }
    }
    if method != "slab" {
        let r = sigma_infty_leray(&system, samples, job.seed, chart_policy(p.chart.as_deref())?)?;
        report.rows.push(vec![
            String::new(),
            r.estimate.to_string(),
            r.standard_error.to_string(),
            r.samples.to_string(),
            r.seed.to_string(),
        ]);
        report.summary.push_str(&format!("chart: {:.6} +- {:.6}\n", r.estimate, r.standard_error));
    }
    Ok(report)
}

pub fn expsum(job: &Job<ExpsumParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let y = require(&p.y, "y")?;
    let r = system.r();
    let coords: Vec<String> = (1..=r).map(|i| format!("alpha{i}")).collect();
    let Some(p1) = p.p1.map(|v| v.0) else {
        let q = require(&p.q, "q")?;
        let a = require(&p.a, "a")?;
        within_budget("q", (q as f64).powi(system.n1() as i32), job.budget)?;
        let s = complete_sum(&system, &y, q, &a)?;
        let z = s.to_complex();
        let mut header = vec!["q".to_string()];
        header.extend((1..=r).map(|i| format!("a{i}")));
        header.extend(["re".to_string(), "im".to_string()]);
        let mut row = vec![q.to_string()];
        row.extend(a.iter().map(|v| v.to_string()));
        row.extend([z.re.to_string(), z.im.to_string()]);
        let mut report = Report::text(format!("S = {} + {} i\n", z.re, z.im));
        report.header = header;
        report.rows.push(row);
        return Ok(report);
    };
    let bx = BoxSpec::unit(system.n1(), system.n2());
    let (lo, hi) = bx.x_ranges(p1);
    let points = cardinality(&lo, &hi) as f64;
    let arcs: Vec<ArcPoint> = if let Some(q) = p.q {
        vec![ArcPoint::rational(require(&p.a, "a")?, q)?]
    } else if let Some(alpha) = &p.alpha {
        vec![ArcPoint::real(alpha.clone())]
    } else if let Some(n) = p.scan {
        if r != 1 {
            return Err(CliError::Config("scan: only for a single form".into()));
        }
        (0..n).map(|k| ArcPoint::real(vec![k as f64 / n as f64])).collect()
    } else {
        return Err(missing("alpha"));
    };
    within_budget("p1", points * arcs.len() as f64, job.budget)?;
    let mut header: Vec<&str> = coords.iter().map(String::as_str).collect();
    header.extend(["re", "im"]);
    let mut report = Report::table(&header);
    let mut largest: f64 = 0.0;
    for arc in &arcs {
        let z = weyl_sum(&system, &y, p1, &bx, arc)?;
        largest = largest.max(z.norm());
        let mut row: Vec<String> = arc.alpha.iter().map(|a| a.to_string()).collect();
        row.extend([z.re.to_string(), z.im.to_string()]);
        report.rows.push(row);
    }
    report.summary = format!("{} point(s); largest |S| = {largest:.6} over {points} terms\n", arcs.len());
    if arcs.len() == 1 {
        report.summary_first = true;
        let row = &report.rows[0];
        report.summary = format!("S = {} + {} i\n", row[r], row[r + 1]);
    }
    Ok(report)
}

pub fn series(job: &Job<SeriesParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let y = require(&p.y, "y")?;
    let q_max = p.q_max.unwrap_or(20);
    within_budget("q_max", (q_max as f64).powi(system.r() as i32 + 1) * q_max as f64, job.budget)?;
    let mut report;
    if p.exact.unwrap_or(false) {
        report = Report::table(&["q", "partial_series", "partial_series_exact"]);
        let rows = truncated_singular_series_exact(&system, &y, q_max)?;
        for (q, s) in &rows {
            report.rows.push(vec![q.to_string(), to_f64(s).to_string(), s.to_string()]);
        }
        if let Some((_, s)) = rows.last() {
            report.summary = format!("S({q_max}) = {s} = {:.12}\n", to_f64(s));
        }
    } else {
        report = Report::table(&["q", "term", "partial_series"]);
        let s = truncated_singular_series(&system, &y, q_max)?;
        for t in &s.terms {
            report.rows.push(vec![t.q.to_string(), t.term.to_string(), t.partial.to_string()]);
        }
        report.summary = format!("S({q_max}) = {:.12} (largest imaginary part {:.2e})\n", s.value, s.imag);
    }
    if let Some(b) = p.b {
        let bx = BoxSpec::unit(system.n1(), system.n2());
        let j = truncated_singular_integral(&system, &y, b, p.grid.unwrap_or(DEFAULT_GRID), &bx)?;
        report.summary.push_str(&format!("J({b}) = {:.10} +- {:.2e} ({} panels)\n", j.value, j.error, j.panels));
    }
    Ok(report)
}

pub fn hyperbola(job: &Job<HyperbolaParams>) -> Outcome {
    let p = &job.params;
    let function = p.function.clone().unwrap_or_else(|| if job.has_system() { "count".into() } else { "one".into() });
    let system = if function == "count" { Some(job.system()?) } else { None };
    let (b1, b2) = match (p.beta1, p.beta2, &system) {
        (Some(a), Some(b), _) => (a, b),
        (None, None, Some(s)) => height_exponents(s)?,
        (None, None, None) => (1, 1),
        _ => return Err(CliError::Config("beta2: give both exponents or neither".into())),
    };
    if b1 == 0 || b2 == 0 {
        return Err(CliError::Config("beta1: exponents must be positive".into()));
    }
    let geom = HeightGeometry::Exact { b1, b2 };
    let heights: Vec<u128> = p.heights.clone().unwrap_or(vec![100, 1_000, 10_000]).into_iter().map(u128::from).collect();
    let mu = p.mu.unwrap_or(0.2 / b1 as f64);
    let pmax = *heights.iter().max().ok_or_else(|| missing("heights"))?;

    let table;
    let h: &dyn ArithmeticFunction2 = match (function.as_str(), &system) {
        ("one", _) => &Constant(1),
        ("count", Some(s)) => {
            // the slice bounds read h beyond the height region
            let mut reach = pmax;
            if let Some(j) = p.slices {
                for &q in &heights {
                    for sl in dyadic_slices(&Constant(1), geom, q, mu, j)?.slices {
                        let m = iroot(q / (sl.l_lo as u128 + 1).pow(b1), b2);
                        reach = reach.max((sl.l_hi as u128).pow(b1) * m.pow(b2));
                    }
                }
            }
            within_budget("heights", height_work(s, b1, b2, reach), job.budget)?;
            table = shell_table_with(s, &Predicates::all(), b1, b2, reach, DEFAULT_CHUNK);
            &table
        }
        (other, _) => return Err(CliError::Config(format!("function: expected one or count, got {other:?}"))),
    };

    let mut report;
    match p.table.as_deref().unwrap_or("decomposition") {
        "decomposition" => {
            report = Report::table(&["P", "T1", "T2", "T1_sym", "T2_sym", "corner", "total", "upsilon_direct"]);
            for &q in &heights {
                let d = decompose(h, geom, q, mu)?;
                let direct = upsilon_direct(h, b1, b2, q);
                report.rows.push(
                    [q as i128, d.t1, d.t2, d.t1_sym, d.t2_sym, d.corner, d.total, direct]
                        .iter()
                        .map(|v| v.to_string())
                        .collect(),
                );
                report.summary.push_str(&format!(
                    "P = {q}: total {} {} direct {direct}\n",
                    d.total,
                    if d.total == direct { "=" } else { "!=" }
                ));
            }
        }
        "fit" => {
            report = Report::table(&["P", "C_fit", "B_fit"]);
            let mut sorted = heights.clone();
            sorted.sort_unstable();
            for k in 2..=sorted.len() {
                if let Ok(f) = fit_cb(h, geom, &sorted[..k]) {
                    report.rows.push(vec![sorted[k - 1].to_string(), f.c.to_string(), f.b.to_string()]);
                }
            }
            let f = fit_cb(h, geom, &sorted)?;
            report.summary = format!("C = {:.8}, B = {:.8}, C envelope {:.3e}\n", f.c, f.b, f.c_envelope);
        }
        other => return Err(CliError::Config(format!("table: expected decomposition or fit, got {other:?}"))),
    }
    if let Some(j) = p.slices {
        for &q in &heights {
            let rep = dyadic_slices(h, geom, q, mu, j)?;
            let ok = rep.slices.iter().all(|s| s.v_minus <= s.v && s.v <= s.v_plus);
            let sum: i128 = rep.slices.iter().map(|s| s.v).sum();
            report.summary.push_str(&format!(
                "P = {q}: {} slices, theta {:.4}, sum {sum}, sandwich {}\n",
                rep.slices.len(),
                rep.theta,
                if ok { "holds" } else { "broken" }
            ));
        }
    }
    if let (Some(c), Some(delta), Some(nu), Some(d)) = (p.c, p.delta, p.nu, p.d) {
        let m = admissible_mu(&ConditionParams { c, delta, beta1: b1 as f64, beta2: b2 as f64, nu, d })?;
        report.summary.push_str(&format!(
            "admissible mu: sup {:.6} ({}), binding {:?}, usable {}\n",
            m.sup,
            if m.strict { "strict" } else { "attained" },
            m.binding,
            m.usable.map(|u| format!("{u:.6}")).unwrap_or_else(|| "none".into())
        ));
    }
    Ok(report)
}

pub fn peyre(job: &Job<PeyreParams>) -> Outcome {
    let p = &job.params;
    let system = if job.has_system() { Some(job.system()?) } else { None };
    let (n1, n2, d1, d2) = match &system {
        Some(s) => (s.n1() as u64, s.n2() as u64, s.d1(), s.d2()),
        None => (
            require(&job.n1, "n1")? as u64,
            require(&job.n2, "n2")? as u64,
            require(&p.d1, "d1")?,
            require(&p.d2, "d2")?,
        ),
    };
    let samples = p.samples.unwrap_or(1_000_000);
    let sigma_inf = match (p.sigma_inf, &system) {
        (Some(v), _) => v,
        (None, Some(s)) => {
            within_budget("samples", samples as f64 * (n1 + n2) as f64, job.budget)?;
            sigma_infty_leray(s, samples, job.seed, ChartPolicy::Argmax)?.estimate
        }
        (None, None) => return Err(missing("sigma_inf")),
    };
    let sigma_p: Vec<(u64, f64)> = match (&p.sigma_p, &system) {
        (Some(pairs), _) => pairs
            .iter()
            .map(|t| {
                let (a, b) = t.split_once(':').ok_or_else(|| CliError::Config(format!("sigma_p: expected p:value, got {t:?}")))?;
                let prime = a.trim().parse().map_err(|_| CliError::Config(format!("sigma_p: bad prime in {t:?}")))?;
                let v = b.trim().parse().map_err(|_| CliError::Config(format!("sigma_p: bad value in {t:?}")))?;
                Ok((prime, v))
            })
            .collect::<Result<_, CliError>>()?,
        (None, Some(s)) => {
            let e = euler_product(s, p.p_max.unwrap_or(100), LevelPolicy::Budget { max_work: job.budget, max_r: 4 })?;
            e.factors.iter().map(|f| (f.p, f.sigma_f64())).collect()
        }
        (None, None) => Vec::new(),
    };
    let rep = peyre_constant(sigma_inf, &sigma_p, n1, n2, d1, d2, system.as_ref().map_or(1, |s| s.r() as u32))?;
    let mut report = Report::table(&["p", "sigma_p"]);
    for (q, s) in &sigma_p {
        report.rows.push(vec![q.to_string(), s.to_string()]);
    }
    report.summary = format!(
        "alpha = {}\nsigma_inf = {:.8}\ntau_inf = {:.8}\neuler product = {:.8}\n\
         constant (factor by factor) = {:.12}\nconstant (collapsed) = {:.12}\nleading constant = {:.12}\n",
        rep.alpha, rep.sigma_inf, rep.tau_inf, rep.euler, rep.c_pey_factorwise, rep.c_pey, rep.leading_constant
    );
    report.summary_first = true;
    Ok(report)
}

fn default_heights(top: f64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..=12).map(|k| (top * 2f64.powf(-(k as f64) / 2.0)).round() as u64).collect();
    v.reverse();
    v
}

pub fn manin_report(job: &Job<ManinParams>) -> Outcome {
    let system = job.system()?;
    let p = &job.params;
    let heights: Vec<u128> = p.heights.clone().unwrap_or_else(|| default_heights(1e4)).into_iter().map(u128::from).collect();
    let pmax = *heights.iter().max().ok_or_else(|| missing("heights"))?;
    let (b1, b2) = height_exponents(&system)?;
    within_budget("heights", height_work(&system, b1, b2, pmax), job.budget)?;
    let samples = p.samples.unwrap_or(1_000_000);
    within_budget("samples", samples as f64 * (system.n1() + system.n2()) as f64, job.budget)?;
    let cfg = DensityConfig {
        p_max: p.p_max.unwrap_or(100),
        level: LevelPolicy::Budget { max_work: job.budget, max_r: p.max_r.unwrap_or(4) },
        samples,
        seed: job.seed,
        chart: ChartPolicy::Argmax,
    };
    let rep = run_manin_report(&system, &predicates(p.x_zeros, p.y_zeros), &heights, &cfg)?;
    let mut report = Report::table(&[
        "P", "count", "ratio", "s1", "s1_limit", "s1_envelope", "s2", "s2_limit", "s2_envelope",
    ]);
    for ((row, s1), s2) in rep.rows.iter().zip(&rep.s1).zip(&rep.s2) {
        report.rows.push(vec![
            row.p.to_string(),
            row.count.to_string(),
            row.ratio.to_string(),
            s1.value.to_string(),
            s1.limit.to_string(),
            s1.envelope.to_string(),
            s2.value.to_string(),
            s2.limit.to_string(),
            s2.envelope.to_string(),
        ]);
    }
    report.summary = rep.summary();
    Ok(report)
}

pub fn subvariety(job: &Job<SubvarietyParams>) -> Outcome {
    let p = &job.params;
    let heights: Vec<u128> = p
        .heights
        .clone()
        .unwrap_or_else(|| (1..=12).map(|k| 10f64.powf(k as f64 / 2.0).round() as u64).collect())
        .into_iter()
        .map(u128::from)
        .collect();
    let rep = subvariety_growth(p.n.unwrap_or(4), p.d1.unwrap_or(2), &heights)?;
    let mut report = Report::table(&["P", "count"]);
    for (q, c) in &rep.points {
        report.rows.push(vec![q.to_string(), c.to_string()]);
    }
    report.summary = match &rep.fit {
        Some(f) => format!("slope of log count against log P: {:.6} (expected {:.6})\n", f.slope, rep.target),
        None => "too few nonzero counts to fit a slope\n".into(),
    };
    Ok(report)
}

pub fn hypothesis(job: &Job<HypothesisParams>) -> Outcome {
    let p = &job.params;
    let n1 = require(&job.n1, "n1")? as u64;
    let n2 = require(&job.n2, "n2")? as u64;
    // the diagonal family has dim V1* = dim V2* = n
    let fallback = |field| if n1 == n2 { Ok(n1) } else { Err(missing(field)) };
    let shape = Shape {
        n1,
        n2,
        d1: p.d1.unwrap_or(2),
        d2: p.d2.unwrap_or(2),
        r: p.r.unwrap_or(1),
        dim_v1: p.dimv1.map_or_else(|| fallback("dimv1"), Ok)?,
        dim_v2: p.dimv2.map_or_else(|| fallback("dimv2"), Ok)?,
        delta: p.delta.unwrap_or(0.01),
    };
    Ok(Report::text(hypothesis_check(shape)?.summary()))
}
