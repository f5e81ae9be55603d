//! Python bindings: a thin layer over the `biproj` library.

use biproj::counting::{count_box as box_count, shell_table, BoxSpec, ExclusionPredicate, Predicates, Rational};
use biproj::densities::{level_for, sigma_infty_leray, sigma_p_estimate_with, ChartPolicy, CountMode, LevelPolicy, DEFAULT_BUDGET};
use biproj::expsums::{complete_sum as exact_complete_sum, truncated_singular_series};
use biproj::manin::{hypothesis_check, peyre_constant as peyre, Shape};
use biproj::FormSystem;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A system of forms sharing one bidegree.
#[pyclass(frozen, name = "System", module = "pybiproj")]
struct System {
    inner: FormSystem,
    texts: Vec<String>,
}

#[pymethods]
impl System {
    #[new]
    fn new(forms: Vec<String>, n1: usize, n2: usize) -> PyResult<Self> {
        let inner = biproj::parse_system(&forms, n1, n2).map_err(value_error)?;
        Ok(System { inner, texts: forms })
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.n1()
    }

    #[getter]
    fn n2(&self) -> usize {
        self.inner.n2()
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    #[getter]
    fn bidegree(&self) -> (u32, u32) {
        (self.inner.d1(), self.inner.d2())
    }

    fn __repr__(&self) -> String {
        format!("System({:?}, n1={}, n2={})", self.texts, self.inner.n1(), self.inner.n2())
    }
}

fn rational(text: &str) -> PyResult<Rational> {
    text.trim().parse().map_err(|_| PyValueError::new_err(format!("not a rational number: {text:?}")))
}

/// Integer points in the box `|x| <= p1`, `|y| <= p2` on the zero set.
#[pyfunction]
#[pyo3(signature = (system, p1, p2=None))]
fn count_box(py: Python<'_>, system: &System, p1: &str, p2: Option<&str>) -> PyResult<u128> {
    let p1 = rational(p1)?;
    let p2 = p2.map(rational).transpose()?.unwrap_or(p1);
    let sys = &system.inner;
    Ok(py.detach(|| box_count(sys, p1, p2, &BoxSpec::unit(sys.n1(), sys.n2()))))
}

/// Projective point counts at each height, with optional diagonal exclusions.
#[pyfunction]
#[pyo3(signature = (system, heights, x_zeros=0, y_zeros=0))]
fn count_projective(
    py: Python<'_>,
    system: &System,
    heights: Vec<u64>,
    x_zeros: usize,
    y_zeros: usize,
) -> PyResult<Vec<u128>> {
    let side = |k| if k == 0 { ExclusionPredicate::AllPoints } else { ExclusionPredicate::DiagonalZeroCount(k) };
    let preds = Predicates::new(side(x_zeros), side(y_zeros));
    let top = heights.iter().copied().max().unwrap_or(0) as u128;
    let table = py.detach(|| shell_table(&system.inner, &preds, top)).map_err(value_error)?;
    Ok(heights.iter().map(|&h| table.projective_count(h as u128)).collect())
}

/// p-adic density at level `r` (chosen automatically when omitted): `(exact, float)`.
#[pyfunction]
#[pyo3(signature = (system, p, r=None))]
fn sigma_p(py: Python<'_>, system: &System, p: u64, r: Option<u32>) -> PyResult<(String, f64)> {
    let sys = &system.inner;
    let r = r.unwrap_or_else(|| level_for(sys, p, LevelPolicy::Budget { max_work: DEFAULT_BUDGET, max_r: 4 }));
    let rep = py
        .detach(|| sigma_p_estimate_with(sys, p, r, CountMode::Auto, DEFAULT_BUDGET))
        .map_err(value_error)?;
    Ok((rep.sigma_estimate.to_string(), rep.sigma_f64()))
}

/// Real density by chart sampling: `(estimate, standard_error)`.
#[pyfunction]
#[pyo3(signature = (system, samples=1_000_000, seed=1))]
fn sigma_inf(py: Python<'_>, system: &System, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let rep = py
        .detach(|| sigma_infty_leray(&system.inner, samples, seed, ChartPolicy::Argmax))
        .map_err(value_error)?;
    Ok((rep.estimate, rep.standard_error))
}

/// Complete exponential sum over the residues mod `q` for the fixed `y`.
#[pyfunction]
fn complete_sum(system: &System, y: Vec<i64>, q: u64, a: Vec<u64>) -> PyResult<Complex64> {
    let s = exact_complete_sum(&system.inner, &y, q, &a).map_err(value_error)?;
    Ok(s.to_complex())
}

/// Truncated singular series of the fiber over `y`, summed to `q_max`.
#[pyfunction]
fn singular_series(system: &System, y: Vec<i64>, q_max: u64) -> PyResult<f64> {
    Ok(truncated_singular_series(&system.inner, &y, q_max).map_err(value_error)?.value)
}

/// Leading constant from the local densities; unlisted primes count as 1.
#[pyfunction]
#[pyo3(signature = (sigma_inf, sigma_p, n1, n2, d1, d2, r=1))]
fn peyre_constant(
    sigma_inf: f64,
    sigma_p: Vec<(u64, f64)>,
    n1: u64,
    n2: u64,
    d1: u32,
    d2: u32,
    r: u32,
) -> PyResult<f64> {
    Ok(peyre(sigma_inf, &sigma_p, n1, n2, d1, d2, r).map_err(value_error)?.leading_constant)
}

/// Checks the numeric conditions on a shape; returns a dict of named checks.
#[pyfunction]
#[pyo3(signature = (n1, n2, d1, d2, r, dimv1, dimv2, delta=0.01))]
#[allow(clippy::too_many_arguments)]
fn hypothesis<'py>(
    py: Python<'py>,
    n1: u64,
    n2: u64,
    d1: u32,
    d2: u32,
    r: u32,
    dimv1: u64,
    dimv2: u64,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = hypothesis_check(Shape { n1, n2, d1, d2, r, dim_v1: dimv1, dim_v2: dimv2, delta })
        .map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("phi", rep.phi)?;
    out.set_item("summary", rep.summary())?;
    let checks = [Some(&rep.fiber_x), Some(&rep.fiber_y), Some(&rep.box_count), Some(&rep.height_count), rep.hypersurface.as_ref()];
    for c in checks.into_iter().flatten() {
        out.set_item(c.name, (c.lhs, c.rhs, c.ok))?;
    }
    Ok(out)
}

#[pymodule]
fn pybiproj(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(count_box, m)?)?;
    m.add_function(wrap_pyfunction!(count_projective, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_p, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_inf, m)?)?;
    m.add_function(wrap_pyfunction!(complete_sum, m)?)?;
    m.add_function(wrap_pyfunction!(singular_series, m)?)?;
    m.add_function(wrap_pyfunction!(peyre_constant, m)?)?;
    m.add_function(wrap_pyfunction!(hypothesis, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
