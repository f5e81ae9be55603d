//! Exponential sums over a fiber: Weyl sums, complete sums modulo `q`,
//! oscillatory integrals, their truncated series/integral and the
//! multilinear forms obtained by differencing.

mod cyclotomic;
mod integral;
mod polarization;
mod series;
mod weyl;

pub use cyclotomic::{complete_sum, cyclotomic_polynomial, residue_counts, CyclotomicSum};
pub use integral::{
    fiber_prediction, oscillatory_integral, singular_integral_sinc, truncated_singular_integral,
    FiberPrediction, IntegralReport, OscillatoryReport, DEFAULT_GRID,
};
pub use polarization::{multilinear_forms, polarized_value, rank_deficiency_count, MultilinearReport};
pub use series::{
    singular_series_term_exact, truncated_singular_series, truncated_singular_series_exact,
    SeriesReport, SeriesTerm,
};
pub use weyl::{weyl_sum, ArcPoint};

use num_complex::Complex64;

use crate::forms::{BihomogeneousForm, FormError, FormSystem, HomogeneousForm, Monomial};
use crate::stats::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpSumError {
    #[error("the system specialized at y = {0:?} vanishes identically")]
    DegenerateFiber(Vec<i64>),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, o: ComplexSum) {
        self.re.merge(o.re);
        self.im.merge(o.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `e(t) = exp(2 pi i t)`.
#[inline]
pub(crate) fn e(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

pub(crate) fn specialize(system: &FormSystem, y: &[i64]) -> Result<Vec<HomogeneousForm>, ExpSumError> {
    Ok(system.specialize_y(y)?)
}

pub(crate) fn require_nondegenerate(forms: &[HomogeneousForm], y: &[i64]) -> Result<(), ExpSumError> {
    if forms.iter().all(|f| f.is_zero()) {
        return Err(ExpSumError::DegenerateFiber(y.to_vec()));
    }
    Ok(())
}

/// The specialized system at `y` as a system with a trivial second block
/// (`n2 = 1`, `d2 = 0`), so the counting and density routines apply to it.
pub fn fiber_system(system: &FormSystem, y: &[i64]) -> Result<FormSystem, ExpSumError> {
    let forms = specialize(system, y)?;
    let lifted = forms
        .iter()
        .map(|f| {
            BihomogeneousForm::new(
                f.n(),
                1,
                f.degree(),
                0,
                f.terms().iter().map(|(c, ex)| Monomial::new(c.clone(), ex.clone(), vec![0])),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FormSystem::new(lifted)?)
}
