//! Constants around the leading-term prediction: hypothesis arithmetic,
//! the two-way assembly of the leading constant, the diagonal family's
//! exceptional sets, and the count-versus-prediction report.

mod hypothesis;
mod peyre;
mod report;
mod subvariety;
mod zeta;

pub use hypothesis::{
    g1, g2, height_threshold, hypersurface_threshold, hypothesis_check, solve_b1, solve_b2, BRoot,
    Check, HypothesisReport, Shape,
};
pub use peyre::{alpha_constant, peyre_constant, trivial_factors, PeyreReport, ASSEMBLY_TOLERANCE};
pub use report::{
    manin_report, moebius_weight_limits, moebius_weight_sums, CountRow, DensityConfig,
    ManinReport, PartialSumRow,
};
pub use subvariety::{
    diagonal_exclusion, excluded_count, primitive_up_to_sign, subvariety_growth,
    SubvarietyReport,
};
pub use zeta::{zeta, zeta_prime};

use crate::counting::CountError;
use crate::densities::DensityError;
use crate::hyperbola::HyperbolaError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManinError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no root of the b equation in ({lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("assemblies disagree: {factorwise} vs {collapsed}")]
    AssemblyMismatch { factorwise: f64, collapsed: f64 },
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Fit(#[from] HyperbolaError),
}
