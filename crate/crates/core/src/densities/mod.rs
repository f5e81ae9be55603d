//! Local densities: counts modulo prime powers and the real density.

pub mod padic;
pub mod real;
pub mod smooth;

pub use padic::{
    count_ladder, count_mod, count_mod_star, count_mod_star_with, count_mod_with, euler_product,
    level_for, omega_p, omega_p_with, sigma_p_estimate, sigma_p_estimate_with, star_comparison,
    star_factor, work_estimate, CountLadder, CountMode, EulerReport, LevelPolicy, OmegaReport,
    PadicReport, StarComparison, DEFAULT_BUDGET,
};
pub use real::{
    default_epsilons, sigma_infty_leray, sigma_infty_mc, sigma_infty_mc_ladder, ChartPolicy,
    RealDensityReport, RealMethod, SlabLadder,
};
pub use smooth::{smooth_zero_mod_p, SmoothZero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("modulus {p}^{r} is too large")]
    ModulusTooLarge { p: u64, r: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate chart: {0}")]
    ChartDegenerate(String),
}
