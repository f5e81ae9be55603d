//! Two assemblies of the conjectural leading constant for a hypersurface.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::zeta::zeta;
use super::ManinError;
use crate::arith::primes_up_to;

/// `1 / ((n1 - d1)(n2 - d2))`.
pub fn alpha_constant(n1: u64, n2: u64, d1: u32, d2: u32) -> Result<BigRational, ManinError> {
    if n1 <= d1 as u64 || n2 <= d2 as u64 {
        return Err(ManinError::Precondition("need n1 > d1 and n2 > d2".into()));
    }
    Ok(BigRational::new(
        BigInt::from(1),
        BigInt::from((n1 - d1 as u64) * (n2 - d2 as u64)),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeyreReport {
    pub alpha: BigRational,
    pub beta: i64,
    /// Leading coefficient of `(s - 1)^2 zeta(s)^2` at `s = 1`.
    pub l_limit: i64,
    pub sigma_inf: f64,
    /// Product of the supplied `sigma_p`.
    pub euler: f64,
    /// `(n1 - d1)(n2 - d2) / 4 * sigma_inf`.
    pub tau_inf: f64,
    /// `alpha * beta * l_limit * tau_inf * prod_p tau_p`.
    pub c_pey_factorwise: f64,
    /// `zeta(n1 - d1)^-1 zeta(n2 - d2)^-1 sigma_inf prod sigma_p / 4`.
    pub c_pey: f64,
    /// `(4 zeta(b1) zeta(b2))^-1 sigma` with `b_i = n_i - R d_i`.
    pub leading_constant: f64,
}

/// Tolerance for agreement of the two assemblies.
pub const ASSEMBLY_TOLERANCE: f64 = 1e-10;

/// Assembles the constant from `sigma_inf` and `(p, sigma_p)` pairs; primes
/// that are not listed contribute `sigma_p = 1`.
pub fn peyre_constant(sigma_inf: f64, sigma_p: &[(u64, f64)], n1: u64, n2: u64, d1: u32, d2: u32, r: u32) -> Result<PeyreReport, ManinError> {
    if r != 1 {
        return Err(ManinError::Precondition("the constant is assembled for a single form".into()));
    }
    let alpha = alpha_constant(n1, n2, d1, d2)?;
    if !(sigma_inf.is_finite() && sigma_inf >= 0.0) || sigma_p.iter().any(|(_, s)| !(s.is_finite() && *s >= 0.0)) {
        return Err(ManinError::Precondition("densities must be finite and nonnegative".into()));
    }
    let a = (n1 - d1 as u64) as f64;
    let b = (n2 - d2 as u64) as f64;
    if a < 2.0 || b < 2.0 {
        return Err(ManinError::Precondition("need n_i - d_i >= 2 for the zeta values".into()));
    }
    let euler: f64 = sigma_p.iter().map(|(_, s)| s).product();
    let tau_inf = a * b / 4.0 * sigma_inf;

    // factor by factor: tau_p = (1 - 1/p)^2 omega_p with
    // omega_p = (1 - p^-a)(1 - p^-b) / (1 - 1/p)^2 * sigma_p
    let mut listed = 1.0;
    let mut local = 1.0;
    for &(p, s) in sigma_p {
        let pf = p as f64;
        let lp = (1.0 - 1.0 / pf).powi(2);
        let omega = (1.0 - pf.powf(-a)) * (1.0 - pf.powf(-b)) / lp * s;
        local *= lp * omega;
        listed *= (1.0 - pf.powf(-a)) * (1.0 - pf.powf(-b));
    }
    let unlisted = 1.0 / (zeta(a) * zeta(b) * listed);
    let c_pey_factorwise = alpha.to_f64().unwrap() * tau_inf * local * unlisted;
    let c_pey = sigma_inf * euler / (4.0 * zeta(a) * zeta(b));
    if (c_pey_factorwise - c_pey).abs() > ASSEMBLY_TOLERANCE * c_pey.abs().max(1e-300) && c_pey != 0.0 {
        return Err(ManinError::AssemblyMismatch { factorwise: c_pey_factorwise, collapsed: c_pey });
    }
    let b1 = n1 as f64 - r as f64 * d1 as f64;
    let b2 = n2 as f64 - r as f64 * d2 as f64;
    Ok(PeyreReport {
        alpha,
        beta: 1,
        l_limit: 1,
        sigma_inf,
        euler,
        tau_inf,
        c_pey_factorwise,
        c_pey,
        leading_constant: sigma_inf * euler / (4.0 * zeta(b1) * zeta(b2)),
    })
}

/// `(p, 1)` for every prime up to `p_max`.
pub fn trivial_factors(p_max: u64) -> Vec<(u64, f64)> {
    primes_up_to(p_max).into_iter().map(|p| (p, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_constant(4, 4, 2, 2).unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(alpha_constant(3, 3, 1, 1).unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(alpha_constant(5, 4, 2, 1).unwrap(), alpha_constant(4, 5, 1, 2).unwrap());
        assert!(alpha_constant(2, 4, 2, 2).is_err());
    }

    #[test]
    fn unit_densities() {
        let r = peyre_constant(1.0, &trivial_factors(50), 4, 4, 2, 2, 1).unwrap();
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.c_pey - 0.25 / (z2 * z2)).abs() < 1e-14);
        assert!((r.c_pey - 0.092_39).abs() < 1e-5);
        let d = peyre_constant(2.0, &trivial_factors(50), 4, 4, 2, 2, 1).unwrap();
        assert!((d.c_pey - 2.0 * r.c_pey).abs() < 1e-15);
    }
}
