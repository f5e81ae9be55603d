//! The Riemann zeta function and its derivative for real `s > 1`.

const N: u32 = 20;
/// `B_{2k} / (2k)!` for `k = 1..=7`.
const COEFFS: [f64; 7] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
];

/// Euler-Maclaurin with the head summed to `N - 1`.
fn euler_maclaurin(s: f64) -> (f64, f64) {
    assert!(s > 1.0, "zeta needs s > 1");
    let nf = N as f64;
    let ln_n = nf.ln();
    let mut z = 0.0;
    let mut dz = 0.0;
    for n in 1..N {
        let t = (n as f64).powf(-s);
        z += t;
        dz -= t * (n as f64).ln();
    }
    let tail = nf.powf(1.0 - s);
    z += tail / (s - 1.0);
    dz += -tail * ln_n / (s - 1.0) - tail / (s - 1.0).powi(2);
    let half = nf.powf(-s) / 2.0;
    z += half;
    dz -= half * ln_n;
    for (k, c) in COEFFS.iter().enumerate() {
        let top = 2 * k as i32;
        // rising factorial s (s+1) ... (s+2k)
        let mut poly = 1.0;
        let mut dlog = 0.0;
        for j in 0..=top {
            poly *= s + j as f64;
            dlog += 1.0 / (s + j as f64);
        }
        let pw = nf.powf(-s - top as f64 - 1.0);
        z += c * poly * pw;
        dz += c * poly * pw * (dlog - ln_n);
    }
    (z, dz)
}

pub fn zeta(s: f64) -> f64 {
    euler_maclaurin(s).0
}

pub fn zeta_prime(s: f64) -> f64 {
    euler_maclaurin(s).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0) - pi * pi / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - pi.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-14);
        assert!((zeta_prime(2.0) + 0.937_548_254_315_843_8).abs() < 1e-13);
        let h = 1e-5;
        let fd = (zeta(3.5 + h) - zeta(3.5 - h)) / (2.0 * h);
        assert!((zeta_prime(3.5) - fd).abs() < 1e-8);
    }
}
