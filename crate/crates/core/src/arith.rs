//! Small number-theoretic helpers shared by the counting and density code.

use num_integer::Integer;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Möbius function values `mu[0..=n]` (with `mu[0] = 0`).
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    if n == 0 {
        return vec![0];
    }
    mu[0] = 0;
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        let mut j = p;
        while j <= n {
            if j > p {
                composite[j] = true;
            }
            mu[j] = -mu[j];
            j += p;
        }
        let sq = p.saturating_mul(p);
        let mut j = sq;
        while j <= n {
            mu[j] = 0;
            j += sq;
        }
    }
    mu
}

pub fn mobius(n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    let mut n = n;
    let mut sign = 1i8;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn gcd_slice(v: &[i64]) -> u64 {
    v.iter()
        .fold(0u64, |g, &a| g.gcd(&a.unsigned_abs()))
}

pub fn max_norm(v: &[i64]) -> u64 {
    v.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0)
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow_u128(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Largest `r >= 0` with `r^k <= n` (`k >= 1`).
pub fn iroot(n: u128, k: u32) -> u128 {
    assert!(k >= 1);
    if k == 1 || n < 2 {
        return n;
    }
    let guess = (n as f64).powf(1.0 / k as f64) as u128;
    let mut r = guess.saturating_sub(1);
    let fits = |r: u128| r.checked_pow(k).is_some_and(|v| v <= n);
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r
}

/// Largest integer `l >= 0` with `l^a <= P^b`, computed exactly when possible.
pub fn floor_pow_ratio_root(p: u128, b: u32, a: u32) -> u128 {
    match p.checked_pow(b) {
        Some(v) => iroot(v, a),
        None => {
            // fall back on a float estimate corrected by exact comparisons in f64-safe range
            (p as f64).powf(b as f64 / a as f64).floor() as u128
        }
    }
}

/// Compare `l^a * m^b` against `p` exactly. Returns true when `l^a m^b <= p`.
pub fn power_product_le(l: u64, a: u32, m: u64, b: u32, p: u128) -> bool {
    let Some(la) = (l as u128).checked_pow(a) else {
        return false;
    };
    let Some(mb) = (m as u128).checked_pow(b) else {
        return false;
    };
    la.checked_mul(mb).is_some_and(|v| v <= p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_matches_table() {
        let t = mobius_table(1000);
        for n in 1..=1000u64 {
            assert_eq!(t[n as usize], mobius(n), "n={n}");
        }
        assert_eq!(&t[1..11], &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn primes_and_divisors() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(primes_up_to(1000).iter().all(|&p| is_prime(p)));
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
    }

    #[test]
    fn roots() {
        for n in 0..5000u128 {
            for k in 1..5 {
                let r = iroot(n, k);
                assert!(r.pow(k) <= n && (r + 1).pow(k) > n);
            }
        }
        assert_eq!(iroot(u128::MAX, 2), u64::MAX as u128);
        assert_eq!(iroot(10u128.pow(30), 3), 10u128.pow(10));
    }

    #[test]
    fn gcd_and_norm() {
        assert_eq!(gcd_slice(&[4, -6, 10]), 2);
        assert_eq!(gcd_slice(&[0, 0]), 0);
        assert_eq!(max_norm(&[3, -7, 2]), 7);
    }
}
