//! Search for a common zero mod p at which the Jacobian has full rank.
//!
//! Such a zero lifts to a non-singular p-adic zero (Hensel), which makes
//! sigma_p positive. Not finding one decides nothing.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::DensityError;
use crate::arith::is_prime;
use crate::{BihomogeneousForm, FormSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothZero {
    pub p: u64,
    pub x: Vec<i64>,
    pub y: Vec<i64>,
}

fn residue(v: BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

/// Rank of a matrix over F_p.
fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = residue(BigInt::from(rows[rank][c]).modpow(&BigInt::from(p - 2), &BigInt::from(p)), p);
        for i in 0..rows.len() {
            if i != rank && rows[i][c] != 0 {
                let f = rows[i][c] * inv % p;
                for k in c..cols {
                    rows[i][k] = (rows[i][k] + p * p - f * rows[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn advance(v: &mut [i64], p: i64) -> bool {
    for c in v.iter_mut() {
        *c += 1;
        if *c < p {
            return true;
        }
        *c = 0;
    }
    false
}

/// First zero mod `p` (both blocks nonzero) with Jacobian of rank R, in
/// lexicographic order; `None` when there is none.
pub fn smooth_zero_mod_p(sys: &FormSystem, p: u64, budget: u128) -> Result<Option<SmoothZero>, DensityError> {
    if !is_prime(p) {
        return Err(DensityError::NotPrime(p));
    }
    let (n1, n2) = (sys.n1(), sys.n2());
    let needed = (p as u128).checked_pow((n1 + n2) as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(DensityError::BudgetExceeded { needed, budget });
    }
    let partials: Vec<Vec<BihomogeneousForm>> = sys
        .forms()
        .iter()
        .map(|f| {
            let xs = (0..n1).map(|j| f.partial_x(j));
            let ys = (0..n2).map(|j| f.partial_y(j));
            xs.chain(ys).collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| DensityError::Precondition(e.to_string()))?;
    let eval = |f: &BihomogeneousForm, x: &[i64], y: &[i64]| {
        f.evaluate(x, y).map(|v| residue(v, p)).map_err(|e| DensityError::Precondition(e.to_string()))
    };
    let mut x = vec![0i64; n1];
    while advance(&mut x, p as i64) {
        let mut y = vec![0i64; n2];
        while advance(&mut y, p as i64) {
            let mut zero = true;
            for f in sys.forms() {
                if eval(f, &x, &y)? != 0 {
                    zero = false;
                    break;
                }
            }
            if !zero {
                continue;
            }
            let jac = partials
                .iter()
                .map(|row| row.iter().map(|g| eval(g, &x, &y)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            if rank_mod_p(jac, p) == sys.r() {
                return Ok(Some(SmoothZero { p, x, y }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_system;

    #[test]
    fn bilinear_has_smooth_zero() {
        let sys = parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap();
        let z = smooth_zero_mod_p(&sys, 3, 1 << 20).unwrap().unwrap();
        assert_eq!(sys.forms()[0].evaluate(&z.x, &z.y).unwrap() % 3, BigInt::from(0));
    }

    #[test]
    fn squares_at_two_are_singular() {
        // every zero of x1^2 y1^2 + x2^2 y2^2 mod 2 has a vanishing gradient
        let sys = parse_system(&["x1^2*y1^2 + x2^2*y2^2"], 2, 2).unwrap();
        assert_eq!(smooth_zero_mod_p(&sys, 2, 1 << 20).unwrap(), None);
    }

    #[test]
    fn rank_over_f5() {
        assert_eq!(rank_mod_p(vec![vec![1, 2], vec![2, 4]], 5), 1);
        assert_eq!(rank_mod_p(vec![vec![1, 2], vec![2, 1]], 5), 2);
        assert_eq!(rank_mod_p(vec![vec![1, 2], vec![2, 1]], 3), 1);
    }
}
