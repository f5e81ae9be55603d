//! Boxes and exclusion predicates.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::Zero;

use crate::arith::gcd_slice;

pub type Rational = Ratio<i64>;

/// Closed rational intervals, one per coordinate of each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxSpec {
    pub x: Vec<(Rational, Rational)>,
    pub y: Vec<(Rational, Rational)>,
}

impl BoxSpec {
    /// `[-1, 1]` in every coordinate.
    pub fn unit(n1: usize, n2: usize) -> Self {
        let unit = (Rational::from_integer(-1), Rational::from_integer(1));
        BoxSpec {
            x: vec![unit; n1],
            y: vec![unit; n2],
        }
    }

    pub fn new(x: Vec<(Rational, Rational)>, y: Vec<(Rational, Rational)>) -> Option<Self> {
        if x.iter().chain(&y).any(|(a, b)| a > b) {
            return None;
        }
        Some(BoxSpec { x, y })
    }

    pub fn is_symmetric(&self) -> bool {
        self.x.iter().chain(&self.y).all(|(a, b)| *a == -*b)
    }

    pub fn x_ranges(&self, p: Rational) -> (Vec<i64>, Vec<i64>) {
        scaled(&self.x, p)
    }

    pub fn y_ranges(&self, p: Rational) -> (Vec<i64>, Vec<i64>) {
        scaled(&self.y, p)
    }
}

/// Integer points of `p * [a, b]` per coordinate.
pub fn scaled(iv: &[(Rational, Rational)], p: Rational) -> (Vec<i64>, Vec<i64>) {
    iv.iter()
        .map(|(a, b)| ((a * p).ceil().to_integer(), (b * p).floor().to_integer()))
        .unzip()
}

pub fn cardinality(lo: &[i64], hi: &[i64]) -> u128 {
    lo.iter()
        .zip(hi)
        .map(|(a, b)| if b < a { 0 } else { (b - a + 1) as u128 })
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// Judgment on one block's vector. `allows(v)` is true when `v` is kept.
///
/// All built-in variants are invariant under nonzero scaling and sign
/// changes, which the projective counts rely on.
#[derive(Clone)]
pub enum ExclusionPredicate {
    AllPoints,
    /// Keeps `v` when fewer than `lambda` coordinates vanish.
    DiagonalZeroCount(usize),
    /// Removes the listed lines (each vector stands for all its multiples).
    UserTable(Arc<HashSet<Vec<i64>>>),
}

impl ExclusionPredicate {
    pub fn user_table(vectors: impl IntoIterator<Item = Vec<i64>>) -> Self {
        ExclusionPredicate::UserTable(Arc::new(
            vectors.into_iter().filter_map(|v| normalize_line(&v)).collect(),
        ))
    }

    pub fn allows(&self, v: &[i64]) -> bool {
        match self {
            ExclusionPredicate::AllPoints => true,
            ExclusionPredicate::DiagonalZeroCount(lambda) => {
                v.iter().filter(|c| c.is_zero()).count() < *lambda
            }
            ExclusionPredicate::UserTable(t) => match normalize_line(v) {
                Some(k) => !t.contains(&k),
                None => true,
            },
        }
    }

    pub fn id(&self) -> String {
        match self {
            ExclusionPredicate::AllPoints => "all".into(),
            ExclusionPredicate::DiagonalZeroCount(l) => format!("diag-zeros<{l}"),
            ExclusionPredicate::UserTable(t) => format!("table[{}]", t.len()),
        }
    }
}

impl fmt::Debug for ExclusionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Primitive representative with first nonzero coordinate positive.
pub fn normalize_line(v: &[i64]) -> Option<Vec<i64>> {
    let g = gcd_slice(v) as i64;
    if g == 0 {
        return None;
    }
    let first = *v.iter().find(|c| **c != 0)?;
    let s = if first < 0 { -g } else { g };
    Some(v.iter().map(|c| c / s).collect())
}

/// Predicates on `x` (the `A_2` side) and on `y` (the `A_1` side).
#[derive(Debug, Clone)]
pub struct Predicates {
    pub on_x: ExclusionPredicate,
    pub on_y: ExclusionPredicate,
}

impl Predicates {
    pub fn all() -> Self {
        Predicates {
            on_x: ExclusionPredicate::AllPoints,
            on_y: ExclusionPredicate::AllPoints,
        }
    }

    pub fn new(on_x: ExclusionPredicate, on_y: ExclusionPredicate) -> Self {
        Predicates { on_x, on_y }
    }

    pub fn id(&self) -> String {
        format!("x:{} y:{}", self.on_x.id(), self.on_y.id())
    }
}

impl Default for Predicates {
    fn default() -> Self {
        Self::all()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_ranges() {
        let b = BoxSpec::unit(2, 1);
        assert_eq!(b.x_ranges(Rational::new(5, 2)), (vec![-2, -2], vec![2, 2]));
        let half = BoxSpec::new(
            vec![(Rational::new(-1, 3), Rational::new(1, 2))],
            vec![(Rational::from_integer(0), Rational::from_integer(1))],
        )
        .unwrap();
        assert_eq!(half.x_ranges(Rational::from_integer(6)), (vec![-2], vec![3]));
        assert!(!half.is_symmetric());
        assert!(BoxSpec::new(vec![(Rational::from_integer(1), Rational::from_integer(0))], vec![]).is_none());
    }

    #[test]
    fn predicates_are_projective() {
        let t = ExclusionPredicate::user_table([vec![2, -4, 0]]);
        assert!(!t.allows(&[1, -2, 0]));
        assert!(!t.allows(&[-3, 6, 0]));
        assert!(t.allows(&[1, 2, 0]));
        let d = ExclusionPredicate::DiagonalZeroCount(1);
        assert!(d.allows(&[1, 2, 3]));
        assert!(!d.allows(&[1, 0, 3]));
        for v in [[1i64, 0, 3], [2, 5, -7], [0, 0, 4]] {
            let w: Vec<i64> = v.iter().map(|c| -3 * c).collect();
            for p in [&t, &d] {
                assert_eq!(p.allows(&v), p.allows(&w));
            }
        }
    }
}
