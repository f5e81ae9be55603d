//! Exact bihomogeneous forms and systems of them.
//!
//! A form of bidegree `(d1, d2)` lives in two blocks of variables,
//! `x = (x_1..x_{n1})` and `y = (y_1..y_{n2})`. Coefficients are arbitrary
//! precision integers; monomials are kept merged and sorted in descending
//! lexicographic order of the concatenated exponent tuple, so two forms are
//! equal exactly when their monomial lists are equal.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::linalg::rational_rank;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("expected {expected} {block}-coordinates, got {found}")]
    DimensionMismatch {
        block: char,
        expected: usize,
        found: usize,
    },
    #[error("monomial has {block}-degree {found}, form has {block}-degree {expected}")]
    DegreeMismatch {
        block: char,
        expected: u32,
        found: u32,
    },
    #[error("variable index {index} out of range for {n} {block}-variables")]
    IndexOutOfRange { block: char, index: usize, n: usize },
    #[error("a system needs at least one form")]
    EmptySystem,
    #[error("form {index} has shape {found}, system has shape {expected}")]
    ShapeMismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("block dimensions must be positive")]
    ZeroDimension,
}

/// One term `coeff * prod x_i^xexp_i * prod y_j^yexp_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: BigInt,
    pub xexp: Vec<u32>,
    pub yexp: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: impl Into<BigInt>, xexp: Vec<u32>, yexp: Vec<u32>) -> Self {
        Monomial {
            coeff: coeff.into(),
            xexp,
            yexp,
        }
    }

    pub fn x_degree(&self) -> u32 {
        self.xexp.iter().sum()
    }

    pub fn y_degree(&self) -> u32 {
        self.yexp.iter().sum()
    }

    fn exponent_cmp(&self, other: &Self) -> Ordering {
        // descending lex on (xexp ++ yexp)
        other
            .xexp
            .iter()
            .chain(other.yexp.iter())
            .cmp(self.xexp.iter().chain(self.yexp.iter()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BihomogeneousForm {
    n1: usize,
    n2: usize,
    d1: u32,
    d2: u32,
    monomials: Vec<Monomial>,
}

impl BihomogeneousForm {
    /// Builds a canonical form. Terms sharing an exponent pair are merged and
    /// zero coefficients dropped.
    pub fn new(
        n1: usize,
        n2: usize,
        d1: u32,
        d2: u32,
        terms: impl IntoIterator<Item = Monomial>,
    ) -> Result<Self, FormError> {
        if n1 == 0 || n2 == 0 {
            return Err(FormError::ZeroDimension);
        }
        let mut monomials: Vec<Monomial> = Vec::new();
        for m in terms {
            if m.xexp.len() != n1 {
                return Err(FormError::DimensionMismatch {
                    block: 'x',
                    expected: n1,
                    found: m.xexp.len(),
                });
            }
            if m.yexp.len() != n2 {
                return Err(FormError::DimensionMismatch {
                    block: 'y',
                    expected: n2,
                    found: m.yexp.len(),
                });
            }
            if m.x_degree() != d1 {
                return Err(FormError::DegreeMismatch {
                    block: 'x',
                    expected: d1,
                    found: m.x_degree(),
                });
            }
            if m.y_degree() != d2 {
                return Err(FormError::DegreeMismatch {
                    block: 'y',
                    expected: d2,
                    found: m.y_degree(),
                });
            }
            monomials.push(m);
        }
        monomials.sort_by(|a, b| a.exponent_cmp(b));
        let mut merged: Vec<Monomial> = Vec::with_capacity(monomials.len());
        for m in monomials {
            match merged.last_mut() {
                Some(last) if last.exponent_cmp(&m) == Ordering::Equal => last.coeff += m.coeff,
                _ => merged.push(m),
            }
        }
        merged.retain(|m| !m.coeff.is_zero());
        Ok(BihomogeneousForm {
            n1,
            n2,
            d1,
            d2,
            monomials: merged,
        })
    }

    /// Convenience constructor from `(coeff, xexp, yexp)` triples.
    pub fn from_terms(
        n1: usize,
        n2: usize,
        d1: u32,
        d2: u32,
        terms: &[(i64, &[u32], &[u32])],
    ) -> Result<Self, FormError> {
        Self::new(
            n1,
            n2,
            d1,
            d2,
            terms
                .iter()
                .map(|(c, xe, ye)| Monomial::new(*c, xe.to_vec(), ye.to_vec())),
        )
    }

    pub fn zero(n1: usize, n2: usize, d1: u32, d2: u32) -> Self {
        BihomogeneousForm {
            n1,
            n2,
            d1,
            d2,
            monomials: Vec::new(),
        }
    }

    /// The diagonal form `sum_i x_i^d1 y_i^d2` in `n + n` variables.
    pub fn diagonal(n: usize, d1: u32, d2: u32) -> Self {
        let terms = (0..n).map(|i| {
            let mut xe = vec![0; n];
            let mut ye = vec![0; n];
            xe[i] = d1;
            ye[i] = d2;
            Monomial::new(1, xe, ye)
        });
        Self::new(n, n, d1, d2, terms).expect("diagonal form is well formed")
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn d1(&self) -> u32 {
        self.d1
    }
    pub fn d2(&self) -> u32 {
        self.d2
    }
    pub fn bidegree(&self) -> (u32, u32) {
        (self.d1, self.d2)
    }
    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }
    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    fn check_dims(&self, nx: usize, ny: usize) -> Result<(), FormError> {
        if nx != self.n1 {
            return Err(FormError::DimensionMismatch {
                block: 'x',
                expected: self.n1,
                found: nx,
            });
        }
        if ny != self.n2 {
            return Err(FormError::DimensionMismatch {
                block: 'y',
                expected: self.n2,
                found: ny,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[i64], y: &[i64]) -> Result<BigInt, FormError> {
        let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
        self.evaluate_big(&xb, &yb)
    }

    pub fn evaluate_big(&self, x: &[BigInt], y: &[BigInt]) -> Result<BigInt, FormError> {
        self.check_dims(x.len(), y.len())?;
        let mut acc = BigInt::zero();
        for m in &self.monomials {
            let mut t = m.coeff.clone();
            for (v, &e) in x.iter().zip(&m.xexp) {
                if e > 0 {
                    t *= num_traits::pow(v.clone(), e as usize);
                }
            }
            for (v, &e) in y.iter().zip(&m.yexp) {
                if e > 0 {
                    t *= num_traits::pow(v.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn evaluate_rational(
        &self,
        x: &[BigRational],
        y: &[BigRational],
    ) -> Result<BigRational, FormError> {
        self.check_dims(x.len(), y.len())?;
        let mut acc = BigRational::zero();
        for m in &self.monomials {
            let mut t = BigRational::from_integer(m.coeff.clone());
            for (v, &e) in x.iter().zip(&m.xexp) {
                if e > 0 {
                    t *= num_traits::pow(v.clone(), e as usize);
                }
            }
            for (v, &e) in y.iter().zip(&m.yexp) {
                if e > 0 {
                    t *= num_traits::pow(v.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn evaluate_real(&self, x: &[f64], y: &[f64]) -> Result<f64, FormError> {
        self.check_dims(x.len(), y.len())?;
        Ok(self
            .monomials
            .iter()
            .map(|m| {
                let mut t = m.coeff.to_f64().unwrap_or(f64::NAN);
                for (v, &e) in x.iter().zip(&m.xexp) {
                    t *= v.powi(e as i32);
                }
                for (v, &e) in y.iter().zip(&m.yexp) {
                    t *= v.powi(e as i32);
                }
                t
            })
            .sum())
    }

    /// Formal derivative in `x_j` (0-based). Differentiating a form of
    /// x-degree 0 gives the zero form.
    pub fn partial_x(&self, j: usize) -> Result<Self, FormError> {
        if j >= self.n1 {
            return Err(FormError::IndexOutOfRange {
                block: 'x',
                index: j,
                n: self.n1,
            });
        }
        let d1 = self.d1.saturating_sub(1);
        let terms = self.monomials.iter().filter(|m| m.xexp[j] > 0).map(|m| {
            let mut xe = m.xexp.clone();
            let e = xe[j];
            xe[j] -= 1;
            Monomial::new(&m.coeff * BigInt::from(e), xe, m.yexp.clone())
        });
        Self::new(self.n1, self.n2, d1, self.d2, terms)
    }

    pub fn partial_y(&self, j: usize) -> Result<Self, FormError> {
        if j >= self.n2 {
            return Err(FormError::IndexOutOfRange {
                block: 'y',
                index: j,
                n: self.n2,
            });
        }
        let d2 = self.d2.saturating_sub(1);
        let terms = self.monomials.iter().filter(|m| m.yexp[j] > 0).map(|m| {
            let mut ye = m.yexp.clone();
            let e = ye[j];
            ye[j] -= 1;
            Monomial::new(&m.coeff * BigInt::from(e), m.xexp.clone(), ye)
        });
        Self::new(self.n1, self.n2, self.d1, d2, terms)
    }

    /// Substitutes `y`, leaving a form of degree `d1` in `x`.
    pub fn specialize_y(&self, y: &[i64]) -> Result<HomogeneousForm, FormError> {
        self.check_dims(self.n1, y.len())?;
        let terms = self.monomials.iter().map(|m| {
            let mut c = m.coeff.clone();
            for (&v, &e) in y.iter().zip(&m.yexp) {
                if e > 0 {
                    c *= num_traits::pow(BigInt::from(v), e as usize);
                }
            }
            (c, m.xexp.clone())
        });
        Ok(HomogeneousForm::new(self.n1, self.d1, terms))
    }

    /// Substitutes `x`, leaving a form of degree `d2` in `y`.
    pub fn specialize_x(&self, x: &[i64]) -> Result<HomogeneousForm, FormError> {
        self.check_dims(x.len(), self.n2)?;
        let terms = self.monomials.iter().map(|m| {
            let mut c = m.coeff.clone();
            for (&v, &e) in x.iter().zip(&m.xexp) {
                if e > 0 {
                    c *= num_traits::pow(BigInt::from(v), e as usize);
                }
            }
            (c, m.yexp.clone())
        });
        Ok(HomogeneousForm::new(self.n2, self.d2, terms))
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let terms = self
            .monomials
            .iter()
            .map(|m| Monomial::new(&m.coeff * &c, m.xexp.clone(), m.yexp.clone()));
        Self::new(self.n1, self.n2, self.d1, self.d2, terms).expect("same shape")
    }

    /// Exchanges the roles of the two variable blocks.
    pub fn swapped(&self) -> Self {
        let terms = self
            .monomials
            .iter()
            .map(|m| Monomial::new(m.coeff.clone(), m.yexp.clone(), m.xexp.clone()));
        Self::new(self.n2, self.n1, self.d2, self.d1, terms).expect("same shape")
    }

    /// Sum of absolute values of the coefficients.
    pub fn coefficient_l1(&self) -> BigInt {
        self.monomials.iter().map(|m| m.coeff.abs()).sum()
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, first: &mut bool, var: char, i: usize, e: u32) -> fmt::Result {
    if e == 0 {
        return Ok(());
    }
    if !*first {
        write!(f, "*")?;
    }
    *first = false;
    write!(f, "{}{}", var, i + 1)?;
    if e > 1 {
        write!(f, "^{}", e)?;
    }
    Ok(())
}

fn write_signed_term(
    f: &mut fmt::Formatter<'_>,
    index: usize,
    coeff: &BigInt,
    body: impl Fn(&mut fmt::Formatter<'_>, &mut bool) -> fmt::Result,
    constant: bool,
) -> fmt::Result {
    let neg = coeff.is_negative();
    match (index, neg) {
        (0, true) => write!(f, "-")?,
        (0, false) => {}
        (_, true) => write!(f, " - ")?,
        (_, false) => write!(f, " + ")?,
    }
    let mag = coeff.abs();
    let mut first = true;
    if !mag.is_one() || constant {
        write!(f, "{}", mag)?;
        first = false;
    }
    body(f, &mut first)
}

/// Renders in the text grammar accepted by the parser, e.g. `x1^2*y1 - 3*x2*y2`.
impl fmt::Display for BihomogeneousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (k, m) in self.monomials.iter().enumerate() {
            let constant = m.x_degree() + m.y_degree() == 0;
            write_signed_term(
                f,
                k,
                &m.coeff,
                |f, first| {
                    for (i, &e) in m.xexp.iter().enumerate() {
                        write_factor(f, first, 'x', i, e)?;
                    }
                    for (i, &e) in m.yexp.iter().enumerate() {
                        write_factor(f, first, 'y', i, e)?;
                    }
                    Ok(())
                },
                constant,
            )?;
        }
        Ok(())
    }
}

/// A homogeneous form in a single block of `n` variables, typically a
/// bihomogeneous form with one block substituted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomogeneousForm {
    n: usize,
    d: u32,
    terms: Vec<(BigInt, Vec<u32>)>,
}

impl HomogeneousForm {
    pub fn new(n: usize, d: u32, terms: impl IntoIterator<Item = (BigInt, Vec<u32>)>) -> Self {
        let mut v: Vec<(BigInt, Vec<u32>)> = terms.into_iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1));
        let mut merged: Vec<(BigInt, Vec<u32>)> = Vec::with_capacity(v.len());
        for (c, e) in v {
            match merged.last_mut() {
                Some(last) if last.1 == e => last.0 += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        HomogeneousForm { n, d, terms: merged }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> u32 {
        self.d
    }
    pub fn terms(&self) -> &[(BigInt, Vec<u32>)] {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, z: &[i64]) -> Result<BigInt, FormError> {
        if z.len() != self.n {
            return Err(FormError::DimensionMismatch {
                block: 'z',
                expected: self.n,
                found: z.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(c, e)| {
                let mut t = c.clone();
                for (&v, &k) in z.iter().zip(e) {
                    if k > 0 {
                        t *= num_traits::pow(BigInt::from(v), k as usize);
                    }
                }
                t
            })
            .sum())
    }
}

impl fmt::Display for HomogeneousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, e)) in self.terms.iter().enumerate() {
            let constant = e.iter().sum::<u32>() == 0;
            write_signed_term(
                f,
                k,
                c,
                |f, first| {
                    for (i, &p) in e.iter().enumerate() {
                        write_factor(f, first, 'x', i, p)?;
                    }
                    Ok(())
                },
                constant,
            )?;
        }
        Ok(())
    }
}

/// `R >= 1` forms sharing `(n1, n2, d1, d2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormSystem {
    forms: Vec<BihomogeneousForm>,
}

fn shape_of(f: &BihomogeneousForm) -> String {
    format!("n=({},{}) d=({},{})", f.n1, f.n2, f.d1, f.d2)
}

impl FormSystem {
    pub fn new(forms: Vec<BihomogeneousForm>) -> Result<Self, FormError> {
        let first = forms.first().ok_or(FormError::EmptySystem)?;
        let expected = shape_of(first);
        for (index, f) in forms.iter().enumerate().skip(1) {
            let found = shape_of(f);
            if found != expected {
                return Err(FormError::ShapeMismatch {
                    index,
                    expected,
                    found,
                });
            }
        }
        Ok(FormSystem { forms })
    }

    pub fn single(form: BihomogeneousForm) -> Self {
        FormSystem { forms: vec![form] }
    }

    pub fn forms(&self) -> &[BihomogeneousForm] {
        &self.forms
    }
    pub fn r(&self) -> usize {
        self.forms.len()
    }
    pub fn n1(&self) -> usize {
        self.forms[0].n1
    }
    pub fn n2(&self) -> usize {
        self.forms[0].n2
    }
    pub fn d1(&self) -> u32 {
        self.forms[0].d1
    }
    pub fn d2(&self) -> u32 {
        self.forms[0].d2
    }

    /// Anticanonical height exponents `(n1 - R d1, n2 - R d2)`.
    pub fn height_exponents(&self) -> (i64, i64) {
        let r = self.r() as i64;
        (
            self.n1() as i64 - r * self.d1() as i64,
            self.n2() as i64 - r * self.d2() as i64,
        )
    }

    pub fn evaluate(&self, x: &[i64], y: &[i64]) -> Result<Vec<BigInt>, FormError> {
        self.forms.iter().map(|f| f.evaluate(x, y)).collect()
    }

    pub fn is_solution(&self, x: &[i64], y: &[i64]) -> Result<bool, FormError> {
        for f in &self.forms {
            if !f.evaluate(x, y)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn specialize_y(&self, y: &[i64]) -> Result<Vec<HomogeneousForm>, FormError> {
        self.forms.iter().map(|f| f.specialize_y(y)).collect()
    }

    pub fn specialize_x(&self, x: &[i64]) -> Result<Vec<HomogeneousForm>, FormError> {
        self.forms.iter().map(|f| f.specialize_x(x)).collect()
    }

    pub fn swapped(&self) -> Self {
        FormSystem {
            forms: self.forms.iter().map(|f| f.swapped()).collect(),
        }
    }

    /// Rank of the `R x n1` matrix `(dF_i/dx_j)(x; y)`, by exact elimination.
    /// The point lies on `V1*` exactly when the rank is below `R`.
    pub fn jacobian_rank_x(&self, x: &[BigRational], y: &[BigRational]) -> Result<usize, FormError> {
        self.jacobian_rank(x, y, true)
    }

    /// Rank of the `R x n2` matrix `(dF_i/dy_j)(x; y)`.
    pub fn jacobian_rank_y(&self, x: &[BigRational], y: &[BigRational]) -> Result<usize, FormError> {
        self.jacobian_rank(x, y, false)
    }

    fn jacobian_rank(
        &self,
        x: &[BigRational],
        y: &[BigRational],
        wrt_x: bool,
    ) -> Result<usize, FormError> {
        self.forms[0].check_dims(x.len(), y.len())?;
        let cols = if wrt_x { self.n1() } else { self.n2() };
        let mut rows = Vec::with_capacity(self.r());
        for f in &self.forms {
            let mut row = Vec::with_capacity(cols);
            for j in 0..cols {
                let df = if wrt_x { f.partial_x(j)? } else { f.partial_y(j)? };
                row.push(df.evaluate_rational(x, y)?);
            }
            rows.push(row);
        }
        Ok(rational_rank(rows))
    }

    pub fn jacobian_rank_x_int(&self, x: &[i64], y: &[i64]) -> Result<usize, FormError> {
        self.jacobian_rank_x(&to_rationals(x), &to_rationals(y))
    }

    pub fn jacobian_rank_y_int(&self, x: &[i64], y: &[i64]) -> Result<usize, FormError> {
        self.jacobian_rank_y(&to_rationals(x), &to_rationals(y))
    }

    /// Stable hex digest of the rendered system, used to tag output tables.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{}:{}:", self.n1(), self.n2()).as_bytes());
        for f in &self.forms {
            h.update(f.to_string().as_bytes());
            h.update(b";");
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}

impl fmt::Display for FormSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, form) in self.forms.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", form)?;
        }
        Ok(())
    }
}

pub fn to_rationals(v: &[i64]) -> Vec<BigRational> {
    v.iter()
        .map(|&a| BigRational::from_integer(BigInt::from(a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bilinear(signs: &[i64]) -> BihomogeneousForm {
        let n = signs.len();
        let terms = signs.iter().enumerate().map(|(i, &s)| {
            let mut xe = vec![0; n];
            let mut ye = vec![0; n];
            xe[i] = 1;
            ye[i] = 1;
            Monomial::new(s, xe, ye)
        });
        BihomogeneousForm::new(n, n, 1, 1, terms).unwrap()
    }

    fn diag_signed(n: usize, signs: &[i64], d1: u32, d2: u32) -> BihomogeneousForm {
        let terms = signs.iter().enumerate().map(|(i, &s)| {
            let mut xe = vec![0; n];
            let mut ye = vec![0; n];
            xe[i] = d1;
            ye[i] = d2;
            Monomial::new(s, xe, ye)
        });
        BihomogeneousForm::new(n, n, d1, d2, terms).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = bilinear(&[1, -1]);
        assert_eq!(f.evaluate(&[1, 1], &[1, 1]).unwrap(), BigInt::zero());
        assert_eq!(f.evaluate(&[0, 0], &[5, -7]).unwrap(), BigInt::zero());
        let g = diag_signed(3, &[1, 1, -1], 2, 2);
        // 1 + 4 - 9 = -4, checked term by term
        let by_hand: i64 = [(1i64, 1i64, 1i64), (1, 2, 1), (-1, 3, 1)]
            .iter()
            .map(|(c, x, y)| c * x * x * y * y)
            .sum();
        assert_eq!(by_hand, -4);
        assert_eq!(g.evaluate(&[1, 2, 3], &[1, 1, 1]).unwrap(), BigInt::from(-4));
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let f = bilinear(&[1, -1]);
        assert!(matches!(
            f.evaluate(&[1], &[1, 1]),
            Err(FormError::DimensionMismatch { block: 'x', .. })
        ));
    }

    #[test]
    fn evaluate_is_arbitrary_precision() {
        let f = diag_signed(1, &[1], 5, 5);
        let v = f.evaluate(&[i64::MAX], &[i64::MAX]).unwrap();
        assert_eq!(v, num_traits::pow(BigInt::from(i64::MAX), 10));
    }

    #[test]
    fn evaluate_real_examples() {
        let f = bilinear(&[1]);
        assert_eq!(f.evaluate_real(&[0.5], &[0.5]).unwrap(), 0.25);
        let g = diag_signed(2, &[1, -1], 2, 2);
        assert_eq!(g.evaluate_real(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        let h = f.scaled(2);
        for &(a, b) in &[(0.3, -0.7), (0.9, 0.11), (-1.0, 1.0)] {
            let lhs = h.evaluate_real(&[a], &[b]).unwrap();
            let rhs = 2.0 * f.evaluate_real(&[a], &[b]).unwrap();
            assert!((lhs - rhs).abs() <= 1e-15);
        }
    }

    #[test]
    fn derivatives() {
        let f = diag_signed(1, &[1], 2, 2);
        let df = f.partial_x(0).unwrap();
        assert_eq!(df.to_string(), "2*x1*y1^2");
        assert_eq!(df.bidegree(), (1, 2));
        let g = bilinear(&[1, -1]);
        let g3 = BihomogeneousForm::new(3, 3, 1, 1, {
            let mut v = g.monomials().to_vec();
            for m in &mut v {
                m.xexp.push(0);
                m.yexp.push(0);
            }
            v
        })
        .unwrap();
        assert!(g3.partial_x(2).unwrap().is_zero());
        assert_eq!(g3.partial_x(2).unwrap().bidegree(), (0, 1));
        assert!(matches!(
            g3.partial_x(3),
            Err(FormError::IndexOutOfRange { .. })
        ));
        let lin = bilinear(&[1]);
        assert!(lin.partial_x(0).unwrap().partial_x(0).unwrap().is_zero());
    }

    #[test]
    fn specialization() {
        let f = bilinear(&[1, -1]);
        assert_eq!(f.specialize_y(&[1, 1]).unwrap().to_string(), "x1 - x2");
        let g = diag_signed(1, &[1], 2, 2);
        assert!(g.specialize_y(&[0]).unwrap().is_zero());
        let h = diag_signed(2, &[1, 1], 2, 2);
        let s = h.specialize_y(&[2, 3]).unwrap();
        assert_eq!(s.to_string(), "4*x1^2 + 9*x2^2");
        for x in [[1i64, 0], [2, -3], [5, 7]] {
            assert_eq!(s.evaluate(&x).unwrap(), h.evaluate(&x, &[2, 3]).unwrap());
        }
    }

    #[test]
    fn canonical_merge_and_order() {
        let f = BihomogeneousForm::from_terms(
            2,
            1,
            1,
            1,
            &[(1, &[0, 1], &[1]), (2, &[1, 0], &[1]), (3, &[0, 1], &[1])],
        )
        .unwrap();
        assert_eq!(f.to_string(), "2*x1*y1 + 4*x2*y1");
        let g = BihomogeneousForm::from_terms(1, 1, 1, 1, &[(1, &[1], &[1]), (-1, &[1], &[1])])
            .unwrap();
        assert!(g.is_zero());
        assert_eq!(g.bidegree(), (1, 1));
        assert_eq!(g.to_string(), "0");
    }

    #[test]
    fn rejects_wrong_degree() {
        let err = BihomogeneousForm::from_terms(2, 2, 1, 1, &[(1, &[1, 0], &[1, 0]), (1, &[2, 0], &[0, 0])]);
        assert!(matches!(err, Err(FormError::DegreeMismatch { .. })));
    }

    #[test]
    fn jacobian_ranks() {
        let diag = FormSystem::single(BihomogeneousForm::diagonal(3, 2, 2));
        // x_i y_i = 0 for every i
        assert_eq!(diag.jacobian_rank_x_int(&[1, 0, 2], &[0, 5, 0]).unwrap(), 0);
        assert_eq!(diag.jacobian_rank_x_int(&[1, 0, 2], &[1, 5, 0]).unwrap(), 1);
        let lin = FormSystem::single(bilinear(&[1, 1, 1]));
        for x in [[0i64, 0, 0], [3, -1, 2]] {
            assert_eq!(lin.jacobian_rank_x_int(&x, &[1, 0, 0]).unwrap(), 1);
        }
        assert_eq!(diag.jacobian_rank_x_int(&[0, 0, 0], &[1, 2, 3]).unwrap(), 0);
    }

    #[test]
    fn system_shape_checks() {
        assert!(matches!(FormSystem::new(vec![]), Err(FormError::EmptySystem)));
        let a = bilinear(&[1, -1]);
        let b = diag_signed(2, &[1, -1], 2, 1);
        assert!(matches!(
            FormSystem::new(vec![a, b]),
            Err(FormError::ShapeMismatch { index: 1, .. })
        ));
    }
}
