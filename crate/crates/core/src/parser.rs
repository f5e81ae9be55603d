//! Text format for forms and JSON job configurations.
//!
//! ```text
//! form   := ["-"] term (("+"|"-") term)*
//! term   := (integer "*")? factor ("*" factor)*
//! factor := ("x"|"y") index ("^" positive-integer)?
//! ```
//! Indices are 1-based. Whitespace is allowed between any two tokens.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::forms::{BihomogeneousForm, FormSystem, Monomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParseErrorKind {
    Syntax,
    UnknownVariable,
    IndexOutOfRange,
    NonBihomogeneous,
    EmptyForm,
    BidegreeMismatch,
    EmptySystem,
    Config,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the offending text.
    pub position: usize,
    pub message: String,
    /// Index of the form within a system, when parsing several.
    pub form_index: Option<usize>,
    /// `(d1, d2)` seen so far and the conflicting `(d1, d2)`, for degree errors.
    pub bidegrees: Option<((u32, u32), (u32, u32))>,
}

impl ParseError {
    fn new(kind: ParseErrorKind, position: usize, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            position,
            message: message.into(),
            form_index: None,
            bidegrees: None,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at byte {}", self.kind, self.position)?;
        if let Some(i) = self.form_index {
            write!(f, " of form {}", i + 1)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(char),
    Caret,
    Star,
    Plus,
    Minus,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: BigInt = text[start..i].parse().expect("digits");
                out.push((Tok::Int(v), start));
            }
            b'x' | b'y' => {
                out.push((Tok::Var(c as char), i));
                i += 1;
            }
            b'^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            c if c.is_ascii_alphabetic() => {
                return Err(ParseError::new(
                    ParseErrorKind::UnknownVariable,
                    i,
                    format!("unknown variable '{}', expected x or y", c as char),
                ))
            }
            _ => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    i,
                    "unexpected character",
                ))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    n1: usize,
    n2: usize,
}

struct RawTerm {
    coeff: BigInt,
    xexp: Vec<u32>,
    yexp: Vec<u32>,
    offset: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::new(ParseErrorKind::Syntax, self.offset(), msg)
    }

    fn small_int(&mut self, what: &str) -> Result<(u64, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some((Tok::Int(v), o)) => {
                let o = *o;
                self.pos += 1;
                let v: u64 = v
                    .try_into()
                    .map_err(|_| ParseError::new(ParseErrorKind::Syntax, o, format!("{what} too large")))?;
                Ok((v, o))
            }
            _ => Err(self.syntax(&format!("expected {what}"))),
        }
    }

    fn factor(&mut self, term: &mut RawTerm) -> Result<(), ParseError> {
        let var = match self.peek() {
            Some(Tok::Var(c)) => *c,
            _ => return Err(self.syntax("expected variable x or y")),
        };
        self.pos += 1;
        let (index, at) = self.small_int("variable index")?;
        let n = if var == 'x' { self.n1 } else { self.n2 };
        if index == 0 || index as usize > n {
            return Err(ParseError::new(
                ParseErrorKind::IndexOutOfRange,
                at,
                format!("{var}{index} is outside {var}1..{var}{n}"),
            ));
        }
        let mut exp = 1u32;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let (e, at) = self.small_int("exponent")?;
            if e == 0 {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    at,
                    "exponent must be positive",
                ));
            }
            exp = u32::try_from(e)
                .map_err(|_| ParseError::new(ParseErrorKind::Syntax, at, "exponent too large"))?;
        }
        let slot = if var == 'x' {
            &mut term.xexp[index as usize - 1]
        } else {
            &mut term.yexp[index as usize - 1]
        };
        *slot = slot
            .checked_add(exp)
            .ok_or_else(|| ParseError::new(ParseErrorKind::Syntax, at, "exponent too large"))?;
        Ok(())
    }

    fn term(&mut self, negative: bool) -> Result<RawTerm, ParseError> {
        let mut t = RawTerm {
            coeff: BigInt::from(1),
            xexp: vec![0; self.n1],
            yexp: vec![0; self.n2],
            offset: self.offset(),
        };
        if let Some(Tok::Int(v)) = self.peek() {
            t.coeff = v.clone();
            self.pos += 1;
            if self.peek() != Some(&Tok::Star) {
                return Err(self.syntax("expected '*' after coefficient"));
            }
            self.pos += 1;
        }
        if negative {
            t.coeff = -t.coeff;
        }
        self.factor(&mut t)?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            self.factor(&mut t)?;
        }
        Ok(t)
    }
}

/// Parses one form; the bidegree is inferred from the terms.
pub fn parse_form(text: &str, n1: usize, n2: usize) -> Result<BihomogeneousForm, ParseError> {
    let clamp = |e: ParseError| clamp_position(e, text.len());
    if n1 == 0 || n2 == 0 {
        return Err(ParseError::new(
            ParseErrorKind::Config,
            0,
            "n1 and n2 must be positive",
        ));
    }
    let toks = tokenize(text).map_err(clamp)?;
    if toks.is_empty() {
        return Err(clamp(ParseError::new(
            ParseErrorKind::EmptyForm,
            0,
            "empty form",
        )));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        n1,
        n2,
    };
    let mut negative = false;
    if p.peek() == Some(&Tok::Minus) {
        negative = true;
        p.pos += 1;
    }
    let mut terms = vec![p.term(negative).map_err(clamp)?];
    loop {
        match p.peek() {
            None => break,
            Some(Tok::Plus) => negative = false,
            Some(Tok::Minus) => negative = true,
            Some(_) => return Err(clamp(p.syntax("expected '+' or '-'"))),
        }
        p.pos += 1;
        terms.push(p.term(negative).map_err(clamp)?);
    }
    let d1: u32 = terms[0].xexp.iter().sum();
    let d2: u32 = terms[0].yexp.iter().sum();
    for t in &terms[1..] {
        let (e1, e2) = (t.xexp.iter().sum::<u32>(), t.yexp.iter().sum::<u32>());
        if (e1, e2) != (d1, d2) {
            let which = if e1 != d1 { "x" } else { "y" };
            let mut err = ParseError::new(
                ParseErrorKind::NonBihomogeneous,
                t.offset,
                format!(
                    "term has bidegree ({e1},{e2}) but the form has ({d1},{d2}); {which}-degrees differ"
                ),
            );
            err.bidegrees = Some(((d1, d2), (e1, e2)));
            return Err(clamp(err));
        }
    }
    let monomials = terms
        .into_iter()
        .filter(|t| !t.coeff.is_zero())
        .map(|t| Monomial::new(t.coeff, t.xexp, t.yexp));
    Ok(BihomogeneousForm::new(n1, n2, d1, d2, monomials).expect("degrees checked"))
}

fn clamp_position(mut e: ParseError, len: usize) -> ParseError {
    if len == 0 {
        e.position = 0;
    } else if e.position >= len {
        e.position = len - 1;
    }
    e
}

/// Parses several forms into one system sharing `(n1, n2, d1, d2)`.
pub fn parse_system<S: AsRef<str>>(
    texts: &[S],
    n1: usize,
    n2: usize,
) -> Result<FormSystem, ParseError> {
    if texts.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::EmptySystem,
            0,
            "a system needs at least one form",
        ));
    }
    let mut forms: Vec<BihomogeneousForm> = Vec::with_capacity(texts.len());
    for (i, t) in texts.iter().enumerate() {
        let f = parse_form(t.as_ref(), n1, n2).map_err(|mut e| {
            e.form_index = Some(i);
            e
        })?;
        if let Some(first) = forms.first() {
            if first.bidegree() != f.bidegree() {
                let mut e = ParseError::new(
                    ParseErrorKind::BidegreeMismatch,
                    0,
                    format!(
                        "form has bidegree {:?} but form 1 has {:?}",
                        f.bidegree(),
                        first.bidegree()
                    ),
                );
                e.form_index = Some(i);
                e.bidegrees = Some((first.bidegree(), f.bidegree()));
                return Err(e);
            }
        }
        forms.push(f);
    }
    Ok(FormSystem::new(forms).expect("shapes checked"))
}

/// A job as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub n1: usize,
    pub n2: usize,
    pub forms: Vec<String>,
    pub task: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    /// Optional declared bidegree, checked against the inferred one.
    #[serde(default)]
    pub bidegree: Option<(u32, u32)>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| {
            // serde_json reports line/column; convert to a byte offset
            let mut offset = 0usize;
            for (i, line) in text.split_inclusive('\n').enumerate() {
                if i + 1 == e.line() {
                    offset += e.column().saturating_sub(1).min(line.len());
                    break;
                }
                offset += line.len();
            }
            clamp_position(
                ParseError::new(ParseErrorKind::Config, offset, e.to_string()),
                text.len(),
            )
        })
    }

    /// Parses the forms and checks any declared bidegree.
    pub fn system(&self) -> Result<FormSystem, ParseError> {
        let sys = parse_system(&self.forms, self.n1, self.n2)?;
        if let Some(decl) = self.bidegree {
            let inferred = (sys.d1(), sys.d2());
            if decl != inferred {
                let mut e = ParseError::new(
                    ParseErrorKind::BidegreeMismatch,
                    0,
                    format!("declared bidegree {decl:?} but forms have {inferred:?}"),
                );
                e.bidegrees = Some((decl, inferred));
                return Err(e);
            }
        }
        Ok(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let f = parse_form("x1*y1 + x2*y2 - x3*y3", 3, 3).unwrap();
        assert_eq!(f.bidegree(), (1, 1));
        assert_eq!(f.monomials().len(), 3);
        let g = parse_form("x1^2*y1^2 - 2*x2^2*y2^2", 2, 2).unwrap();
        let coeffs: Vec<i64> = g
            .monomials()
            .iter()
            .map(|m| i64::try_from(&m.coeff).unwrap())
            .collect();
        assert_eq!(coeffs, vec![1, -2]);
        assert_eq!(g.bidegree(), (2, 2));
        let e = parse_form("x1*y1 + x2^2", 2, 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonBihomogeneous);
        assert_eq!(e.position, 8);
        assert_eq!(e.bidegrees, Some(((1, 1), (2, 0))));
    }

    #[test]
    fn error_kinds() {
        let cases = [
            ("x5*y1", ParseErrorKind::IndexOutOfRange),
            ("x0*y1", ParseErrorKind::IndexOutOfRange),
            ("z1*y1", ParseErrorKind::UnknownVariable),
            ("", ParseErrorKind::EmptyForm),
            ("   ", ParseErrorKind::EmptyForm),
            ("x1^0*y1", ParseErrorKind::Syntax),
            ("x1*y1 +", ParseErrorKind::Syntax),
            ("3 x1*y1", ParseErrorKind::Syntax),
            ("x1 y1", ParseErrorKind::Syntax),
            ("5", ParseErrorKind::Syntax),
            ("x1*y1 + -x2*y2", ParseErrorKind::Syntax),
            ("x1*y1 ! x2", ParseErrorKind::Syntax),
        ];
        for (text, kind) in cases {
            let e = parse_form(text, 3, 3).unwrap_err();
            assert_eq!(e.kind, kind, "{text:?}");
            assert!(text.is_empty() || e.position < text.len());
        }
    }

    #[test]
    fn whitespace_and_implicit_coefficients() {
        let a = parse_form(" - x 1 ^ 2 * y 2+3*x2*x1*y1 ", 2, 2).unwrap();
        let b = parse_form("3*x1*x2*y1 - x1^2*y2", 2, 2).unwrap();
        assert_eq!(a, b);
        let big = parse_form("123456789012345678901234567890*x1*y1", 1, 1).unwrap();
        assert_eq!(big.monomials()[0].coeff.to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn systems() {
        assert_eq!(parse_system(&["x1*y1 - x2*y2"], 2, 2).unwrap().r(), 1);
        let e = parse_system(&["x1*y1", "x1^2*y1"], 2, 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BidegreeMismatch);
        assert_eq!(e.form_index, Some(1));
        let none: [&str; 0] = [];
        assert_eq!(parse_system(&none, 2, 2).unwrap_err().kind, ParseErrorKind::EmptySystem);
        let e = parse_system(&["x1*y1", "x9*y1"], 2, 2).unwrap_err();
        assert_eq!((e.kind, e.form_index), (ParseErrorKind::IndexOutOfRange, Some(1)));
    }

    #[test]
    fn job_config() {
        let j = JobConfig::from_json(
            r#"{"n1":2,"n2":2,"forms":["x1*y1 - x2*y2"],"task":"count","params":{"p1":1}}"#,
        )
        .unwrap();
        assert_eq!(j.system().unwrap().r(), 1);
        let e = JobConfig::from_json(r#"{"n1":2,"n2":2,"forms":[],"task":"count","extra":1}"#)
            .unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Config);
        assert!(e.message.contains("extra"));
        let j = JobConfig::from_json(
            r#"{"n1":2,"n2":2,"forms":["x1*y1 - x2*y2"],"task":"count","bidegree":[2,1]}"#,
        )
        .unwrap();
        assert_eq!(j.system().unwrap_err().kind, ParseErrorKind::BidegreeMismatch);
    }
}
