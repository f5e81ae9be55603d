//! Shared generators for the property tests.
#![allow(dead_code)]

use biproj::{BihomogeneousForm, Monomial};
use proptest::prelude::*;

/// Exponent vectors of length `n` summing to `d`.
pub fn exponents(n: usize, d: u32) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0..n, d as usize).prop_map(move |slots| {
        let mut e = vec![0u32; n];
        for s in slots {
            e[s] += 1;
        }
        e
    })
}

pub fn form(n1: usize, n2: usize, d1: u32, d2: u32, max_terms: usize) -> impl Strategy<Value = BihomogeneousForm> {
    proptest::collection::vec((-9i64..=9, exponents(n1, d1), exponents(n2, d2)), 1..=max_terms)
        .prop_map(move |terms| {
            BihomogeneousForm::new(n1, n2, d1, d2, terms.into_iter().map(|(c, xe, ye)| Monomial::new(c, xe, ye))).unwrap()
        })
        .prop_filter("nonzero form", |f| !f.is_zero())
}

pub fn shaped_form(max_terms: usize) -> impl Strategy<Value = BihomogeneousForm> {
    (1usize..=3, 1usize..=3, 1u32..=2, 1u32..=2).prop_flat_map(move |(n1, n2, d1, d2)| form(n1, n2, d1, d2, max_terms))
}
