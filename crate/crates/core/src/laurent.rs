//! Laurent polynomials with coefficients in `F_{p^a}`.
//!
//! A coefficient is stored as its base-`p` digit vector (coefficient of
//! `X^i` in the default modulus of `F_{p^a}`); a prime-field coefficient is a
//! single integer. Reduction mod `p` happens when the polynomial meets a field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{hull_facets, LatticeError, LatticePoint, Polytope};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("term {index} has {got} exponents, expected {expected}")]
    Arity { index: usize, got: usize, expected: usize },
    #[error("exponent {0:?} appears twice")]
    DuplicateExponent(Vec<i64>),
    #[error("polynomial has no terms")]
    Empty,
}

/// Coefficient digits, or a plain integer for prime fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Int(i64),
    Digits(Vec<i64>),
}

impl Coef {
    pub fn digits(&self) -> Vec<i64> {
        match self {
            Coef::Int(c) => vec![*c],
            Coef::Digits(d) => d.clone(),
        }
    }

    pub fn is_zero_mod(&self, p: u32) -> bool {
        self.digits().iter().all(|d| d.rem_euclid(p as i64) == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coef: Coef,
    pub exp: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LaurentPoly {
    n: usize,
    terms: Vec<Term>,
}

impl LaurentPoly {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<LaurentPoly, LaurentError> {
        if terms.is_empty() {
            return Err(LaurentError::Empty);
        }
        for (index, t) in terms.iter().enumerate() {
            if t.exp.len() != n {
                return Err(LaurentError::Arity {
                    index,
                    got: t.exp.len(),
                    expected: n,
                });
            }
            if terms[..index].iter().any(|s| s.exp == t.exp) {
                return Err(LaurentError::DuplicateExponent(t.exp.clone()));
            }
        }
        Ok(LaurentPoly { n, terms })
    }

    /// Sum of monomials with coefficient 1.
    pub fn monomials(n: usize, exps: &[Vec<i64>]) -> Result<LaurentPoly, LaurentError> {
        let terms = exps
            .iter()
            .map(|e| Term {
                coef: Coef::Int(1),
                exp: e.clone(),
            })
            .collect();
        LaurentPoly::new(n, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Drops terms whose coefficient vanishes in characteristic `p`.
    pub fn reduced(&self, p: u32) -> LaurentPoly {
        LaurentPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|t| !t.coef.is_zero_mod(p))
                .cloned()
                .collect(),
        }
    }

    pub fn support(&self) -> Vec<LatticePoint> {
        self.terms.iter().map(|t| LatticePoint::new(t.exp.clone())).collect()
    }

    pub fn newton_polytope(&self) -> Result<Polytope, LatticeError> {
        hull_facets(&self.support(), self.n)
    }

    /// True when every term involves at most one variable.
    pub fn is_separable(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.exp.iter().filter(|&&e| e != 0).count() <= 1)
    }

    /// For a separable polynomial, the univariate summands `g_i(x_i)`.
    /// Constant terms are attached to the first variable.
    pub fn univariate_parts(&self) -> Option<Vec<LaurentPoly>> {
        if !self.is_separable() {
            return None;
        }
        let mut parts: Vec<Vec<Term>> = vec![Vec::new(); self.n];
        for t in &self.terms {
            let var = t.exp.iter().position(|&e| e != 0).unwrap_or(0);
            parts[var].push(Term {
                coef: t.coef.clone(),
                exp: vec![t.exp[var]],
            });
        }
        parts
            .into_iter()
            .map(|terms| LaurentPoly::new(1, terms).ok())
            .collect()
    }

    /// Keeps only the terms whose exponents satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(&[i64]) -> bool) -> LaurentPoly {
        LaurentPoly {
            n: self.n,
            terms: self.terms.iter().filter(|t| keep(&t.exp)).cloned().collect(),
        }
    }
}
