//! Diagonal polynomials `sum a_j x^{V_j}` with `n` exponent vectors.
//!
//! The group `S = { r in [0,1)^n : M r in Z^n }` for `M = (V_1 .. V_n)` is
//! enumerated through Smith normal form coordinates. Multiplication by `p`
//! permutes `S`; the Newton polygon slopes are the average coordinate sums
//! along its orbits.

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::polygon::{RationalPolygon, Segment};
use crate::Rational;

pub const DEFAULT_GROUP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagonalError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square")]
    NotSquare,
    #[error("group of order {size} exceeds budget {budget}")]
    BudgetExceeded { size: u64, budget: u64 },
    #[error("p = {0} divides the determinant")]
    DegeneratePrime(u64),
}

pub type Matrix = Vec<Vec<i64>>;

/// `U M V = S` with `S` diagonal, `s_1 | s_2 | ...`, and `U`, `V` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub u: Matrix,
    pub s: Matrix,
    pub v: Matrix,
}

impl Snf {
    pub fn invariant_factors(&self) -> Vec<i64> {
        (0..self.s.len()).map(|i| self.s[i][i]).collect()
    }
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

fn check_square(m: &Matrix) -> Result<usize, DiagonalError> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(DiagonalError::NotSquare);
    }
    Ok(n)
}

pub fn smith_normal_form(m: &Matrix) -> Result<Snf, DiagonalError> {
    let n = check_square(m)?;
    let mut s = m.clone();
    let mut u = identity(n);
    let mut v = identity(n);
    for t in 0..n {
        loop {
            // smallest nonzero entry of the remaining block becomes the pivot
            let pivot = (t..n)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| s[i][j] != 0)
                .min_by_key(|&(i, j)| s[i][j].abs());
            let Some((pi, pj)) = pivot else {
                return Err(DiagonalError::SingularMatrix);
            };
            s.swap(t, pi);
            u.swap(t, pi);
            for row in s.iter_mut().chain(v.iter_mut()) {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let q = Integer::div_floor(&s[i][t], &s[t][t]);
                if q != 0 {
                    for j in 0..n {
                        s[i][j] -= q * s[t][j];
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= s[i][t] == 0;
            }
            for j in t + 1..n {
                let q = Integer::div_floor(&s[t][j], &s[t][t]);
                if q != 0 {
                    for i in 0..n {
                        s[i][j] -= q * s[i][t];
                        v[i][j] -= q * v[i][t];
                    }
                }
                clean &= s[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // enforce divisibility by folding an offending row into row t
            let bad = (t + 1..n)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| s[i][j] % s[t][t] != 0);
            match bad {
                Some((i, _)) => {
                    for j in 0..n {
                        s[t][j] += s[i][j];
                        u[t][j] += u[i][j];
                    }
                }
                None => break,
            }
        }
        if s[t][t] < 0 {
            for j in 0..n {
                s[t][j] = -s[t][j];
                u[t][j] = -u[t][j];
            }
        }
    }
    Ok(Snf { u, s, v })
}

/// The largest invariant factor `D*`.
pub fn largest_invariant_factor(m: &Matrix) -> Result<i64, DiagonalError> {
    let snf = smith_normal_form(m)?;
    Ok(*snf.invariant_factors().last().expect("nonempty"))
}

fn frac(r: Rational) -> Rational {
    r - r.floor()
}

/// All `r in [0,1)^n` with `M r` integral, in lexicographic order.
pub fn sdelta_group(m: &Matrix) -> Result<Vec<Vec<Rational>>, DiagonalError> {
    sdelta_group_with_budget(m, DEFAULT_GROUP_BUDGET)
}

pub fn sdelta_group_with_budget(m: &Matrix, budget: u64) -> Result<Vec<Vec<Rational>>, DiagonalError> {
    let snf = smith_normal_form(m)?;
    let factors = snf.invariant_factors();
    let n = factors.len();
    let size: u64 = factors.iter().map(|&f| f as u64).product();
    if size > budget {
        return Err(DiagonalError::BudgetExceeded { size, budget });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut t = vec![0i64; n];
    loop {
        let r: Vec<Rational> = (0..n)
            .map(|i| {
                let sum: Rational = (0..n)
                    .map(|j| Rational::new(snf.v[i][j] * t[j], factors[j]))
                    .sum();
                frac(sum)
            })
            .collect();
        out.push(r);
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                return Ok(out);
            }
            t[i] += 1;
            if t[i] < factors[i] {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

pub fn determinant(m: &Matrix) -> Result<i64, DiagonalError> {
    check_square(m)?;
    let a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    Ok(crate::lattice::det_i128(a) as i64)
}

/// Slope multiset of the Newton polygon, from `[p]`-orbits on `S`.
pub fn orbit_slopes(m: &Matrix, p: u64) -> Result<Vec<Segment>, DiagonalError> {
    let det = determinant(m)?;
    if det == 0 {
        return Err(DiagonalError::SingularMatrix);
    }
    if det.unsigned_abs() % p == 0 {
        return Err(DiagonalError::DegeneratePrime(p));
    }
    let group = sdelta_group(m)?;
    let pr = Rational::from_integer(p as i64);
    let mut seen = std::collections::BTreeSet::new();
    let mut slopes: Vec<Rational> = Vec::with_capacity(group.len());
    for r in &group {
        if seen.contains(r) {
            continue;
        }
        let mut orbit = vec![r.clone()];
        loop {
            let next: Vec<Rational> = orbit.last().unwrap().iter().map(|&x| frac(x * pr)).collect();
            if &next == r {
                break;
            }
            orbit.push(next);
        }
        let total: Rational = orbit.iter().flat_map(|x| x.iter().copied()).sum();
        let slope = total / Rational::from_integer(orbit.len() as i64);
        for x in orbit {
            seen.insert(x);
            slopes.push(slope);
        }
    }
    slopes.sort();
    Ok(RationalPolygon::from_segments(slopes.into_iter().map(|slope| Segment { slope, length: 1 }))
        .segments()
        .to_vec())
}

/// Output of the `diag` command.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalSummary {
    pub invariant_factors: Vec<i64>,
    pub dstar: i64,
    pub slopes: Vec<Segment>,
}

pub fn summarize(m: &Matrix, p: u64) -> Result<DiagonalSummary, DiagonalError> {
    let snf = smith_normal_form(m)?;
    let invariant_factors = snf.invariant_factors();
    Ok(DiagonalSummary {
        dstar: *invariant_factors.last().expect("nonempty"),
        invariant_factors,
        slopes: orbit_slopes(m, p)?,
    })
}
