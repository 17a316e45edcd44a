//! L-functions of exponential sums and their Newton polygons.
//!
//! For each `k` the torus sum `S_k = sum zeta_p^{Tr f(x)}` over `F_{q^k}` is
//! assembled from exact trace counts. The L-function side
//! `L(T)^{(-1)^{n-1}} = exp(eps * sum S_k T^k / k)` follows from Newton's
//! identities in `Z[zeta_p]`, and `ord_q` of each coefficient comes from its
//! valuation at `pi = 1 - zeta_p`.

pub mod counts;
pub mod cyclotomic;
pub mod hull;

use num_bigint::BigInt;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use counts::{trace_counts, TraceProfile};
pub use cyclotomic::CyclotomicInt;
pub use hull::{compare_polygons, lower_hull, HullError, Verdict};

use crate::gf::{FieldCtx, FieldOptions, GfError, DEFAULT_FIELD_BUDGET, DEFAULT_TABLE_BUDGET};
use crate::lattice::{normalized_volume, LatticeError};
use crate::laurent::LaurentPoly;
use crate::polygon::{rational_pair, RationalPolygon};
use crate::Rational;

pub const DEFAULT_EVAL_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZetaError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error("{evaluations} evaluations needed, budget is {budget}")]
    BudgetExceeded { evaluations: u128, budget: u64 },
    #[error("coefficient {index} is not divisible by {index}")]
    InexactDivision { index: usize },
    #[error("coefficient {index} beyond degree {degree} is nonzero")]
    PolynomialityViolation { index: usize, degree: u64 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("{0}")]
    Unsupported(String),
}

/// Resource limits and knobs for the engine. None of them change results.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    /// Maximum torus evaluations per exponential sum.
    pub eval_budget: u64,
    /// Maximum field order.
    pub field_budget: u64,
    /// Maximum field order that gets log tables.
    pub table_budget: u64,
    /// Which irreducible to use for every field, taken modulo the number of
    /// irreducibles of the required degree.
    pub modulus_index: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            threads: 0,
            eval_budget: DEFAULT_EVAL_BUDGET,
            field_budget: DEFAULT_FIELD_BUDGET,
            table_budget: DEFAULT_TABLE_BUDGET,
            modulus_index: 0,
        }
    }
}

impl EngineConfig {
    pub fn field(&self, p: u32, d: u32) -> Result<FieldCtx, GfError> {
        let opts = |modulus_index| FieldOptions {
            budget: self.field_budget,
            table_budget: self.table_budget,
            modulus_index,
        };
        match FieldCtx::new(p as u64, d, opts(self.modulus_index)) {
            Err(GfError::NoSuchModulus { found, .. }) if found > 0 => {
                FieldCtx::new(p as u64, d, opts(self.modulus_index % found))
            }
            r => r,
        }
    }

    pub(crate) fn install<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R, ZetaError> {
        if self.threads == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| ZetaError::ThreadPool(e.to_string()))?;
        Ok(pool.install(job))
    }
}

/// `sum_t counts[t] zeta^t`.
pub fn exp_sum(profile: &TraceProfile) -> CyclotomicInt {
    CyclotomicInt::from_counts(profile.p, &profile.counts)
}

/// Coefficients `C_0..C_M` of `exp(eps * sum_{k<=M} S_k T^k / k)` with
/// `eps = (-1)^{n-1}`; `sums[k-1] = S_k`.
pub fn l_poly_coeffs(sums: &[CyclotomicInt], n: usize) -> Result<Vec<CyclotomicInt>, ZetaError> {
    let p = sums.first().map_or(2, CyclotomicInt::p);
    let eps_neg = n.is_multiple_of(2);
    let mut c = vec![CyclotomicInt::one(p)];
    for i in 1..=sums.len() {
        let mut acc = CyclotomicInt::zero(p);
        for j in 1..=i {
            acc = &acc + &(&sums[j - 1] * &c[i - j]);
        }
        if eps_neg {
            acc = -&acc;
        }
        let ci = acc
            .div_exact(&BigInt::from(i))
            .ok_or(ZetaError::InexactDivision { index: i })?;
        c.push(ci);
    }
    Ok(c)
}

/// Continues power sums of a one-variable L-polynomial of degree `deg`
/// (`coeffs[0..=deg]`) up to `k_max`.
fn extend_sums(mut sums: Vec<CyclotomicInt>, coeffs: &[CyclotomicInt], deg: usize, k_max: usize) -> Vec<CyclotomicInt> {
    let p = coeffs[0].p();
    let coeff = |i: usize| if i <= deg { coeffs[i].clone() } else { CyclotomicInt::zero(p) };
    while sums.len() < k_max {
        let k = sums.len() + 1;
        let mut s = coeff(k).scale(&BigInt::from(k));
        for j in 1..k {
            s = &s - &(&sums[j - 1] * &coeff(k - j));
        }
        sums.push(s);
    }
    sums
}

/// `ord_q` of a coefficient, `None` when it vanishes.
pub fn ord_q(c: &CyclotomicInt, a: u32) -> Option<Rational> {
    c.pi_valuation()
        .map(|v| Rational::new(v as i64, (c.p() as i64 - 1) * a as i64))
}

/// How the exponential sums were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Brute force over the full torus.
    Torus,
    /// Product of one-variable sums, continued past brute-force range
    /// through each factor's L-polynomial.
    Separable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygonResult {
    pub p: u32,
    pub a: u32,
    /// `n! Vol`, the degree of the L-polynomial.
    pub degree: u64,
    pub method: Method,
    /// `S_1 .. S_{N+2}`.
    pub exp_sums: Vec<CyclotomicInt>,
    /// `C_0 .. C_{N+2}`.
    pub coefficients: Vec<CyclotomicInt>,
    /// `(i, ord_q C_i)` for `i <= N`.
    pub valuations: Vec<(u64, Option<Rational>)>,
    pub polygon: RationalPolygon,
}

impl Serialize for NewtonPolygonResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strings = |v: &[CyclotomicInt]| v.iter().map(CyclotomicInt::to_strings).collect::<Vec<_>>();
        let vals: Vec<(u64, Option<[i64; 2]>)> = self
            .valuations
            .iter()
            .map(|(i, v)| (*i, v.as_ref().map(rational_pair)))
            .collect();
        let mut st = s.serialize_struct("NewtonPolygonResult", 8)?;
        st.serialize_field("a", &self.a)?;
        st.serialize_field("coefficients", &strings(&self.coefficients))?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("exp_sums", &strings(&self.exp_sums))?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("polygon", &self.polygon)?;
        st.serialize_field("valuations", &vals)?;
        st.end()
    }
}

/// Newton polygon of `L(f, T)^{(-1)^{n-1}}` over `F_q`, `q = p^a`.
pub fn newton_polygon(f: &LaurentPoly, p: u32, a: u32, cfg: &EngineConfig) -> Result<NewtonPolygonResult, ZetaError> {
    cfg.install(|| newton_polygon_inner(f, p, a, cfg))?
}

fn newton_polygon_inner(f: &LaurentPoly, p: u32, a: u32, cfg: &EngineConfig) -> Result<NewtonPolygonResult, ZetaError> {
    if !crate::gf::is_prime(p as u64) {
        return Err(GfError::NotPrime(p as u64).into());
    }
    let f = f.reduced(p);
    let delta = f.newton_polytope()?;
    let degree = normalized_volume(&delta)?;
    let k_max = degree as usize + 2;
    let (method, sums) = match f.univariate_parts() {
        Some(parts) if f.n() > 1 || parts[0].terms().len() == 1 => {
            (Method::Separable, separable_sums(&parts, p, a, k_max, cfg)?)
        }
        _ => (Method::Torus, torus_sums(&f, p, a, k_max, cfg)?),
    };
    let coefficients = l_poly_coeffs(&sums, f.n())?;
    check_tail(&coefficients, degree as usize)?;
    let valuations: Vec<(u64, Option<Rational>)> = coefficients[..=degree as usize]
        .iter()
        .enumerate()
        .map(|(i, c)| (i as u64, ord_q(c, a)))
        .collect();
    let polygon = lower_hull(&valuations)?;
    Ok(NewtonPolygonResult {
        p,
        a,
        degree,
        method,
        exp_sums: sums,
        coefficients,
        valuations,
        polygon,
    })
}

fn check_tail(coefficients: &[CyclotomicInt], degree: usize) -> Result<(), ZetaError> {
    for (index, c) in coefficients.iter().enumerate().skip(degree + 1) {
        if !c.is_zero() {
            return Err(ZetaError::PolynomialityViolation {
                index,
                degree: degree as u64,
            });
        }
    }
    Ok(())
}

fn torus_sums(f: &LaurentPoly, p: u32, a: u32, k_max: usize, cfg: &EngineConfig) -> Result<Vec<CyclotomicInt>, ZetaError> {
    (1..=k_max as u32)
        .map(|k| {
            let ctx = cfg.field(p, a * k)?;
            Ok(exp_sum(&trace_counts(f, a, &ctx, cfg)?))
        })
        .collect()
}

/// Sums for `f = g_1(x_1) + ... + g_n(x_n)`: `S_k(f) = prod S_k(g_i)`.
/// Each factor is brute-forced up to its own degree plus two, checked for
/// polynomiality, and continued with Newton's identities.
fn separable_sums(
    parts: &[LaurentPoly],
    p: u32,
    a: u32,
    k_max: usize,
    cfg: &EngineConfig,
) -> Result<Vec<CyclotomicInt>, ZetaError> {
    let mut total = vec![CyclotomicInt::one(p); k_max];
    for g in parts {
        let exps = g.terms().iter().map(|t| t.exp[0]);
        let deg = (exps.clone().max().unwrap_or(0).max(0) - exps.min().unwrap_or(0).min(0)) as usize;
        let direct = (deg + 2).min(k_max);
        let sums = torus_sums(g, p, a, direct, cfg)?;
        let coeffs = l_poly_coeffs(&sums, 1)?;
        check_tail(&coeffs, deg)?;
        let sums = extend_sums(sums, &coeffs, deg.min(direct), k_max);
        for (t, s) in total.iter_mut().zip(&sums) {
            *t = &*t * s;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::Segment;

    fn poly(n: usize, exps: &[Vec<i64>]) -> LaurentPoly {
        LaurentPoly::monomials(n, exps).unwrap()
    }

    fn slopes(res: &NewtonPolygonResult) -> Vec<Rational> {
        res.polygon.slope_list()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn l_poly_of_linear_monomial() {
        let sums = vec![CyclotomicInt::from_int(2, -1); 3];
        let c = l_poly_coeffs(&sums, 1).unwrap();
        assert_eq!(c[1], CyclotomicInt::from_int(2, -1));
        assert!(c[2].is_zero() && c[3].is_zero());
        let zeros = vec![CyclotomicInt::zero(5); 4];
        assert!(l_poly_coeffs(&zeros, 2).unwrap()[1..].iter().all(CyclotomicInt::is_zero));
        let bad = vec![CyclotomicInt::zero(3), CyclotomicInt::one(3)];
        assert_eq!(l_poly_coeffs(&bad, 1), Err(ZetaError::InexactDivision { index: 2 }));
    }

    #[test]
    fn extension_matches_brute_force() {
        let g = poly(1, &[vec![3]]);
        let cfg = EngineConfig::default();
        let brute = torus_sums(&g, 7, 1, 7, &cfg).unwrap();
        let coeffs = l_poly_coeffs(&brute[..5], 1).unwrap();
        assert_eq!(extend_sums(brute[..5].to_vec(), &coeffs, 3, 7), brute);
    }

    #[test]
    fn monomial_cubes() {
        let cfg = EngineConfig::default();
        let x3 = poly(1, &[vec![3]]);
        assert_eq!(slopes(&newton_polygon(&x3, 5, 1, &cfg).unwrap()), vec![r(0, 1), r(1, 2), r(1, 2)]);
        assert_eq!(slopes(&newton_polygon(&x3, 7, 1, &cfg).unwrap()), vec![r(0, 1), r(1, 3), r(2, 3)]);
    }

    #[test]
    fn small_families() {
        let cfg = EngineConfig::default();
        let g1 = poly(2, &[vec![1, 0], vec![0, 1], vec![-1, 0]]);
        let res = newton_polygon(&g1, 3, 1, &cfg).unwrap();
        assert_eq!(res.method, Method::Separable);
        assert_eq!(slopes(&res), vec![r(0, 1), r(1, 1)]);
        let k = poly(2, &[vec![1, 0], vec![0, 1], vec![-1, -1]]);
        let res = newton_polygon(&k, 3, 1, &cfg).unwrap();
        assert_eq!(res.degree, 3);
        assert_eq!(res.method, Method::Torus);
        assert_eq!(slopes(&res), vec![r(0, 1), r(1, 1), r(2, 1)]);
        let x = poly(1, &[vec![1]]);
        let res = newton_polygon(&x, 3, 1, &cfg).unwrap();
        assert_eq!(res.polygon.segments(), &[Segment { slope: r(0, 1), length: 1 }]);
    }

    #[test]
    fn torus_and_separable_paths_agree() {
        let cfg = EngineConfig::default();
        let f = poly(2, &[vec![2, 0], vec![0, 1], vec![-1, 0]]);
        let parts = f.univariate_parts().unwrap();
        let k_max = 6;
        assert_eq!(separable_sums(&parts, 3, 1, k_max, &cfg).unwrap(), torus_sums(&f, 3, 1, k_max, &cfg).unwrap());
    }

    #[test]
    fn coefficients_over_extension_field() {
        let cfg = EngineConfig::default();
        let k = poly(2, &[vec![1, 0], vec![0, 1], vec![-1, -1]]);
        let res = newton_polygon(&k, 2, 2, &cfg).unwrap();
        assert_eq!(slopes(&res), vec![r(0, 1), r(1, 1), r(2, 1)]);
    }

    #[test]
    fn modulus_index_wraps() {
        let cfg = EngineConfig {
            modulus_index: 1,
            ..EngineConfig::default()
        };
        assert_eq!(cfg.field(2, 2).unwrap().modulus(), EngineConfig::default().field(2, 2).unwrap().modulus());
        assert_ne!(cfg.field(2, 3).unwrap().modulus(), EngineConfig::default().field(2, 3).unwrap().modulus());
    }
}
