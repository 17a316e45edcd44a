//! The diagonal polynomial `f = x_1^{m_1} + ... + x_n^{m_n}` and its
//! reflection (`G^j`) and Kloosterman (`K^j`) variants.
//!
//! * `G^j = f + x_1^{-m_1} + ... + x_j^{-m_j}`
//! * `K^j = f + (x_1 ... x_j)^{-1}`
//!
//! For these families `D* = lcm(m)`: `f` is non-degenerate iff `p` does not
//! divide `D*`, and ordinary iff `p = 1 mod D*`.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Embedding, FieldElement, GfError};
use crate::hodge::{self, HodgeError, HodgeVector, WeightVector};
use crate::lattice::{LatticeError, LatticePoint};
use crate::laurent::{Coef, LaurentError, LaurentPoly, Term};
use crate::polygon::RationalPolygon;
use crate::zeta::EngineConfig;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("invalid family: {0}")]
    InvalidSpec(String),
    #[error("p = {0} divides D*, the polynomial is degenerate")]
    DegeneratePrime(u64),
    #[error("search needs {evaluations} evaluations, budget is {budget}")]
    BudgetExceeded { evaluations: u128, budget: u64 },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "D", alias = "Diagonal")]
    Diagonal,
    #[serde(rename = "G", alias = "Reflection")]
    Reflection,
    #[serde(rename = "K", alias = "Kloosterman")]
    Kloosterman,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: Kind,
    pub n: usize,
    pub m: Vec<i64>,
    #[serde(default)]
    pub j: usize,
    /// Coefficients in support order; all 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Coef>>,
}

impl FamilySpec {
    pub fn new(kind: Kind, m: Vec<i64>, j: usize) -> FamilySpec {
        FamilySpec {
            kind,
            n: m.len(),
            m,
            j,
            coeffs: None,
        }
    }

    pub fn diagonal(m: Vec<i64>) -> FamilySpec {
        FamilySpec::new(Kind::Diagonal, m, 0)
    }

    pub fn reflection(m: Vec<i64>, j: usize) -> FamilySpec {
        FamilySpec::new(Kind::Reflection, m, j)
    }

    pub fn kloosterman(m: Vec<i64>, j: usize) -> FamilySpec {
        FamilySpec::new(Kind::Kloosterman, m, j)
    }

    /// `G^0` is the diagonal polynomial itself.
    pub fn normalized(&self) -> FamilySpec {
        let mut s = self.clone();
        if s.kind == Kind::Reflection && s.j == 0 {
            s.kind = Kind::Diagonal;
        }
        s
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        let bad = |msg: String| Err(FamilyError::InvalidSpec(msg));
        if self.n == 0 || self.m.len() != self.n {
            return bad(format!("need n >= 1 exponents, got n={} m={:?}", self.n, self.m));
        }
        if self.m.iter().any(|&x| x < 1) {
            return bad(format!("exponents must be positive, got {:?}", self.m));
        }
        match self.kind {
            Kind::Diagonal if self.j != 0 => bad(format!("diagonal spec has j = {}", self.j)),
            Kind::Reflection if self.j > self.n => bad(format!("need j <= n, got j = {}", self.j)),
            Kind::Kloosterman if self.j < 1 || self.j > self.n => {
                bad(format!("need 1 <= j <= n, got j = {}", self.j))
            }
            _ => Ok(()),
        }
    }

    /// Exponent vectors: `m_i e_i`, then `-m_i e_i` (`i <= j`) or `-1_j`.
    pub fn support(&self) -> Result<Vec<LatticePoint>, FamilyError> {
        self.validate()?;
        let n = self.n;
        let unit = |i: usize, c: i64| {
            let mut v = vec![0i64; n];
            v[i] = c;
            LatticePoint::new(v)
        };
        let mut pts: Vec<LatticePoint> = (0..n).map(|i| unit(i, self.m[i])).collect();
        match self.kind {
            Kind::Diagonal => {}
            Kind::Reflection => pts.extend((0..self.j).map(|i| unit(i, -self.m[i]))),
            Kind::Kloosterman => {
                pts.push(LatticePoint::new((0..n).map(|i| -((i < self.j) as i64)).collect::<Vec<_>>()))
            }
        }
        Ok(pts)
    }

    /// Columns `m_i e_i` of the face not containing the extra monomials.
    pub fn diagonal_face_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|k| if i == k { self.m[i] } else { 0 }).collect())
            .collect()
    }

    fn is_equilateral(&self) -> bool {
        self.m.iter().all(|&x| x == self.m[0])
    }
}

pub fn build(spec: &FamilySpec) -> Result<LaurentPoly, FamilyError> {
    let support = spec.support()?;
    let coeffs = match &spec.coeffs {
        Some(c) if c.len() != support.len() => {
            return Err(FamilyError::InvalidSpec(format!(
                "{} coefficients for {} monomials",
                c.len(),
                support.len()
            )))
        }
        Some(c) => c.clone(),
        None => vec![Coef::Int(1); support.len()],
    };
    let terms = support
        .into_iter()
        .zip(coeffs)
        .map(|(e, coef)| Term { coef, exp: e.0 })
        .collect();
    Ok(LaurentPoly::new(spec.n, terms)?)
}

pub fn dstar(spec: &FamilySpec) -> i64 {
    spec.m.iter().fold(1, |acc, x| acc.lcm(x))
}

pub fn nondegenerate_criterion(spec: &FamilySpec, p: u64) -> bool {
    !(dstar(spec) as u64).is_multiple_of(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Expected {
    NPequalsHP,
    NPstrictlyAbove,
}

/// Expected relation between Newton and Hodge polygons, assuming the
/// coefficients are supported on vertices (the default).
pub fn ordinarity_expectation(spec: &FamilySpec, p: u64) -> Result<Expected, FamilyError> {
    if !nondegenerate_criterion(spec, p) {
        return Err(FamilyError::DegeneratePrime(p));
    }
    Ok(if p % dstar(spec) as u64 == 1 % dstar(spec) as u64 {
        Expected::NPequalsHP
    } else {
        Expected::NPstrictlyAbove
    })
}

/// A torus point where every `x_i df^delta/dx_i` vanishes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Vertices of the face.
    pub face: Vec<Vec<i64>>,
    /// Field degree over `F_p` is `a * r`.
    pub r: u32,
    /// Coordinates as polynomial-basis digit vectors.
    pub point: Vec<Vec<u32>>,
}

/// Searches for a singular torus point of `f^delta` over `F_{q^r}`, `r <= r_max`,
/// on every closed face not containing the origin. Finding nothing does not
/// prove non-degeneracy, which quantifies over the algebraic closure.
pub fn nondegeneracy_falsifier(
    f: &LaurentPoly,
    p: u32,
    a: u32,
    r_max: u32,
    cfg: &EngineConfig,
) -> Result<Option<Witness>, FamilyError> {
    let f = f.reduced(p);
    let delta = f.newton_polytope()?;
    let faces: Vec<_> = delta
        .faces()
        .into_iter()
        .filter(|face| !delta.face_contains_origin(face))
        .collect();
    let mut evaluations: u128 = 0;
    for r in 1..=r_max {
        let q1 = (p as u128).pow(a * r) - 1;
        evaluations += faces.len() as u128 * q1.pow(f.n() as u32);
    }
    if evaluations > cfg.eval_budget as u128 {
        return Err(FamilyError::BudgetExceeded {
            evaluations,
            budget: cfg.eval_budget,
        });
    }
    for face in &faces {
        let restricted = f.restrict(|e| face.facets.iter().all(|&i| delta.on_facet(i, e)));
        for r in 1..=r_max {
            if let Some(point) = singular_point(&restricted, p, a, r, cfg)? {
                return Ok(Some(Witness {
                    face: face.vertices.iter().map(|&v| delta.vertices()[v].0.clone()).collect(),
                    r,
                    point,
                }));
            }
        }
    }
    Ok(None)
}

fn singular_point(
    g: &LaurentPoly,
    p: u32,
    a: u32,
    r: u32,
    cfg: &EngineConfig,
) -> Result<Option<Vec<Vec<u32>>>, FamilyError> {
    let ctx = cfg.field(p, a * r)?;
    let emb = Embedding::new(&ctx, a)?;
    let n = g.n();
    // partial i: sum_j (v_ji * c_j) x^{v_j}
    let partials: Vec<Vec<(FieldElement, &[i64])>> = (0..n)
        .map(|i| {
            g.terms()
                .iter()
                .map(|t| {
                    let c = emb.embed(&ctx, &t.coef.digits());
                    (ctx.mul(c, ctx.from_int(t.exp[i])), t.exp.as_slice())
                })
                .filter(|(c, _)| !c.is_zero())
                .collect()
        })
        .collect();
    let q1 = ctx.order() as u64 - 1;
    let vanishes = |e: &[u64]| {
        partials.iter().all(|terms| {
            let mut acc = FieldElement::ZERO;
            for (c, v) in terms {
                let s: i64 = v.iter().zip(e).map(|(&vi, &ei)| vi * ei as i64).sum();
                acc = ctx.add(acc, ctx.mul(*c, ctx.antilog(s)));
            }
            acc.is_zero()
        })
    };
    let found = (0..q1).into_par_iter().find_map_first(|first| {
        let mut e = vec![0u64; n];
        e[0] = first;
        loop {
            if vanishes(&e) {
                return Some(e);
            }
            let mut i = n;
            loop {
                i -= 1;
                if i == 0 {
                    return None;
                }
                e[i] += 1;
                if e[i] < q1 {
                    break;
                }
                e[i] = 0;
            }
        }
    });
    Ok(found.map(|e| e.iter().map(|&x| ctx.coeffs(ctx.antilog(x as i64))).collect()))
}

/// Closed-form `W(k)` for `k = 0..=k_max`, where one is known for `spec`.
pub fn closed_form_weights(spec: &FamilySpec, k_max: usize) -> Option<Result<Vec<i128>, HodgeError>> {
    let spec = spec.normalized();
    let n = spec.n as i64;
    let m = &spec.m;
    let ks = 0..=k_max as i64;
    let coprime_pair = spec.n == 2 && m[0].gcd(&m[1]) == 1;
    match spec.kind {
        Kind::Diagonal if spec.is_equilateral() => {
            Some(Ok(ks.map(|k| hodge::diag_equilateral_W(n, m[0], k)).collect()))
        }
        Kind::Diagonal if coprime_pair => Some(ks.map(|k| hodge::popoviciu_W(m[0], m[1], k)).collect()),
        Kind::Reflection if spec.is_equilateral() || coprime_pair => {
            Some(ks.map(|k| hodge::reflection_W(spec.n, m, spec.j, k)).collect())
        }
        Kind::Kloosterman if spec.is_equilateral() => {
            Some(ks.map(|k| hodge::kloosterman_equilateral_W(n, m[0], spec.j as i64, k)).collect())
        }
        Kind::Kloosterman if spec.n == 2 => {
            let r: Result<Vec<i128>, HodgeError> =
                ks.map(|k| hodge::kloosterman_2d_W(m[0], m[1], spec.j as i64, k)).collect();
            match r {
                Err(HodgeError::OutsideValidityDomain(..)) => None,
                r => Some(r),
            }
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    ClosedForm,
    Enumerator,
}

/// Weight and Hodge numbers of a family member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HodgeReport {
    pub denominator: i64,
    pub volume: u64,
    pub weights: Vec<u64>,
    pub hodge: Vec<i64>,
    pub source: Source,
    pub polygon: RationalPolygon,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HodgeCheckError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("closed form and enumerator disagree at k = {k}: {closed} vs {enumerated}")]
    Disagreement { k: usize, closed: i128, enumerated: u64 },
    #[error("Hodge numbers sum to {total}, volume is {volume}")]
    MassMismatch { total: i64, volume: u64 },
}

/// Hodge data for `k <= nD`: from a closed form when one applies, otherwise
/// from the enumerator. With `verify`, both are computed and must agree.
pub fn hodge_report(spec: &FamilySpec, verify: bool) -> Result<HodgeReport, HodgeCheckError> {
    let delta = build(spec)?.newton_polytope().map_err(FamilyError::from)?;
    let d = delta.denominator();
    let top = spec.n * d as usize;
    let volume = crate::lattice::normalized_volume(&delta).map_err(FamilyError::from)?;
    let closed = match closed_form_weights(spec, top) {
        Some(Ok(w)) if w.iter().all(|&x| x >= 0) => Some(w),
        Some(Err(e)) => return Err(FamilyError::from(e).into()),
        _ => None,
    };
    let enumerated = if verify || closed.is_none() {
        Some(hodge::weight_numbers(&delta, top).map_err(FamilyError::from)?)
    } else {
        None
    };
    if let (Some(c), Some(e)) = (&closed, &enumerated) {
        if let Some(k) = (0..=top).find(|&k| c[k] != e.counts[k] as i128) {
            return Err(HodgeCheckError::Disagreement {
                k,
                closed: c[k],
                enumerated: e.counts[k],
            });
        }
    }
    let (weights, source) = match (closed, enumerated) {
        (Some(c), _) => (c.iter().map(|&x| x as u64).collect(), Source::ClosedForm),
        (None, Some(e)) => (e.counts, Source::Enumerator),
        (None, None) => unreachable!("enumerator runs when no closed form applies"),
    };
    let wv = WeightVector {
        denominator: d,
        counts: weights,
    };
    let h: HodgeVector = hodge::hodge_numbers(&wv, spec.n).map_err(FamilyError::from)?;
    if h.total() != volume as i64 {
        return Err(HodgeCheckError::MassMismatch {
            total: h.total(),
            volume,
        });
    }
    Ok(HodgeReport {
        denominator: d,
        volume,
        polygon: hodge::hodge_polygon(&h),
        weights: wv.counts,
        hodge: h.numbers,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::largest_invariant_factor;
    use crate::lattice::hull_facets;

    fn support(spec: &FamilySpec) -> Vec<Vec<i64>> {
        spec.support().unwrap().into_iter().map(|p| p.0).collect()
    }

    #[test]
    fn supports() {
        assert_eq!(support(&FamilySpec::reflection(vec![1, 1], 1)), vec![vec![1, 0], vec![0, 1], vec![-1, 0]]);
        assert_eq!(support(&FamilySpec::kloosterman(vec![4, 4], 2)), vec![vec![4, 0], vec![0, 4], vec![-1, -1]]);
        assert_eq!(support(&FamilySpec::diagonal(vec![2, 3])), vec![vec![2, 0], vec![0, 3]]);
        assert!(FamilySpec::kloosterman(vec![2, 2], 0).support().is_err());
        assert_eq!(FamilySpec::reflection(vec![2, 2], 0).normalized().kind, Kind::Diagonal);
    }

    #[test]
    fn criteria() {
        let k33 = FamilySpec::kloosterman(vec![3, 3], 2);
        assert!(!nondegenerate_criterion(&k33, 3));
        assert!(nondegenerate_criterion(&k33, 2));
        assert!(nondegenerate_criterion(&FamilySpec::reflection(vec![2, 3], 2), 5));
        assert_eq!(dstar(&FamilySpec::diagonal(vec![2, 3])), 6);
        assert_eq!(
            ordinarity_expectation(&FamilySpec::kloosterman(vec![2, 2], 2), 3),
            Ok(Expected::NPequalsHP)
        );
        assert_eq!(ordinarity_expectation(&k33, 2), Ok(Expected::NPstrictlyAbove));
        assert_eq!(ordinarity_expectation(&k33, 3), Err(FamilyError::DegeneratePrime(3)));
        assert_eq!(
            ordinarity_expectation(&FamilySpec::kloosterman(vec![1, 1], 2), 7),
            Ok(Expected::NPequalsHP)
        );
    }

    #[test]
    fn support_is_vertex_set_and_dstar_is_invariant_factor() {
        for kind in [Kind::Diagonal, Kind::Reflection, Kind::Kloosterman] {
            for m in [vec![2], vec![3], vec![1, 2], vec![2, 3], vec![3, 3], vec![1, 2, 3]] {
                let js = if kind == Kind::Diagonal { 0..=0 } else { 1..=m.len() };
                for j in js {
                    let spec = FamilySpec::new(kind, m.clone(), j);
                    let mut s = spec.support().unwrap();
                    let delta = hull_facets(&s, spec.n).unwrap();
                    s.sort();
                    let nonzero: Vec<_> = delta.vertices().iter().filter(|v| !v.is_origin()).cloned().collect();
                    assert_eq!(nonzero, s, "{spec:?}");
                    assert_eq!(largest_invariant_factor(&spec.diagonal_face_matrix()), Ok(dstar(&spec)));
                }
            }
        }
    }

    #[test]
    fn falsifier_examples() {
        let cfg = EngineConfig::default();
        let cube = LaurentPoly::monomials(1, &[vec![3]]).unwrap();
        let w = nondegeneracy_falsifier(&cube, 3, 1, 1, &cfg).unwrap().unwrap();
        assert_eq!((w.r, w.point.clone()), (1, vec![vec![1]]));
        let k11 = build(&FamilySpec::kloosterman(vec![1, 1], 2)).unwrap();
        assert_eq!(nondegeneracy_falsifier(&k11, 5, 1, 2, &cfg).unwrap(), None);
        let k33 = build(&FamilySpec::kloosterman(vec![3, 3], 2)).unwrap();
        let w = nondegeneracy_falsifier(&k33, 3, 1, 2, &cfg).unwrap().unwrap();
        assert!(w.face.iter().all(|v| v[0] >= 0 && v[1] >= 0), "{w:?}");
    }

    #[test]
    fn reports_agree_with_enumerator() {
        for spec in [
            FamilySpec::reflection(vec![4, 4], 0),
            FamilySpec::reflection(vec![2, 3], 1),
            FamilySpec::kloosterman(vec![3, 3], 2),
            FamilySpec::kloosterman(vec![2, 3], 1),
        ] {
            let r = hodge_report(&spec, true).unwrap();
            assert_eq!(r.hodge.iter().sum::<i64>() as u64, r.volume);
        }
        for n in 1..=3usize {
            for m in 1..=4i64 {
                for j in 1..=n {
                    let spec = FamilySpec::kloosterman(vec![m; n], j);
                    hodge_report(&spec, true).unwrap_or_else(|e| panic!("n={n} m={m} j={j}: {e:?}"));
                }
            }
        }
        for (m1, m2) in [(2, 3), (3, 2), (2, 5), (3, 5), (5, 7)] {
            for j in 1..=2 {
                let spec = FamilySpec::kloosterman(vec![m1, m2], j);
                assert_eq!(hodge_report(&spec, true).unwrap().source, Source::ClosedForm);
            }
        }
        let k = hodge_report(&FamilySpec::kloosterman(vec![3, 3], 2), false).unwrap();
        assert_eq!(k.hodge[3], 3);
    }
}
