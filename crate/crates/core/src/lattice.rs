//! Exact geometry of Newton polytopes.
//!
//! A polytope here is always the convex hull of the origin together with a
//! finite set of integer exponent vectors. Facets are found by brute force over
//! all `n`-subsets of the generating points, which is fine for `n <= 6` and the
//! handful of points the built-in families produce. Everything is exact: facet
//! normals are rationals, weights are rationals, volumes are integers.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

/// Largest ambient dimension the brute-force hull accepts.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("points do not span an n-dimensional polytope together with the origin")]
    DegeneratePolytope,
    #[error("point {point} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        point: LatticePoint,
        got: usize,
        expected: usize,
    },
}

/// An integer exponent vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        LatticePoint(coords.into())
    }

    pub fn origin(n: usize) -> Self {
        LatticePoint(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn scaled(&self, factor: i64) -> Self {
        LatticePoint(self.0.iter().map(|c| c * factor).collect())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FacetKind {
    /// Hyperplane `<a, x> = 0`; the polytope lies in `<a, x> >= 0`.
    ThroughOrigin,
    /// Hyperplane `<a, x> = 1`; the polytope lies in `<a, x> <= 1`.
    NotThroughOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<Rational>,
    pub kind: FacetKind,
    /// Indices into [`Polytope::vertices`] of the vertices on this facet.
    pub vertices: Vec<usize>,
}

impl Facet {
    pub fn eval(&self, u: &[i64]) -> Rational {
        dot(&self.normal, u)
    }
}

/// Weight of a lattice point with respect to a polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight {
    Finite(Rational),
    Infinite,
}

impl Weight {
    pub fn is_finite(&self) -> bool {
        matches!(self, Weight::Finite(_))
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            Weight::Finite(w) => Some(*w),
            Weight::Infinite => None,
        }
    }
}

/// A closed proper face, described by the vertices it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub dim: usize,
    /// Indices into [`Polytope::facets`] of the facets containing this face.
    pub facets: Vec<usize>,
}

/// Full-dimensional lattice polytope containing the origin.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<LatticePoint>,
    facets: Vec<Facet>,
    denominator: i64,
    // facet normals of weight-bearing facets multiplied by the denominator
    scaled_outer: Vec<Vec<i64>>,
    // primitive integer normals of through-origin facets
    inner: Vec<Vec<i64>>,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn outer_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets
            .iter()
            .filter(|f| f.kind == FacetKind::NotThroughOrigin)
    }

    pub fn has_vertex(&self, p: &LatticePoint) -> bool {
        self.vertices.binary_search(p).is_ok()
    }

    /// Weight times the denominator, as an exact integer; `None` outside the cone.
    pub fn scaled_weight(&self, u: &[i64]) -> Option<i64> {
        for a in &self.inner {
            if idot(a, u) < 0 {
                return None;
            }
        }
        let mut best = 0;
        for a in &self.scaled_outer {
            best = best.max(idot(a, u));
        }
        Some(best)
    }

    /// Integer bounding box of the polytope.
    pub fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![0i64; self.dim];
        let mut hi = vec![0i64; self.dim];
        for v in &self.vertices {
            for (i, &c) in v.0.iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        (lo, hi)
    }

    /// Whether `p` lies on the hyperplane of facet `idx`.
    pub fn on_facet(&self, idx: usize, p: &[i64]) -> bool {
        let f = &self.facets[idx];
        let v = f.eval(p);
        match f.kind {
            FacetKind::ThroughOrigin => v.is_zero(),
            FacetKind::NotThroughOrigin => v == Rational::from_integer(1),
        }
    }

    /// All closed proper faces, of every dimension, ordered by dimension then
    /// by vertex list.
    pub fn faces(&self) -> Vec<Face> {
        let nv = self.vertices.len();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut frontier: Vec<Vec<usize>> = Vec::new();
        for f in &self.facets {
            if seen.insert(f.vertices.clone()) {
                frontier.push(f.vertices.clone());
            }
        }
        while let Some(set) = frontier.pop() {
            for f in &self.facets {
                let meet: Vec<usize> = set
                    .iter()
                    .copied()
                    .filter(|v| f.vertices.binary_search(v).is_ok())
                    .collect();
                if !meet.is_empty() && seen.insert(meet.clone()) {
                    frontier.push(meet);
                }
            }
        }
        debug_assert!(seen.iter().all(|s| s.len() <= nv));
        let mut faces: Vec<Face> = seen
            .into_iter()
            .map(|vs| {
                let pts: Vec<&LatticePoint> = vs.iter().map(|&i| &self.vertices[i]).collect();
                let dim = affine_rank(&pts);
                let facets = self
                    .facets
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| vs.iter().all(|v| f.vertices.binary_search(v).is_ok()))
                    .map(|(i, _)| i)
                    .collect();
                Face {
                    vertices: vs,
                    dim,
                    facets,
                }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.vertices.cmp(&b.vertices)));
        faces
    }

    /// A face contains the origin iff every facet through it passes through the origin.
    pub fn face_contains_origin(&self, face: &Face) -> bool {
        face.facets
            .iter()
            .all(|&i| self.facets[i].kind == FacetKind::ThroughOrigin)
    }
}

fn idot(a: &[i64], u: &[i64]) -> i64 {
    a.iter().zip(u).map(|(x, y)| x * y).sum()
}

fn dot(a: &[Rational], u: &[i64]) -> Rational {
    a.iter()
        .zip(u)
        .fold(Rational::zero(), |acc, (x, &y)| acc + x * y)
}

/// Rank of an integer matrix, by fraction-free elimination.
pub(crate) fn rank_i128(mut rows: Vec<Vec<i128>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let a = rows[rank][col];
                let b = rows[r][col];
                let g = a.gcd(&b);
                let (fa, fb) = (a / g, b / g);
                for c in 0..ncols {
                    rows[r][c] = rows[r][c] * fa - rows[rank][c] * fb;
                }
                let rg = rows[r].iter().fold(0i128, |acc, x| acc.gcd(x));
                if rg > 1 {
                    rows[r].iter_mut().for_each(|x| *x /= rg);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn affine_rank(pts: &[&LatticePoint]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let base = &pts[0].0;
    let rows = pts[1..]
        .iter()
        .map(|p| p.0.iter().zip(base).map(|(a, b)| (a - b) as i128).collect())
        .collect();
    rank_i128(rows)
}

/// Determinant of a small integer matrix (Bareiss).
pub(crate) fn det_i128(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Normal of the hyperplane through `n` points in `Z^n`, via cofactors of the
/// difference vectors. Zero when the points are affinely dependent.
fn hyperplane_normal(pts: &[&LatticePoint]) -> Vec<i128> {
    let n = pts[0].dim();
    let base = &pts[0].0;
    let diffs: Vec<Vec<i128>> = pts[1..]
        .iter()
        .map(|p| p.0.iter().zip(base).map(|(a, b)| (a - b) as i128).collect())
        .collect();
    (0..n)
        .map(|k| {
            let minor: Vec<Vec<i128>> = diffs
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != k)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let d = det_i128(minor);
            if k % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Facets of the convex hull of `support` and the origin.
pub fn hull_facets(support: &[LatticePoint], n: usize) -> Result<Polytope, LatticeError> {
    if n > MAX_DIM {
        return Err(LatticeError::DimensionTooLarge(n));
    }
    if n == 0 {
        return Err(LatticeError::DegeneratePolytope);
    }
    let mut set: BTreeSet<LatticePoint> = BTreeSet::new();
    set.insert(LatticePoint::origin(n));
    for p in support {
        if p.dim() != n {
            return Err(LatticeError::DimensionMismatch {
                point: p.clone(),
                got: p.dim(),
                expected: n,
            });
        }
        set.insert(p.clone());
    }
    let points: Vec<LatticePoint> = set.into_iter().collect();
    let refs: Vec<&LatticePoint> = points.iter().collect();
    if affine_rank(&refs) < n {
        return Err(LatticeError::DegeneratePolytope);
    }

    // key: (kind, normal) for dedup and deterministic ordering
    let mut found: BTreeSet<(Vec<Rational>, FacetKind)> = BTreeSet::new();
    combinations(points.len(), n, |idx| {
        let sub: Vec<&LatticePoint> = idx.iter().map(|&i| &points[i]).collect();
        let normal = hyperplane_normal(&sub);
        if normal.iter().all(|&c| c == 0) {
            return;
        }
        let offset: i128 = normal.iter().zip(&sub[0].0).map(|(a, &b)| a * b as i128).sum();
        let mut pos = false;
        let mut neg = false;
        for p in &points {
            let s: i128 = normal.iter().zip(&p.0).map(|(a, &b)| a * b as i128).sum::<i128>() - offset;
            pos |= s > 0;
            neg |= s < 0;
        }
        if pos && neg {
            return;
        }
        if offset != 0 {
            let a: Vec<Rational> = normal
                .iter()
                .map(|&c| Rational::new(c as i64, offset as i64))
                .collect();
            found.insert((a, FacetKind::NotThroughOrigin));
        } else {
            let g = normal.iter().fold(0i128, |acc, x| acc.gcd(x));
            let flip = if neg { -1 } else { 1 };
            let a: Vec<Rational> = normal
                .iter()
                .map(|&c| Rational::from_integer((flip * c / g) as i64))
                .collect();
            found.insert((a, FacetKind::ThroughOrigin));
        }
    });

    let mut raw: Vec<(Vec<Rational>, FacetKind)> = found.into_iter().collect();
    raw.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let on = |normal: &[Rational], kind: FacetKind, p: &LatticePoint| {
        let v = dot(normal, &p.0);
        match kind {
            FacetKind::ThroughOrigin => v.is_zero(),
            FacetKind::NotThroughOrigin => v == Rational::from_integer(1),
        }
    };

    // a point is a vertex iff the normals of the facets through it have full rank
    let vertices: Vec<LatticePoint> = points
        .iter()
        .filter(|p| {
            let rows: Vec<Vec<i128>> = raw
                .iter()
                .filter(|(a, k)| on(a, *k, p))
                .map(|(a, _)| integer_normal(a))
                .collect();
            rank_i128(rows) == n
        })
        .cloned()
        .collect();

    let facets: Vec<Facet> = raw
        .into_iter()
        .map(|(normal, kind)| {
            let vs = vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| on(&normal, kind, v))
                .map(|(i, _)| i)
                .collect();
            Facet {
                normal,
                kind,
                vertices: vs,
            }
        })
        .collect();

    let denominator = facets
        .iter()
        .filter(|f| f.kind == FacetKind::NotThroughOrigin)
        .flat_map(|f| f.normal.iter().map(|c| *c.denom()))
        .fold(1i64, |acc, d| acc.lcm(&d));
    let scaled_outer = facets
        .iter()
        .filter(|f| f.kind == FacetKind::NotThroughOrigin)
        .map(|f| {
            f.normal
                .iter()
                .map(|c| (c * denominator).to_integer())
                .collect()
        })
        .collect();
    let inner = facets
        .iter()
        .filter(|f| f.kind == FacetKind::ThroughOrigin)
        .map(|f| f.normal.iter().map(|c| c.to_integer()).collect())
        .collect();

    Ok(Polytope {
        dim: n,
        vertices,
        facets,
        denominator,
        scaled_outer,
        inner,
    })
}

fn integer_normal(a: &[Rational]) -> Vec<i128> {
    let l = a.iter().fold(1i64, |acc, c| acc.lcm(c.denom()));
    a.iter().map(|c| (c * l).to_integer() as i128).collect()
}

pub fn weight(delta: &Polytope, u: &LatticePoint) -> Weight {
    let inside = delta
        .facets
        .iter()
        .filter(|f| f.kind == FacetKind::ThroughOrigin)
        .all(|f| !f.eval(&u.0).is_negative());
    if !inside {
        return Weight::Infinite;
    }
    let w = delta
        .outer_facets()
        .map(|f| f.eval(&u.0))
        .fold(Rational::zero(), |acc, v| acc.max(v));
    Weight::Finite(w)
}

/// LCM of the denominators of the facets not through the origin.
pub fn denominator(delta: &Polytope) -> i64 {
    delta.denominator
}

pub fn cone_contains(delta: &Polytope, u: &LatticePoint) -> bool {
    weight(delta, u).is_finite()
}

/// `n! * Vol(delta)`, by coning the pulling triangulation of each weight-bearing
/// facet from the origin.
pub fn normalized_volume(delta: &Polytope) -> Result<u64, LatticeError> {
    let faces = delta.faces();
    let mut total: i128 = 0;
    for f in delta.outer_facets() {
        let face = faces
            .iter()
            .find(|g| g.vertices == f.vertices)
            .expect("facet is a face");
        for simplex in pulling_triangulation(face, &faces) {
            let rows: Vec<Vec<i128>> = simplex
                .iter()
                .map(|&v| delta.vertices[v].0.iter().map(|&c| c as i128).collect())
                .collect();
            total += det_i128(rows).abs();
        }
    }
    if total == 0 {
        return Err(LatticeError::DegeneratePolytope);
    }
    Ok(total as u64)
}

fn pulling_triangulation(face: &Face, faces: &[Face]) -> Vec<Vec<usize>> {
    if face.dim == 0 {
        return vec![face.vertices.clone()];
    }
    let apex = face.vertices[0];
    let mut out = Vec::new();
    for sub in faces.iter().filter(|g| {
        g.dim + 1 == face.dim
            && !g.vertices.contains(&apex)
            && g.vertices.iter().all(|v| face.vertices.contains(v))
    }) {
        for mut s in pulling_triangulation(sub, faces) {
            s.push(apex);
            out.push(s);
        }
    }
    out
}
