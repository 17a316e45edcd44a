//! Lower-convex polygons with exact rational vertices.

use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::Rational;

/// One side of a polygon: a slope and an integer horizontal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub slope: Rational,
    pub length: u64,
}

/// A lower-convex polygon starting at the origin.
///
/// Vertices and slopes are kept in sync; consecutive slopes are strictly
/// increasing and no segment has zero length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPolygon {
    vertices: Vec<(Rational, Rational)>,
    segments: Vec<Segment>,
}

impl RationalPolygon {
    /// Builds a polygon from segments given in nondecreasing slope order.
    /// Zero-length segments are dropped and equal slopes merged.
    ///
    /// Panics if the slopes decrease, since the result would not be convex.
    pub fn from_segments(segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut merged: Vec<Segment> = Vec::new();
        for s in segments {
            if s.length == 0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.slope == s.slope => last.length += s.length,
                Some(last) => {
                    assert!(last.slope < s.slope, "segments must have increasing slopes");
                    merged.push(s);
                }
                None => merged.push(s),
            }
        }
        let mut vertices = vec![(Rational::zero(), Rational::zero())];
        let (mut x, mut y) = (Rational::zero(), Rational::zero());
        for s in &merged {
            let len = Rational::from_integer(s.length as i64);
            x += len;
            y += s.slope * len;
            vertices.push((x, y));
        }
        RationalPolygon {
            vertices,
            segments: merged,
        }
    }

    pub fn vertices(&self) -> &[(Rational, Rational)] {
        &self.vertices
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn endpoint(&self) -> (Rational, Rational) {
        *self.vertices.last().expect("polygon has at least the origin")
    }

    /// Total horizontal length.
    pub fn width(&self) -> u64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Slope of each unit-length step, in order.
    pub fn slope_list(&self) -> Vec<Rational> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.slope, s.length as usize))
            .collect()
    }

    /// Height at `x`, for `0 <= x <= width`.
    pub fn value_at(&self, x: Rational) -> Option<Rational> {
        if x < Rational::zero() || x > self.endpoint().0 {
            return None;
        }
        for w in self.vertices.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x <= x1 {
                return Some(y0 + (y1 - y0) / (x1 - x0) * (x - x0));
            }
        }
        Some(self.vertices[0].1)
    }
}

/// Serializes a rational as `[numerator, denominator]`.
pub fn rational_pair(r: &Rational) -> [i64; 2] {
    [*r.numer(), *r.denom()]
}

impl Serialize for Segment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Segment", 2)?;
        st.serialize_field("length", &self.length)?;
        st.serialize_field("slope", &rational_pair(&self.slope))?;
        st.end()
    }
}

impl Serialize for RationalPolygon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let verts: Vec<[[i64; 2]; 2]> = self
            .vertices
            .iter()
            .map(|(x, y)| [rational_pair(x), rational_pair(y)])
            .collect();
        let mut st = s.serialize_struct("RationalPolygon", 2)?;
        st.serialize_field("segments", &self.segments)?;
        st.serialize_field("vertices", &verts)?;
        st.end()
    }
}

/// Convenience for tests and callers: `(slope, length)` pairs.
pub fn segments_of(pairs: &[(Rational, u64)]) -> Vec<Segment> {
    pairs
        .iter()
        .map(|&(slope, length)| Segment { slope, length })
        .collect()
}
