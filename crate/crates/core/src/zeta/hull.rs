//! Lower convex hulls and polygon comparison.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::polygon::{RationalPolygon, Segment};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("no finite points")]
    EmptyInput,
    #[error("first point must be (0, 0)")]
    BadStart,
    #[error("endpoints differ: {np:?} vs {hp:?}")]
    EndpointMismatch {
        np: (Rational, Rational),
        hp: (Rational, Rational),
    },
}

/// Lower convex hull of `(i, v_i)` with `None` treated as `+infinity`.
pub fn lower_hull(points: &[(u64, Option<Rational>)]) -> Result<RationalPolygon, HullError> {
    let mut pts: Vec<(u64, Rational)> = points
        .iter()
        .filter_map(|&(x, v)| v.map(|v| (x, v)))
        .collect();
    if pts.is_empty() {
        return Err(HullError::EmptyInput);
    }
    pts.sort();
    if pts[0] != (0, Rational::from_integer(0)) {
        return Err(HullError::BadStart);
    }
    let mut hull: Vec<(u64, Rational)> = Vec::new();
    for pt in pts {
        if hull.last().is_some_and(|h| h.0 == pt.0) {
            continue; // sorted, so the earlier one is lower
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above segment a -> pt
            let lhs = (b.1 - a.1) * Rational::from_integer((pt.0 - a.0) as i64);
            let rhs = (pt.1 - a.1) * Rational::from_integer((b.0 - a.0) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let segments = hull.windows(2).map(|w| {
        let len = w[1].0 - w[0].0;
        Segment {
            slope: (w[1].1 - w[0].1) / Rational::from_integer(len as i64),
            length: len,
        }
    });
    Ok(RationalPolygon::from_segments(segments))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Equal,
    StrictlyAboveSomewhere,
    Crossing,
}

/// Compares `np` against `hp` at every vertex abscissa of either polygon.
pub fn compare_polygons(np: &RationalPolygon, hp: &RationalPolygon) -> Result<Verdict, HullError> {
    if np.endpoint() != hp.endpoint() {
        return Err(HullError::EndpointMismatch {
            np: np.endpoint(),
            hp: hp.endpoint(),
        });
    }
    let mut xs: Vec<Rational> = np
        .vertices()
        .iter()
        .chain(hp.vertices())
        .map(|v| v.0)
        .collect();
    xs.sort();
    xs.dedup();
    let mut above = false;
    for x in xs {
        let a = np.value_at(x).expect("x within range");
        let b = hp.value_at(x).expect("x within range");
        match a.cmp(&b) {
            Ordering::Less => return Ok(Verdict::Crossing),
            Ordering::Greater => above = true,
            Ordering::Equal => {}
        }
    }
    Ok(if above {
        Verdict::StrictlyAboveSomewhere
    } else {
        Verdict::Equal
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn slopes(p: &RationalPolygon) -> Vec<Rational> {
        p.slope_list()
    }

    #[test]
    fn hull_examples() {
        let h = lower_hull(&[(0, Some(r(0, 1))), (1, Some(r(0, 1))), (2, Some(r(1, 1))), (3, Some(r(3, 1)))]).unwrap();
        assert_eq!(slopes(&h), vec![r(0, 1), r(1, 1), r(2, 1)]);
        let h = lower_hull(&[(0, Some(r(0, 1))), (1, Some(r(5, 1))), (2, Some(r(0, 1)))]).unwrap();
        assert_eq!(h.vertices(), &[(r(0, 1), r(0, 1)), (r(2, 1), r(0, 1))]);
        let h = lower_hull(&[(0, Some(r(0, 1))), (1, None), (2, Some(r(1, 1)))]).unwrap();
        assert_eq!(h.segments(), &[Segment { slope: r(1, 2), length: 2 }]);
        assert_eq!(lower_hull(&[(0, None)]), Err(HullError::EmptyInput));
    }

    #[test]
    fn comparison_examples() {
        let np = RationalPolygon::from_segments([
            Segment { slope: r(0, 1), length: 1 },
            Segment { slope: r(1, 2), length: 2 },
        ]);
        let hp = RationalPolygon::from_segments([
            Segment { slope: r(0, 1), length: 1 },
            Segment { slope: r(1, 3), length: 1 },
            Segment { slope: r(2, 3), length: 1 },
        ]);
        assert_eq!(compare_polygons(&np, &hp), Ok(Verdict::StrictlyAboveSomewhere));
        assert_eq!(compare_polygons(&hp, &np), Ok(Verdict::Crossing));
        assert_eq!(compare_polygons(&hp, &hp), Ok(Verdict::Equal));
        let short = RationalPolygon::from_segments([Segment { slope: r(0, 1), length: 3 }]);
        assert!(matches!(compare_polygons(&short, &hp), Err(HullError::EndpointMismatch { .. })));
    }

    proptest! {
        #[test]
        fn hull_lies_below_points(vals in prop::collection::vec(prop::option::of(0i64..40), 1..12)) {
            let mut pts = vec![(0u64, Some(r(0, 1)))];
            pts.extend(vals.iter().enumerate().map(|(i, v)| (i as u64 + 1, v.map(|v| r(v, 3)))));
            let h = lower_hull(&pts).unwrap();
            for (x, v) in &pts {
                if let (Some(v), Some(hv)) = (v, h.value_at(r(*x as i64, 1))) {
                    prop_assert!(hv <= *v);
                }
            }
            let s = h.slope_list();
            prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
