//! Hodge polygons and p-adic Newton polygons for reflection and Kloosterman
//! variants of diagonal Laurent polynomials.
//!
//! The crate has two independent halves that meet in [`zeta::compare_polygons`]:
//!
//! * combinatorics of Newton polytopes ([`lattice`], [`hodge`]), giving the
//!   Hodge polygon from lattice-point weights;
//! * exact exponential sums over finite fields ([`gf`], [`zeta`]), giving the
//!   Newton polygon of the L-function from brute-force point counts.
//!
//! [`diagonal`] computes Newton polygons of diagonal polynomials a third way,
//! from multiplication-by-p orbits, and [`families`] ties everything to the
//! concrete reflection and Kloosterman families.

pub mod lattice;
pub mod polygon;
pub mod hodge;
pub mod gf;
pub mod laurent;
pub mod zeta;
pub mod diagonal;
pub mod families;
pub mod tables;

/// Exact rational number used throughout.
pub type Rational = num_rational::Ratio<i64>;

pub use lattice::{LatticePoint, Polytope, Weight};
pub use polygon::{RationalPolygon, Segment};
