//! Fixtures shared by the benchmarks.

use kvariant_core::families::{build, FamilySpec};
use kvariant_core::laurent::LaurentPoly;
use kvariant_core::Polytope;

/// `K^j` with exponents `m`.
pub fn kloosterman(m: &[i64], j: usize) -> LaurentPoly {
    build(&FamilySpec::kloosterman(m.to_vec(), j)).expect("valid family")
}

/// Newton polytope of `K^j` with exponents `m`.
pub fn kloosterman_polytope(m: &[i64], j: usize) -> Polytope {
    kloosterman(m, j).newton_polytope().expect("full-dimensional")
}
