//! Weight numbers, Hodge numbers and Hodge polygons.
//!
//! [`weight_numbers`] counts lattice points by brute force over a bounding
//! box and is the reference for every closed form below. The closed forms
//! cover the diagonal, reflection and Kloosterman families in the parameter
//! ranges where they are known to hold.

use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::Polytope;
pub use crate::polygon::{RationalPolygon, Segment};
use crate::Rational;

/// Default cap on the number of lattice cells scanned by [`weight_numbers`].
pub const DEFAULT_CELL_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HodgeError {
    #[error("bounding box has {cells} cells, budget is {budget}")]
    BoxOverflow { cells: u128, budget: u64 },
    #[error("weight numbers cover k <= {got}, need k <= {needed}")]
    InsufficientRange { needed: usize, got: usize },
    #[error("parameters {0} and {1} are not coprime")]
    NotCoprime(i64, i64),
    #[error("no closed form available: {0}")]
    UnsupportedParameters(String),
    #[error("k = {k} outside 0..={max}")]
    OutOfRange { k: i64, max: i64 },
    #[error("formula only holds for distinct primes, got ({0}, {1})")]
    OutsideValidityDomain(i64, i64),
}

/// Counts `W(k)` of lattice points of weight `k / D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightVector {
    pub denominator: i64,
    pub counts: Vec<u64>,
}

impl WeightVector {
    pub fn k_max(&self) -> usize {
        self.counts.len() - 1
    }

    /// Count at an arbitrary rational weight; zero off the `1/D` grid.
    pub fn count_at(&self, w: Rational) -> u64 {
        let scaled = w * self.denominator;
        if !scaled.is_integer() || scaled < Rational::zero() {
            return 0;
        }
        let k = scaled.to_integer() as usize;
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// Re-index onto a finer denominator `d` (a multiple of the current one).
    pub fn rescaled(&self, d: i64, k_max: usize) -> WeightVector {
        assert_eq!(d % self.denominator, 0);
        let counts = (0..=k_max)
            .map(|k| self.count_at(Rational::new(k as i64, d)))
            .collect();
        WeightVector {
            denominator: d,
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HodgeVector {
    pub denominator: i64,
    pub n: usize,
    /// `H(k)` for `k = 0..=n*D`.
    pub numbers: Vec<i64>,
}

impl HodgeVector {
    pub fn total(&self) -> i64 {
        self.numbers.iter().sum()
    }
}

/// Default scan range: `n*D` plus a guard band of `2*D`.
pub fn default_k_max(delta: &Polytope) -> usize {
    let d = delta.denominator() as usize;
    delta.dim() * d + 2 * d
}

pub fn weight_numbers(delta: &Polytope, k_max: usize) -> Result<WeightVector, HodgeError> {
    weight_numbers_with_budget(delta, k_max, DEFAULT_CELL_BUDGET)
}

/// Scans the integer bounding box of `(k_max / D) * delta`.
pub fn weight_numbers_with_budget(
    delta: &Polytope,
    k_max: usize,
    budget: u64,
) -> Result<WeightVector, HodgeError> {
    let d = delta.denominator();
    let (lo, hi) = delta.bounding_box();
    let km = k_max as i64;
    let lo: Vec<i64> = lo.iter().map(|&c| Integer::div_floor(&(c * km), &d)).collect();
    let hi: Vec<i64> = hi.iter().map(|&c| Integer::div_ceil(&(c * km), &d)).collect();
    let cells: u128 = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a + 1) as u128)
        .product();
    if cells > budget as u128 {
        return Err(HodgeError::BoxOverflow { cells, budget });
    }
    let n = delta.dim();
    let counts = (lo[0]..=hi[0])
        .into_par_iter()
        .map(|x0| {
            let mut local = vec![0u64; k_max + 1];
            let mut u = lo.clone();
            u[0] = x0;
            loop {
                if let Some(w) = delta.scaled_weight(&u) {
                    if w <= km {
                        local[w as usize] += 1;
                    }
                }
                // odometer over coordinates 1..n
                let mut i = n;
                loop {
                    i -= 1;
                    if i == 0 {
                        return local;
                    }
                    if u[i] < hi[i] {
                        u[i] += 1;
                        break;
                    }
                    u[i] = lo[i];
                }
            }
        })
        .reduce(
            || vec![0u64; k_max + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(WeightVector {
        denominator: d,
        counts,
    })
}

/// `H(k) = sum_i (-1)^i C(n,i) W(k - iD)` for `k = 0..=nD`.
pub fn hodge_numbers(w: &WeightVector, n: usize) -> Result<HodgeVector, HodgeError> {
    let top = n * w.denominator as usize;
    if w.counts.len() <= top {
        return Err(HodgeError::InsufficientRange {
            needed: top,
            got: w.k_max(),
        });
    }
    let numbers = (0..=top).map(|k| hodge_at(w, n, k)).collect();
    Ok(HodgeVector {
        denominator: w.denominator,
        n,
        numbers,
    })
}

/// Hodge numbers for `k` above `nD` that the weight vector covers; all zero
/// for a valid polytope.
pub fn hodge_guard_band(w: &WeightVector, n: usize) -> Vec<i64> {
    let top = n * w.denominator as usize;
    (top + 1..w.counts.len()).map(|k| hodge_at(w, n, k)).collect()
}

fn hodge_at(w: &WeightVector, n: usize, k: usize) -> i64 {
    let d = w.denominator as usize;
    (0..=n)
        .filter(|i| i * d <= k)
        .map(|i| {
            let term = binomial(n as i64, i as i64) as i64 * w.counts[k - i * d] as i64;
            if i % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// Sides of slope `k/D` and length `H(k)`.
pub fn hodge_polygon(h: &HodgeVector) -> RationalPolygon {
    RationalPolygon::from_segments(h.numbers.iter().enumerate().map(|(k, &len)| {
        assert!(len >= 0, "negative Hodge number H({k}) = {len}");
        Segment {
            slope: Rational::new(k as i64, h.denominator),
            length: len as u64,
        }
    }))
}

/// `C(a, b)`, zero unless `0 <= b <= a`.
pub fn binomial(a: i64, b: i64) -> i128 {
    if b < 0 || a < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut r: i128 = 1;
    for i in 0..b {
        r = r * (a - i) as i128 / (i + 1) as i128;
    }
    r
}

/// Weight numbers of `x_1^m + ... + x_n^m`. For `n = 0` this is 1 at `k = 0`.
#[allow(non_snake_case)]
pub fn diag_equilateral_W(n: i64, _m: i64, k: i64) -> i128 {
    if n == 0 {
        return (k == 0) as i128;
    }
    binomial(n - 1 + k, n - 1)
}

#[allow(non_snake_case)]
pub fn diag_equilateral_H(n: i64, m: i64, k: i64) -> i128 {
    if n == 0 {
        return (k == 0) as i128;
    }
    (0..=n)
        .map(|i| {
            let t = binomial(n, i) * binomial(n - 1 + k - i * m, n - 1);
            if i % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum()
}

fn frac(x: Rational) -> Rational {
    x - x.floor()
}

fn inverse_mod(a: i64, m: i64) -> i64 {
    if m == 1 {
        return 0;
    }
    let e = a.extended_gcd(&m);
    e.x.rem_euclid(m)
}

/// Number of `(x1, x2) >= 0` with `m2*x1 + m1*x2 = k` (Popoviciu).
#[allow(non_snake_case)]
pub fn popoviciu_W(m1: i64, m2: i64, k: i64) -> Result<i128, HodgeError> {
    if m1.gcd(&m2) != 1 {
        return Err(HodgeError::NotCoprime(m1, m2));
    }
    if k < 0 {
        return Ok(0);
    }
    let inv1 = inverse_mod(m1, m2);
    let inv2 = inverse_mod(m2, m1);
    let w = Rational::new(k, m1 * m2) - frac(Rational::new(inv2 * k, m1))
        - frac(Rational::new(inv1 * k, m2))
        + Rational::from_integer(1);
    debug_assert!(w.is_integer(), "Popoviciu count not integral: {w}");
    Ok(w.to_integer() as i128)
}

fn lcm_all(m: &[i64]) -> i64 {
    m.iter().fold(1, |acc, x| acc.lcm(x))
}

/// Weight numbers of the reflection variant `G^j` indexed by `k / lcm(m)`.
///
/// Equal exponents use the alternating closed form; otherwise the
/// inclusion-exclusion recursion peels one reflected variable at a time down
/// to a diagonal base case (one variable, equal exponents, or a coprime pair).
#[allow(non_snake_case)]
pub fn reflection_W(n: usize, m: &[i64], j: usize, k: i64) -> Result<i128, HodgeError> {
    if m.len() != n || j > n {
        return Err(HodgeError::UnsupportedParameters(format!(
            "need j <= n = len(m), got n={n}, j={j}, m={m:?}"
        )));
    }
    let d = lcm_all(m);
    if m.iter().all(|&x| x == m[0]) && n > 0 {
        let mm = m[0];
        let j = j as i64;
        let n = n as i64;
        return Ok((0..=j)
            .map(|i| {
                let t = (1i128 << (j - i)) * binomial(j, i) * diag_equilateral_W(n - i, mm, k);
                if i % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum());
    }
    reflection_count(m, j, Rational::new(k, d))
}

fn reflection_count(m: &[i64], j: usize, w: Rational) -> Result<i128, HodgeError> {
    if w < Rational::zero() {
        return Ok(0);
    }
    if j == 0 {
        return diagonal_count(m, w);
    }
    let mut rest = m.to_vec();
    rest.remove(j - 1);
    Ok(2 * reflection_count(m, j - 1, w)? - reflection_count(&rest, j - 1, w)?)
}

fn diagonal_count(m: &[i64], w: Rational) -> Result<i128, HodgeError> {
    let integral = |x: Rational| x.is_integer().then(|| x.to_integer());
    match m {
        [] => Ok(w.is_zero() as i128),
        [m1] => Ok(integral(w * m1).is_some() as i128),
        _ if m.iter().all(|&x| x == m[0]) => Ok(match integral(w * m[0]) {
            Some(k) => diag_equilateral_W(m.len() as i64, m[0], k),
            None => 0,
        }),
        [m1, m2] if m1.gcd(m2) == 1 => match integral(w * (m1 * m2)) {
            Some(k) => popoviciu_W(*m1, *m2, k),
            None => Ok(0),
        },
        _ => Err(HodgeError::UnsupportedParameters(format!(
            "no diagonal closed form for m = {m:?}"
        ))),
    }
}

/// Weight numbers of `K^j_{n,m}` with all exponents equal to `m`, for `k <= nm`.
#[allow(non_snake_case)]
pub fn kloosterman_equilateral_W(n: i64, m: i64, j: i64, k: i64) -> Result<i128, HodgeError> {
    if j < 1 || j > n {
        return Err(HodgeError::UnsupportedParameters(format!(
            "need 1 <= j <= n, got j={j}, n={n}"
        )));
    }
    if k < 0 || k > n * m {
        return Err(HodgeError::OutOfRange { k, max: n * m });
    }
    let beta = |s: i64| if j == n && s == n { 0 } else { binomial(j, s) };
    let alpha = (j == n && k > 0 && k % m == 0) as i128;
    let mut w = binomial(n - 1 + k, n - 1);
    for s in 1..=j {
        let inner: i128 = (1..=n)
            .map(|l| binomial(k - l * m + n - j - 1, n - s - 1))
            .sum();
        w += beta(s) * inner;
    }
    Ok(w + alpha)
}

fn is_prime(x: i64) -> bool {
    x >= 2 && (2..).take_while(|d| d * d <= x).all(|d| x % d != 0)
}

/// Weight numbers of `K^j_{2,(m1,m2)}` for distinct primes `m1, m2`.
#[allow(non_snake_case)]
pub fn kloosterman_2d_W(m1: i64, m2: i64, j: i64, k: i64) -> Result<i128, HodgeError> {
    if !(is_prime(m1) && is_prime(m2) && m1 != m2) {
        return Err(HodgeError::OutsideValidityDomain(m1, m2));
    }
    if j == 1 {
        let d = m1 * m2;
        if !(0..=2 * d).contains(&k) {
            return Err(HodgeError::OutOfRange { k, max: 2 * d });
        }
        // Points with x < 0 on the facet -x + y/m2: D a + m1 y = k with a >= 1.
        let extra = if k % m1 == 0 { (k / d) as i128 } else { 0 };
        return Ok(popoviciu_W(m1, m2, k)? + extra);
    }
    kloosterman_2d_formula(m1, m2, j, k)
}

/// `d(k)` plus the correction `[gcd(k, m1 m2) > 1]` on `[D, 2D)` and `1 + j`
/// at `2D`, with no validity-domain guard. Exact only for `j = 2` and distinct
/// primes; for `j = 1` the correct term is `[m1 | k] floor(k / D)`, which is
/// what [`kloosterman_2d_W`] uses.
#[allow(non_snake_case)]
pub fn kloosterman_2d_formula(m1: i64, m2: i64, j: i64, k: i64) -> Result<i128, HodgeError> {
    if !(1..=2).contains(&j) {
        return Err(HodgeError::UnsupportedParameters(format!("need j in 1..=2, got {j}")));
    }
    let d = m1 * m2;
    if k < 0 || k > 2 * d {
        return Err(HodgeError::OutOfRange { k, max: 2 * d });
    }
    let base = popoviciu_W(m1, m2, k)?;
    let extra = if k == 2 * d {
        1 + j as i128
    } else if k >= d && k.gcd(&d) > 1 {
        1
    } else {
        0
    };
    Ok(base + extra)
}

/// Vertices of the equilateral diagonal Hodge polygon after the first `j+1`
/// slopes, as `(x_j, y_j)`.
pub fn diag_equilateral_hp_vertex(n: i64, m: i64, j: i64) -> (Rational, Rational) {
    let mut x: i128 = 0;
    let mut y: i128 = 0;
    for i in 0..=Integer::div_floor(&j, &m) {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let c = binomial(n, i);
        x += sign * c * binomial(n + j - i * m, n);
        y += sign * c * (n as i128 * binomial(n + j - i * m, n + 1) + (i * m) as i128 * binomial(n + j - i * m, n));
    }
    (
        Rational::from_integer(x as i64),
        Rational::new(y as i64, m),
    )
}
