//! The ring `Z[zeta_p]` in the power basis `1, zeta, ..., zeta^{p-2}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    p: u32,
    coeffs: Vec<BigInt>,
}

impl CyclotomicInt {
    pub fn zero(p: u32) -> Self {
        CyclotomicInt {
            p,
            coeffs: vec![BigInt::zero(); p as usize - 1],
        }
    }

    pub fn from_int(p: u32, c: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = c.into();
        z
    }

    pub fn one(p: u32) -> Self {
        Self::from_int(p, 1)
    }

    /// `zeta^e` for any integer `e`.
    pub fn zeta_pow(p: u32, e: i64) -> Self {
        let mut v = vec![BigInt::zero(); p as usize];
        v[e.rem_euclid(p as i64) as usize] = BigInt::one();
        Self::reduce(p, v)
    }

    /// Reduces a vector indexed by exponents `0..p` using `1 + zeta + ... + zeta^{p-1} = 0`.
    pub fn reduce(p: u32, mut v: Vec<BigInt>) -> Self {
        debug_assert_eq!(v.len(), p as usize);
        let top = v.pop().expect("p >= 2");
        for c in v.iter_mut() {
            *c -= &top;
        }
        CyclotomicInt { p, coeffs: v }
    }

    /// `sum_t counts[t] zeta^t`.
    pub fn from_counts<T: Copy + Into<BigInt>>(p: u32, counts: &[T]) -> Self {
        Self::reduce(p, counts.iter().map(|&c| c.into()).collect())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Rational integer value, if the element lies in `Z`.
    pub fn as_integer(&self) -> Option<&BigInt> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| &self.coeffs[0])
    }

    /// Exact division by a rational integer.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(CyclotomicInt {
            p: self.p,
            coeffs: out,
        })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Decimal strings of the coefficients, for serialization.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    /// Absolute norm `N(C) = Res(g, Phi_p)` where `C = g(zeta)`, up to sign.
    pub fn norm_abs(&self) -> BigInt {
        if self.p == 2 {
            return self.coeffs[0].abs();
        }
        let g = trimmed(&self.coeffs);
        if g.is_empty() {
            return BigInt::zero();
        }
        if g.len() == 1 {
            return num_traits::pow(g[0].abs(), self.p as usize - 1);
        }
        let phi = vec![BigInt::one(); self.p as usize];
        resultant(&g, &phi).abs()
    }

    /// `v_pi(C)` for `pi = 1 - zeta`; `None` for zero.
    pub fn pi_valuation(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut n = self.norm_abs();
        let p = BigInt::from(self.p);
        let mut v = 0;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                return Some(v);
            }
            n = q;
            v += 1;
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing cyclotomic rings");
    }
}

fn trimmed(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = v.to_vec();
    while g.last().is_some_and(Zero::is_zero) {
        g.pop();
    }
    g
}

/// Resultant of two integer polynomials (low-to-high coefficients) as the
/// determinant of their Sylvester matrix, by fraction-free elimination.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let mut a = vec![vec![BigInt::zero(); size]; size];
    for r in 0..n {
        for (i, c) in f.iter().rev().enumerate() {
            a[r][r + i] = c.clone();
        }
    }
    for r in 0..m {
        for (i, c) in g.iter().rev().enumerate() {
            a[n + r][r + i] = c.clone();
        }
    }
    bareiss_det(a)
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl Add for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn add(self, o: &CyclotomicInt) -> CyclotomicInt {
        self.check(o);
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn sub(self, o: &CyclotomicInt) -> CyclotomicInt {
        self.check(o);
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn mul(self, o: &CyclotomicInt) -> CyclotomicInt {
        self.check(o);
        let p = self.p as usize;
        let mut v = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[(i + j) % p] += a * b;
            }
        }
        CyclotomicInt::reduce(self.p, v)
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*z")?,
                _ => write!(f, "{c}*z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
