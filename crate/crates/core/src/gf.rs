//! Arithmetic in `F_p` and `F_{p^d}`.
//!
//! Elements are packed as integers `c_0 + c_1 p + ... + c_{d-1} p^{d-1}` where
//! `c_i` is the coefficient of `X^i` in the polynomial basis. Small fields get
//! discrete-log tables; larger ones fall back to schoolbook multiplication and
//! F_p-linear "multiply by a constant" matrices for streaming.

use thiserror::Error;

use crate::laurent::LaurentPoly;

/// Largest field order accepted by [`field_create`].
pub const DEFAULT_FIELD_BUDGET: u64 = 1 << 26;
/// Largest field order for which log/antilog tables are built.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field of order {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u64 },
    #[error("evaluation point has a zero coordinate")]
    ZeroCoordinate,
    #[error("degree {sub} does not divide extension degree {ext}")]
    SubfieldMismatch { sub: u32, ext: u32 },
    #[error("only {found} monic irreducibles of degree {d} over F_{p}, index {index} requested")]
    NoSuchModulus { p: u32, d: u32, index: usize, found: usize },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    ArityMismatch { got: usize, expected: usize },
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            out.push(d);
            while x.is_multiple_of(d) {
                x /= d;
            }
        }
        d += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

// --- polynomials over F_p, coefficient vectors low to high, trimmed ---

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(mut a: Vec<u32>, f: &[u32], p: u32) -> Vec<u32> {
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    let p64 = p as u64;
    while a.len() > df {
        let top = a.len() - 1;
        let c = (a[top] as u64 * lead_inv as u64) % p64;
        if c != 0 {
            let shift = top - df;
            for (i, &fi) in f.iter().enumerate() {
                let sub = (c * fi as u64) % p64;
                a[shift + i] = ((a[shift + i] as u64 + p64 - sub) % p64) as u32;
            }
        }
        a.pop();
        a = trim(a);
    }
    trim(a)
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|x| x as u32).collect())
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    poly_rem(poly_mul(a, b, p), f, p)
}

fn poly_powmod(base: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut result = vec![1u32];
    let mut b = poly_rem(base.to_vec(), f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        e >>= 1;
    }
    poly_rem(result, f, p)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    pow_mod(a as u64, p as u64 - 2, p as u64) as u32
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Ben-Or test: `f` of degree `d` is irreducible iff `gcd(x^{p^i} - x, f) = 1`
/// for every `i <= d/2`.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let mut h = poly_rem(x.clone(), f, p);
    for _ in 1..=d / 2 {
        h = poly_powmod(&h, p as u64, f, p);
        let mut diff = h.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(&trim(diff), f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Monic irreducibles of degree `d`, in increasing order of the packed lower
/// coefficients (constant term least significant).
pub fn irreducibles(p: u32, d: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(d);
    (0..count).filter_map(move |code| {
        let mut f = Vec::with_capacity(d as usize + 1);
        let mut c = code;
        for _ in 0..d {
            f.push((c % p as u64) as u32);
            c /= p as u64;
        }
        f.push(1);
        is_irreducible(&f, p).then_some(f)
    })
}

/// Element of a finite field, packed in base `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FieldOptions {
    pub budget: u64,
    pub table_budget: u64,
    /// Which irreducible modulus to use, counting from the smallest.
    pub modulus_index: usize,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            budget: DEFAULT_FIELD_BUDGET,
            table_budget: DEFAULT_TABLE_BUDGET,
            modulus_index: 0,
        }
    }
}

/// A finite field `F_{p^d}` with a fixed modulus and primitive element.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u32,
    d: u32,
    order: u32,
    modulus: Vec<u32>,
    generator: FieldElement,
    log: Option<Vec<u32>>,
    antilog: Option<Vec<u32>>,
    trace_basis: Vec<u32>,
}

/// `F_{p^d}` with the lexicographically smallest monic irreducible modulus.
pub fn field_create(p: u64, d: u32) -> Result<FieldCtx, GfError> {
    FieldCtx::new(p, d, FieldOptions::default())
}

impl FieldCtx {
    pub fn new(p: u64, d: u32, opts: FieldOptions) -> Result<FieldCtx, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        let size = (p as u128).pow(d);
        if size > opts.budget as u128 || size > u32::MAX as u128 {
            return Err(GfError::BudgetExceeded {
                size,
                budget: opts.budget,
            });
        }
        let p = p as u32;
        let mut found = 0;
        let modulus = irreducibles(p, d)
            .inspect(|_| found += 1)
            .nth(opts.modulus_index)
            .ok_or(GfError::NoSuchModulus {
                p,
                d,
                index: opts.modulus_index,
                found,
            })?;
        Ok(Self::with_modulus(p, modulus, opts.table_budget))
    }

    /// Builds the field from an explicit monic irreducible modulus.
    pub fn with_modulus(p: u32, modulus: Vec<u32>, table_budget: u64) -> FieldCtx {
        let d = (modulus.len() - 1) as u32;
        let order = p.pow(d);
        let mut ctx = FieldCtx {
            p,
            d,
            order,
            modulus,
            generator: FieldElement::ONE,
            log: None,
            antilog: None,
            trace_basis: Vec::new(),
        };
        ctx.trace_basis = (0..d)
            .map(|i| {
                let mut c = vec![0u32; d as usize];
                c[i as usize] = 1;
                ctx.trace_frobenius(ctx.element(&c))
            })
            .collect();
        ctx.generator = ctx.find_generator();
        if order as u64 <= table_budget {
            let q1 = (order - 1) as usize;
            let mut antilog = vec![0u32; q1];
            let mut log = vec![0u32; order as usize];
            let mut x = FieldElement::ONE;
            for (e, slot) in antilog.iter_mut().enumerate() {
                *slot = x.0;
                log[x.0 as usize] = e as u32;
                x = ctx.mul_slow(x, ctx.generator);
            }
            ctx.antilog = Some(antilog);
            ctx.log = Some(log);
        }
        ctx
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    pub fn has_tables(&self) -> bool {
        self.log.is_some()
    }

    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        let mut v = x.0;
        (0..self.d)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    /// Packs coefficients (low to high, reduced mod `p`); extra entries must vanish.
    pub fn element(&self, coeffs: &[u32]) -> FieldElement {
        let mut v = 0u32;
        for &c in coeffs.iter().take(self.d as usize).rev() {
            v = v * self.p + c % self.p;
        }
        FieldElement(v)
    }

    pub fn from_int(&self, c: i64) -> FieldElement {
        FieldElement(c.rem_euclid(self.p as i64) as u32)
    }

    fn poly(&self, x: FieldElement) -> Vec<u32> {
        trim(self.coeffs(x))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.d {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place = place.wrapping_mul(self.p);
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let c: Vec<u32> = self.coeffs(a).iter().map(|&c| (self.p - c) % self.p).collect();
        self.element(&c)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    fn mul_slow(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let r = poly_mulmod(&self.poly(a), &self.poly(b), &self.modulus, self.p);
        self.element(&r)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        match (&self.log, &self.antilog) {
            (Some(log), Some(antilog)) => {
                let q1 = self.order as u64 - 1;
                let e = (log[a.0 as usize] as u64 + log[b.0 as usize] as u64) % q1;
                FieldElement(antilog[e as usize])
            }
            _ => self.mul_slow(a, b),
        }
    }

    /// `a^e` for any integer exponent; negative exponents need `a != 0`.
    pub fn pow(&self, a: FieldElement, e: i64) -> FieldElement {
        if a.is_zero() {
            return if e == 0 { FieldElement::ONE } else { FieldElement::ZERO };
        }
        let q1 = self.order as i64 - 1;
        let e = e.rem_euclid(q1) as u64;
        if let (Some(log), Some(antilog)) = (&self.log, &self.antilog) {
            let idx = (log[a.0 as usize] as u64 * e) % q1 as u64;
            return FieldElement(antilog[idx as usize]);
        }
        self.element(&poly_powmod(&self.poly(a), e, &self.modulus, self.p))
    }

    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        (!a.is_zero()).then(|| self.pow(a, -1))
    }

    /// `g^e` for the fixed primitive element `g`.
    pub fn antilog(&self, e: i64) -> FieldElement {
        let q1 = self.order as i64 - 1;
        let e = e.rem_euclid(q1);
        match &self.antilog {
            Some(t) => FieldElement(t[e as usize]),
            None => self.pow(self.generator, e),
        }
    }

    /// Discrete log to base `g`; `None` for zero. Linear scan without tables.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        if let Some(log) = &self.log {
            return Some(log[a.0 as usize]);
        }
        let mul = self.mul_matrix(self.generator);
        let mut x = self.coeffs(FieldElement::ONE);
        let target = self.coeffs(a);
        for e in 0..self.order - 1 {
            if x == target {
                return Some(e);
            }
            x = mul.apply(&x);
        }
        unreachable!("generator has full order")
    }

    /// `Tr(x) = sum_{i<d} x^{p^i}` by repeated Frobenius.
    pub fn trace_frobenius(&self, x: FieldElement) -> u32 {
        let mut acc = FieldElement::ZERO;
        let mut y = x;
        for _ in 0..self.d {
            acc = self.add(acc, y);
            y = self.element(&poly_powmod(&self.poly(y), self.p as u64, &self.modulus, self.p));
        }
        let c = self.coeffs(acc);
        debug_assert!(c.iter().skip(1).all(|&v| v == 0), "trace not in prime field");
        c.first().copied().unwrap_or(0)
    }

    /// Trace via the precomputed traces of the basis `1, X, ..., X^{d-1}`.
    pub fn trace(&self, x: FieldElement) -> u32 {
        let mut v = x.0;
        let mut acc = 0u64;
        for &t in &self.trace_basis {
            acc += (v % self.p) as u64 * t as u64;
            v /= self.p;
        }
        (acc % self.p as u64) as u32
    }

    /// Traces of the basis vectors.
    pub fn trace_basis(&self) -> &[u32] {
        &self.trace_basis
    }

    fn find_generator(&self) -> FieldElement {
        let q1 = self.order as u64 - 1;
        if q1 == 1 {
            return FieldElement::ONE;
        }
        let factors = prime_factors(q1);
        (1..self.order)
            .map(FieldElement)
            .find(|&g| {
                factors.iter().all(|&l| {
                    poly_powmod(&self.poly(g), q1 / l, &self.modulus, self.p) != vec![1]
                })
            })
            .expect("multiplicative group is cyclic")
    }

    /// Matrix of `x -> c*x` on coefficient vectors.
    pub fn mul_matrix(&self, c: FieldElement) -> MulMatrix {
        let d = self.d as usize;
        let mut cols = Vec::with_capacity(d);
        for i in 0..d {
            let mut e = vec![0u32; d];
            e[i] = 1;
            cols.push(self.coeffs(self.mul_slow(c, self.element(&e))));
        }
        let rows = (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect();
        MulMatrix { p: self.p, rows }
    }

    /// All nonzero elements in the order `g^0, g^1, ...`.
    pub fn units(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order as i64 - 1).map(move |e| self.antilog(e))
    }
}

/// F_p-linear map of multiplication by a fixed field element.
#[derive(Debug, Clone)]
pub struct MulMatrix {
    p: u32,
    rows: Vec<Vec<u32>>,
}

impl MulMatrix {
    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        let mut out = vec![0u32; x.len()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[u32], out: &mut [u32]) {
        let p = self.p as u64;
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let s: u64 = row.iter().zip(x).map(|(&a, &b)| a as u64 * b as u64).sum();
            *o = (s % p) as u32;
        }
    }
}

/// Embeds `F_{p^a}` (with its default modulus) into a larger field `F_{p^d}`.
#[derive(Debug, Clone)]
pub struct Embedding {
    a: u32,
    theta: FieldElement,
}

impl Embedding {
    pub fn new(ext: &FieldCtx, a: u32) -> Result<Embedding, GfError> {
        if a == 0 || !ext.degree().is_multiple_of(a) {
            return Err(GfError::SubfieldMismatch {
                sub: a,
                ext: ext.degree(),
            });
        }
        if a == 1 {
            return Ok(Embedding {
                a,
                theta: FieldElement::ZERO,
            });
        }
        let base = irreducibles(ext.p(), a).next().expect("irreducibles exist");
        // roots of the base modulus lie in the unique subfield of order p^a
        let q1 = ext.order() as i64 - 1;
        let sub = (ext.p() as i64).pow(a) - 1;
        let stride = q1 / sub;
        let theta = (0..sub)
            .map(|e| ext.antilog(e * stride))
            .find(|&t| {
                let mut acc = FieldElement::ZERO;
                for &c in base.iter().rev() {
                    acc = ext.add(ext.mul(acc, t), FieldElement(c));
                }
                acc.is_zero()
            })
            .expect("base modulus splits in the extension");
        Ok(Embedding { a, theta })
    }

    pub fn degree(&self) -> u32 {
        self.a
    }

    /// Image of the element with base-`p` digits `digits` (low to high).
    pub fn embed(&self, ext: &FieldCtx, digits: &[i64]) -> FieldElement {
        if self.a == 1 {
            return ext.from_int(digits.first().copied().unwrap_or(0));
        }
        let mut acc = FieldElement::ZERO;
        for &c in digits.iter().take(self.a as usize).rev() {
            acc = ext.add(ext.mul(acc, self.theta), ext.from_int(c));
        }
        acc
    }
}

/// Value of `f` at a torus point; coefficients are read in `F_{p^a}`.
pub fn evaluate(
    ctx: &FieldCtx,
    f: &LaurentPoly,
    a: u32,
    point: &[FieldElement],
) -> Result<FieldElement, GfError> {
    if point.len() != f.n() {
        return Err(GfError::ArityMismatch {
            got: point.len(),
            expected: f.n(),
        });
    }
    if point.iter().any(|x| x.is_zero()) {
        return Err(GfError::ZeroCoordinate);
    }
    let emb = Embedding::new(ctx, a)?;
    let mut acc = FieldElement::ZERO;
    for t in f.terms() {
        let mut v = emb.embed(ctx, &t.coef.digits());
        for (&x, &e) in point.iter().zip(&t.exp) {
            v = ctx.mul(v, ctx.pow(x, e));
        }
        acc = ctx.add(acc, v);
    }
    Ok(acc)
}
