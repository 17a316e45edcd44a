//! Exhaustive trace-value counts over the torus `(F_Q^*)^n`.
//!
//! Every torus point is `g^a` for an exponent vector `a`, so
//! `Tr f(g^a) = sum_j Tr(g^{L_j + <V_j, a>})` with `L_j = log c_j`. A table of
//! `Tr(g^e)` turns evaluation into index arithmetic. Since `Tr(y^q) = Tr(y)`
//! and the coefficients lie in `F_q`, the outer exponent only needs one
//! representative per orbit of multiplication by `q`.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use super::{EngineConfig, ZetaError};
use crate::gf::{Embedding, FieldCtx, FieldElement};
use crate::laurent::LaurentPoly;

const CHUNK: u64 = 1 << 14;

/// `counts[t]` = number of torus points with `Tr f = t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceProfile {
    pub p: u32,
    pub counts: Vec<u128>,
}

impl TraceProfile {
    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    /// Profile of `f + g` for `f`, `g` in disjoint variables.
    pub fn convolve(&self, other: &TraceProfile) -> TraceProfile {
        let p = self.p as usize;
        let mut counts = vec![0u128; p];
        for (s, &a) in self.counts.iter().enumerate() {
            for (t, &b) in other.counts.iter().enumerate() {
                counts[(s + t) % p] += a * b;
            }
        }
        TraceProfile { p: self.p, counts }
    }
}

/// Traces of `g^e` for `e` in `0..Q-1`, narrow when `p` allows.
pub(crate) enum TraceTable {
    Narrow(Vec<u8>),
    Wide(Vec<u16>),
}

impl TraceTable {
    pub(crate) fn build(ctx: &FieldCtx) -> Result<TraceTable, ZetaError> {
        if ctx.p() < 256 {
            Ok(TraceTable::Narrow(trace_table(ctx, |t| t as u8)))
        } else if ctx.p() < 65536 {
            Ok(TraceTable::Wide(trace_table(ctx, |t| t as u16)))
        } else {
            Err(ZetaError::Unsupported(format!(
                "characteristic {} too large for trace tables",
                ctx.p()
            )))
        }
    }
}

fn trace_table<T: Send + Copy + Default>(ctx: &FieldCtx, narrow: impl Fn(u32) -> T + Sync) -> Vec<T> {
    let q1 = ctx.order() as u64 - 1;
    let mut out = vec![T::default(); q1 as usize];
    if ctx.has_tables() {
        out.par_iter_mut().enumerate().for_each(|(e, slot)| {
            *slot = narrow(ctx.trace(ctx.antilog(e as i64)));
        });
        return out;
    }
    let step = ctx.mul_matrix(ctx.generator());
    out.par_chunks_mut(CHUNK as usize)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let start = ctx.antilog(ci as i64 * CHUNK as i64);
            stream_traces(ctx, start, &step, chunk.len() as u64, |i, t| chunk[i as usize] = narrow(t));
        });
    out
}

/// Visits `Tr(start * s^i)` for `i < count`, where `step` multiplies by `s`.
fn stream_traces(
    ctx: &FieldCtx,
    start: FieldElement,
    step: &crate::gf::MulMatrix,
    count: u64,
    mut visit: impl FnMut(u64, u32),
) {
    let basis = ctx.trace_basis();
    let p = ctx.p() as u64;
    let mut x = ctx.coeffs(start);
    let mut y = vec![0u32; x.len()];
    for i in 0..count {
        let t: u64 = x.iter().zip(basis).map(|(&a, &b)| a as u64 * b as u64).sum();
        visit(i, (t % p) as u32);
        step.apply_into(&x, &mut y);
        std::mem::swap(&mut x, &mut y);
    }
}

/// Nonzero coefficients embedded in `ctx`, paired with their exponents.
pub(crate) fn embedded_terms(
    f: &LaurentPoly,
    a: u32,
    ctx: &FieldCtx,
) -> Result<Vec<(FieldElement, Vec<i64>)>, ZetaError> {
    let emb = Embedding::new(ctx, a)?;
    Ok(f.terms()
        .iter()
        .map(|t| (emb.embed(ctx, &t.coef.digits()), t.exp.clone()))
        .filter(|(c, _)| !c.is_zero())
        .collect())
}

/// Exact trace profile of `f` over the torus of `ctx`, where the coefficients
/// of `f` live in the subfield of degree `a`.
pub fn trace_counts(
    f: &LaurentPoly,
    a: u32,
    ctx: &FieldCtx,
    cfg: &EngineConfig,
) -> Result<TraceProfile, ZetaError> {
    cfg.install(|| trace_counts_inner(f, a, ctx, cfg))?
}

fn trace_counts_inner(
    f: &LaurentPoly,
    a: u32,
    ctx: &FieldCtx,
    cfg: &EngineConfig,
) -> Result<TraceProfile, ZetaError> {
    let q1 = ctx.order() as u128 - 1;
    if q1.checked_pow(f.n() as u32).is_none_or(|v| v > u128::MAX / ctx.p() as u128) {
        return Err(ZetaError::BudgetExceeded {
            evaluations: u128::MAX,
            budget: cfg.eval_budget,
        });
    }
    if f.n() > 1 {
        if let Some(parts) = f.univariate_parts() {
            let mut acc: Option<TraceProfile> = None;
            for g in parts {
                let prof = univariate_counts(&embedded_terms(&g, a, ctx)?, ctx, cfg)?;
                acc = Some(match acc {
                    None => prof,
                    Some(prev) => prev.convolve(&prof),
                });
            }
            return Ok(acc.expect("n >= 1"));
        }
        return generic_counts(&embedded_terms(f, a, ctx)?, f.n(), a, ctx, cfg);
    }
    univariate_counts(&embedded_terms(f, a, ctx)?, ctx, cfg)
}

fn over_budget(evaluations: u128, cfg: &EngineConfig) -> Result<(), ZetaError> {
    if evaluations > cfg.eval_budget as u128 {
        return Err(ZetaError::BudgetExceeded {
            evaluations,
            budget: cfg.eval_budget,
        });
    }
    Ok(())
}

/// One-variable profile. A single monomial `c x^e` only needs the subgroup
/// of index `gcd(e, Q-1)`; anything else scans the whole group.
pub(crate) fn univariate_counts(
    terms: &[(FieldElement, Vec<i64>)],
    ctx: &FieldCtx,
    cfg: &EngineConfig,
) -> Result<TraceProfile, ZetaError> {
    let p = ctx.p();
    let q1 = ctx.order() as u64 - 1;
    let mut counts = vec![0u128; p as usize];
    match terms {
        [] => counts[0] = q1 as u128,
        [(c, e)] => {
            let d = (e[0].rem_euclid(q1 as i64) as u64).gcd(&q1);
            let steps = q1 / d;
            over_budget(steps as u128, cfg)?;
            let g_d = ctx.antilog(d as i64);
            let chunks = steps.div_ceil(CHUNK);
            let step = ctx.mul_matrix(g_d);
            let partial: Vec<u64> = (0..chunks)
                .into_par_iter()
                .fold(
                    || vec![0u64; p as usize],
                    |mut acc, ci| {
                        let start = ctx.mul(*c, ctx.pow(g_d, (ci * CHUNK) as i64));
                        let len = CHUNK.min(steps - ci * CHUNK);
                        if ctx.has_tables() {
                            let lc = ctx.log(start).expect("nonzero") as u64;
                            for i in 0..len {
                                let x = ctx.antilog(((lc + i * d) % q1) as i64);
                                acc[ctx.trace(x) as usize] += 1;
                            }
                        } else {
                            stream_traces(ctx, start, &step, len, |_, t| acc[t as usize] += 1);
                        }
                        acc
                    },
                )
                .reduce(|| vec![0u64; p as usize], add_vec);
            for (slot, v) in counts.iter_mut().zip(partial) {
                *slot = v as u128 * d as u128;
            }
        }
        _ => return generic_counts(terms, 1, 0, ctx, cfg),
    }
    Ok(TraceProfile { p, counts })
}

fn add_vec(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Orbit representatives of `x -> m x` on `Z/q1` with orbit sizes.
fn orbit_reps(m: u64, q1: u64) -> Vec<(u64, u64)> {
    let mut seen = vec![false; q1 as usize];
    let mut reps = Vec::new();
    for r in 0..q1 {
        if seen[r as usize] {
            continue;
        }
        let mut x = r;
        let mut size = 0;
        while !seen[x as usize] {
            seen[x as usize] = true;
            size += 1;
            x = (x as u128 * m as u128 % q1 as u128) as u64;
        }
        reps.push((r, size));
    }
    reps
}

/// Brute force over all torus points. With `a = 0` no Frobenius reduction is used.
fn generic_counts(
    terms: &[(FieldElement, Vec<i64>)],
    n: usize,
    a: u32,
    ctx: &FieldCtx,
    cfg: &EngineConfig,
) -> Result<TraceProfile, ZetaError> {
    let p = ctx.p();
    let q1 = ctx.order() as u64 - 1;
    let reps = if a == 0 || n == 1 {
        (0..q1).map(|r| (r, 1)).collect()
    } else {
        orbit_reps((p as u64).pow(a) % q1, q1)
    };
    let evaluations = reps.len() as u128 * (q1 as u128).pow(n as u32 - 1);
    over_budget(evaluations, cfg)?;
    let table = TraceTable::build(ctx)?;
    let logs: Vec<u64> = terms
        .iter()
        .map(|(c, _)| ctx.log(*c).expect("nonzero coefficient") as u64)
        .collect();
    let exps: Vec<Vec<u64>> = terms
        .iter()
        .map(|(_, e)| e.iter().map(|&v| v.rem_euclid(q1 as i64) as u64).collect())
        .collect();
    let job = Job {
        n,
        q1,
        logs: &logs,
        exps: &exps,
        width: terms.len() * (p as usize - 1) + 1,
    };
    let raw = match &table {
        TraceTable::Narrow(t) => job.run(t, &reps),
        TraceTable::Wide(t) => job.run(t, &reps),
    };
    let mut counts = vec![0u128; p as usize];
    for (s, v) in raw.into_iter().enumerate() {
        counts[s % p as usize] += v;
    }
    Ok(TraceProfile { p, counts })
}

struct Job<'a> {
    n: usize,
    q1: u64,
    logs: &'a [u64],
    exps: &'a [Vec<u64>],
    width: usize,
}

impl Job<'_> {
    /// Histogram of raw trace sums (before reduction mod p).
    fn run<T: Copy + Into<u32> + Sync>(&self, table: &[T], reps: &[(u64, u64)]) -> Vec<u128> {
        reps.par_iter()
            .fold(
                || vec![0u128; self.width],
                |mut acc, &(r, weight)| {
                    let hist = self.slice(table, r);
                    for (slot, h) in acc.iter_mut().zip(hist) {
                        *slot += h as u128 * weight as u128;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u128; self.width],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    }

    /// All points whose first exponent is `first`.
    fn slice<T: Copy + Into<u32>>(&self, table: &[T], first: u64) -> Vec<u64> {
        let (n, q1) = (self.n, self.q1);
        let jn = self.logs.len();
        let mut hist = vec![0u64; self.width];
        let mut coords = vec![0u64; n];
        coords[0] = first;
        let last = n - 1;
        let steps: Vec<u64> = self.exps.iter().map(|e| e[last]).collect();
        let mut idx = vec![0u64; jn];
        loop {
            for j in 0..jn {
                let mut s = self.logs[j];
                for i in 0..last.max(1) {
                    s += (self.exps[j][i] as u128 * coords[i] as u128 % q1 as u128) as u64;
                }
                idx[j] = s % q1;
            }
            if last == 0 {
                let mut s = 0u32;
                for &ix in &idx {
                    s += table[ix as usize].into();
                }
                hist[s as usize] += 1;
                return hist;
            }
            let mut fixed = 0u32;
            let mut moving = Vec::with_capacity(jn);
            for j in 0..jn {
                if steps[j] == 0 {
                    fixed += table[idx[j] as usize].into();
                } else {
                    moving.push((idx[j], steps[j]));
                }
            }
            sweep(table, q1, fixed, &moving, &mut hist);
            // advance the middle coordinates
            let mut i = last - 1;
            loop {
                if i == 0 {
                    return hist;
                }
                coords[i] += 1;
                if coords[i] < q1 {
                    break;
                }
                coords[i] = 0;
                i -= 1;
            }
        }
    }
}

/// Histogram of `fixed + sum_j table[i_j + b s_j]` over `b` in `0..q1`.
fn sweep<T: Copy + Into<u32>>(table: &[T], q1: u64, fixed: u32, moving: &[(u64, u64)], hist: &mut [u64]) {
    let at = |i: u64| -> u32 { table[i as usize].into() };
    let bump = |i: &mut u64, s: u64| {
        *i += s;
        if *i >= q1 {
            *i -= q1;
        }
    };
    match *moving {
        [] => hist[fixed as usize] += q1,
        [(mut i0, s0)] => {
            for _ in 0..q1 {
                hist[(fixed + at(i0)) as usize] += 1;
                bump(&mut i0, s0);
            }
        }
        [(mut i0, s0), (mut i1, s1)] => {
            for _ in 0..q1 {
                hist[(fixed + at(i0) + at(i1)) as usize] += 1;
                bump(&mut i0, s0);
                bump(&mut i1, s1);
            }
        }
        _ => {
            let mut idx: Vec<(u64, u64)> = moving.to_vec();
            for _ in 0..q1 {
                let mut s = fixed;
                for (i, step) in idx.iter_mut() {
                    s += at(*i);
                    bump(i, *step);
                }
                hist[s as usize] += 1;
            }
        }
    }
}
