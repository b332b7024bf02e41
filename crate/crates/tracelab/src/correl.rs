//! Correlation sums C(m1, m2, h, K), the completion bound for
//! incomplete correlations, and the paucity scan over all (m, h) pairs.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::PrimeFieldContext;
use crate::util::pairwise_sum_fn;
use crate::weights::WeightTable;

/// Default gate for the O(p^2 log p) full scan.
pub const PAUCITY_SCAN_MAX_P: u32 = 1 << 12;

/// One threshold-exceeding pair of the scan. h is reported in the
/// symmetric residue system (-p/2, p/2].
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalPair {
    pub m: u32,
    pub h: i64,
    pub abs_c: f64,
}

#[derive(Debug, Serialize)]
pub struct CorrelationReport {
    pub p: u32,
    pub weight_spec: Option<String>,
    pub threshold: f64,
    pub exceptional: Vec<ExceptionalPair>,
    pub max_abs_c: f64,
    pub scanned: u64,
}

/// Symmetric residue of h mod p, in (-p/2, p/2].
pub fn symmetric_residue(h: u32, p: u32) -> i64 {
    if h as i64 * 2 > p as i64 {
        h as i64 - p as i64
    } else {
        h as i64
    }
}

/// C(m1, m2, h, K) = sum_z conj(K(m1 z)) K(m2 z) e(hz/p), the full sum
/// over z in F_p.
pub fn correlation_sum(
    ctx: &PrimeFieldContext,
    table: &WeightTable,
    m1: u32,
    m2: u32,
    h: i64,
) -> Result<Complex64> {
    let p = ctx.p();
    if m1 == 0 || m1 >= p || m2 == 0 || m2 >= p {
        return Err(Error::domain(format!(
            "correlation_sum requires m1, m2 in F_p^x, got ({m1}, {m2})"
        )));
    }
    let hm = h.rem_euclid(p as i64) as u64;
    Ok(pairwise_sum_fn(p as usize, |z| {
        let z = z as u32;
        table.value(ctx.mul(m1, z)).conj()
            * table.value(ctx.mul(m2, z))
            * ctx.additive_char((hm * z as u64 % p as u64) as u32)
    }))
}

/// One h-row of correlations at fixed (m1, m2): C(m1, m2, h) for every
/// h in F_p, computed as the unnormalized e(+hz/p) transform of
/// z -> conj(K(m1 z)) K(m2 z).
pub fn correlation_row(
    ctx: &PrimeFieldContext,
    table: &WeightTable,
    m1: u32,
    m2: u32,
) -> Result<Vec<Complex64>> {
    let p = ctx.p();
    if m1 == 0 || m1 >= p || m2 == 0 || m2 >= p {
        return Err(Error::domain(format!(
            "correlation_row requires m1, m2 in F_p^x, got ({m1}, {m2})"
        )));
    }
    let mut buf: Vec<Complex64> = (0..p)
        .map(|z| table.value(ctx.mul(m1, z)).conj() * table.value(ctx.mul(m2, z)))
        .collect();
    FftPlanner::<f64>::new()
        .plan_fft_inverse(p as usize)
        .process(&mut buf);
    Ok(buf)
}

/// Scans |C(m, 1, h)| over all (m, h) in F_p^x x F_p and reports the
/// pairs exceeding threshold_multiplier * sqrt(p), sorted by descending
/// |C|. One FFT per m row; rows run in parallel and the merge order is
/// fixed, so the report is independent of thread count.
pub fn paucity_scan(
    ctx: &PrimeFieldContext,
    table: &WeightTable,
    threshold_multiplier: f64,
    max_p: Option<u32>,
) -> Result<CorrelationReport> {
    let p = ctx.p();
    let gate = max_p.unwrap_or(PAUCITY_SCAN_MAX_P);
    if p > gate {
        return Err(Error::capacity(format!(
            "paucity scan is O(p^2 log p); p = {p} exceeds the gate {gate} \
             (override with an explicit cap)"
        )));
    }
    let threshold = threshold_multiplier * (p as f64).sqrt();
    let rows: Vec<(Vec<ExceptionalPair>, f64)> = (1..p)
        .into_par_iter()
        .map(|m| {
            let row = correlation_row(ctx, table, m, 1).expect("m in range");
            let mut hits = Vec::new();
            let mut row_max = 0.0f64;
            for (h, c) in row.iter().enumerate() {
                let a = c.norm();
                row_max = row_max.max(a);
                if a > threshold {
                    hits.push(ExceptionalPair {
                        m,
                        h: symmetric_residue(h as u32, p),
                        abs_c: a,
                    });
                }
            }
            (hits, row_max)
        })
        .collect();
    let mut exceptional = Vec::new();
    let mut max_abs_c = 0.0f64;
    for (hits, row_max) in rows {
        exceptional.extend(hits);
        max_abs_c = max_abs_c.max(row_max);
    }
    exceptional.sort_by(|a, b| {
        b.abs_c
            .partial_cmp(&a.abs_c)
            .unwrap()
            .then(a.m.cmp(&b.m))
            .then(a.h.cmp(&b.h))
    });
    Ok(CorrelationReport {
        p,
        weight_spec: table.spec.as_ref().map(|s| s.to_sexpr()),
        threshold: threshold_multiplier,
        exceptional,
        max_abs_c,
        scanned: (p as u64 - 1) * p as u64,
    })
}

/// The literal incomplete correlation over integers n in
/// [ceil(N/2), 2N], arguments reduced mod p.
pub fn incomplete_correlation(
    ctx: &PrimeFieldContext,
    table: &WeightTable,
    m1: u32,
    m2: u32,
    n_len: u32,
) -> Result<Complex64> {
    let p = ctx.p();
    if n_len == 0 || n_len > p {
        return Err(Error::validation(format!(
            "incomplete_correlation requires 1 <= N <= p, got {n_len}"
        )));
    }
    if m1 == 0 || m1 >= p || m2 == 0 || m2 >= p {
        return Err(Error::domain(format!(
            "incomplete_correlation requires m1, m2 in F_p^x, got ({m1}, {m2})"
        )));
    }
    let lo = n_len.div_ceil(2) as u64;
    let hi = 2 * n_len as u64;
    Ok(pairwise_sum_fn((hi - lo + 1) as usize, |i| {
        let n = lo + i as u64;
        table.value_int(m1 as u64 * n).conj() * table.value_int(m2 as u64 * n)
    }))
}

/// Completion bound for the incomplete correlation:
/// (N/p)|C(m1,m2,0)| + sum over 0 < |h| <= p/2 of min(1/|h|, N/p)|C(m1,m2,h)|.
pub fn completion_bound(
    ctx: &PrimeFieldContext,
    table: &WeightTable,
    m1: u32,
    m2: u32,
    n_len: u32,
) -> Result<f64> {
    let p = ctx.p();
    if n_len == 0 || n_len > p {
        return Err(Error::validation(format!(
            "completion_bound requires 1 <= N <= p, got {n_len}"
        )));
    }
    let row = correlation_row(ctx, table, m1, m2)?;
    let ratio = n_len as f64 / p as f64;
    let mut bound = ratio * row[0].norm();
    for h in 1..p {
        let hs = symmetric_residue(h, p);
        bound += (1.0 / hs.unsigned_abs() as f64).min(ratio) * row[h as usize].norm();
    }
    Ok(bound)
}
