//! Vertical Sato-Tate experiments at prime arguments, Kloosterman sums
//! at composite moduli via twisted multiplicativity, and the large-sums
//! semiprime experiment.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{sieve_primes, PrimeFieldContext};
use crate::primesums::sieve_mu;
use crate::util::{mod_inverse, mod_pow, pairwise_sum_fn};
use crate::weights::{bulk_eval, WeightSpec, WeightTable};

/// Angles of Kl_2 over F_p^x: theta(a) = arccos(Kl_2(a;p) / 2), index
/// a - 1. Clamping only absorbs float error; the Weil bound keeps the
/// true values inside [-2, 2].
pub fn kloosterman_angles(ctx: &PrimeFieldContext) -> Result<Vec<f64>> {
    let table = bulk_eval(ctx, &WeightSpec::HyperKloosterman(2))?;
    Ok((1..ctx.p())
        .map(|a| (table.value(a).re / 2.0).clamp(-1.0, 1.0).acos())
        .collect())
}

/// The Sato-Tate CDF for the SU(2) trace law, F(theta) =
/// (theta - sin theta cos theta) / pi, i.e. the Haar pushforward with
/// density (2/pi) sin^2 theta.
pub fn sato_tate_cdf(theta: f64) -> f64 {
    ((theta - theta.sin() * theta.cos()) / PI).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF. The sample is
/// sorted internally, so input order never matters.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub const HISTOGRAM_BINS: usize = 64;

#[derive(Debug, Serialize)]
pub struct EquidistributionReport {
    pub p: u32,
    pub m: u32,
    pub arguments: String,
    pub sample_size: usize,
    pub ks: f64,
    /// 64 equal bins over [0, pi] (angles, m = 2) or [0, m] (|Kl_m|).
    pub histogram: Vec<u64>,
    pub bin_range: (f64, f64),
}

fn histogram(sample: &[f64], lo: f64, hi: f64) -> Vec<u64> {
    let mut bins = vec![0u64; HISTOGRAM_BINS];
    for &x in sample {
        let t = ((x - lo) / (hi - lo) * HISTOGRAM_BINS as f64).floor();
        let idx = (t.max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        bins[idx] += 1;
    }
    bins
}

/// Equidistribution of the full-group sample: every a in F_p^x. For
/// m = 2 the KS statistic is measured against the analytic trace-law
/// CDF; for m >= 3 the |Kl_m| sample is the baseline itself (KS 0).
pub fn all_arguments_report(ctx: &PrimeFieldContext, m: u32) -> Result<EquidistributionReport> {
    if m == 2 {
        let angles = kloosterman_angles(ctx)?;
        Ok(EquidistributionReport {
            p: ctx.p(),
            m,
            arguments: "all".into(),
            sample_size: angles.len(),
            ks: ks_one_sample(&angles, sato_tate_cdf),
            histogram: histogram(&angles, 0.0, PI),
            bin_range: (0.0, PI),
        })
    } else {
        let sample = kl_abs_sample(ctx, m, None)?;
        Ok(EquidistributionReport {
            p: ctx.p(),
            m,
            arguments: "all".into(),
            sample_size: sample.len(),
            ks: 0.0,
            histogram: histogram(&sample, 0.0, m as f64),
            bin_range: (0.0, m as f64),
        })
    }
}

fn kl_abs_sample(
    ctx: &PrimeFieldContext,
    m: u32,
    args: Option<&[u32]>,
) -> Result<Vec<f64>> {
    let table = bulk_eval(ctx, &WeightSpec::HyperKloosterman(m))?;
    Ok(match args {
        Some(list) => list.iter().map(|&a| table.value(a).norm()).collect(),
        None => (1..ctx.p()).map(|a| table.value(a).norm()).collect(),
    })
}

/// Prime-argument arguments inv(q)^m mod p for primes q in [Q, 2Q],
/// skipping q divisible by p.
fn prime_arguments(ctx: &PrimeFieldContext, m: u32, q_lo: u64) -> Result<Vec<u32>> {
    let p = ctx.p() as u64;
    let mut args = Vec::new();
    for q in sieve_primes(2 * q_lo)? {
        if q < q_lo || q % p == 0 {
            continue;
        }
        let inv = mod_inverse(q % p, p).expect("q coprime to p");
        args.push(mod_pow(inv, m as u64, p) as u32);
    }
    Ok(args)
}

/// Equidistribution of the prime-argument sample a = inv(q)^m for
/// q in [Q, 2Q]. For m = 2 the reference is the analytic CDF; for
/// m >= 3 it is the all-argument empirical law of |Kl_m|.
pub fn prime_argument_sample(
    ctx: &PrimeFieldContext,
    m: u32,
    q_lo: u64,
) -> Result<EquidistributionReport> {
    if q_lo < 2 {
        return Err(Error::validation("prime-argument sample requires Q >= 2"));
    }
    let args = prime_arguments(ctx, m, q_lo)?;
    if args.is_empty() {
        return Err(Error::validation(format!(
            "no usable primes in [{q_lo}, {}]",
            2 * q_lo
        )));
    }
    let descriptor = format!("primes in [{q_lo}, {}]", 2 * q_lo);
    if m == 2 {
        let table = bulk_eval(ctx, &WeightSpec::HyperKloosterman(2))?;
        let sample: Vec<f64> = args
            .iter()
            .map(|&a| (table.value(a).re / 2.0).clamp(-1.0, 1.0).acos())
            .collect();
        Ok(EquidistributionReport {
            p: ctx.p(),
            m,
            arguments: descriptor,
            sample_size: sample.len(),
            ks: ks_one_sample(&sample, sato_tate_cdf),
            histogram: histogram(&sample, 0.0, PI),
            bin_range: (0.0, PI),
        })
    } else {
        let sample = kl_abs_sample(ctx, m, Some(&args))?;
        let baseline = kl_abs_sample(ctx, m, None)?;
        Ok(EquidistributionReport {
            p: ctx.p(),
            m,
            arguments: descriptor,
            sample_size: sample.len(),
            ks: ks_two_sample(&sample, &baseline),
            histogram: histogram(&sample, 0.0, m as f64),
            bin_range: (0.0, m as f64),
        })
    }
}

/// Kl_2(a; c) for any modulus c >= 2 by the direct O(c) sum
/// c^{-1/2} sum over units x of e((a x + inv(x)) / c).
pub fn kloosterman_composite(a: u64, c: u64) -> Result<Complex64> {
    if c < 2 {
        return Err(Error::validation("composite Kloosterman requires c >= 2"));
    }
    let sum = pairwise_sum_fn(c as usize, |x| {
        let x = x as u64;
        match mod_inverse(x, c) {
            Some(xb) => {
                let t = 2.0 * PI * (((a % c) as u128 * x as u128 + xb as u128) % c as u128) as f64
                    / c as f64;
                Complex64::new(t.cos(), t.sin())
            }
            None => Complex64::new(0.0, 0.0),
        }
    });
    Ok(sum / (c as f64).sqrt())
}

/// The twisted-multiplicativity route: Kl_m(1; pq) as
/// Kl_m(inv(q)^m; p) Kl_m(inv(p)^m; q) from per-prime tables.
pub fn kloosterman_semiprime(
    table_p: &WeightTable,
    table_q: &WeightTable,
    m: u32,
) -> Complex64 {
    let (p, q) = (table_p.p as u64, table_q.p as u64);
    let aq = mod_pow(mod_inverse(q % p, p).expect("distinct primes"), m as u64, p);
    let ap = mod_pow(mod_inverse(p % q, q).expect("distinct primes"), m as u64, q);
    table_p.value(aq as u32) * table_q.value(ap as u32)
}

/// Lambda_2 = mu convolved with log^2, by sieve.
pub fn sieve_lambda2(limit: u64) -> Result<Vec<f64>> {
    let n = limit as usize;
    let mu = sieve_mu(limit)?;
    let mut out = vec![0.0; n + 1];
    for d in 1..=n {
        if mu[d] == 0 {
            continue;
        }
        let md = mu[d] as f64;
        let mut c = d;
        let mut q = 1usize;
        while c <= n {
            let lg = (q as f64).ln();
            out[c] += md * lg * lg;
            c += d;
            q += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct LargesumsReport {
    pub x: u64,
    pub delta: f64,
    pub beta: f64,
    pub m: u32,
    pub pairs_total: u64,
    pub qualifying: u64,
    pub proportion: f64,
    /// Sum of Lambda_2(c) |Kl_m(1; c)| over the enumerated semiprimes.
    pub lambda2_mass: f64,
}

/// Budget on the total direct-sum work sum of c over enumerated
/// semiprimes (m = 2 path evaluates each Kl_2(1; c) in O(c)).
const LARGESUMS_WORK_BUDGET: u64 = 2_000_000_000;

/// Enumerates semiprimes c = pq <= X with distinct primes p, q >= X^delta
/// and measures how often |Kl_m(1; c)| >= beta, plus the
/// Lambda_2-weighted mass of the sample.
pub fn largesums_experiment(x: u64, delta: f64, beta: f64, m: u32) -> Result<LargesumsReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::validation("delta must lie in (0, 1/2)"));
    }
    if beta < 0.0 {
        return Err(Error::validation("beta must be nonnegative"));
    }
    if m < 2 {
        return Err(Error::validation("Kloosterman rank m must be >= 2"));
    }
    let lo = (x as f64).powf(delta).ceil() as u64;
    let primes: Vec<u64> = sieve_primes(x / lo.max(1))?
        .into_iter()
        .filter(|&p| p >= lo)
        .collect();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut work: u64 = 0;
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i + 1..] {
            if p * q > x {
                break;
            }
            pairs.push((p, q));
            work += p * q;
        }
    }
    if m == 2 && work > LARGESUMS_WORK_BUDGET {
        return Err(Error::capacity(format!(
            "direct evaluation needs ~{work} operations (sum of c over {} semiprimes), \
             beyond the {LARGESUMS_WORK_BUDGET} budget",
            pairs.len()
        )));
    }
    let lambda2 = sieve_lambda2(x)?;
    let mut tables: HashMap<u64, WeightTable> = HashMap::new();
    if m > 2 {
        for &p in &primes {
            if pairs.iter().any(|&(a, b)| a == p || b == p) {
                let ctx = PrimeFieldContext::new(p)?;
                tables.insert(p, bulk_eval(&ctx, &WeightSpec::HyperKloosterman(m))?);
            }
        }
    }
    let mut qualifying = 0u64;
    let mut mass = 0.0;
    for &(p, q) in &pairs {
        let kl = if m == 2 {
            kloosterman_composite(1, p * q)?.norm()
        } else {
            kloosterman_semiprime(&tables[&p], &tables[&q], m).norm()
        };
        if kl >= beta {
            qualifying += 1;
        }
        mass += lambda2[(p * q) as usize] * kl;
    }
    Ok(LargesumsReport {
        x,
        delta,
        beta,
        m,
        pairs_total: pairs.len() as u64,
        qualifying,
        proportion: if pairs.is_empty() {
            0.0
        } else {
            qualifying as f64 / pairs.len() as f64
        },
        lambda2_mass: mass,
    })
}
