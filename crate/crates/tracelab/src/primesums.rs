//! Sums of trace weights over primes, Moebius and von Mangoldt supports,
//! smoothed variants with admissible test functions, Eisenstein twists by
//! d_it, the amplifier, and exact arithmetic-progression error terms.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{sieve_primes, PrimeFieldContext};
use crate::util::{pairwise_sum_f64, pairwise_sum_fn, pairwise_sum_fn_f64};
use crate::weights::WeightTable;

/// A smooth compactly supported test function on [0, infinity).
#[derive(Clone)]
pub struct TestFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub support: (f64, f64),
    /// Smoothness scale: |x^j V^(j)(x)| <= c_j Q^j.
    pub q: f64,
}

impl TestFunction {
    pub fn new(
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: (f64, f64),
        q: f64,
    ) -> Self {
        TestFunction { eval, support, q }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
}

fn mollifier(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Normalized antiderivative of the mollifier on [-1, 1], precomputed once
/// on a fine grid and evaluated by cubic Hermite interpolation (the node
/// derivatives are the mollifier itself, so the interpolant is C^1 and
/// accurate to ~1e-15).
struct RampCdf {
    vals: Vec<f64>,
    derivs: Vec<f64>,
    h: f64,
}

const RAMP_NODES: usize = 4096;

impl RampCdf {
    fn build() -> Self {
        let n = RAMP_NODES;
        let h = 2.0 / n as f64;
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = -1.0 + i as f64 * h;
            // Simpson on each subinterval
            acc += h / 6.0 * (mollifier(a) + 4.0 * mollifier(a + h / 2.0) + mollifier(a + h));
            vals.push(acc);
        }
        let total = acc;
        for v in &mut vals {
            *v /= total;
        }
        let derivs: Vec<f64> = (0..=n)
            .map(|i| mollifier(-1.0 + i as f64 * h) / total)
            .collect();
        RampCdf { vals, derivs, h }
    }

    fn eval(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let u = (s + 1.0) / self.h;
        let i = (u.floor() as usize).min(RAMP_NODES - 1);
        let t = u - i as f64;
        let (y0, y1) = (self.vals[i], self.vals[i + 1]);
        let (m0, m1) = (self.derivs[i] * self.h, self.derivs[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }
}

fn ramp_cdf() -> &'static RampCdf {
    static CDF: OnceLock<RampCdf> = OnceLock::new();
    CDF.get_or_init(RampCdf::build)
}

/// Smooth decreasing cutoff: 1 for x <= 1, 0 for x >= 2, a mollifier ramp
/// in between. The dyadic partition of unity is built from this.
pub fn smooth_cutoff(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        1.0 - ramp_cdf().eval(2.0 * (x - 1.5))
    }
}

/// Bump equal to 1 on [1, 2], vanishing outside [1 - delta, 2 + delta],
/// with mollifier ramps. Q = delta^{-1}.
pub fn make_bump(delta: f64) -> Result<TestFunction> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!(
            "bump width must satisfy 0 < delta < 1, got {delta}"
        )));
    }
    let half = delta / 2.0;
    let eval = Arc::new(move |x: f64| -> f64 {
        if x <= 1.0 - delta || x >= 2.0 + delta {
            0.0
        } else if (1.0..=2.0).contains(&x) {
            1.0
        } else if x < 1.0 {
            ramp_cdf().eval((x - (1.0 - half)) / half)
        } else {
            1.0 - ramp_cdf().eval((x - (2.0 + half)) / half)
        }
    });
    Ok(TestFunction::new(eval, (1.0 - delta, 2.0 + delta), 1.0 / delta))
}

/// A weighted sum packaged with the trivial bound, the bound template
/// evaluated with constant 1, and the observed savings exponent
/// log(trivial / |sum|) / log p.
#[derive(Debug, Serialize)]
pub struct SumReport {
    pub p: u32,
    pub x: u64,
    pub weight_spec: Option<String>,
    pub sum_re: f64,
    pub sum_im: f64,
    pub trivial_bound: f64,
    pub template_bound: f64,
    pub savings_exponent: Option<f64>,
}

impl SumReport {
    fn new(table: &WeightTable, x: u64, sum: Complex64, trivial: f64, template: f64) -> Self {
        let savings = if sum.norm() > 0.0 {
            Some((trivial / sum.norm()).ln() / (table.p as f64).ln())
        } else {
            None
        };
        SumReport {
            p: table.p,
            x,
            weight_spec: table.spec.as_ref().map(|s| s.to_sexpr()),
            sum_re: sum.re,
            sum_im: sum.im,
            trivial_bound: trivial,
            template_bound: template,
            savings_exponent: savings,
        }
    }
}

/// Bound template for sums over primes up to X: X (1 + p/X)^{1/12} p^{-eta/2}
/// with eta a hair below 1/24 (the supremum is open).
pub fn prime_sum_template(p: u32, x: u64) -> f64 {
    let eta = 1.0 / 24.0 - 1e-6;
    let (pf, xf) = (p as f64, x as f64);
    xf * (1.0 + pf / xf).powf(1.0 / 12.0) * pf.powf(-eta / 2.0)
}

/// Eisenstein-twist template: Q X (1 + p/X)^{1/2} p^{-eta}, eta a hair
/// below 1/8.
pub fn eisenstein_template(p: u32, x: f64, q: f64) -> f64 {
    let eta = 1.0 / 8.0 - 1e-6;
    let pf = p as f64;
    q * x * (1.0 + pf / x).powf(0.5) * pf.powf(-eta)
}

/// Sum of K(q) over primes q <= X.
pub fn prime_sum(table: &WeightTable, x: u64) -> Result<SumReport> {
    if x < 2 {
        return Err(Error::validation("prime sum requires X >= 2"));
    }
    let primes = sieve_primes(x)?;
    let sum = pairwise_sum_fn(primes.len(), |i| table.value_int(primes[i]));
    let trivial = primes.len() as f64 * table.max_abs();
    Ok(SumReport::new(table, x, sum, trivial, prime_sum_template(table.p, x)))
}

/// Moebius function on 0..=limit by a sieve pass.
pub fn sieve_mu(limit: u64) -> Result<Vec<i8>> {
    let primes = sieve_primes((limit as f64).sqrt() as u64 + 1)?;
    let n = limit as usize;
    let mut mu = vec![1i8; n + 1];
    mu[0] = 0;
    let mut rem: Vec<u64> = (0..=limit).collect();
    for &q in &primes {
        let mut m = q as usize;
        while m <= n {
            mu[m] = -mu[m];
            rem[m] /= q;
            m += q as usize;
        }
        let q2 = (q * q) as usize;
        if q2 <= n {
            let mut m = q2;
            while m <= n {
                mu[m] = 0;
                m += q2;
            }
        }
    }
    // a leftover factor > sqrt(limit) is one extra prime
    for m in 2..=n {
        if rem[m] > 1 {
            mu[m] = -mu[m];
        }
    }
    Ok(mu)
}

/// Von Mangoldt function on 0..=limit: log q at prime powers q^k, else 0.
pub fn sieve_vonmangoldt(limit: u64) -> Result<Vec<f64>> {
    let primes = sieve_primes(limit)?;
    let mut lam = vec![0.0; limit as usize + 1];
    for &q in &primes {
        let lq = (q as f64).ln();
        let mut m = q;
        loop {
            lam[m as usize] = lq;
            match m.checked_mul(q) {
                Some(next) if next <= limit => m = next,
                _ => break,
            }
        }
    }
    Ok(lam)
}

/// Sum of mu(n) K(n) over n <= X.
pub fn mobius_sum(table: &WeightTable, x: u64) -> Result<SumReport> {
    if x < 2 {
        return Err(Error::validation("Moebius sum requires X >= 2"));
    }
    let mu = sieve_mu(x)?;
    let sum = pairwise_sum_fn(x as usize + 1, |n| match mu[n] {
        0 => Complex64::new(0.0, 0.0),
        1 => table.value_int(n as u64),
        _ => -table.value_int(n as u64),
    });
    let squarefree = mu.iter().filter(|&&m| m != 0).count();
    let trivial = squarefree as f64 * table.max_abs();
    Ok(SumReport::new(table, x, sum, trivial, prime_sum_template(table.p, x)))
}

/// Sum of Lambda(n) K(n) over n <= X.
pub fn vonmangoldt_sum(table: &WeightTable, x: u64) -> Result<SumReport> {
    if x < 2 {
        return Err(Error::validation("von Mangoldt sum requires X >= 2"));
    }
    let lam = sieve_vonmangoldt(x)?;
    let sum = pairwise_sum_fn(x as usize + 1, |n| lam[n] * table.value_int(n as u64));
    let trivial: f64 = pairwise_sum_f64(&lam) * table.max_abs();
    Ok(SumReport::new(table, x, sum, trivial, prime_sum_template(table.p, x)))
}

/// Smoothed prime sum: sum over primes q of K(q) V(q/X).
pub fn smoothed_sum(table: &WeightTable, v: &TestFunction, x: u64) -> Result<Complex64> {
    if x < 2 {
        return Err(Error::validation("smoothed sum requires X >= 2"));
    }
    let hi = (v.support.1 * x as f64).ceil() as u64;
    let primes = sieve_primes(hi)?;
    let lo = v.support.0 * x as f64;
    Ok(pairwise_sum_fn(primes.len(), |i| {
        let q = primes[i];
        if (q as f64) < lo {
            return Complex64::new(0.0, 0.0);
        }
        let w = v.eval(q as f64 / x as f64);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            w * table.value_int(q)
        }
    }))
}

/// Twisted divisor function d_it(n) = sum over ab = n of (a/b)^{it}.
/// Real by the (a, b) <-> (b, a) pairing.
pub fn twisted_divisor(n: u64, t: f64) -> f64 {
    let mut s = 0.0;
    let mut a = 1u64;
    while a * a <= n {
        if n % a == 0 {
            let b = n / a;
            if a == b {
                s += 1.0;
            } else {
                s += 2.0 * (t * (a as f64 / b as f64).ln()).cos();
            }
        }
        a += 1;
    }
    s
}

/// Eisenstein twist: sum over n of K(n) d_it(n) V(n/X).
pub fn eisenstein_twist(
    table: &WeightTable,
    v: &TestFunction,
    x: f64,
    t: f64,
) -> Result<Complex64> {
    if x < 1.0 {
        return Err(Error::validation("Eisenstein twist requires X >= 1"));
    }
    let lo = (v.support.0 * x).floor().max(1.0) as u64;
    let hi = (v.support.1 * x).ceil() as u64;
    if hi.saturating_sub(lo) > (1 << 26) {
        return Err(Error::capacity(format!(
            "Eisenstein twist range [{lo}, {hi}] exceeds the direct-sum budget"
        )));
    }
    Ok(pairwise_sum_fn((hi - lo + 1) as usize, |i| {
        let n = lo + i as u64;
        let w = v.eval(n as f64 / x);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            w * twisted_divisor(n, t) * table.value_int(n)
        }
    }))
}

/// Amplifier B_{i tau}(it) = sum over primes l <= 2L of
/// sign(d_{i tau}(l)) d_it(l).
pub fn amplifier(l_len: u64, tau: f64, t: f64) -> Result<f64> {
    if l_len < 1 {
        return Err(Error::validation("amplifier requires L >= 1"));
    }
    let primes = sieve_primes(2 * l_len)?;
    Ok(pairwise_sum_fn_f64(primes.len(), |i| {
        let ll = (primes[i] as f64).ln();
        let sign = if (tau * ll).cos() >= 0.0 { 1.0 } else { -1.0 };
        sign * 2.0 * (t * ll).cos()
    }))
}

/// pi(X; p, a) for every residue class a, one sieve pass.
pub fn prime_counts_by_class(x: u64, p: u32) -> Result<Vec<u64>> {
    let primes = sieve_primes(x)?;
    let mut counts = vec![0u64; p as usize];
    for &q in &primes {
        counts[(q % p as u64) as usize] += 1;
    }
    Ok(counts)
}

/// Exact arithmetic-progression error term
/// E(X; p, a) = pi(X; p, a) - delta_p(a) pi(X) / (p - 1).
pub fn ap_error(x: u64, p: u32, a: u64) -> Result<Ratio<i64>> {
    if x < 2 {
        return Err(Error::validation("error term requires X >= 2"));
    }
    let counts = prime_counts_by_class(x, p)?;
    let pi_x: u64 = counts.iter().sum();
    Ok(ap_error_from_counts(&counts, pi_x, p, a))
}

fn ap_error_from_counts(counts: &[u64], pi_x: u64, p: u32, a: u64) -> Ratio<i64> {
    let r = (a % p as u64) as usize;
    let count = Ratio::from_integer(counts[r] as i64);
    if r == 0 {
        count
    } else {
        count - Ratio::new(pi_x as i64, p as i64 - 1)
    }
}

/// Both error-term aggregates for a polynomial P mod p, in exact rationals:
/// the sum of E(X; p, P(n)) over n in F_p, the sum of E(X; p, a) over the
/// value set of P, and an independent recomputation of the first via
/// counting roots N_P(q mod p) prime by prime.
pub struct PolyErrorSums {
    pub over_arguments: Ratio<i64>,
    pub over_value_set: Ratio<i64>,
    pub cross_check: Ratio<i64>,
}

pub fn poly_error_sums(
    ctx: &PrimeFieldContext,
    coeffs: &[i64],
    x: u64,
) -> Result<PolyErrorSums> {
    let p = ctx.p();
    let stats = crate::weights::poly_value_stats(ctx, coeffs)?;
    let counts = prime_counts_by_class(x, p)?;
    let pi_x: u64 = counts.iter().sum();

    let mut over_arguments = Ratio::from_integer(0);
    for n in 0..p {
        let val = poly_eval_mod(coeffs, n, p);
        over_arguments += ap_error_from_counts(&counts, pi_x, p, val as u64);
    }
    let mut over_value_set = Ratio::from_integer(0);
    for a in 0..p {
        if stats.indicator[a as usize] != 0 {
            over_value_set += ap_error_from_counts(&counts, pi_x, p, a as u64);
        }
    }

    // independent route: sum_n pi(X; p, P(n)) counts each prime q once per
    // root of P(n) = q, i.e. with multiplicity n_p[q mod p] + 1; then
    // subtract pi(X)/(p-1) times the count of n with P(n) nonzero
    let mut root_weighted = 0i64;
    for (a, &c) in counts.iter().enumerate() {
        root_weighted += (stats.n_p[a] + 1) * c as i64;
    }
    let nonzero_args = p as i64 - (stats.n_p[0] + 1);
    let cross_check =
        Ratio::from_integer(root_weighted) - Ratio::new(pi_x as i64 * nonzero_args, p as i64 - 1);

    Ok(PolyErrorSums {
        over_arguments,
        over_value_set,
        cross_check,
    })
}

fn poly_eval_mod(coeffs: &[i64], n: u32, p: u32) -> u32 {
    let pp = p as i64;
    let mut acc = 0i64;
    for &c in coeffs.iter().rev() {
        acc = (acc * n as i64 + c.rem_euclid(pp)) % pp;
    }
    acc as u32
}
