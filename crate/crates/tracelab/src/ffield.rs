//! Prime-field arithmetic substrate: primes, primitive roots, discrete
//! logarithms, character evaluation, rational-function evaluation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::util::{is_prime, mod_pow};

/// Default cap on the field size when building a context (~2^27).
/// Beyond this the table memory (four machine words per element plus the
/// root-of-unity tables) stops being a desk-scale object.
pub const DEFAULT_MAX_P: u64 = 1 << 27;

/// Value of a rational function at a point: either a field element or a
/// pole. Poles are an explicit marker, never 0, so the weight layer can
/// apply the extension-by-zero convention itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpValue {
    Elem(u32),
    Pole,
}

/// A prime p together with its smallest primitive root, the full
/// discrete-log table, the inverse table, and precomputed roots of
/// unity. Immutable after construction; share it read-only.
pub struct PrimeFieldContext {
    p: u32,
    g: u32,
    /// dlog[x] = k with g^k = x, for x in 1..p. dlog[0] is unused.
    dlog: Vec<u32>,
    /// pow[k] = g^k mod p, for k in 0..p-1.
    pow: Vec<u32>,
    /// inv[x] = x^{-1} mod p, for x in 1..p. inv[0] is unused.
    inv: Vec<u32>,
    /// unity_p[k] = e(k/p).
    unity_p: Vec<Complex64>,
    /// unity_g[k] = e(k/(p-1)), used by multiplicative characters.
    unity_g: Vec<Complex64>,
}

/// Smallest positive primitive root mod p.
pub fn find_primitive_root(p: u64) -> Result<u64> {
    if p < 3 || !is_prime(p) {
        return Err(Error::validation(format!(
            "find_primitive_root requires an odd prime >= 3, got {p}"
        )));
    }
    let phi = p - 1;
    let mut factors = Vec::new();
    let mut rem = phi;
    let mut d = 2u64;
    while d * d <= rem {
        if rem % d == 0 {
            factors.push(d);
            while rem % d == 0 {
                rem /= d;
            }
        }
        d += 1;
    }
    if rem > 1 {
        factors.push(rem);
    }
    for g in 2..p {
        if factors.iter().all(|&q| mod_pow(g, phi / q, p) != 1) {
            return Ok(g);
        }
    }
    unreachable!("every prime has a primitive root");
}

impl PrimeFieldContext {
    /// Builds the full context for p with the default memory cap.
    pub fn new(p: u64) -> Result<Self> {
        Self::with_cap(p, DEFAULT_MAX_P)
    }

    /// Builds the context with an explicit cap on p.
    pub fn with_cap(p: u64, max_p: u64) -> Result<Self> {
        if p < 3 || p >= (1 << 31) || !is_prime(p) {
            return Err(Error::validation(format!(
                "context requires a prime 3 <= p < 2^31, got {p}"
            )));
        }
        if p > max_p {
            return Err(Error::capacity(format!(
                "p = {p} exceeds the table budget of {max_p} (about {} MiB of tables); \
                 raise the cap explicitly to proceed",
                5 * 4 * max_p / (1 << 20)
            )));
        }
        let g = find_primitive_root(p)?;
        Ok(Self::from_root(p as u32, g as u32))
    }

    /// Builds the tables from a known primitive root. Used directly by
    /// the cache loader; `g` must be a primitive root mod p.
    pub(crate) fn from_root(p: u32, g: u32) -> Self {
        let pu = p as usize;
        let mut dlog = vec![u32::MAX; pu];
        let mut pow = vec![0u32; pu - 1];
        let mut x = 1u64;
        for k in 0..(pu - 1) {
            pow[k] = x as u32;
            dlog[x as usize] = k as u32;
            x = x * g as u64 % p as u64;
        }
        debug_assert_eq!(x, 1, "g must have order exactly p-1");
        let mut inv = vec![0u32; pu];
        inv[1] = 1;
        for y in 1..pu {
            // g^k inverse is g^{p-1-k}
            let k = dlog[y] as usize;
            inv[y] = if k == 0 { 1 } else { pow[pu - 1 - k] };
        }
        let unity_p = roots_of_unity(pu);
        let unity_g = roots_of_unity(pu - 1);
        PrimeFieldContext {
            p,
            g,
            dlog,
            pow,
            inv,
            unity_p,
            unity_g,
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn primitive_root(&self) -> u32 {
        self.g
    }

    /// Discrete log of x (x must be nonzero).
    pub fn dlog(&self, x: u32) -> u32 {
        debug_assert!(x != 0 && x < self.p);
        self.dlog[x as usize]
    }

    pub fn dlog_table(&self) -> &[u32] {
        &self.dlog
    }

    /// g^k mod p for k in 0..p-1.
    pub fn pow_g(&self, k: u32) -> u32 {
        self.pow[k as usize]
    }

    /// x^{-1} mod p (x must be nonzero).
    pub fn inv(&self, x: u32) -> u32 {
        debug_assert!(x != 0 && x < self.p);
        self.inv[x as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        (a as u64 * b as u64 % self.p as u64) as u32
    }

    /// x^k mod p for integer k (negative k through the inverse; x = 0
    /// with k < 0 yields a pole).
    pub fn pow_signed(&self, x: u32, k: i64) -> FpValue {
        if k >= 0 {
            FpValue::Elem(mod_pow(x as u64, k as u64, self.p as u64) as u32)
        } else if x == 0 {
            FpValue::Pole
        } else {
            FpValue::Elem(mod_pow(self.inv(x) as u64, (-k) as u64, self.p as u64) as u32)
        }
    }

    /// Additive character e(x/p).
    pub fn additive_char(&self, x: u32) -> Complex64 {
        self.unity_p[x as usize]
    }

    /// Additive character at an arbitrary integer argument.
    pub fn additive_char_int(&self, x: i64) -> Complex64 {
        self.unity_p[x.rem_euclid(self.p as i64) as usize]
    }

    /// Multiplicative character chi_j(x) = e(j*dlog[x]/(p-1)).
    /// j indexes the full dual group: j = 0 is the trivial character.
    pub fn mult_char(&self, j: u32, x: u32) -> Result<Complex64> {
        if x == 0 || x >= self.p {
            return Err(Error::domain(format!(
                "mult_char is defined on F_p^x only, got x = {x}"
            )));
        }
        let order = self.p as u64 - 1;
        let idx = (j as u64 * self.dlog[x as usize] as u64 % order) as usize;
        Ok(self.unity_g[idx])
    }

    /// Evaluates P(x)/Q(x) mod p, or `Pole` when Q(x) = 0.
    pub fn eval_rational(&self, f: &RationalFunctionModP, x: u32) -> FpValue {
        let num = horner(&f.numerator, x, self.p);
        let den = horner(&f.denominator, x, self.p);
        if den == 0 {
            FpValue::Pole
        } else {
            FpValue::Elem(self.mul(num, self.inv(den)))
        }
    }
}

fn roots_of_unity(n: usize) -> Vec<Complex64> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|k| {
            let t = step * k as f64;
            Complex64::new(t.cos(), t.sin())
        })
        .collect()
}

/// Horner evaluation of a polynomial with ascending coefficients.
pub fn horner(coeffs: &[u32], x: u32, p: u32) -> u32 {
    let mut acc = 0u64;
    for &c in coeffs.iter().rev() {
        acc = (acc * x as u64 + c as u64) % p as u64;
    }
    acc as u32
}

/// A rational function P/Q with coefficients reduced mod p, P and Q
/// coprime, both with nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionModP {
    /// Ascending coefficients; trimmed so the last entry is nonzero
    /// (the zero polynomial is the empty vector).
    pub numerator: Vec<u32>,
    pub denominator: Vec<u32>,
}

impl RationalFunctionModP {
    /// Reduces integer coefficient lists mod p and validates the pair.
    pub fn new(numerator: &[i64], denominator: &[i64], p: u32) -> Result<Self> {
        let num = reduce_poly(numerator, p);
        let den = reduce_poly(denominator, p);
        if den.is_empty() {
            return Err(Error::validation(
                "denominator is the zero polynomial mod p".to_string(),
            ));
        }
        let g = poly_gcd(&num, &den, p);
        if poly_deg(&g) > 0 {
            return Err(Error::validation(format!(
                "numerator and denominator are not coprime mod {p} (gcd degree {})",
                poly_deg(&g)
            )));
        }
        Ok(RationalFunctionModP {
            numerator: num,
            denominator: den,
        })
    }

    /// A polynomial, seen as P/1.
    pub fn polynomial(coeffs: &[i64], p: u32) -> Result<Self> {
        Self::new(coeffs, &[1], p)
    }

    pub fn deg_num(&self) -> isize {
        poly_deg(&self.numerator)
    }

    pub fn deg_den(&self) -> isize {
        poly_deg(&self.denominator)
    }

    /// True when the function is constant mod p (including zero).
    pub fn is_constant(&self) -> bool {
        self.deg_num() <= 0 && self.deg_den() <= 0
    }

    pub fn is_polynomial(&self) -> bool {
        self.deg_den() == 0
    }
}

/// Degree with deg(0) = -1.
pub fn poly_deg(coeffs: &[u32]) -> isize {
    coeffs.len() as isize - 1
}

/// Reduces integer coefficients into [0, p) and trims trailing zeros.
pub fn reduce_poly(coeffs: &[i64], p: u32) -> Vec<u32> {
    let mut out: Vec<u32> = coeffs
        .iter()
        .map(|&c| c.rem_euclid(p as i64) as u32)
        .collect();
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// Monic gcd of two polynomials over F_p.
pub fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    // normalize monic
    if let Some(&lead) = a.last() {
        let linv = mod_pow(lead as u64, p as u64 - 2, p as u64) as u32;
        for c in &mut a {
            *c = (*c as u64 * linv as u64 % p as u64) as u32;
        }
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = poly_deg(b);
    debug_assert!(db >= 0);
    let lead_inv = mod_pow(*b.last().unwrap() as u64, p as u64 - 2, p as u64);
    while poly_deg(&r) >= db {
        let dr = poly_deg(&r) as usize;
        let coef = r[dr] as u64 * lead_inv % p as u64;
        let shift = dr - db as usize;
        for (i, &bc) in b.iter().enumerate() {
            let sub = coef * bc as u64 % p as u64;
            let idx = i + shift;
            r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

/// Formal derivative over F_p.
pub fn poly_derivative(coeffs: &[u32], p: u32) -> Vec<u32> {
    let mut out: Vec<u32> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| (i as u64 * c as u64 % p as u64) as u32)
        .collect();
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// Number of distinct zeros of the polynomial in the algebraic closure,
/// i.e. the degree of its squarefree part.
pub fn distinct_zero_count(coeffs: &[u32], p: u32) -> u32 {
    if poly_deg(coeffs) <= 0 {
        return 0;
    }
    let d = poly_derivative(coeffs, p);
    if d.is_empty() {
        // P = R(X^p); at desk scale (deg < p) this cannot happen for
        // non-constant P, but fall back to the plain degree.
        return poly_deg(coeffs) as u32;
    }
    let g = poly_gcd(coeffs, &d, p);
    (poly_deg(coeffs) - poly_deg(&g)) as u32
}

/// Ascending list of all primes <= limit, by segmented sieve.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::validation(format!(
            "sieve_primes requires limit >= 2, got {limit}"
        )));
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    // simple sieve up to sqrt(limit)
    let mut small = vec![true; root as usize + 1];
    small[0] = false;
    if root >= 1 {
        small[1] = false;
    }
    let mut i = 2u64;
    while i * i <= root {
        if small[i as usize] {
            let mut j = i * i;
            while j <= root {
                small[j as usize] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base: Vec<u64> = (2..=root).filter(|&n| small[n as usize]).collect();
    let mut primes: Vec<u64> = base.iter().copied().filter(|&q| q <= limit).collect();

    const SEG: u64 = 1 << 20;
    let mut lo = root + 1;
    let mut mask = vec![true; SEG as usize];
    while lo <= limit {
        let hi = (lo + SEG - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        mask[..len].fill(true);
        for &q in &base {
            if q * q > hi {
                break;
            }
            let start = lo.div_ceil(q).max(q) * q;
            let mut j = start;
            while j <= hi {
                mask[(j - lo) as usize] = false;
                j += q;
            }
        }
        for (off, &alive) in mask[..len].iter().enumerate() {
            if alive {
                primes.push(lo + off as u64);
            }
        }
        lo = hi + 1;
    }
    Ok(primes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// Brute-force multiplicative order, the oracle for primitive roots.
    fn order(g: u64, p: u64) -> u64 {
        let mut x = g % p;
        let mut k = 1;
        while x != 1 {
            x = x * g % p;
            k += 1;
        }
        k
    }

    #[test]
    fn primitive_root_examples() {
        // oracle: 2 mod 5 walks 2,4,3,1
        assert_eq!(order(2, 5), 4);
        assert_eq!(find_primitive_root(5).unwrap(), 2);
        // 2^3 = 1 mod 7 disqualifies 2; 3 has order 6
        assert_eq!(order(2, 7), 3);
        assert_eq!(order(3, 7), 6);
        assert_eq!(find_primitive_root(7).unwrap(), 3);
        assert_eq!(find_primitive_root(3).unwrap(), 2);
    }

    #[test]
    fn primitive_root_rejects() {
        assert!(find_primitive_root(4).is_err());
        assert!(find_primitive_root(2).is_err());
        assert!(find_primitive_root(1).is_err());
    }

    #[test]
    fn primitive_root_is_smallest() {
        for p in [11u64, 13, 101, 499] {
            let g = find_primitive_root(p).unwrap();
            assert_eq!(order(g, p), p - 1);
            for h in 2..g {
                assert_ne!(order(h, p), p - 1, "h={h} p={p}");
            }
        }
    }

    #[test]
    fn context_tables_p5() {
        let ctx = PrimeFieldContext::new(5).unwrap();
        assert_eq!(ctx.primitive_root(), 2);
        // powers of 2 mod 5: 1,2,4,3
        assert_eq!(ctx.dlog(1), 0);
        assert_eq!(ctx.dlog(2), 1);
        assert_eq!(ctx.dlog(4), 2);
        assert_eq!(ctx.dlog(3), 3);
        assert_eq!(ctx.inv(2), 3);
        assert_eq!(ctx.inv(3), 2);
        assert_eq!(ctx.inv(4), 4);
        assert_eq!(ctx.inv(1), 1);
    }

    #[test]
    fn context_invariants_exact() {
        for p in [101u64, 499] {
            let ctx = PrimeFieldContext::new(p).unwrap();
            let mut seen = vec![false; p as usize - 1];
            for x in 1..p as u32 {
                let k = ctx.dlog(x);
                assert_eq!(mod_pow(ctx.primitive_root() as u64, k as u64, p) as u32, x);
                assert_eq!(ctx.mul(x, ctx.inv(x)), 1);
                assert!(!seen[k as usize], "dlog not injective");
                seen[k as usize] = true;
            }
        }
    }

    #[test]
    fn capacity_guard() {
        let err = match PrimeFieldContext::with_cap(101, 50) {
            Err(e) => e,
            Ok(_) => panic!("expected capacity error"),
        };
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn sieve_small() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(30).unwrap().len(), 10);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert!(sieve_primes(1).is_err());
    }

    #[test]
    fn sieve_pi_1e6() {
        // independent oracle: trial-division-free bit sieve
        let primes = sieve_primes(1_000_000).unwrap();
        assert_eq!(primes.len(), 78498);
        let mut alive = vec![true; 1_000_001];
        alive[0] = false;
        alive[1] = false;
        for i in 2..=1000usize {
            if alive[i] {
                let mut j = i * i;
                while j <= 1_000_000 {
                    alive[j] = false;
                    j += i;
                }
            }
        }
        let oracle: usize = alive.iter().filter(|&&b| b).count();
        assert_eq!(primes.len(), oracle);
    }

    #[test]
    fn rational_evaluation() {
        let ctx = PrimeFieldContext::new(7).unwrap();
        // X^2 at x=3 is 2 mod 7
        let f = RationalFunctionModP::polynomial(&[0, 0, 1], 7).unwrap();
        assert_eq!(ctx.eval_rational(&f, 3), FpValue::Elem(2));
        // 1/X at 0 is a pole
        let g = RationalFunctionModP::new(&[1], &[0, 1], 7).unwrap();
        assert_eq!(ctx.eval_rational(&g, 0), FpValue::Pole);
        // (X+1)/X at x=2 mod 5: 3*inv(2) = 3*3 = 9 = 4
        let ctx5 = PrimeFieldContext::new(5).unwrap();
        let h = RationalFunctionModP::new(&[1, 1], &[0, 1], 5).unwrap();
        assert_eq!(ctx5.eval_rational(&h, 2), FpValue::Elem(4));
    }

    #[test]
    fn rational_coprimality_check() {
        // (X^2-1)/(X-1) shares the factor X-1
        assert!(RationalFunctionModP::new(&[-1, 0, 1], &[-1, 1], 7).is_err());
        assert!(RationalFunctionModP::new(&[1], &[0], 7).is_err());
    }

    #[test]
    fn eval_rational_matches_naive_oracle() {
        // naive oracle: Horner plus extended-gcd inverse
        use crate::util::mod_inverse;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let ps = [7u32, 101, 499];
        let ctxs: Vec<_> = ps
            .iter()
            .map(|&p| PrimeFieldContext::new(p as u64).unwrap())
            .collect();
        for _ in 0..10_000 {
            let pi = rng.gen_range(0..ps.len());
            let p = ps[pi];
            let dn = rng.gen_range(0..4usize);
            let dd = rng.gen_range(0..3usize);
            let num: Vec<i64> = (0..=dn).map(|_| rng.gen_range(-50..50)).collect();
            let den: Vec<i64> = (0..=dd).map(|_| rng.gen_range(-50..50)).collect();
            let f = match RationalFunctionModP::new(&num, &den, p) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let x = rng.gen_range(0..p);
            let nv = horner(&f.numerator, x, p) as u64;
            let dv = horner(&f.denominator, x, p) as u64;
            let expect = if dv == 0 {
                FpValue::Pole
            } else {
                FpValue::Elem((nv * mod_inverse(dv, p as u64).unwrap() % p as u64) as u32)
            };
            assert_eq!(ctxs[pi].eval_rational(&f, x), expect);
        }
    }

    #[test]
    fn character_orthogonality() {
        for p in [11u64, 101] {
            let ctx = PrimeFieldContext::new(p).unwrap();
            for j in 1..(p as u32 - 1) {
                let sum: Complex64 = (1..p as u32).map(|x| ctx.mult_char(j, x).unwrap()).sum();
                assert!(sum.norm() < 1e-10, "j={j} p={p} sum={sum}");
            }
            // trivial character sums to p-1
            let sum0: Complex64 = (1..p as u32).map(|x| ctx.mult_char(0, x).unwrap()).sum();
            assert!((sum0 - Complex64::new(p as f64 - 1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn additive_orthogonality() {
        for p in [11u64, 101, 499] {
            let ctx = PrimeFieldContext::new(p).unwrap();
            for a in [0u32, 1, 2, 7] {
                let sum: Complex64 = (0..p as u32)
                    .map(|x| ctx.additive_char(ctx.mul(a, x)))
                    .sum();
                let expect = if a == 0 { p as f64 } else { 0.0 };
                assert!(
                    (sum - Complex64::new(expect, 0.0)).norm() <= 1e-9 * p as f64,
                    "a={a} p={p}"
                );
            }
        }
    }

    #[test]
    fn legendre_values_mod7() {
        let ctx = PrimeFieldContext::new(7).unwrap();
        let j = 3; // (p-1)/2
        // 3^2 = 2 mod 7, so 2 is a QR
        let v2 = ctx.mult_char(j, 2).unwrap();
        assert!((v2 - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let v3 = ctx.mult_char(j, 3).unwrap();
        assert!((v3 - Complex64::new(-1.0, 0.0)).norm() < 1e-10);
        assert!(ctx.mult_char(j, 0).is_err());
    }

    #[test]
    fn mult_char_multiplicativity() {
        let ctx = PrimeFieldContext::new(101).unwrap();
        for j in [1u32, 5, 50] {
            for (x, y) in [(2u32, 3u32), (7, 99), (100, 100)] {
                let lhs = ctx.mult_char(j, ctx.mul(x, y)).unwrap();
                let rhs = ctx.mult_char(j, x).unwrap() * ctx.mult_char(j, y).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn distinct_zeros() {
        // X(X-1) has 2 distinct zeros
        let f = reduce_poly(&[0, -1, 1], 7);
        assert_eq!(distinct_zero_count(&f, 7), 2);
        // (X-1)^2 has 1
        let g = reduce_poly(&[1, -2, 1], 7);
        assert_eq!(distinct_zero_count(&g, 7), 1);
    }
}
