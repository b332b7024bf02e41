//! Small numeric helpers shared across modules.

use num_complex::Complex64;

/// Fixed-order pairwise summation. Used for every bulk reduction so
/// repeated runs (and different thread counts, via fixed chunking)
/// produce bit-identical results.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= 8 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of the outputs of `f` over `0..n` without
/// materializing the whole sequence at once. Chunk size is fixed so the
/// reduction order never depends on thread count.
pub fn pairwise_sum_fn(n: usize, f: impl Fn(usize) -> Complex64) -> Complex64 {
    const CHUNK: usize = 1024;
    let mut partials = Vec::with_capacity(n / CHUNK + 1);
    let mut buf = Vec::with_capacity(CHUNK.min(n));
    let mut i = 0;
    while i < n {
        buf.clear();
        let end = (i + CHUNK).min(n);
        for k in i..end {
            buf.push(f(k));
        }
        partials.push(pairwise_sum(&buf));
        i = end;
    }
    pairwise_sum(&partials)
}

/// Real-valued pairwise summation with the same fixed order.
pub fn pairwise_sum_f64(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_f64(&values[..mid]) + pairwise_sum_f64(&values[mid..])
}

/// Real-valued analogue of `pairwise_sum_fn`.
pub fn pairwise_sum_fn_f64(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    const CHUNK: usize = 1024;
    let mut partials = Vec::with_capacity(n / CHUNK + 1);
    let mut buf = Vec::with_capacity(CHUNK.min(n));
    let mut i = 0;
    while i < n {
        buf.clear();
        let end = (i + CHUNK).min(n);
        for k in i..end {
            buf.push(f(k));
        }
        partials.push(pairwise_sum_f64(&buf));
        i = end;
    }
    pairwise_sum_f64(&partials)
}

/// Modular exponentiation, widening to u128 for the products.
pub fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc: u64 = 1;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % modulus as u128) as u64;
        }
        base = ((base as u128 * base as u128) % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// gcd of two u64.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Modular inverse of `a` mod `m` for any m ≥ 2 with gcd(a, m) = 1.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        let tr = old_r - q * r;
        old_r = r;
        r = tr;
        let ts = old_s - q * s;
        old_s = s;
        s = ts;
    }
    if old_r.abs() != 1 {
        return None;
    }
    let inv = old_s * old_r.signum();
    Some(inv.rem_euclid(m as i128) as u64)
}
