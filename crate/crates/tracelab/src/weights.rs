//! Trace weights: symbolic specs, bulk evaluation to tables, conductor
//! metadata, Fourier and Mellin transforms, exceptional-weight
//! detection, and polynomial value-set statistics.
//!
//! The hyper-Kloosterman fast path evaluates all p-1 sums at once as an
//! m-fold multiplicative convolution on the cyclic group F_p^x, through
//! discrete-log reindexing and a length-(p-1) FFT. p-1 is never a power
//! of two, so an arbitrary-length transform is required; rustfft's
//! planner falls back to Bluestein/Rader reductions for such lengths.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::ffield::{
    distinct_zero_count, poly_deg, reduce_poly, FpValue, PrimeFieldContext, RationalFunctionModP,
};

/// Default gate for the O(p^2 log p) exceptional-detection scan.
pub const DETECT_EXCEPTIONAL_MAX_P: u32 = 1 << 14;

/// Symbolic description of a trace weight, independent of p.
/// Polynomials are ascending integer coefficient lists, reduced mod p
/// at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// n -> e(f(n)/p) for a rational function f = P/Q, 0 at poles.
    AdditiveChar { num: Vec<i64>, den: Vec<i64> },
    /// n -> chi_j(f(n)), extended by zero at poles and zeros of f.
    MultChar { j: u32, num: Vec<i64>, den: Vec<i64> },
    /// n -> Kl_m(n; p), m >= 2.
    HyperKloosterman(u32),
    /// n -> N_P(n), the centered representation count of n as a value of P.
    PolyValueCount(Vec<i64>),
    /// n -> 1 if n is a value of P mod p, else 0.
    ValueSetIndicator(Vec<i64>),
    /// Indicator of a single point.
    DeltaAt(u64),
    /// x -> inner(c * x^k), k != 0 (negative k through the inverse).
    PullbackMonomial {
        inner: Box<WeightSpec>,
        c: i64,
        k: i64,
    },
    Product(Box<WeightSpec>, Box<WeightSpec>),
    Conjugate(Box<WeightSpec>),
    Scalar {
        re: f64,
        im: f64,
        inner: Box<WeightSpec>,
    },
}

/// Witness that a table is proportional to chi_j(n) e(bn/p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalWitness {
    pub j: u32,
    pub b: u32,
    pub scalar: Complex64,
}

/// A fully evaluated weight: p complex values indexed by n, plus
/// conductor metadata. Immutable after construction.
pub struct WeightTable {
    pub p: u32,
    pub values: Vec<Complex64>,
    pub conductor_estimate: u32,
    pub exceptional: Option<ExceptionalWitness>,
    /// The constructor spec, when this table came from `bulk_eval`
    /// (transform outputs carry `None`).
    pub spec: Option<WeightSpec>,
}

impl WeightTable {
    pub fn value(&self, n: u32) -> Complex64 {
        self.values[n as usize]
    }

    /// Value at an arbitrary integer argument, reduced mod p.
    pub fn value_int(&self, n: u64) -> Complex64 {
        self.values[(n % self.p as u64) as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl WeightSpec {
    /// Canonical s-expression form; this exact string feeds the cache
    /// spec hash, so it must stay stable.
    pub fn to_sexpr(&self) -> String {
        fn poly(c: &[i64]) -> String {
            let body: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            format!("(poly {})", body.join(" "))
        }
        fn ratfn(num: &[i64], den: &[i64]) -> String {
            if den == [1] {
                poly(num)
            } else {
                format!("(ratfn {} {})", poly(num), poly(den))
            }
        }
        match self {
            WeightSpec::AdditiveChar { num, den } => format!("(addchar {})", ratfn(num, den)),
            WeightSpec::MultChar { j, num, den } => {
                format!("(multchar {} {})", j, ratfn(num, den))
            }
            WeightSpec::HyperKloosterman(m) => format!("(kloosterman {m})"),
            WeightSpec::PolyValueCount(c) => format!("(polycount {})", poly(c)),
            WeightSpec::ValueSetIndicator(c) => format!("(valueset {})", poly(c)),
            WeightSpec::DeltaAt(a) => format!("(delta {a})"),
            WeightSpec::PullbackMonomial { inner, c, k } => {
                format!("(pullback {} {} {})", inner.to_sexpr(), c, k)
            }
            WeightSpec::Product(l, r) => format!("(product {} {})", l.to_sexpr(), r.to_sexpr()),
            WeightSpec::Conjugate(inner) => format!("(conj {})", inner.to_sexpr()),
            WeightSpec::Scalar { re, im, inner } => {
                format!("(scalar {} {} {})", re, im, inner.to_sexpr())
            }
        }
    }

    /// Parses the canonical s-expression form.
    pub fn parse(text: &str) -> Result<WeightSpec> {
        let tokens = tokenize(text)?;
        let (node, rest) = parse_node(&tokens)?;
        if !rest.is_empty() {
            return Err(Error::parse(format!(
                "trailing tokens after weight spec: {:?}",
                rest
            )));
        }
        node_to_spec(&node)
    }

    /// 64-bit FNV-1a hash of the canonical serialization.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.to_sexpr().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    /// Validates the spec against a concrete p.
    pub fn validate(&self, p: u32) -> Result<()> {
        match self {
            WeightSpec::AdditiveChar { num, den } => {
                let f = RationalFunctionModP::new(num, den, p)?;
                if f.is_constant() {
                    return Err(Error::validation(format!(
                        "additive character of a function that is constant mod {p}"
                    )));
                }
            }
            WeightSpec::MultChar { j, num, den } => {
                if *j >= p - 1 {
                    return Err(Error::validation(format!(
                        "character index {j} out of range 0..{}",
                        p - 2
                    )));
                }
                let f = RationalFunctionModP::new(num, den, p)?;
                if f.is_constant() {
                    return Err(Error::validation(format!(
                        "multiplicative character of a function that is constant mod {p}"
                    )));
                }
            }
            WeightSpec::HyperKloosterman(m) => {
                if *m < 2 {
                    return Err(Error::validation(format!(
                        "hyper-Kloosterman requires m >= 2, got {m}"
                    )));
                }
            }
            WeightSpec::PolyValueCount(c) | WeightSpec::ValueSetIndicator(c) => {
                if poly_deg(&reduce_poly(c, p)) <= 0 {
                    return Err(Error::validation(format!(
                        "polynomial is constant mod {p}"
                    )));
                }
            }
            WeightSpec::DeltaAt(a) => {
                if *a >= p as u64 {
                    return Err(Error::validation(format!(
                        "delta point {a} out of range for p = {p}"
                    )));
                }
            }
            WeightSpec::PullbackMonomial { inner, c, k } => {
                if *k == 0 {
                    return Err(Error::validation("pullback exponent k must be nonzero"));
                }
                if c.rem_euclid(p as i64) == 0 {
                    return Err(Error::validation(format!(
                        "pullback coefficient {c} vanishes mod {p}"
                    )));
                }
                inner.validate(p)?;
            }
            WeightSpec::Product(l, r) => {
                l.validate(p)?;
                r.validate(p)?;
            }
            WeightSpec::Conjugate(inner) | WeightSpec::Scalar { inner, .. } => inner.validate(p)?,
        }
        Ok(())
    }
}

enum Node {
    Atom(String),
    List(Vec<Node>),
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    if out.is_empty() {
        return Err(Error::parse("empty weight spec"));
    }
    Ok(out)
}

fn parse_node<'a>(tokens: &'a [String]) -> Result<(Node, &'a [String])> {
    match tokens.split_first() {
        None => Err(Error::parse("unexpected end of weight spec")),
        Some((t, rest)) if t == "(" => {
            let mut items = Vec::new();
            let mut rem = rest;
            loop {
                match rem.first() {
                    None => return Err(Error::parse("unbalanced parentheses in weight spec")),
                    Some(t) if t == ")" => return Ok((Node::List(items), &rem[1..])),
                    _ => {
                        let (node, next) = parse_node(rem)?;
                        items.push(node);
                        rem = next;
                    }
                }
            }
        }
        Some((t, _)) if t == ")" => Err(Error::parse("unexpected ')' in weight spec")),
        Some((t, rest)) => Ok((Node::Atom(t.clone()), rest)),
    }
}

fn atom_i64(node: &Node, what: &str) -> Result<i64> {
    match node {
        Node::Atom(s) => s
            .parse()
            .map_err(|_| Error::parse(format!("expected integer for {what}, got '{s}'"))),
        Node::List(_) => Err(Error::parse(format!("expected integer for {what}"))),
    }
}

fn atom_f64(node: &Node, what: &str) -> Result<f64> {
    match node {
        Node::Atom(s) => s
            .parse()
            .map_err(|_| Error::parse(format!("expected number for {what}, got '{s}'"))),
        Node::List(_) => Err(Error::parse(format!("expected number for {what}"))),
    }
}

fn node_poly(node: &Node) -> Result<Vec<i64>> {
    match node {
        Node::List(items) => match items.split_first() {
            Some((Node::Atom(head), coeffs)) if head == "poly" => {
                coeffs.iter().map(|c| atom_i64(c, "coefficient")).collect()
            }
            _ => Err(Error::parse("expected (poly c0 c1 ...)")),
        },
        Node::Atom(_) => Err(Error::parse("expected (poly c0 c1 ...)")),
    }
}

/// A rational-function argument: either (poly ...) or (ratfn P Q).
fn node_ratfn(node: &Node) -> Result<(Vec<i64>, Vec<i64>)> {
    if let Node::List(items) = node {
        if let Some((Node::Atom(head), rest)) = items.split_first() {
            if head == "ratfn" {
                if rest.len() != 2 {
                    return Err(Error::parse("ratfn takes two polynomials"));
                }
                return Ok((node_poly(&rest[0])?, node_poly(&rest[1])?));
            }
        }
    }
    Ok((node_poly(node)?, vec![1]))
}

fn node_to_spec(node: &Node) -> Result<WeightSpec> {
    let items = match node {
        Node::List(items) => items,
        Node::Atom(s) => return Err(Error::parse(format!("expected a weight form, got '{s}'"))),
    };
    let (head, args) = match items.split_first() {
        Some((Node::Atom(h), rest)) => (h.as_str(), rest),
        _ => return Err(Error::parse("expected a weight form")),
    };
    let arity = |n: usize| -> Result<()> {
        if args.len() != n {
            Err(Error::parse(format!("{head} takes {n} argument(s)")))
        } else {
            Ok(())
        }
    };
    match head {
        "addchar" => {
            arity(1)?;
            let (num, den) = node_ratfn(&args[0])?;
            Ok(WeightSpec::AdditiveChar { num, den })
        }
        "multchar" => {
            arity(2)?;
            let j = atom_i64(&args[0], "character index")?;
            if j < 0 {
                return Err(Error::parse("character index must be nonnegative"));
            }
            let (num, den) = node_ratfn(&args[1])?;
            Ok(WeightSpec::MultChar {
                j: j as u32,
                num,
                den,
            })
        }
        "kloosterman" => {
            arity(1)?;
            let m = atom_i64(&args[0], "m")?;
            if m < 2 {
                return Err(Error::parse("kloosterman requires m >= 2"));
            }
            Ok(WeightSpec::HyperKloosterman(m as u32))
        }
        "polycount" => {
            arity(1)?;
            Ok(WeightSpec::PolyValueCount(node_poly(&args[0])?))
        }
        "valueset" => {
            arity(1)?;
            Ok(WeightSpec::ValueSetIndicator(node_poly(&args[0])?))
        }
        "delta" => {
            arity(1)?;
            let a = atom_i64(&args[0], "point")?;
            if a < 0 {
                return Err(Error::parse("delta point must be nonnegative"));
            }
            Ok(WeightSpec::DeltaAt(a as u64))
        }
        "pullback" => {
            arity(3)?;
            Ok(WeightSpec::PullbackMonomial {
                inner: Box::new(node_to_spec(&args[0])?),
                c: atom_i64(&args[1], "coefficient")?,
                k: atom_i64(&args[2], "exponent")?,
            })
        }
        "product" => {
            arity(2)?;
            Ok(WeightSpec::Product(
                Box::new(node_to_spec(&args[0])?),
                Box::new(node_to_spec(&args[1])?),
            ))
        }
        "conj" => {
            arity(1)?;
            Ok(WeightSpec::Conjugate(Box::new(node_to_spec(&args[0])?)))
        }
        "scalar" => {
            arity(3)?;
            Ok(WeightSpec::Scalar {
                re: atom_f64(&args[0], "re")?,
                im: atom_f64(&args[1], "im")?,
                inner: Box::new(node_to_spec(&args[2])?),
            })
        }
        other => Err(Error::parse(format!("unknown weight form '{other}'"))),
    }
}

/// Unnormalized-then-normalized bulk hyper-Kloosterman evaluation.
///
/// Returns Kl_m(a; p) for a = 1..p-1 (entry a-1), computed for all a at
/// once: reindex x -> e(x/p) along powers of the primitive root, take
/// the m-th pointwise power of its length-(p-1) DFT, and transform
/// back. The result is divided by p^{(m-1)/2}.
pub fn kloosterman_bulk(ctx: &PrimeFieldContext, m: u32) -> Result<Vec<Complex64>> {
    if m < 2 {
        return Err(Error::validation(format!(
            "kloosterman_bulk requires m >= 2, got {m}"
        )));
    }
    let p = ctx.p() as usize;
    let n = p - 1;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| ctx.additive_char(ctx.pow_g(k as u32)))
        .collect();
    fwd.process(&mut buf);
    for v in buf.iter_mut() {
        *v = v.powu(m);
    }
    inv.process(&mut buf);

    let norm = 1.0 / (n as f64 * (p as f64).powf((m as f64 - 1.0) / 2.0));
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, v) in buf.iter().enumerate() {
        out[ctx.pow_g(k as u32) as usize - 1] = v * norm;
    }
    Ok(out)
}

/// The defining sum over x_1...x_m = 0 with the x_i ranging over F_p,
/// normalized. Orthogonality collapses it to -(-1)^m p^{-(m-1)/2}; the
/// unit tests check this against the literal sum at small p.
pub fn kloosterman_zero_value(p: u32, m: u32) -> Complex64 {
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    Complex64::new(sign / (p as f64).powf((m as f64 - 1.0) / 2.0), 0.0)
}

/// Evaluates a weight spec to its full table of p values.
pub fn bulk_eval(ctx: &PrimeFieldContext, spec: &WeightSpec) -> Result<WeightTable> {
    spec.validate(ctx.p())?;
    let values = eval_values(ctx, spec)?;
    Ok(WeightTable {
        p: ctx.p(),
        values,
        conductor_estimate: conductor_estimate(spec, ctx.p()),
        exceptional: None,
        spec: Some(spec.clone()),
    })
}

fn eval_values(ctx: &PrimeFieldContext, spec: &WeightSpec) -> Result<Vec<Complex64>> {
    let p = ctx.p();
    let pu = p as usize;
    let zero = Complex64::new(0.0, 0.0);
    match spec {
        WeightSpec::AdditiveChar { num, den } => {
            let f = RationalFunctionModP::new(num, den, p)?;
            Ok((0..p)
                .map(|n| match ctx.eval_rational(&f, n) {
                    FpValue::Elem(v) => ctx.additive_char(v),
                    FpValue::Pole => zero,
                })
                .collect())
        }
        WeightSpec::MultChar { j, num, den } => {
            let f = RationalFunctionModP::new(num, den, p)?;
            Ok((0..p)
                .map(|n| match ctx.eval_rational(&f, n) {
                    FpValue::Elem(0) | FpValue::Pole => zero,
                    FpValue::Elem(v) => ctx.mult_char(*j, v).expect("v nonzero"),
                })
                .collect())
        }
        WeightSpec::HyperKloosterman(m) => {
            let bulk = kloosterman_bulk(ctx, *m)?;
            let mut values = Vec::with_capacity(pu);
            values.push(kloosterman_zero_value(p, *m));
            values.extend_from_slice(&bulk);
            Ok(values)
        }
        WeightSpec::PolyValueCount(c) => {
            let stats = poly_value_stats(ctx, c)?;
            Ok(stats
                .n_p
                .iter()
                .map(|&v| Complex64::new(v as f64, 0.0))
                .collect())
        }
        WeightSpec::ValueSetIndicator(c) => {
            let stats = poly_value_stats(ctx, c)?;
            Ok(stats
                .indicator
                .iter()
                .map(|&v| Complex64::new(v as f64, 0.0))
                .collect())
        }
        WeightSpec::DeltaAt(a) => {
            let mut values = vec![zero; pu];
            values[*a as usize] = Complex64::new(1.0, 0.0);
            Ok(values)
        }
        WeightSpec::PullbackMonomial { inner, c, k } => {
            let base = eval_values(ctx, inner)?;
            let cm = c.rem_euclid(p as i64) as u32;
            Ok((0..p)
                .map(|n| match ctx.pow_signed(n, *k) {
                    FpValue::Elem(v) => base[ctx.mul(cm, v) as usize],
                    FpValue::Pole => zero,
                })
                .collect())
        }
        WeightSpec::Product(l, r) => {
            let a = eval_values(ctx, l)?;
            let b = eval_values(ctx, r)?;
            Ok(a.iter().zip(&b).map(|(x, y)| x * y).collect())
        }
        WeightSpec::Conjugate(inner) => {
            Ok(eval_values(ctx, inner)?.iter().map(|v| v.conj()).collect())
        }
        WeightSpec::Scalar { re, im, inner } => {
            let z = Complex64::new(*re, *im);
            Ok(eval_values(ctx, inner)?.iter().map(|v| z * v).collect())
        }
    }
}

/// Closed-form conductor where one exists, a labeled heuristic upper
/// proxy elsewhere. Metadata only; never used in a correctness path.
pub fn conductor_estimate(spec: &WeightSpec, p: u32) -> u32 {
    match spec {
        WeightSpec::AdditiveChar { num, den } => {
            let n = reduce_poly(num, p);
            let d = reduce_poly(den, p);
            if poly_deg(&d) == 0 {
                // e(P(n)/p): conductor deg P + 2
                poly_deg(&n).max(0) as u32 + 2
            } else {
                // heuristic for a genuine rational function
                (poly_deg(&n).max(0) + poly_deg(&d).max(0)) as u32 + 2
            }
        }
        WeightSpec::MultChar { num, den, .. } => {
            // 2 plus the number of distinct zeros (zeros of the
            // denominator counted alongside for rational arguments)
            let n = reduce_poly(num, p);
            let d = reduce_poly(den, p);
            2 + distinct_zero_count(&n, p) + distinct_zero_count(&d, p)
        }
        WeightSpec::HyperKloosterman(m) => m + 3,
        // heuristic: rank-1 object with deg P singularities
        WeightSpec::PolyValueCount(c) | WeightSpec::ValueSetIndicator(c) => {
            poly_deg(&reduce_poly(c, p)).max(0) as u32 + 2
        }
        WeightSpec::DeltaAt(_) => 2,
        WeightSpec::PullbackMonomial { inner, k, .. } => {
            // heuristic: pullback can multiply Swan conductors by |k|
            conductor_estimate(inner, p) + k.unsigned_abs() as u32
        }
        // documented heuristic for composites: sum of components + 2
        WeightSpec::Product(l, r) => conductor_estimate(l, p) + conductor_estimate(r, p) + 2,
        WeightSpec::Conjugate(inner) | WeightSpec::Scalar { inner, .. } => {
            conductor_estimate(inner, p)
        }
    }
}

/// Unitary normalized Fourier transform: Khat(y) = p^{-1/2} sum_x K(x) e(xy/p).
/// Applying it twice gives x -> K(-x); both Parseval identities hold.
pub fn fourier_transform(table: &WeightTable) -> WeightTable {
    let p = table.p as usize;
    let mut buf = table.values.clone();
    let mut planner = FftPlanner::<f64>::new();
    // e(+xy/p) kernel is rustfft's unnormalized inverse direction
    planner.plan_fft_inverse(p).process(&mut buf);
    let scale = 1.0 / (p as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
    WeightTable {
        p: table.p,
        values: buf,
        conductor_estimate: table.conductor_estimate,
        exceptional: None,
        spec: None,
    }
}

/// Finite-field Mellin transform: Ktilde(chi_j) = (p-1)^{-1/2}
/// sum_{m != 0} K(m) conj(chi_j(m)), for all j at once along the
/// discrete-log reindexing.
pub fn mellin_transform(ctx: &PrimeFieldContext, table: &WeightTable) -> Vec<Complex64> {
    let n = table.p as usize - 1;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| table.values[ctx.pow_g(k as u32) as usize])
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    // conj(chi_j(g^k)) = e(-jk/(p-1)): forward direction
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
    buf
}

/// Searches for a witness that K restricted to F_p^x equals
/// c * chi_j(n) e(bn/p) up to the given L^2-relative tolerance: for each
/// additive shift b, the Mellin spectrum of n -> K(n) e(-bn/p) is tested
/// for single-character energy concentration >= 1 - tolerance.
///
/// Cost is O(p^2 log p); gated at p <= 2^14 unless `max_p` overrides.
pub fn detect_exceptional(
    ctx: &PrimeFieldContext,
    table: &WeightTable,
    tolerance: f64,
    max_p: Option<u32>,
) -> Result<Option<ExceptionalWitness>> {
    let p = ctx.p();
    let gate = max_p.unwrap_or(DETECT_EXCEPTIONAL_MAX_P);
    if p > gate {
        return Err(Error::capacity(format!(
            "exceptional detection is O(p^2 log p); p = {p} exceeds the gate {gate} \
             (override with an explicit cap)"
        )));
    }
    let n = p as usize - 1;
    let reindexed: Vec<(u32, Complex64)> = (0..n)
        .map(|k| {
            let x = ctx.pow_g(k as u32);
            (x, table.values[x as usize])
        })
        .collect();
    let total_energy: f64 = reindexed.iter().map(|(_, v)| v.norm_sqr()).sum();
    if total_energy == 0.0 {
        return Err(Error::validation(
            "exceptional detection requires a table nonzero on F_p^x",
        ));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut best: Option<(f64, ExceptionalWitness)> = None;
    for b in 0..p {
        for (slot, &(x, v)) in buf.iter_mut().zip(&reindexed) {
            // multiply by e(-bx/p)
            let shift = ((b as u64 * x as u64) % p as u64) as u32;
            let twist = ctx.additive_char((p - shift) % p);
            *slot = v * twist;
        }
        fft.process(&mut buf);
        let (j_best, peak) = buf
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.norm_sqr()))
            .fold((0usize, f64::MIN), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
        // unnormalized FFT: sum_j |bin_j|^2 = n * total_energy, and the
        // unitary Mellin coefficient is bin_j / sqrt(n)
        let concentration = peak / (n as f64 * total_energy);
        if concentration >= 1.0 - tolerance {
            // K = c chi_j psi_b has Mellin coefficient c sqrt(p-1)
            let witness = ExceptionalWitness {
                j: j_best as u32,
                b,
                scalar: buf[j_best] / n as f64,
            };
            match &best {
                Some((c, _)) if *c >= concentration => {}
                _ => best = Some((concentration, witness)),
            }
        }
    }
    Ok(best.map(|(_, w)| w))
}

/// Output of one O(p) pass over the values of P mod p.
pub struct PolyValueStats {
    /// |P(F_p)|.
    pub value_set_size: u32,
    /// N_P(x) = #{n : P(n) = x} - 1.
    pub n_p: Vec<i64>,
    /// Indicator of the value set.
    pub indicator: Vec<u8>,
    /// |P(F_p)| / p, the density entering the value-set constant check.
    pub density: f64,
}

/// Multiplicity histogram of a polynomial's values mod p.
pub fn poly_value_stats(ctx: &PrimeFieldContext, coeffs: &[i64]) -> Result<PolyValueStats> {
    let p = ctx.p();
    let reduced = reduce_poly(coeffs, p);
    if poly_deg(&reduced) <= 0 {
        return Err(Error::validation(format!(
            "poly_value_stats requires a polynomial that is non-constant mod {p}"
        )));
    }
    let mut mult = vec![0i64; p as usize];
    for n in 0..p {
        mult[crate::ffield::horner(&reduced, n, p) as usize] += 1;
    }
    let mut value_set_size = 0u32;
    let mut indicator = vec![0u8; p as usize];
    let mut n_p = vec![0i64; p as usize];
    for (x, &m) in mult.iter().enumerate() {
        if m > 0 {
            value_set_size += 1;
            indicator[x] = 1;
        }
        n_p[x] = m - 1;
    }
    Ok(PolyValueStats {
        value_set_size,
        n_p,
        indicator,
        density: value_set_size as f64 / p as f64,
    })
}
