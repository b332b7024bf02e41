use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use tracelab::bilinear;
use tracelab::cache;
use tracelab::correl;
use tracelab::ffield::{sieve_primes, PrimeFieldContext};
use tracelab::hbdecomp;
use tracelab::primesums;
use tracelab::satotate;
use tracelab::weights;
use tracelab::{Error, Result, WeightSpec};

// Exit quietly when stdout closes early (e.g. piped into `head`).
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "tracelab", about = "Trace weights over prime fields: bulk evaluation, correlation scans, sums over primes, and equidistribution experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cache directory (overrides TRACELAB_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the primes up to a limit.
    Sieve {
        #[arg(long)]
        limit: u64,
    },
    /// Evaluate a weight at one point.
    WeightEval {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        at: u64,
    },
    /// Build (and cache) a full weight table; print a JSON summary.
    WeightTable {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
    },
    /// Unitary Fourier transform of a weight table.
    Fourier {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        /// Print the transform at this point instead of a summary.
        #[arg(long)]
        at: Option<u32>,
    },
    /// Mellin transform (multiplicative characters) of a weight table.
    Mellin {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        at: Option<u32>,
    },
    /// Test a weight for chi(n)e(bn/p) shape via Mellin concentration.
    DetectExceptional {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Sum the weight over primes up to X.
    PrimeSum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        x: u64,
    },
    /// Sum mu(n) K(n) over n <= X.
    MoebiusSum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        x: u64,
    },
    /// Smoothed prime sum with a bump of width delta.
    SmoothedSum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Eisenstein twist: sum of K(n) d_it(n) V(n/X).
    Eisenstein {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Scan all correlation sums C(m, 1, h) for exceptional pairs.
    CorrelationScan {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        /// Threshold multiplier t: pairs with |C| > t sqrt(p) are reported.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Type II bilinear form against the bound template.
    Bilinear {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        m_len: u32,
        #[arg(long)]
        n_len: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coefficient family: pm1, unit, or chi:<j>.
        #[arg(long, default_value = "pm1")]
        kind: String,
    },
    /// Evaluate the Heath-Brown identity right-hand side at n.
    HbCheck {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        j: u32,
        #[arg(long)]
        x: u64,
        /// Check the Moebius variant instead of von Mangoldt.
        #[arg(long)]
        mu: bool,
    },
    /// Grid-minimize the saving exponent over the simplex.
    EtaMin {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 6)]
        j: u32,
        #[arg(long, default_value_t = 1.0 / 96.0)]
        step: f64,
    },
    /// Closed-form lower bound min(1/24, (4x-3)/24) and its certificate.
    EtaBound {
        #[arg(long)]
        x: f64,
    },
    /// Equidistribution report (all arguments, or primes in [Q, 2Q]).
    Satotate {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Kl_2(a; c) for an arbitrary modulus by the direct sum.
    CompositeKloosterman {
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long)]
        c: u64,
    },
    /// Semiprime large-values experiment for |Kl_m(1; pq)|.
    Largesums {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Exact arithmetic-progression error sums for a polynomial mod p.
    PolyError {
        #[arg(long)]
        p: u64,
        /// Ascending integer coefficients, comma separated.
        #[arg(long)]
        poly: String,
        #[arg(long)]
        x: u64,
    },
}

fn fmt_complex(v: Complex64) -> String {
    if v.im.abs() < 1e-12 {
        format!("{:.7}", v.re)
    } else {
        format!("{:.7}{:+.7}i", v.re, v.im)
    }
}

fn parse_spec(s: &str) -> Result<WeightSpec> {
    WeightSpec::parse(s)
}

fn parse_poly(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::validation(format!("bad coefficient {t:?}: {e}")))
        })
        .collect()
}

fn build_table(
    p: u64,
    spec: &WeightSpec,
    cache_dir: &std::path::Path,
) -> Result<(PrimeFieldContext, weights::WeightTable)> {
    let ctx = cache::build_context_cached(p, cache_dir)?;
    let table = cache::bulk_eval_cached(&ctx, spec, cache_dir)?;
    Ok((ctx, table))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
    }
    let cache_dir = cli.cache_dir.unwrap_or_else(cache::cache_dir);
    match cli.command {
        Command::Sieve { limit } => {
            let primes = sieve_primes(limit)?;
            let strs: Vec<String> = primes.iter().map(|q| q.to_string()).collect();
            outln!("{}", strs.join(" "));
        }
        Command::WeightEval { p, spec, at } => {
            let spec = parse_spec(&spec)?;
            let (_, table) = build_table(p, &spec, &cache_dir)?;
            outln!("{}", fmt_complex(table.value_int(at)));
        }
        Command::WeightTable { p, spec } => {
            let spec = parse_spec(&spec)?;
            let (_, table) = build_table(p, &spec, &cache_dir)?;
            let out = json!({
                "p": table.p,
                "spec": spec.to_sexpr(),
                "conductor_estimate": table.conductor_estimate,
                "max_abs": table.max_abs(),
                "exceptional": table.exceptional.is_some(),
                "cache_dir": cache_dir.display().to_string(),
            });
            outln!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::Fourier { p, spec, at } => {
            let spec = parse_spec(&spec)?;
            let (ctx, table) = build_table(p, &spec, &cache_dir)?;
            let ft = weights::fourier_transform(&table);
            match at {
                Some(y) => outln!("{}", fmt_complex(ft.value(y % ctx.p()))),
                None => {
                    let out = json!({"p": p, "spec": spec.to_sexpr(), "max_abs": ft.max_abs()});
                    outln!("{}", serde_json::to_string(&out).unwrap());
                }
            }
        }
        Command::Mellin { p, spec, at } => {
            let spec = parse_spec(&spec)?;
            let (ctx, table) = build_table(p, &spec, &cache_dir)?;
            let mt = weights::mellin_transform(&ctx, &table);
            match at {
                Some(j) => {
                    let idx = (j as usize) % mt.len();
                    outln!("{}", fmt_complex(mt[idx]));
                }
                None => {
                    let max = mt.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
                    let out = json!({"p": p, "spec": spec.to_sexpr(), "max_abs": max});
                    outln!("{}", serde_json::to_string(&out).unwrap());
                }
            }
        }
        Command::DetectExceptional { p, spec, tolerance } => {
            let spec = parse_spec(&spec)?;
            let (ctx, table) = build_table(p, &spec, &cache_dir)?;
            let witness = weights::detect_exceptional(&ctx, &table, tolerance, None)?;
            let out = match witness {
                Some(w) => json!({
                    "p": p, "spec": spec.to_sexpr(), "exceptional": true,
                    "chi_index": w.j, "additive_shift": w.b,
                    "scalar_re": w.scalar.re, "scalar_im": w.scalar.im,
                }),
                None => json!({"p": p, "spec": spec.to_sexpr(), "exceptional": false}),
            };
            outln!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::PrimeSum { p, spec, x } => {
            let spec = parse_spec(&spec)?;
            let (_, table) = build_table(p, &spec, &cache_dir)?;
            let report = primesums::prime_sum(&table, x)?;
            outln!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::MoebiusSum { p, spec, x } => {
            let spec = parse_spec(&spec)?;
            let (_, table) = build_table(p, &spec, &cache_dir)?;
            let report = primesums::mobius_sum(&table, x)?;
            outln!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::SmoothedSum { p, spec, x, delta } => {
            let spec = parse_spec(&spec)?;
            let (_, table) = build_table(p, &spec, &cache_dir)?;
            let v = primesums::make_bump(delta)?;
            let sum = primesums::smoothed_sum(&table, &v, x)?;
            let out = json!({
                "p": p, "spec": spec.to_sexpr(), "x": x, "delta": delta,
                "sum_re": sum.re, "sum_im": sum.im,
                "template_bound": primesums::prime_sum_template(table.p, x),
            });
            outln!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::Eisenstein { p, spec, x, delta, t } => {
            let spec = parse_spec(&spec)?;
            let (_, table) = build_table(p, &spec, &cache_dir)?;
            let v = primesums::make_bump(delta)?;
            let sum = primesums::eisenstein_twist(&table, &v, x, t)?;
            let out = json!({
                "p": p, "spec": spec.to_sexpr(), "x": x, "delta": delta, "t": t,
                "sum_re": sum.re, "sum_im": sum.im,
                "template_bound": primesums::eisenstein_template(table.p, x, v.q),
            });
            outln!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Command::CorrelationScan { p, spec, threshold } => {
            let spec = parse_spec(&spec)?;
            let (ctx, table) = build_table(p, &spec, &cache_dir)?;
            let report = correl::paucity_scan(&ctx, &table, threshold.unwrap_or(4.0), None)?;
            outln!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::Bilinear { p, spec, m_len, n_len, seed, kind } => {
            let spec = parse_spec(&spec)?;
            let (ctx, table) = build_table(p, &spec, &cache_dir)?;
            let make = |len: u32, s: u64| -> Result<Vec<Complex64>> {
                match kind.as_str() {
                    "pm1" => Ok(bilinear::random_pm1(len, s)),
                    "unit" => Ok(bilinear::random_unit(len, s)),
                    k if k.starts_with("chi:") => {
                        let j: u32 = k[4..]
                            .parse()
                            .map_err(|e| Error::validation(format!("bad chi index: {e}")))?;
                        Ok(bilinear::chi_matched(&ctx, j, len))
                    }
                    other => Err(Error::validation(format!(
                        "unknown coefficient family {other:?} (pm1, unit, chi:<j>)"
                    ))),
                }
            };
            let inst = bilinear::BilinearInstance::new(
                m_len,
                n_len,
                make(m_len, seed)?,
                make(n_len, seed.wrapping_add(1))?,
            )?;
            let report = bilinear::type2_report(&ctx, &table, &inst, seed);
            outln!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::HbCheck { n, j, x, mu } => {
            let out = if mu {
                json!({"n": n, "j": j, "x": x, "variant": "mu",
                       "value": hbdecomp::heath_brown_mu(n, j, x)?})
            } else {
                json!({"n": n, "j": j, "x": x, "variant": "vonmangoldt",
                       "value": hbdecomp::heath_brown_lambda(n, j, x)?})
            };
            outln!("{}", serde_json::to_string(&out).unwrap());
        }
        Command::EtaMin { x, j, step } => {
            let min = hbdecomp::eta_minimize(x, j, step)?;
            outln!("{}", serde_json::to_string_pretty(&min).unwrap());
        }
        Command::EtaBound { x } => {
            let bound = hbdecomp::eta_lower_bound(x)?;
            let cert = hbdecomp::delta_certificate(x)?;
            outln!("{bound}");
            eprintln!("delta = {}, J threshold = {}", cert.delta, cert.j_threshold);
        }
        Command::Satotate { p, m, q } => {
            let ctx = cache::build_context_cached(p, &cache_dir)?;
            let report = match q {
                Some(q_lo) => satotate::prime_argument_sample(&ctx, m, q_lo)?,
                None => satotate::all_arguments_report(&ctx, m)?,
            };
            outln!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::CompositeKloosterman { a, c } => {
            outln!("{}", fmt_complex(satotate::kloosterman_composite(a, c)?));
        }
        Command::Largesums { x, delta, beta, m } => {
            let report = satotate::largesums_experiment(x, delta, beta, m)?;
            outln!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Command::PolyError { p, poly, x } => {
            let coeffs = parse_poly(&poly)?;
            let ctx = cache::build_context_cached(p, &cache_dir)?;
            let sums = primesums::poly_error_sums(&ctx, &coeffs, x)?;
            let out = json!({
                "p": p, "x": x, "poly": poly,
                "over_arguments": sums.over_arguments.to_string(),
                "over_value_set": sums.over_value_set.to_string(),
                "cross_check": sums.cross_check.to_string(),
                "routes_agree": sums.over_arguments == sums.cross_check,
            });
            outln!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
