use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hecke_signs::forms::{self, DEFAULT_CEILING};
use hecke_signs::hecke::{chebyshev_value, classify_zero_pattern};
use hecke_signs::oscillation::{
    find_simultaneous_sign_changes, rankin_coefficients, write_rankin_csv, RankinParams,
};
use hecke_signs::satotate::{density_closed_form, st_sample, SignChoice};
use hecke_signs::sign_analysis::empirical_prime_density;
use hecke_signs::Error;

/// Overrides the largest accepted `--limit` / `--x`.
const CEILING_ENV: &str = "HECKE_SIGNS_MAX_LIMIT";
const DEFAULT_SEED: u64 = 1729;
const MAX_SAMPLES: u64 = 100_000_000;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "hecke-signs", version, about = "Signs and zeros of Hecke eigenvalues at prime powers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write τ(n) for n <= limit as `n,C` CSV and print its sha256.
    Tau {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
        /// Output file; CSV goes to stdout and the checksum to stderr without it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the share of primes with a given sign of C(p^m) to its predicted density.
    Density {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        m: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        x: u64,
        /// `delta`, `weight16`, or a path to a prime-table CSV.
        #[arg(long)]
        form: String,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: SignChoice,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Classify the exponents r with C(p^r) = 0.
    Zeros {
        #[arg(long, allow_hyphen_values = true)]
        ap: BigInt,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        norm: u64,
        #[arg(long)]
        weight: u32,
    },
    /// Simultaneous signs of Δ and the weight-16 form, and the Rankin-Selberg b_m.
    Oscillate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
        /// Write b_m as `m,b` CSV.
        #[arg(long)]
        bm_out: Option<PathBuf>,
    },
    /// Monte-Carlo sign frequencies of U_m(cos θ) under Sato-Tate vs. the closed form.
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        m: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_SAMPLES))]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidWeight(_) | Error::CeilingExceeded { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn ceiling() -> Result<usize, Failure> {
    match std::env::var(CEILING_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{CEILING_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_CEILING),
    }
}

fn bounded(value: u64) -> Result<usize, Failure> {
    let ceiling = ceiling()?;
    match usize::try_from(value) {
        Ok(v) if v <= ceiling => Ok(v),
        _ => Err(Failure::Usage(format!(
            "{value} exceeds the ceiling {ceiling} (set {CEILING_ENV} to raise it)"
        ))),
    }
}

/// Pretty JSON with keys sorted at every level.
fn print_json(value: &Value) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()
}

fn cmd_tau(limit: u64, out: Option<PathBuf>) -> Outcome {
    let table = forms::delta_expansion_with_ceiling(bounded(limit)?, ceiling()?)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let digest = Sha256::digest(&csv);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    match out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(&path)?);
            f.write_all(&csv)?;
            f.flush()?;
            println!("sha256 {hex}  {}", path.display());
        }
        None => {
            io::stdout().lock().write_all(&csv)?;
            eprintln!("sha256 {hex}");
        }
    }
    Ok(true)
}

fn cmd_density(m: u32, x: u64, form: &str, sign: SignChoice, tolerance: Option<f64>) -> Outcome {
    let x_bound = bounded(x)?;
    let eigenform = match forms::builtin_form(form, x_bound, ceiling()?) {
        Some(built) => built?,
        None => forms::load_csv(form)?,
    };
    let mut report = empirical_prime_density(&eigenform, m, sign, x)?;
    if let Some(t) = tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("tolerance must be finite and >= 0, got {t}")));
        }
        report = report.with_tolerance(t);
    }
    let value = serde_json::to_value(&report).map_err(io::Error::other)?;
    print_json(&value)?;
    Ok(report.pass)
}

fn cmd_zeros(ap: &BigInt, norm: u64, weight: u32) -> Outcome {
    let pattern = classify_zero_pattern(ap, norm, weight)?;
    let value = serde_json::to_value(pattern).map_err(io::Error::other)?;
    print_json(&value)?;
    Ok(true)
}

fn extreme(b: &[BigInt], pick_max: bool) -> Value {
    let found = if pick_max {
        b.iter().enumerate().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))
    } else {
        b.iter().enumerate().min_by(|x, y| x.1.cmp(y.1).then(x.0.cmp(&y.0)))
    };
    found.map_or(Value::Null, |(i, v)| json!({ "m": i + 1, "value": v.to_string() }))
}

fn cmd_oscillate(limit: u64, bm_out: Option<PathBuf>) -> Outcome {
    let ceiling = ceiling()?;
    let limit = bounded(limit)?;
    let f = forms::delta_expansion_with_ceiling(limit, ceiling)?;
    let g = forms::weight16_expansion_with_ceiling(limit, ceiling)?;
    let signs = find_simultaneous_sign_changes(&f, &g, limit);
    let params = RankinParams { n_coprime_to: 1, c1: 1, k0: 12, l0: 16 };
    let b = rankin_coefficients(&f, &g, params, limit)?;
    if let Some(path) = bm_out {
        write_rankin_csv(&b, BufWriter::new(File::create(path)?))?;
    }
    let zero = BigInt::from(0);
    let positive = b.iter().filter(|v| **v > zero).count();
    let negative = b.iter().filter(|v| **v < zero).count();
    let pass = signs.first_positive.is_some()
        && signs.first_negative.is_some()
        && positive > 0
        && negative > 0;
    print_json(&json!({
        "limit": limit,
        "forms": ["delta", "weight16"],
        "first_positive": signs.first_positive,
        "first_negative": signs.first_negative,
        "rankin": {
            "k0": params.k0,
            "l0": params.l0,
            "c1": params.c1,
            "n_coprime_to": params.n_coprime_to,
            "positive": positive,
            "negative": negative,
            "zero": b.len() - positive - negative,
            "max": extreme(&b, true),
            "min": extreme(&b, false),
        },
        "pass": pass,
    }))?;
    Ok(pass)
}

fn cmd_simulate(m: u32, samples: u64, seed: u64) -> Outcome {
    let thetas = st_sample(seed, samples as usize)?;
    let (mut pos, mut neg) = (0u64, 0u64);
    for &theta in &thetas {
        let v = chebyshev_value(theta, m as usize);
        if SignChoice::Positive.matches(v) {
            pos += 1;
        } else if SignChoice::Negative.matches(v) {
            neg += 1;
        }
    }
    let tolerance = 4.0 / (samples as f64).sqrt();
    let mut pass = true;
    let mut side = |count: u64, sign: SignChoice| -> Result<Value, Failure> {
        let predicted = density_closed_form(m, sign)?;
        let empirical = count as f64 / samples as f64;
        pass &= (empirical - predicted).abs() <= tolerance;
        Ok(json!({ "count": count, "empirical": empirical, "predicted": predicted }))
    };
    let positive = side(pos, SignChoice::Positive)?;
    let negative = side(neg, SignChoice::Negative)?;
    print_json(&json!({
        "m": m,
        "samples": samples,
        "seed": seed,
        "tolerance": tolerance,
        "positive": positive,
        "negative": negative,
        "pass": pass,
    }))?;
    Ok(pass)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Tau { limit, out } => cmd_tau(limit, out),
        Command::Density { m, x, form, sign, tolerance } => cmd_density(m, x, &form, sign, tolerance),
        Command::Zeros { ap, norm, weight } => cmd_zeros(&ap, norm, weight),
        Command::Oscillate { limit, bm_out } => cmd_oscillate(limit, bm_out),
        Command::Simulate { m, samples, seed } => cmd_simulate(m, samples, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
