//! Command-line front end: each subcommand runs one experiment and writes a
//! CSV result plus a JSON document holding the run manifest and the full
//! result.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ramanujan_abel::mean_values::{self, Weights};
use ramanujan_abel::ramanujan::check_property_catalog;
use ramanujan_abel::report::{self, to_json};
use ramanujan_abel::rf_series::{self, required_q};
use ramanujan_abel::singular::{self, SeriesCoefficient, DEFAULT_PRIME_BOUND};
use ramanujan_abel::{CqEvaluator, Error, SieveTables, TupleSpec};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Environment variable naming the default sieve cache directory.
const CACHE_ENV: &str = "RAMANUJAN_ABEL_CACHE";

#[derive(Debug, Parser)]
#[command(
    name = "ramanujan-abel",
    version,
    about = "Ramanujan sums and Hardy-Littlewood mean values"
)]
struct Cli {
    /// Worker threads (numeric output does not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Directory for cached sieve tables [env: RAMANUJAN_ABEL_CACHE].
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Write <STEM>.csv and <STEM>.json instead of CSV on stdout and the
    /// manifest on stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// Build (or load) sieve tables and print their checksum.
    Sieve(SieveArgs),
    /// Print c_q(n).
    Csum(CsumArgs),
    /// Mean of w(n)·w(n+h) against the pair constant (0 for odd h).
    Autocorr(AutocorrArgs),
    /// Mean of w(n)·w((bn+l)/a) over a | bn+l against (2C2/a)·Π(p-1)/(p-2).
    Conjd(ConjdArgs),
    /// Prime-constellation mean against its singular series.
    Tuple(TupleArgs),
    /// Mean of Λ₁(n), predicted 1.
    Pnt(PntArgs),
    /// Mean of c_q(f(n)) for an integer polynomial f.
    Polymean(PolymeanArgs),
    /// Mean of c_q(n) (limit [q=1]).
    Cqmean(CqmeanArgs),
    /// Mean of c_r(n)·c_s(n+m) (limit c_r(m)·[r=s]).
    Ortho(OrthoArgs),
    /// Σ_{n≤2N} c_q1(n)·c_q2(2N−n), exactly.
    Goldbach(GoldbachArgs),
    /// Hardy-Littlewood constants as truncated Euler products.
    Singular(SingularArgs),
    /// Λ₁(Q, z, x) along a ladder of z values.
    Abel(AbelArgs),
    /// Truncated Ramanujan-Fourier expansions of σ, d and the lattice count.
    Rf(RfArgs),
    /// Ramanujan-sum property catalog; exit 1 if any check fails.
    Props(PropsArgs),
}

#[derive(Debug, Args, Serialize)]
struct SieveArgs {
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Table file to load from or save to.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CsumArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
    #[arg(long = "n", allow_hyphen_values = true)]
    n: i64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WeightArg {
    Lambda,
    Lambda1,
}

impl From<WeightArg> for Weights {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Lambda => Weights::Lambda,
            WeightArg::Lambda1 => Weights::Lambda1,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct AutocorrArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    gap: u64,
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_enum, default_value = "lambda1")]
    weights: WeightArg,
}

#[derive(Debug, Args, Serialize)]
struct ConjdArgs {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    b: u64,
    #[arg(long)]
    l: u64,
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_enum, default_value = "lambda1")]
    weights: WeightArg,
}

#[derive(Debug, Args, Serialize)]
struct TupleArgs {
    /// Comma-separated offsets starting at 0, e.g. 0,2,6.
    #[arg(long, value_delimiter = ',', required = true)]
    offsets: Vec<u64>,
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
}

#[derive(Debug, Args, Serialize)]
struct PntArgs {
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Stream Λ₁ in segments instead of building full tables.
    #[arg(long)]
    streamed: bool,
    #[arg(long, default_value_t = ramanujan_abel::sieve::DEFAULT_SEGMENT)]
    segment: usize,
}

#[derive(Debug, Args, Serialize)]
struct PolymeanArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
    /// Coefficients in ascending degree: 1,0,1 is n²+1.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    poly: Vec<i64>,
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
}

#[derive(Debug, Args, Serialize)]
struct CqmeanArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
}

#[derive(Debug, Args, Serialize)]
struct OrthoArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    r: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    s: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    m: i64,
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
}

#[derive(Debug, Args, Serialize)]
struct GoldbachArgs {
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q1: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q2: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FormArg {
    #[value(name = "C2", alias = "c2")]
    C2,
    Pair,
    Conjd,
    Tuple,
    Series,
    SeriesWk,
}

#[derive(Debug, Args, Serialize)]
struct SingularArgs {
    #[arg(long, value_enum)]
    form: FormArg,
    /// Comma-separated integers: gap for pair, a,b,l for conjd, offsets for
    /// tuple, h for series forms.
    #[arg(long, value_delimiter = ',')]
    params: Vec<u64>,
    /// Prime bound P.
    #[arg(long = "p", default_value_t = DEFAULT_PRIME_BOUND)]
    p: u64,
    /// Also report the raw q-ordered series truncated at this Q (series forms).
    #[arg(long)]
    raw_q: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct AbelArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, value_delimiter = ',', default_values_t = rf_series::DEFAULT_LADDER)]
    zs: Vec<f64>,
    #[arg(long, default_value_t = rf_series::DEFAULT_LADDER_EPSILON)]
    eps: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum RfFunction {
    Sigma,
    Divisor,
    Lattice,
}

#[derive(Debug, Args, Serialize)]
struct RfArgs {
    #[arg(long, value_enum)]
    function: RfFunction,
    /// Argument n (or a for the lattice count).
    #[arg(long = "n")]
    n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
}

#[derive(Debug, Args, Serialize)]
struct PropsArgs {
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    qmax: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    nmax: u64,
}

/// What a subcommand produced.
struct Outcome {
    csv: String,
    result: Value,
    sieve_bound: Option<usize>,
    checks_failed: bool,
    summary: Option<String>,
}

impl Outcome {
    fn new(csv: String, result: Value) -> Self {
        Self {
            csv,
            result,
            sieve_bound: None,
            checks_failed: false,
            summary: None,
        }
    }

    fn with_sieve(mut self, tables: &SieveTables) -> Self {
        self.sieve_bound = Some(tables.bound());
        self
    }
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command_line: Vec<String>,
    version: &'static str,
    sieve_bound: Option<usize>,
    threads: Option<u64>,
    parameters: Value,
    duration_seconds: f64,
    output_sha256: String,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("i/o error on {}: {e}", path.display()))
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize infallibly")
}

struct Context {
    cache_dir: Option<PathBuf>,
}

impl Context {
    fn cache_path(&self, n: usize) -> Option<PathBuf> {
        self.cache_dir
            .as_ref()
            .map(|d| d.join(format!("sieve-v1-{n}.bin")))
    }

    fn tables(&self, n: usize) -> Result<SieveTables, Failure> {
        self.tables_at(n, self.cache_path(n).as_deref())
    }

    /// Loads tables for exactly `n` from `cache` when present, else builds
    /// them and saves to `cache`.
    fn tables_at(&self, n: usize, cache: Option<&Path>) -> Result<SieveTables, Failure> {
        if let Some(path) = cache {
            if path.exists() {
                let t = SieveTables::load(path)?;
                if t.bound() == n {
                    return Ok(t);
                }
            }
        }
        let t = SieveTables::build(n)?;
        if let Some(path) = cache {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            }
            t.save(path)?;
        }
        Ok(t)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn run(cmd: &Command, ctx: &Context) -> Result<Outcome, Failure> {
    match cmd {
        Command::Sieve(a) => {
            let t = ctx.tables_at(
                a.n as usize,
                a.cache
                    .as_deref()
                    .or(ctx.cache_path(a.n as usize).as_deref()),
            )?;
            let checksum = sha256_hex(&t.to_bytes());
            let csv = format!("N,sha256\n{},{checksum}\n", t.bound());
            let mut out = Outcome::new(csv, json!({ "N": t.bound(), "sha256": checksum }));
            out.summary = Some(format!("N={} checksum={checksum}", t.bound()));
            Ok(out.with_sieve(&t))
        }
        Command::Csum(a) => {
            let t = ctx.tables(a.q as usize)?;
            let v = CqEvaluator::new(&t).cq_int(a.q, a.n)?;
            let csv = format!("q,n,c_q(n)\n{},{},{v}\n", a.q, a.n);
            Ok(Outcome::new(csv, json!({ "q": a.q, "n": a.n, "value": v })).with_sieve(&t))
        }
        Command::Autocorr(a) => {
            let t = ctx.tables((a.n + a.gap) as usize)?;
            let r = mean_values::pair_autocorrelation(&t, a.gap, a.n, a.weights.into())?;
            let label = format!("gap{}", a.gap);
            Ok(Outcome::new(report::mean_reports_csv(&[(&label, &r)]), value(&r)).with_sieve(&t))
        }
        Command::Conjd(a) => {
            singular::check_conjecture_d(a.a, a.b, a.l)?;
            let t = ctx.tables(((a.b * a.n + a.l) / a.a) as usize)?;
            let r = mean_values::conjecture_d_mean(&t, a.a, a.b, a.l, a.n, a.weights.into())?;
            let label = format!("conjd({};{};{})", a.a, a.b, a.l);
            Ok(Outcome::new(report::mean_reports_csv(&[(&label, &r)]), value(&r)).with_sieve(&t))
        }
        Command::Tuple(a) => {
            let spec = TupleSpec::new(a.offsets.clone())?;
            let t = ctx.tables((a.n + spec.max_offset()) as usize)?;
            let r = mean_values::tuple_mean(&t, &spec, a.n)?;
            let csv = report::mean_reports_csv(&[("lambda", &r.lambda), ("lambda1", &r.lambda1)]);
            Ok(Outcome::new(csv, value(&r)).with_sieve(&t))
        }
        Command::Pnt(a) => {
            if a.streamed {
                let r = mean_values::pnt_mean_streamed(a.n, a.segment)?;
                Ok(Outcome::new(
                    report::mean_reports_csv(&[("pnt", &r)]),
                    value(&r),
                ))
            } else {
                let t = ctx.tables(a.n as usize)?;
                let r = mean_values::pnt_mean(&t, a.n)?;
                Ok(
                    Outcome::new(report::mean_reports_csv(&[("pnt", &r)]), value(&r))
                        .with_sieve(&t),
                )
            }
        }
        Command::Polymean(a) => {
            let t = ctx.tables(a.q as usize)?;
            let r = mean_values::polynomial_cq_mean(&CqEvaluator::new(&t), a.q, &a.poly, a.n)?;
            let label = format!("q{}", a.q);
            Ok(
                Outcome::new(report::mean_reports_csv(&[(&label, &r.report)]), value(&r))
                    .with_sieve(&t),
            )
        }
        Command::Cqmean(a) => {
            let t = ctx.tables(a.q as usize)?;
            let r = mean_values::cq_mean(&CqEvaluator::new(&t), a.q, a.n)?;
            let label = format!("q{}", a.q);
            Ok(
                Outcome::new(report::mean_reports_csv(&[(&label, &r.report)]), value(&r))
                    .with_sieve(&t),
            )
        }
        Command::Ortho(a) => {
            let t = ctx.tables(a.r.max(a.s) as usize)?;
            let r = mean_values::cq_orthogonality(&CqEvaluator::new(&t), a.r, a.s, a.m, a.n)?;
            let label = format!("r{}s{}m{}", a.r, a.s, a.m);
            Ok(
                Outcome::new(report::mean_reports_csv(&[(&label, &r.report)]), value(&r))
                    .with_sieve(&t),
            )
        }
        Command::Goldbach(a) => {
            let t = ctx.tables(a.q1.max(a.q2) as usize)?;
            let v = mean_values::goldbach_correlation(&CqEvaluator::new(&t), a.n, a.q1, a.q2)?;
            let csv = format!("N,q1,q2,sum\n{},{},{},{v}\n", a.n, a.q1, a.q2);
            let result = json!({ "N": a.n, "q1": a.q1, "q2": a.q2, "sum": v.to_string() });
            Ok(Outcome::new(csv, result).with_sieve(&t))
        }
        Command::Singular(a) => run_singular(a, ctx),
        Command::Abel(a) => {
            let mut need = if a.x.fract() == 0.0 && a.x >= 1.0 {
                a.x as u64
            } else {
                1
            };
            for &z in &a.zs {
                need = need.max(required_q(z, a.eps)?);
            }
            let t = ctx.tables(need as usize)?;
            let trace = rf_series::abel_ladder(&CqEvaluator::new(&t), a.x, &a.zs, a.eps)?;
            Ok(Outcome::new(report::abel_trace_csv(&trace), value(&trace)).with_sieve(&t))
        }
        Command::Rf(a) => {
            let need = match a.function {
                RfFunction::Lattice => 2 * a.q - 1,
                _ => a.q.max(a.n),
            };
            let t = ctx.tables(need.max(1) as usize)?;
            let eval = CqEvaluator::new(&t);
            let d = match a.function {
                RfFunction::Sigma => rf_series::sigma_rf(&eval, a.n, a.q)?,
                RfFunction::Divisor => rf_series::divisor_rf(&eval, a.n, a.q)?,
                RfFunction::Lattice => rf_series::circle_lattice_rf(&eval, a.n, a.q)?,
            };
            let mut result = value(&d);
            if let RfFunction::Lattice = a.function {
                result["sum_of_two_squares"] = json!(rf_series::sum_of_two_squares_count(a.n));
            }
            Ok(Outcome::new(report::rf_diagnostic_csv(&d), result).with_sieve(&t))
        }
        Command::Props(a) => {
            let t = ctx.tables(a.qmax.max(a.nmax) as usize)?;
            let eval = CqEvaluator::new(&t).with_direct_threshold(
                a.qmax
                    .max(ramanujan_abel::ramanujan::DEFAULT_DIRECT_THRESHOLD),
            );
            let r = check_property_catalog(&eval, a.qmax, a.nmax)?;
            let mut out = Outcome::new(report::properties_csv(&r), value(&r)).with_sieve(&t);
            out.checks_failed = !r.all_passed();
            Ok(out)
        }
    }
}

fn one_param(a: &SingularArgs, what: &str) -> Result<u64, Failure> {
    match a.params.as_slice() {
        [v] => Ok(*v),
        _ => Err(Failure::Usage(format!("--params must be a single {what}"))),
    }
}

fn run_singular(a: &SingularArgs, ctx: &Context) -> Result<Outcome, Failure> {
    let mut constants = Vec::new();
    let mut raw = Vec::new();
    let mut sieve_bound = None;
    match a.form {
        FormArg::C2 => constants.push(singular::twin_constant(a.p)?),
        FormArg::Pair => constants.push(singular::pair_constant(one_param(a, "gap")?, a.p)?),
        FormArg::Conjd => match a.params.as_slice() {
            &[x, y, z] => constants.push(singular::conjecture_d_constant(x, y, z, a.p)?),
            _ => return Err(Failure::Usage("--params must be a,b,l".into())),
        },
        FormArg::Tuple => {
            let spec = TupleSpec::new(a.params.clone())?;
            constants.push(singular::tuple_constant(&spec, a.p)?);
        }
        FormArg::Series | FormArg::SeriesWk => {
            // both conventions side by side, plus the pair constant for even h
            let h = one_param(a, "h")?;
            constants.push(singular::series_constant(h, a.p)?);
            constants.push(singular::series_wk(h, a.p)?);
            if h % 2 == 0 {
                constants.push(singular::pair_constant(h, a.p)?);
            }
            if let Some(q0) = a.raw_q {
                let t = ctx.tables(q0 as usize)?;
                sieve_bound = Some(t.bound());
                for c in [
                    SeriesCoefficient::MuOverPhi,
                    SeriesCoefficient::MuOverPhiSquared,
                ] {
                    raw.push(singular::series_raw_sum(&t, h, q0, c)?);
                }
            }
        }
    }
    let result = if raw.is_empty() {
        value(&constants)
    } else {
        json!({ "constants": constants, "raw_sums": raw })
    };
    let mut out = Outcome::new(report::constants_csv(&constants), result);
    out.sieve_bound = sieve_bound;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k as usize)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let ctx = Context {
        cache_dir: cli
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)),
    };

    let started = Instant::now();
    let outcome = match run(&cli.command, &ctx) {
        Ok(o) => o,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let manifest = RunManifest {
        command_line: std::env::args().collect(),
        version: env!("CARGO_PKG_VERSION"),
        sieve_bound: outcome.sieve_bound,
        threads: cli.threads,
        parameters: value(&cli.command),
        duration_seconds: started.elapsed().as_secs_f64(),
        output_sha256: sha256_hex(outcome.csv.as_bytes()),
    };
    let document = to_json(&json!({ "manifest": manifest, "result": outcome.result }));

    if let Some(line) = &outcome.summary {
        eprintln!("{line}");
    }
    match &cli.out {
        Some(stem) => {
            let csv_path = stem.with_extension("csv");
            let json_path = stem.with_extension("json");
            for (path, body) in [(&csv_path, &outcome.csv), (&json_path, &document)] {
                if let Err(e) = std::fs::write(path, body) {
                    eprintln!("error: i/o error on {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
        }
        None => {
            print!("{}", outcome.csv);
            eprintln!("{document}");
        }
    }
    if outcome.checks_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
