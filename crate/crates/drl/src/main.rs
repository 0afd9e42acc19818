//! `drl`: longest-run scans, bound tables, inequality checks, and
//! Jacobsthal tables from the command line.
//!
//! Output is provenance-stamped and deterministic: equal configurations
//! produce byte-identical CSV bodies, and files are written atomically.
//! Exit codes are stable: 0 success, 2 configuration error, 3 checkpoint
//! mismatch, 4 sieved data required but unavailable under `--no-sieve`,
//! 5 exact-check violation, 6 Jacobsthal budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use divrun::bounds::{self, BoundParams};
use divrun::jacobsthal::{primorial_table, DEFAULT_BUDGET};
use divrun::lemmas::{run_selected, LemmaId, Verdict, VerifyLimits};
use divrun::report::{self, Meta};
use divrun::sieve::{RunCensus, ScanConfig, ScanState, SieveCheckpoint, DEFAULT_SEGMENT_WIDTH};
use divrun::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_CHECKPOINT: u8 = 3;
const EXIT_NOT_SIEVED: u8 = 4;
const EXIT_VIOLATION: u8 = 5;
const EXIT_BUDGET: u8 = 6;

/// Segments between checkpoint writes during a scan.
const CHECKPOINT_EVERY: u64 = 64;

#[derive(Parser)]
#[command(
    name = "drl",
    version,
    about = "Longest runs of equal divisor counts: scans, bounds, checks, tables",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a domain for runs of equal divisor counts.
    Scan(ScanArgs),
    /// Compare sieved run lengths against the analytic bounds.
    Bounds(BoundsArgs),
    /// Machine-check the supporting inequalities.
    Verify(VerifyArgs),
    /// Jacobsthal function table for primorial moduli.
    Jacobsthal(JacobsthalArgs),
    /// Render a saved scan checkpoint without scanning.
    Report(ReportArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here (atomically) instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format; `verify` is always JSON.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; DRL_THREADS, then all cores, when absent.
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
    /// Seed for randomized checks, recorded in the output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// An inclusive scan domain, parsed from `LO:HI`.
#[derive(Copy, Clone, Debug)]
struct Domain {
    lo: u64,
    hi: u64,
}

#[derive(Args)]
struct ScanArgs {
    /// Scan [1, N].
    #[arg(long, value_parser = parse_natural, conflicts_with = "window")]
    n: Option<u64>,
    /// Scan [LO, HI], both ends inclusive.
    #[arg(long, value_name = "LO:HI", value_parser = parse_window)]
    window: Option<Domain>,
    /// Sieve segment width; results never depend on it.
    #[arg(long, value_name = "W", value_parser = parse_natural)]
    segment_width: Option<u64>,
    /// Also record every maximal run at least this long.
    #[arg(long, value_name = "K", value_parser = parse_natural)]
    collect_runs: Option<u64>,
    /// Write a resumable checkpoint here at segment boundaries.
    #[arg(long, value_name = "PATH")]
    checkpoint: Option<PathBuf>,
    /// Continue from this checkpoint when the file exists.
    #[arg(long, value_name = "PATH")]
    resume: Option<PathBuf>,
    /// Stop after this many segments; the report is written only if the
    /// scan finished.
    #[arg(long, value_name = "K", value_parser = parse_natural)]
    stop_after: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BoundsArgs {
    /// Largest N; one comparison row per milestone up to it.
    #[arg(long, value_parser = parse_natural)]
    n: u64,
    /// Leading constant of theorem1 and theorem2.
    #[arg(long, default_value_t = BoundParams::default().c)]
    c: f64,
    /// Auxiliary constant of the pivot inequality.
    #[arg(long, default_value_t = BoundParams::default().c1)]
    c1: f64,
    /// Auxiliary constant of the pivot inequality.
    #[arg(long, default_value_t = BoundParams::default().c2)]
    c2: f64,
    /// Epsilon of the explicit bound.
    #[arg(long, default_value_t = BoundParams::default().eps)]
    eps: f64,
    /// Reuse this scan checkpoint for the sieved values.
    #[arg(long, value_name = "PATH")]
    from_scan: Option<PathBuf>,
    /// Segment width the checkpointed scan was started with.
    #[arg(long, value_name = "W", value_parser = parse_natural)]
    segment_width: Option<u64>,
    /// Refuse to sieve; fail unless --from-scan already covers N.
    #[arg(long)]
    no_sieve: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check to run (repeatable); all nine when omitted.
    #[arg(long = "lemma", value_name = "ID", value_parser = parse_lemma)]
    lemmas: Vec<LemmaId>,
    /// Range limit applied to every selected check.
    #[arg(long, value_parser = parse_natural)]
    max: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct JacobsthalArgs {
    /// Largest primorial generator M.
    #[arg(long, value_parser = parse_natural, default_value_t = 19)]
    max_m: u64,
    /// Period budget: the largest modulus scanned in full.
    #[arg(long, value_parser = parse_natural, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Emit the feasible prefix instead of failing on budget overflow.
    #[arg(long)]
    truncate: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// The checkpoint to render.
    #[arg(long, value_name = "PATH")]
    checkpoint: PathBuf,
    /// The --n the checkpointed scan was started with.
    #[arg(long, value_parser = parse_natural, conflicts_with = "window")]
    n: Option<u64>,
    /// The --window the checkpointed scan was started with.
    #[arg(long, value_name = "LO:HI", value_parser = parse_window)]
    window: Option<Domain>,
    /// The --segment-width the checkpointed scan was started with.
    #[arg(long, value_name = "W", value_parser = parse_natural)]
    segment_width: Option<u64>,
    /// The --collect-runs the checkpointed scan was started with.
    #[arg(long, value_name = "K", value_parser = parse_natural)]
    collect_runs: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

/// A command failure: what to print and which stable exit code to use.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    fn at(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CheckpointMismatch { .. } => EXIT_CHECKPOINT,
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(command) = cli.command else {
        print_capabilities();
        return ExitCode::SUCCESS;
    };
    let result = match command {
        Command::Scan(args) => cmd_scan(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Jacobsthal(args) => cmd_jacobsthal(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn print_capabilities() {
    let p = BoundParams::default();
    println!("drl: longest runs of equal divisor counts, and the machinery around them");
    println!();
    println!("commands:");
    println!("  scan        segmented divisor-count sieve with checkpoint/resume");
    println!("  bounds      sieved ell(N) next to the analytic upper bounds");
    println!("  verify      machine-check the supporting inequalities");
    println!("  jacobsthal  exact Jacobsthal function for primorial moduli");
    println!("  report      render a saved scan checkpoint without scanning");
    println!();
    println!("bound shapes (C={}, C1={}, C2={}, eps={}):", p.c, p.c1, p.c2, p.eps);
    println!("  theorem1   ell(N) <= exp(C * sqrt(log N * log log N))");
    println!("  explicit   ell(N) <= exp(sqrt((1/2 + eps) * log N * log log N))");
    println!("  theorem2   ell(N) <= exp(C * cbrt(log N * log log N))  [conditional on C]");
    println!();
    println!("run `drl <command> --help` for flags");
}

fn cmd_scan(args: ScanArgs) -> Result<(), Failure> {
    init_threads(args.output.threads)?;
    let started = Instant::now();
    let config = scan_config(args.n, args.window, args.segment_width, args.collect_runs)?;

    let mut state = match &args.resume {
        Some(path) if path.exists() => {
            let checkpoint = SieveCheckpoint::read_file(path)?;
            ScanState::resume(checkpoint, config.clone())?
        }
        _ => ScanState::new(config.clone())?,
    };

    let mut stepped = 0u64;
    while !state.is_done() && args.stop_after.is_none_or(|k| stepped < k) {
        state.step();
        stepped += 1;
        if stepped % CHECKPOINT_EVERY == 0 {
            if let Some(path) = &args.checkpoint {
                state.checkpoint().write_file(path)?;
            }
        }
    }
    if let Some(path) = &args.checkpoint {
        state.checkpoint().write_file(path)?;
    }

    if !state.is_done() {
        if args.checkpoint.is_none() {
            return Err(Failure::config(
                "--stop-after left the scan unfinished and no --checkpoint was given",
            ));
        }
        eprintln!(
            "scan stopped at {} of {}; checkpoint written, no report",
            state.position(),
            config.n
        );
        return Ok(());
    }

    let meta = Meta::new(command_line(), scan_config_json(&config, None))
        .with_seed(args.output.seed)
        .with_digest(format!("{:016x}", config.digest()))
        .with_elapsed(started.elapsed().as_secs_f64());
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report::scan_csv(&meta, state.rows(), state.census()),
        Format::Json => {
            report::scan_json(&meta, state.rows(), state.census(), state.long_runs())
        }
    };
    emit(&args.output.out, &text)
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Failure> {
    init_threads(args.output.threads)?;
    let started = Instant::now();
    let params = BoundParams::new(args.c, args.c1, args.c2, args.eps)?;
    let config = ScanConfig {
        segment_width: args.segment_width.unwrap_or(DEFAULT_SEGMENT_WIDTH),
        ..ScanConfig::up_to(args.n)
    };

    let state = match &args.from_scan {
        Some(path) => {
            let checkpoint = SieveCheckpoint::read_file(path)?;
            let mut state = ScanState::resume(checkpoint, config.clone())?;
            if !state.is_done() {
                if args.no_sieve {
                    return Err(Failure::at(
                        EXIT_NOT_SIEVED,
                        format!(
                            "checkpoint stops at {} but --no-sieve forbids scanning on to {}",
                            state.position(),
                            config.n
                        ),
                    ));
                }
                state.run_to_end();
            }
            state
        }
        None => {
            if args.no_sieve {
                return Err(Failure::at(
                    EXIT_NOT_SIEVED,
                    "N is not sieved yet: --no-sieve needs --from-scan with a finished scan",
                ));
            }
            let mut state = ScanState::new(config.clone())?;
            state.run_to_end();
            state
        }
    };

    let comparisons = bounds::compare_rows(state.rows(), &params)?;
    let digest = params.digest_hex();
    let config_echo = json!({
        "n": args.n,
        "c": params.c,
        "c1": params.c1,
        "c2": params.c2,
        "eps": params.eps,
        "no_sieve": args.no_sieve,
        "segment_width": config.segment_width,
    });
    let meta = Meta::new(command_line(), config_echo)
        .with_seed(args.output.seed)
        .with_digest(digest.clone())
        .with_elapsed(started.elapsed().as_secs_f64());
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report::bounds_csv(&meta, &digest, &comparisons),
        Format::Json => report::bounds_json(&meta, &digest, &comparisons),
    };
    emit(&args.output.out, &text)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    init_threads(args.output.threads)?;
    if args.output.format == Some(Format::Csv) {
        return Err(Failure::config("verify reports are JSON; csv is not available"));
    }
    let started = Instant::now();

    let mut limits = VerifyLimits::default();
    if let Some(max) = args.max {
        let targets: &[LemmaId] = if args.lemmas.is_empty() { &LemmaId::ALL } else { &args.lemmas };
        for id in targets {
            limits = limits.with_max(*id, max);
        }
    }
    let reports = run_selected(&args.lemmas, &limits, args.output.seed)?;

    let selected: Vec<String> = args.lemmas.iter().map(|id| id.to_string()).collect();
    let config_echo = json!({
        "lemmas": if selected.is_empty() { json!("all") } else { json!(selected) },
        "max": args.max,
    });
    let meta = Meta::new(command_line(), config_echo)
        .with_seed(args.output.seed)
        .with_elapsed(started.elapsed().as_secs_f64());
    let text = report::lemmas_json(&meta, &reports);
    emit(&args.output.out, &text)?;

    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        return Err(Failure::at(
            EXIT_VIOLATION,
            "an exact check found violations; witnesses are in the report",
        ));
    }
    Ok(())
}

fn cmd_jacobsthal(args: JacobsthalArgs) -> Result<(), Failure> {
    init_threads(args.output.threads)?;
    let started = Instant::now();
    let table = primorial_table(args.max_m, args.budget, args.truncate)?;
    let config_echo = json!({
        "max_m": args.max_m,
        "budget": args.budget,
        "truncate": args.truncate,
    });
    let meta = Meta::new(command_line(), config_echo)
        .with_seed(args.output.seed)
        .with_elapsed(started.elapsed().as_secs_f64());
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report::jacobsthal_csv(&meta, &table),
        Format::Json => report::jacobsthal_json(&meta, &table),
    };
    emit(&args.output.out, &text)
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let config = scan_config(args.n, args.window, args.segment_width, args.collect_runs)?;
    let checkpoint = SieveCheckpoint::read_file(&args.checkpoint)?;
    if checkpoint.config_digest != config.digest() {
        return Err(Failure::at(
            EXIT_CHECKPOINT,
            format!(
                "checkpoint {} was not produced by this configuration",
                args.checkpoint.display()
            ),
        ));
    }

    let census: RunCensus = checkpoint.census.iter().copied().collect();
    let meta = Meta::new(command_line(), scan_config_json(&config, Some(checkpoint.next_lo)))
        .with_seed(args.output.seed)
        .with_digest(format!("{:016x}", checkpoint.config_digest))
        .with_elapsed(started.elapsed().as_secs_f64());
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report::scan_csv(&meta, &checkpoint.rows, &census),
        Format::Json => {
            report::scan_json(&meta, &checkpoint.rows, &census, &checkpoint.long_runs)
        }
    };
    emit(&args.output.out, &text)
}

fn scan_config(
    n: Option<u64>,
    window: Option<Domain>,
    segment_width: Option<u64>,
    collect_runs: Option<u64>,
) -> Result<ScanConfig, Failure> {
    let (lo, n) = match (n, window) {
        (Some(n), None) => (1, n),
        (None, Some(d)) => (d.lo, d.hi),
        _ => return Err(Failure::config("exactly one of --n or --window is required")),
    };
    Ok(ScanConfig {
        lo,
        n,
        segment_width: segment_width.unwrap_or(DEFAULT_SEGMENT_WIDTH),
        collect_runs_at_least: collect_runs,
    })
}

fn scan_config_json(config: &ScanConfig, position: Option<u64>) -> serde_json::Value {
    let mut echo = json!({
        "lo": config.lo,
        "n": config.n,
        "segment_width": config.segment_width,
        "collect_runs_at_least": config.collect_runs_at_least,
    });
    if let Some(next_lo) = position {
        echo["position"] = json!(next_lo);
    }
    echo
}

/// The invocation echoed into every report.
fn command_line() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("drl {}", args.join(" "))
}

fn init_threads(requested: Option<usize>) -> Result<(), Failure> {
    let threads = match requested {
        Some(t) => Some(t),
        None => match std::env::var("DRL_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| {
                Failure::config(format!("DRL_THREADS must be a thread count, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    let Some(threads) = threads else { return Ok(()) };
    if threads == 0 {
        return Err(Failure::config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::config(e.to_string()))
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => report::write_atomic(path, contents).map_err(Failure::from),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Exact natural-number parsing with scientific notation: `120`, `1e6`,
/// and `2.5e3` are accepted; anything with a leftover fractional part,
/// a sign, or a value outside u64 is rejected.
fn parse_natural(s: &str) -> Result<u64, String> {
    let err =
        || format!("{s:?} is not a natural number (digits or exact scientific notation like 1e6)");
    let (mantissa, exponent) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let all_digits =
        |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(err());
    }

    let mut value: u128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add(u128::from(b - b'0')))
            .ok_or_else(err)?;
    }
    let shift = exponent - frac_part.len() as i32;
    let value = if shift >= 0 {
        let scale = 10u128.checked_pow(u32::try_from(shift).map_err(|_| err())?);
        value.checked_mul(scale.ok_or_else(err)?).ok_or_else(err)?
    } else {
        let scale = 10u128.checked_pow(u32::try_from(-shift).map_err(|_| err())?);
        let scale = scale.ok_or_else(err)?;
        if value % scale != 0 {
            return Err(err());
        }
        value / scale
    };
    u64::try_from(value).map_err(|_| err())
}

fn parse_window(s: &str) -> Result<Domain, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("{s:?} is not of the form LO:HI"))?;
    let lo = parse_natural(lo)?;
    let hi = parse_natural(hi)?;
    if lo < 1 || hi < lo {
        return Err(format!("window {lo}:{hi} is empty or starts below 1"));
    }
    Ok(Domain { lo, hi })
}

fn parse_lemma(s: &str) -> Result<LemmaId, String> {
    LemmaId::parse(s)
        .ok_or_else(|| format!("unknown check {s:?}; expected L1..L6, EQ5, EQ8, or RUNDIV"))
}
