//! `landau` — rigorous evaluation, certified covering grids, and verified
//! lower bounds for Landau's constant over schlicht-normalised derivative
//! streams.
//!
//! Payload routing: the machine-readable payload (a complex value, a CSV
//! grid, or a JSON document) goes to `--out FILE` when given, otherwise to
//! stdout.  A human-readable summary is printed to stdout only when the
//! payload was diverted to a file, so piping without `--out` always yields
//! the bare payload.
//!
//! Exit codes: 0 success (including a search that merely exhausts its
//! budget), 2 usage errors, 3 when a configured resource cap stopped the
//! computation, 1 for any other failure.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use landau_core::{
    audit_first_sup, certified_lower_bound, eval_series, image_covering_grid, landau_estimate,
    parse_stream_file, BoundSchedule, BoundsProvider, CircleBudget, ComplexDyadic, Dyadic, Error,
    EvalOrder, EvalRequest, LambdaCertificate, PiStream, PipelineConfig, ResourceLimits,
    SearchBudget, TraceMode,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_resource_cap() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "landau",
    version,
    about = "Certified lower bounds for Landau's constant",
    long_about = "Evaluates schlicht-normalised derivative streams with rigorous error \
                  control and produces machine-checkable lower-bound certificates for \
                  the Landau constant."
)]
struct Cli {
    /// Number of worker threads for parallel stages (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the encoded function at one point with guaranteed accuracy.
    Eval(EvalArgs),
    /// Build a certified covering grid of an image disc and emit it as CSV.
    Grid(GridArgs),
    /// Produce (or re-verify) a lower-bound certificate for one stream.
    Lambda(LambdaArgs),
    /// Enumerate stream prefixes breadth-first and bound the whole class.
    Search(SearchArgs),
}

/// Options shared by every subcommand that decodes a stream.
#[derive(Args)]
struct StreamArgs {
    /// Stream description file (omitted or empty means the identity
    /// derivative, i.e. f(z) = z).
    #[arg(long, value_name = "FILE")]
    stream: Option<PathBuf>,

    /// Refinement depth used when the stream file lists coefficients.
    #[arg(
        long,
        value_name = "BITS",
        default_value_t = 512,
        env = "LANDAU_ENCODE_DEPTH"
    )]
    encode_depth: u32,

    /// Tightness exponent k of the coefficient schedule constant c = 1 + 2^-k.
    #[arg(long, value_name = "K", default_value_t = 100)]
    c_exponent: u32,
}

impl StreamArgs {
    fn schedule(&self) -> BoundSchedule {
        BoundSchedule::new(self.c_exponent)
    }

    fn stream(&self, schedule: &BoundSchedule) -> Result<PiStream, CliError> {
        let text = match &self.stream {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?,
            None => String::new(),
        };
        Ok(parse_stream_file(&text, schedule, self.encode_depth)?)
    }
}

/// Derivative-sup bounds to use: `generic` derives them from the coefficient
/// schedule alone; the presets and `custom` inject sharper claimed bounds
/// which every pipeline audits against the stream before trusting.
#[derive(Clone)]
enum BoundsSpec {
    Generic,
    Identity,
    Affine,
    Custom(Dyadic, Dyadic),
}

impl BoundsSpec {
    fn provider(&self) -> BoundsProvider {
        match self {
            BoundsSpec::Generic => BoundsProvider::Generic,
            // f(z) = z: |f'| = 1 and |f''| = 0 on every disc; the margins
            // keep the audit comfortably inside its evaluation tolerance.
            BoundsSpec::Identity => BoundsProvider::injected(
                "identity",
                Dyadic::one() + Dyadic::two_pow(-8),
                Dyadic::two_pow(-10),
            ),
            // Safe for any stream whose first two coefficients dominate:
            // |f'| ≤ 1 + 2c_1 + 3c_2 ≤ 4 and |f''| ≤ 2c_1 + 6c_2/… ≤ 4 on
            // radii ≤ 1/2 under the schedule's coefficient caps.
            BoundsSpec::Affine => {
                BoundsProvider::injected("affine", Dyadic::from_int(4), Dyadic::from_int(4))
            }
            BoundsSpec::Custom(first, second) => {
                BoundsProvider::injected("custom", first.clone(), second.clone())
            }
        }
    }
}

fn parse_bounds(raw: &str) -> Result<BoundsSpec, String> {
    match raw {
        "generic" => Ok(BoundsSpec::Generic),
        "identity" => Ok(BoundsSpec::Identity),
        "affine" => Ok(BoundsSpec::Affine),
        other => {
            let rest = other.strip_prefix("custom:").ok_or_else(|| {
                format!("expected generic, identity, affine, or custom:MU1:MU2, got `{other}`")
            })?;
            let (first, second) = rest
                .split_once(':')
                .ok_or_else(|| format!("custom bounds need two values, got `{rest}`"))?;
            let first: Dyadic = first
                .parse()
                .map_err(|e| format!("first-derivative bound: {e}"))?;
            let second: Dyadic = second
                .parse()
                .map_err(|e| format!("second-derivative bound: {e}"))?;
            if !first.is_positive() || !second.is_positive() {
                return Err("injected bounds must be positive".into());
            }
            Ok(BoundsSpec::Custom(first, second))
        }
    }
}

fn parse_dyadic(raw: &str) -> Result<Dyadic, String> {
    raw.parse::<Dyadic>().map_err(|e| e.to_string())
}

fn parse_point(raw: &str) -> Result<ComplexDyadic, String> {
    raw.parse::<ComplexDyadic>().map_err(|e| e.to_string())
}

fn parse_order(raw: &str) -> Result<EvalOrder, String> {
    match raw {
        "value" => Ok(EvalOrder::Value),
        "antiderivative" => Ok(EvalOrder::Antiderivative),
        other => {
            let rest = other.strip_prefix("derivative:").ok_or_else(|| {
                format!("expected value, antiderivative, or derivative:N, got `{other}`")
            })?;
            let n: u32 = rest.parse().map_err(|e| format!("derivative order: {e}"))?;
            Ok(EvalOrder::Derivative(n))
        }
    }
}

/// Resource caps shared by the grid-building subcommands.
#[derive(Args)]
struct LimitArgs {
    /// Abort (exit 3) if a covering grid would evaluate more source points.
    #[arg(
        long,
        value_name = "N",
        default_value_t = 1_000_000_000,
        env = "LANDAU_MAX_GRID_POINTS"
    )]
    max_grid_points: u64,

    /// Abort (exit 3) if the output window would exceed this many cells.
    #[arg(
        long,
        value_name = "N",
        default_value_t = 400_000_000,
        env = "LANDAU_MAX_WINDOW_CELLS"
    )]
    max_window_cells: u64,
}

impl LimitArgs {
    fn limits(&self) -> ResourceLimits {
        ResourceLimits {
            max_grid_points: self.max_grid_points,
            max_window_cells: self.max_window_cells,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    stream: StreamArgs,

    /// What to evaluate: value | antiderivative | derivative:N.  `value` is
    /// the encoded derivative stream itself; `antiderivative` its primitive
    /// normalised by f(0) = 0, f'(0) = 1; `derivative:N` its N-th derivative.
    #[arg(long, default_value = "value", value_parser = parse_order)]
    order: EvalOrder,

    /// Evaluation point as "RE,IM" with dyadic components, e.g. "1p-2,-3p-4".
    #[arg(long, visible_alias = "z", value_parser = parse_point)]
    point: ComplexDyadic,

    /// Guaranteed accuracy of the result (dyadic, e.g. 1p-12 for 2^-12).
    #[arg(long, default_value = "1p-12", value_parser = parse_dyadic)]
    tol: Dyadic,

    /// Optional closed-disc radius to certify the point against; defaults to
    /// the smallest power-of-two shell containing the point.
    #[arg(long, value_parser = parse_dyadic)]
    shell: Option<Dyadic>,

    /// Write the result here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    stream: StreamArgs,

    /// Radius of the source disc whose image is rasterised (in (0, 1)).
    #[arg(long, value_parser = parse_dyadic)]
    radius: Dyadic,

    /// Covering resolution: every image point lies within eps of a grid
    /// point, and the grid pitch is eps/4.
    #[arg(long, value_parser = parse_dyadic)]
    eps: Dyadic,

    /// Derivative-sup bounds: generic | identity | affine | custom:MU1:MU2.
    #[arg(long, default_value = "generic", value_parser = parse_bounds)]
    bounds: BoundsSpec,

    #[command(flatten)]
    limits: LimitArgs,

    /// Write the CSV grid here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LambdaArgs {
    #[command(flatten)]
    stream: StreamArgs,

    /// Target precision n: the certificate bounds λ_f from below within
    /// 2^-n of the true inner radius at coverage radius 1 - 2^-(n+1).
    #[arg(long, visible_alias = "n", default_value_t = 1)]
    precision: u32,

    /// Derivative-sup bounds: generic | identity | affine | custom:MU1:MU2.
    #[arg(long, default_value = "generic", value_parser = parse_bounds)]
    bounds: BoundsSpec,

    /// Override the covering resolution (certificate is marked `overridden`
    /// and its disc estimate is only as fine as this value allows).
    #[arg(long, value_parser = parse_dyadic)]
    eps: Option<Dyadic>,

    /// Cap on circle-certificate dovetailing rounds before giving up.
    #[arg(
        long,
        value_name = "N",
        default_value_t = 24,
        env = "LANDAU_MAX_ROUNDS"
    )]
    max_rounds: u32,

    #[command(flatten)]
    limits: LimitArgs,

    /// Verify a previously produced certificate JSON file instead of
    /// computing one; all other options are ignored.
    #[arg(long, value_name = "FILE")]
    verify: Option<PathBuf>,

    /// Write the certificate JSON here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    stream_opts: SearchStreamArgs,

    /// Target precision n for every per-word certificate.
    #[arg(long, visible_alias = "n", default_value_t = 1)]
    precision: u32,

    /// Deepest prefix length to enumerate (4^t words at depth t).
    #[arg(long, default_value_t = 0)]
    max_t: u32,

    /// Derivative-sup bounds: generic | identity | affine | custom:MU1:MU2.
    #[arg(long, default_value = "generic", value_parser = parse_bounds)]
    bounds: BoundsSpec,

    /// Override the covering resolution used by every per-word pipeline.
    #[arg(long, value_parser = parse_dyadic)]
    eps: Option<Dyadic>,

    /// Cap on circle-certificate dovetailing rounds per word.
    #[arg(
        long,
        value_name = "N",
        default_value_t = 24,
        env = "LANDAU_MAX_ROUNDS"
    )]
    max_rounds: u32,

    #[command(flatten)]
    limits: LimitArgs,

    /// Write the report JSON here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// The search enumerates prefixes itself, so it only takes the schedule
/// parameter, not a stream file.
#[derive(Args)]
struct SearchStreamArgs {
    /// Tightness exponent k of the coefficient schedule constant c = 1 + 2^-k.
    #[arg(long, value_name = "K", default_value_t = 100)]
    c_exponent: u32,
}

enum CliError {
    Core(Error),
    Io(String),
}

impl CliError {
    fn is_resource_cap(&self) -> bool {
        matches!(self, CliError::Core(e) if e.is_resource_cap())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Route the machine-readable payload: to `--out` when given (then print the
/// human summary to stdout), otherwise payload straight to stdout.
fn emit(out: &Option<PathBuf>, payload: &str, summary: &str) -> Result<(), CliError> {
    let mut owned;
    let payload = if payload.ends_with('\n') {
        payload
    } else {
        owned = String::with_capacity(payload.len() + 1);
        owned.push_str(payload);
        owned.push('\n');
        &owned
    };
    match out {
        Some(path) => {
            fs::write(path, payload)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
            print!("{summary}");
        }
        None => print!("{payload}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Io("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("configuring {n} worker threads: {e}")))?;
    }
    match cli.command {
        Command::Eval(args) => run_eval(args),
        Command::Grid(args) => run_grid(args),
        Command::Lambda(args) => run_lambda(args),
        Command::Search(args) => run_search(args),
    }
}

fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    let schedule = args.stream.schedule();
    let s = args.stream.stream(&schedule)?;
    let request = EvalRequest {
        order: args.order,
        z: args.point.clone(),
        tol: args.tol.clone(),
    };
    let value = eval_series(&s, &schedule, &request, args.shell.as_ref())?;
    let payload = format!("{value}\n");
    let summary = format!(
        "value {value}\n  ≈ ({:.12}, {:.12})\n  tolerance {}  queries to depth {}\n",
        value.re.to_f64(),
        value.im.to_f64(),
        args.tol,
        s.query_depth(),
    );
    emit(&args.out, &payload, &summary)
}

fn run_grid(args: GridArgs) -> Result<(), CliError> {
    let schedule = args.stream.schedule();
    let s = args.stream.stream(&schedule)?;
    let provider = args.bounds.provider();
    let first_sup = provider.first_sup(&schedule, &args.radius)?;
    if provider.is_injected() {
        audit_first_sup(
            &s,
            &schedule,
            &args.radius,
            &first_sup,
            &provider.provenance(),
        )?;
    }
    let limits = args.limits.limits();
    let (grid, trace) = image_covering_grid(
        &s,
        &schedule,
        &args.radius,
        &args.eps,
        &first_sup,
        &limits,
        TraceMode::Stats,
    )?;
    let payload = grid.to_csv();
    let summary = format!(
        "covering grid: radius {}  eps {}  pitch {}\n  {} grid points from {} source points \
         (window {}², truncation order {}, {} eval)\n  bounds {}  queries to depth {}\n",
        args.radius,
        grid.eps,
        grid.delta,
        trace.image_count,
        trace.source_count,
        trace.window_dim,
        trace.truncation_order,
        if trace.fast_eval {
            "fixed-point"
        } else {
            "exact"
        },
        provider.provenance(),
        s.query_depth(),
    );
    emit(&args.out, &payload, &summary)
}

fn certificate_summary(cert: &LambdaCertificate) -> String {
    format!(
        "lower bound {}  (≈ {:.9})\n  precision {}  radius {}  mode {:?}  bounds {}\n  circle \
         radius {} (arc level {}, margin ≈ {:.6})\n  eps sound {}  used {}  pitch {}  \
         {} grid points\n  disc [{}, {}]  queries to depth {}\n",
        cert.lower_bound,
        cert.lower_bound.to_f64(),
        cert.precision,
        cert.radius,
        cert.mode,
        cert.bounds_provenance,
        cert.circle_radius,
        cert.arc_level,
        cert.margin.to_f64(),
        cert.eps_sound,
        cert.eps_used,
        cert.delta,
        cert.grid_points,
        cert.disc_lower,
        cert.disc_upper,
        cert.query_depth,
    )
}

fn run_lambda(args: LambdaArgs) -> Result<(), CliError> {
    if let Some(path) = &args.verify {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        let cert: LambdaCertificate = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("parsing {}: {e}", path.display())))?;
        cert.audit()?;
        print!("certificate verified\n{}", certificate_summary(&cert));
        return Ok(());
    }

    let schedule = args.stream.schedule();
    let s = args.stream.stream(&schedule)?;
    let config = PipelineConfig {
        bounds: args.bounds.provider(),
        eps_override: args.eps.clone(),
        circle_budget: CircleBudget {
            max_rounds: args.max_rounds,
        },
        limits: args.limits.limits(),
        trace: TraceMode::Stats,
    };
    let (cert, _trace) = certified_lower_bound(&s, &schedule, args.precision, &config)?;
    // Re-check the finished certificate before shipping it anywhere.
    cert.audit()?;
    let payload = serde_json::to_string_pretty(&cert)
        .map_err(|e| CliError::Io(format!("serialising certificate: {e}")))?;
    emit(&args.out, &payload, &certificate_summary(&cert))
}

fn run_search(args: SearchArgs) -> Result<(), CliError> {
    let schedule = BoundSchedule::new(args.stream_opts.c_exponent);
    let config = PipelineConfig {
        bounds: args.bounds.provider(),
        eps_override: args.eps.clone(),
        circle_budget: CircleBudget {
            max_rounds: args.max_rounds,
        },
        limits: args.limits.limits(),
        trace: TraceMode::Stats,
    };
    let budget = SearchBudget { max_t: args.max_t };
    let report = landau_estimate(&schedule, args.precision, &config, &budget)?;
    let payload = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Io(format!("serialising report: {e}")))?;
    let mut summary = format!(
        "class lower bound {}  (≈ {:.9})\n  status {:?}  completed depth {} of {}  max query \
         depth {}\n  reference window ({}, {})\n",
        report.l_infimum,
        report.l_infimum.to_f64(),
        report.status,
        report.completed_depth,
        report.requested_depth,
        report.max_query_depth,
        report.reference_lower,
        report.reference_upper,
    );
    for result in report.results.iter().take(16) {
        summary.push_str(&format!(
            "  word \"{}\"  bound ≈ {:.9}  depth {}\n",
            result.word,
            result.lower_bound.to_f64(),
            result.query_depth,
        ));
    }
    if report.results.len() > 16 {
        summary.push_str(&format!("  … {} more words\n", report.results.len() - 16));
    }
    emit(&args.out, &payload, &summary)
}
