use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use m2m_trunk::cli::{self, parse_grid, parse_int_list, ModeSelection, SweepSpec};
use m2m_trunk::{Error, RawConfig};

/// Analytical model and Monte Carlo simulator for M2M traffic aggregated by
/// a cellular user over D2D links and trunked to the base station.
#[derive(Parser, Debug)]
#[command(name = "m2m-trunk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the closed-form metrics over a sweep and write CSV
    Analytic(SweepArgs),
    /// Run Monte Carlo replications over a sweep and write CSV
    Simulate(SimArgs),
    /// Compare analysis against simulation; exits 1 if any point fails
    Validate(ValidateArgs),
    /// Render one metric of a sweep CSV as SVG
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// key = value parameter file; defaults apply to missing keys
    #[arg(long)]
    config: Option<PathBuf>,

    /// Arrival rates: start:stop:step or a comma list (default: config value)
    #[arg(long = "lambda")]
    lambda: Option<String>,

    /// Mini-slot counts, comma list or range (default: config value)
    #[arg(long = "R")]
    r: Option<String>,

    /// Trunking slot counts, comma list or range (default: config value)
    #[arg(long = "K")]
    k: Option<String>,

    /// trunked, baseline or both
    #[arg(long, default_value = "trunked")]
    mode: String,

    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Use the exact occupancy law (default)
    #[arg(long, overrides_with = "approx")]
    exact: bool,

    /// Use the binomial occupancy approximation
    #[arg(long, overrides_with = "exact")]
    approx: bool,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[command(flatten)]
    sweep: SweepArgs,

    /// Replications per grid point
    #[arg(long, default_value_t = 100_000)]
    iters: u64,

    /// Master seed
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Worker threads (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    sim: SimArgs,

    /// Relative tolerance; a CI half-width larger than it also passes
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Sweep CSV produced by `analytic`, `simulate` or `validate`
    #[arg(long = "in")]
    input: PathBuf,

    /// Column to plot
    #[arg(long)]
    metric: String,

    /// Output SVG (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<RawConfig, Error> {
    match path {
        Some(p) => RawConfig::parse(&fs::read_to_string(p)?),
        None => Ok(RawConfig::default()),
    }
}

fn build_spec(args: &SweepArgs) -> Result<(SweepSpec, RawConfig), Error> {
    let cfg = load_config(args.config.as_deref())?;
    let mut spec = SweepSpec::from_config(&cfg);
    if let Some(l) = &args.lambda {
        spec.lambda_grid = parse_grid(l)?;
    }
    if let Some(r) = &args.r {
        spec.r_list = parse_int_list(r)?;
    }
    if let Some(k) = &args.k {
        spec.k_list = parse_int_list(k)?;
    }
    spec.mode = args.mode.parse::<ModeSelection>()?;
    spec.exact = !args.approx;
    Ok((spec, cfg))
}

fn build_sim_spec(args: &SimArgs) -> Result<(SweepSpec, RawConfig), Error> {
    let (mut spec, cfg) = build_spec(&args.sweep)?;
    spec.iters = args.iters;
    spec.seed = args.seed;
    spec.workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok((spec, cfg))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analytic(args) => {
            let (spec, cfg) = build_spec(&args)?;
            emit(args.out.as_deref(), &cli::cmd_analytic(&spec, &cfg)?)?;
        }
        Command::Simulate(args) => {
            let (spec, cfg) = build_sim_spec(&args)?;
            emit(args.sweep.out.as_deref(), &cli::cmd_simulate(&spec, &cfg)?)?;
        }
        Command::Validate(args) => {
            let (spec, cfg) = build_sim_spec(&args.sim)?;
            let validation = cli::cmd_validate(&spec, &cfg, args.tolerance)?;
            print!("{}", validation.report);
            if let Some(out) = args.sim.sweep.out.as_deref() {
                fs::write(out, &validation.csv)?;
            }
            if !validation.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Plot(args) => {
            let text = fs::read_to_string(&args.input)?;
            emit(args.out.as_deref(), &cli::cmd_plot(&text, &args.metric)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
