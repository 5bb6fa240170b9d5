use carnot_heat::config::{ExperimentConfig, ExperimentKind};
use carnot_heat::experiment;
use carnot_heat::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Monte Carlo experiments for fractional heat content on Carnot groups.
#[derive(Parser)]
#[command(name = "carnot-heat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// base seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// worker thread count (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// output directory for CSV and JSON artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// group registry name, e.g. heisenberg:1
    #[arg(long)]
    group: Option<String>,
    /// domain registry name, e.g. h1-torus:2,0.5
    #[arg(long)]
    domain: Option<String>,
    /// function registry name, e.g. bump:1
    #[arg(long)]
    function: Option<String>,
    /// stability index in (0, 2]
    #[arg(long)]
    alpha: Option<f64>,
    /// largest time of the geometric t-grid
    #[arg(long)]
    t_start: Option<f64>,
    /// smallest time of the geometric t-grid
    #[arg(long)]
    t_stop: Option<f64>,
    /// number of grid times
    #[arg(long)]
    t_count: Option<usize>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
    /// path observation steps
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ratio curve (|Omega| - Q(t)) / mu(t) with extrapolated limit
    HeatContent(CommonArgs),
    /// Functional heat content of a smooth bump against its variation
    SmoothFunction(CommonArgs),
    /// Lower-bound check for domains with characteristic points
    LowerBound(CommonArgs),
    /// Horizontal perimeter by independent estimators plus level scan
    Perimeter(CommonArgs),
    /// Subordinator sampler against the exact Laplace transform
    Subordinator(CommonArgs),
    /// Martingale bound and exit-probability constant calibration
    ExitBounds(CommonArgs),
    /// Tail order and supremum expectation limits
    TailChecks(CommonArgs),
    /// Stratified Taylor remainder order
    Taylor(CommonArgs),
    /// Mollification monotonicity of the functional heat content
    Mollification(CommonArgs),
    /// Run the experiment named in the config file
    Run(CommonArgs),
    /// Re-execute a recorded run and require bit-identical CSV output
    Replay {
        /// summary JSON written by a previous run
        summary: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn build_config(kind: Option<ExperimentKind>, args: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => {
            let kind = kind.ok_or_else(|| {
                Error::Parse("the run subcommand needs --config".into())
            })?;
            ExperimentConfig::parse(&format!("kind = {kind}\n"))?
        }
    };
    if let Some(kind) = kind {
        if cfg.kind != kind {
            return Err(Error::Parse(format!(
                "config kind {} does not match the {} subcommand",
                cfg.kind, kind
            )));
        }
    }
    macro_rules! set_opt {
        ($key:literal, $val:expr) => {
            if let Some(v) = &$val {
                cfg.set($key, v.to_string());
            }
        };
    }
    set_opt!("seed", args.seed);
    set_opt!("workers", args.workers);
    set_opt!("group", args.group);
    set_opt!("domain", args.domain);
    set_opt!("function", args.function);
    set_opt!("alpha", args.alpha);
    set_opt!("t-start", args.t_start);
    set_opt!("t-stop", args.t_stop);
    set_opt!("t-count", args.t_count);
    set_opt!("samples", args.samples);
    set_opt!("grid", args.grid);
    Ok(cfg)
}

fn run_kind(kind: Option<ExperimentKind>, args: &CommonArgs) -> Result<bool, Error> {
    let cfg = build_config(kind, args)?;
    let outcome = experiment::run(&cfg, &args.out)?;
    for v in &serde_json::from_str::<experiment::RunSummary>(&std::fs::read_to_string(
        &outcome.summary_path,
    )?)
    .map_err(|e| Error::Parse(format!("summary: {e}")))?
    .verdicts
    {
        println!("[{}] {}: {}", if v.pass { "pass" } else { "FAIL" }, v.name, v.detail);
    }
    println!(
        "wrote {} and {}",
        outcome.csv_path.display(),
        outcome.summary_path.display()
    );
    Ok(outcome.pass)
}

fn dispatch(cli: Cli) -> Result<bool, Error> {
    use ExperimentKind::*;
    match &cli.command {
        Command::HeatContent(a) => run_kind(Some(HeatContent), a),
        Command::SmoothFunction(a) => run_kind(Some(SmoothFunction), a),
        Command::LowerBound(a) => run_kind(Some(LowerBound), a),
        Command::Perimeter(a) => run_kind(Some(Perimeter), a),
        Command::Subordinator(a) => run_kind(Some(Subordinator), a),
        Command::ExitBounds(a) => run_kind(Some(ExitBounds), a),
        Command::TailChecks(a) => run_kind(Some(TailChecks), a),
        Command::Taylor(a) => run_kind(Some(Taylor), a),
        Command::Mollification(a) => run_kind(Some(Mollification), a),
        Command::Run(a) => run_kind(None, a),
        Command::Replay { summary, workers } => {
            let rep = experiment::replay(summary, *workers)?;
            match &rep.divergence {
                None => println!("[pass] replay: CSV bit-identical"),
                Some((line, col, old, new)) => println!(
                    "[FAIL] replay: first divergence at line {line}, column {col}: {old:?} vs {new:?}"
                ),
            }
            Ok(rep.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CheckFailed(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
