use std::path::{Path, PathBuf};
use std::process::ExitCode;

use approach_core::error::Error;
use approach_core::harness::fit::{fit_rate, RateFit};
use approach_core::harness::trace::Trace;
use approach_core::harness::{check, run, CheckConfig, Mode, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "approach", version, about = "Approachability strategies, condition checks and rate fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a strategy against an adversary and write the trace as CSV.
    Run(RunArgs),
    /// Decide the approachability condition of a target, or the convexity of a game.
    Check(CheckArgs),
    /// Fit log(distance) against log(stage) on a trace.
    Fit(FitArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    mode: Mode,
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid density for flags and mixed actions.
    #[arg(long = "grid", default_value_t = 10)]
    grid_density: usize,
    /// Exploration rate (partial mode).
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Block length (partial mode).
    #[arg(long = "block", default_value_t = 100)]
    block_length: usize,
    /// Double block lengths every epoch (partial mode).
    #[arg(long)]
    doubling: bool,
    /// stationary:<v1,v2,...> | uniform | best_response | replay:<file>
    #[arg(long, default_value = "uniform")]
    adversary: String,
    /// Draw realized actions instead of using expected payoffs.
    #[arg(long)]
    sampled: bool,
    /// Smoothing parameter of the lifted-game strategy.
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    /// Output CSV; stdout when absent. With several replicas, one file per
    /// replica is written next to it plus a summary at this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value = "partial")]
    mode: Mode,
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long = "grid", default_value_t = 10)]
    grid_density: usize,
    /// Test whether the game is convex instead of checking a target.
    #[arg(long)]
    convex_game: bool,
    /// Random samples for the convexity test.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Trace CSV written by `run`.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 10)]
    burn_in: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) | Error::InfeasibleFlag { .. } => 2,
        Error::Infeasible(_) => 3,
        _ => 1,
    }
}

fn replica_path(out: &Path, r: usize) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    out.with_file_name(format!("{stem}.r{r}.csv"))
}

fn do_run(a: RunArgs) -> Result<u8, Error> {
    let cfg = RunConfig {
        mode: a.mode,
        game: a.game,
        target: a.target,
        horizon: a.horizon,
        seed: a.seed,
        grid_density: a.grid_density,
        eta: a.eta,
        block_length: a.block_length,
        doubling: a.doubling,
        adversary: a.adversary,
        sampled: a.sampled,
        epsilon: a.epsilon,
        replicas: a.replicas,
    };
    if cfg.replicas > 1 && a.out.is_none() {
        return Err(Error::InvalidArgument("--out is required with several replicas".into()));
    }
    let traces = run(&cfg)?;
    match a.out {
        None => print!("{}", traces[0].to_csv()),
        Some(out) if traces.len() == 1 => traces[0].write(&out)?,
        Some(out) => {
            let mut summary = String::from("replica,seed,final_distance,max_distance\n");
            for (r, t) in traces.iter().enumerate() {
                t.write(replica_path(&out, r))?;
                let d = t.distances();
                let max = d.iter().copied().fold(0.0, f64::max);
                summary.push_str(&format!("{r},{},{},{max}\n", cfg.seed + r as u64, d[d.len() - 1]));
            }
            std::fs::write(&out, summary)?;
        }
    }
    Ok(0)
}

fn do_check(a: CheckArgs) -> Result<u8, Error> {
    let cfg = CheckConfig {
        mode: a.mode,
        game: a.game,
        target: a.target,
        grid_density: a.grid_density,
        convex_game: a.convex_game,
        samples: a.samples,
        seed: a.seed,
    };
    let report = check(&cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report.render());
    }
    Ok(if report.is_undetermined() { 4 } else { 0 })
}

fn do_fit(a: FitArgs) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&a.trace)?;
    let trace = Trace::from_csv(&text)?;
    match fit_rate(trace.distances(), a.burn_in)? {
        RateFit::Fit { slope, intercept, r2, points } => {
            println!("slope: {slope}\nintercept: {intercept}\nr2: {r2}\npoints: {points}");
        }
        RateFit::ConvergedExactly => println!("converged-exactly"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => do_run(a),
        Command::Check(a) => do_check(a),
        Command::Fit(a) => do_fit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
