//! `ham`: closed-form analysis, Monte-Carlo simulation and parameter sweeps
//! for the fundamentalist/chartist market model.
//!
//! Exit codes: 0 ok, 1 output could not be written, 2 config error,
//! 3 `--require-stable` policy failure, 4 numeric failure during simulation.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ham_core::experiments::{run_sweep, SweepError};
use ham_core::io::{
    estimates_rows, write_estimates_csv, write_frontier_csv, write_path_csv, write_sweep_csv,
    AnalysisRecord, ConfigFile, IoError, RunManifest,
};
use ham_core::params::Horizon;
use ham_core::simulator::{monte_carlo_with_path, Execution, SimError};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ham", version, about = "Heterogeneous-agent market model laboratory")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON config with `model`, `sim` and `sweep` sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stability, stationary moments, variance ratio and profitability.
    Analyze {
        /// Exit with status 3 if the market is not stable.
        #[arg(long)]
        require_stable: bool,
    },
    /// Monte-Carlo run; writes path, estimates and manifest files.
    Simulate {
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        /// Look-back horizon in years, or `infinite`.
        #[arg(long)]
        tau: Option<Horizon>,
        /// Which path to write to path.csv.
        #[arg(long, default_value_t = 0)]
        record_path: u64,
    },
    /// Evaluate a one- or two-parameter grid.
    Sweep,
    /// Check a config file without running anything.
    Validate,
}

enum Failure {
    Config(String),
    Policy(String),
    Numeric(String),
    Write(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Write(_) => 1,
            Failure::Config(_) => 2,
            Failure::Policy(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Policy(m) | Failure::Numeric(m) | Failure::Write(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Write { .. } => Failure::Write(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Overflow(_) | SimError::PathsOverflowed { .. } | SimError::DelayBufferUnderflow => {
                Failure::Numeric(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Simulation { source, .. } => source.into(),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli
        .global
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let config = ConfigFile::load(path)?;
    if let Err(e) = config.model.validate().into_result() {
        return Err(Failure::Config(e.to_string()));
    }
    match &cli.command {
        Command::Analyze { require_stable } => analyze(cli, config, *require_stable),
        Command::Simulate { paths, dt, tau, record_path } => {
            simulate(cli, config, *paths, *dt, *tau, *record_path)
        }
        Command::Sweep => sweep(cli, config),
        Command::Validate => validate(config),
    }
}

fn out_dir(cli: &Cli) -> Result<PathBuf, Failure> {
    let dir = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("ham-out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::Write(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Write(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::Write(format!("cannot write {}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Write(format!("cannot write {}: {e}", path.display()))
}

fn finish(dir: &Path, mut manifest: RunManifest, outputs: Vec<String>) -> Result<(), Failure> {
    manifest.config.save(&dir.join("config.resolved.json"))?;
    manifest.outputs = outputs;
    manifest.outputs.push("config.resolved.json".into());
    manifest.outputs.push("manifest.json".into());
    manifest.write(&dir.join("manifest.json"))?;
    Ok(())
}

fn analyze(cli: &Cli, config: ConfigFile, require_stable: bool) -> Result<(), Failure> {
    let record = AnalysisRecord::build(&config.model).map_err(|e| Failure::Config(e.to_string()))?;
    match cli.global.format {
        Format::Csv => print!("{}", record.render_text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&record).expect("serializable")),
    }
    if let Some(dir) = &cli.global.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Write(format!("cannot create {}: {e}", dir.display())))?;
        write_json(&dir.join("analysis.json"), &record)?;
        finish(dir, RunManifest::new("analyze", config), vec!["analysis.json".into()])?;
    }
    if require_stable && !record.stability.is_stable() {
        return Err(Failure::Policy(format!(
            "market is unstable (c1_margin = {}, c2_value = {})",
            record.stability.c1_margin, record.stability.c2_value
        )));
    }
    Ok(())
}

fn simulate(
    cli: &Cli,
    mut config: ConfigFile,
    paths: Option<usize>,
    dt: Option<f64>,
    tau: Option<Horizon>,
    record_path: u64,
) -> Result<(), Failure> {
    let mut sim = config
        .sim
        .clone()
        .ok_or_else(|| Failure::Config("config has no sim section".into()))?;
    if let Some(n) = paths {
        sim.n_paths = n;
    }
    if let Some(dt) = dt {
        sim.dt = dt;
    }
    if let Some(seed) = cli.global.seed {
        sim.seed = seed;
    }
    if let Some(tau) = tau {
        config.model.tau = tau;
        config.model.validate().into_result().map_err(|e| Failure::Config(e.to_string()))?;
    }
    sim.validate(&config.model)?;
    config.sim = Some(sim.resolved(&config.model));
    let sim = config.sim.clone().expect("set above");

    let run = monte_carlo_with_path(&config.model, &sim, record_path, Execution::Parallel)?;
    let dir = out_dir(cli)?;
    let rows = estimates_rows(&config.model, &run.estimates);

    let path_file = dir.join("path.csv");
    write_path_csv(create(&path_file)?, &run.path).map_err(write_err(&path_file))?;
    let estimates_file = match cli.global.format {
        Format::Csv => {
            let f = dir.join("estimates.csv");
            write_estimates_csv(create(&f)?, &rows).map_err(write_err(&f))?;
            "estimates.csv"
        }
        Format::Json => {
            write_json(&dir.join("estimates.json"), &rows)?;
            "estimates.json"
        }
    };

    println!(
        "integrator = {}, paths = {}, samples/path = {}",
        run.estimates.integrator.name(),
        run.estimates.n_paths,
        run.estimates.samples_per_path
    );
    println!("{:<8} {:>14} {:>12} {:>12} {:>8}", "stat", "estimate", "std_error", "analytic", "z");
    for r in &rows {
        let f = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        println!(
            "{:<8} {:>14.6} {:>12} {:>12} {:>8}",
            r.statistic,
            r.estimate,
            f(r.std_error),
            f(r.analytic_value),
            r.z_score.map_or_else(|| "-".to_string(), |z| format!("{z:.2}"))
        );
    }
    finish(
        &dir,
        RunManifest::new("simulate", config),
        vec!["path.csv".into(), estimates_file.into()],
    )
}

fn sweep(cli: &Cli, mut config: ConfigFile) -> Result<(), Failure> {
    if let (Some(seed), Some(sim)) = (cli.global.seed, config.sim.as_mut()) {
        sim.seed = seed;
    }
    let spec = config
        .sweep_spec()
        .ok_or_else(|| Failure::Config("config has no sweep section".into()))?;
    let result = run_sweep(&spec)?;
    let dir = out_dir(cli)?;
    let mut outputs = Vec::new();
    match cli.global.format {
        Format::Csv => {
            let f = dir.join("sweep.csv");
            write_sweep_csv(create(&f)?, &result).map_err(write_err(&f))?;
            let g = dir.join("frontier.csv");
            write_frontier_csv(create(&g)?, &result).map_err(write_err(&g))?;
            outputs.extend(["sweep.csv".to_string(), "frontier.csv".to_string()]);
        }
        Format::Json => {
            write_json(&dir.join("sweep.json"), &result)?;
            write_json(&dir.join("frontier.json"), &result.frontier())?;
            outputs.extend(["sweep.json".to_string(), "frontier.json".to_string()]);
        }
    }
    let f = result.frontier();
    println!(
        "points = {}, stable = {}, unstable = {}, degenerate = {}, overflowed = {}",
        f.n_points, f.n_stable, f.n_unstable, f.n_degenerate, f.n_overflowed
    );
    for c in &f.crossings {
        println!(
            "frontier along {} between points {} and {} near {:.6}",
            c.axis, c.from_index, c.to_index, c.estimate
        );
    }
    finish(&dir, RunManifest::new("sweep", config), outputs)
}

fn validate(config: ConfigFile) -> Result<(), Failure> {
    if let Some(sim) = &config.sim {
        sim.validate(&config.model)?;
    }
    if let Some(spec) = config.sweep_spec() {
        spec.validate()?;
    }
    println!("ok");
    Ok(())
}
