use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wgmsim_cli::{exit_code, parse_config, resolve_workers, run_job, CliError, JobKind, Manifest, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "wgmsim", version, about = "Whispering-gallery microdisk simulation, spectrum fitting and cavity-QED reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One mode search with field profile.
    Simulate(Common),
    /// Mode searches over azimuthal numbers, families and etch depths.
    Sweep(Common),
    /// Peak detection and Voigt fits of a measured or synthetic spectrum.
    Fit(Common),
    /// Purcell factor, coupling and β for given mode figures.
    Cqed(Common),
    /// CSV bundle from earlier simulate or sweep runs.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// TOML job file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Worker threads; overrides the environment and the job file.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the job file.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn run(kind: JobKind, args: &Common) -> Result<Manifest, CliError> {
    let mut job = parse_config(&args.config, kind)?;
    if let Some(seed) = args.seed {
        job.seed = seed;
    }
    if let Some(out) = &args.out {
        job.out = out.clone();
    }
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = resolve_workers(args.workers, env.as_deref(), job.workers)?;
    log::info!("{} job, {workers} workers, output in {}", kind.name(), job.out.display());
    run_job(&job, workers)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => (JobKind::Simulate, a),
        Command::Sweep(a) => (JobKind::Sweep, a),
        Command::Fit(a) => (JobKind::Fit, a),
        Command::Cqed(a) => (JobKind::Cqed, a),
        Command::Report(a) => (JobKind::Report, a),
    };
    let result = run(kind, args);
    match &result {
        Ok(m) => {
            let failed = m.failed();
            eprintln!("{}: {} tasks, {failed} failed, {} artifacts", kind.name(), m.tasks.len(), m.artifacts.len());
            for t in m.tasks.iter().filter(|t| t.error.is_some()) {
                eprintln!("  {}: {}", t.key, t.error.as_deref().unwrap_or_default());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(exit_code(&result));
}
