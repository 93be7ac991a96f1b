use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdkg::report::CheckStatus;
use sdkg::runner::{self, RunError, RunOutcome};
use sdkg::scenario::Scenario;

#[derive(Parser)]
#[command(name = "sdkg", version, about = "Fourier-side verification runner for the strongly damped Klein-Gordon equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Also write SVG log-log plots.
    #[arg(long, global = true)]
    svg: bool,
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the randomized residual sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute norm series and run the configured checks; artifacts only,
    /// check failures do not affect the exit code.
    Simulate { config: PathBuf },
    /// Run the verification suite: exit 1 if any non-measured check fails.
    Verify { config: PathBuf },
    /// Run the scenario with and without the mass term and compare rates.
    CompareMassless { config: PathBuf },
    /// Measure the non-vanishing oscillation of the Gaussian-cosine probe.
    ProbeAppendix { config: PathBuf },
}

fn load(config: &PathBuf, cli: &Cli) -> Result<Scenario, RunError> {
    let mut scn = Scenario::load(config)?;
    if let Some(dir) = &cli.out_dir {
        scn.out_dir = dir.clone();
    }
    if cli.svg {
        scn.svg = true;
    }
    if let Some(seed) = cli.seed {
        scn.seed = seed;
    }
    Ok(scn)
}

fn print_summary(outcome: &RunOutcome) {
    for r in &outcome.report.records {
        let tag = match r.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Measured => "meas",
        };
        println!("[{tag}] {:<24} measured {:+.6e}  {}", r.name, r.measured_value, r.detail);
    }
    println!("artifacts in {}", outcome.out_dir.display());
}

fn run(cli: &Cli) -> Result<ExitCode, RunError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    }
    let (outcome, gate) = match &cli.cmd {
        Cmd::Simulate { config } => (runner::run_scenario(&load(config, cli)?)?, false),
        Cmd::Verify { config } => (runner::run_scenario(&load(config, cli)?)?, true),
        Cmd::CompareMassless { config } => (runner::compare_massless(&load(config, cli)?)?, true),
        Cmd::ProbeAppendix { config } => (runner::probe_appendix(&load(config, cli)?)?, true),
    };
    print_summary(&outcome);
    if gate && !outcome.passed() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
