use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tlsync_cli::{run, CliError, Invocation, Mode};

#[derive(Parser)]
#[command(name = "tlsync", version, about = "Synchronization sweeps for coupled two-level ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean-field trajectory of one ensemble
    Simulate(RunArgs),
    /// Flow vectors on a sphere plus one trajectory
    Flowfield(RunArgs),
    /// Fixed point, Jacobian spectrum and limit cycle, optionally over a grid
    Stability(RunArgs),
    /// Order parameter over a grid, with the analytic verdict
    PhaseDiagram(RunArgs),
    /// Measured against predicted frequency shift over a grid
    FreqShift(RunArgs),
    /// Trajectory and classification of two detuned groups
    TwoGroup(RunArgs),
    /// Sync classification over detuning and cross coupling
    Arnold(RunArgs),
    /// Sync classification over detuning and interaction phase
    PhaseTuning(RunArgs),
    /// Exact finite-N evolution against mean field
    Oracle(RunArgs),
    /// Validate a configuration without running it
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set ensemble.coupling=2` or
    /// `--set 'ensemble.theta={min=0.1,max=3,count=20}'`
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV output path (default: config `output.csv`, else stdout)
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Also render an SVG plot
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, short = 'j')]
    threads: Option<usize>,
    /// Continue a partially written grid
    #[arg(long)]
    resume: bool,
    /// Validate and describe the run, then exit
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct CheckArgs {
    config: PathBuf,
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (inv, check) = match cli.command {
        Command::Check(a) => {
            (Invocation { config: Some(a.config), overrides: a.set, ..Invocation::default() }, true)
        }
        Command::Simulate(a) => invocation(Mode::Simulate, a),
        Command::Flowfield(a) => invocation(Mode::Flowfield, a),
        Command::Stability(a) => invocation(Mode::Stability, a),
        Command::PhaseDiagram(a) => invocation(Mode::PhaseDiagram, a),
        Command::FreqShift(a) => invocation(Mode::FreqShift, a),
        Command::TwoGroup(a) => invocation(Mode::TwoGroup, a),
        Command::Arnold(a) => invocation(Mode::Arnold, a),
        Command::PhaseTuning(a) => invocation(Mode::PhaseTuning, a),
        Command::Oracle(a) => invocation(Mode::Oracle, a),
    };
    match go(&inv, check) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tlsync: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn invocation(mode: Mode, a: RunArgs) -> (Invocation, bool) {
    let inv = Invocation {
        mode: Some(mode),
        config: a.config,
        overrides: a.set,
        csv: a.out,
        svg: a.svg,
        threads: a.threads,
        resume: a.resume,
    };
    (inv, a.check)
}

fn go(inv: &Invocation, check: bool) -> Result<(), CliError> {
    let cfg = run::load(inv)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if check {
        lock.write_all(run::describe(&cfg)?.as_bytes())?;
        return Ok(());
    }
    let summary = run::execute(&cfg, inv, &mut lock)?;
    if summary.failed_cells > 0 {
        eprintln!("tlsync: {} of {} cells reported errors", summary.failed_cells, summary.rows);
    }
    Ok(())
}
