use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ffpm_studies::studies::{run_converge, run_forchheimer, run_obstacle};
use ffpm_studies::{CliError, CliResult, StudyConfig, StudyKind};

#[derive(Parser)]
#[command(name = "ffpm", version, about = "Coupled free-flow / porous-medium studies")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence study.
    Converge(Common),
    /// Interface oscillations behind a porous obstacle.
    Obstacle(Common),
    /// Flow rate through a porous bed against the pressure drop.
    Forchheimer(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; omitted keys take their defaults.
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set converge.max_level=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set output_dir=DIR`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

fn run(cli: Cli) -> CliResult<()> {
    let (kind, c) = match cli.cmd {
        Command::Converge(c) => (StudyKind::Converge, c),
        Command::Obstacle(c) => (StudyKind::Obstacle, c),
        Command::Forchheimer(c) => (StudyKind::Forchheimer, c),
    };
    let mut sets = c.set;
    if let Some(o) = &c.output {
        sets.push(format!("output_dir={:?}", o.display().to_string()));
    }
    let cfg = StudyConfig::load(c.config.as_deref(), kind, &sets)?;
    if c.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    match kind {
        StudyKind::Converge => {
            let r = run_converge(&cfg)?;
            print!("{}", r.summary());
            if let Some(e) = r.failure {
                return Err(e);
            }
        }
        StudyKind::Obstacle => {
            let r = run_obstacle(&cfg)?;
            print!("{}", r.to_csv());
            if let Some(Err(m)) = r.rows.iter().find(|r| r.is_err()) {
                return Err(CliError::NonConvergence(m.clone()));
            }
        }
        StudyKind::Forchheimer => {
            let r = run_forchheimer(&cfg)?;
            print!("{}", r.to_csv());
        }
    }
    eprintln!("outputs written to {}", cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    // a panic is a bug, reported as an internal error
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(CliError::Internal(String::new()).exit_code() as u8),
    }
}
