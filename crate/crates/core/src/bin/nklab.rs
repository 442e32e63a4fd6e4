use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nekhoroshev::cli::{run_command, Format, RunConfig};
use nekhoroshev::Error;

#[derive(Parser)]
#[command(name = "nklab", version, about = "Normal forms, small divisors and stability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Assumption checkers, bracket and homological suites.
    Verify,
    /// Normal-form iteration on a seeded random perturbation.
    Normalform,
    /// Predicted stability times over an amplitude grid.
    Stability,
    /// Resonant-parameter fractions over a gamma grid.
    Measure,
    /// Trajectory or escape table.
    Simulate,
    /// Short tour of every command.
    Demo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Normalform => "normalform",
            Command::Stability => "stability",
            Command::Measure => "measure",
            Command::Simulate => "simulate",
            Command::Demo => "demo",
        }
    }
}

fn run(cli: &Cli) -> Result<i32, Error> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = run_command(cli.command.name(), &cfg, cli.format)?;
    match cli.out.as_ref().or(cfg.out.as_ref()) {
        Some(path) => std::fs::write(path, &out.payload)?,
        None => print!("{}", out.payload),
    }
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nklab: {e}");
            if let Error::Budget { .. } = e {
                eprintln!("hint: raise the budget in the config or lower d, N or k_max");
            }
            if let Error::Gate { .. } = e {
                eprintln!("hint: lower r or set normalform.override_gate = true");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
