use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcm::cli::{cmd_compose, cmd_solve, cmd_table, exit_code, Format, RunConfig, Variant};
use qcm::cloners::IdealMapKind;

#[derive(Parser)]
#[command(name = "qcm", version, about = "Optimal phase-covariant cloning machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Dimensions, comma separated.
    #[arg(long = "d", global = true, value_delimiter = ',', default_value = "2,3")]
    d: Vec<usize>,
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Monte Carlo samples; below 2 skips sampling.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Markdown)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the reference table of fidelities.
    Table,
    /// Solve, certify and sample one problem.
    Solve {
        #[arg(long, value_parser = parse_problem)]
        problem: IdealMapKind,
    },
    /// Compare a modular hybrid-plus-transpose circuit with the direct optimum.
    Compose {
        #[arg(long, value_enum)]
        variant: Variant,
    },
}

fn parse_problem(s: &str) -> Result<IdealMapKind, String> {
    IdealMapKind::from_slug(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig { tol: cli.tol, samples: cli.samples, seed: cli.seed };
    let result = match cli.command {
        Command::Table => cmd_table(&cli.d, &cfg, cli.format),
        Command::Solve { problem } => cmd_solve(problem, &cli.d, &cfg, cli.format),
        Command::Compose { variant } => cmd_compose(variant, &cli.d, &cfg, cli.format),
    };
    match &result {
        Ok(out) => {
            print!("{}", out.text);
            if !out.text.ends_with('\n') {
                println!();
            }
            for f in &out.failures {
                eprintln!("check failed: {f}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result))
}
