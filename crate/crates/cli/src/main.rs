//! `utgrading` command-line tool. Every file it reads or writes is JSON
//! carrying `"format": 1`.
//!
//! Exit codes: 0 on success, 1 on a reported failure (error JSON on
//! stderr), 2 on a usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "utgrading", version, about = "Group gradings on upper block triangular matrix algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a grading, group, cocycle, algebra or plan; prints component dimensions.
    Validate {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Compute the canonical form of a grading.
    Decompose {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Independently check that ψ is a graded isomorphism and record it.
        #[arg(long)]
        check: bool,
    },
    /// Check that a linear map between two graded algebras is a graded isomorphism.
    VerifyIso {
        #[arg(short = 'a', long)]
        source: PathBuf,
        #[arg(short = 'b', long)]
        target: PathBuf,
        /// Map matrix; defaults to psi_matrix when the source is a canonical form.
        #[arg(short = 'm', long)]
        map: Option<PathBuf>,
    },
    /// Build a scrambled grading from an instance plan.
    Generate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the planted canonical form.
        #[arg(long)]
        plant: Option<PathBuf>,
    },
    /// Run every plan in a directory and write a report.
    Sweep {
        #[arg(long)]
        plans: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Include wall-clock timings (makes the report nondeterministic).
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { input } => commands::validate(&input),
        Command::Decompose { input, output, check } => commands::decompose(&input, &output, check),
        Command::VerifyIso { source, target, map } => commands::verify_iso(&source, &target, map.as_deref()),
        Command::Generate { plan, output, plant } => commands::generate(&plan, &output, plant.as_deref()),
        Command::Sweep { plans, report, timings } => commands::sweep(&plans, &report, timings),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
