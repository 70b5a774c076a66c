use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logeuler::commands::{self, Context};
use logeuler::config::exit_code_of;
use logeuler::report::Report;

#[derive(Parser)]
#[command(name = "logeuler", version, about = "Verify logarithmic-pressure Euler symmetrizers and run the 1D relativistic solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Number of random states per suite.
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    /// Seed for the SplitMix64 sample generator.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Directory for the report and CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Multiply every tolerance (not the convergence orders) by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Derivative, ODE, lower-bound and subluminal checks for an EOS file.
    CheckEos {
        #[arg(long)]
        eos: PathBuf,
    },
    /// SPD, Jacobian, bijection and Aᵏ-variant checks at random states.
    VerifySymmetrizer {
        #[arg(long)]
        eos: PathBuf,
    },
    /// Classical vs symmetric evolution compared through the map v(ρ).
    Equivalence {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Integrate a relativistic 1D scenario and write snapshots.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn execute(cli: &Cli) -> anyhow::Result<Report> {
    let c = &cli.common;
    if !(c.tol_scale > 0.0 && c.tol_scale.is_finite()) {
        return Err(logeuler::config::ConfigError(format!("--tol-scale must be positive, got {}", c.tol_scale)).into());
    }
    let ctx = Context::new(c.seed, c.samples, &c.out, c.tol_scale);
    let mut report = match &cli.command {
        Command::CheckEos { eos } => commands::check_eos(&ctx, eos)?,
        Command::VerifySymmetrizer { eos } => commands::verify_symmetrizer(&ctx, eos)?,
        Command::Equivalence { scenario } => commands::equivalence(&ctx, scenario)?,
        Command::Run { scenario } => commands::run(&ctx, scenario)?,
    };
    report.write(&c.out)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { logeuler::report::exit::CONFIG } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.summary());
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}
