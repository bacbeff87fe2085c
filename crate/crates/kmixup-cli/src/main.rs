//! `kmixup` command line: generate datasets, sweep k×α training grids,
//! verify matching properties, probe FGSM robustness, and plot couplings.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 statistical
//! verification failure, 3 precondition failure (the property being checked
//! does not apply to the requested configuration).

mod commands;
mod config;
mod svg;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{attack, couple, gen, sweep, verify};
use config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STAT_FAIL: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kmixup",
    about = "Optimal-transport k-batch mixup experiments",
    version
)]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as CSV.
    Gen(gen::GenArgs),
    /// Train one model per (k, alpha, seed) grid cell and tabulate accuracy.
    Sweep(sweep::SweepArgs),
    /// Check a structural property of the matching against its tolerance
    /// band.
    Verify(verify::VerifyArgs),
    /// Evaluate a trained checkpoint under FGSM perturbations.
    Attack(attack::AttackArgs),
    /// Plot the optimal-transport coupling and a vicinal sample as SVG.
    Couple(couple::CoupleArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let file_cfg = match FileConfig::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(EXIT_USAGE);
        }
    };

    let outcome = match cli.command {
        Command::Gen(args) => gen::run(args, &file_cfg),
        Command::Sweep(args) => sweep::run(args, &file_cfg),
        Command::Verify(args) => verify::run(args, &file_cfg),
        Command::Attack(args) => attack::run(args, &file_cfg),
        Command::Couple(args) => couple::run(args, &file_cfg),
    };

    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e
                .downcast_ref::<kmixup::Error>()
                .map(|k| matches!(k, kmixup::Error::Precondition(_)))
                .unwrap_or(false)
            {
                EXIT_PRECONDITION
            } else {
                EXIT_USAGE
            };
            std::process::exit(code);
        }
    }
}
