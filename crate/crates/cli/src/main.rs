use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use platemem_cli::{compare, prepare, run, CliError, Experiment, Overrides};

/// Stability laboratory for a thermoelastic plate coupled to a membrane.
#[derive(Parser)]
#[command(name = "platemem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectra of all modes, abscissa profile and stability verdict.
    Spectrum(Common),
    /// Resolvent scan along the imaginary axis, axis probes and verdict.
    Resolvent(Common),
    /// Energy trajectory of a preset under implicit midpoint stepping.
    Evolve(Common),
    /// Energy decay of smoothed data and fitted decay exponent.
    DecayProbe(Common),
    /// Ellipticity scan of the principal symbol and Routh-Hurwitz agreement.
    SymbolScan(Common),
    /// Lopatinskii-Shapiro check for both boundary sets.
    LsCheck(Common),
    /// Geometric condition on the interface and trace constant.
    GcScan(Common),
    /// Every experiment above into one output directory.
    All(Common),
    /// Compare the stability verdicts of two configs.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn single(experiment: Experiment, common: Common) -> Result<PathBuf, CliError> {
    let overrides = Overrides {
        out_dir: common.out,
        seed: common.seed,
    };
    let cfg = prepare(experiment, &common.config, &overrides)?;
    run(experiment, &cfg)
}

fn execute(cli: Cli) -> Result<PathBuf, CliError> {
    match cli.command {
        Command::Spectrum(c) => single(Experiment::Spectrum, c),
        Command::Resolvent(c) => single(Experiment::Resolvent, c),
        Command::Evolve(c) => single(Experiment::Evolve, c),
        Command::DecayProbe(c) => single(Experiment::DecayProbe, c),
        Command::SymbolScan(c) => single(Experiment::SymbolScan, c),
        Command::LsCheck(c) => single(Experiment::LsCheck, c),
        Command::GcScan(c) => single(Experiment::GcScan, c),
        Command::All(c) => single(Experiment::All, c),
        Command::Compare {
            config,
            against,
            out,
            seed,
        } => compare(&config, &against, &Overrides { out_dir: out, seed }),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(dir) => {
            println!("artifacts written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
