//! `ddbvp`: analyze and solve differential-difference boundary value problems.
//!
//! Exit codes: 0 success, 1 parse or input error (also a failed `verify`),
//! 2 stencil outside `det R1 != 0, det R2 = 0`, 3 infeasible data.

mod problem;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ddbvp::solver::{solve, SolutionStatus};
use ddbvp::verify::{self, VerifyConfig};
use ddbvp::{Error, StructureReport};

use problem::Loaded;

#[derive(Parser)]
#[command(name = "ddbvp", version, about = "Exact analysis of differential-difference boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the structure report of the problem's stencil.
    Analyze { file: PathBuf },
    /// Solve the problem and write `<prefix>-report.txt` and `<prefix>-solution.csv`.
    Solve {
        file: PathBuf,
        /// Sample spacing for the CSV.
        #[arg(long, default_value_t = 0.125)]
        samples: f64,
        /// Output prefix; defaults to the problem file without its extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification battery.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the spectrum of R1 with the grid operator R_Q^h.
    Spectrum {
        file: PathBuf,
        /// Grid subdivisions per unit interval.
        #[arg(long = "n", num_args = 1.., default_values_t = [8, 16])]
        n: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

enum Failure {
    Input(String),
    Regime(String),
    Infeasible,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPaperRegime(_) => Failure::Regime(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    problem::load(path).map_err(|e| Failure::Input(e.to_string()))
}

/// Structure report, or the regime report plus a notice when the stencil is
/// out of scope.
fn structure(loaded: &Loaded) -> Result<StructureReport, Failure> {
    StructureReport::analyze(&loaded.problem.stencil).map_err(|e| match e {
        Error::NotPaperRegime(_) => {
            print!("{}", report::other_regime(loaded, &e.to_string()));
            Failure::Regime(e.to_string())
        }
        other => Failure::Input(other.to_string()),
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { file } => {
            let loaded = load(&file)?;
            let core = structure(&loaded)?;
            print!("{}", report::analyze(&loaded, &core)?);
        }
        Command::Solve { file, samples, out } => {
            if !(samples.is_finite() && samples > 0.0) {
                return Err(Failure::Input(format!("--samples: expected a positive step, got {samples}")));
            }
            let loaded = load(&file)?;
            structure(&loaded)?;
            let fam = solve(&loaded.problem)?;
            let text = report::solve(&loaded, &fam)?;
            let prefix = out.unwrap_or_else(|| file.with_extension(""));
            let with_suffix = |s: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(s);
                PathBuf::from(p)
            };
            write(&with_suffix("-report.txt"), &text)?;
            print!("{text}");
            if fam.status == SolutionStatus::Infeasible {
                return Err(Failure::Infeasible);
            }
            let csv = report::solution_csv(&fam, &loaded.problem.f0, loaded.problem.n(), samples)?;
            write(&with_suffix("-solution.csv"), &csv)?;
        }
        Command::Verify { level, seed } => {
            let mut config = match level {
                LevelArg::Fast => VerifyConfig::fast(),
                LevelArg::Full => VerifyConfig::full(),
            };
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let battery = verify::run(&config);
            print!("{battery}");
            if !battery.all_passed() {
                return Err(Failure::Input("verification failed".into()));
            }
        }
        Command::Spectrum { file, n } => {
            if let Some(bad) = n.iter().find(|&&n| n < 4) {
                return Err(Failure::Input(format!("--n: grid size {bad} is below the minimum 4")));
            }
            let loaded = load(&file)?;
            let core = structure(&loaded)?;
            print!("{}", report::spectrum_report(&core, &n)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Regime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible) => {
            eprintln!("error: the data violate the solvability conditions (see residuals)");
            ExitCode::from(3)
        }
    }
}
