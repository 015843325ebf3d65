//! `localgamma`: command-line front end for local gamma factors, zeta integrals and
//! Hankel transforms.
//!
//! Exit codes: 0 success, 1 a verification exceeded its tolerance, 2 bad input.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use localgamma::arch::Place;
use localgamma::config::Tolerances;

use crate::commands::Route;
use crate::io::{csv_string, load, report_error, write_output, CliError, CliResult, EXIT_FAIL, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "localgamma", version, about = "Local zeta integrals, gamma factors and Hankel transforms")]
struct Cli {
    /// Tolerance overrides (JSON file or inline object); unspecified keys keep defaults.
    #[arg(long, global = true)]
    tolerances: Option<String>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    emit: Emit,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaceArg {
    Real,
    Complex,
}

#[derive(Subcommand)]
enum Command {
    /// Gamma factor of a character by the closed formula and the principal-value shell sum.
    Gamma {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        chi: String,
        #[arg(long)]
        twist: Option<String>,
    },
    /// Zeta integral of a test function against a character.
    Zeta {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        chi: String,
    },
    /// Functional-equation check over a corpus or a single entry.
    FeCheck {
        /// `default` or a corpus JSON file.
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long, default_value_t = localgamma::corpus::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        chi: Option<String>,
        /// The GL(1) representation, as a character.
        #[arg(long)]
        pi: Option<String>,
    },
    /// Hankel transform of a compactly supported function.
    Hankel {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        pi: String,
        #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
        shells: String,
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
    },
    /// Basic function of Satake parameters and its zeta and Fourier identities.
    Basic {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        c_max: u32,
    },
    /// Average of psi(tr(g h)) over a principal congruence subgroup.
    Lemma31 {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, default_value_t = 1)]
        l0: u32,
        #[arg(long = "L")]
        big_l: Option<u32>,
        /// `default`
        #[arg(long)]
        grid: Option<String>,
    },
    /// Archimedean functional-equation check.
    ArchFe {
        #[arg(long, value_enum)]
        place: PlaceArg,
        #[arg(long, default_value = "{}")]
        chi: String,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Generate a reproducible corpus.
    Corpus {
        #[arg(long, default_value_t = localgamma::corpus::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> CliResult<bool> {
    let tol: Tolerances = match &cli.tolerances {
        Some(t) => load("tolerances", t)?,
        None => Tolerances::default(),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new("invalid_argument", e.to_string()))?;
    }
    let outcome = match &cli.command {
        Command::Gamma { p, chi, twist } => commands::gamma(*p, chi, twist.as_deref(), &tol)?,
        Command::Zeta { phi, chi } => commands::zeta_cmd(phi, chi)?,
        Command::FeCheck { corpus, seed, phi, chi, pi } => {
            let single = match (phi, chi, pi) {
                (Some(a), Some(b), Some(c)) => Some((a.as_str(), b.as_str(), c.as_str())),
                (None, None, None) => None,
                _ => return Err(CliError::new("invalid_argument", "--phi, --chi and --pi go together")),
            };
            commands::fe_check(corpus.as_deref(), *seed, single, &tol)?
        }
        Command::Hankel { phi, pi, shells, route } => commands::hankel(phi, pi, shells, *route, &tol)?,
        Command::Basic { p, alpha, window, c_max } => commands::basic(*p, alpha, *window, *c_max, &tol)?,
        Command::Lemma31 { p, g, l0, big_l, grid } => commands::lemma31(*p, g.as_deref(), *l0, *big_l, grid.as_deref(), &tol)?,
        Command::ArchFe { place, chi, samples, seed } => {
            let place = match place {
                PlaceArg::Real => Place::Real,
                PlaceArg::Complex => Place::Complex,
            };
            commands::arch_fe(place, chi, samples.as_deref(), seed.as_deref(), &tol)?
        }
        Command::Corpus { seed, scale, sizes, out } => commands::corpus_cmd(*seed, *scale, sizes.as_deref(), out.as_ref())?,
    };
    let body = match (cli.emit, &outcome.csv) {
        (Emit::Csv, Some(rows)) => csv_string(rows)?,
        (Emit::Csv, None) => return Err(CliError::new("invalid_argument", "this command has no CSV form")),
        (Emit::Json, _) => {
            serde_json::to_string_pretty(&outcome.json).map_err(|e| CliError::new("serialization", e.to_string()))? + "\n"
        }
    };
    write_output(cli.output.as_ref(), &body)?;
    if !outcome.passed {
        let code = serde_json::json!({"status": "fail", "code": "tolerance_exceeded"});
        eprintln!("{code}");
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            report_error(&CliError::new("invalid_argument", e.to_string().trim().to_string()));
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL as u8),
        Err(e) => {
            report_error(&e);
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
