//! `brenorm`: run the boundary-renormalisation studies from the command line.
//!
//! Exit status: 0 success, 2 tolerance or trend failure, 3 blow-up,
//! 4 configuration error, 64 usage error, 1 any other failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use boundary_renorm::io::{sha256_hex, OutputMeta};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use commands::Outcome;
use config::{Config, Overrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] boundary_renorm::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use boundary_renorm::Error as E;
        match self {
            CliError::Usage(_) => 64,
            CliError::Config(_) | CliError::Lib(E::Config(_)) => 4,
            CliError::Lib(E::BlowUp { .. }) => 3,
            CliError::Lib(E::NonConvergence { .. } | E::Degenerate(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "brenorm", version, about = "Boundary renormalisation constants, kernels and SPDE studies on the cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// `2^-2..2^-5`, `2^-2,2^-4` or `0.25,0.125`.
    #[arg(long, value_name = "SPEC")]
    eps_ladder: Option<String>,
    /// dirichlet, robin or neumann.
    #[arg(long, value_name = "MODE")]
    bc: Option<String>,
    /// A number or `inf`.
    #[arg(long, value_name = "VALUE")]
    b: Option<String>,
    /// standard-bump or cosine-bump.
    #[arg(long, value_name = "NAME")]
    profile: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Overlap integral, erfc identity and the Robin correction table (cJ.csv).
    ValidateClosedForms(Common),
    /// Kernel boundary residuals, image decay, Robin-to-Dirichlet rate, solver orders.
    KernelCheck(Common),
    /// Boundary profile table (profile.csv) and boundary-mass slope fits.
    RenormProfile {
        #[command(flatten)]
        common: Common,
        /// pam or phi4.
        #[arg(long, value_name = "EQ")]
        equation: Option<String>,
    },
    /// Constants ledger along the ladder (constants.csv).
    Constants(Common),
    /// Parabolic Anderson model ladder for one boundary mode.
    SolvePam(Common),
    /// Φ⁴₃ ladder for one boundary mode.
    SolvePhi4(Common),
    /// Φ⁴₃ Dirichlet, trivial and scheduled arms on matched noise.
    Triviality(Common),
    /// Plane-restriction continuity of the stationary linear solution.
    Trace(Common),
    /// Weighted Hölder seminorm estimate (holder.csv).
    Norms(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common, Option<&String>) {
        match self {
            Command::ValidateClosedForms(c) => ("validate-closed-forms", c, None),
            Command::KernelCheck(c) => ("kernel-check", c, None),
            Command::RenormProfile { common, equation } => ("renorm-profile", common, equation.as_ref()),
            Command::Constants(c) => ("constants", c, None),
            Command::SolvePam(c) => ("solve-pam", c, None),
            Command::SolvePhi4(c) => ("solve-phi4", c, None),
            Command::Triviality(c) => ("triviality", c, None),
            Command::Trace(c) => ("trace", c, None),
            Command::Norms(c) => ("norms", c, None),
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (name, common, equation) = cli.command.parts();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))?;
    }
    let mut cfg = Config::load(common.config.as_deref())?;
    let overrides = Overrides {
        seed: common.seed,
        out: common.out.clone(),
        eps_ladder: common.eps_ladder.clone(),
        bc: common.bc.clone(),
        b: common.b.clone(),
        profile: common.profile.clone(),
        equation: equation.cloned(),
    };
    cfg.apply(&overrides, name)?;
    // the output directory does not enter the hash
    let mut hashed = cfg.clone();
    hashed.out = PathBuf::new();
    let doc = serde_json::json!({ "command": name, "config": hashed });
    let meta = OutputMeta::new(sha256_hex(serde_json::to_string(&doc)?.as_bytes()), cfg.seed);
    commands::run(name, &cfg, &meta)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            if code == 64 {
                eprintln!("\nvalid subcommands: {}", commands::COMMANDS.join(", "));
            }
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::ToleranceFailure) => ExitCode::from(2),
        Ok(Outcome::BlowUp) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
