//! `noisecube`: curve and bound tables plus verification suites.
//!
//! Exit status is 0 on success, 1 when a verification finds a violation (a
//! JSON record goes to stderr) and 2 on invalid configuration.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "noisecube", version, about = "Noise curves and exact bound checks on the Boolean cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sampled noise curves, columns tau,p,alpha,beta.
    Curve,
    /// Bound comparison table, columns tau,beta,alpha_opt,alpha_hyper,alpha_fourier.
    Bounds,
    /// Tensorized entropy bound on random distributions.
    VerifyTensor,
    /// Degree-split Fourier certificate over a family grid.
    VerifyNazarov,
    /// Two-function hypercontractivity on random nonnegative pairs.
    VerifyHyper,
    /// Hoeffding lemma, martingale and McDiarmid tail checks.
    VerifyConcentration,
    /// Blowing-up lemma on random set pairs and its corollary.
    VerifyBlowup,
    /// Weak and strong combinatorial bound trials over a family grid.
    Harness,
    /// Exhaustive search over every subset of a small cube.
    Worstcase,
    /// Transform round trip and Parseval self-test.
    WhtSelftest,
}

impl Command {
    fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Opts {
    /// Cube dimension.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Flip probability; comma-separated where a command accepts several.
    #[arg(long, global = true, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Per-position probabilities, one per coordinate.
    #[arg(long = "tau-list", global = true, value_delimiter = ',')]
    pub tau_list: Vec<f64>,
    /// Single output density for `bounds`.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Step of the beta grid for `bounds`.
    #[arg(long = "beta-grid", global = true)]
    pub beta_grid: Option<f64>,
    /// Threshold for `worstcase`.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Threshold for `verify-nazarov` (default 1/n).
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Grid size (curve samples, profile points).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// TOML family grid; the bundled default grid when omitted.
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    /// A single set in hex format, used instead of the family grid.
    #[arg(long, global = true)]
    pub set: Option<PathBuf>,
    /// Number of random trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Master seed; trial k draws from stream k of this seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Draw (r, s) at random for `verify-hyper` instead of r = s = 1 - 2τ.
    #[arg(long = "random-rs", global = true)]
    pub random_rs: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let table = match commands::run(cli.command, &cli.opts) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}", json!({ "command": name, "config_error": e.to_string() }));
            return ExitCode::from(2);
        }
    };
    let metadata = json!({
        "tool": "noisecube",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "seed": cli.opts.seed,
        "config": cli.opts,
    });
    let text = match cli.opts.format {
        Format::Csv => match table.to_csv(&metadata) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{}", json!({ "command": name, "config_error": e.to_string() }));
                return ExitCode::from(2);
            }
        },
        Format::Json => table.to_json(&metadata),
    };
    let written = match &cli.opts.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("{}", json!({ "command": name, "config_error": e.to_string() }));
        return ExitCode::from(2);
    }
    match table.violations(&name) {
        Some(record) => {
            eprintln!("{record}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
