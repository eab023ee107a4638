//! `flcspec`: generate substitution windows and silver-mean chains, compute
//! autocorrelations and diffraction spectra, and run the verification suites.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "flcspec",
    version,
    about = "Diffraction and spectral measures of substitution subshifts and 1-D FLC point sets"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file; keys are long option names and override
    /// values given on the command line.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a fixed-point window or a silver-mean point file.
    Gen(GenArgs),
    /// Autocorrelation coefficients as CSV.
    Autocorr(AutocorrArgs),
    /// Atom detection (JSON or CSV), optionally with a Fejér density grid.
    Diffract(DiffractArgs),
    /// Apply a sliding block map and write the factor window.
    Factor(FactorArgs),
    /// Word frequencies of a substitution window as CSV.
    Freq(FreqArgs),
    /// Run a named property suite.
    Verify(VerifyArgs),
    /// Silver-mean module elements, intensities and clusters as CSV.
    Modelset(ModelsetArgs),
}

/// Where a symbolic window comes from.
#[derive(Debug, Args, Clone)]
pub struct SymbolicSource {
    /// Built-in rule name.
    #[arg(long)]
    pub rule: Option<String>,
    /// Rule file with lines `a -> ab`.
    #[arg(long, value_name = "PATH")]
    pub rule_file: Option<PathBuf>,
    /// Previously generated window file.
    #[arg(long, value_name = "PATH")]
    pub window: Option<PathBuf>,
    /// Letter at index 0 (defaults to the first letter).
    #[arg(long)]
    pub seed: Option<char>,
    /// Minimal window length, split evenly around the origin [default:
    /// 65536, or 131072 for `verify`].
    #[arg(long)]
    pub len: Option<usize>,
    /// Comma-separated complex letter weights, e.g. `1,-1` or `1,0.5+2i`.
    #[arg(long)]
    pub weights: Option<String>,
}

/// Where a point set comes from.
#[derive(Debug, Args, Clone)]
pub struct PointSource {
    /// Use the silver-mean chain.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false)]
    pub silver_mean: bool,
    /// Number of points of the silver-mean chain.
    #[arg(long, default_value_t = 100_000)]
    pub points: usize,
    /// Point file (`mode float|exact ...`).
    #[arg(long, value_name = "PATH")]
    pub points_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub sym: SymbolicSource,
    #[command(flatten)]
    pub pts: PointSource,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AutocorrArgs {
    #[command(flatten)]
    pub sym: SymbolicSource,
    #[command(flatten)]
    pub pts: PointSource,
    /// Largest lag M for symbolic combs.
    #[arg(long, default_value_t = 32)]
    pub lags: usize,
    /// Largest difference Z for point sets.
    #[arg(long, default_value_t = 10.0)]
    pub zmax: f64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct DiffractArgs {
    #[command(flatten)]
    pub sym: SymbolicSource,
    #[command(flatten)]
    pub pts: PointSource,
    /// Explicit real candidates, comma separated.
    #[arg(long, value_name = "K,K,...")]
    pub k: Option<String>,
    /// All dyadic candidates p/2^j in [0, 1) with j ≤ J.
    #[arg(long, value_name = "J")]
    pub dyadic: Option<u32>,
    /// Module elements (a, b) with |a| ≤ A, |b| ≤ B.
    #[arg(long, value_name = "A,B")]
    pub module_box: Option<String>,
    /// Bound on |k| for module candidates.
    #[arg(long, default_value_t = 3.0)]
    pub k_max: f64,
    /// Drop the candidate k = 0.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false)]
    pub exclude_zero: bool,
    /// Window sizes (sites, or half-widths R), strictly increasing.
    #[arg(long, value_name = "N,N,...")]
    pub schedule: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub rel_tol: f64,
    /// Add a Fejér density grid from lags up to M (symbolic sources).
    #[arg(long, value_name = "M")]
    pub fejer_lags: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    pub grid_cells: usize,
    /// Multiply intensities by the squared transform of a tent of this
    /// half-width.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub sym: SymbolicSource,
    /// `identity`, `xor`, or a block map file.
    #[arg(long)]
    pub g: Option<String>,
    /// Use the indicator of this word instead of `--g`.
    #[arg(long)]
    pub indicator: Option<String>,
    /// Offset for `--indicator`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub offset: i64,
    /// Also check shift equivariance for shifts in [-T, T].
    #[arg(long, value_name = "T")]
    pub check_shifts: Option<i64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FreqArgs {
    #[command(flatten)]
    pub sym: SymbolicSource,
    #[arg(long, default_value_t = 4)]
    pub maxlen: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Specmeas,
    FreqBack,
    RegDiffract,
    Inflation,
    Extinction,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub sym: SymbolicSource,
    /// Block map for `specmeas`: `identity`, `xor`, or a file.
    #[arg(long, default_value = "xor")]
    pub g: String,
    #[arg(long, default_value_t = 512)]
    pub lags: usize,
    /// Dyadic candidate level for `specmeas`.
    #[arg(long, default_value_t = 6)]
    pub dyadic: u32,
    /// Require every dyadic candidate to be an atom.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false)]
    pub expect_atoms: bool,
    /// Number of irrational control frequencies that must not be atoms.
    #[arg(long, default_value_t = 64)]
    pub controls: usize,
    #[arg(long, default_value_t = 4)]
    pub maxlen: usize,
    #[arg(long, default_value_t = 100_000)]
    pub points: usize,
    #[arg(long, default_value_t = 1.1)]
    pub k_radius: f64,
    /// Cluster index for `reg-diffract` (default: most frequent).
    #[arg(long)]
    pub cluster: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct ModelsetArgs {
    #[arg(long, default_value_t = 100_000)]
    pub points: usize,
    /// Module element `a,b` meaning k = (√2/4)(a + b√2); repeatable.
    #[arg(long, value_name = "A,B", allow_hyphen_values = true)]
    pub k: Vec<String>,
    /// All module elements with |a| ≤ A, |b| ≤ B and |k| ≤ k-max.
    #[arg(long, value_name = "A,B")]
    pub module_box: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    pub k_max: f64,
    /// Half-width R of the averaging window (default: whole chain).
    #[arg(long)]
    pub r: Option<f64>,
    /// Weights for points starting a short / long interval.
    #[arg(long, value_name = "W_SHORT,W_LONG")]
    pub comb_weights: Option<String>,
    /// List the K-clusters with their frequencies instead.
    #[arg(long, value_name = "K")]
    pub clusters: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Appends config entries as `--key=value` after the given arguments, so
/// that they win over earlier occurrences.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let entries = flc_spectra::io::parse_config(&text)?;

    // find the subcommand named on the command line
    let cmd = Cli::command();
    let sub = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find_map(|a| cmd.find_subcommand(a))
        .ok_or_else(|| anyhow!("--config needs a subcommand"))?;
    let mut out = args.clone();
    for (key, value) in entries {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        let known = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .any(|a| a.get_long() == Some(key.as_str()));
        if !known {
            bail!("unknown config key `{key}` for `{}`", sub.get_name());
        }
        out.push(format!("--{key}={value}").into());
    }
    Ok(out)
}

fn run() -> std::result::Result<bool, anyhow::Error> {
    let args = merge_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(true);
            }
            return Err(anyhow!("{e}"));
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    commands::dispatch(cli.command)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = format!("{e:#}");
            eprintln!("{}", msg.trim_end());
            ExitCode::from(2)
        }
    }
}
