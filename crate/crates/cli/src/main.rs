//! `bosonsim` command-line tool.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bosonsim", version, about = "Boson sampling with partially distinguishable and lossy photons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an interferometer matrix file.
    Generate(GenerateArgs),
    /// Exact output distribution of a small experiment, as CSV.
    Exact(ExactArgs),
    /// Draw samples, one JSON occupation array per line.
    Sample(SampleArgs),
    /// Evaluate error bounds, minimal truncation levels or noise thresholds.
    Bounds(BoundsArgs),
    /// Operation counts of state and point truncation, as CSV.
    Cost(CostArgs),
    /// Data behind the comparison figures, as CSV.
    Figures(FiguresArgs),
    /// Run a statistical check; exit code 3 if it fails.
    Validate(ValidateArgs),
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("kind").required(true).args(["haar", "fourier"])))]
pub struct GenerateArgs {
    /// Haar-random unitary drawn from --seed.
    #[arg(long)]
    pub haar: bool,
    /// Discrete Fourier transform.
    #[arg(long)]
    pub fourier: bool,
    /// Number of modes m (>= 1).
    #[arg(long)]
    pub modes: usize,
    /// 64-bit seed for --haar; drawn from OS entropy if omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Experiment shared by `exact`, `sample` and `validate`.
#[derive(Args, Serialize, Clone)]
pub struct ExperimentArgs {
    /// Photon number n; photons enter modes 0..n.
    #[arg(long)]
    pub photons: usize,
    /// Number of modes m; with no --matrix a Haar unitary is drawn.
    #[arg(long, required_unless_present = "matrix")]
    pub modes: Option<usize>,
    /// Matrix file in the {"m", "re", "im"} JSON format.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Seed of the Haar unitary (default: --seed).
    #[arg(long)]
    pub matrix_seed: Option<u64>,
    /// Pairwise indistinguishability x in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    /// Per-photon transmission eta in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Truncation level k in 0..=n (default n, no truncation).
    #[arg(long)]
    pub k: Option<usize>,
    /// 64-bit seed; drawn from OS entropy if omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Number of samples.
    #[arg(long)]
    pub samples: usize,
    /// Worker threads (0 = one per core). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output file (default stdout). The manifest goes to FILE.manifest.json,
    /// or to stderr when writing to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMode {
    /// Worst-case state-truncation error, binomial tail at eta x.
    WorstError,
    /// Average-case state-truncation error, twice the tail.
    AverageError,
    /// Chernoff upper bound on the tail (needs k > n eta x).
    Chernoff,
    /// Finite-n point-truncation error.
    PointError,
    /// Asymptotic point-truncation error.
    PointErrorAsymptotic,
    /// Smallest state-truncation k with error <= epsilon.
    MinK,
    /// Smallest point-truncation k with error <= epsilon.
    MinKPoint,
    /// Largest x (eta = 1) state truncation at k simulates within epsilon.
    StateMaxX,
    /// Largest eta (x = 1) state truncation at k simulates within epsilon.
    StateMaxEta,
    /// Largest x (eta = 1) point truncation at k simulates within epsilon.
    PointMaxX,
    /// Largest eta (x = 1) point truncation at k simulates within epsilon.
    PointMaxEta,
    /// Minimal depth making truncation at k efficient under loss tau per component.
    DepthThreshold,
}

#[derive(Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub mode: BoundsMode,
    /// Photon number n.
    #[arg(long)]
    pub photons: usize,
    /// Truncation level k (required by every mode except min-k and min-k-point).
    #[arg(long)]
    pub k: Option<usize>,
    /// Target error in (0, 1) for the min-k and max-noise modes.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Indistinguishability x in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    /// Transmission eta in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Transmission of one lossy component, in (0, 1), for depth-threshold.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degenerate {
    /// Evaluate the point-cost sum as written (vanishing terms stay zero).
    Literal,
    /// Clamp degenerate factors to 1.
    Guarded,
}

#[derive(Args, Serialize, Clone)]
pub struct PointCostArgs {
    /// Probabilities evaluated per point-truncation sample.
    #[arg(long, default_value_t = 100.0)]
    pub mis_factor: f64,
    /// Treatment of degenerate terms in the point-cost sum.
    #[arg(long, value_enum, default_value_t = Degenerate::Literal)]
    pub degenerate: Degenerate,
}

#[derive(Args, Serialize)]
pub struct CostArgs {
    /// Smallest photon number of the grid.
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    /// Largest photon number of the grid (m = n^2 throughout).
    #[arg(long, default_value_t = 600)]
    pub n_max: usize,
    /// Fixed truncation level for both methods; otherwise each uses the
    /// smallest level meeting --epsilon.
    #[arg(long)]
    pub k: Option<usize>,
    /// Indistinguishability x in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub x: f64,
    /// Transmission eta in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Target error in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Print only the crossover photon number over the grid.
    #[arg(long)]
    pub crossover: bool,
    #[command(flatten)]
    pub point: PointCostArgs,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// Highest simulable x and eta against n at k = n-1 and k = ceil(n/2).
    Fig1,
    /// Runtimes of both methods against n.
    Fig2,
    /// Matched-runtime comparison against k at fixed n.
    Fig3,
}

#[derive(Args, Serialize)]
pub struct FiguresArgs {
    #[arg(long, value_enum)]
    pub which: Figure,
    /// Target error in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Smallest photon number (fig1, fig2).
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    /// Largest photon number (default 100 for fig1, 600 for fig2).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Photon number of fig3; rows cover k = 1..n-1.
    #[arg(long, default_value_t = 90)]
    pub photons: usize,
    #[command(flatten)]
    pub point: PointCostArgs,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Empirical TVD of samples to the exact table is at most --tolerance.
    Tvd,
    /// Detected-photon histogram passes chi-square against Binomial(n, eta) at level --alpha.
    PhotonMarginal,
    /// Exact truncation TVD stays below the binomial tail for every k < n.
    BoundRespect,
}

#[derive(Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Number of samples for tvd and photon-marginal.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Largest accepted TVD for the tvd check.
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
    /// Smallest accepted p-value for the photon-marginal check.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Cost(a) => commands::cost(&a),
        Command::Figures(a) => commands::figures(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
