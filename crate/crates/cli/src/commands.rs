use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use bosonsim::bounds::{
    average_case_bound, binomial_pmf, binomial_tail, chernoff_bound, max_noise_point, max_noise_state, min_k_for_error,
    min_k_for_point_error, nonuniform_depth_threshold, point_truncation_error, worst_case_bound, NoiseAxis,
    NonUniformLossModel, PointErrorForm,
};
use bosonsim::costmodel::{
    compare_costs, crossover_n, fig1_data, fig2_data, fig3_data, state_truncation_cost,
    write_csv, DegenerateTerms, PointCostModel,
};
use bosonsim::interferometer::MatrixFile;
use bosonsim::sampler::sample_batch_with_threads;
use bosonsim::stats::{chi_square_gof, empirical_distribution, histogram, total_variation};
use bosonsim::{fourier, haar_random, load_matrix, lossy_mixture_distribution, FockVector, Interferometer};
use bosonsim::{NoiseModel, SamplerConfig, TruncationLevel};
use rand::rngs::OsRng;
use rand::TryRngCore;
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{
    BoundsArgs, BoundsMode, Check, CostArgs, Degenerate, ExactArgs, ExperimentArgs, Figure, FiguresArgs, GenerateArgs,
    PointCostArgs, SampleArgs, ValidateArgs,
};

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Runtime(String),
    CheckFailed(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::CheckFailed(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Runtime(m) => f.write_str(m),
            Failure::CheckFailed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<bosonsim::Error> for Failure {
    fn from(e: bosonsim::Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    let s = OsRng.try_next_u64().map_err(|e| Failure::Runtime(format!("OS entropy: {e}")))?;
    eprintln!("seed: {s}");
    Ok(s)
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: Option<&Path>, value: &serde_json::Value) -> Outcome {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_table<T: Serialize>(out: Option<&Path>, manifest: &RunManifest, rows: &[T]) -> Outcome {
    let mut w = open_output(out)?;
    w.write_all(manifest.csv_comment().as_bytes())?;
    write_csv(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn with_manifest(manifest: &RunManifest, body: impl Serialize) -> serde_json::Value {
    let mut value = serde_json::to_value(body).expect("output serialises");
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serialises"));
    }
    value
}

pub fn generate(args: &GenerateArgs) -> Outcome {
    let (u, seed) = if args.haar {
        let seed = resolve_seed(args.seed)?;
        (haar_random(args.modes, seed)?, Some(seed))
    } else {
        (fourier(args.modes)?, None)
    };
    let manifest = RunManifest::new("generate", args, seed);
    write_json(args.out.as_deref(), &with_manifest(&manifest, MatrixFile::from_interferometer(&u)))
}

/// Interferometer, noise and truncation of an experiment, plus the resolved seed.
struct Experiment {
    u: Interferometer,
    n: usize,
    noise: NoiseModel,
    k: TruncationLevel,
    seed: u64,
}

impl Experiment {
    fn build(args: &ExperimentArgs) -> Result<Self, Failure> {
        let seed = resolve_seed(args.seed)?;
        let u = match (&args.matrix, args.modes) {
            (Some(path), modes) => {
                let u = load_matrix(path)?;
                if modes.is_some_and(|m| m != u.modes()) {
                    return Err(Failure::Invalid(format!("--modes disagrees with the {}-mode matrix file", u.modes())));
                }
                u
            }
            (None, Some(m)) => haar_random(m, args.matrix_seed.unwrap_or(seed))?,
            (None, None) => return Err(Failure::Invalid("either --modes or --matrix is required".into())),
        };
        if args.photons > u.modes() {
            return Err(Failure::Invalid(format!("{} photons exceed {} modes", args.photons, u.modes())));
        }
        let noise = NoiseModel::new(args.x, args.eta)?;
        let k = TruncationLevel(args.k.unwrap_or(args.photons)).check(args.photons)?;
        Ok(Experiment { u, n: args.photons, noise, k, seed })
    }

    fn config(&self) -> Result<SamplerConfig, Failure> {
        Ok(SamplerConfig::new(self.u.clone(), self.n, self.noise, self.k, self.seed)?)
    }
}

#[derive(Serialize)]
struct ExactRow {
    occupation: String,
    probability: f64,
}

pub fn exact(args: &ExactArgs) -> Outcome {
    let e = Experiment::build(&args.experiment)?;
    let dist = lossy_mixture_distribution(&e.u, e.n, e.noise, e.k)?;
    let rows: Vec<ExactRow> = dist
        .iter()
        .map(|(occ, p)| ExactRow { occupation: occ.to_string(), probability: p })
        .collect();
    let manifest = RunManifest::new("exact", args, Some(e.seed));
    write_table(args.out.as_deref(), &manifest, &rows)
}

pub fn sample(args: &SampleArgs) -> Outcome {
    let e = Experiment::build(&args.experiment)?;
    let samples = sample_batch_with_threads(&e.config()?, args.samples, args.threads)?;
    let mut w = open_output(args.out.as_deref())?;
    for s in &samples {
        serde_json::to_writer(&mut w, s).map_err(|err| Failure::Runtime(err.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let manifest = RunManifest::new("sample", args, Some(e.seed)).to_json();
    match &args.out {
        Some(path) => {
            let mut sidecar = PathBuf::from(path).into_os_string();
            sidecar.push(".manifest.json");
            std::fs::write(sidecar, manifest + "\n")?;
        }
        None => eprintln!("{manifest}"),
    }
    Ok(())
}

fn need<T: Copy>(value: Option<T>, flag: &str, mode: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Invalid(format!("--{flag} is required for --mode {mode}")))
}

#[derive(Serialize)]
struct BoundsOutput {
    mode: BoundsMode,
    photons: usize,
    k: Option<usize>,
    value: f64,
}

pub fn bounds(args: &BoundsArgs) -> Outcome {
    let n = args.photons;
    let mode_name = args.mode.to_possible_value_name();
    let k = || need(args.k, "k", &mode_name);
    let eps = || need(args.epsilon, "epsilon", &mode_name);
    NoiseModel::new(args.x, args.eta)?;
    if let Some(k) = args.k {
        TruncationLevel(k).check(n)?;
    }
    let value = match args.mode {
        BoundsMode::WorstError => worst_case_bound(n, k()?, args.x, args.eta),
        BoundsMode::AverageError => average_case_bound(n, k()?, args.x, args.eta),
        BoundsMode::Chernoff => chernoff_bound(n, k()?, args.x * args.eta)?,
        BoundsMode::PointError => point_truncation_error(n, k()?, args.x, args.eta, PointErrorForm::FiniteN)?,
        BoundsMode::PointErrorAsymptotic => {
            point_truncation_error(n, k()?, args.x, args.eta, PointErrorForm::Asymptotic)?
        }
        BoundsMode::MinK => {
            let eps = eps()?;
            check_epsilon(eps)?;
            min_k_for_error(n, args.eta * args.x, eps) as f64
        }
        BoundsMode::MinKPoint => {
            let eps = eps()?;
            check_epsilon(eps)?;
            min_k_for_point_error(n, args.eta.sqrt() * args.x, eps) as f64
        }
        BoundsMode::StateMaxX | BoundsMode::StateMaxEta => max_noise_state(n, k()?, eps()?)?,
        BoundsMode::PointMaxX => max_noise_point(n, k()?, eps()?, NoiseAxis::Distinguishability)?,
        BoundsMode::PointMaxEta => max_noise_point(n, k()?, eps()?, NoiseAxis::Loss)?,
        BoundsMode::DepthThreshold => {
            let model = NonUniformLossModel::new(need(args.tau, "tau", &mode_name)?, 0, 0)?;
            nonuniform_depth_threshold(n, args.x, k()?, &model)?
        }
    };
    let manifest = RunManifest::new("bounds", args, None);
    let body = BoundsOutput { mode: args.mode, photons: n, k: args.k, value };
    write_json(None, &with_manifest(&manifest, body))
}

fn check_epsilon(eps: f64) -> Outcome {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("epsilon = {eps} must lie in (0, 1)")))
    }
}

trait PossibleValueName {
    fn to_possible_value_name(&self) -> String;
}

impl<T: clap::ValueEnum> PossibleValueName for T {
    fn to_possible_value_name(&self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
    }
}

fn point_model(args: &PointCostArgs) -> PointCostModel {
    PointCostModel {
        mis_factor: args.mis_factor,
        degenerate: match args.degenerate {
            Degenerate::Literal => DegenerateTerms::Literal,
            Degenerate::Guarded => DegenerateTerms::Guarded,
        },
    }
}

#[derive(Serialize)]
struct FixedCostRow {
    n: usize,
    m: usize,
    k: usize,
    state_ops: f64,
    point_ops: f64,
}

#[derive(Serialize)]
struct CostRow {
    n: usize,
    m: usize,
    k_state: usize,
    k_point: usize,
    log10_state_ops: f64,
    log10_point_ops: f64,
}

#[derive(Serialize)]
struct CrossoverRow {
    x: f64,
    eta: f64,
    epsilon: f64,
    n_min: usize,
    n_max: usize,
    crossover_n: Option<usize>,
}

pub fn cost(args: &CostArgs) -> Outcome {
    if args.n_min > args.n_max {
        return Err(Failure::Invalid("--n-min exceeds --n-max".into()));
    }
    let model = point_model(&args.point);
    let out = args.out.as_deref();
    let manifest = RunManifest::new("cost", args, None);
    let grid = args.n_min..=args.n_max;
    if args.crossover {
        let crossover = crossover_n(args.x, args.eta, args.epsilon, grid, &model)?;
        let row = CrossoverRow {
            x: args.x,
            eta: args.eta,
            epsilon: args.epsilon,
            n_min: args.n_min,
            n_max: args.n_max,
            crossover_n: crossover,
        };
        return write_table(out, &manifest, &[row]);
    }
    if let Some(k) = args.k {
        let rows = grid
            .filter(|&n| n >= k)
            .map(|n| {
                Ok(FixedCostRow {
                    n,
                    m: n * n,
                    k,
                    state_ops: state_truncation_cost(n, n * n, k)?,
                    point_ops: model.cost(n, k)?,
                })
            })
            .collect::<Result<Vec<_>, bosonsim::Error>>()?;
        return write_table(out, &manifest, &rows);
    }
    let rows = grid
        .map(|n| {
            let c = compare_costs(n, args.x, args.eta, args.epsilon, &model)?;
            Ok(CostRow {
                n,
                m: n * n,
                k_state: c.k_state,
                k_point: c.k_point,
                log10_state_ops: c.ln_state / std::f64::consts::LN_10,
                log10_point_ops: c.ln_point / std::f64::consts::LN_10,
            })
        })
        .collect::<Result<Vec<_>, bosonsim::Error>>()?;
    write_table(out, &manifest, &rows)
}

pub fn figures(args: &FiguresArgs) -> Outcome {
    let model = point_model(&args.point);
    let out = args.out.as_deref();
    let manifest = RunManifest::new("figures", args, None);
    match args.which {
        Figure::Fig1 => write_table(out, &manifest, &fig1_data(args.n_min..=args.n_max.unwrap_or(100), args.epsilon)?),
        Figure::Fig2 => write_table(
            out,
            &manifest,
            &fig2_data(args.n_min..=args.n_max.unwrap_or(600), args.epsilon, &model)?,
        ),
        Figure::Fig3 => {
            if args.photons < 2 {
                return Err(Failure::Invalid("fig3 needs --photons >= 2".into()));
            }
            write_table(out, &manifest, &fig3_data(args.photons, 1..=args.photons - 1, args.epsilon, &model)?)
        }
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    check: Check,
    passed: bool,
    statistic: f64,
    threshold: f64,
    detail: String,
}

pub fn validate(args: &ValidateArgs) -> Outcome {
    let e = Experiment::build(&args.experiment)?;
    let report = match args.check {
        Check::Tvd => {
            let samples = sample_batch_with_threads(&e.config()?, args.samples, args.threads)?;
            let exact = lossy_mixture_distribution(&e.u, e.n, e.noise, e.k)?;
            let tvd = total_variation(&empirical_distribution(&samples)?, &exact);
            ValidateOutput {
                check: args.check,
                passed: tvd <= args.tolerance,
                statistic: tvd,
                threshold: args.tolerance,
                detail: format!("empirical TVD over {} samples", args.samples),
            }
        }
        Check::PhotonMarginal => {
            let samples = sample_batch_with_threads(&e.config()?, args.samples, args.threads)?;
            let observed = histogram(samples.iter().map(FockVector::total));
            let expected: BTreeMap<usize, f64> = (0..=e.n).map(|j| (j, binomial_pmf(e.n, j, e.noise.eta()))).collect();
            let r = chi_square_gof(&observed, &expected, samples.len() as u64)?;
            ValidateOutput {
                check: args.check,
                passed: r.p_value > args.alpha,
                statistic: r.p_value,
                threshold: args.alpha,
                detail: format!("chi-square {:.4} with {} degrees of freedom", r.statistic, r.degrees_of_freedom),
            }
        }
        Check::BoundRespect => {
            let full = lossy_mixture_distribution(&e.u, e.n, e.noise, TruncationLevel(e.n))?;
            let mut worst = 0.0f64;
            let mut passed = true;
            for k in 0..e.n {
                let truncated = lossy_mixture_distribution(&e.u, e.n, e.noise, TruncationLevel(k))?;
                let tvd = total_variation(&truncated, &full);
                let bound = binomial_tail(e.n, k, e.noise.eta() * e.noise.x());
                passed &= tvd <= bound;
                if bound > 0.0 {
                    worst = worst.max(tvd / bound);
                }
            }
            ValidateOutput {
                check: args.check,
                passed,
                statistic: worst,
                threshold: 1.0,
                detail: "largest ratio of exact truncation TVD to the binomial-tail bound over k < n".into(),
            }
        }
    };
    let passed = report.passed;
    let summary = format!("{} = {:.6} against {}", report.detail, report.statistic, report.threshold);
    let manifest = RunManifest::new("validate", args, Some(e.seed));
    write_json(None, &with_manifest(&manifest, report))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::CheckFailed(summary))
    }
}
