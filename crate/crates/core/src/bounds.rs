//! Closed-form error bounds for state truncation and point truncation, their
//! inversions, and the depth threshold for non-uniform loss.
//!
//! All logarithms are natural.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::types::check_unit_interval;

/// Tolerance of the noise-parameter bisections.
pub const BISECTION_TOLERANCE: f64 = 1e-9;

/// Neumaier compensated sum.
#[derive(Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_binomial(n as u64, k as u64)
}

/// `ln( C(n,i) p^i (1-p)^(n-i) )`, with `0 ln 0 = 0`.
fn ln_binomial_term(n: usize, i: usize, p: f64) -> f64 {
    let mut v = ln_choose(n, i);
    if i > 0 {
        v += i as f64 * p.ln();
    }
    if n > i {
        v += (n - i) as f64 * (-p).ln_1p();
    }
    v
}

/// Binomial probability mass `C(n,i) p^i (1-p)^(n-i)`.
pub fn binomial_pmf(n: usize, i: usize, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    ln_binomial_term(n, i, p).exp()
}

/// Upper tail `sum_{i=k+1}^n C(n,i) p^i (1-p)^(n-i)`.
///
/// This is the worst-case trace distance for truncation at level `k` with
/// `p = x` (lossless) or `p = eta x` (uniform loss).
pub fn binomial_tail(n: usize, k: usize, p: f64) -> f64 {
    if k >= n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_c = ln_choose(n, k + 1);
    let mut sum = CompensatedSum::default();
    for i in k + 1..=n {
        sum.add((ln_c + i as f64 * ln_p + (n - i) as f64 * ln_q).exp());
        if i < n {
            ln_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
    }
    sum.value().clamp(0.0, 1.0)
}

/// Size distribution of the indistinguishable subset after truncation at `k`:
/// entry `i` is `C(n,i) x^i (1-x)^(n-i)` renormalised over `i <= k`.
///
/// At `x = 1` with `k < n` the renormalised weights are undefined; the
/// returned point mass at `i = k` is their limit as `x -> 1`.
pub fn truncated_binomial_weights(n: usize, k: usize, x: f64) -> Vec<f64> {
    let k = k.min(n);
    let mut weights = vec![0.0; k + 1];
    if x <= 0.0 {
        weights[0] = 1.0;
        return weights;
    }
    if x >= 1.0 {
        weights[k] = 1.0;
        return weights;
    }
    let logs: Vec<f64> = (0..=k).map(|i| ln_binomial_term(n, i, x)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (w, l) in weights.iter_mut().zip(&logs) {
        *w = (l - top).exp();
        total += *w;
    }
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

/// Relative entropy between coins of bias `a` and `b`.
pub fn relative_entropy(a: f64, b: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// Chernoff form `exp(-n D(k/n || x))` of the truncation bound, valid for
/// `n x < k`. At `k = n` it evaluates to `x^n`.
pub fn chernoff_bound(n: usize, k: usize, x: f64) -> Result<f64> {
    check_unit_interval("x", x)?;
    let nf = n as f64;
    if (k as f64) <= nf * x || k > n {
        return Err(Error::Domain(format!("Chernoff bound needs n*x < k <= n (n={n}, k={k}, x={x})")));
    }
    Ok((-nf * relative_entropy(k as f64 / nf, x)).exp())
}

/// Worst-case bound `binomial_tail(n, k, eta x)` over all interferometers.
pub fn worst_case_bound(n: usize, k: usize, x: f64, eta: f64) -> f64 {
    binomial_tail(n, k, eta * x)
}

/// Average-case bound on the total variation distance for Haar-random
/// interferometers, `2 binomial_tail(n, k, eta x)`.
pub fn average_case_bound(n: usize, k: usize, x: f64, eta: f64) -> f64 {
    2.0 * binomial_tail(n, k, eta * x)
}

/// Smallest `k` with `binomial_tail(n, k, p) <= epsilon`.
pub fn min_k_for_error(n: usize, p: f64, epsilon: f64) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if binomial_tail(n, mid, p) <= epsilon {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Largest `v` in `[0, 1]` with `f(v) <= epsilon`, for `f` non-decreasing.
fn bisect_max(f: impl Fn(f64) -> f64, epsilon: f64) -> f64 {
    if f(1.0) <= epsilon {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// Largest noise parameter (`x` at `eta = 1`, or `eta` at `x = 1`) that state
/// truncation at level `k` simulates within `epsilon`.
pub fn max_noise_state(n: usize, k: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(bisect_max(|p| binomial_tail(n, k, p), epsilon))
}

/// Asymptotic or finite-`n` variant of the point-truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointErrorForm {
    Asymptotic,
    FiniteN,
}

/// `e^{-1} sum_{l=0}^{t} 1/l!` for `t = 0..=n`.
fn truncated_e_fractions(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut term = 1.0;
    let mut sum = 0.0;
    for l in 0..=n {
        if l > 0 {
            term /= l as f64;
        }
        sum += term;
        out.push(sum / std::f64::consts::E);
    }
    out
}

fn point_error_alpha(n: usize, k: usize, alpha: f64, fractions: &[f64]) -> f64 {
    if k >= n || alpha == 0.0 {
        return 0.0;
    }
    let a2 = alpha * alpha;
    let mut sum = CompensatedSum::default();
    let mut power = a2.powi(k as i32 + 1);
    for j in k + 1..=n {
        sum.add(power * fractions[n - j]);
        power *= a2;
    }
    sum.value().sqrt()
}

/// Error of point truncation at level `k`, with `alpha = sqrt(eta) x`.
///
/// Asymptotic: `alpha^(k+1) / sqrt(1 - alpha^2)`.
/// Finite `n`: `sqrt( sum_{j=k+1}^n alpha^(2j) e^{-1} sum_{l=0}^{n-j} 1/l! )`.
pub fn point_truncation_error(n: usize, k: usize, x: f64, eta: f64, form: PointErrorForm) -> Result<f64> {
    check_unit_interval("x", x)?;
    check_unit_interval("eta", eta)?;
    let alpha = eta.sqrt() * x;
    match form {
        PointErrorForm::Asymptotic => {
            if alpha >= 1.0 {
                return Err(Error::Domain("asymptotic point-truncation error needs sqrt(eta) x < 1".into()));
            }
            Ok(alpha.powi(k as i32 + 1) / (1.0 - alpha * alpha).sqrt())
        }
        PointErrorForm::FiniteN => Ok(point_error_alpha(n, k, alpha, &truncated_e_fractions(n))),
    }
}

/// Smallest point-truncation level whose finite-`n` error is at most `epsilon`.
pub fn min_k_for_point_error(n: usize, alpha: f64, epsilon: f64) -> usize {
    let fractions = truncated_e_fractions(n);
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if point_error_alpha(n, mid, alpha, &fractions) <= epsilon {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Which noise parameter is scanned while the other is held at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseAxis {
    /// Scan `x` with `eta = 1`.
    Distinguishability,
    /// Scan `eta` with `x = 1`.
    Loss,
}

impl NoiseAxis {
    fn alpha(self, v: f64) -> f64 {
        match self {
            NoiseAxis::Distinguishability => v,
            NoiseAxis::Loss => v.sqrt(),
        }
    }
}

/// Largest noise parameter point truncation at level `k` simulates within
/// `epsilon`, using the finite-`n` error.
pub fn max_noise_point(n: usize, k: usize, epsilon: f64, axis: NoiseAxis) -> Result<f64> {
    check_epsilon(epsilon)?;
    let fractions = truncated_e_fractions(n);
    Ok(bisect_max(|v| point_error_alpha(n, k, axis.alpha(v), &fractions), epsilon))
}

/// Loss that grows with circuit depth: every lossy component transmits with
/// probability `tau`, each photon meets at least `depth_s` of them, and the
/// circuit holds `total_components` in all.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NonUniformLossModel {
    tau: f64,
    depth_s: usize,
    total_components: usize,
}

impl NonUniformLossModel {
    pub fn new(tau: f64, depth_s: usize, total_components: usize) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidConfig(format!("tau = {tau} must lie in (0, 1)")));
        }
        if total_components < depth_s {
            return Err(Error::InvalidConfig(format!(
                "total components {total_components} < minimal depth {depth_s}"
            )));
        }
        Ok(NonUniformLossModel { tau, depth_s, total_components })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn depth_s(&self) -> usize {
        self.depth_s
    }

    pub fn total_components(&self) -> usize {
        self.total_components
    }

    /// Uniform survival probability extracted from the shallowest path.
    pub fn effective_eta(&self) -> f64 {
        self.tau.powi(self.depth_s as i32)
    }

    /// True when `depth_s` exceeds [`nonuniform_depth_threshold`].
    pub fn is_simulable(&self, n: usize, x: f64, k: usize) -> Result<bool> {
        Ok(self.depth_s as f64 > nonuniform_depth_threshold(n, x, k, self)?)
    }
}

/// Depth above which truncation at `k` keeps the error bounded:
/// `(ln n - ln(1/x) - ln k) / ln(1/tau)`. Returns `-inf` at `x = 0`.
pub fn nonuniform_depth_threshold(n: usize, x: f64, k: usize, model: &NonUniformLossModel) -> Result<f64> {
    check_unit_interval("x", x)?;
    if k == 0 {
        return Err(Error::Domain("depth threshold needs k >= 1".into()));
    }
    if n == 0 {
        return Err(Error::Domain("depth threshold needs n >= 1".into()));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let numerator = (n as f64).ln() - (1.0 / x).ln() - (k as f64).ln();
    Ok(numerator / (1.0 / model.tau).ln())
}

/// Which bound an [`ErrorReport`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    WorstState,
    AverageState,
    Chernoff,
    Point,
}

/// A bound value together with its kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub epsilon: f64,
    pub kind: BoundKind,
    /// Effective point-truncation parameter `sqrt(eta) x`; only for `Point`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl ErrorReport {
    pub fn worst_state(n: usize, k: usize, x: f64, eta: f64) -> Self {
        ErrorReport { epsilon: worst_case_bound(n, k, x, eta), kind: BoundKind::WorstState, alpha: None }
    }

    pub fn average_state(n: usize, k: usize, x: f64, eta: f64) -> Self {
        ErrorReport { epsilon: average_case_bound(n, k, x, eta), kind: BoundKind::AverageState, alpha: None }
    }

    pub fn chernoff(n: usize, k: usize, x: f64, eta: f64) -> Result<Self> {
        Ok(ErrorReport { epsilon: chernoff_bound(n, k, x * eta)?, kind: BoundKind::Chernoff, alpha: None })
    }

    pub fn point(n: usize, k: usize, x: f64, eta: f64, form: PointErrorForm) -> Result<Self> {
        Ok(ErrorReport {
            epsilon: point_truncation_error(n, k, x, eta, form)?,
            kind: BoundKind::Point,
            alpha: Some(eta.sqrt() * x),
        })
    }
}
