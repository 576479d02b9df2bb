//! Operation-count models for state and point truncation, crossover search,
//! and the tables behind the comparison figures.

use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::bounds::{max_noise_point, max_noise_state, min_k_for_error, min_k_for_point_error, NoiseAxis};
use crate::error::{Error, Result};
use crate::types::check_unit_interval;

/// Number of probabilities evaluated per point-truncation sample.
pub const DEFAULT_MIS_FACTOR: f64 = 100.0;

/// Largest `i` for which the derangement number fits in a `u128`.
pub const EXACT_DERANGEMENT_LIMIT: usize = 34;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMethod {
    State,
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostEstimate {
    pub operations: f64,
    pub method: CostMethod,
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl CostEstimate {
    pub fn state(n: usize, m: usize, k: usize) -> Result<Self> {
        Ok(CostEstimate { operations: state_truncation_cost(n, m, k)?, method: CostMethod::State, n, m, k })
    }

    /// Point truncation always assumes `m = n^2`.
    pub fn point(n: usize, k: usize, model: &PointCostModel) -> Result<Self> {
        Ok(CostEstimate { operations: model.cost(n, k)?, method: CostMethod::Point, n, m: n * n, k })
    }
}

fn check_level(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidConfig(format!("truncation level k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// `2k 2^k + m k(k-1)/2 + m(n-k)`.
pub fn state_truncation_cost(n: usize, m: usize, k: usize) -> Result<f64> {
    check_level(n, k)?;
    let (n, m, k) = (n as f64, m as f64, k as f64);
    Ok(2.0 * k * k.exp2() + m * k * (k - 1.0) / 2.0 + m * (n - k))
}

/// Exact derangement number `D_i`, or `None` past [`EXACT_DERANGEMENT_LIMIT`].
pub fn derangements(i: usize) -> Option<u128> {
    if i > EXACT_DERANGEMENT_LIMIT {
        return None;
    }
    let (mut prev, mut cur) = (1u128, 0u128);
    if i == 0 {
        return Some(1);
    }
    for j in 2..=i as u128 {
        let next = (j - 1) * (prev + cur);
        prev = cur;
        cur = next;
    }
    Some(cur)
}

/// `ln D_i`; `-inf` for `i = 1`. Past the exact range `D_i = round(i!/e)`
/// differs from `i!/e` by less than one half, so `ln i! - 1` is used.
pub fn ln_derangements(i: usize) -> f64 {
    match derangements(i) {
        Some(0) => f64::NEG_INFINITY,
        Some(d) => (d as f64).ln(),
        None => ln_factorial(i as u64) - 1.0,
    }
}

/// How the degenerate terms of the point-truncation sum are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegenerateTerms {
    /// Evaluate the formula as written: `i 2^i` vanishes at `i = 0`,
    /// `D_1 = 0`, and `z^4 ln z` vanishes at `z = 0, 1`.
    #[default]
    Literal,
    /// Replace `i 2^i` by `max(1, i 2^i)` and `z^4 ln z` by 1 for `z < 2`.
    Guarded,
}

/// Point-truncation cost `F sum_{i<=k} C(n,i) R(n,n-i) i 2^i (n-i)^4 ln(n-i)`
/// with `R(n,n-i) = C(n,i) D_i` and `F` the number of probabilities per sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointCostModel {
    pub mis_factor: f64,
    pub degenerate: DegenerateTerms,
}

impl Default for PointCostModel {
    fn default() -> Self {
        PointCostModel { mis_factor: DEFAULT_MIS_FACTOR, degenerate: DegenerateTerms::Literal }
    }
}

impl PointCostModel {
    fn ln_term(&self, n: usize, i: usize) -> f64 {
        let ln_d = ln_derangements(i);
        let ln_perm = match (i, self.degenerate) {
            (0, DegenerateTerms::Literal) => f64::NEG_INFINITY,
            (0, DegenerateTerms::Guarded) => 0.0,
            _ => (i as f64).ln() + i as f64 * std::f64::consts::LN_2,
        };
        let z = (n - i) as f64;
        let ln_g = if z >= 2.0 {
            4.0 * z.ln() + z.ln().ln()
        } else {
            match self.degenerate {
                DegenerateTerms::Literal => f64::NEG_INFINITY,
                DegenerateTerms::Guarded => 0.0,
            }
        };
        2.0 * ln_binomial(n as u64, i as u64) + ln_d + ln_perm + ln_g
    }

    /// Natural log of the cost; `-inf` when every term vanishes.
    pub fn ln_cost(&self, n: usize, k: usize) -> Result<f64> {
        check_level(n, k)?;
        if !(self.mis_factor > 0.0) {
            return Err(Error::InvalidConfig("MIS factor must be positive".into()));
        }
        let terms: Vec<f64> = (0..=k).map(|i| self.ln_term(n, i)).filter(|t| t.is_finite()).collect();
        let Some(max) = terms.iter().copied().reduce(f64::max) else {
            return Ok(f64::NEG_INFINITY);
        };
        let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        Ok(self.mis_factor.ln() + max + sum.ln())
    }

    pub fn cost(&self, n: usize, k: usize) -> Result<f64> {
        Ok(self.ln_cost(n, k)?.exp())
    }
}

/// Point-truncation cost under the default model.
pub fn point_truncation_cost(n: usize, k: usize) -> Result<f64> {
    PointCostModel::default().cost(n, k)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// Levels and log-costs of both methods at `n` for error `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostComparison {
    pub n: usize,
    pub k_state: usize,
    pub k_point: usize,
    pub ln_state: f64,
    pub ln_point: f64,
}

impl CostComparison {
    pub fn point_cheaper(&self) -> bool {
        self.ln_point < self.ln_state
    }
}

/// Compares both methods at `n`, with `m = n^2` and each level chosen as the
/// smallest meeting `epsilon`.
pub fn compare_costs(n: usize, x: f64, eta: f64, epsilon: f64, model: &PointCostModel) -> Result<CostComparison> {
    check_unit_interval("x", x)?;
    check_unit_interval("eta", eta)?;
    check_epsilon(epsilon)?;
    let k_state = min_k_for_error(n, eta * x, epsilon);
    let k_point = min_k_for_point_error(n, eta.sqrt() * x, epsilon);
    Ok(CostComparison {
        n,
        k_state,
        k_point,
        ln_state: state_truncation_cost(n, n * n, k_state)?.ln(),
        ln_point: model.ln_cost(n, k_point)?,
    })
}

/// Photon number above which point truncation is cheaper for every `n` up to
/// the end of `n_range`. `None` if state truncation still wins at the end.
///
/// Tiny `n` where both costs are trivial can briefly favour point truncation;
/// those are not counted as a crossover.
pub fn crossover_n(
    x: f64,
    eta: f64,
    epsilon: f64,
    n_range: RangeInclusive<usize>,
    model: &PointCostModel,
) -> Result<Option<usize>> {
    let comparisons: Vec<CostComparison> = n_range
        .clone()
        .into_par_iter()
        .map(|n| compare_costs(n, x, eta, epsilon, model))
        .collect::<Result<_>>()?;
    let mut crossover = None;
    for c in comparisons.iter().rev() {
        if !c.point_cheaper() {
            break;
        }
        crossover = Some(c.n);
    }
    Ok(crossover)
}

/// Which truncation level a figure-1 row uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelRule {
    NMinusOne,
    Half,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fig1Row {
    pub n: usize,
    pub level: LevelRule,
    pub k: usize,
    pub state_max_x: f64,
    pub state_max_eta: f64,
    pub point_max_x: f64,
    pub point_max_eta: f64,
}

/// Highest simulable `x` (at `eta = 1`) and `eta` (at `x = 1`) for both
/// methods, at `k = n - 1` and `k = ceil(n/2)`.
pub fn fig1_data(n_range: RangeInclusive<usize>, epsilon: f64) -> Result<Vec<Fig1Row>> {
    check_epsilon(epsilon)?;
    let per_n: Vec<Vec<Fig1Row>> = n_range
        .into_par_iter()
        .filter(|&n| n >= 1)
        .map(|n| {
            [(LevelRule::NMinusOne, n - 1), (LevelRule::Half, n.div_ceil(2))]
                .into_iter()
                .map(|(level, k)| {
                    // state truncation depends only on eta x
                    let state = max_noise_state(n, k, epsilon)?;
                    Ok(Fig1Row {
                        n,
                        level,
                        k,
                        state_max_x: state,
                        state_max_eta: state,
                        point_max_x: max_noise_point(n, k, epsilon, NoiseAxis::Distinguishability)?,
                        point_max_eta: max_noise_point(n, k, epsilon, NoiseAxis::Loss)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

/// Noise settings compared in figure 2: `(x, eta)`.
pub const FIG2_SETTINGS: [(f64, f64); 2] = [(0.5, 0.5), (0.976, 0.755)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fig2Row {
    pub n: usize,
    pub x: f64,
    pub eta: f64,
    pub k_state: usize,
    pub k_point: usize,
    pub log10_state_ops: f64,
    pub log10_point_ops: f64,
}

/// Both cost curves against `n` for each of [`FIG2_SETTINGS`].
pub fn fig2_data(n_range: RangeInclusive<usize>, epsilon: f64, model: &PointCostModel) -> Result<Vec<Fig2Row>> {
    check_epsilon(epsilon)?;
    let mut rows = Vec::new();
    for (x, eta) in FIG2_SETTINGS {
        let part: Vec<Fig2Row> = n_range
            .clone()
            .into_par_iter()
            .map(|n| {
                let c = compare_costs(n, x, eta, epsilon, model)?;
                Ok(Fig2Row {
                    n,
                    x,
                    eta,
                    k_state: c.k_state,
                    k_point: c.k_point,
                    log10_state_ops: c.ln_state / std::f64::consts::LN_10,
                    log10_point_ops: c.ln_point / std::f64::consts::LN_10,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

/// Photon number used for figure 3.
pub const FIG3_PHOTONS: usize = 90;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    pub k: usize,
    pub matched_k: usize,
    pub log10_state_ops: f64,
    pub state_max_x: f64,
    pub point_max_x: f64,
    pub matched_point_max_x: f64,
    pub state_max_eta: f64,
    pub point_max_eta: f64,
    pub matched_point_max_eta: f64,
}

impl Fig3Row {
    fn state_max(&self, axis: NoiseAxis) -> f64 {
        match axis {
            NoiseAxis::Distinguishability => self.state_max_x,
            NoiseAxis::Loss => self.state_max_eta,
        }
    }

    fn matched_point_max(&self, axis: NoiseAxis) -> f64 {
        match axis {
            NoiseAxis::Distinguishability => self.matched_point_max_x,
            NoiseAxis::Loss => self.matched_point_max_eta,
        }
    }

    /// True when point truncation at equal runtime tolerates more noise.
    pub fn point_wins(&self, axis: NoiseAxis) -> bool {
        self.matched_point_max(axis) > self.state_max(axis)
    }
}

/// Smallest `k'` whose point cost at `n` reaches `ln_target`; `n` if none does.
pub fn matched_point_level(n: usize, ln_target: f64, model: &PointCostModel) -> Result<usize> {
    for k in 0..=n {
        if model.ln_cost(n, k)? >= ln_target {
            return Ok(k);
        }
    }
    Ok(n)
}

/// Per `k`, the noise reach of state truncation at `k`, of point truncation at
/// `k`, and of point truncation at the level `k'` with the same runtime.
pub fn fig3_data(
    n: usize,
    k_range: RangeInclusive<usize>,
    epsilon: f64,
    model: &PointCostModel,
) -> Result<Vec<Fig3Row>> {
    check_epsilon(epsilon)?;
    if *k_range.end() > n {
        return Err(Error::InvalidConfig(format!("k range ends past n = {n}")));
    }
    k_range
        .into_par_iter()
        .map(|k| {
            let ln_state = state_truncation_cost(n, n * n, k)?.ln();
            let matched_k = matched_point_level(n, ln_state, model)?;
            let state = max_noise_state(n, k, epsilon)?;
            let point = |level, axis| max_noise_point(n, level, epsilon, axis);
            Ok(Fig3Row {
                k,
                matched_k,
                log10_state_ops: ln_state / std::f64::consts::LN_10,
                state_max_x: state,
                point_max_x: point(k, NoiseAxis::Distinguishability)?,
                matched_point_max_x: point(matched_k, NoiseAxis::Distinguishability)?,
                state_max_eta: state,
                point_max_eta: point(k, NoiseAxis::Loss)?,
                matched_point_max_eta: point(matched_k, NoiseAxis::Loss)?,
            })
        })
        .collect()
}

/// Largest `k` at which point truncation at matched runtime still beats state
/// truncation on `axis`.
pub fn fig3_crossover(rows: &[Fig3Row], axis: NoiseAxis) -> Option<usize> {
    rows.iter().filter(|r| r.point_wins(axis)).map(|r| r.k).max()
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_cost_examples() {
        let c = state_truncation_cost(90, 8100, 30).unwrap();
        let expected = 2.0 * 30.0 * 2f64.powi(30) + 8100.0 * 435.0 + 8100.0 * 60.0;
        assert_eq!(c, expected);
        assert!((c / 6.4430e10 - 1.0).abs() < 1e-4);
        assert_eq!(state_truncation_cost(7, 49, 0).unwrap(), 49.0 * 7.0);
        assert!(state_truncation_cost(3, 9, 4).is_err());
        // f(k) - f(k-1) = (k+1) 2^k + m(k-2): one dip at k = 1 when m > 4
        assert_eq!(state_truncation_cost(5, 25, 1).unwrap() - state_truncation_cost(5, 25, 0).unwrap(), 4.0 - 25.0);
        for n in 2..40 {
            for k in 2..=n {
                let m = n * n;
                assert!(state_truncation_cost(n, m, k).unwrap() >= state_truncation_cost(n, m, k - 1).unwrap());
            }
        }
    }

    #[test]
    fn derangement_values() {
        let known = [1u128, 0, 1, 2, 9, 44, 265, 1854];
        for (i, &d) in known.iter().enumerate() {
            assert_eq!(derangements(i), Some(d));
        }
        assert_eq!(ln_derangements(1), f64::NEG_INFINITY);
        let d34 = derangements(34).unwrap() as f64;
        assert!((ln_derangements(35) - (35.0 * d34).ln()).abs() < 1e-12);
        assert!(derangements(35).is_none());
    }

    #[test]
    fn rencontres_sum_to_factorial() {
        for n in 1..=20u128 {
            let mut binom = 1u128;
            let mut total = 0u128;
            for i in 0..=n {
                total += binom * derangements(i as usize).unwrap();
                binom = binom * (n - i) / (i + 1);
            }
            let fact: u128 = (1..=n).product();
            assert_eq!(total, fact, "n = {n}");
        }
    }

    #[test]
    fn guarded_k0_term() {
        let guarded = PointCostModel { degenerate: DegenerateTerms::Guarded, ..Default::default() };
        for n in [5usize, 30, 200] {
            let nf = n as f64;
            let expected = 100.0 * nf.powi(4) * nf.ln();
            assert!((guarded.cost(n, 0).unwrap() / expected - 1.0).abs() < 1e-12);
        }
        assert_eq!(point_truncation_cost(30, 0).unwrap(), 0.0);
        assert_eq!(point_truncation_cost(30, 1).unwrap(), 0.0);
    }

    #[test]
    fn point_cost_matches_direct_sum() {
        let n = 12usize;
        for k in 0..=n {
            let mut direct = 0.0;
            for i in 2..=k {
                let c = ln_binomial(n as u64, i as u64).exp();
                let z = (n - i) as f64;
                let g = if z >= 2.0 { z.powi(4) * z.ln() } else { 0.0 };
                direct += c * c * derangements(i).unwrap() as f64 * i as f64 * 2f64.powi(i as i32) * g;
            }
            let got = point_truncation_cost(n, k).unwrap();
            assert!((got - 100.0 * direct).abs() <= 1e-10 * got.max(1.0), "k = {k}");
        }
    }

    #[test]
    fn costs_monotone_in_n() {
        let model = PointCostModel::default();
        for k in 0..10 {
            for n in (k + 1).max(2)..60 {
                assert!(model.cost(n + 1, k).unwrap() >= model.cost(n, k).unwrap());
                assert!(
                    state_truncation_cost(n + 1, (n + 1) * (n + 1), k).unwrap()
                        >= state_truncation_cost(n, n * n, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn noiseless_has_no_crossover() {
        let r = crossover_n(1.0, 1.0, 0.1, 2..=120, &PointCostModel::default()).unwrap();
        assert_eq!(r, None);
    }

    #[test]
    fn fig1_shape() {
        let rows = fig1_data(2..=30, 0.1).unwrap();
        assert_eq!(rows.len(), 2 * 29);
        for r in &rows {
            for v in [r.state_max_x, r.state_max_eta, r.point_max_x, r.point_max_eta] {
                assert!((0.0..=1.0).contains(&v));
            }
            if r.level == LevelRule::NMinusOne {
                let closed = 0.1f64.powf(1.0 / r.n as f64);
                assert!((r.state_max_x - closed).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn csv_has_header() {
        let rows = fig1_data(3..=3, 0.1).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,level,k,state_max_x,state_max_eta,point_max_x,point_max_eta\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
