//! Distances and goodness-of-fit checks used to validate samplers.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::types::{OutcomeDistribution, OutputSample};

/// Minimum expected count per chi-square bin; smaller bins are pooled.
pub const POOLING_THRESHOLD: f64 = 5.0;

/// `1/2 sum |p - q|` over the union of supports.
pub fn total_variation(p: &OutcomeDistribution, q: &OutcomeDistribution) -> f64 {
    let keys: BTreeSet<_> = p.keys().chain(q.keys()).collect();
    let sum: f64 = keys.into_iter().map(|k| (p.get(k) - q.get(k)).abs()).sum();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Normalised sample frequencies.
pub fn empirical_distribution(samples: &[OutputSample]) -> Result<OutcomeDistribution> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical distribution needs at least one sample"));
    }
    let w = 1.0 / samples.len() as f64;
    Ok(samples.iter().map(|s| (s.clone(), w)).collect())
}

/// Counts of each distinct value.
pub fn histogram<K: Ord + Clone>(values: impl IntoIterator<Item = K>) -> BTreeMap<K, u64> {
    let mut out = BTreeMap::new();
    for v in values {
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of `observed` counts against `expected`
/// probabilities for `total` trials.
///
/// Bins with expected count below [`POOLING_THRESHOLD`] are pooled into one
/// bin; if that bin is still below threshold it is merged into the smallest
/// regular bin. Any observation where `expected` has no mass gives `p = 0`.
pub fn chi_square_gof<K: Ord>(
    observed: &BTreeMap<K, u64>,
    expected: &BTreeMap<K, f64>,
    total: u64,
) -> Result<ChiSquareResult> {
    if total == 0 {
        return Err(Error::EmptyInput("chi-square test needs at least one observation"));
    }
    let n = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0f64, 0.0f64);
    for (key, &p) in expected {
        let e = n * p;
        let o = observed.get(key).copied().unwrap_or(0) as f64;
        if e < POOLING_THRESHOLD {
            pooled.0 += o;
            pooled.1 += e;
        } else {
            bins.push((o, e));
        }
    }
    // observations where the model puts no mass at all
    let impossible: u64 = observed
        .iter()
        .filter(|(key, _)| expected.get(*key).is_none_or(|&p| p <= 0.0))
        .map(|(_, &o)| o)
        .sum();
    if pooled.0 > 0.0 || pooled.1 > 0.0 {
        if pooled.1 >= POOLING_THRESHOLD || bins.is_empty() {
            bins.push(pooled);
        } else {
            let smallest = bins
                .iter_mut()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            smallest.0 += pooled.0;
            smallest.1 += pooled.1;
        }
    }
    if bins.len() < 2 {
        return Err(Error::DegenerateTest(format!("{} bin(s) after pooling", bins.len())));
    }
    let statistic: f64 = if impossible > 0 {
        f64::INFINITY
    } else {
        bins.iter().map(|&(o, e)| (o - e).powi(2) / e).sum()
    };
    let df = bins.len() - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    let p_value = if statistic.is_finite() { dist.sf(statistic) } else { 0.0 };
    Ok(ChiSquareResult { statistic, degrees_of_freedom: df, p_value })
}
