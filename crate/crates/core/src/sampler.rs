//! Sampling boson sampling outputs under partial distinguishability and
//! uniform loss.
//!
//! Each sample picks the surviving photons, then an indistinguishable subset
//! whose size is binomial in `x` (truncated at `k`), samples that subset
//! exactly with the chain-rule permanent sampler, and sends every other
//! surviving photon through the interferometer on its own.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bounds::truncated_binomial_weights;
use crate::error::{Error, Result};
use crate::permanent::{column_deleted_permanents, permanent_ryser, select};
use crate::types::{FockVector, Interferometer, NoiseModel, OutputSample, TruncationLevel};

/// Hard limit on the size of an indistinguishable subset.
pub const INDISTINGUISHABLE_LIMIT: usize = 30;

/// Everything needed to draw samples from one experiment.
#[derive(Clone, Debug)]
pub struct SamplerConfig {
    interferometer: Interferometer,
    photons: usize,
    noise: NoiseModel,
    truncation: TruncationLevel,
    seed: u64,
}

impl SamplerConfig {
    pub fn new(
        interferometer: Interferometer,
        photons: usize,
        noise: NoiseModel,
        truncation: TruncationLevel,
        seed: u64,
    ) -> Result<Self> {
        if photons > interferometer.modes() {
            return Err(Error::InvalidConfig(format!(
                "{photons} photons exceed {} modes",
                interferometer.modes()
            )));
        }
        truncation.check(photons)?;
        if truncation.get() > INDISTINGUISHABLE_LIMIT {
            return Err(Error::SizeLimit {
                what: "truncation level",
                value: truncation.get(),
                limit: INDISTINGUISHABLE_LIMIT,
            });
        }
        Ok(SamplerConfig { interferometer, photons, noise, truncation, seed })
    }

    pub fn interferometer(&self) -> &Interferometer {
        &self.interferometer
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn truncation(&self) -> TruncationLevel {
        self.truncation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for sample `index`: stream `index` of the ChaCha20 key
    /// derived from the seed.
    pub fn stream_rng(&self, index: u64) -> ChaCha20Rng {
        stream_rng(self.seed, index)
    }
}

/// Independent ChaCha20 stream `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF categorical draw. `weights` need not be normalised.
fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical(format!("cannot sample from weights summing to {total}")));
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Ok(i);
        }
    }
    // rounding can leave target just above the final partial sum
    Ok(weights.iter().rposition(|&w| w > 0.0).expect("positive total"))
}

fn check_inputs(u: &Interferometer, input_modes: &[usize]) -> Result<()> {
    if input_modes.len() > INDISTINGUISHABLE_LIMIT {
        return Err(Error::SizeLimit {
            what: "indistinguishable photons",
            value: input_modes.len(),
            limit: INDISTINGUISHABLE_LIMIT,
        });
    }
    let mut seen = vec![false; u.modes()];
    for &a in input_modes {
        if a >= u.modes() {
            return Err(Error::IndexOutOfBounds { index: a, bound: u.modes() });
        }
        if seen[a] {
            return Err(Error::DuplicateInput(a));
        }
        seen[a] = true;
    }
    Ok(())
}

/// Exact sample of indistinguishable photons entering `input_modes`.
///
/// The input columns are put in uniformly random order; output mode `t` is
/// then drawn with weight `|Per(A_t(r))|^2`, where `A_t(r)` takes rows
/// `r_1..r_{t-1}, r` and the first `t` permuted columns. The weights for all
/// `r` come from one Laplace expansion along the new row, with the `t`
/// cofactor permanents computed together in `O(t 2^t)`.
pub fn sample_indistinguishable<R: Rng + ?Sized>(
    u: &Interferometer,
    input_modes: &[usize],
    rng: &mut R,
) -> Result<OutputSample> {
    check_inputs(u, input_modes)?;
    let m = u.modes();
    let mut cols = input_modes.to_vec();
    cols.shuffle(rng);
    let mut rows: Vec<usize> = Vec::with_capacity(cols.len());
    let mut weights = vec![0.0; m];
    for t in 1..=cols.len() {
        let b = DMatrix::from_fn(t - 1, t, |i, j| u.amplitude(rows[i], cols[j]));
        let cofactors = column_deleted_permanents(&b)?;
        for (r, w) in weights.iter_mut().enumerate() {
            let amp = cols[..t]
                .iter()
                .zip(&cofactors)
                .fold(Complex64::new(0.0, 0.0), |acc, (&c, &p)| acc + u.amplitude(r, c) * p);
            *w = amp.norm_sqr();
        }
        rows.push(draw_index(&weights, rng)?);
    }
    FockVector::from_modes(m, &rows)
}

/// Reference form of [`sample_indistinguishable`] that evaluates every
/// weight as a separate permanent. Consumes randomness identically and also
/// returns the number of permanents evaluated (`n m`).
pub fn sample_indistinguishable_reference<R: Rng + ?Sized>(
    u: &Interferometer,
    input_modes: &[usize],
    rng: &mut R,
) -> Result<(OutputSample, usize)> {
    check_inputs(u, input_modes)?;
    let m = u.modes();
    let mut cols = input_modes.to_vec();
    cols.shuffle(rng);
    let mut rows: Vec<usize> = Vec::with_capacity(cols.len());
    let mut weights = vec![0.0; m];
    let mut evaluations = 0usize;
    for t in 1..=cols.len() {
        for (r, w) in weights.iter_mut().enumerate() {
            rows.push(r);
            let a = select(u.matrix(), &rows, &cols[..t])?;
            rows.pop();
            *w = permanent_ryser(&a)?.norm_sqr();
            evaluations += 1;
        }
        rows.push(draw_index(&weights, rng)?);
    }
    Ok((FockVector::from_modes(m, &rows)?, evaluations))
}

/// Output mode of one distinguishable photon entering mode `a`, drawn with
/// probability `|U[b, a]|^2`.
pub fn sample_distinguishable<R: Rng + ?Sized>(u: &Interferometer, a: usize, rng: &mut R) -> Result<usize> {
    if a >= u.modes() {
        return Err(Error::IndexOutOfBounds { index: a, bound: u.modes() });
    }
    let weights: Vec<f64> = (0..u.modes()).map(|b| u.amplitude(b, a).norm_sqr()).collect();
    draw_index(&weights, rng)
}

/// Truncated binomial choice of indistinguishable photons among those entering
/// `modes`, followed by the mixed sample.
fn sample_subset_mixture<R: Rng + ?Sized>(
    u: &Interferometer,
    modes: &[usize],
    x: f64,
    k: usize,
    rng: &mut R,
) -> Result<OutputSample> {
    let weights = truncated_binomial_weights(modes.len(), k, x);
    let size = draw_index(&weights, rng)?;
    let mut order = modes.to_vec();
    let (chosen, rest) = order.partial_shuffle(rng, size);
    let indist = chosen.to_vec();
    let mut occupations = sample_indistinguishable(u, &indist, rng)?.occupations().to_vec();
    for &a in rest.iter() {
        occupations[sample_distinguishable(u, a, rng)?] += 1;
    }
    Ok(FockVector::new(occupations))
}

/// One lossless sample at truncation level `k`. Requires `eta = 1`.
pub fn sample_truncated<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<OutputSample> {
    if !cfg.noise.is_lossless() {
        return Err(Error::InvalidConfig("sample_truncated needs eta = 1; use sample_lossy_truncated".into()));
    }
    let modes: Vec<usize> = (0..cfg.photons).collect();
    sample_subset_mixture(&cfg.interferometer, &modes, cfg.noise.x(), cfg.truncation.get(), rng)
}

/// One sample under uniform loss: each photon survives independently with
/// probability `eta`; among the survivors the indistinguishable subset size is
/// binomial in `x`, truncated and renormalised only when more than `k`
/// photons survive. At `eta = 1` no survival draws are made, so the result is
/// identical to [`sample_truncated`] for the same generator state.
pub fn sample_lossy_truncated<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<OutputSample> {
    let eta = cfg.noise.eta();
    let survivors: Vec<usize> = if cfg.noise.is_lossless() {
        (0..cfg.photons).collect()
    } else {
        (0..cfg.photons).filter(|_| rng.random::<f64>() < eta).collect()
    };
    sample_subset_mixture(&cfg.interferometer, &survivors, cfg.noise.x(), cfg.truncation.get(), rng)
}

/// `count` samples on the current rayon pool. Sample `j` uses
/// [`SamplerConfig::stream_rng`]`(j)`, so the output does not depend on how
/// many workers run.
pub fn sample_batch(cfg: &SamplerConfig, count: usize) -> Result<Vec<OutputSample>> {
    (0..count as u64)
        .into_par_iter()
        .map(|j| sample_lossy_truncated(cfg, &mut cfg.stream_rng(j)))
        .collect()
}

/// [`sample_batch`] on a dedicated pool of `threads` workers (0 = rayon default).
pub fn sample_batch_with_threads(cfg: &SamplerConfig, count: usize, threads: usize) -> Result<Vec<OutputSample>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| sample_batch(cfg, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{fourier, haar_random};
    use crate::types::CMatrix;

    #[test]
    fn identity_keeps_photons_in_place() {
        let id = Interferometer::new(CMatrix::identity(5, 5)).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..20 {
            let s = sample_indistinguishable(&id, &[0, 1, 2], &mut rng).unwrap();
            assert_eq!(s.occupations(), &[1, 1, 1, 0, 0]);
            assert_eq!(sample_distinguishable(&id, 1, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn hom_never_coincident() {
        let bs = fourier(2).unwrap();
        let mut rng = stream_rng(2, 0);
        let mut bunched = [0usize; 2];
        for _ in 0..10_000 {
            let s = sample_indistinguishable(&bs, &[0, 1], &mut rng).unwrap();
            assert_ne!(s.occupations(), &[1, 1]);
            bunched[if s.occupations()[0] == 2 { 0 } else { 1 }] += 1;
        }
        assert!((bunched[0] as f64 / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn duplicate_and_out_of_range_inputs() {
        let u = haar_random(4, 1).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(matches!(sample_indistinguishable(&u, &[1, 1], &mut rng), Err(Error::DuplicateInput(1))));
        assert!(matches!(
            sample_indistinguishable(&u, &[4], &mut rng),
            Err(Error::IndexOutOfBounds { .. })
        ));
        assert!(sample_distinguishable(&u, 9, &mut rng).is_err());
        let empty = sample_indistinguishable(&u, &[], &mut rng).unwrap();
        assert_eq!(empty.total(), 0);
    }

    #[test]
    fn reference_and_laplace_paths_agree() {
        let u = haar_random(9, 4).unwrap();
        for j in 0..200 {
            let fast = sample_indistinguishable(&u, &[0, 2, 3, 7], &mut stream_rng(5, j)).unwrap();
            let (slow, evals) = sample_indistinguishable_reference(&u, &[0, 2, 3, 7], &mut stream_rng(5, j)).unwrap();
            assert_eq!(fast, slow);
            assert!(evals <= 4 * 9);
        }
    }

    #[test]
    fn zero_x_matches_independent_propagation() {
        let u = haar_random(6, 8).unwrap();
        let cfg = SamplerConfig::new(u.clone(), 3, NoiseModel::new(0.0, 1.0).unwrap(), TruncationLevel(3), 1).unwrap();
        for j in 0..50 {
            let s = sample_truncated(&cfg, &mut stream_rng(3, j)).unwrap();
            let mut rng = stream_rng(3, j);
            let _size: f64 = rng.random();
            let mut order = vec![0, 1, 2];
            let (_, rest) = order.partial_shuffle(&mut rng, 0);
            let mut occ = vec![0; 6];
            for &a in rest.iter() {
                occ[sample_distinguishable(&u, a, &mut rng).unwrap()] += 1;
            }
            assert_eq!(s.occupations(), &occ[..]);
        }
    }

    #[test]
    fn lossless_lossy_matches_truncated() {
        let u = haar_random(7, 9).unwrap();
        let cfg = SamplerConfig::new(u, 4, NoiseModel::new(0.6, 1.0).unwrap(), TruncationLevel(2), 11).unwrap();
        for j in 0..100 {
            let a = sample_truncated(&cfg, &mut cfg.stream_rng(j)).unwrap();
            let b = sample_lossy_truncated(&cfg, &mut cfg.stream_rng(j)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn truncated_requires_lossless() {
        let u = haar_random(4, 1).unwrap();
        let cfg = SamplerConfig::new(u, 2, NoiseModel::new(0.5, 0.5).unwrap(), TruncationLevel(1), 0).unwrap();
        assert!(matches!(sample_truncated(&cfg, &mut stream_rng(0, 0)), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_validation() {
        let u = haar_random(3, 1).unwrap();
        let ideal = NoiseModel::ideal();
        assert!(SamplerConfig::new(u.clone(), 4, ideal, TruncationLevel(2), 0).is_err());
        assert!(SamplerConfig::new(u, 2, ideal, TruncationLevel(3), 0).is_err());
    }

    #[test]
    fn batch_is_worker_count_independent() {
        let u = haar_random(10, 3).unwrap();
        let cfg = SamplerConfig::new(u, 5, NoiseModel::new(0.7, 0.8).unwrap(), TruncationLevel(3), 99).unwrap();
        let one = sample_batch_with_threads(&cfg, 64, 1).unwrap();
        let eight = sample_batch_with_threads(&cfg, 64, 8).unwrap();
        assert_eq!(one, eight);
        assert!(sample_batch(&cfg, 0).unwrap().is_empty());
    }
}
