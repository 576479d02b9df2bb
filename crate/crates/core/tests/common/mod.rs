//! Test-only reference models that share no code with the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

use bosonsim::{CMatrix, FockVector, Interferometer, OutcomeDistribution};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Output table of photons with explicit internal states, by expanding
/// `prod_a (sum_{b,mu} U[b,a] psi_a[mu] c^dag_{b,mu}) |0>` in the Fock basis
/// and tracing out the internal degree of freedom.
pub fn fock_expansion(u: &Interferometer, inputs: &[usize], internal: &[Vec<Complex64>]) -> OutcomeDistribution {
    let m = u.modes();
    let d = internal[0].len();
    let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::from([(Vec::new(), Complex64::new(1.0, 0.0))]);
    for (&a, psi) in inputs.iter().zip(internal) {
        let mut next = BTreeMap::new();
        for (mono, coeff) in &poly {
            for b in 0..m {
                for (mu, &amp) in psi.iter().enumerate() {
                    let c = *coeff * u.amplitude(b, a) * amp;
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut key = mono.clone();
                    let slot = b * d + mu;
                    let pos = key.partition_point(|&v| v <= slot);
                    key.insert(pos, slot);
                    *next.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
                }
            }
        }
        poly = next;
    }
    let mut out = OutcomeDistribution::new();
    for (mono, coeff) in poly {
        let mut counts = vec![0usize; m * d];
        for s in mono {
            counts[s] += 1;
        }
        let norm: f64 = counts.iter().map(|&c| (1..=c).product::<usize>() as f64).product();
        let mut occ = vec![0usize; m];
        for (s, &c) in counts.iter().enumerate() {
            occ[s / d] += c;
        }
        out.add(FockVector::new(occ), coeff.norm_sqr() * norm);
    }
    out
}

/// Internal states with pairwise overlap `x`: `sqrt(x) e_0 + sqrt(1-x) e_{a+1}`.
pub fn uniform_overlap_states(n: usize, x: f64) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|a| {
            let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
            v[0] = Complex64::new(x.sqrt(), 0.0);
            v[a + 1] += Complex64::new((1.0 - x).sqrt(), 0.0);
            v
        })
        .collect()
}

/// Binomial pmf built by repeated convolution with one Bernoulli trial.
pub fn direct_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for _ in 0..n {
        for i in (0..=n).rev() {
            let from_below = if i > 0 { pmf[i - 1] * p } else { 0.0 };
            pmf[i] = pmf[i] * (1.0 - p) + from_below;
        }
    }
    pmf
}

/// `P(X > k)` for `X ~ Binomial(n, p)`.
pub fn direct_tail(n: usize, k: usize, p: f64) -> f64 {
    direct_pmf(n, p)[(k + 1).min(n + 1)..].iter().sum()
}

pub fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
