//! Brute-force output distributions for small photon numbers.
//!
//! These tables are the ground truth the sampler and the bounds are checked
//! against. Every routine enumerates all output occupations, collisions
//! included, and is exponential in `n`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::factorial::ln_binomial;

use crate::bounds::truncated_binomial_weights;
use crate::error::{Error, Result};
use crate::permanent::{permanent_ryser, select};
use crate::types::{check_unit_interval, CMatrix, FockVector, Interferometer, NoiseModel, OutcomeDistribution, TruncationLevel};

pub const OUTCOME_LIMIT: f64 = 1e7;
pub const IDEAL_PHOTON_LIMIT: usize = 7;
pub const GRAM_PHOTON_LIMIT: usize = 5;
pub const MIXTURE_PHOTON_LIMIT: usize = 7;
pub const LOSSY_PHOTON_LIMIT: usize = 6;

/// Imaginary residue tolerated on a probability before it is discarded.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// All placements of `n` photons in `m` modes, in descending lexicographic
/// order (`(2,0), (1,1), (0,2)` for `n = m = 2`).
pub fn enumerate_outputs(n: usize, m: usize) -> Result<Vec<FockVector>> {
    if m == 0 {
        return if n == 0 { Ok(vec![FockVector::new(vec![])]) } else { Ok(vec![]) };
    }
    let count = ln_binomial((n + m - 1) as u64, n as u64).exp();
    if count > OUTCOME_LIMIT * (1.0 + 1e-12) {
        return Err(Error::SizeLimit { what: "number of outcomes", value: count.round() as usize, limit: OUTCOME_LIMIT as usize });
    }
    let mut out = Vec::with_capacity(count.round() as usize);
    let mut current = vec![0usize; m];
    fill(&mut out, &mut current, 0, n);
    Ok(out)
}

fn fill(out: &mut Vec<FockVector>, current: &mut Vec<usize>, mode: usize, remaining: usize) {
    if mode == current.len() - 1 {
        current[mode] = remaining;
        out.push(FockVector::new(current.clone()));
        return;
    }
    for take in (0..=remaining).rev() {
        current[mode] = take;
        fill(out, current, mode + 1, remaining - take);
    }
    current[mode] = 0;
}

fn check_input(u: &Interferometer, s: &FockVector, limit: usize) -> Result<Vec<usize>> {
    if s.modes() != u.modes() {
        return Err(Error::Dimension(format!(
            "input has {} modes but the interferometer has {}",
            s.modes(),
            u.modes()
        )));
    }
    if !s.is_collision_free() {
        return Err(Error::InvalidConfig(format!("input {s} is not collision-free")));
    }
    if s.total() > limit {
        return Err(Error::SizeLimit { what: "photon number", value: s.total(), limit });
    }
    Ok(s.mode_list())
}

fn check_output(s: &FockVector, out: &FockVector) -> Result<()> {
    if out.total() != s.total() {
        return Err(Error::PhotonMismatch { expected: s.total(), got: out.total() });
    }
    if out.modes() != s.modes() {
        return Err(Error::Dimension(format!("output has {} modes, input {}", out.modes(), s.modes())));
    }
    Ok(())
}

fn ideal_weight(u: &CMatrix, inputs: &[usize], out: &FockVector) -> f64 {
    let sub = select(u, &out.mode_list(), inputs).expect("indices checked");
    permanent_ryser(&sub).expect("size checked").norm_sqr() / out.factorial_product()
}

fn distinguishable_weight(u: &CMatrix, inputs: &[usize], out: &FockVector) -> f64 {
    let sub = select(u, &out.mode_list(), inputs).expect("indices checked");
    let sq: DMatrix<f64> = sub.map(|v| v.norm_sqr());
    permanent_ryser(&sq).expect("size checked") / out.factorial_product()
}

/// `|Per(U_{S,S'})|^2 / prod S'_i!` for one output.
pub fn ideal_probability(u: &Interferometer, s: &FockVector, out: &FockVector) -> Result<f64> {
    let inputs = check_input(u, s, crate::permanent::RYSER_LIMIT)?;
    check_output(s, out)?;
    Ok(ideal_weight(u.matrix(), &inputs, out))
}

/// `Per(|U_{S,S'}|^2) / prod S'_i!` for one output.
pub fn distinguishable_probability(u: &Interferometer, s: &FockVector, out: &FockVector) -> Result<f64> {
    let inputs = check_input(u, s, crate::permanent::RYSER_LIMIT)?;
    check_output(s, out)?;
    Ok(distinguishable_weight(u.matrix(), &inputs, out))
}

fn table(u: &CMatrix, inputs: &[usize], weight: fn(&CMatrix, &[usize], &FockVector) -> f64) -> Result<OutcomeDistribution> {
    let outputs = enumerate_outputs(inputs.len(), u.nrows())?;
    Ok(outputs.into_iter().map(|out| {
        let p = weight(u, inputs, &out);
        (out, p)
    }).collect())
}

/// Output distribution of fully indistinguishable photons.
pub fn ideal_distribution(u: &Interferometer, s: &FockVector) -> Result<OutcomeDistribution> {
    let inputs = check_input(u, s, IDEAL_PHOTON_LIMIT)?;
    table(u.matrix(), &inputs, ideal_weight)
}

/// Output distribution of fully distinguishable photons.
pub fn distinguishable_distribution(u: &Interferometer, s: &FockVector) -> Result<OutcomeDistribution> {
    let inputs = check_input(u, s, IDEAL_PHOTON_LIMIT)?;
    table(u.matrix(), &inputs, distinguishable_weight)
}

/// Hermitian, unit-diagonal, positive semidefinite photon overlap matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    matrix: CMatrix,
}

impl GramMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Dimension(format!("gram matrix is {}x{}", n, matrix.ncols())));
        }
        for i in 0..n {
            if (matrix[(i, i)] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::InvalidGram(format!("diagonal entry {i} is {}", matrix[(i, i)])));
            }
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidGram(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        if n > 0 {
            let smallest = matrix.clone().symmetric_eigen().eigenvalues.min();
            if smallest < -1e-9 {
                return Err(Error::InvalidGram(format!("not positive semidefinite (eigenvalue {smallest:.3e})")));
            }
        }
        Ok(GramMatrix { matrix })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Gram matrix with off-diagonal overlap `x`.
pub fn uniform_gram(n: usize, x: f64) -> Result<GramMatrix> {
    check_unit_interval("x", x)?;
    let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { 1.0 } else { x }, 0.0));
    GramMatrix::new(m)
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Output distribution of photons with arbitrary pairwise overlaps, by the
/// double sum over permutations
/// `sum_{tau, tau'} prod_k U[s'_k, s_tau(k)] conj(U[s'_k, s_tau'(k)]) G[tau'(k), tau(k)]`.
pub fn gram_distribution(u: &Interferometer, s: &FockVector, gram: &GramMatrix) -> Result<OutcomeDistribution> {
    let inputs = check_input(u, s, GRAM_PHOTON_LIMIT)?;
    let n = inputs.len();
    if gram.size() != n {
        return Err(Error::Dimension(format!("gram matrix is {0}x{0} for {n} photons", gram.size())));
    }
    let perms = all_permutations(n);
    let g = gram.matrix();
    // overlap weight of each (tau, tau') pair is independent of the outcome
    let overlaps: Vec<Complex64> = perms
        .iter()
        .flat_map(|tau| {
            perms.iter().map(move |tau_p| {
                (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * g[(tau_p[k], tau[k])])
            })
        })
        .collect();
    let input_norm = s.factorial_product();
    let mut dist = OutcomeDistribution::new();
    for out in enumerate_outputs(n, u.modes())? {
        let rows = out.mode_list();
        let amps: Vec<Complex64> = perms
            .iter()
            .map(|tau| (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * u.amplitude(rows[k], inputs[tau[k]])))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (a, amp) in amps.iter().enumerate() {
            for (b, amp_p) in amps.iter().enumerate() {
                total += amp * amp_p.conj() * overlaps[a * perms.len() + b];
            }
        }
        let p = total / (input_norm * out.factorial_product());
        if p.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::Numerical(format!("probability of {out} has imaginary part {:.3e}", p.im)));
        }
        dist.add(out, p.re);
    }
    Ok(dist)
}

/// Distribution when photons entering `indist` are mutually
/// indistinguishable and photons entering `dist` are distinguishable from
/// everything: the ideal table of `indist` convolved with independent
/// single-photon propagation of each `dist` photon.
fn partially_indistinguishable(u: &CMatrix, indist: &[usize], dist: &[usize]) -> Result<BTreeMap<FockVector, f64>> {
    let m = u.nrows();
    let mut current: BTreeMap<FockVector, f64> = if indist.is_empty() {
        BTreeMap::from([(FockVector::vacuum(m), 1.0)])
    } else {
        table(u, indist, ideal_weight)?.iter().map(|(k, p)| (k.clone(), p)).collect()
    };
    for &a in dist {
        let column: Vec<f64> = (0..m).map(|b| u[(b, a)].norm_sqr()).collect();
        let mut next = BTreeMap::new();
        for (occ, p) in &current {
            for (b, &q) in column.iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let mut v = occ.occupations().to_vec();
                v[b] += 1;
                *next.entry(FockVector::new(v)).or_insert(0.0) += p * q;
            }
        }
        current = next;
    }
    Ok(current)
}

/// Indices of all `size`-element subsets of `0..len`, in lexicographic order.
pub(crate) fn subsets_of_size(len: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..len {
            if len - v < size - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, len, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, size, &mut Vec::new(), &mut out);
    out
}

/// Truncated binomial mixture over indistinguishable subsets of the photons
/// entering `modes`, accumulated into `into` with overall weight `scale`.
fn add_subset_mixture(
    into: &mut OutcomeDistribution,
    u: &CMatrix,
    modes: &[usize],
    x: f64,
    k: usize,
    scale: f64,
) -> Result<()> {
    let len = modes.len();
    let weights = truncated_binomial_weights(len, k, x);
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let subsets = subsets_of_size(len, i);
        let per_subset = scale * w / subsets.len() as f64;
        for subset in subsets {
            let indist: Vec<usize> = subset.iter().map(|&j| modes[j]).collect();
            let dist: Vec<usize> = (0..len).filter(|j| !subset.contains(j)).map(|j| modes[j]).collect();
            for (occ, p) in partially_indistinguishable(u, &indist, &dist)? {
                into.add(occ, per_subset * p);
            }
        }
    }
    Ok(())
}

fn check_photons(u: &Interferometer, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::SizeLimit { what: "photon number", value: n, limit });
    }
    if n > u.modes() {
        return Err(Error::InvalidConfig(format!("{n} photons exceed {} modes", u.modes())));
    }
    Ok(())
}

/// Exact distribution of the state-truncation model: `n` photons in the
/// standard input, indistinguishable subsets of size `i <= k` chosen with
/// renormalised binomial weights. At `k = n` this is the partially
/// distinguishable model with uniform overlap `x`.
pub fn mixture_distribution(u: &Interferometer, n: usize, x: f64, k: TruncationLevel) -> Result<OutcomeDistribution> {
    check_photons(u, n, MIXTURE_PHOTON_LIMIT)?;
    check_unit_interval("x", x)?;
    let k = k.check(n)?.get();
    let modes: Vec<usize> = (0..n).collect();
    let mut dist = OutcomeDistribution::new();
    add_subset_mixture(&mut dist, u.matrix(), &modes, x, k, 1.0)?;
    Ok(dist)
}

/// Exact distribution of the lossy state-truncation model. Photon subsets `L`
/// survive with probability `eta^|L| (1-eta)^(n-|L|)`; inside each, the
/// indistinguishable subset size is binomial in `x`, truncated at `k` and
/// renormalised only when `|L| > k`.
pub fn lossy_mixture_distribution(u: &Interferometer, n: usize, noise: NoiseModel, k: TruncationLevel) -> Result<OutcomeDistribution> {
    check_photons(u, n, LOSSY_PHOTON_LIMIT)?;
    let k = k.check(n)?.get();
    let eta = noise.eta();
    let mut dist = OutcomeDistribution::new();
    for mask in 0u32..(1u32 << n) {
        let survivors: Vec<usize> = (0..n).filter(|&j| (mask >> j) & 1 == 1).collect();
        let l = survivors.len() as i32;
        let weight = eta.powi(l) * (1.0 - eta).powi(n as i32 - l);
        if weight == 0.0 {
            continue;
        }
        add_subset_mixture(&mut dist, u.matrix(), &survivors, noise.x(), k, weight)?;
    }
    Ok(dist)
}

/// Mass of `dist` by detected photon number.
pub fn total_photon_marginal(dist: &OutcomeDistribution) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for (occ, p) in dist.iter() {
        *out.entry(occ.total()).or_insert(0.0) += p;
    }
    out
}
