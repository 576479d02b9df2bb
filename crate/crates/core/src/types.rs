//! Shared domain types: interferometers, Fock vectors, noise parameters and
//! outcome tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Max-norm tolerance on `U^dag U - I` for a matrix to count as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// Complex matrix type used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Max-norm of `U^dag U - I`.
pub fn unitarity_deviation(u: &CMatrix) -> Result<f64> {
    if u.nrows() != u.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let m = u.nrows();
    let gram = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    Ok(worst)
}

/// True iff `u` is square and unitary to within [`UNITARY_TOLERANCE`].
pub fn validate_unitary(u: &CMatrix) -> Result<bool> {
    Ok(unitarity_deviation(u)? <= UNITARY_TOLERANCE)
}

/// An `m`-mode linear optical interferometer.
#[derive(Clone, Debug, PartialEq)]
pub struct Interferometer {
    matrix: CMatrix,
}

impl Interferometer {
    /// Wraps a matrix after checking it is square, non-empty and unitary.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::Dimension("interferometer needs at least one mode".into()));
        }
        let deviation = unitarity_deviation(&matrix)?;
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Interferometer { matrix })
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Amplitude from input mode `input` to output mode `output`.
    #[inline]
    pub fn amplitude(&self, output: usize, input: usize) -> Complex64 {
        self.matrix[(output, input)]
    }
}

/// Photon occupation numbers over `m` modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct FockVector {
    occupations: Vec<usize>,
    total: usize,
}

impl FockVector {
    pub fn new(occupations: Vec<usize>) -> Self {
        let total = occupations.iter().sum();
        FockVector { occupations, total }
    }

    /// Vacuum over `m` modes.
    pub fn vacuum(m: usize) -> Self {
        FockVector::new(vec![0; m])
    }

    /// Builds an occupation vector from a list of occupied modes (with
    /// multiplicity).
    pub fn from_modes(m: usize, modes: &[usize]) -> Result<Self> {
        let mut occupations = vec![0; m];
        for &mode in modes {
            if mode >= m {
                return Err(Error::IndexOutOfBounds { index: mode, bound: m });
            }
            occupations[mode] += 1;
        }
        Ok(FockVector::new(occupations))
    }

    pub fn occupations(&self) -> &[usize] {
        &self.occupations
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn total(&self) -> usize {
        debug_assert_eq!(self.total, self.occupations.iter().sum::<usize>());
        self.total
    }

    pub fn is_collision_free(&self) -> bool {
        self.occupations.iter().all(|&o| o <= 1)
    }

    /// First-quantized mode list: occupied mode indices in ascending order,
    /// each repeated by its occupation.
    pub fn mode_list(&self) -> Vec<usize> {
        let mut list = Vec::with_capacity(self.total);
        for (mode, &count) in self.occupations.iter().enumerate() {
            list.extend(std::iter::repeat_n(mode, count));
        }
        list
    }

    /// `prod_i S_i!`
    pub fn factorial_product(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&o| (1..=o).map(|v| v as f64).product::<f64>())
            .product()
    }
}

impl From<FockVector> for Vec<usize> {
    fn from(v: FockVector) -> Self {
        v.occupations
    }
}

impl TryFrom<Vec<usize>> for FockVector {
    type Error = std::convert::Infallible;

    fn try_from(v: Vec<usize>) -> std::result::Result<Self, Self::Error> {
        Ok(FockVector::new(v))
    }
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, o) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{o}")?;
        }
        write!(f, "]")
    }
}

/// One detected output pattern. Under loss it may hold fewer than `n` photons.
pub type OutputSample = FockVector;

/// The standard input `|1^n 0^(m-n)>`.
pub fn standard_input(n: usize, m: usize) -> Result<FockVector> {
    if n > m {
        return Err(Error::InvalidConfig(format!(
            "cannot place {n} photons collision-free in {m} modes"
        )));
    }
    let mut occupations = vec![0; m];
    occupations[..n].iter_mut().for_each(|o| *o = 1);
    Ok(FockVector::new(occupations))
}

/// Pairwise indistinguishability `x` and per-photon survival probability `eta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    x: f64,
    eta: f64,
}

impl NoiseModel {
    pub fn new(x: f64, eta: f64) -> Result<Self> {
        check_unit_interval("x", x)?;
        check_unit_interval("eta", eta)?;
        Ok(NoiseModel { x, eta })
    }

    /// Fully indistinguishable, lossless photons.
    pub fn ideal() -> Self {
        NoiseModel { x: 1.0, eta: 1.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_lossless(&self) -> bool {
        self.eta == 1.0
    }
}

pub(crate) fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidConfig(format!("{name} = {value} is outside [0, 1]")));
    }
    Ok(())
}

/// Largest number of mutually indistinguishable photons simulated jointly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TruncationLevel(pub usize);

impl TruncationLevel {
    pub fn get(self) -> usize {
        self.0
    }

    /// Checks `k <= n` for an experiment with `n` photons.
    pub fn check(self, n: usize) -> Result<Self> {
        if self.0 > n {
            return Err(Error::InvalidConfig(format!(
                "truncation level {} exceeds photon number {n}",
                self.0
            )));
        }
        Ok(self)
    }
}

/// Tolerance on total probability mass for a complete table.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Probability table keyed by output occupation, ordered lexicographically.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeDistribution {
    entries: BTreeMap<FockVector, f64>,
}

impl OutcomeDistribution {
    pub fn new() -> Self {
        OutcomeDistribution::default()
    }

    /// Adds `p` to the mass of `outcome`.
    pub fn add(&mut self, outcome: FockVector, p: f64) {
        *self.entries.entry(outcome).or_insert(0.0) += p;
    }

    /// Probability of `outcome`; missing outcomes have probability zero.
    pub fn get(&self, outcome: &FockVector) -> f64 {
        self.entries.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockVector, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &FockVector> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Photon counts that carry any entry.
    pub fn support_photons(&self) -> BTreeSet<usize> {
        self.entries.keys().map(FockVector::total).collect()
    }

    /// Checks non-negativity and unit mass.
    pub fn check_normalized(&self) -> Result<()> {
        if let Some((k, p)) = self.iter().find(|(_, p)| *p < -MASS_TOLERANCE) {
            return Err(Error::Numerical(format!("negative probability {p} at {k}")));
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Numerical(format!("total mass {mass} differs from 1")));
        }
        Ok(())
    }

    /// Largest elementwise difference over the union of supports.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        let keys: BTreeSet<&FockVector> = self.keys().chain(other.keys()).collect();
        keys.into_iter()
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }
}

impl FromIterator<(FockVector, f64)> for OutcomeDistribution {
    fn from_iter<I: IntoIterator<Item = (FockVector, f64)>>(iter: I) -> Self {
        let mut dist = OutcomeDistribution::new();
        for (k, p) in iter {
            dist.add(k, p);
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unitary_examples() {
        assert!(validate_unitary(&CMatrix::identity(2, 2)).unwrap());
        assert!(!validate_unitary(&CMatrix::from_element(2, 2, c(1.0, 0.0))).unwrap());
        let h = 1.0 / 2f64.sqrt();
        let bs = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        assert!(validate_unitary(&bs).unwrap());
    }

    #[test]
    fn non_square_is_dimension_error() {
        let err = validate_unitary(&CMatrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn interferometer_rejects_non_unitary() {
        let err = Interferometer::new(CMatrix::from_element(2, 2, c(1.0, 0.0))).unwrap_err();
        assert!(matches!(err, Error::NotUnitary { .. }));
        assert!(Interferometer::new(CMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn standard_input_examples() {
        assert_eq!(standard_input(2, 4).unwrap().occupations(), &[1, 1, 0, 0]);
        assert_eq!(standard_input(0, 3).unwrap().occupations(), &[0, 0, 0]);
        assert_eq!(standard_input(3, 3).unwrap().occupations(), &[1, 1, 1]);
        assert!(matches!(standard_input(4, 3), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn fock_vector_bookkeeping() {
        let v = FockVector::new(vec![2, 0, 1]);
        assert_eq!(v.total(), 3);
        assert!(!v.is_collision_free());
        assert_eq!(v.mode_list(), vec![0, 0, 2]);
        assert_eq!(v.factorial_product(), 2.0);
        assert_eq!(FockVector::from_modes(3, &[2, 0, 0]).unwrap(), v);
        assert!(FockVector::from_modes(3, &[3]).is_err());
        assert_eq!(serde_json::to_string(&v).unwrap(), "[2,0,1]");
        let back: FockVector = serde_json::from_str("[2,0,1]").unwrap();
        assert_eq!(back.total(), 3);
    }

    #[test]
    fn noise_model_ranges() {
        assert!(NoiseModel::new(0.5, 1.0).is_ok());
        assert!(NoiseModel::new(-0.1, 1.0).is_err());
        assert!(NoiseModel::new(0.5, 1.5).is_err());
        assert!(NoiseModel::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn truncation_level_check() {
        assert!(TruncationLevel(3).check(3).is_ok());
        assert!(TruncationLevel(4).check(3).is_err());
    }
}
