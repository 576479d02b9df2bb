//! Interferometer construction and the JSON matrix file format.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{CMatrix, Interferometer};

/// Haar-random `m x m` unitary, deterministic in `seed`.
///
/// Draws a standard complex Gaussian matrix, takes its QR factorisation and
/// rescales each column of `Q` by the phase of the matching diagonal entry of
/// `R`, so that the effective `R` has a real positive diagonal.
pub fn haar_random(m: usize, seed: u64) -> Result<Interferometer> {
    if m == 0 {
        return Err(Error::InvalidConfig("Haar unitary needs m >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let gaussian = CMatrix::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = gaussian.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|v| *v *= phase);
        debug_assert!({
            let fixed = d * phase.conj();
            fixed.im.abs() <= 1e-12 * fixed.re.abs().max(1.0) && fixed.re >= 0.0
        });
    }
    Interferometer::new(q)
}

/// Discrete Fourier transform interferometer, `U[j,k] = exp(2 pi i jk/m)/sqrt(m)`.
pub fn fourier(m: usize) -> Result<Interferometer> {
    if m == 0 {
        return Err(Error::InvalidConfig("Fourier matrix needs m >= 1".into()));
    }
    let norm = 1.0 / (m as f64).sqrt();
    let u = CMatrix::from_fn(m, m, |j, k| {
        let angle = 2.0 * PI * ((j * k) % m) as f64 / m as f64;
        Complex64::from_polar(norm, angle)
    });
    Interferometer::new(u)
}

/// On-disk matrix layout: `{"m": m, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub m: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_interferometer(u: &Interferometer) -> Self {
        let m = u.modes();
        let row = |i: usize, f: fn(&Complex64) -> f64| (0..m).map(|j| f(&u.amplitude(i, j))).collect();
        MatrixFile {
            m,
            re: (0..m).map(|i| row(i, |c| c.re)).collect(),
            im: (0..m).map(|i| row(i, |c| c.im)).collect(),
        }
    }

    pub fn to_interferometer(&self) -> Result<Interferometer> {
        let m = self.m;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == m && rows.iter().all(|r| r.len() == m);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Dimension(format!("matrix file arrays are not {m}x{m}")));
        }
        Interferometer::new(CMatrix::from_fn(m, m, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

pub fn to_json(u: &Interferometer) -> String {
    serde_json::to_string(&MatrixFile::from_interferometer(u)).expect("matrix serialises")
}

pub fn from_json(text: &str) -> Result<Interferometer> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_interferometer()
}

pub fn save_matrix(u: &Interferometer, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(u))?;
    Ok(())
}

/// Loads a matrix file. Malformed JSON gives [`Error::Parse`]; a well-formed
/// but non-unitary matrix gives [`Error::NotUnitary`].
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Interferometer> {
    from_json(&fs::read_to_string(path)?)
}
