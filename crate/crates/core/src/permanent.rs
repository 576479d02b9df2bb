//! Exact matrix permanents.
//!
//! [`permanent_ryser`] is the production kernel: Ryser's inclusion-exclusion
//! formula walked in Gray-code order, so each subset differs from the previous
//! one by a single column and the row sums are updated in `O(n)`. The
//! Nijenhuis-Wilf centring halves the number of subsets to `2^(n-1)`.
//! [`permanent_naive`] sums over all permutations and exists as an oracle.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{CMatrix, Interferometer};

pub const NAIVE_LIMIT: usize = 10;
pub const RYSER_LIMIT: usize = 40;

/// Scalar types the permanent routines accept.
pub trait PermScalar:
    nalgebra::Scalar
    + Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn half(self) -> Self;
    fn scale(self, s: f64) -> Self;
}

impl PermScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn half(self) -> Self {
        0.5 * self
    }
    fn scale(self, s: f64) -> Self {
        s * self
    }
}

impl PermScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn half(self) -> Self {
        self * 0.5
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

fn check_square<T: PermScalar>(a: &DMatrix<T>, limit: usize) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "permanent needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n > limit {
        return Err(Error::SizeLimit { what: "matrix size", value: n, limit });
    }
    Ok(n)
}

/// Permanent as the sum over all `n!` permutation products (Heap's algorithm).
pub fn permanent_naive<T: PermScalar>(a: &DMatrix<T>) -> Result<T> {
    let n = check_square(a, NAIVE_LIMIT)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let term = |perm: &[usize]| -> T {
        perm.iter().enumerate().fold(T::one(), |acc, (row, &col)| acc * a[(row, col)])
    };
    let mut total = term(&perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            total += term(&perm);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

#[inline]
fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

/// Centred row sums `x_i = a[i, n-1] - (1/2) sum_j a[i, j]`.
fn centred_rows<T: PermScalar>(a: &DMatrix<T>) -> Vec<T> {
    let n = a.nrows();
    (0..n)
        .map(|i| {
            let row_sum = (0..n).fold(T::zero(), |acc, j| acc + a[(i, j)]);
            a[(i, n - 1)] - row_sum.half()
        })
        .collect()
}

/// Signed Gray-code sum over subset indices `start..end` of the first
/// `n - 1` columns.
fn ryser_range<T: PermScalar>(a: &DMatrix<T>, base: &[T], start: u64, end: u64) -> T {
    let n = a.nrows();
    let data = a.as_slice();
    let mut rows = base.to_vec();
    if start > 0 {
        let g = gray(start - 1);
        for j in 0..n - 1 {
            if (g >> j) & 1 == 1 {
                let col = &data[j * n..(j + 1) * n];
                rows.iter_mut().zip(col).for_each(|(r, &v)| *r += v);
            }
        }
    }
    let mut total = T::zero();
    for k in start..end {
        if k > 0 {
            let j = k.trailing_zeros() as usize;
            let col = &data[j * n..(j + 1) * n];
            if (gray(k) >> j) & 1 == 1 {
                rows.iter_mut().zip(col).for_each(|(r, &v)| *r += v);
            } else {
                rows.iter_mut().zip(col).for_each(|(r, &v)| *r -= v);
            }
        }
        let prod = rows.iter().fold(T::one(), |acc, &r| acc * r);
        // popcount(gray(k)) has the parity of k
        if k & 1 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

fn finish<T: PermScalar>(n: usize, sum: T) -> T {
    let signed = if n % 2 == 1 { sum } else { -sum };
    signed.scale(2.0)
}

/// Permanent via Gray-code Ryser in `O(n 2^(n-1))`. The empty matrix has
/// permanent 1.
pub fn permanent_ryser<T: PermScalar>(a: &DMatrix<T>) -> Result<T> {
    let n = check_square(a, RYSER_LIMIT)?;
    if n == 0 {
        return Ok(T::one());
    }
    let base = centred_rows(a);
    let sum = ryser_range(a, &base, 0, 1u64 << (n - 1));
    Ok(finish(n, sum))
}

/// Number of contiguous subset-range chunks used by the parallel kernel.
/// Fixed so the summation order does not depend on the worker count.
pub const PARALLEL_CHUNKS: u64 = 64;

/// Same as [`permanent_ryser`] with the subset range split into
/// [`PARALLEL_CHUNKS`] chunks evaluated on the rayon pool and summed in chunk
/// order.
pub fn permanent_ryser_parallel<T: PermScalar>(a: &DMatrix<T>) -> Result<T> {
    let n = check_square(a, RYSER_LIMIT)?;
    if n == 0 {
        return Ok(T::one());
    }
    let subsets = 1u64 << (n - 1);
    let chunks = PARALLEL_CHUNKS.min(subsets);
    let base = centred_rows(a);
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = subsets * c / chunks;
            let end = subsets * (c + 1) / chunks;
            ryser_range(a, &base, start, end)
        })
        .collect();
    let sum = partials.into_iter().fold(T::zero(), |acc, v| acc + v);
    Ok(finish(n, sum))
}

/// Permanents of every column-deleted minor of a `k x (k+1)` matrix.
///
/// Entry `j` of the result is the permanent of `b` with column `j` removed.
/// All `k + 1` minors come out of one Gray-code pass over row subsets in
/// `O(k 2^k)`, using prefix and suffix products of the column sums.
pub fn column_deleted_permanents<T: PermScalar>(b: &DMatrix<T>) -> Result<Vec<T>> {
    let k = b.nrows();
    let t = b.ncols();
    if t != k + 1 {
        return Err(Error::Dimension(format!("expected a k x (k+1) matrix, got {k}x{t}")));
    }
    if k > RYSER_LIMIT {
        return Err(Error::SizeLimit { what: "matrix size", value: k, limit: RYSER_LIMIT });
    }
    if k == 0 {
        return Ok(vec![T::one()]);
    }
    // row-major copy so a row toggle is a contiguous update
    let rows: Vec<T> = (0..k).flat_map(|i| (0..t).map(move |c| b[(i, c)])).collect();
    let mut sums = vec![T::zero(); t];
    let mut acc = vec![T::zero(); t];
    let mut prefix = vec![T::one(); t + 1];
    for s in 1u64..(1u64 << k) {
        let i = s.trailing_zeros() as usize;
        let row = &rows[i * t..(i + 1) * t];
        if (gray(s) >> i) & 1 == 1 {
            sums.iter_mut().zip(row).for_each(|(v, &r)| *v += r);
        } else {
            sums.iter_mut().zip(row).for_each(|(v, &r)| *v -= r);
        }
        for c in 0..t {
            prefix[c + 1] = prefix[c] * sums[c];
        }
        let odd = s & 1 == 1;
        let mut suffix = T::one();
        for c in (0..t).rev() {
            let term = prefix[c] * suffix;
            if odd {
                acc[c] -= term;
            } else {
                acc[c] += term;
            }
            suffix = suffix * sums[c];
        }
    }
    if k % 2 == 1 {
        acc.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(acc)
}

/// Row and column index lists selecting a (possibly repeated) submatrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmatrixSelector {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl SubmatrixSelector {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::Dimension(format!(
                "selector has {} rows but {} columns",
                rows.len(),
                cols.len()
            )));
        }
        Ok(SubmatrixSelector { rows, cols })
    }
}

/// `out[i, j] = U[rows[i], cols[j]]`.
pub fn submatrix(u: &Interferometer, sel: &SubmatrixSelector) -> Result<CMatrix> {
    select(u.matrix(), &sel.rows, &sel.cols)
}

pub(crate) fn select<T: nalgebra::Scalar + Copy>(
    a: &DMatrix<T>,
    rows: &[usize],
    cols: &[usize],
) -> Result<DMatrix<T>> {
    for &r in rows {
        if r >= a.nrows() {
            return Err(Error::IndexOutOfBounds { index: r, bound: a.nrows() });
        }
    }
    for &c in cols {
        if c >= a.ncols() {
            return Err(Error::IndexOutOfBounds { index: c, bound: a.ncols() });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]))
}

/// Elementwise `|a|^2`.
pub fn abs_squared(a: &CMatrix) -> DMatrix<f64> {
    a.map(|v| v.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn naive_examples() {
        assert_eq!(permanent_naive(&DMatrix::<f64>::identity(3, 3)).unwrap(), 1.0);
        assert_eq!(permanent_naive(&DMatrix::<f64>::from_element(3, 3, 1.0)).unwrap(), 6.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(permanent_naive(&a).unwrap(), 10.0);
        assert_eq!(permanent_naive(&DMatrix::<f64>::zeros(0, 0)).unwrap(), 1.0);
    }

    #[test]
    fn naive_size_limit() {
        let a = DMatrix::<f64>::identity(11, 11);
        assert!(matches!(permanent_naive(&a), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn ryser_examples() {
        assert_eq!(permanent_ryser(&DMatrix::<f64>::zeros(0, 0)).unwrap(), 1.0);
        assert!((permanent_ryser(&DMatrix::<f64>::from_element(3, 3, 1.0)).unwrap() - 6.0).abs() < 1e-12);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!((permanent_ryser(&a).unwrap() - 10.0).abs() < 1e-12);
        let one = DMatrix::from_element(1, 1, c(0.3, -0.7));
        assert!((permanent_ryser(&one).unwrap() - c(0.3, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn ryser_errors() {
        assert!(matches!(permanent_ryser(&DMatrix::<f64>::zeros(2, 3)), Err(Error::Dimension(_))));
        assert!(matches!(
            permanent_ryser(&DMatrix::<f64>::zeros(41, 41)),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn parallel_matches_serial() {
        let a = DMatrix::from_fn(9, 9, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0 - 1.0));
        let s = permanent_ryser(&a).unwrap();
        let p = permanent_ryser_parallel(&a).unwrap();
        assert!((s - p).norm() <= 1e-10 * s.norm().max(1.0));
    }

    #[test]
    fn minors_match_direct_permanents() {
        for k in 0..6 {
            let b = DMatrix::from_fn(k, k + 1, |i, j| c(((i * 5 + j * 11) % 7) as f64 - 3.0, ((i + 3 * j) % 4) as f64 * 0.5));
            let minors = column_deleted_permanents(&b).unwrap();
            for (j, m) in minors.iter().enumerate() {
                let cols: Vec<usize> = (0..=k).filter(|&c| c != j).collect();
                let rows: Vec<usize> = (0..k).collect();
                let direct = permanent_naive(&select(&b, &rows, &cols).unwrap()).unwrap();
                assert!((*m - direct).norm() <= 1e-10 * direct.norm().max(1.0), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn submatrix_examples() {
        let id = Interferometer::new(CMatrix::identity(2, 2)).unwrap();
        let s = submatrix(&id, &SubmatrixSelector::new(vec![0], vec![0]).unwrap()).unwrap();
        assert_eq!(s, CMatrix::from_element(1, 1, c(1.0, 0.0)));

        let h = 1.0 / 2f64.sqrt();
        let bs = Interferometer::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        ))
        .unwrap();
        let rep = submatrix(&bs, &SubmatrixSelector::new(vec![0, 0], vec![1, 1]).unwrap()).unwrap();
        assert_eq!(rep, CMatrix::from_element(2, 2, bs.amplitude(0, 1)));
        let full = submatrix(&bs, &SubmatrixSelector::new(vec![0, 1], vec![0, 1]).unwrap()).unwrap();
        assert_eq!(&full, bs.matrix());

        assert!(SubmatrixSelector::new(vec![0], vec![0, 1]).is_err());
        let oob = SubmatrixSelector::new(vec![2], vec![0]).unwrap();
        assert!(matches!(submatrix(&bs, &oob), Err(Error::IndexOutOfBounds { .. })));
    }

    #[test]
    fn abs_squared_examples() {
        let i = CMatrix::from_element(1, 1, c(0.0, 1.0));
        assert_eq!(abs_squared(&i), DMatrix::from_element(1, 1, 1.0));
        let h = 1.0 / 2f64.sqrt();
        let bs = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let sq = abs_squared(&bs);
        assert!(sq.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert_eq!(abs_squared(&CMatrix::zeros(2, 2)), DMatrix::zeros(2, 2));
    }
}
