//! Dense linear algebra for small symmetric problems.
//!
//! Everything here is deterministic and allocation-light: Laplacians, their
//! square roots and pseudo-inverses, and the `d x n` agent matrices that hold
//! one decision vector per agent. The eigensolver is a cyclic Jacobi sweep,
//! which is plenty for the few-hundred-node graphs this crate targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed below zero before a matrix stops counting as PSD.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Jacobi sweeps stop once the off-diagonal mass drops below this fraction
/// of the input's Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: format!("{cols} columns"),
                    found: format!("{} columns in row {i}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{} rows", other.rows),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ A` as a symmetric matrix.
    pub fn gram(&self) -> SymMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                if row[i] == 0.0 {
                    continue;
                }
                for j in i..n {
                    g[i * n + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        SymMatrix { n, data: g }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest singular value, via the spectrum of `AᵀA`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let spectrum = eig_sym(&self.gram())?;
        Ok(spectrum.max().max(0.0).sqrt())
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Dense symmetric matrix. Symmetry is exact: `get(i, j) == get(j, i)` bitwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// Builds from full rows, rejecting anything that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        let dense = DenseMatrix::from_rows(rows)?;
        if dense.cols != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{n}x{}", dense.cols),
            });
        }
        Self::try_from(dense)
    }

    /// Builds from the upper triangle of `f` (`i <= j`), mirrored below.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match dimension");
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn matmul(&self, other: &SymMatrix) -> DenseMatrix {
        self.to_dense()
            .matmul(&other.to_dense())
            .expect("square matrices of equal size")
    }

    /// `self + s I`.
    pub fn shift_diagonal(&self, s: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += s;
        }
        out
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }
}

impl TryFrom<DenseMatrix> for SymMatrix {
    type Error = Error;

    fn try_from(m: DenseMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::ShapeMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", m.rows, m.cols),
            });
        }
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m.get(i, j).to_bits() != m.get(j, i).to_bits() {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix {
            n: m.rows,
            data: m.data,
        })
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `Q diag(f(λ)) Qᵀ`, symmetrized exactly.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        SymMatrix::from_upper(n, |i, j| {
            let mut acc = 0.0;
            for (k, m) in mapped.iter().enumerate() {
                acc += self.vectors.get(i, k) * m * self.vectors.get(j, k);
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|v| v)
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in ascending order; ties keep the order in which the
/// rotation sweep produced them, so identical inputs give identical output.
pub fn eig_sym(m: &SymMatrix) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = m.frobenius_norm();
    let target = JACOBI_TOLERANCE * scale;

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties stay in construction order
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok(Spectrum { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues down to `-PSD_TOLERANCE * ‖M‖_F` are clamped to zero; anything
/// more negative is rejected. Eigenvalues up to `JACOBI_TOLERANCE * ‖M‖_F`
/// count as zero.
pub fn sqrt_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let spectrum = eig_sym(m)?;
    let scale = m.frobenius_norm();
    check_psd(&spectrum, scale)?;
    // a rounding-level eigenvalue of 1e-16 would otherwise become 1e-8
    let floor = JACOBI_TOLERANCE * scale;
    Ok(spectrum.map(|v| if v > floor { v.sqrt() } else { 0.0 }))
}

pub(crate) fn check_psd(spectrum: &Spectrum, scale: f64) -> Result<()> {
    let min = spectrum.min();
    if min < -PSD_TOLERANCE * scale {
        return Err(Error::NotPsd { eigenvalue: min });
    }
    Ok(())
}

/// Cholesky factorization `P = G Gᵀ` of a symmetric positive definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &SymMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = m.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = m.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length must match dimension");
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s = y[i] - row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum::<f64>();
            y[i] = s / self.lower[i * n + i];
        }
        for i in (0..n).rev() {
            let tail: f64 = ((i + 1)..n).map(|k| self.lower[k * n + i] * y[k]).sum();
            y[i] = (y[i] - tail) / self.lower[i * n + i];
        }
        y
    }
}

/// One `d`-vector per agent: a `d x n` matrix stored column by column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentMatrix {
    d: usize,
    n: usize,
    data: Vec<f64>,
}

impl AgentMatrix {
    pub fn zeros(d: usize, n: usize) -> Self {
        AgentMatrix {
            d,
            n,
            data: vec![0.0; d * n],
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(d * columns.len());
        for (i, c) in columns.iter().enumerate() {
            if c.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: format!("columns of length {d}"),
                    found: format!("column {i} of length {}", c.len()),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(AgentMatrix {
            d,
            n: columns.len(),
            data,
        })
    }

    /// Every column equal to `v`.
    pub fn broadcast(v: &[f64], n: usize) -> Self {
        let mut data = Vec::with_capacity(v.len() * n);
        for _ in 0..n {
            data.extend_from_slice(v);
        }
        AgentMatrix { d: v.len(), n, data }
    }

    pub fn from_fn(d: usize, n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(d * n);
        for j in 0..n {
            for r in 0..d {
                data.push(f(r, j));
            }
        }
        AgentMatrix { d, n, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, agent: usize) -> f64 {
        self.data[agent * self.d + row]
    }

    pub fn col(&self, agent: usize) -> &[f64] {
        &self.data[agent * self.d..(agent + 1) * self.d]
    }

    pub fn col_mut(&mut self, agent: usize) -> &mut [f64] {
        &mut self.data[agent * self.d..(agent + 1) * self.d]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.d.max(1)).take(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &AgentMatrix) -> bool {
        self.d == other.d && self.n == other.n
    }

    fn check_shape(&self, other: &AgentMatrix) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.d, self.n),
                found: format!("{}x{}", other.d, other.n),
            })
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &AgentMatrix) -> AgentMatrix {
        assert!(self.same_shape(other), "agent matrices must share a shape");
        AgentMatrix {
            d: self.d,
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &AgentMatrix) -> AgentMatrix {
        assert!(self.same_shape(other), "agent matrices must share a shape");
        AgentMatrix {
            d: self.d,
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> AgentMatrix {
        AgentMatrix {
            d: self.d,
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &AgentMatrix, b: f64) -> AgentMatrix {
        assert!(self.same_shape(other), "agent matrices must share a shape");
        AgentMatrix {
            d: self.d,
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Right multiplication `X A` by an `n x n` symmetric matrix.
    pub fn mul_sym(&self, a: &SymMatrix) -> AgentMatrix {
        assert_eq!(a.dim(), self.n, "right factor must be n x n");
        let mut out = AgentMatrix::zeros(self.d, self.n);
        for j in 0..self.n {
            for i in 0..self.n {
                let w = a.get(i, j);
                if w == 0.0 {
                    continue;
                }
                let src = self.col(i);
                let dst = &mut out.data[j * self.d..(j + 1) * self.d];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
        out
    }

    /// Sum of each row across agents: `X 1`.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.d];
        for c in self.columns() {
            for (acc, v) in s.iter_mut().zip(c) {
                *acc += v;
            }
        }
        s
    }

    /// Average column: `X 1 / n`.
    pub fn column_mean(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.row_sums().into_iter().map(|v| v / n).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.d, self.n, |r, c| self.get(r, c))
    }
}

/// Removes the consensus component: subtracts each row's mean so `X 1 = 0`.
pub fn project_consensus_orth(x: &AgentMatrix) -> AgentMatrix {
    let mean = x.column_mean();
    let mut out = x.clone();
    for j in 0..x.n {
        for (v, m) in out.col_mut(j).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    out
}

/// Frobenius inner product `Σ_ij X_ij Y_ij`.
pub fn frobenius(x: &AgentMatrix, y: &AgentMatrix) -> Result<f64> {
    x.check_shape(y)?;
    Ok(dot(&x.data, &y.data))
}

/// Operator (largest singular value) norm of an agent matrix.
pub fn operator_norm(x: &AgentMatrix) -> Result<f64> {
    x.to_dense().transpose().spectral_norm()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> SymMatrix {
        SymMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn diagonal_spectrum() {
        let m = SymMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = eig_sym(&m).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0]);
    }

    #[test]
    fn two_path_spectrum() {
        let m = SymMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let s = eig_sym(&m).unwrap();
        assert_close(s.values[0], 0.0, 1e-14);
        assert_close(s.values[1], 2.0, 1e-14);
    }

    #[test]
    fn three_path_spectrum() {
        let s = eig_sym(&path3()).unwrap();
        for (got, want) in s.values.iter().zip([0.0, 1.0, 3.0]) {
            assert_close(*got, want, 1e-13);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let m = SymMatrix::from_upper(2, |i, j| if i == j { f64::NAN } else { 0.0 });
        assert!(matches!(eig_sym(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { row: 0, col: 1 }));
    }

    #[test]
    fn sqrt_of_identity_and_zero() {
        let i3 = SymMatrix::identity(3);
        assert_eq!(sqrt_psd(&i3).unwrap(), i3);
        let z = SymMatrix::zeros(3);
        assert_eq!(sqrt_psd(&z).unwrap(), z);
    }

    #[test]
    fn sqrt_of_two_path_laplacian() {
        let m = SymMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let r = sqrt_psd(&m).unwrap();
        let h = std::f64::consts::SQRT_2 / 2.0;
        assert_close(r.get(0, 0), h, 1e-14);
        assert_close(r.get(0, 1), -h, 1e-14);
        assert_close(r.get(1, 1), h, 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative_definite() {
        let m = SymMatrix::diagonal(&[1.0, -0.5]);
        assert!(matches!(sqrt_psd(&m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sqrt_clamps_rounding_negatives() {
        let m = SymMatrix::diagonal(&[1.0, -1e-13]);
        let r = sqrt_psd(&m).unwrap();
        assert_eq!(r.get(1, 1), 0.0);
    }

    #[test]
    fn projection_examples() {
        let all_equal = AgentMatrix::from_columns(&[vec![3.0, -1.0], vec![3.0, -1.0]]).unwrap();
        assert_eq!(project_consensus_orth(&all_equal), AgentMatrix::zeros(2, 2));

        let zero_mean = AgentMatrix::from_columns(&[vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(project_consensus_orth(&zero_mean), zero_mean);

        let x = AgentMatrix::from_columns(&[vec![2.0], vec![0.0]]).unwrap();
        let want = AgentMatrix::from_columns(&[vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(project_consensus_orth(&x), want);
    }

    #[test]
    fn frobenius_examples() {
        let i2 = AgentMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(frobenius(&i2, &i2).unwrap(), 2.0);
        assert_eq!(frobenius(&i2, &AgentMatrix::zeros(2, 2)).unwrap(), 0.0);
        // [[1,2],[3,4]] as rows; columns are (1,3) and (2,4)
        let x = AgentMatrix::from_columns(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(frobenius(&x, &x).unwrap(), 30.0);
        assert!(matches!(
            frobenius(&x, &AgentMatrix::zeros(2, 3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let m = SymMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let c = Cholesky::factor(&m).unwrap();
        let x = c.solve(&[1.0, 2.0]);
        let back = m.mul_vec(&x);
        assert_close(back[0], 1.0, 1e-14);
        assert_close(back[1], 2.0, 1e-14);
        assert!(Cholesky::factor(&SymMatrix::diagonal(&[1.0, 0.0])).is_err());
    }

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        SymMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn reconstruction_up_to_64() {
        for (k, n) in [1usize, 2, 5, 17, 40, 64].into_iter().enumerate() {
            let m = random_sym(n, 100 + k as u64);
            let s = eig_sym(&m).unwrap();
            let err = s.reconstruct().to_dense().sub(&m.to_dense()).frobenius_norm();
            assert!(err <= 1e-10 * m.frobenius_norm(), "n={n} err={err}");
            let qtq = s.vectors.transpose().matmul(&s.vectors).unwrap();
            let orth = qtq.sub(&DenseMatrix::identity(n)).frobenius_norm();
            assert!(orth <= 1e-10, "n={n} orthogonality error {orth}");
            assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let m = random_sym(12, 5);
        assert_eq!(eig_sym(&m).unwrap(), eig_sym(&m).unwrap());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_orthogonal_to_consensus(
            vals in proptest::collection::vec(-10.0f64..10.0, 12),
            v in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            let x = AgentMatrix::from_fn(3, 4, |r, c| vals[c * 3 + r]);
            let p = project_consensus_orth(&x);
            let pp = project_consensus_orth(&p);
            prop_assert!(pp.sub(&p).max_abs() <= 1e-12);
            let consensus = AgentMatrix::broadcast(&v, 4);
            prop_assert!(frobenius(&p, &consensus).unwrap().abs() <= 1e-10);
        }

        #[test]
        fn frobenius_dual_norm_certificate(vals in proptest::collection::vec(-10.0f64..10.0, 6)) {
            let y = AgentMatrix::from_fn(2, 3, |r, c| vals[c * 2 + r]);
            let norm = y.frobenius_norm();
            prop_assume!(norm > 1e-6);
            let x = y.scale(1.0 / norm);
            prop_assert!((x.frobenius_norm() - 1.0).abs() <= 1e-12);
            prop_assert!((frobenius(&x, &y).unwrap() - norm).abs() <= 1e-10 * (1.0 + norm));
        }

        #[test]
        fn operator_norm_bounds_products(
            xs in proptest::collection::vec(-3.0f64..3.0, 8),
            a in proptest::collection::vec(-3.0f64..3.0, 16),
        ) {
            // X is 2x4, A is a symmetric 4x4
            let x = AgentMatrix::from_fn(2, 4, |r, c| xs[c * 2 + r]);
            let a = SymMatrix::from_upper(4, |i, j| a[i * 4 + j]);
            let xa = x.mul_sym(&a);
            let op = a.to_dense().spectral_norm().unwrap();
            prop_assert!(xa.frobenius_norm() <= op * x.frobenius_norm() * (1.0 + 1e-12) + 1e-12);
            let opx = operator_norm(&x).unwrap();
            let ax = x.to_dense().transpose();
            // ‖B X‖_F ≤ ‖X‖_op ‖B‖_F with B = A restricted as 4x4 acting on Xᵀ
            let bx = a.to_dense().matmul(&ax).unwrap();
            prop_assert!(bx.frobenius_norm() <= opx.max(op) * a.frobenius_norm().max(x.frobenius_norm()) * 4.0 + 1e-9);
        }
    }
}
