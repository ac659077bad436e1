//! Dense complex linear algebra: general and Hermitian matrices, a pivoted
//! linear solver, and the Hermitian eigendecomposition used for PSD-cone
//! projection.

mod eig;

pub use eig::{
    hermitian_eig, hermitian_eig_with, principal_component, project_psd, EigDecomposition,
    EigOptions,
};
pub(crate) use eig::project_psd_counted;

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = Vec<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for k in 0..cols {
                data.push(f(i, k));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[CVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, k: usize) -> CVector {
        (0..self.rows).map(|i| self[(i, k)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, k| self[(k, i)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                let src = rhs.row(j);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> CVector {
        assert_eq!(self.cols, x.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// `‖A^H A − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .sub(&Self::identity(self.cols))
            .frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, k): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, k): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + k]
    }
}

/// Complex Hermitian matrix. Symmetry is enforced on construction, and the
/// arithmetic below preserves it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut inner = ComplexMatrix::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            inner[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { inner }
    }

    /// Builds `(A + A^H) / 2` from an arbitrary square matrix.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix is not square",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut inner = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            inner[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for k in i + 1..n {
                let v = (m[(i, k)] + m[(k, i)].conj()) * 0.5;
                inner[(i, k)] = v;
                inner[(k, i)] = v.conj();
            }
        }
        if let Some(pos) = inner.data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        Ok(Self { inner })
    }

    /// Fills the upper triangle from `f` and mirrors it.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut inner = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            inner[(i, i)] = Complex64::new(f(i, i).re, 0.0);
            for k in i + 1..dim {
                let v = f(i, k);
                inner[(i, k)] = v;
                inner[(k, i)] = v.conj();
            }
        }
        Self { inner }
    }

    /// `h h^H`.
    pub fn outer(h: &[Complex64]) -> Self {
        Self::from_upper_fn(h.len(), |i, k| h[i] * h[k].conj())
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.inner.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// Real trace pairing `Re tr(A^H B)`.
    pub fn inner_product(&self, other: &Self) -> f64 {
        self.inner
            .data
            .iter()
            .zip(&other.inner.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.add(&rhs.inner),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.sub(&rhs.inner),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: ComplexMatrix {
                rows: self.inner.rows,
                cols: self.inner.cols,
                data: self.inner.data.iter().map(|a| a * s).collect(),
            },
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        Self {
            inner: ComplexMatrix {
                rows: self.inner.rows,
                cols: self.inner.cols,
                data: self
                    .inner
                    .data
                    .iter()
                    .zip(&other.inner.data)
                    .map(|(a, b)| a + b * s)
                    .collect(),
            },
        }
    }

    /// `x^H M x`, returned as a complex number; its imaginary part is
    /// rounding noise for Hermitian `M`.
    pub fn quad_form(&self, x: &[Complex64]) -> Complex64 {
        let n = self.dim();
        debug_assert_eq!(n, x.len());
        let mut acc = ZERO;
        for i in 0..n {
            let row = self.inner.row(i);
            let mut rx = ZERO;
            for (a, b) in row.iter().zip(x) {
                rx += a * b;
            }
            acc += x[i].conj() * rx;
        }
        acc
    }

    pub fn entry(&self, i: usize, k: usize) -> Complex64 {
        self.inner[(i, k)]
    }

    /// `‖A − A^H‖_F`; zero for every value of this type.
    pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
        m.sub(&m.adjoint()).frobenius_norm()
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// `x^H y`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `min_φ ‖h − e^{iφ} est‖ / ‖h‖`.
///
/// The minimizing phase is `arg(est^H h)`, which leaves
/// `‖h‖² + ‖est‖² − 2|est^H h|` under the root.
pub fn aligned_error(h: &[Complex64], est: &[Complex64]) -> f64 {
    let hn = norm(h);
    let en = norm(est);
    let cross = dot(est, h).norm();
    let sq = (hn * hn + en * en - 2.0 * cross).max(0.0);
    if hn == 0.0 {
        return sq.sqrt();
    }
    sq.sqrt() / hn
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &ComplexMatrix, b: &[Complex64]) -> Result<CVector> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "{}x{} system with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let n = b.len();
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = (n.max(1) as f64) * f64::EPSILON * scale;
    let mut m = a.clone();
    let mut x: CVector = b.to_vec();

    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= tol || pmag == 0.0 {
            return Err(Error::Singular { col, pivot: pmag });
        }
        if piv != col {
            for k in 0..n {
                m.data.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        let inv = m[(col, col)].inv();
        for r in col + 1..n {
            let factor = m[(r, col)] * inv;
            if factor == ZERO {
                continue;
            }
            m[(r, col)] = ZERO;
            for k in col + 1..n {
                let v = m[(col, k)];
                m[(r, k)] -= factor * v;
            }
            let v = x[col];
            x[r] -= factor * v;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for k in i + 1..n {
            acc -= m[(i, k)] * x[k];
        }
        x[i] = acc / m[(i, i)];
    }
    Ok(x)
}
