//! Hermitian eigendecomposition by Householder reduction to a real
//! tridiagonal matrix followed by implicit-shift QL iteration.

use num_complex::Complex64;

use super::{ComplexMatrix, CVector, HermitianMatrix, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigOptions {
    /// Largest accepted dimension.
    pub max_dim: usize,
    /// Total QL iteration budget is `sweeps_per_dim * dim`.
    pub sweeps_per_dim: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            max_dim: 64,
            sweeps_per_dim: 30,
        }
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors stored as
/// the columns of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j)
    }

    /// `Σ_j f(λ_j) u_j u_j^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let (m, _) = reconstruct(&self.eigenvectors, &weights);
        m
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|l| l)
    }
}

pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigDecomposition> {
    hermitian_eig_with(m, EigOptions::default())
}

pub fn hermitian_eig_with(m: &HermitianMatrix, opts: EigOptions) -> Result<EigDecomposition> {
    let mut flops = 0;
    eig_counted(m, opts, &mut flops)
}

/// `Σ_i max(0, λ_i) u_i u_i^H`: the Frobenius-nearest PSD matrix.
pub fn project_psd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let mut flops = 0;
    project_psd_counted(m, &mut flops)
}

/// `sqrt(λ_max) u_max`, or the zero vector when `λ_max ≤ 0`.
pub fn principal_component(c: &HermitianMatrix) -> Result<CVector> {
    let eig = hermitian_eig(c)?;
    let n = eig.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let top = eig.eigenvalues[n - 1];
    if top <= 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let s = top.sqrt();
    Ok(eig.eigenvector(n - 1).into_iter().map(|z| z * s).collect())
}

pub(crate) fn project_psd_counted(m: &HermitianMatrix, flops: &mut u64) -> Result<HermitianMatrix> {
    let eig = eig_counted(m, EigOptions::default(), flops)?;
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let (p, f) = reconstruct(&eig.eigenvectors, &weights);
    *flops += f;
    Ok(p)
}

fn reconstruct(vecs: &ComplexMatrix, weights: &[f64]) -> (HermitianMatrix, u64) {
    let n = weights.len();
    let active: Vec<usize> = (0..n).filter(|&j| weights[j] != 0.0).collect();
    // scaled copies u_j·w_j, then one conjugated product per upper entry
    let mut flops = (2 * n * active.len()) as u64;
    let out = HermitianMatrix::from_upper_fn(n, |i, k| {
        let mut acc = ZERO;
        for &j in &active {
            acc += vecs[(i, j)] * weights[j] * vecs[(k, j)].conj();
        }
        acc
    });
    flops += (n * (n + 1) / 2 * active.len() * 8) as u64;
    (out, flops)
}

pub(crate) fn eig_counted(
    m: &HermitianMatrix,
    opts: EigOptions,
    flops: &mut u64,
) -> Result<EigDecomposition> {
    let n = m.dim();
    if n > opts.max_dim {
        return Err(Error::EigTooLarge {
            dim: n,
            cap: opts.max_dim,
        });
    }
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    if let Some(pos) = m.as_slice().iter().position(|z| !z.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / n,
            col: pos % n,
        });
    }

    let (mut diag, mut sub, mut vecs) = tridiagonalize(m, flops);
    tql_implicit(&mut diag, &mut sub, &mut vecs, opts.sweeps_per_dim * n, flops)?;

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their original column order
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| diag[j]).collect();
    let mut eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| vecs[(i, order[k])]);
    for k in 0..n {
        if let Some(first) = (0..n).map(|i| eigenvectors[(i, k)]).find(|z| z.norm() > 1e-12) {
            let phase = first.conj() / first.norm();
            for i in 0..n {
                eigenvectors[(i, k)] *= phase;
            }
            // pivot entry becomes exactly real
            let i0 = (0..n).find(|&i| eigenvectors[(i, k)].norm() > 1e-12).unwrap();
            eigenvectors[(i0, k)] = Complex64::new(eigenvectors[(i0, k)].norm(), 0.0);
        }
    }
    *flops += (6 * n * n) as u64;
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Reduces `m` to a real symmetric tridiagonal `T` with `m = V T V^H`.
/// Returns `(diagonal, subdiagonal, V)`.
fn tridiagonalize(m: &HermitianMatrix, flops: &mut u64) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut q = ComplexMatrix::identity(n);

    for j in 0..n.saturating_sub(2) {
        let len = n - j - 1;
        let x: CVector = (j + 1..n).map(|r| a[(r, j)]).collect();
        let tail: f64 = x[1..].iter().map(Complex64::norm_sqr).sum();
        *flops += 3 * len as u64;
        if tail == 0.0 {
            continue;
        }
        let xnorm = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0] == ZERO {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let gamma = -phase * xnorm;
        let mut w = x;
        w[0] -= gamma;
        let wn = super::norm(&w);
        for z in w.iter_mut() {
            *z /= wn;
        }
        *flops += 6 * len as u64;

        // p = A_sub w, K = w^H p, q = p − K w
        let mut p = vec![ZERO; len];
        for (r, pr) in p.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (c, wc) in w.iter().enumerate() {
                acc += a[(j + 1 + r, j + 1 + c)] * wc;
            }
            *pr = acc;
        }
        let kappa = super::dot(&w, &p).re;
        let qv: CVector = p.iter().zip(&w).map(|(pi, wi)| pi - wi * kappa).collect();
        // A_sub ← A_sub − 2 w q^H − 2 q w^H
        for r in 0..len {
            for c in r..len {
                let upd = (w[r] * qv[c].conj() + qv[r] * w[c].conj()) * 2.0;
                let v = a[(j + 1 + r, j + 1 + c)] - upd;
                if r == c {
                    a[(j + 1 + r, j + 1 + c)] = Complex64::new(v.re, 0.0);
                } else {
                    a[(j + 1 + r, j + 1 + c)] = v;
                    a[(j + 1 + c, j + 1 + r)] = v.conj();
                }
            }
        }
        *flops += (8 * len * len + 12 * len + 16 * len * (len + 1) / 2) as u64;

        a[(j + 1, j)] = gamma;
        a[(j, j + 1)] = gamma.conj();
        for r in j + 2..n {
            a[(r, j)] = ZERO;
            a[(j, r)] = ZERO;
        }

        // Q_sub ← Q_sub (I − 2 w w^H)
        for r in 0..n {
            let mut qw = ZERO;
            for (c, wc) in w.iter().enumerate() {
                qw += q[(r, j + 1 + c)] * wc;
            }
            let qw2 = qw * 2.0;
            for (c, wc) in w.iter().enumerate() {
                q[(r, j + 1 + c)] -= qw2 * wc.conj();
            }
        }
        *flops += (16 * n * len) as u64;
    }

    // diagonal unitary similarity making the subdiagonal real and nonnegative
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut sub = vec![0.0; n];
    let mut s = Complex64::new(1.0, 0.0);
    for i in 0..n - 1 {
        let e = a[(i + 1, i)];
        let mag = e.norm();
        sub[i] = mag;
        if mag > 0.0 {
            s *= e / mag;
        }
        for r in 0..n {
            q[(r, i + 1)] *= s;
        }
    }
    *flops += (6 * n * n) as u64;
    (diag, sub, q)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix with diagonal `d`
/// and subdiagonal `e` (`e[i]` couples `i` and `i + 1`), accumulating the
/// rotations into the columns of `z`.
fn tql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    z: &mut ComplexMatrix,
    budget: usize,
    flops: &mut u64,
) -> Result<()> {
    let n = d.len();
    let rows = z.rows();
    let mut used = 0usize;
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            used += 1;
            if used > budget {
                return Err(Error::EigNoConvergence {
                    dim: n,
                    sweeps: budget,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..rows {
                    let zf = z[(k, i + 1)];
                    let zi = z[(k, i)];
                    z[(k, i + 1)] = zi * s + zf * c;
                    z[(k, i)] = zi * c - zf * s;
                }
                *flops += 20 + 12 * rows as u64;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
