//! Brute-force references kept independent of the kernels they check:
//! finite-difference gradients, Gauss-Jordan inversion, the augmented
//! Lagrangian evaluated term by term, and the Gaussian tail.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::objective::{objective, MeasurementSet};

/// Value returned by [`lagrangian_value`] in place of an infinite indicator.
pub const INDICATOR_SENTINEL: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffSpec {
    pub step: f64,
}

impl Default for FiniteDiffSpec {
    fn default() -> Self {
        Self { step: 1e-6 }
    }
}

/// Central differences of the objective over the real parameters
/// `Re C_ii`, `Re C_ik`, `Im C_ik` (`i < k`) of a Hermitian matrix.
///
/// A perturbation of `Re C_ik` moves both `C_ik` and `C_ki`, so its partial
/// derivative is twice the matrix-gradient entry; off-diagonal partials are
/// halved when assembled so the result is comparable with
/// [`crate::objective::gradient`].
pub fn fd_gradient(
    c: &HermitianMatrix,
    meas: &MeasurementSet,
    l: usize,
    spec: FiniteDiffSpec,
) -> Result<HermitianMatrix> {
    if !(spec.step > 0.0) {
        return Err(Error::InvalidParameter("finite-difference step must be positive".into()));
    }
    let n = c.dim();
    let h = spec.step;
    let g = |m: &ComplexMatrix| -> Result<f64> {
        Ok(objective(&HermitianMatrix::from_matrix(m)?, meas, l)?.total)
    };
    let base = c.as_matrix();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let partial = |dir: Complex64| -> Result<f64> {
                let mut plus = base.clone();
                let mut minus = base.clone();
                plus[(i, k)] += dir * h;
                minus[(i, k)] -= dir * h;
                if i != k {
                    plus[(k, i)] += dir.conj() * h;
                    minus[(k, i)] -= dir.conj() * h;
                }
                Ok((g(&plus)? - g(&minus)?) / (2.0 * h))
            };
            if i == k {
                out[(i, i)] = Complex64::new(partial(Complex64::new(1.0, 0.0))?, 0.0);
            } else {
                let re = partial(Complex64::new(1.0, 0.0))?;
                let im = partial(Complex64::new(0.0, 1.0))?;
                let v = Complex64::new(re, im) * 0.5;
                out[(i, k)] = v;
                out[(k, i)] = v.conj();
            }
        }
    }
    HermitianMatrix::from_matrix(&out)
}

/// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
pub fn direct_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension("direct_inverse needs a square matrix".into()));
    }
    let n = a.rows();
    let mut work: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|k| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0)));
            row
        })
        .collect();
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| work[r][col].norm().total_cmp(&work[s][col].norm()))
            .unwrap();
        let pmag = work[piv][col].norm();
        if pmag <= 1e-13 * scale || pmag == 0.0 {
            return Err(Error::Singular { col, pivot: pmag });
        }
        work.swap(piv, col);
        let inv = work[col][col].inv();
        for v in work[col].iter_mut() {
            *v *= inv;
        }
        let pivot_row = work[col].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let factor = row[col];
            if factor.norm() == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
    }
    ComplexMatrix::new(n, n, work.into_iter().flat_map(|r| r.into_iter().skip(n)).collect())
}

/// PSD test by attempting a Cholesky factorization of `m + tol·I`.
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> bool {
    let n = m.dim();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut diag = m[(j, j)].re + tol;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let djj = diag.sqrt();
        l[j * n + j] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = v / djj;
        }
    }
    true
}

/// `g(C) + I(D) + Re tr(E^H (D − C)) + ρ ‖D − C‖_F²`, with the indicator
/// replaced by [`INDICATOR_SENTINEL`] when `D` is not PSD within `1e-8`.
pub fn lagrangian_value(
    c: &HermitianMatrix,
    d: &HermitianMatrix,
    e: &HermitianMatrix,
    meas: &MeasurementSet,
    l: usize,
    rho: f64,
) -> Result<f64> {
    let g = objective(c, meas, l)?.total;
    let indicator = if is_psd(d, 1e-8) { 0.0 } else { INDICATOR_SENTINEL };
    let n = c.dim();
    let mut pairing = 0.0;
    let mut dist = 0.0;
    for i in 0..n {
        for k in 0..n {
            let diff = d[(i, k)] - c[(i, k)];
            pairing += (e[(i, k)].conj() * diff).re;
            dist += diff.norm_sqr();
        }
    }
    Ok(g + indicator + pairing + rho * dist)
}

/// Upper tail `P(Z > x)` of the standard normal.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::objective::gradient;
    use crate::testutil::{random_hermitian, random_matrix, random_measurements, random_psd, rng};

    #[test]
    fn fd_zero_matrix_trace_only() {
        let mut r = rng(1);
        let meas = random_measurements(&mut r, 3, 6, 1, 1e-300);
        let g = fd_gradient(&HermitianMatrix::zeros(3), &meas, 0, FiniteDiffSpec::default()).unwrap();
        assert!(g.sub(&HermitianMatrix::identity(3)).frobenius_norm() < 1e-8);
    }

    #[test]
    fn fd_agrees_with_analytic() {
        let mut r = rng(2);
        for _ in 0..5 {
            let meas = random_measurements(&mut r, 4, 10, 1, 1.0);
            let c = random_hermitian(&mut r, 4).scale(0.3);
            let fd = fd_gradient(&c, &meas, 0, FiniteDiffSpec::default()).unwrap();
            let an = gradient(&c, &meas, 0).unwrap();
            for (a, b) in fd.as_slice().iter().zip(an.as_slice()) {
                assert!((a - b).norm() <= 1e-5 * b.norm().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn fd_gradient_is_affine_in_intensities() {
        // G(d) = I + 2λ Σ (q − d) x x^H, so G(2d − q) − G(d) = −2λ Σ (d − q) x x^H
        // and G(d) + G(2q − d) = 2 G(q).
        let mut r = rng(3);
        let meas = random_measurements(&mut r, 3, 8, 1, 0.5);
        let c = random_psd(&mut r, 3).scale(0.2);
        let q: Vec<f64> = meas.probes().iter().map(|x| c.quad_form(x).re).collect();
        let d = meas.intensities()[0].clone();
        let mirrored: Vec<f64> = q.iter().zip(&d).map(|(qi, di)| 2.0 * qi - di).collect();
        let spec = FiniteDiffSpec::default();
        let g_d = fd_gradient(&c, &meas, 0, spec).unwrap();
        let g_m = fd_gradient(&c, &meas.with_intensities(vec![mirrored]).unwrap(), 0, spec).unwrap();
        let g_q = fd_gradient(&c, &meas.with_intensities(vec![q]).unwrap(), 0, spec).unwrap();
        let lhs = g_d.add(&g_m);
        assert!(lhs.sub(&g_q.scale(2.0)).frobenius_norm() <= 1e-6 * lhs.frobenius_norm());
        assert!(g_q.sub(&HermitianMatrix::identity(3)).frobenius_norm() < 1e-6);
    }

    #[test]
    fn gauss_jordan_inverse() {
        let f = direct_inverse(&ComplexMatrix::identity(4).scale(Complex64::new(2.0, 0.0))).unwrap();
        assert!(f.sub(&ComplexMatrix::identity(4).scale(Complex64::new(0.5, 0.0))).frobenius_norm() < 1e-15);

        let mut r = rng(4);
        let a = random_matrix(&mut r, 16, 16);
        let f = direct_inverse(&a).unwrap();
        assert!(a.mul(&f).sub(&ComplexMatrix::identity(16)).frobenius_norm() <= 1e-9);

        let sing = ComplexMatrix::from_fn(3, 3, |i, _| Complex64::new(i as f64 + 1.0, 0.0));
        assert!(direct_inverse(&sing).is_err());
    }

    #[test]
    fn lagrangian_terms() {
        let mut r = rng(5);
        let meas = random_measurements(&mut r, 3, 6, 1, 1.0);
        let c = random_psd(&mut r, 3);
        let e = random_hermitian(&mut r, 3);
        let g = objective(&c, &meas, 0).unwrap().total;
        assert!((lagrangian_value(&c, &c, &e, &meas, 0, 2.0).unwrap() - g).abs() < 1e-12 * g.abs());

        let d = random_psd(&mut r, 3);
        let a = lagrangian_value(&c, &d, &e, &meas, 0, 1.0).unwrap();
        let b = lagrangian_value(&c, &d, &e, &meas, 0, 2.0).unwrap();
        let quad = d.sub(&c).frobenius_norm().powi(2);
        assert!((b - a - quad).abs() < 1e-9 * a.abs().max(1.0));

        let not_psd = HermitianMatrix::from_diagonal(&[1.0, -1.0, 0.0]);
        assert!(lagrangian_value(&c, &not_psd, &e, &meas, 0, 1.0).unwrap() >= INDICATOR_SENTINEL);
    }

    #[test]
    fn cholesky_psd_test() {
        let mut r = rng(6);
        assert!(is_psd(&random_psd(&mut r, 5), 1e-8));
        assert!(is_psd(&HermitianMatrix::outer(&CVector::from([Complex64::new(1.0, 1.0); 3])), 1e-8));
        assert!(!is_psd(&HermitianMatrix::from_diagonal(&[1.0, -1e-3]), 1e-8));
    }

    /// Continued fraction for the normal tail (x > 0), evaluated backwards.
    fn qfunc_cf(x: f64) -> f64 {
        let mut t = 0.0;
        for k in (1..200).rev() {
            t = k as f64 / (x + t);
        }
        (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() / (x + t)
    }

    /// Maclaurin series of the normal CDF for moderate |x|.
    fn qfunc_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for k in 1..200 {
            term *= x * x / (2 * k + 1) as f64;
            sum += term;
        }
        0.5 - (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * sum
    }

    #[test]
    fn qfunc_values() {
        assert_eq!(qfunc(0.0), 0.5);
        assert!((qfunc(-10.0) - 1.0).abs() < 1e-15);
        assert!((qfunc(3.0) - 1.3499e-3).abs() < 1e-7);
        for x in [3.0, 4.0, 5.0, 6.0, 8.0] {
            let cf = qfunc_cf(x);
            assert!((qfunc(x) - cf).abs() <= 1e-12 * cf, "x={x}");
        }
        for x in [0.25, 0.5, 1.0, 2.0, 3.0] {
            let s = qfunc_series(x);
            assert!((qfunc(x) - s).abs() <= 1e-12 * s, "x={x}");
        }
    }
}
