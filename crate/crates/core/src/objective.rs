//! Intensity measurement model and the lifted objective
//! `g(C) = tr(C) + λ Σ_n (x_n^H C x_n − d_n)²` with its matrix gradient.
//!
//! Rows of the intensity matrix are addressed by 0-based index `l`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::{FlopCounter, Phase, CADD, CMAC, RCMUL};
use crate::linalg::{dot, CVector, HermitianMatrix, ZERO};

/// Known probe vectors, the measured intensities for every unknown row, and
/// the tradeoff constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    dim: usize,
    lambda: f64,
    probes: Vec<CVector>,
    intensities: Vec<Vec<f64>>,
}

impl MeasurementSet {
    pub fn new(
        dim: usize,
        lambda: f64,
        probes: Vec<CVector>,
        intensities: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if let Some(n) = probes.iter().position(|p| p.len() != dim) {
            return Err(Error::Dimension(format!(
                "probe {n} has length {}, expected {dim}",
                probes[n].len()
            )));
        }
        if probes.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::Format("non-finite probe entry".into()));
        }
        let n = probes.len();
        if let Some(l) = intensities.iter().position(|row| row.len() != n) {
            return Err(Error::Dimension(format!(
                "intensity row {l} has {} entries, expected {n}",
                intensities[l].len()
            )));
        }
        if intensities.iter().flatten().any(|d| !d.is_finite()) {
            return Err(Error::Format("non-finite intensity".into()));
        }
        Ok(Self {
            dim,
            lambda,
            probes,
            intensities,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn probes(&self) -> &[CVector] {
        &self.probes
    }

    pub fn intensities(&self) -> &[Vec<f64>] {
        &self.intensities
    }

    pub fn num_probes(&self) -> usize {
        self.probes.len()
    }

    pub fn num_rows(&self) -> usize {
        self.intensities.len()
    }

    pub fn row(&self, l: usize) -> Result<&[f64]> {
        self.intensities
            .get(l)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Dimension(format!("row {l} out of range (L = {})", self.num_rows())))
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.dim, lambda, self.probes.clone(), self.intensities.clone())
    }

    /// Same probes with the given intensity rows.
    pub fn with_intensities(&self, intensities: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.dim, self.lambda, self.probes.clone(), intensities)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeasurementFile::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasurementFile = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("line {} column {}: {e}", e.line(), e.column())))?;
        raw.try_into()
    }
}

/// On-disk layout: probes as `[re, im]` pairs, intensities as `L` rows of `N`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementFile {
    dim: usize,
    lambda: f64,
    probes: Vec<Vec<[f64; 2]>>,
    intensities: Vec<Vec<f64>>,
}

impl From<&MeasurementSet> for MeasurementFile {
    fn from(m: &MeasurementSet) -> Self {
        Self {
            dim: m.dim,
            lambda: m.lambda,
            probes: m
                .probes
                .iter()
                .map(|p| p.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            intensities: m.intensities.clone(),
        }
    }
}

impl TryFrom<MeasurementFile> for MeasurementSet {
    type Error = Error;

    fn try_from(f: MeasurementFile) -> Result<Self> {
        let probes = f
            .probes
            .into_iter()
            .map(|p| p.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        MeasurementSet::new(f.dim, f.lambda, probes, f.intensities)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub total: f64,
    pub trace_term: f64,
    /// `λ Σ_n (x_n^H C x_n − d_n)²`.
    pub residual_term: f64,
}

/// `|h^H x|²`.
pub fn intensity_forward(h: &[Complex64], x: &[Complex64]) -> Result<f64> {
    if h.len() != x.len() {
        return Err(Error::Dimension(format!("lengths {} and {}", h.len(), x.len())));
    }
    Ok(dot(h, x).norm_sqr())
}

fn check_dims(c: &HermitianMatrix, meas: &MeasurementSet, l: usize) -> Result<()> {
    if c.dim() != meas.dim() {
        return Err(Error::Dimension(format!(
            "matrix dim {} vs measurement dim {}",
            c.dim(),
            meas.dim()
        )));
    }
    meas.row(l).map(|_| ())
}

pub fn objective(c: &HermitianMatrix, meas: &MeasurementSet, l: usize) -> Result<ObjectiveValue> {
    check_dims(c, meas, l)?;
    let scale = c.frobenius_norm();
    let q: Vec<f64> = meas
        .probes()
        .iter()
        .map(|x| {
            let v = c.quad_form(x);
            let bound = 1e-10 * (scale * crate::linalg::norm(x).powi(2)).max(1.0);
            assert!(v.im.abs() <= bound, "quadratic form drifted off the real axis: {v}");
            v.re
        })
        .collect();
    Ok(objective_from_forms(c.trace(), &q, meas.row(l)?, meas.lambda()))
}

pub fn gradient(c: &HermitianMatrix, meas: &MeasurementSet, l: usize) -> Result<HermitianMatrix> {
    check_dims(c, meas, l)?;
    let products = ProbeProducts::new(meas, &mut FlopCounter::new());
    let q = quad_forms(c, meas.probes(), &mut FlopCounter::new(), Phase::Gradient);
    Ok(products.gradient(&q, meas.row(l)?, meas.lambda(), &mut FlopCounter::new()))
}

pub(crate) fn objective_from_forms(trace: f64, q: &[f64], d: &[f64], lambda: f64) -> ObjectiveValue {
    let sum: f64 = q.iter().zip(d).map(|(qi, di)| (qi - di) * (qi - di)).sum();
    let residual_term = lambda * sum;
    ObjectiveValue {
        total: trace + residual_term,
        trace_term: trace,
        residual_term,
    }
}

/// Real parts of `x_n^H C x_n` for every probe.
pub(crate) fn quad_forms(
    c: &HermitianMatrix,
    probes: &[CVector],
    flops: &mut FlopCounter,
    phase: Phase,
) -> Vec<f64> {
    let d = c.dim() as u64;
    flops.record(phase, probes.len() as u64 * (d * d + d) * CMAC);
    probes.iter().map(|x| c.quad_form(x).re).collect()
}

/// Upper triangles of `x_n x_n^H`, computed once per measurement set.
#[derive(Debug, Clone)]
pub(crate) struct ProbeProducts {
    dim: usize,
    /// `(i, k)` pairs with `i ≤ k`, row-major over the upper triangle.
    pairs: Vec<(usize, usize)>,
    /// `N × pairs.len()` entries `x_i conj(x_k)`.
    values: Vec<Complex64>,
}

impl ProbeProducts {
    pub(crate) fn new(meas: &MeasurementSet, flops: &mut FlopCounter) -> Self {
        let dim = meas.dim();
        let pairs: Vec<(usize, usize)> =
            (0..dim).flat_map(|i| (i..dim).map(move |k| (i, k))).collect();
        let mut values = Vec::with_capacity(pairs.len() * meas.num_probes());
        for x in meas.probes() {
            values.extend(pairs.iter().map(|&(i, k)| x[i] * x[k].conj()));
        }
        flops.record(
            Phase::Precompute,
            (pairs.len() * meas.num_probes()) as u64 * crate::flops::CMUL,
        );
        Self { dim, pairs, values }
    }

    /// `x_n^H C x_n` for every probe from the stored products:
    /// `Σ_i C_ii |x_i|² + 2 Σ_{i<k} Re(C_ik conj(x_i conj(x_k)))`.
    pub(crate) fn quad_forms(&self, c: &HermitianMatrix, flops: &mut FlopCounter, phase: Phase) -> Vec<f64> {
        debug_assert_eq!(c.dim(), self.dim);
        let np = self.pairs.len();
        let coeffs: Vec<Complex64> = self.pairs.iter().map(|&(i, k)| c[(i, k)]).collect();
        let forms = self
            .values
            .chunks_exact(np)
            .map(|row| {
                let (mut diag, mut off) = (0.0, 0.0);
                for ((&(i, k), a), v) in self.pairs.iter().zip(&coeffs).zip(row) {
                    if i == k {
                        diag += a.re * v.re;
                    } else {
                        off += a.re * v.re + a.im * v.im;
                    }
                }
                diag + 2.0 * off
            })
            .collect::<Vec<_>>();
        let d = self.dim as u64;
        let off_pairs = np as u64 - d;
        flops.record(phase, forms.len() as u64 * (2 * d + 4 * off_pairs + 2));
        forms
    }

    /// `scale · Σ_n w_n x_n x_n^H`.
    pub(crate) fn weighted_sum(&self, weights: &[f64], scale: f64) -> HermitianMatrix {
        let np = self.pairs.len();
        let mut acc = vec![ZERO; np];
        for (n, w) in weights.iter().enumerate() {
            let row = &self.values[n * np..(n + 1) * np];
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v * *w;
            }
        }
        let mut m = HermitianMatrix::zeros(self.dim).into_matrix();
        for (&(i, k), a) in self.pairs.iter().zip(&acc) {
            m[(i, k)] = a * scale;
            m[(k, i)] = (a * scale).conj();
        }
        HermitianMatrix::from_matrix(&m).expect("finite weighted sum")
    }

    /// `I + 2λ Σ_n (q_n − d_n) x_n x_n^H`.
    ///
    /// Diagonal entries are the partial derivatives with respect to
    /// `Re C_ii`; an off-diagonal entry `(i, k)` carries the derivatives with
    /// respect to `Re C_ik` and `Im C_ik` as its real and imaginary parts.
    pub(crate) fn gradient(
        &self,
        q: &[f64],
        d: &[f64],
        lambda: f64,
        flops: &mut FlopCounter,
    ) -> HermitianMatrix {
        let np = self.pairs.len();
        let mut acc = vec![ZERO; np];
        for (n, (qn, dn)) in q.iter().zip(d).enumerate() {
            let r = qn - dn;
            let row = &self.values[n * np..(n + 1) * np];
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v * r;
            }
        }
        flops.record(
            Phase::Gradient,
            q.len() as u64 * (1 + np as u64 * (RCMUL + CADD)) + np as u64 * (RCMUL + 1),
        );
        let two_lambda = 2.0 * lambda;
        let mut g = HermitianMatrix::zeros(self.dim).into_matrix();
        for (&(i, k), a) in self.pairs.iter().zip(&acc) {
            let v = a * two_lambda;
            if i == k {
                g[(i, i)] = Complex64::new(1.0 + v.re, 0.0);
            } else {
                g[(i, k)] = v;
                g[(k, i)] = v.conj();
            }
        }
        HermitianMatrix::from_matrix(&g).expect("finite gradient")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_hermitian, random_measurements, random_vector, rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn intensity_examples() {
        let e1 = vec![c(1.0, 0.0), ZERO];
        let e2 = vec![ZERO, c(1.0, 0.0)];
        assert_eq!(intensity_forward(&e1, &e1).unwrap(), 1.0);
        assert_eq!(intensity_forward(&e1, &e2).unwrap(), 0.0);
        let h = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let x = vec![c(1.0, 0.0), c(1.0, 0.0)];
        assert!((intensity_forward(&h, &x).unwrap() - 2.0).abs() < 1e-15);
        assert!(intensity_forward(&h, &e1[..1]).is_err());
    }

    #[test]
    fn exact_fit_leaves_trace_only() {
        let mut r = rng(1);
        let h = random_vector(&mut r, 4);
        let probes: Vec<CVector> = (0..12).map(|_| random_vector(&mut r, 4)).collect();
        let d: Vec<f64> = probes.iter().map(|x| intensity_forward(&h, x).unwrap()).collect();
        let meas = MeasurementSet::new(4, 10.0, probes, vec![d]).unwrap();
        let ch = HermitianMatrix::outer(&h);
        let v = objective(&ch, &meas, 0).unwrap();
        assert!(v.residual_term < 1e-20 * 12.0 + 1e-18);
        assert!((v.total - crate::linalg::norm(&h).powi(2)).abs() < 1e-12);

        // the data sum vanishes, so only the trace derivative survives
        let g = gradient(&ch, &meas, 0).unwrap();
        assert!(g.sub(&HermitianMatrix::identity(4)).frobenius_norm() < 1e-9);
    }

    #[test]
    fn zero_matrix_zero_data() {
        let mut r = rng(2);
        let probes: Vec<CVector> = (0..5).map(|_| random_vector(&mut r, 3)).collect();
        let meas = MeasurementSet::new(3, 1.0, probes, vec![vec![0.0; 5]]).unwrap();
        assert_eq!(objective(&HermitianMatrix::zeros(3), &meas, 0).unwrap().total, 0.0);
    }

    #[test]
    fn matches_naive_evaluation() {
        let mut r = rng(3);
        let meas = random_measurements(&mut r, 3, 5, 2, 0.7);
        let cm = random_hermitian(&mut r, 3);
        for l in 0..2 {
            // naive: explicit double sum with conj(x_i) C_ik x_k
            let mut naive = (0..3).map(|i| cm[(i, i)].re).sum::<f64>();
            for (n, x) in meas.probes().iter().enumerate() {
                let mut q = ZERO;
                for i in 0..3 {
                    for k in 0..3 {
                        q += x[i].conj() * cm[(i, k)] * x[k];
                    }
                }
                naive += 0.7 * (q.re - meas.intensities()[l][n]).powi(2);
            }
            let v = objective(&cm, &meas, l).unwrap();
            assert!((v.total - naive).abs() <= 1e-12 * naive.abs().max(1.0));
            assert!((v.total - v.trace_term - v.residual_term).abs() <= 1e-12 * v.total.abs().max(1.0));
        }
    }

    #[test]
    fn product_forms_match_direct_quadratic_forms() {
        let mut r = rng(77);
        for dim in 1..=6 {
            let meas = random_measurements(&mut r, dim, 25, 1, 1.0);
            let products = ProbeProducts::new(&meas, &mut FlopCounter::new());
            let m = random_hermitian(&mut r, dim);
            let fast = products.quad_forms(&m, &mut FlopCounter::new(), Phase::Gradient);
            for (x, f) in meas.probes().iter().zip(&fast) {
                let direct = m.quad_form(x);
                assert!((direct.re - f).abs() <= 1e-12 * (1.0 + direct.norm()), "{dim}");
                assert!(direct.im.abs() <= 1e-12 * (1.0 + direct.norm()));
            }
        }
    }

    #[test]
    fn zero_lambda_limit_gradient_is_identity() {
        let mut r = rng(4);
        let meas = random_measurements(&mut r, 4, 10, 1, 1e-300);
        let g = gradient(&random_hermitian(&mut r, 4), &meas, 0).unwrap();
        assert!(g.sub(&HermitianMatrix::identity(4)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let mut r = rng(5);
        let probes: Vec<CVector> = (0..3).map(|_| random_vector(&mut r, 2)).collect();
        assert!(MeasurementSet::new(2, 0.0, probes.clone(), vec![vec![0.0; 3]]).is_err());
        assert!(MeasurementSet::new(2, 1.0, probes.clone(), vec![vec![0.0; 2]]).is_err());
        assert!(MeasurementSet::new(3, 1.0, probes.clone(), vec![vec![0.0; 3]]).is_err());
        let meas = MeasurementSet::new(2, 1.0, probes, vec![vec![-1.0; 3]]).unwrap();
        assert!(objective(&HermitianMatrix::zeros(3), &meas, 0).is_err());
        assert!(objective(&HermitianMatrix::zeros(2), &meas, 1).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut r = rng(6);
        let meas = random_measurements(&mut r, 3, 7, 3, 10.0);
        let back = MeasurementSet::from_json(&meas.to_json()).unwrap();
        assert_eq!(back, meas);
    }

    #[test]
    fn json_errors_carry_location() {
        let err = MeasurementSet::from_json("{\n \"dim\": 2,\n \"lambda\": \"x\"\n}").unwrap_err();
        let Error::Format(msg) = err else { panic!("{err:?}") };
        assert!(msg.contains("line 3"), "{msg}");
    }
}
