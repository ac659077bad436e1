//! Direct-detection MDM scenario: Haar-random unitary channels, Gaussian
//! training, noisy intensity measurements, transmitter precoding from the
//! estimated channel and an on-off keying link.
//!
//! Convention: with `y = H x`, row `l` of `H` gives `y_l = h_l^H x` for
//! `h_l = conj(row_l(H))`. The solvers recover `h_l`, so the estimated
//! channel has row `l` equal to `conj(ĥ_l)`.

mod link;

pub use link::{ber_ook, crosstalk_free_reference, ErrorCount};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, CVector, ComplexMatrix};
use crate::objective::MeasurementSet;
use crate::solvers::{solve_all_rows, Method, SolverConfig, SolverResult};

const UNITARITY_TOL: f64 = 1e-10;

/// Independent seed for `(master, trial, purpose)` via a SplitMix64 round
/// over the packed triple.
pub fn derive_seed(master: u64, trial: u64, purpose: u64) -> u64 {
    let mut z = master
        ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ purpose.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly symmetric complex Gaussian with unit variance.
pub(crate) fn complex_gaussian(r: &mut impl Rng) -> Complex64 {
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    matrix: ComplexMatrix,
}

impl Channel {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("channel matrix must be square".into()));
        }
        let defect = matrix.unitarity_defect();
        if !(defect <= UNITARITY_TOL) {
            return Err(Error::InvalidParameter(format!(
                "channel matrix is not unitary: defect {defect:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `h_l = conj(row_l(H))`, the vector whose intensities row `l` measures.
    pub fn row_vector(&self, l: usize) -> CVector {
        self.matrix.row(l).iter().map(|v| v.conj()).collect()
    }

    /// Multiplies row `l` by `phases[l]`; intensities are unchanged.
    pub fn with_row_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.dim() {
            return Err(Error::Dimension("one phase per row".into()));
        }
        let m = ComplexMatrix::from_fn(self.dim(), self.dim(), |i, k| {
            self.matrix[(i, k)] * Complex64::from_polar(1.0, phases[i])
        });
        Self::new(m)
    }
}

/// Haar-distributed `D × D` unitary from a complex Gaussian matrix.
///
/// Gram-Schmidt on the columns (run twice for orthogonality to rounding)
/// yields `Z = QR` with a positive real diagonal in `R`, which is the phase
/// fix that makes `Q` Haar rather than merely unitary.
pub fn generate_channel(dim: usize, seed: u64) -> Result<Channel> {
    if dim == 0 {
        return Err(Error::Dimension("channel dimension must be at least 1".into()));
    }
    let mut r = rng(seed);
    let z = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut r));
    let mut cols: Vec<CVector> = (0..dim).map(|k| z.column(k)).collect();
    for k in 0..dim {
        for _ in 0..2 {
            for j in 0..k {
                let p = dot(&cols[j], &cols[k]);
                let (done, rest) = cols.split_at_mut(k);
                for (a, b) in rest[0].iter_mut().zip(&done[j]) {
                    *a -= p * b;
                }
            }
        }
        let n = norm(&cols[k]);
        cols[k].iter_mut().for_each(|v| *v /= n);
    }
    Channel::new(ComplexMatrix::from_fn(dim, dim, |i, k| cols[k][i]))
}

/// `n` training vectors with i.i.d. unit-variance complex Gaussian entries.
pub fn generate_training(n: usize, dim: usize, seed: u64) -> Vec<CVector> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| complex_gaussian(&mut r)).collect())
        .collect()
}

/// `d_l^(n) = |(H x^(n))_l|² + σ·w`, `w` standard normal, one row per mode.
/// Negative intensities are kept.
pub fn measure_intensities(
    channel: &Channel,
    training: &[CVector],
    sigma: f64,
    lambda: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be finite and non-negative, got {sigma}")));
    }
    let dim = channel.dim();
    if let Some(bad) = training.iter().position(|x| x.len() != dim) {
        return Err(Error::Dimension(format!("training vector {bad} has wrong length")));
    }
    let mut r = rng(seed);
    let outputs: Vec<CVector> = training.iter().map(|x| channel.matrix.mul_vec(x)).collect();
    let intensities = (0..dim)
        .map(|l| {
            outputs
                .iter()
                .map(|y| {
                    let w: f64 = r.sample(StandardNormal);
                    y[l].norm_sqr() + sigma * w
                })
                .collect()
        })
        .collect();
    MeasurementSet::new(dim, lambda, training.to_vec(), intensities)
}

/// `⟨Σ_i |y_i^(n)|²⟩` over the training set.
fn mean_output_power(channel: &Channel, training: &[CVector]) -> f64 {
    let total: f64 = training
        .iter()
        .map(|x| channel.matrix.mul_vec(x).iter().map(Complex64::norm_sqr).sum::<f64>())
        .sum();
    total / training.len() as f64
}

/// `10 log10 SNR` with `SNR = [⟨Σ_i |y_i|²⟩ / (D σ)]²`. `σ = 0` gives `+∞`.
pub fn snr_from_sigma(channel: &Channel, training: &[CVector], sigma: f64) -> f64 {
    if sigma == 0.0 {
        return f64::INFINITY;
    }
    let ratio = mean_output_power(channel, training) / (channel.dim() as f64 * sigma);
    20.0 * ratio.log10()
}

/// Inverse of [`snr_from_sigma`] for the same channel and training set.
pub fn sigma_from_snr(channel: &Channel, training: &[CVector], snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    mean_output_power(channel, training) / (channel.dim() as f64 * 10f64.powf(snr_db / 20.0))
}

/// Channel estimate: one solver run per mode.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// Row `l` is `conj(ĥ_l)`, each correct up to its own unimodular phase.
    pub matrix: ComplexMatrix,
    pub result: SolverResult,
}

pub fn estimate_channel(meas: &MeasurementSet, config: &SolverConfig) -> Result<ChannelEstimate> {
    let result = solve_all_rows(meas, config)?;
    Ok(ChannelEstimate {
        matrix: estimate_matrix(&result.estimates)?,
        result,
    })
}

/// Stacks `conj(ĥ_l)` as rows.
pub fn estimate_matrix(rows: &[CVector]) -> Result<ComplexMatrix> {
    let conj: Vec<CVector> = rows
        .iter()
        .map(|h| h.iter().map(|v| v.conj()).collect())
        .collect();
    ComplexMatrix::from_rows(&conj)
}

/// `F = Ĥ^H` after scaling every row of `Ĥ` to unit norm. For `Ĥ = ΦH` with
/// `Φ` diagonal unitary, `H F = Φ^H` and intensities pass undistorted.
pub fn precoder_from_estimate(estimate: &ComplexMatrix) -> Result<ComplexMatrix> {
    let norms: Vec<f64> = (0..estimate.rows()).map(|i| norm(estimate.row(i))).collect();
    let largest = norms.iter().copied().fold(0.0, f64::max);
    if let Some(row) = norms.iter().position(|&n| !(n > 1e-12 * largest) || n == 0.0) {
        return Err(Error::ZeroRow { row });
    }
    let mut f = ComplexMatrix::zeros(estimate.cols(), estimate.rows());
    for (i, n) in norms.iter().enumerate() {
        for k in 0..estimate.cols() {
            f[(k, i)] = estimate[(i, k)].conj() / n;
        }
    }
    Ok(f)
}

/// BER of one configuration at one SNR, summed over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
}

impl BerPoint {
    pub fn new(snr_db: f64, count: ErrorCount) -> Self {
        Self {
            snr_db,
            ber: count.ber(),
            bits: count.bits,
            errors: count.errors,
        }
    }

    /// Fewer than 20 errors: too few to quote.
    pub fn is_sparse(&self) -> bool {
        self.errors < 20
    }
}

/// Iterations of the Nesterov run that stands in for an interior-point
/// reference solve.
pub const REFERENCE_ITERS: usize = 500;

pub fn reference_config() -> SolverConfig {
    SolverConfig::new(Method::Nesterov).with_iters(REFERENCE_ITERS)
}

/// High-accuracy estimates used as the converged baseline.
pub fn reference_solution(meas: &MeasurementSet) -> Result<SolverResult> {
    solve_all_rows(meas, &reference_config())
}

#[cfg(test)]
mod tests;
