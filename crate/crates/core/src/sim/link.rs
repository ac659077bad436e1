//! On-off keying over the precoded channel with intensity detection.

use std::ops::{Add, AddAssign};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{rng, Channel};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};

/// Patterns are tabulated up to this many modes.
const TABLE_MODES: usize = 16;

/// Detection threshold on received intensity for amplitudes `{0, 1}`.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ErrorCount {
    pub bits: u64,
    pub errors: u64,
}

impl ErrorCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }
}

impl AddAssign for ErrorCount {
    fn add_assign(&mut self, rhs: Self) {
        self.bits += rhs.bits;
        self.errors += rhs.errors;
    }
}

impl Add for ErrorCount {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl std::iter::Sum for ErrorCount {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Received noiseless intensities `|(M s)_i|²` for every on/off pattern `s`.
fn intensity_table(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.rows();
    let mut fields = vec![ZERO; d << d];
    let mut out = vec![0.0; d << d];
    for pattern in 1usize..1 << d {
        // add the column of the lowest set bit to the pattern without it
        let k = pattern.trailing_zeros() as usize;
        let prev = pattern & (pattern - 1);
        for i in 0..d {
            let v = fields[prev * d + i] + m[(i, k)];
            fields[pattern * d + i] = v;
            out[pattern * d + i] = v.norm_sqr();
        }
    }
    out
}

/// Transmits `ceil(bits / D)` symbols of `D` equiprobable OOK bits through
/// `H F`, adds real Gaussian noise of std `σ` to each detected intensity and
/// counts threshold decisions that differ from the sent bit.
pub fn ber_ook(
    channel: &Channel,
    precoder: &ComplexMatrix,
    sigma: f64,
    bits: u64,
    seed: u64,
) -> Result<ErrorCount> {
    let d = channel.dim();
    if precoder.rows() != d || precoder.cols() != d {
        return Err(Error::Dimension("precoder must match the channel".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be finite and non-negative, got {sigma}")));
    }
    let m = channel.matrix().mul(precoder);
    let symbols = bits.div_ceil(d as u64);
    let mut r = rng(seed);
    let mut errors = 0;
    let mask = if d >= 64 { u64::MAX } else { (1u64 << d) - 1 };

    if d <= TABLE_MODES {
        let table = intensity_table(&m);
        for _ in 0..symbols {
            let pattern = (r.random::<u64>() & mask) as usize;
            let row = &table[pattern * d..(pattern + 1) * d];
            for (i, &p) in row.iter().enumerate() {
                let w: f64 = r.sample(StandardNormal);
                let sent = (pattern >> i) & 1 == 1;
                errors += u64::from((p + sigma * w > THRESHOLD) != sent);
            }
        }
    } else {
        let mut s = vec![ZERO; d];
        for _ in 0..symbols {
            for v in s.iter_mut() {
                *v = if r.random::<bool>() { Complex64::new(1.0, 0.0) } else { ZERO };
            }
            let y = m.mul_vec(&s);
            for (yi, si) in y.iter().zip(&s) {
                let w: f64 = r.sample(StandardNormal);
                errors += u64::from((yi.norm_sqr() + sigma * w > THRESHOLD) != (si.re > 0.5));
            }
        }
    }
    Ok(ErrorCount {
        bits: symbols * d as u64,
        errors,
    })
}

/// The ideal link `H = F = I`, where noise is the only impairment.
pub fn crosstalk_free_reference(dim: usize, sigma: f64, bits: u64, seed: u64) -> Result<ErrorCount> {
    ber_ook(&Channel::identity(dim), &ComplexMatrix::identity(dim), sigma, bits, seed)
}
