//! ADMM on the split `g(C) + I_psd(D)` subject to `C = D`, with augmented
//! Lagrangian `g(C) + I_psd(D) + Re tr(E^H (D − C)) + ρ ‖D − C‖_F²`.
//!
//! The C-step is an unconstrained quadratic in the `D²` entries of `C`:
//!
//! ```text
//! (X̃ + ρI) vec(C) = vec(U_l + E/2 + ρD − I/2),   X̃ = λ Σ_n conj(X_n) X_n^T
//! ```
//!
//! where `X_n[iD + k] = conj(x_i) x_k` and `U_l = λ Σ_n d_l^(n) x_n x_n^H`.
//! The inverse `F = (X̃ + ρI)^{-1}` depends only on the probes and is built
//! by rank-one Sherman-Morrison-Woodbury updates from `F = I/ρ`.

use num_complex::Complex64;

use super::{Observer, RowResult, SolverConfig};
use crate::error::{Error, Result};
use crate::flops::{FlopCounter, Phase, CADD, CMAC, CMUL, RCMUL};
use crate::linalg::{project_psd_counted, CVector, ComplexMatrix, HermitianMatrix, ZERO};
use crate::objective::{objective_from_forms, quad_forms, MeasurementSet, ProbeProducts};

const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Probe-dependent ADMM precomputation shared by every row.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    dim: usize,
    rho: f64,
    lambda: f64,
    lifted_probes: Vec<CVector>,
    inverse: ComplexMatrix,
    data_terms: Vec<HermitianMatrix>,
}

impl LiftedSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `X_n` with entry `iD + k` equal to `conj(x_i) x_k`.
    pub fn lifted_probes(&self) -> &[CVector] {
        &self.lifted_probes
    }

    /// `F = (X̃ + ρI)^{-1}`, a `D² × D²` Hermitian matrix.
    pub fn inverse(&self) -> &ComplexMatrix {
        &self.inverse
    }

    /// `U_l = λ Σ_n d_l^(n) x_n x_n^H` for each row.
    pub fn data_terms(&self) -> &[HermitianMatrix] {
        &self.data_terms
    }

    /// `X̃ + ρI`, assembled explicitly. Only used for checking `F`.
    pub fn system_matrix(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut a = ComplexMatrix::identity(n).scale(Complex64::new(self.rho, 0.0));
        for x in &self.lifted_probes {
            for r in 0..n {
                let xr = x[r].conj() * self.lambda;
                for c in 0..n {
                    a[(r, c)] += xr * x[c];
                }
            }
        }
        a
    }
}

pub fn admm_precompute(meas: &MeasurementSet, rho: f64) -> Result<LiftedSystem> {
    let products = ProbeProducts::new(meas, &mut FlopCounter::new());
    precompute(meas, &products, rho, &mut FlopCounter::new())
}

pub(crate) fn precompute(
    meas: &MeasurementSet,
    products: &ProbeProducts,
    rho: f64,
    flops: &mut FlopCounter,
) -> Result<LiftedSystem> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let dim = meas.dim();
    let n2 = dim * dim;
    let lambda = meas.lambda();

    let lifted_probes: Vec<CVector> = meas
        .probes()
        .iter()
        .map(|x| {
            (0..n2)
                .map(|idx| x[idx / dim].conj() * x[idx % dim])
                .collect()
        })
        .collect();
    flops.record(Phase::Precompute, (n2 * meas.num_probes()) as u64 * CMUL);

    let mut f = ComplexMatrix::identity(n2).scale(Complex64::new(1.0 / rho, 0.0));
    let inv_lambda = 1.0 / lambda;
    let mut w = vec![ZERO; n2];
    for (idx, xl) in lifted_probes.iter().enumerate() {
        // w = F conj(X), denominator 1/λ + X^T F conj(X) is real for Hermitian F
        for (r, wr) in w.iter_mut().enumerate() {
            *wr = f.row(r).iter().zip(xl).map(|(a, b)| a * b.conj()).sum();
        }
        let denom = inv_lambda + xl.iter().zip(&w).map(|(a, b)| a * b).sum::<Complex64>().re;
        if denom.abs() <= DENOMINATOR_FLOOR {
            return Err(Error::DegenerateProbe {
                probe: idx,
                value: denom,
            });
        }
        let s = 1.0 / denom;
        for r in 0..n2 {
            let wr = w[r] * s;
            f[(r, r)] = Complex64::new(f[(r, r)].re - wr.re * w[r].re - wr.im * w[r].im, 0.0);
            for c in r + 1..n2 {
                let v = f[(r, c)] - wr * w[c].conj();
                f[(r, c)] = v;
                f[(c, r)] = v.conj();
            }
        }
        let n2u = n2 as u64;
        flops.record(
            Phase::Precompute,
            n2u * n2u * CMAC + n2u * CMAC + 1 + n2u * RCMUL + n2u * (n2u + 1) / 2 * (CMUL + CADD),
        );
    }

    let np = dim * (dim + 1) / 2;
    let data_terms = meas
        .intensities()
        .iter()
        .map(|row| products.weighted_sum(row, lambda))
        .collect();
    flops.record(
        Phase::Precompute,
        (meas.num_rows() * meas.num_probes() * np) as u64 * (RCMUL + CADD),
    );

    Ok(LiftedSystem {
        dim,
        rho,
        lambda,
        lifted_probes,
        inverse: f,
        data_terms,
    })
}

/// Iterate triple `(C, D, E)` for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub c: HermitianMatrix,
    pub d: HermitianMatrix,
    pub e: HermitianMatrix,
}

impl AdmmState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            c: HermitianMatrix::zeros(dim),
            d: HermitianMatrix::zeros(dim),
            e: HermitianMatrix::zeros(dim),
        }
    }
}

/// `F · vec(U_l + E/2 + ρD − I/2)` reshaped to `D × D`, before symmetrization.
pub fn admm_c_update_raw(
    system: &LiftedSystem,
    d_l: &HermitianMatrix,
    e_l: &HermitianMatrix,
    l: usize,
) -> Result<ComplexMatrix> {
    let u = system
        .data_terms
        .get(l)
        .ok_or_else(|| Error::Dimension(format!("row {l} out of range")))?;
    if d_l.dim() != system.dim || e_l.dim() != system.dim {
        return Err(Error::Dimension("iterate dimension differs from system".into()));
    }
    Ok(c_update_raw(system, u, d_l, e_l, &mut FlopCounter::new()))
}

pub fn admm_c_update(
    system: &LiftedSystem,
    d_l: &HermitianMatrix,
    e_l: &HermitianMatrix,
    l: usize,
) -> Result<HermitianMatrix> {
    HermitianMatrix::from_matrix(&admm_c_update_raw(system, d_l, e_l, l)?)
}

fn c_update_raw(
    system: &LiftedSystem,
    u: &HermitianMatrix,
    d_l: &HermitianMatrix,
    e_l: &HermitianMatrix,
    flops: &mut FlopCounter,
) -> ComplexMatrix {
    let dim = system.dim;
    let n2 = dim * dim;
    let rho = system.rho;
    let b: CVector = (0..n2)
        .map(|idx| {
            let (i, k) = (idx / dim, idx % dim);
            let delta = if i == k { 0.5 } else { 0.0 };
            u[(i, k)] + e_l[(i, k)] * 0.5 + d_l[(i, k)] * rho - delta
        })
        .collect();
    let c = system.inverse.mul_vec(&b);
    let n2u = n2 as u64;
    flops.record(Phase::CUpdate, n2u * (2 * RCMUL + 2 * CADD) + dim as u64 + n2u * n2u * CMAC);
    ComplexMatrix::new(dim, dim, c).expect("finite C-update")
}

/// One full `C → D → E` sweep from `state`.
pub fn admm_iterate(system: &LiftedSystem, state: &AdmmState, l: usize) -> Result<AdmmState> {
    let u = system
        .data_terms
        .get(l)
        .ok_or_else(|| Error::Dimension(format!("row {l} out of range")))?;
    step(system, u, state, &mut FlopCounter::new())
}

fn step(
    system: &LiftedSystem,
    u: &HermitianMatrix,
    state: &AdmmState,
    flops: &mut FlopCounter,
) -> Result<AdmmState> {
    let dim = system.dim;
    let rho = system.rho;
    let c = HermitianMatrix::from_matrix(&c_update_raw(system, u, &state.d, &state.e, flops))?;
    flops.record(Phase::CUpdate, (dim * dim) as u64 * CADD);

    let shifted = c.add_scaled(-0.5 / rho, &state.e);
    flops.record(Phase::DUpdate, (dim * dim) as u64 * (RCMUL + CADD));
    let mut f = 0;
    let d = project_psd_counted(&shifted, &mut f)?;
    flops.record(Phase::DUpdate, f);

    let e = state.e.add_scaled(rho, &d.sub(&c));
    flops.record(Phase::EUpdate, (dim * dim) as u64 * (CADD + RCMUL + CADD));
    Ok(AdmmState { c, d, e })
}

pub(crate) fn solve_row(
    meas: &MeasurementSet,
    system: &LiftedSystem,
    l: usize,
    cfg: &SolverConfig,
    observer: &mut Observer<'_>,
) -> Result<RowResult> {
    let d = meas.row(l)?;
    let u = &system.data_terms[l];
    let mut flops = FlopCounter::new();
    let mut state = AdmmState::zeros(meas.dim());
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut residuals = Vec::with_capacity(cfg.max_iters);
    for k in 0..cfg.max_iters {
        state = step(system, u, &state, &mut flops)?;
        residuals.push(state.d.sub(&state.c).frobenius_norm());
        let q = quad_forms(&state.d, meas.probes(), &mut flops, Phase::Monitor);
        trace.push(objective_from_forms(state.d.trace(), &q, d, meas.lambda()).total);
        observer(k + 1, &state.d);
    }
    Ok(RowResult::finish(state.d, trace, residuals, flops, cfg.max_iters, 0))
}
