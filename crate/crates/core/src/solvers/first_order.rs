//! Projected gradient and Nesterov-accelerated projected gradient.

use super::line_search::{search_and_project, LineSearchParams};
use super::{Observer, RowResult, SolverConfig};
use crate::error::Result;
use crate::flops::{FlopCounter, Phase, CADD, RCMUL};
use crate::linalg::HermitianMatrix;
use crate::objective::{objective_from_forms, MeasurementSet, ProbeProducts};

/// `γ[k+1] = 1 / (1/2 + sqrt(1/4 + 1/γ[k]²))`.
pub fn next_gamma(gamma: f64) -> f64 {
    1.0 / (0.5 + (0.25 + 1.0 / (gamma * gamma)).sqrt())
}

/// `γ[0..len]` starting from `γ[0] = 1`.
pub fn gamma_schedule(len: usize) -> Vec<f64> {
    std::iter::successors(Some(1.0), |&g| Some(next_gamma(g)))
        .take(len)
        .collect()
}

fn params(cfg: &SolverConfig) -> LineSearchParams {
    LineSearchParams {
        t0: cfg.t0,
        tau: cfg.tau,
        cap: cfg.backtrack_cap,
    }
}

pub(crate) fn projected_gradient(
    meas: &MeasurementSet,
    products: &ProbeProducts,
    l: usize,
    cfg: &SolverConfig,
    observer: &mut Observer<'_>,
) -> Result<RowResult> {
    let d = meas.row(l)?;
    let lambda = meas.lambda();
    let mut flops = FlopCounter::new();
    let mut c = HermitianMatrix::zeros(meas.dim());
    let mut qc = products.quad_forms(&c, &mut flops, Phase::Gradient);
    let mut current = objective_from_forms(0.0, &qc, d, lambda).total;
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut stagnations = 0;

    for k in 0..cfg.max_iters {
        let g = products.gradient(&qc, d, lambda, &mut flops);
        let acc = search_and_project(&c, &qc, current, &g, meas, products, d, params(cfg), cfg.line_search, &mut flops)?;
        stagnations += usize::from(acc.outcome.stagnated);
        c = acc.point;
        qc = acc.forms;
        current = acc.value;
        trace.push(current);
        observer(k + 1, &c);
    }
    Ok(RowResult::finish(c, trace, Vec::new(), flops, cfg.max_iters, stagnations))
}

pub(crate) fn nesterov(
    meas: &MeasurementSet,
    products: &ProbeProducts,
    l: usize,
    cfg: &SolverConfig,
    observer: &mut Observer<'_>,
) -> Result<RowResult> {
    let d = meas.row(l)?;
    let dim = meas.dim();
    let lambda = meas.lambda();
    let mut flops = FlopCounter::new();
    let mut c = HermitianMatrix::zeros(dim);
    let mut k_mat = c.clone();
    let mut qc = products.quad_forms(&c, &mut flops, Phase::Gradient);
    let mut qk = qc.clone();
    let mut gamma = 1.0;
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut stagnations = 0;

    for k in 0..cfg.max_iters {
        let at_k = objective_from_forms(k_mat.trace(), &qk, d, lambda).total;
        let g = products.gradient(&qk, d, lambda, &mut flops);
        let acc = search_and_project(&k_mat, &qk, at_k, &g, meas, products, d, params(cfg), cfg.line_search, &mut flops)?;
        stagnations += usize::from(acc.outcome.stagnated);

        let gamma_next = next_gamma(gamma);
        let beta = gamma_next * (1.0 - gamma) / gamma;
        // K = C[k+1] + β (C[k+1] − C[k]); its quadratic forms follow linearly
        k_mat = acc.point.add_scaled(beta, &acc.point.sub(&c));
        qk = acc
            .forms
            .iter()
            .zip(&qc)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        flops.record(
            Phase::Momentum,
            8 + (dim * dim) as u64 * (CADD + RCMUL + CADD) + 3 * qk.len() as u64,
        );

        c = acc.point;
        qc = acc.forms;
        gamma = gamma_next;
        trace.push(acc.value);
        flops.record(Phase::Monitor, 3 * qc.len() as u64);
        observer(k + 1, &c);
    }
    Ok(RowResult::finish(c, trace, Vec::new(), flops, cfg.max_iters, stagnations))
}
