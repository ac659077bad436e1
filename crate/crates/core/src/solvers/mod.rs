//! Projected gradient, Nesterov accelerated gradient and ADMM over the
//! lifted problem. Every method starts from zero iterates and runs a fixed
//! number of iterations per row.

mod admm;
mod first_order;
mod line_search;

pub use admm::{
    admm_c_update, admm_c_update_raw, admm_iterate, admm_precompute, AdmmState, LiftedSystem,
};
pub use first_order::{gamma_schedule, next_gamma};
pub use line_search::{backtrack, backtrack_step, LineSearchParams, LineSearchRule, StepOutcome};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::linalg::{principal_component, CVector, HermitianMatrix};
use crate::objective::{MeasurementSet, ProbeProducts};

/// Called after every iteration with the 1-based iteration index and the
/// current PSD estimate matrix.
pub type Observer<'a> = dyn FnMut(usize, &HermitianMatrix) + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(alias = "pg")]
    ProjectedGradient,
    Nesterov,
    Admm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ProjectedGradient, Method::Nesterov, Method::Admm];

    /// Iteration budgets at which each method is past the knee of its
    /// convergence curve: 70, 30 and 5.
    pub fn default_iters(self) -> usize {
        match self {
            Method::ProjectedGradient => 70,
            Method::Nesterov => 30,
            Method::Admm => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::ProjectedGradient => "projected-gradient",
            Method::Nesterov => "nesterov",
            Method::Admm => "admm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pg" | "projected-gradient" => Ok(Method::ProjectedGradient),
            "nesterov" => Ok(Method::Nesterov),
            "admm" => Ok(Method::Admm),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Backtracking shrink factor.
    pub tau: f64,
    /// Initial step of every line search.
    pub t0: f64,
    /// ADMM penalty.
    pub rho: f64,
    pub backtrack_cap: usize,
    pub line_search: LineSearchRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(Method::Admm)
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            max_iters: method.default_iters(),
            tau: 0.3,
            t0: 1.0,
            rho: 1.0,
            backtrack_cap: 50,
            line_search: LineSearchRule::SufficientDecrease,
        }
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_line_search(mut self, rule: LineSearchRule) -> Self {
        self.line_search = rule;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("t0 must be positive, got {}", self.t0)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of one row solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub estimate: CVector,
    pub matrix: HermitianMatrix,
    /// Objective of the PSD iterate after each iteration.
    pub objective_trace: Vec<f64>,
    /// `‖D − C‖_F` after each ADMM iteration; empty for the gradient methods.
    pub primal_residuals: Vec<f64>,
    pub flops: FlopCounter,
    pub iterations: usize,
    /// Iterations whose line search hit the shrink cap.
    pub stagnations: usize,
}

impl RowResult {
    fn finish(
        matrix: HermitianMatrix,
        objective_trace: Vec<f64>,
        primal_residuals: Vec<f64>,
        flops: FlopCounter,
        iterations: usize,
        stagnations: usize,
    ) -> Self {
        Self {
            estimate: Vec::new(),
            matrix,
            objective_trace,
            primal_residuals,
            flops,
            iterations,
            stagnations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub method: Method,
    pub estimates: Vec<CVector>,
    pub final_matrices: Vec<HermitianMatrix>,
    pub objective_traces: Vec<Vec<f64>>,
    pub primal_residuals: Vec<Vec<f64>>,
    /// Probe-dependent work shared by all rows.
    pub shared_flops: FlopCounter,
    pub row_flops: Vec<FlopCounter>,
    /// `shared_flops + Σ row_flops`.
    pub flops: FlopCounter,
    pub iterations_run: usize,
}

/// Solver bound to one measurement set, holding the row-independent
/// precomputation.
#[derive(Debug)]
pub struct Solver<'a> {
    meas: &'a MeasurementSet,
    config: SolverConfig,
    products: ProbeProducts,
    system: Option<LiftedSystem>,
    shared_flops: FlopCounter,
}

impl<'a> Solver<'a> {
    pub fn new(meas: &'a MeasurementSet, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let mut shared_flops = FlopCounter::new();
        let products = ProbeProducts::new(meas, &mut shared_flops);
        let system = match config.method {
            Method::Admm => Some(admm::precompute(meas, &products, config.rho, &mut shared_flops)?),
            _ => None,
        };
        Ok(Self {
            meas,
            config,
            products,
            system,
            shared_flops,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn shared_flops(&self) -> FlopCounter {
        self.shared_flops
    }

    pub fn lifted_system(&self) -> Option<&LiftedSystem> {
        self.system.as_ref()
    }

    pub fn solve_row(&self, l: usize) -> Result<RowResult> {
        self.solve_row_observed(l, &mut |_, _| {})
    }

    pub fn solve_row_observed(&self, l: usize, observer: &mut Observer<'_>) -> Result<RowResult> {
        self.meas.row(l)?;
        let mut out = match self.config.method {
            Method::ProjectedGradient => {
                first_order::projected_gradient(self.meas, &self.products, l, &self.config, observer)
            }
            Method::Nesterov => {
                first_order::nesterov(self.meas, &self.products, l, &self.config, observer)
            }
            Method::Admm => admm::solve_row(
                self.meas,
                self.system.as_ref().expect("ADMM system prepared"),
                l,
                &self.config,
                observer,
            ),
        }
        .map_err(|e| Error::Row {
            row: l,
            source: Box::new(e),
        })?;
        out.estimate = extract_estimate(&out.matrix).map_err(|e| Error::Row {
            row: l,
            source: Box::new(e),
        })?;
        Ok(out)
    }

    /// Solves every row; the observer receives `(row, iteration, matrix)`.
    pub fn solve_all_observed(
        &self,
        observer: &mut dyn FnMut(usize, usize, &HermitianMatrix),
    ) -> Result<SolverResult> {
        let rows = (0..self.meas.num_rows())
            .map(|l| self.solve_row_observed(l, &mut |k, m| observer(l, k, m)))
            .collect::<Result<Vec<_>>>()?;
        let row_flops: Vec<FlopCounter> = rows.iter().map(|r| r.flops).collect();
        let flops = self.shared_flops + row_flops.iter().copied().sum();
        let mut result = SolverResult {
            method: self.config.method,
            estimates: Vec::with_capacity(rows.len()),
            final_matrices: Vec::with_capacity(rows.len()),
            objective_traces: Vec::with_capacity(rows.len()),
            primal_residuals: Vec::with_capacity(rows.len()),
            shared_flops: self.shared_flops,
            row_flops,
            flops,
            iterations_run: self.config.max_iters,
        };
        for r in rows {
            result.estimates.push(r.estimate);
            result.final_matrices.push(r.matrix);
            result.objective_traces.push(r.objective_trace);
            result.primal_residuals.push(r.primal_residuals);
        }
        Ok(result)
    }

    pub fn solve_all(&self) -> Result<SolverResult> {
        self.solve_all_observed(&mut |_, _, _| {})
    }
}

pub fn projected_gradient_solve(meas: &MeasurementSet, l: usize, config: &SolverConfig) -> Result<RowResult> {
    Solver::new(meas, SolverConfig { method: Method::ProjectedGradient, ..*config })?.solve_row(l)
}

pub fn nesterov_solve(meas: &MeasurementSet, l: usize, config: &SolverConfig) -> Result<RowResult> {
    Solver::new(meas, SolverConfig { method: Method::Nesterov, ..*config })?.solve_row(l)
}

pub fn admm_solve(meas: &MeasurementSet, l: usize, config: &SolverConfig) -> Result<RowResult> {
    Solver::new(meas, SolverConfig { method: Method::Admm, ..*config })?.solve_row(l)
}

pub fn solve_all_rows(meas: &MeasurementSet, config: &SolverConfig) -> Result<SolverResult> {
    Solver::new(meas, *config)?.solve_all()
}

/// Principal component `sqrt(λ_max) u_max` of the final PSD matrix.
pub fn extract_estimate(c: &HermitianMatrix) -> Result<CVector> {
    principal_component(c)
}
