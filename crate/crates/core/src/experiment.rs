//! Monte Carlo experiments over the MDM scenario: BER against iteration
//! count at a fixed SNR, BER against SNR with penalty extraction, and the
//! flop report for one channel-estimation pass.
//!
//! Every trial draws its channel, training set, measurement noise and data
//! bits from seeds derived from `(seed, trial, purpose)`. All methods in a
//! trial see the same draws, and the SNR sweep scales one set of noise
//! samples, so differences between curves come from the estimates alone.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::{FlopCounter, Phase};
use crate::linalg::{principal_component, CVector};
use crate::objective::MeasurementSet;
use crate::oracles::qfunc;
use crate::sim::{
    ber_ook, crosstalk_free_reference, derive_seed, estimate_matrix, generate_channel,
    generate_training, measure_intensities, precoder_from_estimate, sigma_from_snr, BerPoint,
    Channel, ErrorCount,
};
use crate::solvers::{LineSearchRule, Method, Solver, SolverConfig};

const PURPOSE_CHANNEL: u64 = 0;
const PURPOSE_TRAINING: u64 = 1;
const PURPOSE_NOISE: u64 = 2;
const PURPOSE_BITS: u64 = 3;

/// BER at which penalties are read off.
pub const TARGET_BER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationBudgets {
    #[serde(alias = "pg")]
    pub projected_gradient: usize,
    pub nesterov: usize,
    pub admm: usize,
}

impl Default for IterationBudgets {
    fn default() -> Self {
        Self {
            projected_gradient: Method::ProjectedGradient.default_iters(),
            nesterov: Method::Nesterov.default_iters(),
            admm: Method::Admm.default_iters(),
        }
    }
}

impl IterationBudgets {
    pub fn get(&self, method: Method) -> usize {
        match method {
            Method::ProjectedGradient => self.projected_gradient,
            Method::Nesterov => self.nesterov,
            Method::Admm => self.admm,
        }
    }

    pub fn set(&mut self, method: Method, iters: usize) {
        match method {
            Method::ProjectedGradient => self.projected_gradient = iters,
            Method::Nesterov => self.nesterov = iters,
            Method::Admm => self.admm = iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub probes: usize,
    pub lambda: f64,
    pub tau: f64,
    pub t0: f64,
    pub rho: f64,
    pub backtrack_cap: usize,
    pub line_search: LineSearchRule,
    pub methods: Vec<Method>,
    pub iterations: IterationBudgets,
    /// Nesterov iterations of the converged reference.
    pub reference_iters: usize,
    pub snr_grid: Vec<f64>,
    /// Fixed SNR of the convergence run; defaults to the point where the
    /// crosstalk-free BER is [`TARGET_BER`].
    pub convergence_snr_db: Option<f64>,
    /// Iterations recorded per method in the convergence run; defaults to
    /// the budgets.
    pub convergence_iters: Option<IterationBudgets>,
    pub bits: u64,
    pub trials: usize,
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 6,
            probes: 300,
            lambda: 10.0,
            tau: 0.3,
            t0: 1.0,
            rho: 1.0,
            backtrack_cap: 50,
            line_search: LineSearchRule::default(),
            methods: Method::ALL.to_vec(),
            iterations: IterationBudgets::default(),
            reference_iters: crate::sim::REFERENCE_ITERS,
            snr_grid: snr_range(12.0, 18.0, 0.5).expect("valid default grid"),
            convergence_snr_db: None,
            convergence_iters: None,
            bits: 200_000,
            trials: 20,
            seed: None,
        }
    }
}

/// `a, a + step, …` up to `b` inclusive (with rounding slack).
pub fn snr_range(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid SNR grid {a}:{b}:{step}")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.dim == 0 || self.dim > 16 {
            return bad(format!("dim must lie in 1..=16, got {}", self.dim));
        }
        if self.probes == 0 {
            return bad("probes must be at least 1".into());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.bits < 10_000 {
            return bad(format!("bits must be at least 10000, got {}", self.bits));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be non-empty and finite".into());
        }
        if self.reference_iters == 0 {
            return bad("reference_iters must be at least 1".into());
        }
        for m in Method::ALL {
            self.solver_config(m).validate()?;
        }
        Ok(())
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidParameter("a seed is required for simulation commands".into()))
    }

    pub fn solver_config(&self, method: Method) -> SolverConfig {
        SolverConfig {
            method,
            max_iters: self.iterations.get(method),
            tau: self.tau,
            t0: self.t0,
            rho: self.rho,
            backtrack_cap: self.backtrack_cap,
            line_search: self.line_search,
        }
    }

    pub fn reference_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.reference_iters,
            ..self.solver_config(Method::Nesterov)
        }
    }
}

/// One curve of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Curve {
    Method(Method),
    /// The long Nesterov run standing in for an exact solve.
    Reference,
    CrosstalkFree,
}

impl Curve {
    pub fn name(&self) -> &'static str {
        match self {
            Curve::Method(m) => m.name(),
            Curve::Reference => "reference",
            Curve::CrosstalkFree => "crosstalk-free",
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Curve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Noise std at which the crosstalk-free detector has error rate `ber`:
/// the root of `Q(0.5/σ) = ber`, by bisection.
pub fn sigma_for_crosstalk_free_ber(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::InvalidParameter(format!("target BER must lie in (0, 0.5), got {ber}")));
    }
    let (mut lo, mut hi) = (1e-6, 1e6);
    for _ in 0..200 {
        let mid = (lo * hi as f64).sqrt();
        if qfunc(0.5 / mid) < ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nominal SNR for a noise std, using `⟨Σ|y|²⟩ = D` of unit-variance
/// training through a unitary channel.
pub fn nominal_snr_db(sigma: f64) -> f64 {
    -20.0 * sigma.log10()
}

struct Trial {
    channel: Channel,
    training: Vec<CVector>,
    noise_seed: u64,
    bits_seed: u64,
}

impl Trial {
    fn new(cfg: &ExperimentConfig, seed: u64, t: u64) -> Result<Self> {
        Ok(Self {
            channel: generate_channel(cfg.dim, derive_seed(seed, t, PURPOSE_CHANNEL))?,
            training: generate_training(cfg.probes, cfg.dim, derive_seed(seed, t, PURPOSE_TRAINING)),
            noise_seed: derive_seed(seed, t, PURPOSE_NOISE),
            bits_seed: derive_seed(seed, t, PURPOSE_BITS),
        })
    }

    fn sigma(&self, snr_db: f64) -> f64 {
        sigma_from_snr(&self.channel, &self.training, snr_db)
    }

    fn measure(&self, sigma: f64, lambda: f64) -> Result<MeasurementSet> {
        measure_intensities(&self.channel, &self.training, sigma, lambda, self.noise_seed)
    }

    fn link(&self, rows: &[CVector], sigma: f64, bits: u64) -> Result<ErrorCount> {
        let precoder = precoder_from_estimate(&estimate_matrix(rows)?)?;
        ber_ook(&self.channel, &precoder, sigma, bits, self.bits_seed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub method: Curve,
    pub iteration: usize,
    pub snr_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub snr_db: f64,
    pub trials: usize,
    pub rows: Vec<ConvergenceRow>,
    pub reference_ber: f64,
    pub crosstalk_free_ber: f64,
    /// Per method: first iteration from which the BER stays within 10% of
    /// the reference BER, if any.
    pub iterations_to_reference: BTreeMap<String, Option<usize>>,
}

impl ConvergenceReport {
    pub fn curve(&self, method: Method) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.method == Curve::Method(method)).collect()
    }

    pub fn knee(&self, method: Method) -> Option<usize> {
        self.iterations_to_reference.get(method.name()).copied().flatten()
    }
}

/// First `k` from which every later BER is within `slack` (relative) of
/// `reference`.
pub fn settle_iteration(bers: &[(usize, f64)], reference: f64, slack: f64) -> Option<usize> {
    let limit = reference * (1.0 + slack);
    let mut first = None;
    for &(k, b) in bers {
        if b <= limit {
            first.get_or_insert(k);
        } else {
            first = None;
        }
    }
    first
}

/// BER against iteration count at one SNR, averaged over trials.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    let snr_db = match cfg.convergence_snr_db {
        Some(s) => s,
        None => nominal_snr_db(sigma_for_crosstalk_free_ber(TARGET_BER)?),
    };
    let horizons = cfg.convergence_iters.unwrap_or(cfg.iterations);
    let mut counts: BTreeMap<(Curve, usize), ErrorCount> = BTreeMap::new();

    for t in 0..cfg.trials as u64 {
        let trial = Trial::new(cfg, seed, t)?;
        let sigma = trial.sigma(snr_db);
        let meas = trial.measure(sigma, cfg.lambda)?;

        let reference = Solver::new(&meas, cfg.reference_config())?.solve_all()?;
        *counts.entry((Curve::Reference, 0)).or_default() += trial.link(&reference.estimates, sigma, cfg.bits)?;
        *counts.entry((Curve::CrosstalkFree, 0)).or_default() +=
            crosstalk_free_reference(cfg.dim, sigma, cfg.bits, trial.bits_seed)?;

        for &method in &cfg.methods {
            let iters = horizons.get(method);
            let solver_cfg = SolverConfig {
                max_iters: iters,
                ..cfg.solver_config(method)
            };
            // snapshots[k - 1][l] is the row-l estimate after k iterations
            let mut snapshots = vec![vec![Vec::new(); cfg.dim]; iters];
            let mut failure = None;
            Solver::new(&meas, solver_cfg)?.solve_all_observed(&mut |l, k, c| match principal_component(c) {
                Ok(v) => snapshots[k - 1][l] = v,
                Err(e) => {
                    failure.get_or_insert(e);
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            for (k, rows) in snapshots.iter().enumerate() {
                *counts.entry((Curve::Method(method), k + 1)).or_default() += trial.link(rows, sigma, cfg.bits)?;
            }
        }
    }

    let rows: Vec<ConvergenceRow> = counts
        .iter()
        .map(|(&(method, iteration), c)| ConvergenceRow {
            method,
            iteration,
            snr_db,
            ber: c.ber(),
            bits: c.bits,
            errors: c.errors,
            trials: cfg.trials,
        })
        .collect();
    let reference_ber = counts[&(Curve::Reference, 0)].ber();
    let iterations_to_reference = cfg
        .methods
        .iter()
        .map(|&m| {
            let curve: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.method == Curve::Method(m))
                .map(|r| (r.iteration, r.ber))
                .collect();
            (m.name().to_string(), settle_iteration(&curve, reference_ber, 0.1))
        })
        .collect();
    Ok(ConvergenceReport {
        snr_db,
        trials: cfg.trials,
        rows,
        reference_ber,
        crosstalk_free_ber: counts[&(Curve::CrosstalkFree, 0)].ber(),
        iterations_to_reference,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub method: Curve,
    #[serde(flatten)]
    pub point: BerPoint,
    pub trials: usize,
    /// Fewer than 20 errors; excluded from penalty and gap estimates.
    pub sparse: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticCheck {
    pub snr_db: f64,
    pub simulated: f64,
    pub predicted: f64,
    /// `(simulated − predicted)` in Monte Carlo standard errors.
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    /// SNR at [`TARGET_BER`], interpolated on log10 BER against SNR.
    pub snr_at_target_db: Option<f64>,
    /// Extra SNR over the crosstalk-free link at [`TARGET_BER`].
    pub penalty_db: Option<f64>,
    /// Largest horizontal distance to the reference curve over usable points.
    pub max_gap_to_reference_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub trials: usize,
    pub rows: Vec<SweepRow>,
    pub summary: BTreeMap<String, CurveSummary>,
    pub crosstalk_free_check: Vec<AnalyticCheck>,
}

impl SweepReport {
    pub fn curve(&self, curve: Curve) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.method == curve).collect()
    }
}

/// SNR at which a curve crosses `log10(target)`, interpolating linearly in
/// log10 BER between the first bracketing pair of usable points.
pub fn snr_at_ber(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let y = target.log10();
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, b)| *b > 0.0)
        .map(|&(s, b)| (s, b.log10()))
        .collect();
    usable.windows(2).find_map(|w| {
        let ((s0, y0), (s1, y1)) = (w[0], w[1]);
        if (y0 - y) * (y1 - y) <= 0.0 && y0 != y1 {
            Some(s0 + (y - y0) * (s1 - s0) / (y1 - y0))
        } else if y0 == y && y1 == y {
            Some(s0)
        } else {
            None
        }
    })
}

fn usable_points(rows: &[&SweepRow]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| !r.sparse)
        .map(|r| (r.point.snr_db, r.point.ber))
        .collect()
}

/// BER against SNR for every method, the reference and the crosstalk-free
/// link.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    let mut counts: BTreeMap<(Curve, usize), ErrorCount> = BTreeMap::new();
    let mut predicted_errors = vec![0.0; cfg.snr_grid.len()];
    let mut predicted_var = vec![0.0; cfg.snr_grid.len()];

    for t in 0..cfg.trials as u64 {
        let trial = Trial::new(cfg, seed, t)?;
        for (i, &snr) in cfg.snr_grid.iter().enumerate() {
            let sigma = trial.sigma(snr);
            let meas = trial.measure(sigma, cfg.lambda)?;
            let free = crosstalk_free_reference(cfg.dim, sigma, cfg.bits, trial.bits_seed)?;
            let p = qfunc(0.5 / sigma);
            predicted_errors[i] += free.bits as f64 * p;
            predicted_var[i] += free.bits as f64 * p * (1.0 - p);
            *counts.entry((Curve::CrosstalkFree, i)).or_default() += free;

            let reference = Solver::new(&meas, cfg.reference_config())?.solve_all()?;
            *counts.entry((Curve::Reference, i)).or_default() += trial.link(&reference.estimates, sigma, cfg.bits)?;
            for &method in &cfg.methods {
                let res = Solver::new(&meas, cfg.solver_config(method))?.solve_all()?;
                *counts.entry((Curve::Method(method), i)).or_default() += trial.link(&res.estimates, sigma, cfg.bits)?;
            }
        }
    }

    let rows: Vec<SweepRow> = counts
        .iter()
        .map(|(&(method, i), &c)| {
            let point = BerPoint::new(cfg.snr_grid[i], c);
            SweepRow {
                method,
                point,
                trials: cfg.trials,
                sparse: point.is_sparse(),
            }
        })
        .collect();
    let mut report = SweepReport {
        trials: cfg.trials,
        rows,
        summary: BTreeMap::new(),
        crosstalk_free_check: Vec::new(),
    };

    for (i, &snr) in cfg.snr_grid.iter().enumerate() {
        let c = counts[&(Curve::CrosstalkFree, i)];
        let bits = c.bits as f64;
        let sd = predicted_var[i].sqrt();
        report.crosstalk_free_check.push(AnalyticCheck {
            snr_db: snr,
            simulated: c.ber(),
            predicted: predicted_errors[i] / bits,
            z: if sd > 0.0 { (c.errors as f64 - predicted_errors[i]) / sd } else { 0.0 },
        });
    }

    let free_at = snr_at_ber(&usable_points(&report.curve(Curve::CrosstalkFree)), TARGET_BER);
    let reference_points = usable_points(&report.curve(Curve::Reference));
    let mut curves: Vec<Curve> = cfg.methods.iter().map(|&m| Curve::Method(m)).collect();
    curves.push(Curve::Reference);
    curves.push(Curve::CrosstalkFree);
    for curve in curves {
        let points = usable_points(&report.curve(curve));
        let at = snr_at_ber(&points, TARGET_BER);
        let gaps: Vec<f64> = points
            .iter()
            .filter_map(|&(s, b)| snr_at_ber(&reference_points, b).map(|r| (s - r).abs()))
            .collect();
        report.summary.insert(
            curve.name().to_string(),
            CurveSummary {
                snr_at_target_db: at,
                penalty_db: at.zip(free_at).map(|(a, f)| a - f),
                max_gap_to_reference_db: gaps.into_iter().reduce(f64::max),
            },
        );
    }
    Ok(report)
}

/// Update intervals of the operations-per-second report, in seconds.
pub const UPDATE_INTERVALS: [f64; 3] = [1e-3, 1e-2, 1e-1];

#[derive(Debug, Clone, Serialize)]
pub struct MethodFlops {
    pub method: Method,
    pub iterations: usize,
    /// Excludes objective evaluations made only for the trace.
    pub total: u64,
    pub phases: FlopCounter,
    /// Operations per second at each of [`UPDATE_INTERVALS`].
    pub ops_per_second: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlopsReport {
    pub dim: usize,
    pub probes: usize,
    pub intervals_s: Vec<f64>,
    pub methods: Vec<MethodFlops>,
}

/// Counts one full channel estimate (all `D` rows plus the shared
/// precomputation) per method at its iteration budget.
pub fn flops_report(cfg: &ExperimentConfig) -> Result<FlopsReport> {
    cfg.validate()?;
    let seed = cfg.seed.unwrap_or(0);
    let trial = Trial::new(cfg, seed, 0)?;
    let snr = cfg.convergence_snr_db.unwrap_or(nominal_snr_db(sigma_for_crosstalk_free_ber(TARGET_BER)?));
    let meas = trial.measure(trial.sigma(snr), cfg.lambda)?;
    let methods = cfg
        .methods
        .iter()
        .map(|&method| {
            let res = Solver::new(&meas, cfg.solver_config(method))?.solve_all()?;
            let total = res.flops.algorithmic();
            Ok(MethodFlops {
                method,
                iterations: res.iterations_run,
                total,
                phases: res.flops,
                ops_per_second: UPDATE_INTERVALS.iter().map(|dt| total as f64 / dt).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlopsReport {
        dim: cfg.dim,
        probes: cfg.probes,
        intervals_s: UPDATE_INTERVALS.to_vec(),
        methods,
    })
}

/// Growth of one phase's count when one problem size is doubled.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingProbe {
    pub label: &'static str,
    pub measured: f64,
    pub expected: f64,
}

impl ScalingProbe {
    pub fn relative_error(&self) -> f64 {
        (self.measured / self.expected - 1.0).abs()
    }
}

fn phase_count(dim: usize, probes: usize, method: Method, iters: usize, phase: Phase, shared: bool) -> Result<f64> {
    let channel = generate_channel(dim, derive_seed(17, dim as u64, probes as u64))?;
    let training = generate_training(probes, dim, derive_seed(18, dim as u64, probes as u64));
    let meas = measure_intensities(&channel, &training, 0.0, 10.0, 0)?;
    let solver = Solver::new(&meas, SolverConfig::new(method).with_iters(iters))?;
    if shared {
        return Ok(solver.shared_flops().get(phase) as f64);
    }
    let res = solver.solve_all()?;
    Ok(res.row_flops.iter().map(|f| f.get(phase)).sum::<u64>() as f64)
}

/// Doubling probes for the per-iteration kernels against their complexity
/// exponents: gradient `D²LN` in `N`, projection `D³L` in `D`, and the ADMM
/// inverse `D⁴N` in both. Counts are per row (`L` fixed by `D`), so the
/// projection probe divides out the row count.
pub fn scaling_probes() -> Result<Vec<ScalingProbe>> {
    let pg = Method::ProjectedGradient;
    let grad = phase_count(6, 600, pg, 10, Phase::Gradient, false)? / phase_count(6, 300, pg, 10, Phase::Gradient, false)?;
    let proj = (phase_count(24, 40, pg, 5, Phase::Projection, false)? / 24.0)
        / (phase_count(12, 40, pg, 5, Phase::Projection, false)? / 12.0);
    let admm = Method::Admm;
    let pre_d = phase_count(12, 300, admm, 1, Phase::Precompute, true)? / phase_count(6, 300, admm, 1, Phase::Precompute, true)?;
    let pre_n = phase_count(6, 600, admm, 1, Phase::Precompute, true)? / phase_count(6, 300, admm, 1, Phase::Precompute, true)?;
    Ok(vec![
        ScalingProbe { label: "gradient vs N", measured: grad, expected: 2.0 },
        ScalingProbe { label: "projection vs D", measured: proj, expected: 8.0 },
        ScalingProbe { label: "admm precompute vs D", measured: pre_d, expected: 16.0 },
        ScalingProbe { label: "admm precompute vs N", measured: pre_n, expected: 2.0 },
    ])
}

fn write_rows<W: Write>(mut out: W, header: &str, lines: impl Iterator<Item = String>) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// `method,iteration,snr_db,ber,bits,errors,trials`; reference rows use
/// iteration 0.
pub fn write_convergence_csv<W: Write>(out: W, report: &ConvergenceReport) -> io::Result<()> {
    write_rows(
        out,
        "method,iteration,snr_db,ber,bits,errors,trials",
        report.rows.iter().map(|r| {
            format!("{},{},{},{},{},{},{}", r.method, r.iteration, r.snr_db, r.ber, r.bits, r.errors, r.trials)
        }),
    )
}

/// `method,snr_db,ber,bits,errors,trials,sparse`.
pub fn write_sweep_csv<W: Write>(out: W, report: &SweepReport) -> io::Result<()> {
    write_rows(
        out,
        "method,snr_db,ber,bits,errors,trials,sparse",
        report.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.method, r.point.snr_db, r.point.ber, r.point.bits, r.point.errors, r.trials, r.sparse
            )
        }),
    )
}

/// `method,phase,flops` with one `total` line per method.
pub fn write_flops_csv<W: Write>(out: W, report: &FlopsReport) -> io::Result<()> {
    write_rows(
        out,
        "method,phase,flops",
        report.methods.iter().flat_map(|m| {
            m.phases
                .phases()
                .map(move |(p, v)| format!("{},{},{}", m.method, p, v))
                .chain(std::iter::once(format!("{},total,{}", m.method, m.total)))
                .collect::<Vec<_>>()
        }),
    )
}
