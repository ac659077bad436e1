use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flops::{FlopCounter, Phase, CADD, RCMUL};
use crate::linalg::{project_psd_counted, HermitianMatrix};
use crate::objective::{objective_from_forms, quad_forms, MeasurementSet, ProbeProducts};

/// Acceptance rule of the backtracking loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineSearchRule {
    /// `Z = P(C − tG)` is accepted once
    /// `g(Z) ≤ g(C) + ⟨G, Z − C⟩ + ‖Z − C‖²/(2t)`. Projected gradient then
    /// decreases the objective every iteration, and the test stays valid at
    /// the extrapolated point of the accelerated method.
    #[default]
    SufficientDecrease,
    /// Strict decrease `g(C − tG) < g(C)` at the unprojected trial point.
    /// The trace term is unbounded below off the PSD cone, so this accepts
    /// steps that the projection then undoes.
    Unprojected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub t0: f64,
    pub tau: f64,
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub step: f64,
    /// No strictly improving step was found within `cap` shrinks.
    pub stagnated: bool,
    pub evaluations: usize,
}

/// Backtracking over `t = t0·tau^j`, `j = 0..=cap`: returns the first `t`
/// whose trial value is strictly below `current`.
pub fn backtrack(current: f64, mut trial: impl FnMut(f64) -> f64, p: LineSearchParams) -> StepOutcome {
    let mut t = p.t0;
    for j in 0..=p.cap {
        if trial(t) < current {
            return StepOutcome {
                step: t,
                stagnated: false,
                evaluations: j + 1,
            };
        }
        if j < p.cap {
            t *= p.tau;
        }
    }
    StepOutcome {
        step: t,
        stagnated: true,
        evaluations: p.cap + 1,
    }
}

/// Line search for `g(C − tG)` on row `l`, evaluated at the unprojected
/// trial point. A zero direction returns `t0` without searching.
pub fn backtrack_step(
    c: &HermitianMatrix,
    g: &HermitianMatrix,
    meas: &MeasurementSet,
    l: usize,
    p: LineSearchParams,
) -> Result<StepOutcome> {
    let d = meas.row(l)?;
    let mut flops = FlopCounter::new();
    let qc = quad_forms(c, meas.probes(), &mut flops, Phase::LineSearch);
    let current = objective_from_forms(c.trace(), &qc, d, meas.lambda()).total;
    let products = ProbeProducts::new(meas, &mut flops);
    Ok(search_along(c.trace(), &qc, g, meas, &products, d, current, p, &mut flops))
}

/// Shared kernel: the trial objective is affine in `t` inside the square,
/// `x^H (C − tG) x = q_C − t q_G`, so `q_G` is formed once per search.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search_along(
    trace_c: f64,
    qc: &[f64],
    g: &HermitianMatrix,
    meas: &MeasurementSet,
    products: &ProbeProducts,
    d: &[f64],
    current: f64,
    p: LineSearchParams,
    flops: &mut FlopCounter,
) -> StepOutcome {
    if g.frobenius_norm() == 0.0 {
        return StepOutcome {
            step: p.t0,
            stagnated: false,
            evaluations: 0,
        };
    }
    let qg = products.quad_forms(g, flops, Phase::LineSearch);
    let trace_g = g.trace();
    let lambda = meas.lambda();
    let n = qc.len() as u64;
    let out = backtrack(
        current,
        |t| {
            let mut s = 0.0;
            for ((a, b), dn) in qc.iter().zip(&qg).zip(d) {
                let r = a - t * b - dn;
                s += r * r;
            }
            trace_c - t * trace_g + lambda * s
        },
        p,
    );
    flops.record(Phase::LineSearch, out.evaluations as u64 * (5 * n + 4));
    out
}

/// Accepted point of one search, already projected, with its quadratic forms.
pub(crate) struct Accepted {
    pub outcome: StepOutcome,
    pub point: HermitianMatrix,
    pub forms: Vec<f64>,
    pub value: f64,
}

fn project_step(
    base: &HermitianMatrix,
    t: f64,
    g: &HermitianMatrix,
    flops: &mut FlopCounter,
) -> Result<HermitianMatrix> {
    let dim = base.dim() as u64;
    let mut f = dim * dim * (RCMUL + CADD);
    let p = project_psd_counted(&base.add_scaled(-t, g), &mut f)?;
    flops.record(Phase::Projection, f);
    Ok(p)
}

/// Searches from `base` along `−G` and returns `P(base − tG)` for the
/// accepted `t`. `qb` and `current` are the forms and objective at `base`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search_and_project(
    base: &HermitianMatrix,
    qb: &[f64],
    current: f64,
    g: &HermitianMatrix,
    meas: &MeasurementSet,
    products: &ProbeProducts,
    d: &[f64],
    p: LineSearchParams,
    rule: LineSearchRule,
    flops: &mut FlopCounter,
) -> Result<Accepted> {
    let lambda = meas.lambda();
    let finish = |outcome: StepOutcome, flops: &mut FlopCounter| -> Result<Accepted> {
        let point = project_step(base, outcome.step, g, flops)?;
        let forms = products.quad_forms(&point, flops, Phase::Gradient);
        let value = objective_from_forms(point.trace(), &forms, d, lambda).total;
        Ok(Accepted { outcome, point, forms, value })
    };
    if rule == LineSearchRule::Unprojected || g.frobenius_norm() == 0.0 {
        let outcome = search_along(base.trace(), qb, g, meas, products, d, current, p, flops);
        return finish(outcome, flops);
    }

    let mut t = p.t0;
    let mut last = None;
    for j in 0..=p.cap {
        let point = project_step(base, t, g, flops)?;
        let forms = products.quad_forms(&point, flops, Phase::LineSearch);
        let value = objective_from_forms(point.trace(), &forms, d, lambda).total;
        flops.record(Phase::LineSearch, 3 * forms.len() as u64);
        let outcome = StepOutcome {
            step: t,
            stagnated: false,
            evaluations: j + 1,
        };
        let diff = point.sub(base);
        let n2 = (base.dim() * base.dim()) as u64;
        flops.record(Phase::LineSearch, n2 * (CADD + 4) + 4);
        if value <= current + g.inner_product(&diff) + diff.frobenius_norm().powi(2) / (2.0 * t) {
            return Ok(Accepted { outcome, point, forms, value });
        }
        last = Some(Accepted {
            outcome: StepOutcome {
                stagnated: true,
                ..outcome
            },
            point,
            forms,
            value,
        });
        if j < p.cap {
            t *= p.tau;
        }
    }
    Ok(last.expect("at least one trial"))
}
