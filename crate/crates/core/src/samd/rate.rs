use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::losses::{EmpiricalObjective, Regularizer};
use crate::model::{Budget, DistanceFn, FeatureMap, IODataset, ThetaSet};
use crate::reformulate::train_asl_enumerated;
use crate::rng::child_seed;
use crate::{Error, Result};

use super::{samd_train, MirrorMap, SamdConfig, StepRule};

/// A small enumerable problem whose optimum is computed exactly.
pub struct RateProblem<'a> {
    pub ds: &'a IODataset,
    pub phi: &'a dyn FeatureMap,
    pub d: &'a DistanceFn,
    pub kappa: f64,
    pub regularizer: Regularizer,
    pub theta_set: ThetaSet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateCheckpoint {
    pub steps: usize,
    /// `f(θ̄_T) − f*` per trial.
    pub gaps: Vec<f64>,
    pub mean_gap: f64,
    /// Guaranteed bound on the expected gap with the measured `R²`, `G²`
    /// and the incurred `ε_t` (largest over trials).
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub f_star: f64,
    pub theta_star: Vec<f64>,
    /// Box that replaced an unbounded Θ.
    pub restriction: Option<ThetaSet>,
    /// `sup_{θ,ν ∈ Θ} ½‖θ − ν‖²`.
    pub r_sq: f64,
    /// Largest observed `‖g_t‖²` over all trials.
    pub g_sq: f64,
    pub checkpoints: Vec<RateCheckpoint>,
    /// Least-squares slope of `log mean_gap` against `log T`.
    pub slope: f64,
    pub within_bound: bool,
}

fn radius_sq(set: &ThetaSet, p: usize) -> Result<f64> {
    match *set {
        ThetaSet::Box { lo, hi } => Ok(0.5 * p as f64 * (hi - lo).powi(2)),
        ThetaSet::L1Ball { radius } => Ok(2.0 * radius * radius),
        _ => Err(Error::Invalid("rate bound needs a bounded Θ".into())),
    }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs `trials` seeded Euclidean SAMD runs (seeds `child_seed(cfg.seed, k)`)
/// and compares the averaged iterates at `cfg.checkpoints` against the exact
/// optimum and the theoretical bound:
///
/// * `c/√t` steps, uniform average: `(R²/c + cG²)/√T + (1/T)Σε_t`,
/// * `2/(α(t+1))` steps, `t`-weighted average:
///   `2G²/(α(T+1)) + 2/(T(T+1)) Σ t ε_t`.
///
/// An unbounded Θ is restricted to a box containing `θ*` twice over, which is
/// reported in [`RateReport::restriction`].
pub fn verify_rate(cfg: &SamdConfig, problem: &RateProblem<'_>, trials: usize) -> Result<RateReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    if cfg.checkpoints.len() < 2 {
        return Err(Error::Config("rate verification needs at least two checkpoints".into()));
    }
    let p = problem.phi.dim();
    let mut cfg = cfg.clone();
    cfg.checkpoints.sort_unstable();
    cfg.checkpoints.dedup();
    cfg.steps = cfg.steps.max(*cfg.checkpoints.last().unwrap());
    cfg.loss_every = None;

    let solve = |set: &ThetaSet| {
        train_asl_enumerated(problem.ds, problem.phi, problem.d, problem.kappa, problem.regularizer, set, false)
    };
    let mut theta_star = solve(&problem.theta_set)?.theta.into_vec();
    let restriction = match problem.theta_set {
        ThetaSet::All | ThetaSet::NonnegOrthant => {
            let r = (2.0 * crate::linalg::norm_inf(&theta_star)).max(1.0);
            let lo = if problem.theta_set == ThetaSet::All { -r } else { 0.0 };
            Some(ThetaSet::Box { lo, hi: r })
        }
        _ => None,
    };
    let set = restriction.clone().unwrap_or_else(|| problem.theta_set.clone());
    if restriction.is_some() {
        theta_star = solve(&set)?.theta.into_vec();
    }
    cfg.theta_set = set.clone();
    let r_sq = radius_sq(&set, p)?;

    let obj = EmpiricalObjective::new(problem.phi, problem.d, problem.kappa, problem.regularizer);
    let exact = Budget::exact();
    let f_star = obj.loss(&theta_star, problem.ds, &exact)?.value;

    let runs: Vec<Result<(Vec<f64>, f64, Vec<(f64, f64)>)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let c = SamdConfig { seed: child_seed(cfg.seed, k as u64), ..cfg.clone() };
            let (_, trace) = samd_train(
                problem.ds,
                problem.phi,
                problem.d,
                problem.kappa,
                problem.regularizer,
                &MirrorMap::Euclidean,
                &c,
            )?;
            let mut gaps = Vec::with_capacity(trace.checkpoints.len());
            let mut eps = Vec::with_capacity(trace.checkpoints.len());
            for cp in &trace.checkpoints {
                let avg = match cfg.step_rule {
                    StepRule::TwoOverAlphaT { .. } => &cp.weighted,
                    _ => &cp.uniform,
                };
                gaps.push(obj.loss(avg, problem.ds, &exact)?.value - f_star);
                let head = &trace.records[..cp.steps];
                eps.push((
                    head.iter().map(|r| r.eps_t).sum::<f64>(),
                    head.iter().map(|r| r.iter as f64 * r.eps_t).sum::<f64>(),
                ));
            }
            Ok((gaps, trace.max_grad_sq, eps))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let g_sq = runs.iter().map(|r| r.1).fold(0.0, f64::max);

    let mut checkpoints = Vec::with_capacity(cfg.checkpoints.len());
    for (k, &steps) in cfg.checkpoints.iter().enumerate() {
        let t = steps as f64;
        let gaps: Vec<f64> = runs.iter().map(|r| r.0[k]).collect();
        let (sum_eps, sum_weps) = runs
            .iter()
            .map(|r| r.2[k])
            .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        let bound = match cfg.step_rule {
            StepRule::COverSqrtT { c } => (r_sq / c + c * g_sq) / t.sqrt() + sum_eps / t,
            StepRule::TwoOverAlphaT { alpha } => {
                2.0 * g_sq / (alpha * (t + 1.0)) + 2.0 * sum_weps / (t * (t + 1.0))
            }
            StepRule::NormAdaptive => {
                return Err(Error::Unsupported("the rate bound is stated for c/√t and 2/(α(t+1)) steps".into()))
            }
        };
        checkpoints.push(RateCheckpoint {
            steps,
            mean_gap: gaps.iter().sum::<f64>() / trials as f64,
            gaps,
            bound,
        });
    }
    let pts: Vec<(f64, f64)> = checkpoints
        .iter()
        .map(|c| ((c.steps as f64).ln(), c.mean_gap.max(1e-300).ln()))
        .collect();
    Ok(RateReport {
        f_star,
        theta_star,
        restriction,
        r_sq,
        g_sq,
        within_bound: checkpoints.iter().all(|c| c.mean_gap <= c.bound),
        slope: slope(&pts),
        checkpoints,
    })
}
