//! Stochastic approximate mirror descent on the regularized empirical ASL.
//!
//! Each iteration samples a batch, computes an ε-approximate subgradient with
//! the configured inner budget and takes a mirror step
//! `θ_{t+1} = argmin_θ η_t<g_t, θ> + B_ω(θ, θ_t)`: a projected step for the
//! Euclidean map, a multiplicative one for the entropic map on the lifted
//! simplex.

mod mirror;
mod rate;

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{axpy, scaled};
use crate::losses::{Batch, EmpiricalObjective, Regularizer};
use crate::model::{Budget, CostVector, DistanceFn, FeatureMap, IODataset, ThetaSet};
use crate::rng::{stream, STREAM_SAMPLING};
use crate::{Error, Result};

pub use mirror::{calibrate_kappa_tilde, exponentiated_step, lift_l1_to_simplex, L1Lift, MirrorMap};
pub use rate::{verify_rate, RateCheckpoint, RateProblem, RateReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// `η_t = c/√t`.
    COverSqrtT { c: f64 },
    /// `η_t = 2/(α(t+1))` for an `α`-strongly convex objective.
    TwoOverAlphaT { alpha: f64 },
    /// `η_t = 1/(‖g_t‖_* √t)`.
    NormAdaptive,
}

impl StepRule {
    pub fn eta(&self, t: usize, g_dual: f64) -> f64 {
        let t = t as f64;
        match *self {
            StepRule::COverSqrtT { c } => c / t.sqrt(),
            StepRule::TwoOverAlphaT { alpha } => 2.0 / (alpha * (t + 1.0)),
            StepRule::NormAdaptive => {
                if g_dual > 0.0 {
                    1.0 / (g_dual * t.sqrt())
                } else {
                    0.0
                }
            }
        }
    }
}

/// Inner budget per iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    #[default]
    Exact,
    /// Node-capped scan with a fixed cap.
    Nodes { max_nodes: usize },
    /// Any `eps`-optimal inner response.
    Constant { eps: f64 },
    /// `ε_t = eps0 / t`.
    Harmonic { eps0: f64 },
}

impl EpsSchedule {
    pub fn budget(&self, t: usize) -> Budget {
        match *self {
            EpsSchedule::Exact => Budget::exact(),
            EpsSchedule::Nodes { max_nodes } => Budget::nodes(max_nodes),
            EpsSchedule::Constant { eps } => Budget::suboptimal(eps),
            EpsSchedule::Harmonic { eps0 } => Budget::suboptimal(eps0 / t as f64),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, EpsSchedule::Exact)
    }
}

/// Which iterate `samd_train` returns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// The last iterate `θ_{T+1}`.
    None,
    /// `(1/T) Σ_{t<=T} θ_t`.
    #[default]
    Uniform,
    /// `2/(T(T+1)) Σ_{t<=T} t θ_t`.
    WeightedT,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamdConfig {
    pub steps: usize,
    pub step_rule: StepRule,
    /// Instances per iteration; `None` means the full dataset.
    pub batch_size: Option<usize>,
    pub eps: EpsSchedule,
    pub averaging: Averaging,
    pub seed: u64,
    pub theta_set: ThetaSet,
    /// Starting point in the original coordinates; defaults to the projection
    /// of 0 (Euclidean) or the center of the lifted simplex (entropic).
    pub init: Option<Vec<f64>>,
    /// Evaluate the exact objective at `θ_t` every this many iterations.
    pub loss_every: Option<usize>,
    /// Store `θ_t` every this many iterations; defaults to `max(1, T/1000)`.
    pub snapshot_stride: Option<usize>,
    /// Iteration counts at which the averaged iterates are recorded.
    pub checkpoints: Vec<usize>,
    pub record_time: bool,
}

impl Default for SamdConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            step_rule: StepRule::NormAdaptive,
            batch_size: Some(1),
            eps: EpsSchedule::Exact,
            averaging: Averaging::Uniform,
            seed: 0,
            theta_set: ThetaSet::All,
            init: None,
            loss_every: None,
            snapshot_stride: None,
            checkpoints: Vec::new(),
            record_time: false,
        }
    }
}

impl SamdConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if let Some(b) = self.batch_size {
            if b == 0 || b > n {
                return Err(Error::Config(format!("batch_size must lie in 1..={n}, got {b}")));
            }
        }
        match self.step_rule {
            StepRule::COverSqrtT { c } if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::Config(format!("step constant c must be positive, got {c}")))
            }
            StepRule::TwoOverAlphaT { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(Error::Config(format!("alpha must be positive, got {alpha}")))
            }
            _ => {}
        }
        if self.loss_every == Some(0) || self.snapshot_stride == Some(0) {
            return Err(Error::Config("loss_every and snapshot_stride must be positive".into()));
        }
        self.eps.budget(1).validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn stride(&self) -> usize {
        self.snapshot_stride.unwrap_or((self.steps / 1000).max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// Cumulative time spent in the algorithm itself (loss evaluations for
    /// the trace are excluded); 0 when timing is off.
    pub time_s: f64,
    /// Exact objective at `θ_t`, when evaluated at this iteration.
    pub loss: Option<f64>,
    pub eps_t: f64,
    pub step: f64,
    pub grad_dual_norm: f64,
    pub batch_indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub iter: usize,
    /// `θ_t` in the original coordinates.
    pub theta: Vec<f64>,
    /// The iterate the mirror step acts on (equal to `theta` for Euclidean).
    pub lifted: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedIterates {
    pub steps: usize,
    pub uniform: Vec<f64>,
    pub weighted: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamdTrace {
    pub records: Vec<IterRecord>,
    pub snapshots: Vec<Snapshot>,
    pub checkpoints: Vec<AveragedIterates>,
    pub last: Vec<f64>,
    pub uniform: Vec<f64>,
    pub weighted: Vec<f64>,
    /// Largest observed `‖g_t‖_*²`.
    pub max_grad_sq: f64,
    pub lift: Option<L1Lift>,
}

impl SamdTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "time_s", "loss", "eps_t", "batch_indices"])?;
        for r in &self.records {
            let batch: Vec<String> = r.batch_indices.iter().map(|i| i.to_string()).collect();
            out.write_record([
                r.iter.to_string(),
                r.time_s.to_string(),
                r.loss.map(|v| v.to_string()).unwrap_or_default(),
                r.eps_t.to_string(),
                batch.join(";"),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sum_eps(&self) -> f64 {
        self.records.iter().map(|r| r.eps_t).sum()
    }

    pub fn sum_weighted_eps(&self) -> f64 {
        self.records.iter().map(|r| r.iter as f64 * r.eps_t).sum()
    }
}

fn draw_batch(rng: &mut impl Rng, n: usize, b: Option<usize>) -> Vec<usize> {
    match b {
        Some(b) if b < n => (0..b).map(|_| rng.random_range(0..n)).collect(),
        _ => (0..n).collect(),
    }
}

/// Runs `cfg.steps` mirror-descent iterations and returns the iterate chosen
/// by `cfg.averaging` (in the original coordinates) with the full trace.
///
/// The entropic map lifts the problem with [`lift_l1_to_simplex`] first, so it
/// needs `R = ‖·‖₁` and `Θ` the whole space or the nonnegative orthant.
#[allow(clippy::too_many_arguments)]
pub fn samd_train(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    kappa: f64,
    regularizer: Regularizer,
    mirror: &MirrorMap,
    cfg: &SamdConfig,
) -> Result<(CostVector, SamdTrace)> {
    cfg.validate(ds.len())?;
    let p = ds.check_dimension(phi)?;
    let obj = EmpiricalObjective::new(phi, d, kappa, regularizer);
    let lift = match *mirror {
        MirrorMap::Euclidean => None,
        MirrorMap::EntropicSimplex { kappa_tilde } => {
            Some(lift_l1_to_simplex(p, regularizer, &cfg.theta_set, kappa_tilde)?)
        }
    };
    let recover = |t: &[f64]| lift.map_or_else(|| t.to_vec(), |l| l.recover(t));
    // On the simplex the regularizer is carried by the budget κ̃‖θ̃‖₁ <= 1,
    // so the steps only see the loss term.
    let step_obj = match lift {
        Some(_) => EmpiricalObjective::new(phi, d, 0.0, Regularizer::None),
        None => EmpiricalObjective::new(phi, d, kappa, regularizer),
    };

    let mut theta = match (&lift, &cfg.init) {
        (None, init) => {
            let mut t = init.clone().unwrap_or_else(|| vec![0.0; p]);
            if t.len() != p {
                return Err(Error::DimensionMismatch { context: "SAMD init", expected: p, got: t.len() });
            }
            cfg.theta_set.project(&mut t);
            t
        }
        (Some(l), None) => l.center(),
        (Some(l), Some(init)) => {
            let mut t = l.lift(init);
            // Keep the multiplicative iterates strictly positive.
            let floor = 1e-6 / (l.kappa_tilde * t.len() as f64);
            t.iter_mut().for_each(|v| *v = v.max(floor));
            let mass = l.kappa_tilde * t.iter().sum::<f64>();
            if mass > 1.0 {
                t.iter_mut().for_each(|v| *v /= mass);
            }
            t
        }
    };

    let dim = theta.len();
    let stride = cfg.stride();
    let mut rng = stream(cfg.seed, STREAM_SAMPLING);
    let mut trace = SamdTrace {
        lift,
        ..SamdTrace::default()
    };
    let mut uniform_sum = vec![0.0; dim];
    let mut weighted_sum = vec![0.0; dim];
    let mut elapsed = 0.0;
    let exact = Budget::exact();

    for t in 1..=cfg.steps {
        let orig = recover(&theta);
        if (t - 1) % stride == 0 {
            trace.snapshots.push(Snapshot { iter: t, theta: orig.clone(), lifted: theta.clone() });
        }
        let loss = match cfg.loss_every {
            Some(k) if (t - 1) % k == 0 => Some(obj.loss(&orig, ds, &exact)?.value),
            _ => None,
        };
        axpy(1.0, &theta, &mut uniform_sum);
        axpy(t as f64, &theta, &mut weighted_sum);
        if cfg.checkpoints.contains(&t) {
            trace.checkpoints.push(AveragedIterates {
                steps: t,
                uniform: recover(&scaled(1.0 / t as f64, &uniform_sum)),
                weighted: recover(&scaled(2.0 / (t as f64 * (t as f64 + 1.0)), &weighted_sum)),
            });
        }

        let clock = cfg.record_time.then(Instant::now);
        let batch = draw_batch(&mut rng, ds.len(), cfg.batch_size);
        let budget = cfg.eps.budget(t);
        let report = match &lift {
            None => step_obj.subgradient(&theta, ds, &Batch::Indices(batch), &budget)?,
            Some(l) => l.subgradient(&step_obj, &theta, ds, &Batch::Indices(batch), &budget)?,
        };
        let g = report.vector;
        let g_dual = mirror.dual_norm(&g);
        let eta = cfg.step_rule.eta(t, g_dual);
        match *mirror {
            MirrorMap::Euclidean => {
                axpy(-eta, &g, &mut theta);
                cfg.theta_set.project(&mut theta);
            }
            MirrorMap::EntropicSimplex { kappa_tilde } => exponentiated_step(&mut theta, &g, eta, kappa_tilde),
        }
        if let Some(c) = clock {
            elapsed += c.elapsed().as_secs_f64();
        }
        trace.max_grad_sq = trace.max_grad_sq.max(g_dual * g_dual);
        trace.records.push(IterRecord {
            iter: t,
            time_s: elapsed,
            loss,
            eps_t: report.eps,
            step: eta,
            grad_dual_norm: g_dual,
            batch_indices: report.sampled_indices,
        });
        if !theta.iter().all(|v| v.is_finite()) || !g_dual.is_finite() {
            return Err(Error::SamdDiverged { iteration: t, trace: Box::new(trace) });
        }
    }

    let steps = cfg.steps as f64;
    trace.last = recover(&theta);
    trace.uniform = recover(&scaled(1.0 / steps, &uniform_sum));
    trace.weighted = recover(&scaled(2.0 / (steps * (steps + 1.0)), &weighted_sum));
    let out = match cfg.averaging {
        Averaging::None => trace.last.clone(),
        Averaging::Uniform => trace.uniform.clone(),
        Averaging::WeightedT => trace.weighted.clone(),
    };
    Ok((CostVector::new(out)?, trace))
}

/// The eight full-batch / stochastic × exact / approximate × Euclidean /
/// entropic combinations compared in the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamdVariant {
    /// Subgradient method.
    Sm,
    /// Mirror descent.
    Md,
    Ssm,
    Smd,
    Asm,
    Amd,
    Sasm,
    Samd,
}

impl SamdVariant {
    pub const ALL: [SamdVariant; 8] = [
        SamdVariant::Sm,
        SamdVariant::Md,
        SamdVariant::Ssm,
        SamdVariant::Smd,
        SamdVariant::Asm,
        SamdVariant::Amd,
        SamdVariant::Sasm,
        SamdVariant::Samd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SamdVariant::Sm => "sm",
            SamdVariant::Md => "md",
            SamdVariant::Ssm => "ssm",
            SamdVariant::Smd => "smd",
            SamdVariant::Asm => "asm",
            SamdVariant::Amd => "amd",
            SamdVariant::Sasm => "sasm",
            SamdVariant::Samd => "samd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn entropic(&self) -> bool {
        matches!(self, SamdVariant::Md | SamdVariant::Smd | SamdVariant::Amd | SamdVariant::Samd)
    }

    pub fn stochastic(&self) -> bool {
        matches!(self, SamdVariant::Ssm | SamdVariant::Smd | SamdVariant::Sasm | SamdVariant::Samd)
    }

    pub fn approximate(&self) -> bool {
        matches!(self, SamdVariant::Asm | SamdVariant::Amd | SamdVariant::Sasm | SamdVariant::Samd)
    }

    /// Mirror map and configuration of this variant on top of `base`
    /// (whose `steps`, `seed`, `theta_set` and recording fields are kept).
    /// All variants use the norm-adaptive step.
    pub fn configure(&self, base: &SamdConfig, batch_size: usize, max_nodes: usize, kappa_tilde: f64) -> (MirrorMap, SamdConfig) {
        let mirror = if self.entropic() {
            MirrorMap::EntropicSimplex { kappa_tilde }
        } else {
            MirrorMap::Euclidean
        };
        let cfg = SamdConfig {
            step_rule: StepRule::NormAdaptive,
            batch_size: if self.stochastic() { Some(batch_size) } else { None },
            eps: if self.approximate() { EpsSchedule::Nodes { max_nodes } } else { EpsSchedule::Exact },
            ..base.clone()
        };
        (mirror, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{binary_points, IOInstance, IdentityFeatures, Response};

    fn toy() -> IODataset {
        let pts: Vec<Response> = binary_points(3).map(Response::discrete).collect();
        let hats = [vec![1, 0, 0], vec![1, 1, 0], vec![0, 0, 1], vec![1, 0, 1]];
        IODataset::new(hats.iter().map(|h| IOInstance::finite(pts.clone(), Response::discrete(h.clone()))).collect(), 3)
            .unwrap()
    }

    #[test]
    fn twin_runs_are_identical() {
        let ds = toy();
        let phi = IdentityFeatures::new(3);
        let d = DistanceFn::l1();
        let cfg = SamdConfig { steps: 200, loss_every: Some(10), seed: 9, ..SamdConfig::default() };
        let a = samd_train(&ds, &phi, &d, 0.1, Regularizer::HalfSqL2, &MirrorMap::Euclidean, &cfg).unwrap();
        let b = samd_train(&ds, &phi, &d, 0.1, Regularizer::HalfSqL2, &MirrorMap::Euclidean, &cfg).unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn uniform_average_matches_snapshots() {
        let ds = toy();
        let phi = IdentityFeatures::new(3);
        let d = DistanceFn::l1();
        let cfg = SamdConfig { steps: 50, snapshot_stride: Some(1), ..SamdConfig::default() };
        let (theta, trace) = samd_train(&ds, &phi, &d, 0.1, Regularizer::L1, &MirrorMap::Euclidean, &cfg).unwrap();
        for j in 0..3 {
            let m = trace.snapshots.iter().map(|s| s.theta[j]).sum::<f64>() / 50.0;
            assert!((m - theta[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn entropic_iterates_stay_in_budget() {
        let ds = toy();
        let phi = IdentityFeatures::new(3);
        let d = DistanceFn::l1();
        let cfg = SamdConfig { steps: 300, snapshot_stride: Some(1), ..SamdConfig::default() };
        let mirror = MirrorMap::EntropicSimplex { kappa_tilde: 0.5 };
        let (_, trace) = samd_train(&ds, &phi, &d, 0.01, Regularizer::L1, &mirror, &cfg).unwrap();
        let lift = trace.lift.unwrap();
        assert_eq!(lift.dim(), 6);
        assert!(trace.snapshots.iter().all(|s| lift.in_domain(&s.lifted, 1e-12)));
    }

    #[test]
    fn variants_round_trip_names() {
        for v in SamdVariant::ALL {
            assert_eq!(SamdVariant::parse(v.name()), Some(v));
        }
        let (m, c) = SamdVariant::Samd.configure(&SamdConfig::default(), 1, 7, 2.0);
        assert_eq!(m, MirrorMap::EntropicSimplex { kappa_tilde: 2.0 });
        assert_eq!(c.eps, EpsSchedule::Nodes { max_nodes: 7 });
        assert_eq!(c.batch_size, Some(1));
        let (m, c) = SamdVariant::Sm.configure(&SamdConfig::default(), 1, 7, 2.0);
        assert_eq!(m, MirrorMap::Euclidean);
        assert!(c.eps.is_exact() && c.batch_size.is_none());
    }
}
