use serde::{Deserialize, Serialize};

use crate::geometry::{build_cone, circumcenter_desk, feasibility_program, incenter, Offsets};
use crate::losses::{EmpiricalObjective, Regularizer};
use crate::model::{Budget, DistanceFn, DistanceKind, FeatureMap, IODataset};
use crate::reformulate::{
    train_asl_enumerated, train_asl_mixed_integer_lp, train_feasibility_mixed_integer, train_suboptimality_facets,
};
use crate::samd::{samd_train, Averaging, SamdConfig, SamdVariant};
use crate::{Error, Result};

use super::{ExperimentConfig, ExperimentKind};

/// Largest dimension the circumcenter baseline accepts.
pub const CIRCUMCENTER_MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Feasibility,
    Incenter,
    CircumcenterDesk,
    AslEnumerated,
    SlFacets,
    AslMiLpZ,
    AslMiLpYz,
    Samd(SamdVariant),
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "feasibility" => Method::Feasibility,
            "incenter" => Method::Incenter,
            "circumcenter_desk" => Method::CircumcenterDesk,
            "asl_enumerated" => Method::AslEnumerated,
            "sl_facets" => Method::SlFacets,
            "asl_mi_lp_z" => Method::AslMiLpZ,
            "asl_mi_lp_yz" => Method::AslMiLpYz,
            other => Method::Samd(SamdVariant::parse(other)?),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Method::Feasibility => "feasibility",
            Method::Incenter => "incenter",
            Method::CircumcenterDesk => "circumcenter_desk",
            Method::AslEnumerated => "asl_enumerated",
            Method::SlFacets => "sl_facets",
            Method::AslMiLpZ => "asl_mi_lp_z",
            Method::AslMiLpYz => "asl_mi_lp_yz",
            Method::Samd(v) => v.name(),
        }
        .to_string()
    }

    pub fn check_compatible(&self, cfg: &ExperimentConfig) -> Result<()> {
        let mi = cfg.experiment == ExperimentKind::MixedInteger;
        let ok = match self {
            Method::Feasibility => true,
            Method::AslMiLpZ | Method::AslMiLpYz => mi,
            Method::CircumcenterDesk => {
                if !mi && cfg.n() > CIRCUMCENTER_MAX_DIM {
                    return Err(Error::Config(format!(
                        "circumcenter_desk needs n <= {CIRCUMCENTER_MAX_DIM}, got {}",
                        cfg.n()
                    )));
                }
                cfg.experiment == ExperimentKind::Consistent
            }
            Method::Incenter | Method::AslEnumerated | Method::SlFacets | Method::Samd(_) => !mi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "method {} does not apply to the {:?} experiment",
                self.name(),
                cfg.experiment
            )))
        }
    }
}

/// Optimum of the first-order benchmark objective
/// `κ‖θ‖₁ + (1/N)Σ ASL` with `d = ‖·‖₁` on one training set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamdReference {
    pub f_star: f64,
    pub theta_star: Vec<f64>,
    pub f_zero: f64,
    /// `1/‖θ*‖₁`.
    pub kappa_tilde: f64,
}

pub fn samd_reference(cfg: &ExperimentConfig, train: &IODataset, phi: &dyn FeatureMap) -> Result<SamdReference> {
    let d = DistanceFn::l1();
    let kappa = cfg.samd.kappa;
    let set = cfg.theta_set();
    let sol = train_asl_enumerated(train, phi, &d, kappa, Regularizer::L1, &set, false)?;
    let obj = EmpiricalObjective::new(phi, &d, kappa, Regularizer::L1);
    let exact = Budget::exact();
    let theta_star = sol.theta.into_vec();
    let l1: f64 = theta_star.iter().map(|v| v.abs()).sum();
    if l1 <= 1e-12 {
        return Err(Error::Invalid("the benchmark minimizer is 0; κ̃ is undefined".into()));
    }
    Ok(SamdReference {
        f_star: obj.loss(&theta_star, train, &exact)?.value,
        f_zero: obj.loss(&vec![0.0; phi.dim()], train, &exact)?.value,
        kappa_tilde: 1.0 / l1,
        theta_star,
    })
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub theta: Vec<f64>,
    pub loss_gap: Option<f64>,
    pub time_to_target_s: Option<f64>,
}

impl TrainOutcome {
    fn plain(theta: Vec<f64>) -> Self {
        Self { theta, loss_gap: None, time_to_target_s: None }
    }
}

fn train_samd(
    v: SamdVariant,
    cfg: &ExperimentConfig,
    train: &IODataset,
    phi: &dyn FeatureMap,
    r: &SamdReference,
) -> Result<TrainOutcome> {
    let sc = &cfg.samd;
    let base = SamdConfig {
        steps: if v.stochastic() { sc.steps_stochastic } else { sc.steps_full },
        averaging: Averaging::None,
        seed: train.seed,
        theta_set: cfg.theta_set(),
        loss_every: Some(if v.stochastic() { sc.loss_every_stochastic } else { sc.loss_every_full }),
        record_time: cfg.record_timing,
        ..SamdConfig::default()
    };
    let (mirror, scfg) = v.configure(&base, sc.batch_size, sc.max_nodes, r.kappa_tilde);
    let d = DistanceFn::l1();
    let (theta, trace) = samd_train(train, phi, &d, sc.kappa, Regularizer::L1, &mirror, &scfg)?;
    let obj = EmpiricalObjective::new(phi, &d, sc.kappa, Regularizer::L1);
    let gap = obj.loss(&theta, train, &Budget::exact())?.value - r.f_star;
    let target = r.f_star + sc.gap_target_rel * (r.f_zero - r.f_star);
    // The loss in record t is taken at θ_t, reached after t − 1 updates.
    let time_to_target = cfg.record_timing.then(|| {
        let mut prev = 0.0;
        for rec in &trace.records {
            if rec.loss.is_some_and(|l| l <= target) {
                return prev;
            }
            prev = rec.time_s;
        }
        f64::INFINITY
    });
    Ok(TrainOutcome {
        theta: theta.into_vec(),
        loss_gap: Some(gap),
        time_to_target_s: time_to_target,
    })
}

/// Trains one method on `train` with the experiment's settings.
pub fn train_method(
    method: Method,
    cfg: &ExperimentConfig,
    train: &IODataset,
    phi: &dyn FeatureMap,
    reference: Option<&SamdReference>,
) -> Result<TrainOutcome> {
    let set = cfg.theta_set();
    let mi = cfg.experiment == ExperimentKind::MixedInteger;
    let theta = match method {
        Method::Feasibility if mi => train_feasibility_mixed_integer(train, phi)?.theta.into_vec(),
        Method::Feasibility => feasibility_program(&build_cone(train, phi)?, &set)?.into_vec(),
        Method::Incenter => incenter(&build_cone(train, phi)?, &set, Regularizer::HalfSqL2, &Offsets::RowNorm)?
            .theta
            .into_vec(),
        Method::CircumcenterDesk => {
            circumcenter_desk(&build_cone(train, phi)?, &set, CIRCUMCENTER_MAX_DIM)?.into_vec()
        }
        Method::AslEnumerated => {
            train_asl_enumerated(train, phi, &DistanceFn::euclidean(), cfg.kappa, Regularizer::HalfSqL2, &set, false)?
                .theta
                .into_vec()
        }
        Method::SlFacets => train_suboptimality_facets(train, phi, &set)?.theta.into_vec(),
        Method::AslMiLpZ | Method::AslMiLpYz => train_asl_mixed_integer_lp(
            train,
            phi,
            DistanceKind::Euclidean,
            0.0,
            Regularizer::None,
            &set,
            method == Method::AslMiLpYz,
        )?
        .theta
        .into_vec(),
        Method::Samd(v) => {
            let r = reference.ok_or_else(|| Error::Invalid("first-order methods need the reference optimum".into()))?;
            return train_samd(v, cfg, train, phi, r);
        }
    };
    Ok(TrainOutcome::plain(theta))
}
