//! Finite convex training programs.
//!
//! * [`train_asl_enumerated`]: epigraph form of the regularized empirical ASL
//!   for enumerable feasible sets,
//!   `min κR(θ) + (1/N)Σβ_i s.t. <θ, φ(ŝ_i, x̂_i) − φ(ŝ_i, x)> + d(x̂_i, x) <= β_i`,
//! * [`train_asl_mixed_integer_lp`]: the same loss for mixed-integer feasible
//!   sets with the inner maximization over `y` dualized, one multiplier block
//!   `λ_ijk` per (instance, integer assignment, signed coordinate),
//! * [`train_suboptimality_facets`]: suboptimality loss under `‖θ‖_∞ = 1`,
//!   one LP per facet of the ∞-norm ball,
//! * [`tu_inner_rewrite`]: affine form of the ℓ1-augmented inner objective on
//!   binary responses.
//!
//! The programs have one row (block) per feasible response and instance. They
//! are solved by row generation over that canonical list, which yields the
//! optimum of the full program.

mod enumerated;
mod master;
mod mixed;
mod tu;

use serde::{Deserialize, Serialize};

use crate::losses::Regularizer;
use crate::model::{CostVector, DistanceKind, ThetaSet};
use crate::solvers::lp::KktReport;

pub use enumerated::{train_asl_enumerated, train_asl_enumerated_with, train_suboptimality_facets};
pub use mixed::{
    train_asl_mixed_integer_lp, train_asl_mixed_integer_lp_with, train_feasibility_mixed_integer,
    MixedIntegerOptions,
};
pub use tu::{tu_asl_lp, tu_inner_rewrite};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainerStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

/// Multipliers of one dualized inner block `(i, z_ij, h_k)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockDual {
    pub instance: usize,
    pub z: Vec<i64>,
    /// Signed coordinate index: `k < u` is `+e_k`, `k >= u` is `−e_{k−u}`;
    /// always 0 when `y` is not penalized.
    pub k: usize,
    pub lambda: Vec<f64>,
    /// Left-hand side of the block inequality implied by `λ`; at most `β_i`.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainerSolution {
    pub theta: CostVector,
    pub objective: f64,
    /// Epigraph variables β_i, one per instance.
    pub slacks: Vec<f64>,
    pub duals: Option<Vec<BlockDual>>,
    pub status: TrainerStatus,
    /// KKT report of the final restricted program.
    pub kkt: KktReport,
    /// Largest violation of any row (or block) of the full program at the
    /// returned point.
    pub full_residual: f64,
    pub rounds: usize,
    pub working_rows: usize,
}

#[derive(Clone, Debug)]
pub struct TrainerOptions {
    /// Violation threshold of row generation.
    pub tol: f64,
    pub max_rounds: usize,
}

impl Default for TrainerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_rounds: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Asl,
    /// ASL with `d ≡ 0`.
    Suboptimality,
}

/// Trainer configuration as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub loss: LossKind,
    pub kappa: f64,
    pub regularizer: Regularizer,
    pub distance: DistanceKind,
    pub theta_set: ThetaSet,
    pub hinge: bool,
    pub penalize_y: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Asl,
            kappa: 0.001,
            regularizer: Regularizer::HalfSqL2,
            distance: DistanceKind::Euclidean,
            theta_set: ThetaSet::All,
            hinge: false,
            penalize_y: false,
        }
    }
}

impl TrainerConfig {
    /// Distance kind after applying `loss`.
    pub fn effective_distance(&self) -> DistanceKind {
        match self.loss {
            LossKind::Asl => self.distance,
            LossKind::Suboptimality => DistanceKind::Zero,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(crate::Error::Config(format!("kappa must be finite and >= 0, got {}", self.kappa)));
        }
        if self.distance == DistanceKind::Custom {
            return Err(crate::Error::Config("custom distances cannot be configured from JSON".into()));
        }
        Ok(())
    }
}
