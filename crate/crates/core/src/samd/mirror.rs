use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, norm_inf};
use crate::losses::{Batch, EmpiricalObjective, Regularizer, SubgradientReport};
use crate::model::{Budget, DistanceFn, FeatureMap, IODataset, ThetaSet};
use crate::reformulate::train_asl_enumerated;
use crate::{Error, Result};

/// Geometry of the mirror step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MirrorMap {
    /// `ω = ½‖·‖₂²`: projected subgradient steps.
    Euclidean,
    /// `ω = Σ θ_j log θ_j` on `{θ̃ >= 0 : κ̃‖θ̃‖₁ <= 1}`: exponentiated steps.
    EntropicSimplex { kappa_tilde: f64 },
}

impl MirrorMap {
    /// Norm dual to the one `ω` is strongly convex in.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        match self {
            MirrorMap::Euclidean => norm2(g),
            MirrorMap::EntropicSimplex { .. } => norm_inf(g),
        }
    }
}

/// `θ̃ ← θ̃ ⊙ exp(−η g)`, rescaled onto `κ̃‖θ̃‖₁ = 1` when it leaves the budget.
pub fn exponentiated_step(theta: &mut [f64], g: &[f64], eta: f64, kappa_tilde: f64) {
    // Shifting the exponent by a constant only rescales w; do it for range.
    let shift = g.iter().map(|&v| -eta * v).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    for (t, &gi) in theta.iter_mut().zip(g) {
        *t *= (-eta * gi - shift).exp();
    }
    let mass: f64 = theta.iter().sum::<f64>() * kappa_tilde;
    let scale = shift.exp();
    if mass * scale > 1.0 {
        theta.iter_mut().for_each(|t| *t /= mass);
    } else {
        theta.iter_mut().for_each(|t| *t *= scale);
    }
}

/// ℓ1-regularized problem rewritten over a scaled simplex.
///
/// For `Θ = R^p` the variable is `θ̃ = (θ⁺, θ⁻) ∈ R^{2p}` with `θ = [I −I]θ̃`;
/// for the nonnegative orthant it is `θ` itself. The lifted domain is
/// `{θ̃ >= 0 : κ̃‖θ̃‖₁ <= 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Lift {
    pub p: usize,
    pub kappa_tilde: f64,
    /// Whether θ̃ carries the `θ⁻` block.
    pub split: bool,
}

pub fn lift_l1_to_simplex(
    p: usize,
    regularizer: Regularizer,
    theta_set: &ThetaSet,
    kappa_tilde: f64,
) -> Result<L1Lift> {
    if !matches!(regularizer, Regularizer::L1 | Regularizer::None) {
        return Err(Error::Unsupported("the simplex lift needs R = ‖·‖₁ (or no regularizer)".into()));
    }
    if !(kappa_tilde > 0.0) || !kappa_tilde.is_finite() {
        return Err(Error::Invalid(format!("κ̃ must be positive, got {kappa_tilde}")));
    }
    let split = match theta_set {
        ThetaSet::All => true,
        ThetaSet::NonnegOrthant => false,
        other => {
            return Err(Error::Unsupported(format!(
                "simplex lift takes Θ = all or nonneg_orthant, got {other:?}"
            )))
        }
    };
    Ok(L1Lift { p, kappa_tilde, split })
}

impl L1Lift {
    pub fn dim(&self) -> usize {
        if self.split {
            2 * self.p
        } else {
            self.p
        }
    }

    /// `θ = [I −I]θ̃`.
    pub fn recover(&self, t: &[f64]) -> Vec<f64> {
        if self.split {
            (0..self.p).map(|j| t[j] - t[self.p + j]).collect()
        } else {
            t.to_vec()
        }
    }

    /// `θ̃ = (max(θ, 0), max(−θ, 0))`.
    pub fn lift(&self, theta: &[f64]) -> Vec<f64> {
        if self.split {
            theta
                .iter()
                .map(|v| v.max(0.0))
                .chain(theta.iter().map(|v| (-v).max(0.0)))
                .collect()
        } else {
            theta.to_vec()
        }
    }

    /// `[I −I]ᵀ g`.
    pub fn pullback(&self, g: &[f64]) -> Vec<f64> {
        if self.split {
            g.iter().copied().chain(g.iter().map(|v| -v)).collect()
        } else {
            g.to_vec()
        }
    }

    pub fn in_domain(&self, t: &[f64], tol: f64) -> bool {
        t.iter().all(|&v| v > 0.0) && self.kappa_tilde * t.iter().sum::<f64>() <= 1.0 + tol
    }

    /// Strictly positive starting point with `κ̃‖θ̃‖₁ = 1`.
    pub fn center(&self) -> Vec<f64> {
        let d = self.dim();
        vec![1.0 / (self.kappa_tilde * d as f64); d]
    }

    pub fn loss(&self, obj: &EmpiricalObjective<'_>, t: &[f64], ds: &IODataset, budget: &Budget) -> Result<f64> {
        Ok(obj.loss(&self.recover(t), ds, budget)?.value)
    }

    pub fn subgradient(
        &self,
        obj: &EmpiricalObjective<'_>,
        t: &[f64],
        ds: &IODataset,
        batch: &Batch,
        budget: &Budget,
    ) -> Result<SubgradientReport> {
        let mut r = obj.subgradient(&self.recover(t), ds, batch, budget)?;
        r.vector = self.pullback(&r.vector);
        Ok(r)
    }
}

/// `κ̃ = 1/‖θ*‖₁` for the minimizer `θ*` of the ℓ1-regularized problem, so that
/// `θ*` lies in the lifted domain. Fails when `θ* = 0`.
pub fn calibrate_kappa_tilde(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    kappa: f64,
    theta_set: &ThetaSet,
) -> Result<f64> {
    let sol = train_asl_enumerated(ds, phi, d, kappa, Regularizer::L1, theta_set, false)?;
    let n1: f64 = sol.theta.iter().map(|v| v.abs()).sum();
    if n1 <= 1e-12 {
        return Err(Error::Invalid("the ℓ1-regularized minimizer is 0; κ̃ is undefined".into()));
    }
    Ok(1.0 / n1)
}
