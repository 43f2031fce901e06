//! Suboptimality-type losses and their subgradients.
//!
//! For an instance `(ŝ, x̂)` the augmented suboptimality loss is
//!
//! ```text
//! ℓ_θ(ŝ, x̂) = max_{x ∈ X(ŝ)} <θ, φ(ŝ, x̂) − φ(ŝ, x)> + d(x̂, x)
//! ```
//!
//! which is convex in θ as a pointwise maximum of affine functions; by
//! Danskin's theorem `φ(ŝ, x̂) − φ(ŝ, x*)` is a subgradient for any maximizer
//! `x*`, and an `ε`-subgradient when `x*` is only `ε`-optimal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, sub};
use crate::model::{Budget, DistanceFn, FeatureMap, IODataset, IOInstance, Response};
use crate::{Error, Result};

/// Argmin-set membership tolerance of the predictability loss.
pub const TAU_ARGMIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    #[default]
    None,
    /// `½‖θ‖₂²`
    HalfSqL2,
    /// `‖θ‖₁`
    L1,
}

impl Regularizer {
    pub fn value(&self, theta: &[f64]) -> f64 {
        match self {
            Regularizer::None => 0.0,
            Regularizer::HalfSqL2 => 0.5 * dot(theta, theta),
            Regularizer::L1 => theta.iter().map(|v| v.abs()).sum(),
        }
    }

    /// A subgradient; at kinks of `‖·‖₁` the zero element is chosen.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            Regularizer::None => vec![0.0; theta.len()],
            Regularizer::HalfSqL2 => theta.to_vec(),
            Regularizer::L1 => theta
                .iter()
                .map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LossReport {
    pub value: f64,
    /// Maximizing response (single-instance losses); empty for dataset losses.
    pub argmax_response: Response,
    pub eps_bound: f64,
    pub per_instance: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct SubgradientReport {
    pub vector: Vec<f64>,
    pub eps: f64,
    pub sampled_indices: Vec<usize>,
    /// Inner maximizers, one per sampled index.
    pub witnesses: Vec<Response>,
}

pub fn asl(
    theta: &[f64],
    inst: &IOInstance,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    budget: &Budget,
) -> Result<LossReport> {
    let r = inst
        .oracle
        .inner_max(&inst.signal, &inst.response, theta, phi, d, budget)?;
    Ok(LossReport {
        value: r.value,
        argmax_response: r.response,
        eps_bound: r.eps,
        per_instance: None,
    })
}

/// ASL with `d ≡ 0`.
pub fn suboptimality(
    theta: &[f64],
    inst: &IOInstance,
    phi: &dyn FeatureMap,
    budget: &Budget,
) -> Result<LossReport> {
    asl(theta, inst, phi, &DistanceFn::zero(), budget)
}

/// `max{0, ASL}`; only differs from the ASL on infeasible responses.
pub fn asl_hinge(
    theta: &[f64],
    inst: &IOInstance,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    budget: &Budget,
) -> Result<LossReport> {
    let mut r = asl(theta, inst, phi, d, budget)?;
    if r.value < 0.0 {
        r.value = 0.0;
        r.argmax_response = inst.response.clone();
    }
    Ok(r)
}

/// Generalized predictability loss: distance from `x̂` to the nearest
/// minimizer of `<θ, φ(ŝ, ·)>`.
pub fn gpl(theta: &[f64], inst: &IOInstance, phi: &dyn FeatureMap, d: &DistanceFn) -> Result<f64> {
    let xs = inst.oracle.enumerate(&inst.signal)?;
    let costs: Vec<f64> = xs
        .iter()
        .map(|x| dot(theta, &phi.eval(&inst.signal, x)))
        .collect();
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    xs.iter()
        .zip(&costs)
        .filter(|(_, &c)| c <= best + TAU_ARGMIN)
        .map(|(x, _)| d.eval(&inst.response, x))
        .reduce(f64::min)
        .ok_or(Error::Infeasible)
}

/// Regularized empirical ASL `κ R(θ) + (1/N) Σ ℓ_θ(ŝ_i, x̂_i)`.
#[derive(Clone)]
pub struct EmpiricalObjective<'a> {
    pub phi: &'a dyn FeatureMap,
    pub d: &'a DistanceFn,
    pub kappa: f64,
    pub regularizer: Regularizer,
    /// Use `max{0, ℓ}` per instance.
    pub hinge: bool,
}

#[derive(Clone, Debug)]
pub enum Batch {
    Full,
    Indices(Vec<usize>),
}

/// Per-instance inner maximization results for a set of indices.
struct Terms {
    values: Vec<f64>,
    eps: Vec<f64>,
    witnesses: Vec<Response>,
}

impl<'a> EmpiricalObjective<'a> {
    pub fn new(phi: &'a dyn FeatureMap, d: &'a DistanceFn, kappa: f64, regularizer: Regularizer) -> Self {
        Self {
            phi,
            d,
            kappa,
            regularizer,
            hinge: false,
        }
    }

    pub fn with_hinge(mut self, hinge: bool) -> Self {
        self.hinge = hinge;
        self
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::Invalid(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if theta.len() != self.phi.dim() {
            return Err(Error::DimensionMismatch {
                context: "cost vector vs feature map",
                expected: self.phi.dim(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    fn terms(&self, theta: &[f64], ds: &IODataset, idx: &[usize], budget: &Budget) -> Result<Terms> {
        let eval = |&i: &usize| -> Result<(f64, f64, Response)> {
            let inst = ds
                .instances
                .get(i)
                .ok_or_else(|| Error::Invalid(format!("batch index {i} out of range")))?;
            let r = if self.hinge {
                asl_hinge(theta, inst, self.phi, self.d, budget)?
            } else {
                asl(theta, inst, self.phi, self.d, budget)?
            };
            Ok((r.value, r.eps_bound, r.argmax_response))
        };
        // Parallel evaluation, reduction in index order.
        let results: Vec<Result<(f64, f64, Response)>> = if idx.len() >= 16 {
            idx.par_iter().map(eval).collect()
        } else {
            idx.iter().map(eval).collect()
        };
        let mut t = Terms {
            values: Vec::with_capacity(idx.len()),
            eps: Vec::with_capacity(idx.len()),
            witnesses: Vec::with_capacity(idx.len()),
        };
        for r in results {
            let (v, e, w) = r?;
            t.values.push(v);
            t.eps.push(e);
            t.witnesses.push(w);
        }
        Ok(t)
    }

    pub fn loss(&self, theta: &[f64], ds: &IODataset, budget: &Budget) -> Result<LossReport> {
        self.check(theta)?;
        let idx: Vec<usize> = (0..ds.len()).collect();
        let t = self.terms(theta, ds, &idx, budget)?;
        let n = ds.len() as f64;
        let mean = t.values.iter().sum::<f64>() / n;
        Ok(LossReport {
            value: self.kappa * self.regularizer.value(theta) + mean,
            argmax_response: Response::default(),
            eps_bound: t.eps.iter().sum::<f64>() / n,
            per_instance: Some(t.values),
        })
    }

    pub fn subgradient(
        &self,
        theta: &[f64],
        ds: &IODataset,
        batch: &Batch,
        budget: &Budget,
    ) -> Result<SubgradientReport> {
        self.check(theta)?;
        let idx: Vec<usize> = match batch {
            Batch::Full => (0..ds.len()).collect(),
            Batch::Indices(v) => v.clone(),
        };
        if idx.is_empty() {
            return Err(Error::Invalid("subgradient batch must be non-empty".into()));
        }
        let t = self.terms(theta, ds, &idx, budget)?;
        let mut g = self.regularizer.gradient(theta);
        for v in &mut g {
            *v *= self.kappa;
        }
        let w = 1.0 / idx.len() as f64;
        for (k, &i) in idx.iter().enumerate() {
            let inst = &ds.instances[i];
            if self.hinge && t.values[k] <= 0.0 && t.witnesses[k] == inst.response {
                continue;
            }
            let diff = sub(
                &self.phi.eval(&inst.signal, &inst.response),
                &self.phi.eval(&inst.signal, &t.witnesses[k]),
            );
            crate::linalg::axpy(w, &diff, &mut g);
        }
        Ok(SubgradientReport {
            vector: g,
            eps: t.eps.iter().sum::<f64>() * w,
            sampled_indices: idx,
            witnesses: t.witnesses,
        })
    }
}

pub fn empirical_loss(
    theta: &[f64],
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    kappa: f64,
    regularizer: Regularizer,
    budget: &Budget,
) -> Result<LossReport> {
    EmpiricalObjective::new(phi, d, kappa, regularizer).loss(theta, ds, budget)
}

#[allow(clippy::too_many_arguments)]
pub fn subgradient(
    theta: &[f64],
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    kappa: f64,
    regularizer: Regularizer,
    batch: &Batch,
    budget: &Budget,
) -> Result<SubgradientReport> {
    EmpiricalObjective::new(phi, d, kappa, regularizer).subgradient(theta, ds, batch, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{binary_points, IdentityFeatures};

    fn square_instance(x_hat: Vec<i64>) -> IOInstance {
        IOInstance::finite(
            binary_points(2).map(Response::discrete).collect(),
            Response::discrete(x_hat),
        )
    }

    #[test]
    fn singleton_set_has_zero_loss() {
        let x = Response::discrete(vec![1, 0]);
        let inst = IOInstance::finite(vec![x.clone()], x);
        let r = asl(&[3.0, -1.0], &inst, &IdentityFeatures::new(2), &DistanceFn::l1(), &Budget::exact()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn square_example() {
        let inst = square_instance(vec![0, 0]);
        let phi = IdentityFeatures::new(2);
        let r = asl(&[1.0, 0.0], &inst, &phi, &DistanceFn::l1(), &Budget::exact()).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.argmax_response == Response::discrete(vec![0, 1]) || r.argmax_response == Response::discrete(vec![1, 1]));
        let inst = square_instance(vec![1, 0]);
        let sl = suboptimality(&[-1.0, 0.0], &inst, &phi, &Budget::exact()).unwrap();
        assert_eq!(sl.value, 0.0);
    }

    #[test]
    fn hinge_clips_infeasible_response() {
        // x̂ = (1,1) outside X = {(0,0)}; θ = (-0.15, -0.15), d = 0: ASL = -0.3.
        let inst = IOInstance::finite(vec![Response::discrete(vec![0, 0])], Response::discrete(vec![1, 1]));
        let phi = IdentityFeatures::new(2);
        let theta = [-0.15, -0.15];
        let raw = asl(&theta, &inst, &phi, &DistanceFn::zero(), &Budget::exact()).unwrap();
        assert!((raw.value + 0.3).abs() < 1e-15);
        let h = asl_hinge(&theta, &inst, &phi, &DistanceFn::zero(), &Budget::exact()).unwrap();
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn gpl_examples() {
        let inst = square_instance(vec![0, 0]);
        let phi = IdentityFeatures::new(2);
        assert_eq!(gpl(&[1.0, 1.0], &inst, &phi, &DistanceFn::l1()).unwrap(), 0.0);
        assert_eq!(gpl(&[0.0, 0.0], &inst, &phi, &DistanceFn::l1()).unwrap(), 0.0);
        assert_eq!(gpl(&[-1.0, 1.0], &inst, &phi, &DistanceFn::l1()).unwrap(), 1.0);
    }

    #[test]
    fn regularized_zero_loss_dataset() {
        let x = Response::discrete(vec![0, 0]);
        let ds = IODataset::new(vec![IOInstance::finite(vec![x.clone()], x)], 0).unwrap();
        let phi = IdentityFeatures::new(2);
        let r = empirical_loss(&[3.0, 4.0], &ds, &phi, &DistanceFn::l1(), 1.0, Regularizer::HalfSqL2, &Budget::exact()).unwrap();
        assert_eq!(r.value, 12.5);
    }
}
