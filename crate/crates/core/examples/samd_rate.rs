//! Convergence-rate check of SAMD against the guaranteed bounds on a small
//! finite instance with noisy expert decisions.

use invopt::losses::Regularizer;
use invopt::model::{binary_points, IOInstance, IdentityFeatures};
use invopt::rng::{stream, STREAM_NOISE};
use invopt::samd::{verify_rate, RateProblem, SamdConfig, StepRule};
use invopt::{DistanceFn, IODataset, Response, ThetaSet};
use rand::Rng;

/// Experts choose from `{0,1}^p` under a perturbed cost vector.
fn noisy_dataset(n: usize, p: usize, seed: u64) -> IODataset {
    let mut rng = stream(seed, STREAM_NOISE);
    let pts: Vec<Vec<i64>> = binary_points(p).collect();
    let theta: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { 1.0 } else { -0.5 }).collect();
    let instances = (0..n)
        .map(|_| {
            let noisy: Vec<f64> = theta.iter().map(|t| t + rng.random_range(-2.0..=2.0)).collect();
            let cost = |x: &Vec<i64>| x.iter().zip(&noisy).map(|(&v, t)| v as f64 * t).sum::<f64>();
            let best = pts.iter().min_by(|a, b| cost(a).total_cmp(&cost(b))).unwrap().clone();
            IOInstance::finite(pts.iter().cloned().map(Response::discrete).collect(), Response::discrete(best))
        })
        .collect();
    IODataset::new(instances, seed).unwrap()
}

fn main() -> invopt::Result<()> {
    let ds = noisy_dataset(40, 3, 1);
    let phi = IdentityFeatures::new(3);
    let d = DistanceFn::l1();
    let checkpoints = vec![100, 1000, 10_000];
    for (label, kappa, regularizer, rule) in [
        ("convex, c/sqrt(t)", 0.0, Regularizer::None, StepRule::COverSqrtT { c: 2.8 }),
        ("strongly convex, 2/(a(t+1))", 0.5, Regularizer::HalfSqL2, StepRule::TwoOverAlphaT { alpha: 0.5 }),
    ] {
        let problem = RateProblem { ds: &ds, phi: &phi, d: &d, kappa, regularizer, theta_set: ThetaSet::All };
        let cfg = SamdConfig { step_rule: rule, checkpoints: checkpoints.clone(), seed: 7, ..SamdConfig::default() };
        let report = verify_rate(&cfg, &problem, 10)?;
        println!("{label}: f* = {:.6}, Θ restricted to {:?}", report.f_star, report.restriction);
        for c in &report.checkpoints {
            println!("  T = {:>6}  mean gap = {:.3e}  bound = {:.3e}", c.steps, c.mean_gap, c.bound);
        }
        println!("  log-log slope = {:.3}, below bound = {}", report.slope, report.within_bound);
    }
    Ok(())
}
