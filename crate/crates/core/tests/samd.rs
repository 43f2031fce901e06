use invopt::losses::{Batch, EmpiricalObjective, Regularizer};
use invopt::model::{binary_points, IdentityFeatures};
use invopt::rng::{stream, STREAM_MISC, STREAM_NOISE};
use invopt::samd::{
    lift_l1_to_simplex, samd_train, verify_rate, EpsSchedule, MirrorMap, RateProblem, SamdConfig, StepRule,
};
use invopt::{Budget, DistanceFn, IODataset, IOInstance, Response, ThetaSet};
use rand::Rng;

/// Experts choose from `{0,1}^p` under `θ` perturbed by uniform noise of the
/// given amplitude.
fn experts(n: usize, p: usize, amplitude: f64, seed: u64) -> IODataset {
    let mut rng = stream(seed, STREAM_NOISE);
    let pts: Vec<Vec<i64>> = binary_points(p).collect();
    let theta: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { 1.0 } else { -0.5 }).collect();
    let instances = (0..n)
        .map(|_| {
            let noisy: Vec<f64> = theta.iter().map(|t| t + rng.random_range(-amplitude..=amplitude)).collect();
            let cost = |x: &Vec<i64>| x.iter().zip(&noisy).map(|(&v, t)| v as f64 * t).sum::<f64>();
            let best = pts.iter().min_by(|a, b| cost(a).total_cmp(&cost(b))).unwrap().clone();
            IOInstance::finite(pts.iter().cloned().map(Response::discrete).collect(), Response::discrete(best))
        })
        .collect();
    IODataset::new(instances, seed).unwrap()
}

#[test]
fn consistent_full_batch_reaches_zero_loss_within_the_bound() {
    let ds = experts(10, 3, 0.0, 1);
    let phi = IdentityFeatures::new(3);
    let d = DistanceFn::euclidean();
    let set = ThetaSet::Box { lo: -2.0, hi: 2.0 };
    let cfg = SamdConfig {
        steps: 2000,
        step_rule: StepRule::COverSqrtT { c: 1.0 },
        batch_size: None,
        theta_set: set,
        loss_every: Some(1),
        ..SamdConfig::default()
    };
    let (_, trace) = samd_train(&ds, &phi, &d, 0.0, Regularizer::None, &MirrorMap::Euclidean, &cfg).unwrap();
    // (R²/c + cG²)/√T <= 1e-3 with R² = ½·3·4² and the observed G².
    let bound_t = ((24.0 + trace.max_grad_sq) / 1e-3).powi(2);
    let reached = trace.records.iter().find(|r| r.loss.is_some_and(|l| l <= 1e-3)).map(|r| r.iter);
    assert!(reached.is_some_and(|t| (t as f64) <= bound_t), "reached at {reached:?}, bound {bound_t}");
}

#[test]
fn lift_examples_and_round_trip() {
    let lift = lift_l1_to_simplex(2, Regularizer::L1, &ThetaSet::All, 0.1).unwrap();
    assert_eq!(lift.lift(&[1.0, -2.0]), vec![1.0, 0.0, 0.0, 2.0]);
    assert_eq!(lift.recover(&[1.0, 0.0, 0.0, 2.0]), vec![1.0, -2.0]);
    let mut rng = stream(41, STREAM_MISC);
    for _ in 0..100 {
        let theta: Vec<f64> = (0..2).map(|_| rng.random_range(-5.0..5.0)).collect();
        assert_eq!(lift.recover(&lift.lift(&theta)), theta);
    }
}

#[test]
fn lifted_subgradient_is_the_pullback() {
    let ds = experts(6, 3, 1.0, 2);
    let phi = IdentityFeatures::new(3);
    let d = DistanceFn::l1();
    let obj = EmpiricalObjective::new(&phi, &d, 0.0, Regularizer::None);
    let lift = lift_l1_to_simplex(3, Regularizer::L1, &ThetaSet::All, 0.2).unwrap();
    let t = [0.31, 0.07, 0.52, 0.11, 0.43, 0.05];
    let theta = lift.recover(&t);
    let exact = Budget::exact();
    assert_eq!(lift.loss(&obj, &t, &ds, &exact).unwrap(), obj.loss(&theta, &ds, &exact).unwrap().value);
    let g = obj.subgradient(&theta, &ds, &Batch::Full, &exact).unwrap().vector;
    let gl = lift.subgradient(&obj, &t, &ds, &Batch::Full, &exact).unwrap().vector;
    assert_eq!(gl, lift.pullback(&g));
    // Central differences in both coordinates agree with the two gradients.
    let h = 1e-7;
    for j in 0..3 {
        let mut up = theta.clone();
        let mut dn = theta.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (obj.loss(&up, &ds, &exact).unwrap().value - obj.loss(&dn, &ds, &exact).unwrap().value) / (2.0 * h);
        assert!((fd - g[j]).abs() <= 1e-6);
    }
    for j in 0..6 {
        let mut up = t.to_vec();
        let mut dn = t.to_vec();
        up[j] += h;
        dn[j] -= h;
        let fd = (lift.loss(&obj, &up, &ds, &exact).unwrap() - lift.loss(&obj, &dn, &ds, &exact).unwrap()) / (2.0 * h);
        assert!((fd - gl[j]).abs() <= 1e-6);
    }
}

#[test]
fn seeded_twin_runs_are_bitwise_identical() {
    let ds = experts(20, 3, 1.0, 3);
    let phi = IdentityFeatures::new(3);
    let d = DistanceFn::l1();
    let cfg = SamdConfig { steps: 300, seed: 9, loss_every: Some(10), ..SamdConfig::default() };
    let run = || {
        let (theta, trace) = samd_train(&ds, &phi, &d, 0.01, Regularizer::L1, &MirrorMap::Euclidean, &cfg).unwrap();
        let mut csv = Vec::new();
        trace.write_csv(&mut csv).unwrap();
        (theta.to_vec(), csv, trace.snapshots)
    };
    assert_eq!(run(), run());
}

#[test]
fn entropic_iterates_stay_in_the_lifted_simplex() {
    let ds = experts(20, 3, 1.0, 4);
    let phi = IdentityFeatures::new(3);
    let d = DistanceFn::l1();
    let kappa_tilde = 0.25;
    let cfg = SamdConfig { steps: 500, snapshot_stride: Some(1), ..SamdConfig::default() };
    let (_, trace) = samd_train(&ds, &phi, &d, 0.01, Regularizer::L1, &MirrorMap::EntropicSimplex { kappa_tilde }, &cfg).unwrap();
    assert_eq!(trace.snapshots.len(), 500);
    for s in &trace.snapshots {
        assert!(s.lifted.iter().all(|&v| v > 0.0));
        assert!(kappa_tilde * s.lifted.iter().sum::<f64>() <= 1.0 + 1e-9);
    }
}

#[test]
fn harmonic_eps_schedule_keeps_the_root_t_rate() {
    let ds = experts(40, 3, 2.0, 1);
    let phi = IdentityFeatures::new(3);
    let d = DistanceFn::l1();
    let problem = RateProblem { ds: &ds, phi: &phi, d: &d, kappa: 0.0, regularizer: Regularizer::None, theta_set: ThetaSet::All };
    let cfg = SamdConfig {
        step_rule: StepRule::COverSqrtT { c: 2.8 },
        eps: EpsSchedule::Harmonic { eps0: 0.5 },
        checkpoints: vec![100, 1000, 10_000],
        seed: 7,
        ..SamdConfig::default()
    };
    let r = verify_rate(&cfg, &problem, 10).unwrap();
    assert!(r.within_bound);
    // Subtract the (1/T)Σε_t term before fitting the slope.
    let pts: Vec<(f64, f64)> = r
        .checkpoints
        .iter()
        .map(|c| {
            let t = c.steps as f64;
            let eps_term = 0.5 * (1..=c.steps).map(|k| 1.0 / k as f64).sum::<f64>() / t;
            (t.ln(), (c.mean_gap - eps_term).max(1e-12).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}, gaps {:?}", r.checkpoints.iter().map(|c| c.mean_gap).collect::<Vec<_>>());
}
