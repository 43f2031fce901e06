use invopt::linalg::{dot, DenseMatrix};
use invopt::losses::{asl, asl_hinge, empirical_loss, gpl, suboptimality, Batch, EmpiricalObjective, Regularizer};
use invopt::model::{binary_points, IdentityFeatures};
use invopt::reformulate::{tu_asl_lp, tu_inner_rewrite};
use invopt::rng::{stream, STREAM_MISC};
use invopt::{Budget, DistanceFn, IODataset, IOInstance, Response};
use proptest::prelude::*;
use rand::Rng;

fn cube(n: usize) -> Vec<Response> {
    binary_points(n).map(Response::discrete).collect()
}

/// Instance over a nonempty subset of `{0,1}^n` given by a bit mask, with
/// `x̂` the `pick`-th kept point.
fn masked_instance(n: usize, mask: u64, pick: usize) -> Option<IOInstance> {
    let set: Vec<Response> = cube(n).into_iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, r)| r).collect();
    if set.is_empty() {
        return None;
    }
    let x_hat = set[pick % set.len()].clone();
    Some(IOInstance::finite(set, x_hat))
}

fn distance(k: u8) -> DistanceFn {
    match k % 4 {
        0 => DistanceFn::l1(),
        1 => DistanceFn::euclidean(),
        2 => DistanceFn::hamming(),
        _ => DistanceFn::zero(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn asl_is_a_nonnegative_upper_bound_of_gpl(
        mask in 1u64..(1 << 8), pick in 0usize..8, dk in 0u8..4,
        theta in proptest::collection::vec(-3.0f64..3.0, 3),
    ) {
        let inst = masked_instance(3, mask, pick).unwrap();
        let phi = IdentityFeatures::new(3);
        let d = distance(dk);
        let l = asl(&theta, &inst, &phi, &d, &Budget::exact()).unwrap().value;
        prop_assert!(l >= -1e-12);
        prop_assert!(gpl(&theta, &inst, &phi, &d).unwrap() <= l + 1e-9);
        prop_assert!(asl_hinge(&theta, &inst, &phi, &d, &Budget::exact()).unwrap().value >= l);
        prop_assert!(suboptimality(&theta, &inst, &phi, &Budget::exact()).unwrap().value <= l + 1e-12);
    }

    #[test]
    fn asl_is_convex_along_segments(
        mask in 1u64..(1 << 8), pick in 0usize..8, dk in 0u8..4, lam in 0.0f64..=1.0,
        a in proptest::collection::vec(-3.0f64..3.0, 3),
        b in proptest::collection::vec(-3.0f64..3.0, 3),
    ) {
        let inst = masked_instance(3, mask, pick).unwrap();
        let phi = IdentityFeatures::new(3);
        let d = distance(dk);
        let f = |t: &[f64]| asl(t, &inst, &phi, &d, &Budget::exact()).unwrap().value;
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
        prop_assert!(f(&mid) <= lam * f(&a) + (1.0 - lam) * f(&b) + 1e-9);
    }

    #[test]
    fn node_capped_scan_reports_its_gap(
        mask in 1u64..(1 << 16), pick in 0usize..16, cap in 1usize..6,
        theta in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let inst = masked_instance(4, mask, pick).unwrap();
        let phi = IdentityFeatures::new(4);
        let d = DistanceFn::l1();
        let exact = asl(&theta, &inst, &phi, &d, &Budget::exact()).unwrap();
        let capped = asl(&theta, &inst, &phi, &d, &Budget::nodes(cap)).unwrap();
        prop_assert!(capped.value <= exact.value + 1e-12);
        prop_assert!(capped.eps_bound >= exact.value - capped.value - 1e-12);
    }

    #[test]
    fn tu_affine_form_matches_direct_evaluation(
        xh in proptest::collection::vec(0i64..=1, 5),
        x in proptest::collection::vec(0i64..=1, 5),
        theta in proptest::collection::vec(-2.0f64..2.0, 5),
    ) {
        let (lin, c) = tu_inner_rewrite(&xh, &theta).unwrap();
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let direct: f64 = xh.iter().zip(&x).zip(&theta).map(|((&a, &b), t)| t * (a - b) as f64 + (a - b).abs() as f64).sum();
        prop_assert!((dot(&lin, &xf) + c - direct).abs() <= 1e-12);
    }
}

#[test]
fn tu_lp_equals_binary_enumeration_on_interval_matrix() {
    // Consecutive-ones rows are totally unimodular.
    let a = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]]);
    let b = vec![1.0, 2.0, 1.0];
    let mut rng = stream(21, STREAM_MISC);
    for _ in 0..50 {
        let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x_hat = vec![1, 0, 1, 0];
        let inst = IOInstance::binary_lp(a.clone(), b.clone(), x_hat.clone()).unwrap();
        let l = asl(&theta, &inst, &IdentityFeatures::new(4), &DistanceFn::l1(), &Budget::exact()).unwrap().value;
        assert!((tu_asl_lp(&a, &b, &x_hat, &theta).unwrap() - l).abs() <= 1e-9);
    }
}

#[test]
fn zero_theta_and_optimal_responses_give_zero_loss() {
    let phi = IdentityFeatures::new(2);
    let inst = IOInstance::finite(cube(2), Response::discrete(vec![1, 0]));
    assert_eq!(suboptimality(&[0.0, 0.0], &inst, &phi, &Budget::exact()).unwrap().value, 0.0);
    assert_eq!(suboptimality(&[-1.0, 0.0], &inst, &phi, &Budget::exact()).unwrap().value, 0.0);
    assert_eq!(gpl(&[0.0, 0.0], &inst, &phi, &DistanceFn::l1()).unwrap(), 0.0);
}

fn random_binary_dataset(seed: u64, size: usize, n: usize) -> IODataset {
    let mut rng = stream(seed, STREAM_MISC);
    let instances = (0..size)
        .map(|_| {
            let a: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let b: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..1.0)).collect();
            // x = 0 is always feasible since b >= 0.
            let x: Vec<i64> = vec![0; n];
            IOInstance::binary_lp(DenseMatrix::from_rows(&a), b, x).unwrap()
        })
        .collect();
    IODataset::new(instances, seed).unwrap()
}

#[test]
fn empirical_loss_is_regularizer_plus_mean() {
    let ds = random_binary_dataset(22, 5, 4);
    let phi = IdentityFeatures::new(4);
    let d = DistanceFn::l1();
    let theta = [0.3, -0.7, 1.1, -0.2];
    let report = empirical_loss(&theta, &ds, &phi, &d, 0.5, Regularizer::HalfSqL2, &Budget::exact()).unwrap();
    let mean: f64 = ds
        .instances
        .iter()
        .map(|i| asl(&theta, i, &phi, &d, &Budget::exact()).unwrap().value)
        .sum::<f64>()
        / 5.0;
    let expected = 0.5 * 0.5 * dot(&theta, &theta) + mean;
    assert!((report.value - expected).abs() <= 1e-12);
}

#[test]
fn stochastic_subgradients_are_unbiased() {
    let ds = random_binary_dataset(23, 8, 4);
    let phi = IdentityFeatures::new(4);
    let d = DistanceFn::l1();
    let obj = EmpiricalObjective::new(&phi, &d, 0.1, Regularizer::HalfSqL2);
    let theta = [0.4, -0.3, 0.9, -1.2];
    let full = obj.subgradient(&theta, &ds, &Batch::Full, &Budget::exact()).unwrap().vector;
    let mut rng = stream(24, STREAM_MISC);
    let samples: Vec<Vec<f64>> = (0..10_000)
        .map(|_| {
            let i = rng.random_range(0..ds.len());
            obj.subgradient(&theta, &ds, &Batch::Indices(vec![i]), &Budget::exact()).unwrap().vector
        })
        .collect();
    for j in 0..4 {
        let mean = samples.iter().map(|g| g[j]).sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|g| (g[j] - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        let se = (var / samples.len() as f64).sqrt();
        assert!((mean - full[j]).abs() <= 3.0 * se + 1e-12, "coordinate {j}: {mean} vs {} (se {se})", full[j]);
    }
}
