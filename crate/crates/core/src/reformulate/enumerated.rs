use rayon::prelude::*;

use crate::linalg::{dot, sub};
use crate::losses::Regularizer;
use crate::model::{CostVector, DistanceFn, FeatureMap, IODataset, ThetaSet};
use crate::{Error, Result};

use super::master::{Master, MasterSolution, Row};
use super::{TrainerOptions, TrainerSolution, TrainerStatus};

/// Rows `(φ(x̂) − φ(x), d(x̂, x))` of one instance in enumeration order.
type InstanceRows = Vec<(Vec<f64>, f64)>;

fn enumerate_rows(ds: &IODataset, phi: &dyn FeatureMap, d: &DistanceFn) -> Result<Vec<InstanceRows>> {
    ds.check_dimension(phi)?;
    ds.instances
        .par_iter()
        .map(|inst| {
            let xs = inst.oracle.enumerate(&inst.signal)?;
            if xs.is_empty() {
                return Err(Error::Infeasible);
            }
            let f_hat = phi.eval(&inst.signal, &inst.response);
            Ok(xs
                .iter()
                .map(|x| (sub(&f_hat, &phi.eval(&inst.signal, x)), d.eval(&inst.response, x)))
                .collect())
        })
        .collect()
}

fn row_block(i: usize, j: usize, (a, dist): &(Vec<f64>, f64)) -> Row {
    Row {
        key: (i, j, 0, 0),
        theta: a.clone(),
        rhs: -dist,
    }
}

/// Most violated row per instance: `(i, j, violation)`.
fn separate(rows: &[InstanceRows], theta: &[f64], beta: &[f64], tol: f64) -> Vec<(usize, usize, f64)> {
    rows.par_iter()
        .enumerate()
        .filter_map(|(i, rs)| {
            let (j, v) = rs
                .iter()
                .enumerate()
                .map(|(j, (a, dist))| (j, dot(a, theta) + dist - beta[i]))
                .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            (v > tol * (1.0 + beta[i].abs())).then_some((i, j, v))
        })
        .collect()
}

/// Row generation until every enumerated row holds.
fn solve_rows(
    rows: &[InstanceRows],
    mut master: Master,
    opts: &TrainerOptions,
) -> Result<(MasterSolution, TrainerStatus, usize, usize)> {
    // Start from the maximizer at θ = 0 so every β_i is bounded below.
    for (i, rs) in rows.iter().enumerate() {
        let j = rs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (j, r)| if r.1 > acc.1 { (j, r.1) } else { acc })
            .0;
        master.insert(row_block(i, j, &rs[j]));
    }
    let mut last = None;
    for round in 1..=opts.max_rounds {
        let sol = master.solve()?;
        let cuts = separate(rows, &sol.theta, &sol.beta, opts.tol);
        if cuts.is_empty() {
            if sol.at_artificial {
                return Err(Error::Unbounded);
            }
            return Ok((sol, TrainerStatus::Optimal, round, master.rows.len()));
        }
        for (i, j, _) in cuts {
            master.insert(row_block(i, j, &rows[i][j]));
        }
        last = Some(sol);
    }
    let sol = last.expect("at least one round");
    Ok((sol, TrainerStatus::IterationLimit, opts.max_rounds, master.rows.len()))
}

fn full_residual(rows: &[InstanceRows], theta: &[f64], beta: &[f64], hinge: bool) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, rs) in rows.iter().enumerate() {
        for (a, dist) in rs {
            worst = worst.max(dot(a, theta) + dist - beta[i]);
        }
        if hinge {
            worst = worst.max(-beta[i]);
        }
    }
    worst
}

/// Epigraph program of the regularized empirical ASL over enumerable sets.
///
/// `hinge` adds `β_i >= 0`, which only matters when some `x̂_i ∉ X(ŝ_i)`.
#[allow(clippy::too_many_arguments)]
pub fn train_asl_enumerated(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    kappa: f64,
    regularizer: Regularizer,
    theta_set: &ThetaSet,
    hinge: bool,
) -> Result<TrainerSolution> {
    train_asl_enumerated_with(ds, phi, d, kappa, regularizer, theta_set, hinge, &TrainerOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn train_asl_enumerated_with(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    kappa: f64,
    regularizer: Regularizer,
    theta_set: &ThetaSet,
    hinge: bool,
    opts: &TrainerOptions,
) -> Result<TrainerSolution> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Invalid(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    let rows = enumerate_rows(ds, phi, d)?;
    let p = phi.dim();
    let master = Master::new(p, ds.len(), kappa, regularizer, theta_set.clone(), hinge);
    let (sol, status, rounds, working) = solve_rows(&rows, master, opts)?;
    Ok(TrainerSolution {
        full_residual: full_residual(&rows, &sol.theta, &sol.beta, hinge),
        theta: CostVector::new(sol.theta)?,
        objective: sol.objective,
        slacks: sol.beta,
        duals: None,
        status,
        kkt: sol.kkt,
        rounds,
        working_rows: working,
    })
}

/// Suboptimality loss with `‖θ‖_∞ = 1`: for each of the `2p` facets
/// `θ_k = ±1` solve `min (1/N)Σβ_i` over `−1 <= θ <= 1`, `θ ∈ Θ`, `β >= 0` and
/// keep the best facet (first one on ties).
pub fn train_suboptimality_facets(ds: &IODataset, phi: &dyn FeatureMap, theta_set: &ThetaSet) -> Result<TrainerSolution> {
    let rows = enumerate_rows(ds, phi, &DistanceFn::zero())?;
    let p = phi.dim();
    let opts = TrainerOptions::default();
    let mut best: Option<TrainerSolution> = None;
    for k in 0..p {
        for sign in [1.0, -1.0] {
            let mut master = Master::new(p, ds.len(), 0.0, Regularizer::None, theta_set.clone(), true);
            master.theta_bounds = Some(vec![(-1.0, 1.0); p]);
            let mut e = vec![0.0; p];
            e[k] = 1.0;
            master.theta_eqs.push((e, sign));
            let (sol, status, rounds, working) = match solve_rows(&rows, master, &opts) {
                Ok(r) => r,
                Err(Error::Infeasible) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_some_and(|b| b.objective <= sol.objective) {
                continue;
            }
            best = Some(TrainerSolution {
                full_residual: full_residual(&rows, &sol.theta, &sol.beta, true),
                theta: CostVector::new(sol.theta)?,
                objective: sol.objective,
                slacks: sol.beta,
                duals: None,
                status,
                kkt: sol.kkt,
                rounds,
                working_rows: working,
            });
        }
    }
    best.ok_or(Error::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::empirical_loss;
    use crate::model::{binary_points, Budget, IOInstance, IdentityFeatures, Response};

    fn square(x_hat: Vec<i64>) -> IOInstance {
        IOInstance::finite(binary_points(2).map(Response::discrete).collect(), Response::discrete(x_hat))
    }

    #[test]
    fn single_point_sets_give_regularizer_minimizer() {
        let inst = IOInstance::finite(vec![Response::discrete(vec![1, 0])], Response::discrete(vec![1, 0]));
        let ds = IODataset::new(vec![inst], 0).unwrap();
        let phi = IdentityFeatures::new(2);
        let sol = train_asl_enumerated(&ds, &phi, &DistanceFn::euclidean(), 0.001, Regularizer::HalfSqL2, &ThetaSet::All, false)
            .unwrap();
        assert!(sol.theta.iter().all(|v| v.abs() < 1e-9));
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn objective_matches_loss_recomputation() {
        let ds = IODataset::new(vec![square(vec![0, 0]), square(vec![1, 0]), square(vec![0, 1])], 0).unwrap();
        let phi = IdentityFeatures::new(2);
        let d = DistanceFn::euclidean();
        for (kappa, reg) in [(0.001, Regularizer::HalfSqL2), (0.1, Regularizer::L1), (0.0, Regularizer::None)] {
            let sol = train_asl_enumerated(&ds, &phi, &d, kappa, reg, &ThetaSet::All, false).unwrap();
            let loss = empirical_loss(&sol.theta, &ds, &phi, &d, kappa, reg, &Budget::exact()).unwrap();
            assert!((sol.objective - loss.value).abs() < 1e-6, "{reg:?}: {} vs {}", sol.objective, loss.value);
            for (b, l) in sol.slacks.iter().zip(loss.per_instance.unwrap()) {
                assert!((b - l).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn heavy_regularization_pins_theta_to_zero() {
        let ds = IODataset::new(vec![square(vec![0, 0]), square(vec![1, 1])], 0).unwrap();
        let phi = IdentityFeatures::new(2);
        let d = DistanceFn::euclidean();
        let sol = train_asl_enumerated(&ds, &phi, &d, 1e6, Regularizer::HalfSqL2, &ThetaSet::All, false).unwrap();
        assert!(sol.theta.iter().all(|v| v.abs() < 1e-5));
        let at_zero = empirical_loss(&[0.0, 0.0], &ds, &phi, &d, 0.0, Regularizer::None, &Budget::exact())
            .unwrap()
            .value;
        assert!((sol.objective - at_zero).abs() < 1e-5);
    }

    #[test]
    fn facets_one_dimensional() {
        // Expert picks 0 from {0, 1}: the cost must increase in x.
        let inst = IOInstance::finite(
            vec![Response::discrete(vec![0]), Response::discrete(vec![1])],
            Response::discrete(vec![0]),
        );
        let ds = IODataset::new(vec![inst], 0).unwrap();
        let sol = train_suboptimality_facets(&ds, &IdentityFeatures::new(1), &ThetaSet::All).unwrap();
        assert_eq!(sol.theta[0], 1.0);
        assert_eq!(sol.objective, 0.0);
    }
}
