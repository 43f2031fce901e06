use invopt::linalg::{dot, DenseMatrix};
use invopt::losses::asl;
use invopt::model::{IOInstance, MixedIntegerOracle, MixedLinearFeatures, MixedIntegerSignal};
use invopt::rng::{stream, STREAM_MISC};
use invopt::solvers::lp::{certify, solve_lp, LinearProgramSpec, LpStatus};
use invopt::solvers::qp::{certify_qp, solve_qp, QpSpec, QpStatus};
use invopt::{Budget, DistanceFn, DistanceKind, FeatureMap, FeasibleSetOracle, Response, Signal};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Textbook two-phase tableau simplex with Bland's rule for
/// `min cᵀx s.t. G x <= h, x >= 0`. Returns the optimal value.
fn textbook_simplex(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> Option<f64> {
    let (m, n) = (g.len(), c.len());
    // Columns: x (n), slacks (m), artificials (m). Rows with h < 0 are negated
    // and get an artificial; the others start with their slack basic.
    let cols = n + 2 * m;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    for i in 0..m {
        let sign = if h[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * g[i][j];
        }
        t[i][n + i] = sign;
        t[i][cols] = sign * h[i];
        if sign < 0.0 {
            t[i][n + m + i] = 1.0;
            basis[i] = n + m + i;
        } else {
            basis[i] = n + i;
        }
    }
    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            let reduced: Vec<f64> = (0..allowed)
                .map(|j| cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>())
                .collect();
            let Some(enter) = (0..allowed).find(|&j| reduced[j] < -1e-10 && !basis.contains(&j)) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][enter] > 1e-10 {
                    let r = t[i][cols] / t[i][enter];
                    if leave.is_none_or(|(l, best)| r < best - 1e-12 || (r <= best + 1e-12 && basis[i] < basis[l])) {
                        leave = Some((i, r));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            let piv = t[r][enter];
            for v in t[r].iter_mut() {
                *v /= piv;
            }
            for i in 0..m {
                if i != r && t[i][enter] != 0.0 {
                    let f = t[i][enter];
                    for j in 0..=cols {
                        t[i][j] -= f * t[r][j];
                    }
                }
            }
            basis[r] = enter;
        }
    };
    let mut phase1 = vec![0.0; cols];
    for v in phase1.iter_mut().skip(n + m) {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1, cols);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n + m).map(|i| t[i][cols]).sum();
    if infeas > 1e-8 {
        return None;
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n + m {
            if let Some(j) = (0..n + m).find(|&j| t[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                let piv = t[i][j];
                for v in t[i].iter_mut() {
                    *v /= piv;
                }
                for k in 0..m {
                    if k != i && t[k][j] != 0.0 {
                        let f = t[k][j];
                        for col in 0..=cols {
                            t[k][col] -= f * t[i][col];
                        }
                    }
                }
                basis[i] = j;
            }
        }
    }
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(c);
    if !run(&mut t, &mut basis, &phase2, n + m) {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][cols];
        }
    }
    Some(dot(c, &x))
}

/// Random `m × n` LP with box `[0, 5]`, feasible at a random interior point.
fn random_boxed_lp(rng: &mut ChaCha8Rng, m: usize, n: usize) -> LinearProgramSpec {
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut spec = LinearProgramSpec::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        spec.add_ineq(&row, dot(&row, &x0) + rng.random_range(0.0..0.5));
    }
    spec.bounds = vec![(0.0, 5.0); n];
    spec
}

#[test]
fn lp_matches_textbook_oracle_on_random_20x12() {
    let mut rng = stream(11, STREAM_MISC);
    for _ in 0..30 {
        let spec = random_boxed_lp(&mut rng, 20, 12);
        let sol = solve_lp(&spec).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let mut g = spec.ineq_matrix.to_rows();
        let mut h = spec.ineq_rhs.clone();
        for j in 0..12 {
            let mut e = vec![0.0; 12];
            e[j] = 1.0;
            g.push(e);
            h.push(5.0);
        }
        let oracle = textbook_simplex(&spec.objective, &g, &h).expect("oracle optimum");
        assert!((sol.objective - oracle).abs() <= 1e-7, "{} vs {oracle}", sol.objective);
        assert!(sol.kkt.max_residual() <= 1e-8);
    }
}

#[test]
fn lp_min_x_at_least_three() {
    let mut spec = LinearProgramSpec::new(vec![1.0]);
    spec.add_ineq(&[-1.0], -3.0);
    let sol = solve_lp(&spec).unwrap();
    assert!((sol.x[0] - 3.0).abs() < 1e-12);
    assert!((sol.ineq_duals[0] - 1.0).abs() < 1e-12);
}

#[test]
fn certify_recomputes_reported_residuals() {
    let mut rng = stream(12, STREAM_MISC);
    let spec = random_boxed_lp(&mut rng, 8, 5);
    let sol = solve_lp(&spec).unwrap();
    let (reduced, kkt) = certify(&spec, &sol.x, &sol.ineq_duals, &sol.eq_duals);
    assert!(kkt.max_residual() <= 1e-8);
    for (a, b) in reduced.iter().zip(&sol.reduced_costs) {
        assert!((a - b).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_kkt_and_weak_duality(seed in any::<u64>(), m in 1usize..12, n in 1usize..8) {
        let mut rng = stream(seed, STREAM_MISC);
        let spec = random_boxed_lp(&mut rng, m, n);
        let sol = solve_lp(&spec).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(sol.kkt.max_residual() <= 1e-8);
        prop_assert!(sol.kkt.dual_objective <= sol.objective + 1e-8);
        prop_assert!(sol.ineq_duals.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn lp_infeasible_box_is_reported(lo in 1.0f64..5.0) {
        let mut spec = LinearProgramSpec::new(vec![1.0, 1.0]);
        spec.add_ineq(&[1.0, 1.0], lo - 2.0);
        spec.bounds = vec![(lo, 10.0), (0.0, 10.0)];
        prop_assert_eq!(solve_lp(&spec).unwrap().status, LpStatus::Infeasible);
    }
}

#[test]
fn qp_projection_examples() {
    let mut spec = QpSpec::new(DenseMatrix::identity(3), vec![0.0; 3]);
    spec.add_ineq(&[1.0, 0.0, 0.0], -1.0);
    let sol = solve_qp(&spec).unwrap();
    assert_eq!(sol.status, QpStatus::Optimal);
    for (a, b) in sol.x.iter().zip([-1.0, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-10);
    }

    let mut spec = QpSpec::new(DenseMatrix::identity(2), vec![0.0; 2]);
    spec.add_ineq(&[-1.0, 0.0], -1.0);
    spec.add_ineq(&[0.0, -1.0], -1.0);
    let sol = solve_qp(&spec).unwrap();
    assert!((sol.x[0] - 1.0).abs() < 1e-10 && (sol.x[1] - 1.0).abs() < 1e-10);
}

#[test]
fn random_psd_qp_beats_sampled_feasible_points() {
    let mut rng = stream(13, STREAM_MISC);
    for trial in 0..5 {
        let n = 4;
        // Rank-deficient P on odd trials exercises the semidefinite path.
        let rank = if trial % 2 == 0 { n } else { 2 };
        let m: Vec<Vec<f64>> = (0..n).map(|_| (0..rank).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let p: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dot(&m[i], &m[j])).collect()).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut spec = QpSpec::new(DenseMatrix::from_rows(&p), q);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        for _ in 0..30 {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            spec.add_ineq(&row, dot(&row, &x0) + rng.random_range(0.0..1.0));
        }
        spec.bounds = vec![(-2.0, 2.0); n];
        let sol = solve_qp(&spec).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        let kkt = certify_qp(&spec, &sol.x, &sol.ineq_duals, &sol.eq_duals, &sol.lower_duals, &sol.upper_duals);
        assert!(kkt.max_residual() <= 1e-7, "trial {trial}: {kkt:?}");

        let feasible = |x: &[f64]| {
            spec.ineq_matrix.rows_iter().zip(&spec.ineq_rhs).all(|(r, &h)| dot(r, x) <= h)
                && x.iter().all(|v| v.abs() <= 2.0)
        };
        let mut best = spec.objective_value(&x0);
        let mut accepted = 0;
        for _ in 0..200_000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            if feasible(&x) {
                accepted += 1;
                best = best.min(spec.objective_value(&x));
            }
        }
        assert!(accepted > 0);
        assert!(sol.objective <= best + 1e-9, "trial {trial}: {} > sampled {best}", sol.objective);
    }
}

#[test]
fn mixed_integer_argmax_matches_grid_brute_force() {
    let mut rng = stream(14, STREAM_MISC);
    let (u, v) = (2, 2);
    let phi = MixedLinearFeatures::standard(u, v);
    let d = DistanceFn::mixed(DistanceKind::Euclidean, false);
    for _ in 0..3 {
        let a: Vec<Vec<f64>> = (0..3).map(|_| (0..u).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<Vec<f64>> = (0..3).map(|_| (0..v).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let c: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..1.5)).collect();
        let sig = MixedIntegerSignal {
            a: DenseMatrix::from_rows(&a),
            b: DenseMatrix::from_rows(&b),
            c: c.clone(),
            w: serde_json::Value::Null,
            y_box: true,
        };
        let signal = Signal::mixed_integer(sig.clone()).unwrap();
        let oracle = MixedIntegerOracle::new();
        let truth: Vec<f64> = (0..u + v).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x_hat = oracle.forward_min(&signal, &truth, &phi).unwrap();
        let inst = IOInstance::mixed_integer(sig, x_hat.clone()).unwrap();
        let theta: Vec<f64> = (0..u + v).map(|_| rng.random_range(-1.0..1.0)).collect();
        let value = asl(&theta, &inst, &phi, &d, &Budget::exact()).unwrap().value;

        let hat = dot(&theta, &phi.eval(&signal, &x_hat));
        let mut grid = f64::NEG_INFINITY;
        for z in invopt::model::binary_points(v) {
            let zf: Vec<f64> = z.iter().map(|&k| k as f64).collect();
            let dz = d.eval(&x_hat, &Response::mixed(vec![0.0; u], z.clone()));
            for i in 0..=1000 {
                for j in 0..=1000 {
                    let y = [i as f64 * 1e-3, j as f64 * 1e-3];
                    if (0..3).all(|k| dot(&a[k], &y) + dot(&b[k], &zf) <= c[k]) {
                        let x = Response::mixed(y.to_vec(), z.clone());
                        grid = grid.max(hat - dot(&theta, &phi.eval(&signal, &x)) + dz);
                    }
                }
            }
        }
        assert!(grid <= value + 1e-9, "grid {grid} above exact {value}");
        assert!(value - grid <= 2e-3, "exact {value} vs grid {grid}");
    }
}
