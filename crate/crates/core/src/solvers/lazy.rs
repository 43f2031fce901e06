//! Row generation for linear programs with very many inequality rows.
//!
//! The restricted problem keeps a working subset of the rows. After each
//! solve, the separation routine reports rows violated at the current point;
//! they are appended and the problem is re-solved. The restricted problem is a
//! relaxation, so once nothing is violated its optimum is optimal for the full
//! program, and its multipliers (zero on the rows never added) are a valid
//! dual certificate for the full program.

use crate::{Error, Result};

use super::lp::{solve_lp, LinearProgramSpec, LpSolution, LpStatus};

/// Temporary box on otherwise unbounded variables while rows are missing.
pub const ARTIFICIAL_BOUND: f64 = 1e6;

/// An implicitly defined family of inequality rows `row · x <= rhs`.
pub trait RowFamily {
    /// Returns ids, rows and right-hand sides of rows violated by more than `tol` at `x`.
    fn separate(&self, x: &[f64], tol: f64) -> Result<Vec<(usize, Vec<f64>, f64)>>;
}

#[derive(Clone, Debug)]
pub struct LazyLpSolution {
    pub solution: LpSolution,
    /// Ids of the generated rows, in the order of `solution.ineq_duals`
    /// following the base program's own inequality rows.
    pub working_rows: Vec<usize>,
    pub rounds: usize,
}

pub fn solve_lp_lazy(
    base: &LinearProgramSpec,
    family: &dyn RowFamily,
    initial: Vec<(usize, Vec<f64>, f64)>,
    tol: f64,
    max_rounds: usize,
) -> Result<LazyLpSolution> {
    let n = base.num_vars();
    let base_rows = base.ineq_rhs.len();
    let mut spec = base.clone();
    if spec.ineq_matrix.nrows() == 0 {
        spec.ineq_matrix = crate::linalg::DenseMatrix::zeros(0, n);
    }
    let mut artificial = vec![(false, false); n];
    for (j, b) in spec.bounds.iter_mut().enumerate() {
        if b.0 == f64::NEG_INFINITY {
            b.0 = -ARTIFICIAL_BOUND;
            artificial[j].0 = true;
        }
        if b.1 == f64::INFINITY {
            b.1 = ARTIFICIAL_BOUND;
            artificial[j].1 = true;
        }
    }
    let mut working = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (id, row, rhs) in initial {
        if seen.insert(id) {
            spec.add_ineq(&row, rhs);
            working.push(id);
        }
    }
    for round in 1..=max_rounds {
        let mut sol = solve_lp(&spec)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible | LpStatus::Unbounded => {
                return Ok(LazyLpSolution {
                    solution: sol,
                    working_rows: working,
                    rounds: round,
                })
            }
        }
        let violated = family.separate(&sol.x, tol)?;
        let mut added = 0;
        for (id, row, rhs) in violated {
            if seen.insert(id) {
                spec.add_ineq(&row, rhs);
                working.push(id);
                added += 1;
            }
        }
        if added == 0 {
            // An artificial bound only signals a ray when it carries a
            // multiplier; with a zero reduced cost (e.g. a pure feasibility
            // problem) the point is optimal for the true bounds as well.
            for (j, &(lo_art, hi_art)) in artificial.iter().enumerate() {
                let x = sol.x[j];
                let binding = sol.reduced_costs[j].abs() > 1e-9;
                let at_lo = lo_art && x <= -ARTIFICIAL_BOUND * (1.0 - 1e-9);
                let at_hi = hi_art && x >= ARTIFICIAL_BOUND * (1.0 - 1e-9);
                if binding && (at_lo || at_hi) {
                    sol.status = LpStatus::Unbounded;
                    return Ok(LazyLpSolution {
                        solution: sol,
                        working_rows: working,
                        rounds: round,
                    });
                }
            }
            // Certify against the true bounds: artificial bounds are inactive,
            // so their reduced costs are zero and drop out.
            let mut true_spec = spec.clone();
            true_spec.bounds = base.bounds.clone();
            let (rc, kkt) = super::lp::certify(&true_spec, &sol.x, &sol.ineq_duals, &sol.eq_duals);
            sol.reduced_costs = rc;
            sol.kkt = kkt;
            debug_assert_eq!(sol.ineq_duals.len(), base_rows + working.len());
            return Ok(LazyLpSolution {
                solution: sol,
                working_rows: working,
                rounds: round,
            });
        }
    }
    Err(Error::IterationLimit(max_rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    /// Rows `<a_k, x> <= 1` for unit vectors on a fine circle: the polygon
    /// approximates the unit disk.
    struct Circle {
        rows: Vec<Vec<f64>>,
    }

    impl RowFamily for Circle {
        fn separate(&self, x: &[f64], tol: f64) -> Result<Vec<(usize, Vec<f64>, f64)>> {
            let best = self
                .rows
                .iter()
                .enumerate()
                .map(|(k, r)| (k, dot(r, x) - 1.0))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            Ok(match best {
                Some((k, v)) if v > tol => vec![(k, self.rows[k].clone(), 1.0)],
                _ => vec![],
            })
        }
    }

    #[test]
    fn matches_full_program() {
        let m = 720;
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let mut base = LinearProgramSpec::new(vec![-1.0, -2.0]);
        base.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); 2];
        let lazy = solve_lp_lazy(&base, &Circle { rows: rows.clone() }, vec![], 1e-12, 1000).unwrap();
        let mut full = base.clone();
        for r in &rows {
            full.add_ineq(r, 1.0);
        }
        let direct = solve_lp(&full).unwrap();
        assert!((lazy.solution.objective - direct.objective).abs() < 1e-9);
        assert!(lazy.working_rows.len() < 40);
        assert!(lazy.solution.kkt.max_residual() < 1e-9);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut base = LinearProgramSpec::new(vec![-1.0]);
        base.bounds = vec![(0.0, f64::INFINITY)];
        struct NoRows;
        impl RowFamily for NoRows {
            fn separate(&self, _: &[f64], _: f64) -> Result<Vec<(usize, Vec<f64>, f64)>> {
                Ok(vec![])
            }
        }
        let sol = solve_lp_lazy(&base, &NoRows, vec![], 1e-9, 10).unwrap();
        assert_eq!(sol.solution.status, LpStatus::Unbounded);
    }
}
