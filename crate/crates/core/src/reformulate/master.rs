//! Restricted master program shared by the trainers.
//!
//! Variables are laid out as `[θ (p) | β (N) | aux]`. Every row has the form
//! `<θ, a> − β_i <= rhs` and is keyed by `(instance, enumeration index, k,
//! serial)`. Rows are generated lazily by the trainers and always emitted in
//! key order, so the assembled program is canonical regardless of the order in
//! which rows were discovered.

use crate::linalg::DenseMatrix;
use crate::losses::Regularizer;
use crate::model::ThetaSet;
use crate::solvers::lp::{solve_lp, KktReport, LinearProgramSpec, LpStatus};
use crate::solvers::qp::{solve_qp_with, QpOptions, QpSpec, QpStatus};
use crate::{Error, Result};

/// Temporary bound on free cost coordinates of LP masters.
const ARTIFICIAL_BOUND: f64 = 1e6;

pub(crate) type RowKey = (usize, usize, usize, usize);

/// `<θ, theta> − β_i <= rhs` with `i = key.0`.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub key: RowKey,
    pub theta: Vec<f64>,
    pub rhs: f64,
}

pub(crate) struct Master {
    pub p: usize,
    pub n: usize,
    pub kappa: f64,
    pub regularizer: Regularizer,
    pub theta_set: ThetaSet,
    pub hinge: bool,
    /// Extra equalities on θ.
    pub theta_eqs: Vec<(Vec<f64>, f64)>,
    /// Per-coordinate bounds on θ intersected with Θ.
    pub theta_bounds: Option<Vec<(f64, f64)>>,
    pub rows: Vec<Row>,
}

pub(crate) struct MasterSolution {
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub objective: f64,
    pub kkt: KktReport,
    /// A free cost coordinate sits on the temporary bound.
    pub at_artificial: bool,
}

impl Master {
    pub fn new(p: usize, n: usize, kappa: f64, regularizer: Regularizer, theta_set: ThetaSet, hinge: bool) -> Self {
        Self {
            p,
            n,
            kappa,
            regularizer,
            theta_set,
            hinge,
            theta_eqs: Vec::new(),
            theta_bounds: None,
            rows: Vec::new(),
        }
    }

    fn quadratic(&self) -> bool {
        self.regularizer == Regularizer::HalfSqL2 && self.kappa > 0.0
    }

    /// Inserts a row keeping key order; returns false if already present.
    pub fn insert(&mut self, row: Row) -> bool {
        match self.rows.binary_search_by(|b| b.key.cmp(&row.key)) {
            Ok(_) => false,
            Err(pos) => {
                self.rows.insert(pos, row);
                true
            }
        }
    }

    pub fn solve(&self) -> Result<MasterSolution> {
        let (p, n) = (self.p, self.n);
        let l1_aux = self.regularizer == Regularizer::L1 && self.kappa > 0.0
            || matches!(self.theta_set, ThetaSet::L1Ball { .. });
        let n_aux = if l1_aux { p } else { 0 };
        let nvars = p + n + n_aux;

        let mut objective = vec![0.0; nvars];
        for v in &mut objective[p..p + n] {
            *v = 1.0 / n as f64;
        }
        if self.regularizer == Regularizer::L1 {
            for v in &mut objective[p + n..nvars] {
                *v = self.kappa;
            }
        }
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); nvars];
        let mut theta_b = self
            .theta_set
            .bounds(p)
            .unwrap_or_else(|| vec![(f64::NEG_INFINITY, f64::INFINITY); p]);
        if let Some(extra) = &self.theta_bounds {
            for (b, e) in theta_b.iter_mut().zip(extra) {
                b.0 = b.0.max(e.0);
                b.1 = b.1.min(e.1);
            }
        }
        bounds[..p].copy_from_slice(&theta_b);
        let mut artificial = vec![false; p];
        if !self.quadratic() {
            for (j, b) in bounds[..p].iter_mut().enumerate() {
                if b.0 == f64::NEG_INFINITY {
                    b.0 = -ARTIFICIAL_BOUND;
                    artificial[j] = true;
                }
                if b.1 == f64::INFINITY {
                    b.1 = ARTIFICIAL_BOUND;
                    artificial[j] = true;
                }
            }
        }
        if self.hinge {
            for b in &mut bounds[p..p + n] {
                b.0 = 0.0;
            }
        }
        for b in &mut bounds[p + n..] {
            b.0 = 0.0;
        }

        let mut ineq = DenseMatrix::zeros(0, nvars);
        let mut ineq_rhs = Vec::new();
        let mut eq = DenseMatrix::zeros(0, nvars);
        let mut eq_rhs = Vec::new();
        if n_aux > 0 {
            // |θ_j| <= t_j
            for j in 0..p {
                for s in [1.0, -1.0] {
                    let mut r = vec![0.0; nvars];
                    r[j] = s;
                    r[p + n + j] = -1.0;
                    ineq.push_row(&r);
                    ineq_rhs.push(0.0);
                }
            }
            if let ThetaSet::L1Ball { radius } = self.theta_set {
                let mut r = vec![0.0; nvars];
                r[p + n..nvars].iter_mut().for_each(|v| *v = 1.0);
                ineq.push_row(&r);
                ineq_rhs.push(radius);
            }
        }
        for (row, rhs) in &self.theta_eqs {
            let mut r = vec![0.0; nvars];
            r[..p].copy_from_slice(row);
            eq.push_row(&r);
            eq_rhs.push(*rhs);
        }
        for row in &self.rows {
            let mut r = vec![0.0; nvars];
            r[..p].copy_from_slice(&row.theta);
            r[p + row.key.0] = -1.0;
            ineq.push_row(&r);
            ineq_rhs.push(row.rhs);
        }

        let (x, objective_value, kkt) = if self.quadratic() {
            let mut quad = DenseMatrix::zeros(nvars, nvars);
            for j in 0..p {
                quad[(j, j)] = self.kappa;
            }
            let spec = QpSpec {
                quadratic: quad,
                linear: objective,
                ineq_matrix: ineq,
                ineq_rhs,
                eq_matrix: eq,
                eq_rhs,
                bounds,
            };
            let sol = solve_qp_with(&spec, &QpOptions::default())?;
            match sol.status {
                QpStatus::Optimal => {}
                QpStatus::Infeasible => return Err(Error::Infeasible),
                QpStatus::Unbounded => return Err(Error::Unbounded),
                QpStatus::IterationLimit => {
                    return Err(Error::IterationLimit(QpOptions::default().max_iterations))
                }
            }
            (sol.x, sol.objective, sol.kkt)
        } else {
            let spec = LinearProgramSpec {
                objective,
                ineq_matrix: ineq,
                ineq_rhs,
                eq_matrix: eq,
                eq_rhs,
                bounds,
            };
            let sol = solve_lp(&spec)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::Infeasible),
                LpStatus::Unbounded => return Err(Error::Unbounded),
            }
            (sol.x, sol.objective, sol.kkt)
        };

        let theta = x[..p].to_vec();
        let at_artificial = theta
            .iter()
            .zip(&artificial)
            .any(|(v, &a)| a && v.abs() >= ARTIFICIAL_BOUND * (1.0 - 1e-9));
        Ok(MasterSolution {
            beta: x[p..p + n].to_vec(),
            theta,
            objective: objective_value,
            kkt,
            at_artificial,
        })
    }
}
