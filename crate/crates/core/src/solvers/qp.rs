//! Convex quadratic programming.
//!
//! ```text
//! minimize    ½ xᵀP x + qᵀx
//! subject to  G x <= h,  E x = f,  l <= x <= u
//! ```
//!
//! Strictly convex problems are solved by the Goldfarb–Idnani dual active-set
//! method: start from the unconstrained minimizer and repeatedly add the most
//! violated constraint, dropping active ones whose multiplier would turn
//! negative. It is finite and returns exact multipliers. When `P` is only
//! semidefinite the method runs inside a proximal-point loop on `P + ρI`.
//! `P = 0` is handed to the simplex solver.
//!
//! Inequalities are supplied through [`ConstraintSource`], so very large
//! structured constraint families never need to be materialized.

use serde::{Deserialize, Serialize};

use crate::linalg::{axpy, check_psd, cholesky, dot, norm_inf, DenseMatrix};
use crate::{Error, Result};

use super::lp::{solve_lp, KktReport, LinearProgramSpec, LpStatus};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QpSpec {
    pub quadratic: DenseMatrix,
    pub linear: Vec<f64>,
    pub ineq_matrix: DenseMatrix,
    pub ineq_rhs: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl QpSpec {
    /// `½ xᵀP x + qᵀx` over free variables.
    pub fn new(quadratic: DenseMatrix, linear: Vec<f64>) -> Self {
        let n = linear.len();
        Self {
            quadratic,
            linear,
            ineq_matrix: DenseMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            eq_matrix: DenseMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn add_ineq(&mut self, row: &[f64], rhs: f64) {
        self.ineq_matrix.push_row(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) {
        self.eq_matrix.push_row(row);
        self.eq_rhs.push(rhs);
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.quadratic.mul_vec(x)) + dot(&self.linear, x)
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.quadratic.nrows() != n || self.quadratic.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "QP quadratic term",
                expected: n,
                got: self.quadratic.nrows(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (self.quadratic[(i, j)], self.quadratic[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Invalid(format!("QP quadratic term not symmetric at ({i}, {j})")));
                }
            }
        }
        if !self.quadratic.is_finite() {
            return Err(Error::NonFinite("QP quadratic term"));
        }
        self.as_lp().validate()
    }

    fn as_lp(&self) -> LinearProgramSpec {
        LinearProgramSpec {
            objective: self.linear.clone(),
            ineq_matrix: self.ineq_matrix.clone(),
            ineq_rhs: self.ineq_rhs.clone(),
            eq_matrix: self.eq_matrix.clone(),
            eq_rhs: self.eq_rhs.clone(),
            bounds: self.bounds.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub status: QpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// `λ >= 0` for `G x <= h`.
    pub ineq_duals: Vec<f64>,
    pub eq_duals: Vec<f64>,
    /// Multipliers of `x >= l` and `x <= u`.
    pub lower_duals: Vec<f64>,
    pub upper_duals: Vec<f64>,
    pub kkt: KktReport,
    pub iterations: usize,
    /// Set when `P = 0` and the problem was solved by the simplex method.
    pub delegated_to_lp: bool,
}

#[derive(Clone, Debug)]
pub struct QpOptions {
    pub max_iterations: usize,
    pub max_prox_iterations: usize,
    /// Stationarity tolerance of the proximal loop.
    pub prox_tol: f64,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            max_prox_iterations: 20_000,
            prox_tol: 1e-10,
        }
    }
}

/// Inequalities `row_k · x <= rhs_k`, possibly defined implicitly.
pub trait ConstraintSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dense row and right-hand side of constraint `k`.
    fn row(&self, k: usize) -> (Vec<f64>, f64);

    /// `row_k · x − rhs_k`; positive means violated.
    fn residual(&self, k: usize, x: &[f64]) -> f64;

    /// Most violated constraint (largest residual) and its residual.
    fn most_violated(&self, x: &[f64], skip: &dyn Fn(usize) -> bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.len() {
            if skip(k) {
                continue;
            }
            let r = self.residual(k, x);
            if r > 0.0 && best.is_none_or(|(_, b)| r > b) {
                best = Some((k, r));
            }
        }
        best
    }
}

/// Explicit rows.
pub struct DenseRows {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl ConstraintSource for DenseRows {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn row(&self, k: usize) -> (Vec<f64>, f64) {
        (self.rows[k].clone(), self.rhs[k])
    }

    fn residual(&self, k: usize, x: &[f64]) -> f64 {
        dot(&self.rows[k], x) - self.rhs[k]
    }
}

/// Output of the implicit solver: primal point, multipliers of the active
/// inequalities `(index, λ)` and of the equalities.
#[derive(Clone, Debug)]
pub struct ImplicitQpSolution {
    pub status: QpStatus,
    pub x: Vec<f64>,
    pub active: Vec<(usize, f64)>,
    pub eq_duals: Vec<f64>,
    pub iterations: usize,
}

pub fn solve_qp(spec: &QpSpec) -> Result<QpSolution> {
    solve_qp_with(spec, &QpOptions::default())
}

pub fn solve_qp_with(spec: &QpSpec, opts: &QpOptions) -> Result<QpSolution> {
    spec.validate()?;
    let n = spec.num_vars();
    let m_ineq = spec.ineq_rhs.len();
    if spec.quadratic.as_slice().iter().all(|&v| v == 0.0) {
        let sol = solve_lp(&spec.as_lp())?;
        let status = match sol.status {
            LpStatus::Optimal => QpStatus::Optimal,
            LpStatus::Infeasible => QpStatus::Infeasible,
            LpStatus::Unbounded => QpStatus::Unbounded,
        };
        let lower_duals = sol.reduced_costs.iter().map(|&r| r.max(0.0)).collect();
        let upper_duals = sol.reduced_costs.iter().map(|&r| (-r).max(0.0)).collect();
        return Ok(QpSolution {
            status,
            objective: sol.objective,
            x: sol.x,
            ineq_duals: sol.ineq_duals,
            eq_duals: sol.eq_duals,
            lower_duals,
            upper_duals,
            kkt: sol.kkt,
            iterations: sol.iterations,
            delegated_to_lp: true,
        });
    }
    if let Err((index, pivot)) = check_psd(&spec.quadratic, 1e-12) {
        return Err(Error::NotPsd { index, pivot });
    }
    if spec.bounds.iter().any(|&(l, u)| l > u) {
        return Ok(empty_solution(spec, QpStatus::Infeasible));
    }

    // Bounds become rows after the general inequalities.
    let mut rows = spec.ineq_matrix.to_rows();
    let mut rhs = spec.ineq_rhs.clone();
    let mut bound_rows = Vec::new();
    for (j, &(l, u)) in spec.bounds.iter().enumerate() {
        if l.is_finite() {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push(r);
            rhs.push(-l);
            bound_rows.push((j, false));
        }
        if u.is_finite() {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            rows.push(r);
            rhs.push(u);
            bound_rows.push((j, true));
        }
    }
    let src = DenseRows { rows, rhs };
    let eqs: Vec<(Vec<f64>, f64)> = spec
        .eq_matrix
        .rows_iter()
        .map(<[f64]>::to_vec)
        .zip(spec.eq_rhs.iter().copied())
        .collect();
    let sol = solve_qp_implicit(&spec.quadratic, &spec.linear, &eqs, &src, opts)?;
    if matches!(sol.status, QpStatus::Infeasible | QpStatus::Unbounded) {
        return Ok(empty_solution(spec, sol.status));
    }
    let mut ineq_duals = vec![0.0; m_ineq];
    let mut lower_duals = vec![0.0; n];
    let mut upper_duals = vec![0.0; n];
    for &(k, lam) in &sol.active {
        if k < m_ineq {
            ineq_duals[k] = lam;
        } else {
            let (j, upper) = bound_rows[k - m_ineq];
            if upper {
                upper_duals[j] += lam;
            } else {
                lower_duals[j] += lam;
            }
        }
    }
    let x = sol.x;
    let kkt = certify_qp(spec, &x, &ineq_duals, &sol.eq_duals, &lower_duals, &upper_duals);
    Ok(QpSolution {
        status: sol.status,
        objective: spec.objective_value(&x),
        x,
        ineq_duals,
        eq_duals: sol.eq_duals,
        lower_duals,
        upper_duals,
        kkt,
        iterations: sol.iterations,
        delegated_to_lp: false,
    })
}

fn empty_solution(spec: &QpSpec, status: QpStatus) -> QpSolution {
    let n = spec.num_vars();
    QpSolution {
        status,
        x: vec![0.0; n],
        objective: f64::NAN,
        ineq_duals: vec![0.0; spec.ineq_rhs.len()],
        eq_duals: vec![0.0; spec.eq_rhs.len()],
        lower_duals: vec![0.0; n],
        upper_duals: vec![0.0; n],
        kkt: KktReport::default(),
        iterations: 0,
        delegated_to_lp: false,
    }
}

/// KKT residuals of `P x + q + Gᵀλ + Eᵀν − μ_l + μ_u = 0`.
pub fn certify_qp(
    spec: &QpSpec,
    x: &[f64],
    ineq_duals: &[f64],
    eq_duals: &[f64],
    lower_duals: &[f64],
    upper_duals: &[f64],
) -> KktReport {
    let mut g = spec.quadratic.mul_vec(x);
    axpy(1.0, &spec.linear, &mut g);
    for (row, &lam) in spec.ineq_matrix.rows_iter().zip(ineq_duals) {
        axpy(lam, row, &mut g);
    }
    for (row, &nu) in spec.eq_matrix.rows_iter().zip(eq_duals) {
        axpy(nu, row, &mut g);
    }
    for j in 0..x.len() {
        g[j] += upper_duals[j] - lower_duals[j];
    }
    let mut rep = KktReport {
        dual_residual: norm_inf(&g),
        ..KktReport::default()
    };
    for (row, (&h, &lam)) in spec.ineq_matrix.rows_iter().zip(spec.ineq_rhs.iter().zip(ineq_duals)) {
        let slack = h - dot(row, x);
        rep.primal_residual = rep.primal_residual.max(-slack);
        rep.dual_residual = rep.dual_residual.max(-lam);
        rep.complementarity = rep.complementarity.max((lam * slack).abs());
    }
    for (row, &f) in spec.eq_matrix.rows_iter().zip(&spec.eq_rhs) {
        rep.primal_residual = rep.primal_residual.max((dot(row, x) - f).abs());
    }
    for (j, &(l, u)) in spec.bounds.iter().enumerate() {
        rep.primal_residual = rep.primal_residual.max(l - x[j]).max(x[j] - u);
        if l.is_finite() {
            rep.complementarity = rep.complementarity.max((lower_duals[j] * (x[j] - l)).abs());
        }
        if u.is_finite() {
            rep.complementarity = rep.complementarity.max((upper_duals[j] * (u - x[j])).abs());
        }
    }
    rep
}

/// Solves `min ½ xᵀP x + qᵀx` s.t. the equalities and `src`, for PSD `P`.
pub fn solve_qp_implicit(
    p: &DenseMatrix,
    q: &[f64],
    eqs: &[(Vec<f64>, f64)],
    src: &dyn ConstraintSource,
    opts: &QpOptions,
) -> Result<ImplicitQpSolution> {
    if cholesky(p).is_ok() {
        return goldfarb_idnani(p, q, eqs, src, opts.max_iterations);
    }
    // Proximal point: x_{k+1} = argmin f(x) + ρ/2 ‖x − x_k‖².
    let n = q.len();
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(p[(i, i)].abs())).max(1.0);
    // ρ shrinks towards a floor, which makes the iteration superlinear on
    // piecewise linear-quadratic problems; ρ‖Δx‖ is the exact KKT residual.
    let rho_floor = 1e-9 * scale;
    let mut rho = 1e-3 * scale;
    let mut x = vec![0.0; n];
    let mut total = 0usize;
    for _ in 0..opts.max_prox_iterations {
        let mut pr = p.clone();
        for i in 0..n {
            pr[(i, i)] += rho;
        }
        let mut qk = q.to_vec();
        axpy(-rho, &x, &mut qk);
        let sol = goldfarb_idnani(&pr, &qk, eqs, src, opts.max_iterations.saturating_sub(total))?;
        total += sol.iterations;
        if sol.status != QpStatus::Optimal {
            return Ok(ImplicitQpSolution {
                iterations: total,
                ..sol
            });
        }
        let step = sol
            .x
            .iter()
            .zip(&x)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let xnorm = norm_inf(&sol.x);
        if xnorm > 1e12 {
            return Ok(ImplicitQpSolution {
                status: QpStatus::Unbounded,
                iterations: total,
                ..sol
            });
        }
        x = sol.x.clone();
        if rho * step <= opts.prox_tol * (1.0 + norm_inf(q)) {
            return Ok(ImplicitQpSolution {
                iterations: total,
                ..sol
            });
        }
        rho = (rho * 0.1).max(rho_floor);
    }
    let active = Vec::new();
    Ok(ImplicitQpSolution {
        status: QpStatus::IterationLimit,
        x,
        active,
        eq_duals: vec![0.0; eqs.len()],
        iterations: total,
    })
}

/// Plane rotation zeroing `b` against `a`.
#[inline]
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    let h = a.hypot(b);
    if h == 0.0 {
        (1.0, 0.0, 0.0)
    } else {
        (a / h, b / h, h)
    }
}

#[inline]
fn rotate_cols(j: &mut DenseMatrix, c1: usize, c2: usize, c: f64, s: f64) {
    for i in 0..j.nrows() {
        let (a, b) = (j[(i, c1)], j[(i, c2)]);
        j[(i, c1)] = c * a + s * b;
        j[(i, c2)] = -s * a + c * b;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tag {
    Eq(usize),
    Ineq(usize),
}

/// Goldfarb–Idnani for positive definite `P`. Constraints are used in the
/// "≥" form `nᵀx >= b` internally; for `row·x <= rhs`, `n = −row`.
fn goldfarb_idnani(
    p: &DenseMatrix,
    q: &[f64],
    eqs: &[(Vec<f64>, f64)],
    src: &dyn ConstraintSource,
    max_iter: usize,
) -> Result<ImplicitQpSolution> {
    let n = q.len();
    let l = cholesky(p).map_err(|(index, pivot)| Error::NotPsd { index, pivot })?;
    // x = −P⁻¹q
    let mut x = {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = -q[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    };
    // J = L⁻ᵀ
    let mut linv = DenseMatrix::zeros(n, n);
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in c..i {
                s -= l[(i, k)] * linv[(k, c)];
            }
            linv[(i, c)] = s / l[(i, i)];
        }
    }
    let mut jm = linv.transpose();
    let mut r = DenseMatrix::zeros(n, n);
    let mut nact = 0usize;
    let mut tags: Vec<Tag> = Vec::new();
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let eq_duals = vec![0.0; eqs.len()];
    let mut iterations = 0usize;

    let x_scale = |x: &[f64]| 1.0 + norm_inf(x);

    // Direction computations shared by the equality and inequality phases.
    let directions = |jm: &DenseMatrix, r: &DenseMatrix, nact: usize, np: &[f64]| {
        let d = jm.tr_mul_vec(np);
        let mut z = vec![0.0; n];
        for j in nact..n {
            if d[j] != 0.0 {
                for i in 0..n {
                    z[i] += d[j] * jm[(i, j)];
                }
            }
        }
        let mut rv = vec![0.0; nact];
        for i in (0..nact).rev() {
            let mut s = d[i];
            for k in i + 1..nact {
                s -= r[(i, k)] * rv[k];
            }
            rv[i] = s / r[(i, i)];
        }
        (d, z, rv)
    };

    let add = |jm: &mut DenseMatrix, r: &mut DenseMatrix, nact: &mut usize, mut d: Vec<f64>| {
        for j in (*nact + 1..n).rev() {
            let (c, s, h) = givens(d[j - 1], d[j]);
            if s != 0.0 {
                d[j - 1] = h;
                d[j] = 0.0;
                rotate_cols(jm, j - 1, j, c, s);
            }
        }
        for i in 0..=*nact {
            r[(i, *nact)] = d[i];
        }
        *nact += 1;
    };

    let drop = |jm: &mut DenseMatrix, r: &mut DenseMatrix, nact: &mut usize, l: usize| {
        for col in l..*nact - 1 {
            for i in 0..n {
                r[(i, col)] = r[(i, col + 1)];
            }
        }
        for i in 0..n {
            r[(i, *nact - 1)] = 0.0;
        }
        *nact -= 1;
        for k in l..*nact {
            let (c, s, h) = givens(r[(k, k)], r[(k + 1, k)]);
            if s != 0.0 {
                r[(k, k)] = h;
                r[(k + 1, k)] = 0.0;
                for col in k + 1..*nact {
                    let (a, b) = (r[(k, col)], r[(k + 1, col)]);
                    r[(k, col)] = c * a + s * b;
                    r[(k + 1, col)] = -s * a + c * b;
                }
                rotate_cols(jm, k, k + 1, c, s);
            }
        }
    };

    // Equalities first; they stay active.
    for (e, (row, f)) in eqs.iter().enumerate() {
        let sval = dot(row, &x) - f;
        let (d, z, rv) = directions(&jm, &r, nact, row);
        let zn = dot(&z, row);
        if zn <= 1e-14 * (1.0 + dot(row, row)) {
            if sval.abs() <= 1e-9 * (1.0 + f.abs()) * x_scale(&x) {
                continue; // dependent and consistent
            }
            return Ok(ImplicitQpSolution {
                status: QpStatus::Infeasible,
                x,
                active: Vec::new(),
                eq_duals,
                iterations,
            });
        }
        let t = -sval / zn;
        axpy(t, &z, &mut x);
        for (uk, rk) in u.iter_mut().zip(&rv) {
            *uk -= t * rk;
        }
        u.push(t);
        tags.push(Tag::Eq(e));
        normals.push(row.clone());
        add(&mut jm, &mut r, &mut nact, d);
        iterations += 1;
    }

    let mut ignored: Vec<usize> = Vec::new();
    loop {
        if iterations >= max_iter {
            return Ok(finish(QpStatus::IterationLimit, x, &tags, &u, eq_duals, iterations));
        }
        let active_ineq: Vec<usize> = tags
            .iter()
            .filter_map(|t| if let Tag::Ineq(k) = t { Some(*k) } else { None })
            .collect();
        let xs = x_scale(&x);
        let pick = src.most_violated(&x, &|k| active_ineq.contains(&k) || ignored.contains(&k));
        let Some((kp, resid)) = pick else {
            return Ok(finish(QpStatus::Optimal, x, &tags, &u, eq_duals, iterations));
        };
        let (row, rhs) = src.row(kp);
        let tol = 1e-12 * (1.0 + rhs.abs() + norm_inf(&row) * xs);
        if resid <= tol {
            return Ok(finish(QpStatus::Optimal, x, &tags, &u, eq_duals, iterations));
        }
        // ≥ form normal.
        let np: Vec<f64> = row.iter().map(|v| -v).collect();
        let mut uplus = 0.0;
        loop {
            iterations += 1;
            if iterations >= max_iter {
                return Ok(finish(QpStatus::IterationLimit, x, &tags, &u, eq_duals, iterations));
            }
            let (d, z, rv) = directions(&jm, &r, nact, &np);
            let sval = -src.residual(kp, &x);
            // Partial step: first active inequality multiplier to hit zero.
            let mut t1 = f64::INFINITY;
            let mut lidx = None;
            for (k, tag) in tags.iter().enumerate() {
                if matches!(tag, Tag::Ineq(_)) && rv[k] > 1e-14 {
                    let cand = u[k] / rv[k];
                    if cand < t1 {
                        t1 = cand;
                        lidx = Some(k);
                    }
                }
            }
            let zn = dot(&z, &np);
            let z_zero = zn <= 1e-14 * (1.0 + dot(&np, &np));
            let t2 = if z_zero { f64::INFINITY } else { -sval / zn };
            let t = t1.min(t2);
            if t.is_infinite() {
                if resid <= 1e-9 * (1.0 + rhs.abs()) * xs {
                    // Violation at round-off level with a dependent normal.
                    ignored.push(kp);
                    break;
                }
                return Ok(ImplicitQpSolution {
                    status: QpStatus::Infeasible,
                    x,
                    active: Vec::new(),
                    eq_duals,
                    iterations,
                });
            }
            if z_zero {
                // Dual step only.
                for (uk, rk) in u.iter_mut().zip(&rv) {
                    *uk -= t * rk;
                }
                uplus += t;
                let l = lidx.expect("finite t1");
                tags.remove(l);
                normals.remove(l);
                u.remove(l);
                drop(&mut jm, &mut r, &mut nact, l);
                continue;
            }
            axpy(t, &z, &mut x);
            for (uk, rk) in u.iter_mut().zip(&rv) {
                *uk -= t * rk;
            }
            uplus += t;
            if t == t2 {
                u.push(uplus);
                tags.push(Tag::Ineq(kp));
                normals.push(np.clone());
                add(&mut jm, &mut r, &mut nact, d);
                ignored.clear();
                break;
            }
            let l = lidx.expect("partial step");
            tags.remove(l);
            normals.remove(l);
            u.remove(l);
            drop(&mut jm, &mut r, &mut nact, l);
        }
    }
}

fn finish(
    status: QpStatus,
    x: Vec<f64>,
    tags: &[Tag],
    u: &[f64],
    mut eq_duals: Vec<f64>,
    iterations: usize,
) -> ImplicitQpSolution {
    let mut active = Vec::new();
    for (tag, &uk) in tags.iter().zip(u) {
        match *tag {
            // ≥-form multiplier of `e x >= f` → ν = −u in `P x + q + Eᵀν = 0`.
            Tag::Eq(e) => eq_duals[e] = -uk,
            Tag::Ineq(k) => active.push((k, uk.max(0.0))),
        }
    }
    ImplicitQpSolution {
        status,
        x,
        active,
        eq_duals,
        iterations,
    }
}
