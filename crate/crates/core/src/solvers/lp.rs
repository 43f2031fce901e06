//! Dense two-phase primal simplex.
//!
//! Problems are taken in the general form
//!
//! ```text
//! minimize    cᵀx
//! subject to  G x <= h
//!             E x  = f
//!             l <= x <= u        (infinite bounds allowed)
//! ```
//!
//! and rewritten into `A z = b, z >= 0` by shifting, reflecting or splitting
//! every variable. Pricing is Dantzig's rule; after a run of degenerate pivots
//! the solver switches to Bland's rule until the objective moves again, which
//! rules out cycling. At termination the basic solution and the multipliers are
//! recomputed from a fresh factorization of the basis and certified.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, lu_solve, DenseMatrix};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearProgramSpec {
    pub objective: Vec<f64>,
    pub ineq_matrix: DenseMatrix,
    pub ineq_rhs: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    /// Per-variable `(lower, upper)`; use `f64::NEG_INFINITY` / `f64::INFINITY`.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgramSpec {
    /// Unconstrained, nonnegative variables.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            ineq_matrix: DenseMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            eq_matrix: DenseMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_ineq(&mut self, row: &[f64], rhs: f64) {
        if self.ineq_matrix.nrows() == 0 {
            self.ineq_matrix = DenseMatrix::zeros(0, self.num_vars());
        }
        self.ineq_matrix.push_row(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) {
        if self.eq_matrix.nrows() == 0 {
            self.eq_matrix = DenseMatrix::zeros(0, self.num_vars());
        }
        self.eq_matrix.push_row(row);
        self.eq_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let check = |context, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    got,
                })
            }
        };
        check("bounds length", n, self.bounds.len())?;
        check("inequality matrix columns", n, self.ineq_matrix.ncols())?;
        check("inequality rhs length", self.ineq_matrix.nrows(), self.ineq_rhs.len())?;
        check("equality matrix columns", n, self.eq_matrix.ncols())?;
        check("equality rhs length", self.eq_matrix.nrows(), self.eq_rhs.len())?;
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("LP objective"));
        }
        if !self.ineq_matrix.is_finite()
            || !self.eq_matrix.is_finite()
            || !self.ineq_rhs.iter().chain(&self.eq_rhs).all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("LP constraints"));
        }
        if self.bounds.iter().any(|(l, u)| l.is_nan() || u.is_nan()) {
            return Err(Error::NonFinite("LP bounds"));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Plain-text dump for failure triage.
    pub fn dump_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "min {:?}", self.objective);
        for (r, h) in self.ineq_matrix.rows_iter().zip(&self.ineq_rhs) {
            let _ = writeln!(s, "  {r:?} <= {h}");
        }
        for (r, f) in self.eq_matrix.rows_iter().zip(&self.eq_rhs) {
            let _ = writeln!(s, "  {r:?} == {f}");
        }
        let _ = writeln!(s, "bounds {:?}", self.bounds);
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Residuals of the KKT system at the returned point. All absolute.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct KktReport {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
    pub duality_gap: f64,
    pub dual_objective: f64,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.primal_residual
            .max(self.dual_residual)
            .max(self.complementarity)
            .max(self.duality_gap.abs())
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers `λ >= 0` of `G x <= h`.
    pub ineq_duals: Vec<f64>,
    /// Multipliers `ν` of `E x = f`.
    pub eq_duals: Vec<f64>,
    /// Reduced costs `c + Gᵀλ + Eᵀν` (positive at lower, negative at upper bounds).
    pub reduced_costs: Vec<f64>,
    pub kkt: KktReport,
    pub iterations: usize,
}

impl LpSolution {
    fn empty(status: LpStatus, n: usize, m_ineq: usize, m_eq: usize, iterations: usize) -> Self {
        Self {
            status,
            x: vec![0.0; n],
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            ineq_duals: vec![0.0; m_ineq],
            eq_duals: vec![0.0; m_eq],
            reduced_costs: vec![0.0; n],
            kkt: KktReport::default(),
            iterations,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
    pub pivot_tol: f64,
    pub cost_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            degenerate_switch: 30,
            pivot_tol: 1e-10,
            cost_tol: 1e-11,
        }
    }
}

/// How an original variable maps onto standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = l + z`
    Shifted { col: usize, lower: f64 },
    /// `x = u - z`
    Reflected { col: usize, upper: f64 },
    /// `x = z⁺ - z⁻`
    Split { pos: usize, neg: usize },
    /// `x = l = u`
    Fixed { value: f64 },
}

pub fn solve_lp(spec: &LinearProgramSpec) -> Result<LpSolution> {
    solve_lp_with(spec, &SimplexOptions::default())
}

pub fn solve_lp_with(spec: &LinearProgramSpec, opts: &SimplexOptions) -> Result<LpSolution> {
    spec.validate()?;
    let n = spec.num_vars();
    let m_ineq = spec.ineq_rhs.len();
    let m_eq = spec.eq_rhs.len();
    if spec.bounds.iter().any(|&(l, u)| l > u || l == f64::INFINITY || u == f64::NEG_INFINITY) {
        return Ok(LpSolution::empty(LpStatus::Infeasible, n, m_ineq, m_eq, 0));
    }

    // Column layout of the standard form.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut ub_rows: Vec<(usize, f64)> = Vec::new(); // (column, u - l)
    for &(l, u) in &spec.bounds {
        let map = if l.is_finite() && u.is_finite() && l == u {
            VarMap::Fixed { value: l }
        } else if l.is_finite() {
            let col = ncols;
            ncols += 1;
            if u.is_finite() {
                ub_rows.push((col, u - l));
            }
            VarMap::Shifted { col, lower: l }
        } else if u.is_finite() {
            let col = ncols;
            ncols += 1;
            VarMap::Reflected { col, upper: u }
        } else {
            let pos = ncols;
            ncols += 2;
            VarMap::Split { pos, neg: pos + 1 }
        };
        maps.push(map);
    }
    let n_struct = ncols;
    let n_le = m_ineq + ub_rows.len();
    let m = n_le + m_eq;
    let n_slack = n_le;
    let n_std = n_struct + n_slack;

    // Standard-form rows A z = b (unflipped) and costs.
    let mut a_std = DenseMatrix::zeros(m, n_std);
    let mut b_std = vec![0.0; m];
    let mut c_std = vec![0.0; n_std];
    let mut obj_const = 0.0;
    for (j, map) in maps.iter().enumerate() {
        let cj = spec.objective[j];
        match *map {
            VarMap::Shifted { col, lower } => {
                c_std[col] = cj;
                obj_const += cj * lower;
            }
            VarMap::Reflected { col, upper } => {
                c_std[col] = -cj;
                obj_const += cj * upper;
            }
            VarMap::Split { pos, neg } => {
                c_std[pos] = cj;
                c_std[neg] = -cj;
            }
            VarMap::Fixed { value } => obj_const += cj * value,
        }
    }
    let fill_row = |r: usize, row: &[f64], rhs: f64, a: &mut DenseMatrix, b: &mut [f64]| {
        let mut rhs = rhs;
        for (j, &g) in row.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, lower } => {
                    a[(r, col)] += g;
                    rhs -= g * lower;
                }
                VarMap::Reflected { col, upper } => {
                    a[(r, col)] -= g;
                    rhs -= g * upper;
                }
                VarMap::Split { pos, neg } => {
                    a[(r, pos)] += g;
                    a[(r, neg)] -= g;
                }
                VarMap::Fixed { value } => rhs -= g * value,
            }
        }
        b[r] = rhs;
    };
    for r in 0..m_ineq {
        fill_row(r, spec.ineq_matrix.row(r), spec.ineq_rhs[r], &mut a_std, &mut b_std);
    }
    for (k, &(col, width)) in ub_rows.iter().enumerate() {
        let r = m_ineq + k;
        a_std[(r, col)] = 1.0;
        b_std[r] = width;
    }
    for r in 0..m_eq {
        fill_row(n_le + r, spec.eq_matrix.row(r), spec.eq_rhs[r], &mut a_std, &mut b_std);
    }
    for r in 0..n_le {
        a_std[(r, n_struct + r)] = 1.0;
    }

    let mut tab = Tableau::new(&a_std, &b_std, n_le, n_struct, opts.clone());
    let outcome = tab.run(&c_std)?;
    let iterations = tab.iterations;
    match outcome {
        Outcome::Infeasible => {
            return Ok(LpSolution::empty(LpStatus::Infeasible, n, m_ineq, m_eq, iterations))
        }
        Outcome::Unbounded => {
            return Ok(LpSolution::empty(LpStatus::Unbounded, n, m_ineq, m_eq, iterations))
        }
        Outcome::Optimal => {}
    }

    // Polish: recompute z_B and y from the basis columns of the original system.
    let rows: Vec<usize> = tab.active_rows.clone();
    let basis: Vec<usize> = rows.iter().map(|&r| tab.basis[r]).collect();
    let k = rows.len();
    let mut bmat = DenseMatrix::zeros(k, k);
    for (ii, &r) in rows.iter().enumerate() {
        for (jj, &col) in basis.iter().enumerate() {
            bmat[(ii, jj)] = a_std[(r, col)];
        }
    }
    let rhs: Vec<f64> = rows.iter().map(|&r| b_std[r]).collect();
    let mut z = vec![0.0; n_std];
    let zb = lu_solve(&bmat, &rhs, 1e-13).ok_or_else(|| Error::NumericalBreakdown {
        message: "singular basis at termination".into(),
        pivot_log: tab.pivot_log(),
    })?;
    for (jj, &col) in basis.iter().enumerate() {
        z[col] = zb[jj].max(0.0);
    }
    let cb: Vec<f64> = basis.iter().map(|&col| c_std[col]).collect();
    let yb = lu_solve(&bmat.transpose(), &cb, 1e-13).ok_or_else(|| Error::NumericalBreakdown {
        message: "singular basis transpose at termination".into(),
        pivot_log: tab.pivot_log(),
    })?;
    let mut y = vec![0.0; m];
    for (ii, &r) in rows.iter().enumerate() {
        y[r] = yb[ii];
    }

    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, lower } => lower + z[col],
            VarMap::Reflected { col, upper } => upper - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
            VarMap::Fixed { value } => value,
        })
        .collect();
    // Clamp round-off outside finite bounds.
    let x: Vec<f64> = x
        .iter()
        .zip(&spec.bounds)
        .map(|(&v, &(l, u))| v.max(l).min(u))
        .collect();
    let ineq_duals: Vec<f64> = (0..m_ineq).map(|r| (-y[r]).max(0.0)).collect();
    let eq_duals: Vec<f64> = (0..m_eq).map(|r| -y[n_le + r]).collect();
    let objective = spec.objective_value(&x);
    debug_assert!((objective - (dot(&c_std, &z) + obj_const)).abs() < 1e-6 * (1.0 + objective.abs()));

    let (reduced_costs, kkt) = certify(spec, &x, &ineq_duals, &eq_duals);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        ineq_duals,
        eq_duals,
        reduced_costs,
        kkt,
        iterations,
    })
}

/// Computes reduced costs and KKT residuals for a primal/dual pair.
pub fn certify(
    spec: &LinearProgramSpec,
    x: &[f64],
    ineq_duals: &[f64],
    eq_duals: &[f64],
) -> (Vec<f64>, KktReport) {
    let mut r = spec.objective.clone();
    for (row, &lam) in spec.ineq_matrix.rows_iter().zip(ineq_duals) {
        if lam != 0.0 {
            crate::linalg::axpy(lam, row, &mut r);
        }
    }
    for (row, &nu) in spec.eq_matrix.rows_iter().zip(eq_duals) {
        if nu != 0.0 {
            crate::linalg::axpy(nu, row, &mut r);
        }
    }
    let mut rep = KktReport::default();
    for (row, (&h, &lam)) in spec.ineq_matrix.rows_iter().zip(spec.ineq_rhs.iter().zip(ineq_duals)) {
        let slack = h - dot(row, x);
        rep.primal_residual = rep.primal_residual.max(-slack);
        rep.dual_residual = rep.dual_residual.max(-lam);
        rep.complementarity = rep.complementarity.max((lam * slack).abs());
    }
    for (row, &f) in spec.eq_matrix.rows_iter().zip(&spec.eq_rhs) {
        rep.primal_residual = rep.primal_residual.max((dot(row, x) - f).abs());
    }
    let mut dual_obj = -dot(&spec.ineq_rhs, ineq_duals) - dot(&spec.eq_rhs, eq_duals);
    for (j, (&rj, &(l, u))) in r.iter().zip(&spec.bounds).enumerate() {
        rep.primal_residual = rep.primal_residual.max(l - x[j]).max(x[j] - u);
        if rj > 0.0 {
            if l.is_finite() {
                dual_obj += l * rj;
                rep.complementarity = rep.complementarity.max((rj * (x[j] - l)).abs());
            } else {
                rep.dual_residual = rep.dual_residual.max(rj);
            }
        } else if rj < 0.0 {
            if u.is_finite() {
                dual_obj += u * rj;
                rep.complementarity = rep.complementarity.max((rj * (u - x[j])).abs());
            } else {
                rep.dual_residual = rep.dual_residual.max(-rj);
            }
        }
    }
    rep.dual_objective = dual_obj;
    rep.duality_gap = spec.objective_value(x) - dual_obj;
    (r, rep)
}

enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// m rows of width `ncols + 1`; the last entry is the rhs.
    t: Vec<f64>,
    width: usize,
    ncols: usize,
    m: usize,
    n_struct: usize,
    n_std: usize,
    basis: Vec<usize>,
    active_rows: Vec<usize>,
    iterations: usize,
    opts: SimplexOptions,
    log: VecDeque<String>,
}

impl Tableau {
    fn new(a: &DenseMatrix, b: &[f64], n_le: usize, n_struct: usize, opts: SimplexOptions) -> Self {
        let m = a.nrows();
        let n_std = a.ncols();
        // Rows needing an artificial: equality rows, and <= rows with negative rhs.
        let needs_art: Vec<bool> = (0..m).map(|r| r >= n_le || b[r] < 0.0).collect();
        let n_art = needs_art.iter().filter(|&&v| v).count();
        let ncols = n_std + n_art;
        let width = ncols + 1;
        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut art = n_std;
        for r in 0..m {
            let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
            let row = &mut t[r * width..(r + 1) * width];
            for (j, v) in a.row(r).iter().enumerate() {
                row[j] = sign * v;
            }
            row[ncols] = sign * b[r];
            if needs_art[r] {
                row[art] = 1.0;
                basis[r] = art;
                art += 1;
            } else {
                basis[r] = n_struct + r;
            }
        }
        Self {
            t,
            width,
            ncols,
            m,
            n_struct,
            n_std,
            basis,
            active_rows: (0..m).collect(),
            iterations: 0,
            opts,
            log: VecDeque::new(),
        }
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.width + j]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.width + self.ncols]
    }

    fn pivot_log(&self) -> String {
        self.log.iter().cloned().collect::<Vec<_>>().join("\n")
    }

    fn pivot(&mut self, r: usize, j: usize, cost: &mut [f64]) -> Result<()> {
        let w = self.width;
        let p = self.at(r, j);
        if !p.is_finite() || p.abs() < 1e-300 {
            return Err(Error::NumericalBreakdown {
                message: format!("pivot element {p:e} at row {r}, column {j}"),
                pivot_log: self.pivot_log(),
            });
        }
        if self.log.len() == 32 {
            self.log.pop_front();
        }
        self.log.push_back(format!(
            "it {}: row {r} col {j} pivot {p:.6e} leaving {}",
            self.iterations, self.basis[r]
        ));
        let inv = 1.0 / p;
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[j] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        let nz: Vec<usize> = (0..w).filter(|&k| pivot_row[k] != 0.0).collect();
        for &i in &self.active_rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + j];
            if f != 0.0 {
                let row = &mut self.t[i * w..(i + 1) * w];
                for &k in &nz {
                    row[k] -= f * pivot_row[k];
                }
                row[j] = 0.0;
            }
        }
        let f = cost[j];
        if f != 0.0 {
            for &k in &nz {
                cost[k] -= f * pivot_row[k];
            }
            cost[j] = 0.0;
        }
        self.basis[r] = j;
        self.iterations += 1;
        if self.iterations > self.opts.max_iterations {
            return Err(Error::IterationLimit(self.opts.max_iterations));
        }
        Ok(())
    }

    /// Reduced-cost row (length `ncols + 1`, last entry = -objective) for costs `c`.
    fn cost_row(&self, c: &[f64]) -> Vec<f64> {
        let w = self.width;
        let mut d = vec![0.0; w];
        d[..c.len()].copy_from_slice(c);
        for &r in &self.active_rows {
            let cb = if self.basis[r] < c.len() { c[self.basis[r]] } else { 0.0 };
            if cb != 0.0 {
                let row = &self.t[r * w..(r + 1) * w];
                for k in 0..w {
                    d[k] -= cb * row[k];
                }
            }
        }
        d
    }

    /// Runs simplex iterations with the given reduced-cost row over eligible columns.
    fn iterate(&mut self, cost: &mut [f64], eligible: usize) -> Result<bool> {
        let mut degenerate_run = 0usize;
        let mut skip: Vec<usize> = Vec::new();
        loop {
            let bland = degenerate_run >= self.opts.degenerate_switch;
            let mut enter = None;
            let mut best = -self.opts.cost_tol;
            for j in 0..eligible {
                if skip.contains(&j) {
                    continue;
                }
                let d = cost[j];
                if d < best {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    best = d;
                    enter = Some(j);
                }
            }
            let Some(j) = enter else { return Ok(true) };
            let leave = if bland { self.ratio_bland(j) } else { self.ratio_harris(j) };
            let Some((r, ratio)) = leave else {
                // A column whose entries and reduced cost are both round-off
                // is not a ray; drop it until the next pivot.
                if cost[j] > -1e-9 {
                    skip.push(j);
                    continue;
                }
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, j, cost)?;
            skip.clear();
        }
    }

    /// Minimum ratio, ties broken by smallest basic index.
    fn ratio_bland(&self, j: usize) -> Option<(usize, f64)> {
        let mut leave: Option<(usize, f64)> = None;
        for &r in &self.active_rows {
            let a = self.at(r, j);
            if a > self.opts.pivot_tol {
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-12 * (1.0 + lratio)
                            || (ratio <= lratio + 1e-12 * (1.0 + lratio) && self.basis[r] < self.basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        leave
    }

    /// Two-pass ratio test: among rows whose ratio is within a small
    /// feasibility tolerance of the minimum, take the largest pivot.
    fn ratio_harris(&self, j: usize) -> Option<(usize, f64)> {
        const DELTA: f64 = 1e-9;
        let mut bound = f64::INFINITY;
        for &r in &self.active_rows {
            let a = self.at(r, j);
            if a > self.opts.pivot_tol {
                bound = bound.min((self.rhs(r).max(0.0) + DELTA) / a);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut leave: Option<(usize, f64, f64)> = None;
        for &r in &self.active_rows {
            let a = self.at(r, j);
            if a > self.opts.pivot_tol {
                let ratio = self.rhs(r).max(0.0) / a;
                if ratio <= bound && leave.is_none_or(|(lr, _, la)| a > la || (a == la && self.basis[r] < self.basis[lr])) {
                    leave = Some((r, ratio, a));
                }
            }
        }
        leave.map(|(r, ratio, _)| (r, ratio))
    }

    fn run(&mut self, c: &[f64]) -> Result<Outcome> {
        let n_std = self.n_std;
        let ncols = self.ncols;
        if ncols > n_std {
            // Phase 1: minimize the sum of artificials.
            let mut c1 = vec![0.0; ncols];
            for v in c1.iter_mut().skip(n_std) {
                *v = 1.0;
            }
            let mut cost = self.cost_row(&c1);
            let done = self.iterate(&mut cost, ncols)?;
            debug_assert!(done, "phase 1 is bounded");
            let infeas = -cost[ncols];
            let scale = 1.0
                + self
                    .active_rows
                    .iter()
                    .map(|&r| self.rhs(r).abs())
                    .fold(0.0, f64::max);
            if infeas > 1e-9 * scale {
                return Ok(Outcome::Infeasible);
            }
            // Drive remaining artificials out of the basis.
            let rows = self.active_rows.clone();
            let mut dropped = Vec::new();
            for r in rows {
                if self.basis[r] >= n_std {
                    let col = (0..n_std)
                        .filter(|&j| self.at(r, j).abs() > 1e-9)
                        .max_by(|&a, &b| self.at(r, a).abs().total_cmp(&self.at(r, b).abs()));
                    match col {
                        Some(j) => self.pivot(r, j, &mut cost)?,
                        None => dropped.push(r),
                    }
                }
            }
            self.active_rows.retain(|r| !dropped.contains(r));
        }
        let mut cost = self.cost_row(c);
        if self.iterate(&mut cost, n_std)? {
            Ok(Outcome::Optimal)
        } else {
            Ok(Outcome::Unbounded)
        }
    }
}

#[allow(dead_code)]
impl Tableau {
    fn num_structural(&self) -> usize {
        self.n_struct
    }
    fn num_rows(&self) -> usize {
        self.m
    }
}
