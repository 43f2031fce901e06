//! Geometry of the consistent cone
//! `C = {θ : <θ, φ(ŝ_i, x̂_i) − φ(ŝ_i, x)> <= 0 for all i and all x ∈ X(ŝ_i)}`.
//!
//! * [`feasibility_program`]: any nonzero element of `C ∩ Θ`,
//! * [`incenter`]: the unit vector deepest inside `C` (largest angle to the
//!   exterior), computed as `min ½‖θ‖² s.t. <θ, a_k> + ‖a_k‖ <= 0` and
//!   normalized; the general form accepts other offsets, Θ and regularizers,
//! * [`circumcenter_desk`]: axis of the narrowest revolution cone containing
//!   `C`, by extreme-ray enumeration (small `p` only).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm1, norm2, DenseMatrix};
use crate::losses::Regularizer;
use crate::model::{CostVector, DistanceFn, FeatureMap, IODataset, Response, ThetaSet};
use crate::solvers::lazy::{solve_lp_lazy, RowFamily};
use crate::solvers::lp::{LinearProgramSpec, LpStatus};
use crate::solvers::qp::{solve_qp_implicit, ConstraintSource, QpOptions, QpStatus};
use crate::{Error, Result};

/// Rows `<θ, a_k> <= 0` of the consistent cone.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ConeDescription {
    pub rows: Vec<Vec<f64>>,
    /// `(instance index, response)` that produced each row.
    pub provenance: Vec<(usize, Response)>,
    /// `d(x̂_i, x)` per row when built with a distance.
    pub distances: Option<Vec<f64>>,
    /// Whether the rows have been scaled to unit Euclidean norm.
    pub normalize: bool,
    pub dim: usize,
}

impl ConeDescription {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: "cone row length",
                expected: dim,
                got: bad.len(),
            });
        }
        let provenance = (0..rows.len()).map(|k| (k, Response::default())).collect();
        Ok(Self {
            rows,
            provenance,
            distances: None,
            normalize: false,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Copy with rows scaled to unit length.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            let n = norm2(r);
            r.iter_mut().for_each(|v| *v /= n);
        }
        out.normalize = true;
        out
    }

    /// Whether `θ` satisfies every row up to `tol`.
    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|r| dot(r, theta) <= tol)
    }

    /// Smallest angle (radians) between unit `θ` and a row hyperplane; this is
    /// the angle to the exterior of the cone when `θ` lies inside it.
    pub fn min_boundary_angle(&self, theta: &[f64]) -> f64 {
        let tn = norm2(theta);
        self.rows
            .iter()
            .map(|r| (-dot(r, theta) / (tn * norm2(r))).clamp(-1.0, 1.0).asin())
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV: `instance_index,response,a_0,...,a_{p-1}`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["instance_index".to_string(), "response".to_string()];
        header.extend((0..self.dim).map(|k| format!("a_{k}")));
        wr.write_record(&header)?;
        for (row, (i, x)) in self.rows.iter().zip(&self.provenance) {
            let mut rec = vec![i.to_string(), x.to_compact()];
            rec.extend(row.iter().map(|v| format!("{v}")));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// One row per (instance, feasible response) with a nonzero feature difference.
pub fn build_cone(ds: &IODataset, phi: &dyn FeatureMap) -> Result<ConeDescription> {
    build_cone_impl(ds, phi, None)
}

/// As [`build_cone`], also recording `d(x̂_i, x)` for every row.
pub fn build_cone_with_distance(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    d: &DistanceFn,
) -> Result<ConeDescription> {
    build_cone_impl(ds, phi, Some(d))
}

fn build_cone_impl(ds: &IODataset, phi: &dyn FeatureMap, d: Option<&DistanceFn>) -> Result<ConeDescription> {
    let p = ds.check_dimension(phi)?;
    let mut cone = ConeDescription {
        dim: p,
        distances: d.map(|_| Vec::new()),
        ..Default::default()
    };
    for (i, inst) in ds.instances.iter().enumerate() {
        let xs = inst.oracle.enumerate(&inst.signal)?;
        let f_hat = phi.eval(&inst.signal, &inst.response);
        for x in xs.iter() {
            let f = phi.eval(&inst.signal, x);
            let row: Vec<f64> = f_hat.iter().zip(&f).map(|(a, b)| a - b).collect();
            if row.iter().all(|&v| v == 0.0) {
                continue;
            }
            cone.rows.push(row);
            cone.provenance.push((i, x.clone()));
            if let (Some(dist), Some(list)) = (d, cone.distances.as_mut()) {
                list.push(dist.eval(&inst.response, x));
            }
        }
    }
    Ok(cone)
}

/// Separation over explicit cone rows with per-row offsets:
/// `<θ, a_k> + off_k <= 0`, optionally embedded in a larger variable vector.
struct ConeRows<'a> {
    rows: &'a [Vec<f64>],
    offsets: Option<&'a [f64]>,
    nvars: usize,
    per_round: usize,
}

impl RowFamily for ConeRows<'_> {
    fn separate(&self, x: &[f64], tol: f64) -> Result<Vec<(usize, Vec<f64>, f64)>> {
        let p = self.rows.first().map_or(0, Vec::len);
        let mut viol: Vec<(usize, f64)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let off = self.offsets.map_or(0.0, |o| o[k]);
                (k, dot(r, &x[..p]) + off)
            })
            .filter(|&(_, v)| v > tol)
            .collect();
        viol.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        viol.truncate(self.per_round);
        Ok(viol
            .into_iter()
            .map(|(k, _)| {
                let mut row = self.rows[k].clone();
                row.resize(self.nvars, 0.0);
                (k, row, -self.offsets.map_or(0.0, |o| o[k]))
            })
            .collect())
    }
}

fn lp_rows_round(m: usize) -> usize {
    (m / 20).clamp(8, 64)
}

/// A nonzero `θ ∈ C ∩ Θ`, normalized to `‖θ‖₁ = 1`.
///
/// For the nonnegative orthant this is the LP `⟨1, θ⟩ = 1, θ >= 0, θ ∈ C`.
/// For `Θ = R^p` the 2p LPs with `θ_k = ±1` are tried in order.
pub fn feasibility_program(cone: &ConeDescription, theta_set: &ThetaSet) -> Result<CostVector> {
    let p = cone.dim;
    if p == 0 {
        return Err(Error::Invalid("cone of dimension 0".into()));
    }
    let family = ConeRows {
        rows: &cone.rows,
        offsets: None,
        nvars: p,
        per_round: lp_rows_round(cone.len()),
    };
    let tol = 1e-10;
    match theta_set {
        ThetaSet::NonnegOrthant => {
            let mut lp = LinearProgramSpec::new(vec![0.0; p]);
            lp.add_eq(&vec![1.0; p], 1.0);
            let sol = solve_lp_lazy(&lp, &family, vec![], tol, 10_000)?.solution;
            match sol.status {
                LpStatus::Optimal => CostVector::new(sol.x),
                _ => Err(Error::InconsistentData),
            }
        }
        ThetaSet::All | ThetaSet::Box { .. } => {
            let bounds = theta_set.bounds(p).expect("box-type set");
            for k in 0..p {
                for sign in [1.0, -1.0] {
                    let (lo, hi) = bounds[k];
                    if sign > 0.0 && hi <= 0.0 || sign < 0.0 && lo >= 0.0 {
                        continue;
                    }
                    let mut lp = LinearProgramSpec::new(vec![0.0; p]);
                    lp.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); p];
                    let mut e = vec![0.0; p];
                    e[k] = 1.0;
                    lp.add_eq(&e, sign);
                    // Cone: scale is free, so only sign restrictions of Θ matter.
                    for (j, &(l, h)) in bounds.iter().enumerate() {
                        if l >= 0.0 {
                            lp.bounds[j].0 = 0.0;
                        }
                        if h <= 0.0 {
                            lp.bounds[j].1 = 0.0;
                        }
                    }
                    let sol = solve_lp_lazy(&lp, &family, vec![], tol, 10_000)?.solution;
                    if sol.status == LpStatus::Optimal {
                        let n = norm1(&sol.x);
                        return CostVector::new(sol.x.iter().map(|v| v / n).collect());
                    }
                }
            }
            Err(Error::InconsistentData)
        }
        ThetaSet::L1Ball { .. } => Err(Error::Unsupported(
            "feasibility program takes Θ = all, nonneg_orthant or a box".into(),
        )),
    }
}

/// Right-hand sides of the generalized incenter rows `<θ, a_k> + d_k <= 0`.
#[derive(Clone, Debug, Default)]
pub enum Offsets {
    /// `d_k = ‖a_k‖₂`: the plain incenter.
    #[default]
    RowNorm,
    /// `d_k = d(x̂_i, x)` from [`build_cone_with_distance`].
    Distance,
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IncenterResult {
    pub theta: CostVector,
    pub margin_r: f64,
    pub raw_theta: CostVector,
    /// Largest KKT residual of the underlying program.
    pub kkt_residual: f64,
}

/// Inequalities of the incenter QP: cone rows with offsets, then the sign
/// rows of Θ.
struct IncenterRows<'a> {
    rows: &'a [Vec<f64>],
    offsets: &'a [f64],
    nonneg: bool,
}

impl ConstraintSource for IncenterRows<'_> {
    fn len(&self) -> usize {
        self.rows.len() + if self.nonneg { self.rows.first().map_or(0, Vec::len) } else { 0 }
    }

    fn row(&self, k: usize) -> (Vec<f64>, f64) {
        if k < self.rows.len() {
            (self.rows[k].clone(), -self.offsets[k])
        } else {
            let p = self.rows[0].len();
            let mut r = vec![0.0; p];
            r[k - self.rows.len()] = -1.0;
            (r, 0.0)
        }
    }

    fn residual(&self, k: usize, x: &[f64]) -> f64 {
        if k < self.rows.len() {
            dot(&self.rows[k], x) + self.offsets[k]
        } else {
            -x[k - self.rows.len()]
        }
    }
}

/// Generalized incenter: `min R(θ) s.t. <θ, a_k> + d_k <= 0, θ ∈ Θ`,
/// normalized. With `R = ½‖·‖²` and row-norm offsets this is the incenter.
pub fn incenter(
    cone: &ConeDescription,
    theta_set: &ThetaSet,
    regularizer: Regularizer,
    offsets: &Offsets,
) -> Result<IncenterResult> {
    if cone.is_empty() {
        return Err(Error::Invalid(
            "cone has no rows (C = R^p); the incenter is undefined".into(),
        ));
    }
    let off: Vec<f64> = match offsets {
        Offsets::RowNorm => cone.rows.iter().map(|r| norm2(r)).collect(),
        Offsets::Distance => cone
            .distances
            .clone()
            .ok_or_else(|| Error::Invalid("cone was built without distances".into()))?,
        Offsets::Custom(v) => {
            if v.len() != cone.len() {
                return Err(Error::DimensionMismatch {
                    context: "incenter offsets",
                    expected: cone.len(),
                    got: v.len(),
                });
            }
            v.clone()
        }
    };
    let (raw, kkt_residual) = match regularizer {
        Regularizer::HalfSqL2 => incenter_qp(cone, theta_set, &off)?,
        Regularizer::L1 | Regularizer::None => incenter_lp(cone, theta_set, &off, regularizer)?,
    };
    let n = norm2(&raw);
    if n == 0.0 {
        return Err(Error::NoStrictInterior);
    }
    Ok(IncenterResult {
        theta: CostVector::new(raw.iter().map(|v| v / n).collect())?,
        margin_r: 1.0 / n,
        raw_theta: CostVector::new(raw)?,
        kkt_residual,
    })
}

fn incenter_qp(cone: &ConeDescription, theta_set: &ThetaSet, off: &[f64]) -> Result<(Vec<f64>, f64)> {
    let p = cone.dim;
    let nonneg = match theta_set {
        ThetaSet::All => false,
        ThetaSet::NonnegOrthant => true,
        _ => {
            return Err(Error::Unsupported(
                "incenter with ½‖θ‖² takes Θ = all or nonneg_orthant".into(),
            ))
        }
    };
    let src = IncenterRows {
        rows: &cone.rows,
        offsets: off,
        nonneg,
    };
    let sol = solve_qp_implicit(&DenseMatrix::identity(p), &vec![0.0; p], &[], &src, &QpOptions::default())?;
    match sol.status {
        QpStatus::Optimal => {}
        QpStatus::Infeasible => return Err(Error::NoStrictInterior),
        QpStatus::IterationLimit => return Err(Error::IterationLimit(QpOptions::default().max_iterations)),
        QpStatus::Unbounded => return Err(Error::Unbounded),
    }
    // Certify: θ + Σ λ_k row_k = 0, primal feasibility, complementarity.
    let x = sol.x;
    let mut stat = x.clone();
    let mut comp: f64 = 0.0;
    for &(k, lam) in &sol.active {
        let (row, rhs) = src.row(k);
        crate::linalg::axpy(lam, &row, &mut stat);
        comp = comp.max((lam * (dot(&row, &x) - rhs)).abs());
    }
    let primal = (0..src.len())
        .map(|k| src.residual(k, &x))
        .fold(0.0_f64, f64::max);
    let kkt = crate::linalg::norm_inf(&stat).max(primal).max(comp);
    if kkt > 1e-6 {
        return Err(Error::NumericalBreakdown {
            message: format!("incenter KKT residual {kkt:e}"),
            pivot_log: String::new(),
        });
    }
    Ok((x, kkt))
}

fn incenter_lp(
    cone: &ConeDescription,
    theta_set: &ThetaSet,
    off: &[f64],
    regularizer: Regularizer,
) -> Result<(Vec<f64>, f64)> {
    let p = cone.dim;
    let bounds = theta_set
        .bounds(p)
        .ok_or_else(|| Error::Unsupported("incenter LP needs a box-type Θ".into()))?;
    // θ = θ⁺ − θ⁻ for the ℓ1 objective.
    let (nv, objective) = match regularizer {
        Regularizer::L1 => (2 * p, vec![1.0; 2 * p]),
        _ => (p, vec![0.0; p]),
    };
    let mut lp = LinearProgramSpec::new(objective);
    let rows: Vec<Vec<f64>> = if nv == p {
        lp.bounds = bounds;
        cone.rows.clone()
    } else {
        for j in 0..p {
            let (l, h) = bounds[j];
            lp.bounds[j] = (0.0, if h >= 0.0 { h } else { 0.0 });
            lp.bounds[p + j] = (0.0, if l <= 0.0 { -l } else { 0.0 });
        }
        cone.rows
            .iter()
            .map(|r| r.iter().copied().chain(r.iter().map(|v| -v)).collect())
            .collect()
    };
    let family = ConeRows {
        rows: &rows,
        offsets: Some(off),
        nvars: nv,
        per_round: lp_rows_round(rows.len()),
    };
    let sol = solve_lp_lazy(&lp, &family, vec![], 1e-10, 10_000)?.solution;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::NoStrictInterior),
        LpStatus::Unbounded => return Err(Error::Unbounded),
    }
    let theta = if nv == p {
        sol.x.clone()
    } else {
        (0..p).map(|j| sol.x[j] - sol.x[p + j]).collect()
    };
    Ok((theta, sol.kkt.max_residual()))
}

/// Angle between two nonzero vectors, in `[0, π]`.
pub fn angle(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            context: "angle operands",
            expected: u.len(),
            got: v.len(),
        });
    }
    let (nu, nv) = (norm2(u), norm2(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Invalid("angle of a zero vector".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0).acos())
}

const RANK_TOL: f64 = 1e-9;
const RAY_MERGE_ANGLE: f64 = 1e-7;
/// Upper limit on the number of row subsets scanned for extreme rays.
pub const MAX_RAY_SUBSETS: u64 = 20_000_000;

/// Normalized rows with near-duplicates merged.
fn dedup_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let n = norm2(r);
        if n == 0.0 {
            continue;
        }
        let u: Vec<f64> = r.iter().map(|v| v / n).collect();
        if !out.iter().any(|w| dot(w, &u) > (RAY_MERGE_ANGLE).cos()) {
            out.push(u);
        }
    }
    out
}

/// Drops rows implied by the others: row k is redundant when
/// `max <a_k, θ>` over the other rows and `‖θ‖_∞ <= 1` is 0.
fn irredundant_rows(rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let p = rows.first().map_or(0, Vec::len);
    let mut keep = rows.clone();
    let mut k = 0;
    while k < keep.len() {
        let mut lp = LinearProgramSpec::new(keep[k].iter().map(|v| -v).collect());
        lp.bounds = vec![(-1.0, 1.0); p];
        for (j, r) in keep.iter().enumerate() {
            if j != k {
                lp.add_ineq(r, 0.0);
            }
        }
        let sol = crate::solvers::lp::solve_lp(&lp)?;
        if sol.status == LpStatus::Optimal && -sol.objective <= 1e-9 {
            keep.remove(k);
        } else {
            k += 1;
        }
    }
    Ok(keep)
}

/// Unit vector spanning the nullspace of `m` (`(p−1) × p`), if it is one-dimensional.
fn nullspace_1d(m: &[&[f64]], p: usize) -> Option<Vec<f64>> {
    let rows = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..p {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if val <= RANK_TOL {
            continue;
        }
        a.swap(r, piv);
        let d = a[r][c];
        for v in a[r].iter_mut() {
            *v /= d;
        }
        for i in 0..rows {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in 0..p {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if pivot_cols.len() != p - 1 {
        return None;
    }
    let free = (0..p).find(|c| !pivot_cols.contains(c))?;
    let mut x = vec![0.0; p];
    x[free] = 1.0;
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = -a[i][free];
    }
    let n = norm2(&x);
    Some(x.iter().map(|v| v / n).collect())
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Unit extreme rays of `C ∩ Θ` (Θ = all or the nonnegative orthant).
pub fn extreme_rays(cone: &ConeDescription, theta_set: &ThetaSet) -> Result<Vec<Vec<f64>>> {
    let p = cone.dim;
    let mut rows = cone.rows.clone();
    match theta_set {
        ThetaSet::All => {}
        ThetaSet::NonnegOrthant => {
            for j in 0..p {
                let mut r = vec![0.0; p];
                r[j] = -1.0;
                rows.push(r);
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "extreme rays need Θ = all or nonneg_orthant".into(),
            ))
        }
    }
    let rows = irredundant_rows(dedup_rows(&rows))?;
    if p == 1 {
        // Rays are ±1 if they satisfy every row.
        return Ok([1.0, -1.0]
            .into_iter()
            .filter(|&s| rows.iter().all(|r| r[0] * s <= RANK_TOL))
            .map(|s| vec![s])
            .collect());
    }
    let k = p - 1;
    if rows.len() < k {
        return Ok(Vec::new());
    }
    if binomial(rows.len(), k) > MAX_RAY_SUBSETS {
        return Err(Error::Unsupported(format!(
            "{} irredundant rows in dimension {p}: too many subsets to scan",
            rows.len()
        )));
    }
    let mut rays: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_slice()).collect();
        if let Some(r) = nullspace_1d(&sub, p) {
            for cand in [r.clone(), r.iter().map(|v| -v).collect::<Vec<f64>>()] {
                if rows.iter().all(|a| dot(a, &cand) <= RANK_TOL)
                    && !rays.iter().any(|e| dot(e, &cand) > RAY_MERGE_ANGLE.cos())
                {
                    rays.push(cand);
                }
            }
        }
        // Next k-subset in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(rays);
            }
            i -= 1;
            if idx[i] < rows.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Circumcenter for small `p`: the unit `θ` maximizing the smallest inner
/// product with the unit extreme rays `E` of `C ∩ Θ`, computed as the
/// normalized minimum-norm point of `{θ : <θ, e> >= 1 ∀e ∈ E}`.
pub fn circumcenter_desk(cone: &ConeDescription, theta_set: &ThetaSet, max_dim: usize) -> Result<CostVector> {
    let p = cone.dim;
    if p > max_dim {
        return Err(Error::CircumcenterDimension { p, max_dim });
    }
    let rays = extreme_rays(cone, theta_set)?;
    if rays.is_empty() {
        return Err(Error::NoExtremeRays);
    }
    let neg: Vec<Vec<f64>> = rays.iter().map(|e| e.iter().map(|v| -v).collect()).collect();
    let src = crate::solvers::qp::DenseRows {
        rhs: vec![-1.0; neg.len()],
        rows: neg,
    };
    let sol = solve_qp_implicit(&DenseMatrix::identity(p), &vec![0.0; p], &[], &src, &QpOptions::default())?;
    if sol.status != QpStatus::Optimal {
        // Rays spanning opposite directions: C is not pointed.
        return Err(Error::NoExtremeRays);
    }
    let n = norm2(&sol.x);
    CostVector::new(sol.x.iter().map(|v| v / n).collect())
}

/// Smallest inner product between unit `θ` and the given unit rays.
pub fn min_ray_cosine(theta: &[f64], rays: &[Vec<f64>]) -> f64 {
    let n = norm2(theta);
    rays.iter()
        .map(|e| dot(e, theta) / n)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{binary_points, IOInstance, IdentityFeatures};

    fn quadrant() -> ConeDescription {
        ConeDescription::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap()
    }

    #[test]
    fn cone_of_square() {
        let xs: Vec<Response> = binary_points(2).map(Response::discrete).collect();
        let ds = IODataset::new(vec![IOInstance::finite(xs, Response::discrete(vec![0, 0]))], 0).unwrap();
        let cone = build_cone(&ds, &IdentityFeatures::new(2)).unwrap();
        assert_eq!(cone.rows, vec![vec![0.0, -1.0], vec![-1.0, 0.0], vec![-1.0, -1.0]]);
        let single = IODataset::new(
            vec![IOInstance::finite(vec![Response::discrete(vec![1])], Response::discrete(vec![1]))],
            0,
        )
        .unwrap();
        assert!(build_cone(&single, &IdentityFeatures::new(1)).unwrap().is_empty());
    }

    #[test]
    fn feasibility_examples() {
        let th = feasibility_program(&quadrant(), &ThetaSet::NonnegOrthant).unwrap();
        assert!(quadrant().contains(&th, 1e-12));
        assert!((th.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let empty = ConeDescription {
            dim: 3,
            ..Default::default()
        };
        let th = feasibility_program(&empty, &ThetaSet::NonnegOrthant).unwrap();
        assert!((th.iter().sum::<f64>() - 1.0).abs() < 1e-12 && th.iter().all(|&v| v >= 0.0));
        let zero = ConeDescription::from_rows(vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ])
        .unwrap();
        assert!(matches!(feasibility_program(&zero, &ThetaSet::All), Err(Error::InconsistentData)));
    }

    #[test]
    fn incenter_examples() {
        let r = incenter(&quadrant(), &ThetaSet::All, Regularizer::HalfSqL2, &Offsets::RowNorm).unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.theta[0] - s).abs() < 1e-12 && (r.theta[1] - s).abs() < 1e-12);
        assert!((r.margin_r - s).abs() < 1e-12);
        assert!((r.margin_r * norm2(&r.raw_theta) - 1.0).abs() < 1e-12);
        let tri: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let tri = ConeDescription::from_rows(tri).unwrap();
        assert!(matches!(
            incenter(&tri, &ThetaSet::All, Regularizer::HalfSqL2, &Offsets::RowNorm),
            Err(Error::NoStrictInterior)
        ));
    }

    #[test]
    fn circumcenter_examples() {
        let c = circumcenter_desk(&quadrant(), &ThetaSet::All, 8).unwrap();
        let s = 0.5f64.sqrt();
        assert!((c[0] - s).abs() < 1e-12 && (c[1] - s).abs() < 1e-12);
        let octant = ConeDescription::from_rows(vec![
            vec![-1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ])
        .unwrap();
        let c = circumcenter_desk(&octant, &ThetaSet::All, 8).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert!(c.iter().all(|v| (v - t).abs() < 1e-12));
        let big = ConeDescription {
            dim: 9,
            ..Default::default()
        };
        assert!(matches!(
            circumcenter_desk(&big, &ThetaSet::All, 8),
            Err(Error::CircumcenterDimension { p: 9, max_dim: 8 })
        ));
    }

    #[test]
    fn angles() {
        assert_eq!(angle(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((angle(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((angle(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(angle(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn cone_csv_export() {
        let mut buf = Vec::new();
        quadrant().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("instance_index,response,a_0,a_1\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
