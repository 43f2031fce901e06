//! Budgeted oracles for the loss maximization
//! `max_{x ∈ X(s)} <θ, φ(s, x̂) − φ(s, x)> + d(x̂, x)` and for the forward
//! problem `min_{x ∈ X(s)} <θ, φ(s, x)>`.
//!
//! Budget semantics, shared by both oracle families:
//!
//! * exact: every candidate is evaluated, `ε = 0`;
//! * `max_nodes = k`: only the first `k` candidates in canonical order are
//!   evaluated; skipped candidates are covered by an upper bound derived from
//!   the response box (interval bound on `<θ, φ>` plus the largest distance);
//! * `suboptimality_eps = e`: the first candidate whose value is within `e`
//!   of the best evaluated value is returned.
//!
//! The reported `ε` is always `max(best evaluated, bound on skipped) − value`,
//! so it is a valid bound on the suboptimality of the returned response.

use crate::linalg::dot;
use crate::model::{
    Budget, DistanceFn, DistanceKind, DistanceScope, FeatureMap, InnerMax, MixedIntegerOracle,
    Response, Signal,
};
use crate::{Error, Result};

use super::lp::{solve_lp, LinearProgramSpec, LpStatus};

fn check_theta(theta: &[f64], phi: &dyn FeatureMap) -> Result<()> {
    if theta.len() != phi.dim() {
        return Err(Error::DimensionMismatch {
            context: "cost vector vs feature map",
            expected: phi.dim(),
            got: theta.len(),
        });
    }
    Ok(())
}

/// Upper bound of `<θ, φ(x̂)> − <θ, φ(x)> + d(x̂, x)` over the response box.
fn box_upper_bound(
    bbox: Option<&(Vec<f64>, Vec<f64>)>,
    s: &Signal,
    x_hat: &Response,
    theta: &[f64],
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    hat_value: f64,
) -> f64 {
    let Some((lo, hi)) = bbox else { return f64::INFINITY };
    let Some((flo, fhi)) = phi.bounds(s, lo, hi) else { return f64::INFINITY };
    let min_cost: f64 = theta
        .iter()
        .zip(flo.iter().zip(&fhi))
        .map(|(&t, (&l, &h))| if t >= 0.0 { t * l } else { t * h })
        .sum();
    hat_value - min_cost + d.upper_bound(x_hat, lo, hi)
}

/// Picks the returned index among evaluated candidates and computes ε.
fn select(values: &[f64], skipped_bound: Option<f64>, budget: &Budget) -> (usize, f64) {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    let mut pick = best;
    if let Some(e) = budget.suboptimality_eps {
        let floor = values[best] - e;
        pick = values.iter().position(|&v| v >= floor).unwrap_or(best);
    }
    let top = match skipped_bound {
        Some(ub) => values[best].max(ub),
        None => values[best],
    };
    (pick, (top - values[pick]).max(0.0))
}

#[allow(clippy::too_many_arguments)]
pub fn argmax_finite(
    responses: &[Response],
    bbox: Option<(Vec<f64>, Vec<f64>)>,
    s: &Signal,
    x_hat: &Response,
    theta: &[f64],
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    budget: &Budget,
) -> Result<InnerMax> {
    check_theta(theta, phi)?;
    budget.validate()?;
    if responses.is_empty() {
        return Err(Error::Infeasible);
    }
    let hat_value = dot(theta, &phi.eval(s, x_hat));
    let limit = if budget.is_exact() {
        responses.len()
    } else {
        budget.max_nodes.unwrap_or(usize::MAX).min(responses.len())
    };
    let values: Vec<f64> = responses[..limit]
        .iter()
        .map(|x| hat_value - dot(theta, &phi.eval(s, x)) + d.eval(x_hat, x))
        .collect();
    let skipped = (limit < responses.len())
        .then(|| box_upper_bound(bbox.as_ref(), s, x_hat, theta, phi, d, hat_value));
    let (k, eps) = select(&values, skipped, budget);
    Ok(InnerMax {
        response: responses[k].clone(),
        value: values[k],
        eps: if budget.is_exact() { 0.0 } else { eps },
    })
}

pub fn argmin_finite(
    responses: &[Response],
    s: &Signal,
    theta: &[f64],
    phi: &dyn FeatureMap,
) -> Result<Response> {
    check_theta(theta, phi)?;
    let mut best: Option<(usize, f64)> = None;
    for (k, x) in responses.iter().enumerate() {
        let v = dot(theta, &phi.eval(s, x));
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| responses[k].clone()).ok_or(Error::Infeasible)
}

/// Solves `min_y <c, y>` over `{y : A_aug y <= rhs}`, keeping the multipliers.
pub fn y_lp_solution(
    a: &crate::linalg::DenseMatrix,
    rhs: &[f64],
    c: Vec<f64>,
) -> Result<super::lp::LpSolution> {
    let u = c.len();
    let mut spec = LinearProgramSpec::new(c);
    spec.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); u];
    spec.ineq_matrix = a.clone();
    spec.ineq_rhs = rhs.to_vec();
    let sol = solve_lp(&spec)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Unbounded => Err(Error::Unbounded),
        LpStatus::Infeasible => Err(Error::Infeasible),
    }
}

/// Solves `min_y <g, y> (+ sign · y_k)` over `{y : A_aug y <= rhs}`.
fn y_lp(
    a: &crate::linalg::DenseMatrix,
    rhs: &[f64],
    g: &[f64],
    extra: Option<(usize, f64)>,
) -> Result<(Vec<f64>, f64)> {
    let mut c = g.to_vec();
    if let Some((k, sign)) = extra {
        c[k] += sign;
    }
    let sol = y_lp_solution(a, rhs, c)?;
    Ok((sol.x, sol.objective))
}

/// Per-`z` maximization over the continuous block.
struct ZEval {
    value: f64,
    y: Vec<f64>,
}

/// Mixed-integer loss maximization: scan `z` assignments in order, one LP over
/// `y` per assignment, or `2u` of them when the distance carries `‖ŷ − y‖_∞`
/// (one per signed coordinate, `‖v‖_∞ = max_k ±v_k`).
pub fn argmax_mixed_integer(
    s: &Signal,
    z_enum: &[Vec<i64>],
    x_hat: &Response,
    theta: &[f64],
    phi: &dyn FeatureMap,
    d: &DistanceFn,
    budget: &Budget,
) -> Result<InnerMax> {
    check_theta(theta, phi)?;
    budget.validate()?;
    let m = MixedIntegerOracle::signal(s)?;
    let u = m.u();
    if z_enum.is_empty() {
        return Err(Error::Infeasible);
    }
    let penalize_y = match (d.kind, d.scope) {
        (_, DistanceScope::Mixed { penalize_y }) => penalize_y && u > 0,
        (DistanceKind::Zero, DistanceScope::Full) => false,
        _ if u == 0 => false,
        _ => {
            return Err(Error::Unsupported(
                "mixed-integer oracle needs d = d_z(ẑ, z) (+ ‖ŷ − y‖_∞)".into(),
            ))
        }
    };
    if x_hat.continuous.len() != u {
        return Err(Error::DimensionMismatch {
            context: "mixed-integer response continuous block",
            expected: u,
            got: x_hat.continuous.len(),
        });
    }
    let hat_value = dot(theta, &phi.eval(s, x_hat));
    let limit = if budget.is_exact() {
        z_enum.len()
    } else {
        budget.max_nodes.unwrap_or(usize::MAX).min(z_enum.len())
    };

    let mut evals = Vec::with_capacity(limit);
    for z in &z_enum[..limit] {
        let (mmat, m0) = phi.affine_in_continuous(s, u, z);
        let g = mmat.tr_mul_vec(theta);
        let base = hat_value - dot(theta, &m0) + dz(d, &x_hat.discrete, z);
        let eval = if u == 0 {
            ZEval {
                value: base,
                y: Vec::new(),
            }
        } else {
            let (a, rhs) = m.y_system(z);
            if penalize_y {
                let mut best: Option<ZEval> = None;
                for k in 0..u {
                    for sign in [1.0, -1.0] {
                        // + sign·(ŷ_k − y_k)
                        let (y, obj) = y_lp(&a, &rhs, &g, Some((k, sign)))?;
                        let value = base - obj + sign * x_hat.continuous[k];
                        if best.as_ref().is_none_or(|b| value > b.value) {
                            best = Some(ZEval { value, y });
                        }
                    }
                }
                best.expect("u > 0")
            } else {
                let (y, obj) = y_lp(&a, &rhs, &g, None)?;
                ZEval {
                    value: base - obj,
                    y,
                }
            }
        };
        evals.push(eval);
    }

    let skipped = (limit < z_enum.len()).then(|| {
        // Bound over skipped assignments using the y-box.
        if !m.y_box && u > 0 {
            return f64::INFINITY;
        }
        let dy = if penalize_y { 1.0 } else { 0.0 };
        z_enum[limit..]
            .iter()
            .map(|z| {
                let (mmat, m0) = phi.affine_in_continuous(s, u, z);
                let g = mmat.tr_mul_vec(theta);
                let min_y: f64 = g.iter().map(|&gi| gi.min(0.0)).sum();
                hat_value - dot(theta, &m0) - min_y + dz(d, &x_hat.discrete, z) + dy
            })
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let values: Vec<f64> = evals.iter().map(|e| e.value).collect();
    let (k, eps) = select(&values, skipped, budget);
    let mut y = evals[k].y.clone();
    if m.y_box {
        for v in &mut y {
            *v = v.clamp(0.0, 1.0);
        }
    }
    Ok(InnerMax {
        response: Response::mixed(y, z_enum[k].clone()),
        value: values[k],
        eps: if budget.is_exact() { 0.0 } else { eps },
    })
}

fn dz(d: &DistanceFn, z_hat: &[i64], z: &[i64]) -> f64 {
    match d.scope {
        DistanceScope::Mixed { .. } => d.discrete_part(z_hat, z),
        DistanceScope::Full => d.eval(&Response::discrete(z_hat.to_vec()), &Response::discrete(z.to_vec())),
    }
}

pub fn argmin_mixed_integer(
    s: &Signal,
    z_enum: &[Vec<i64>],
    theta: &[f64],
    phi: &dyn FeatureMap,
) -> Result<Response> {
    check_theta(theta, phi)?;
    let m = MixedIntegerOracle::signal(s)?;
    let u = m.u();
    let mut best: Option<(f64, Response)> = None;
    for z in z_enum {
        let (mmat, m0) = phi.affine_in_continuous(s, u, z);
        let g = mmat.tr_mul_vec(theta);
        let (y, obj) = if u == 0 {
            (Vec::new(), 0.0)
        } else {
            let (a, rhs) = m.y_system(z);
            y_lp(&a, &rhs, &g, None)?
        };
        let v = obj + dot(theta, &m0);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            let y = if m.y_box { y.iter().map(|v| v.clamp(0.0, 1.0)).collect() } else { y };
            best = Some((v, Response::mixed(y, z.clone())));
        }
    }
    best.map(|(_, r)| r).ok_or(Error::Infeasible)
}
