use crate::linalg::{dot, DenseMatrix};
use crate::solvers::lp::{solve_lp, LinearProgramSpec, LpStatus};
use crate::{Error, Result};

/// Affine form of `<θ, x̂ − x> + ‖x̂ − x‖₁` on binary `x`:
/// returns `(c_lin, c_const)` with the objective equal to `<c_lin, x> + c_const`,
/// using `‖x̂ − x‖₁ = <1 − 2x̂, x> + <1, x̂>`.
pub fn tu_inner_rewrite(x_hat: &[i64], theta: &[f64]) -> Result<(Vec<f64>, f64)> {
    if x_hat.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            context: "tu_inner_rewrite x̂ vs θ",
            expected: theta.len(),
            got: x_hat.len(),
        });
    }
    if let Some(&bad) = x_hat.iter().find(|&&v| v != 0 && v != 1) {
        return Err(Error::Invalid(format!("x̂ must be binary, found {bad}")));
    }
    let xh: Vec<f64> = x_hat.iter().map(|&v| v as f64).collect();
    let c_lin = xh.iter().zip(theta).map(|(&x, &t)| 1.0 - 2.0 * x - t).collect();
    let c_const = dot(theta, &xh) + xh.iter().sum::<f64>();
    Ok((c_lin, c_const))
}

/// `max_x <θ, x̂ − x> + ‖x̂ − x‖₁` over `{x ∈ [0,1]^n : A x <= b}` as one LP.
/// Equals the maximum over binary `x` when `[A; I]` is totally unimodular and
/// `b` is integral.
pub fn tu_asl_lp(a: &DenseMatrix, b: &[f64], x_hat: &[i64], theta: &[f64]) -> Result<f64> {
    let (c_lin, c_const) = tu_inner_rewrite(x_hat, theta)?;
    let n = c_lin.len();
    let mut spec = LinearProgramSpec::new(c_lin.iter().map(|v| -v).collect());
    spec.bounds = vec![(0.0, 1.0); n];
    spec.ineq_matrix = a.clone();
    spec.ineq_rhs = b.to_vec();
    let sol = solve_lp(&spec)?;
    match sol.status {
        LpStatus::Optimal => Ok(c_const - sol.objective),
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_ones() {
        let theta = [0.3, -0.7, 2.0];
        let (c, k) = tu_inner_rewrite(&[0, 0, 0], &theta).unwrap();
        assert_eq!(c, vec![0.7, 1.7, -1.0]);
        assert_eq!(k, 0.0);
        let (c, k) = tu_inner_rewrite(&[1, 1, 1], &[0.0; 3]).unwrap();
        assert_eq!(c, vec![-1.0; 3]);
        assert_eq!(k, 3.0);
        assert!(tu_inner_rewrite(&[2, 0, 0], &theta).is_err());
    }
}
