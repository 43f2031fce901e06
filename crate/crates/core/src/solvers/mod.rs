//! Embedded LP / QP solvers and the inner maximization oracles.

pub mod argmax;
pub mod lazy;
pub mod lp;
pub mod qp;

pub use argmax::{argmax_finite, argmax_mixed_integer, argmin_finite, argmin_mixed_integer, y_lp_solution};
pub use lazy::{solve_lp_lazy, RowFamily};
pub use lp::{certify, solve_lp, KktReport, LinearProgramSpec, LpSolution, LpStatus};
pub use qp::{solve_qp, solve_qp_implicit, ConstraintSource, DenseRows, QpSolution, QpSpec, QpStatus};
