//! The embedded simplex and QP solvers with their KKT certificates.

use invopt::linalg::DenseMatrix;
use invopt::solvers::{solve_lp, solve_qp, LinearProgramSpec, QpSpec};

fn main() -> invopt::Result<()> {
    // min -x - 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x, y >= 0
    let mut lp = LinearProgramSpec::new(vec![-1.0, -2.0]);
    lp.add_ineq(&[1.0, 1.0], 4.0);
    lp.add_ineq(&[1.0, 3.0], 6.0);
    let s = solve_lp(&lp)?;
    println!("LP {:?}: x = {:?}, objective {}, duals {:?}", s.status, s.x, s.objective, s.ineq_duals);
    println!("   max KKT residual {:.1e}", s.kkt.max_residual());

    // Projection of (2, 2) onto x + y <= 1.
    let mut qp = QpSpec::new(DenseMatrix::identity(2), vec![-2.0, -2.0]);
    qp.add_ineq(&[1.0, 1.0], 1.0);
    let s = solve_qp(&qp)?;
    println!("QP {:?}: x = {:.6?}, max KKT residual {:.1e}", s.status, s.x, s.kkt.max_residual());
    Ok(())
}
