//! Noisy binary-LP data: the enumerated ASL trainer against the
//! suboptimality-loss baseline.

use invopt::bench::{decision_metrics, generate, theta_error, ExperimentConfig, ExperimentKind};
use invopt::losses::Regularizer;
use invopt::model::IdentityFeatures;
use invopt::reformulate::{train_asl_enumerated, train_suboptimality_facets};
use invopt::{DistanceFn, ThetaSet};

fn main() -> invopt::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Inconsistent);
    cfg.n_train = Some(60);
    let data = generate(&cfg, 1)?;
    let phi = IdentityFeatures::new(cfg.n());

    let asl = train_asl_enumerated(&data.train, &phi, &DistanceFn::l1(), 0.001, Regularizer::HalfSqL2, &ThetaSet::All, false)?;
    let sl = train_suboptimality_facets(&data.train, &phi, &ThetaSet::All)?;
    for (name, theta, obj) in [("asl", &asl.theta, asl.objective), ("sl_facets", &sl.theta, sl.objective)] {
        let (err, gap) = decision_metrics(&data.test, &phi, &data.theta_true, theta)?;
        println!(
            "{name:>10}: objective {obj:.4}, theta error {:.4}, test response error {err:.3}, cost gap {gap:.4}",
            theta_error(&data.theta_true, theta)
        );
    }
    println!("asl: {} working rows after {} rounds, KKT {:.1e}", asl.working_rows, asl.rounds, asl.kkt.max_residual());
    Ok(())
}
