//! Mixed-integer responses: the dual LP trainer with and without the
//! continuous distance term, against the feasibility baseline.

use invopt::bench::{decision_metrics, generate, ExperimentConfig, ExperimentKind};
use invopt::losses::Regularizer;
use invopt::model::MixedLinearFeatures;
use invopt::reformulate::{train_asl_mixed_integer_lp, train_feasibility_mixed_integer};
use invopt::{DistanceKind, ThetaSet};

fn main() -> invopt::Result<()> {
    let cfg = ExperimentConfig::new(ExperimentKind::MixedInteger);
    let data = generate(&cfg, 2)?;
    let phi = MixedLinearFeatures::standard(cfg.u(), cfg.v());
    let runs = [
        ("feasibility", train_feasibility_mixed_integer(&data.train, &phi)?),
        (
            "asl_z",
            train_asl_mixed_integer_lp(&data.train, &phi, DistanceKind::Euclidean, 0.0, Regularizer::None, &ThetaSet::NonnegOrthant, false)?,
        ),
        (
            "asl_yz",
            train_asl_mixed_integer_lp(&data.train, &phi, DistanceKind::Euclidean, 0.0, Regularizer::None, &ThetaSet::NonnegOrthant, true)?,
        ),
    ];
    for (name, sol) in &runs {
        let (train_err, _) = decision_metrics(&data.train, &phi, &data.theta_true, &sol.theta)?;
        let (test_err, gap) = decision_metrics(&data.test, &phi, &data.theta_true, &sol.theta)?;
        println!("{name:>12}: in-sample error {train_err:.3}, test error {test_err:.3}, cost gap {gap:.4}");
    }
    Ok(())
}
