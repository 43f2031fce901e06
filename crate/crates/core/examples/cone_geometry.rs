//! Consistent data: build the cone of compatible cost vectors and compare the
//! feasibility point, the incenter and the circumcenter against θ_true.

use invopt::bench::{generate, theta_error, ExperimentConfig, ExperimentKind};
use invopt::geometry::{build_cone, circumcenter_desk, feasibility_program, incenter, Offsets};
use invopt::losses::Regularizer;
use invopt::model::IdentityFeatures;
use invopt::ThetaSet;

fn main() -> invopt::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Consistent);
    cfg.n_train = Some(30);
    let data = generate(&cfg, 0)?;
    let phi = IdentityFeatures::new(cfg.n());
    let cone = build_cone(&data.train, &phi)?;
    println!("{} instances, {} cone rows, theta_true = {:.3?}", data.train.len(), cone.len(), data.theta_true);

    let f = feasibility_program(&cone, &ThetaSet::All)?;
    println!("feasibility   error {:.4}  {:.3?}", theta_error(&data.theta_true, &f), f.to_vec());

    let r = incenter(&cone, &ThetaSet::All, Regularizer::HalfSqL2, &Offsets::RowNorm)?;
    println!("incenter      error {:.4}  margin {:.3e}", theta_error(&data.theta_true, &r.theta), r.margin_r);

    let c = circumcenter_desk(&cone, &ThetaSet::All, 8)?;
    println!("circumcenter  error {:.4}", theta_error(&data.theta_true, &c));
    Ok(())
}
