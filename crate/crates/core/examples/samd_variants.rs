//! The eight first-order variants (plain/mirror, stochastic, approximate) on
//! one benchmark instance, configured as the benchmark does.

use invopt::bench::{generate, samd_reference, ExperimentConfig, ExperimentKind};
use invopt::losses::Regularizer;
use invopt::samd::{samd_train, Averaging, SamdConfig, SamdVariant};
use invopt::DistanceFn;

fn main() -> invopt::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SamdBench);
    cfg.n_train = Some(50);
    let data = generate(&cfg, 0)?;
    let phi = cfg.features();
    let reference = samd_reference(&cfg, &data.train, phi.as_ref())?;
    println!("f* = {:.5}", reference.f_star);
    let sc = &cfg.samd;
    let d = DistanceFn::l1();
    for v in SamdVariant::ALL {
        let base = SamdConfig {
            steps: if v.stochastic() { sc.steps_stochastic } else { sc.steps_full },
            averaging: Averaging::None,
            loss_every: Some(if v.stochastic() { sc.loss_every_stochastic } else { sc.loss_every_full }),
            ..SamdConfig::default()
        };
        let (mirror, c) = v.configure(&base, sc.batch_size, sc.max_nodes, reference.kappa_tilde);
        let (_, trace) = samd_train(&data.train, phi.as_ref(), &d, sc.kappa, Regularizer::L1, &mirror, &c)?;
        let best = trace.records.iter().filter_map(|r| r.loss).fold(f64::INFINITY, f64::min);
        println!("{:>5}: {:>5} steps, best recorded gap {:.3e}", v.name(), c.steps, best - reference.f_star);
    }
    Ok(())
}
