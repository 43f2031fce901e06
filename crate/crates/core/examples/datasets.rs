//! Generating a dataset, saving it as JSON Lines and loading it back.

use invopt::bench::{generate, ExperimentConfig, ExperimentKind};
use invopt::model::io::{load_dataset, save_dataset};

fn main() -> invopt::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::MixedInteger);
    cfg.n_train = Some(5);
    let data = generate(&cfg, 4)?;
    let path = std::env::temp_dir().join("invopt_example_train.jsonl");
    save_dataset(&path, &data.train)?;
    let back = load_dataset(&path, 4)?;
    println!("{} instances round-tripped through {}", back.len(), path.display());
    for inst in &back.instances {
        println!("  response {}", inst.response.to_compact());
    }
    Ok(())
}
