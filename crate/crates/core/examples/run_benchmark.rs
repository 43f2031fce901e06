//! A small experiment grid written to CSV, the library counterpart of
//! `invopt bench`.

use invopt::bench::{run_experiment, ExperimentConfig, OutputFormat};

fn main() -> invopt::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "consistent", "N": 50, "seeds": [0, 1, 2], "train_sizes": [10, 50],
            "methods": ["feasibility", "incenter", "asl_enumerated"]}"#,
    )?;
    let result = run_experiment(&cfg)?;
    for a in result.aggregates.iter().filter(|a| a.metric == "theta_error") {
        println!("{:>15} N={:<3} theta_error mean {:.4} [p5 {:.4}, p95 {:.4}]", a.method, a.train_size, a.mean, a.p5, a.p95);
    }
    let dir = std::env::temp_dir().join("invopt_example_bench");
    for p in result.write_to_dir(&dir, OutputFormat::Csv)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
