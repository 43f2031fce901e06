use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use invopt::bench::{
    decision_metrics, generate, run_experiment, theta_error, ExperimentConfig, Method, OutputFormat,
};
use invopt::geometry::{build_cone, circumcenter_desk, feasibility_program, incenter, Offsets};
use invopt::losses::EmpiricalObjective;
use invopt::model::io::{load_dataset, save_dataset};
use invopt::model::{IdentityFeatures, MixedLinearFeatures};
use invopt::reformulate::{
    train_asl_enumerated, train_asl_mixed_integer_lp, train_feasibility_mixed_integer, train_suboptimality_facets,
    LossKind, TrainerConfig,
};
use invopt::samd::{samd_train, MirrorMap, SamdConfig};
use invopt::{Budget, DistanceFn, Error, FeatureMap, IODataset, Result, Signal};

#[derive(Parser)]
#[command(name = "invopt", version, about = "Learn linear cost functions from expert decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/test datasets for an experiment config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one method on a JSON Lines dataset.
    Train {
        /// Trainer settings: {"trainer": {...}, "samd": {...}, "mirror": {...}}.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "asl_enumerated")]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate a learned cost vector on a dataset.
    Eval {
        #[arg(long)]
        data: PathBuf,
        /// JSON array with the learned cost vector.
        #[arg(long)]
        theta: PathBuf,
        /// JSON array with the true cost vector, for theta error and cost gap.
        #[arg(long)]
        theta_true: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run an experiment grid and write per-cell metrics plus aggregates.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Restricts the config to this method.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainFile {
    trainer: TrainerConfig,
    samd: SamdConfig,
    mirror: Option<MirrorMap>,
}

#[derive(Serialize, Deserialize)]
struct TrainOutput {
    method: String,
    theta: Vec<f64>,
    objective: Option<f64>,
}

#[derive(Serialize)]
struct EvalRow {
    instances: usize,
    loss: f64,
    response_error: Option<f64>,
    cost_gap: Option<f64>,
    theta_error: Option<f64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn experiment_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = read_json(path)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    Ok(cfg)
}

/// Identity features for binary programs, `(q_y, q_z)` features for the
/// mixed-integer family.
fn features_for(ds: &IODataset) -> Result<Box<dyn FeatureMap>> {
    match &ds.instances[0].signal {
        Signal::BinaryLp { a, .. } => Ok(Box::new(IdentityFeatures::new(a.ncols()))),
        Signal::MixedInteger(m) => Ok(Box::new(MixedLinearFeatures::standard(m.u(), m.v()))),
        Signal::Opaque(_) => Err(Error::Unsupported("opaque signals have no default features".into())),
    }
}

fn train(cfg: &TrainFile, ds: &IODataset, method: &str, seed: u64) -> Result<TrainOutput> {
    let phi = features_for(ds)?;
    let phi = phi.as_ref();
    let t = &cfg.trainer;
    t.validate()?;
    let d = DistanceFn::of_kind(t.effective_distance());
    let m = Method::parse(method).ok_or_else(|| Error::Config(format!("unknown method {method:?}")))?;
    let mi = matches!(ds.instances[0].signal, Signal::MixedInteger(_));
    let (theta, objective) = match m {
        Method::Feasibility if mi => {
            let s = train_feasibility_mixed_integer(ds, phi)?;
            (s.theta.into_vec(), Some(s.objective))
        }
        Method::Feasibility => (feasibility_program(&build_cone(ds, phi)?, &t.theta_set)?.into_vec(), None),
        Method::Incenter => {
            let r = incenter(&build_cone(ds, phi)?, &t.theta_set, t.regularizer, &Offsets::RowNorm)?;
            (r.theta.into_vec(), None)
        }
        Method::CircumcenterDesk => (
            circumcenter_desk(&build_cone(ds, phi)?, &t.theta_set, invopt::bench::CIRCUMCENTER_MAX_DIM)?.into_vec(),
            None,
        ),
        Method::AslEnumerated => {
            let s = train_asl_enumerated(ds, phi, &d, t.kappa, t.regularizer, &t.theta_set, t.hinge)?;
            (s.theta.into_vec(), Some(s.objective))
        }
        Method::SlFacets => {
            let s = train_suboptimality_facets(ds, phi, &t.theta_set)?;
            (s.theta.into_vec(), Some(s.objective))
        }
        Method::AslMiLpZ | Method::AslMiLpYz => {
            let dz = match t.loss {
                LossKind::Asl => t.distance,
                LossKind::Suboptimality => invopt::DistanceKind::Zero,
            };
            let s = train_asl_mixed_integer_lp(
                ds,
                phi,
                dz,
                t.kappa,
                t.regularizer,
                &t.theta_set,
                m == Method::AslMiLpYz,
            )?;
            (s.theta.into_vec(), Some(s.objective))
        }
        Method::Samd(v) => {
            let mut base = cfg.samd.clone();
            base.seed = seed;
            base.theta_set = t.theta_set.clone();
            let mirror = cfg.mirror.unwrap_or(if v.entropic() {
                MirrorMap::EntropicSimplex {
                    kappa_tilde: invopt::samd::calibrate_kappa_tilde(ds, phi, &d, t.kappa, &t.theta_set)?,
                }
            } else {
                MirrorMap::Euclidean
            });
            let (theta, _) = samd_train(ds, phi, &d, t.kappa, t.regularizer, &mirror, &base)?;
            let obj = EmpiricalObjective::new(phi, &d, t.kappa, t.regularizer);
            let f = obj.loss(&theta, ds, &Budget::exact())?.value;
            (theta.into_vec(), Some(f))
        }
    };
    Ok(TrainOutput { method: method.to_string(), theta, objective })
}

fn write_one<T: Serialize>(out: &Path, stem: &str, value: &T, format: Format) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    match format {
        Format::Json => {
            let path = out.join(format!("{stem}.json"));
            serde_json::to_writer_pretty(std::fs::File::create(&path)?, value)?;
            Ok(path)
        }
        Format::Csv => {
            let path = out.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.serialize(value)?;
            w.flush()?;
            Ok(path)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { config, seed, out } => {
            let cfg = experiment_config(&config, seed)?;
            cfg.validate()?;
            std::fs::create_dir_all(&out)?;
            for &s in &cfg.seeds {
                let data = generate(&cfg, s)?;
                let dir = out.join(format!("seed_{s}"));
                std::fs::create_dir_all(&dir)?;
                save_dataset(&dir.join("train.jsonl"), &data.train)?;
                save_dataset(&dir.join("test.jsonl"), &data.test)?;
                serde_json::to_writer(std::fs::File::create(dir.join("theta_true.json"))?, &data.theta_true)?;
                println!("{}", dir.display());
            }
        }
        Command::Train { config, data, method, seed, out, format } => {
            let cfg: TrainFile = match config {
                Some(p) => read_json(&p)?,
                None => TrainFile::default(),
            };
            let ds = load_dataset(&data, seed)?;
            let result = train(&cfg, &ds, &method, seed)?;
            println!("{}", write_one(&out, "theta", &result, format)?.display());
        }
        Command::Eval { data, theta, theta_true, config, out, format } => {
            let cfg: TrainFile = match config {
                Some(p) => read_json(&p)?,
                None => TrainFile::default(),
            };
            let ds = load_dataset(&data, 0)?;
            let phi = features_for(&ds)?;
            let theta: Vec<f64> = read_json::<TrainOutput>(&theta)
                .map(|t| t.theta)
                .or_else(|_| read_json::<Vec<f64>>(&theta))?;
            let t = &cfg.trainer;
            let d = DistanceFn::of_kind(t.effective_distance());
            let loss = EmpiricalObjective::new(phi.as_ref(), &d, t.kappa, t.regularizer)
                .loss(&theta, &ds, &Budget::exact())?
                .value;
            let mut row = EvalRow { instances: ds.len(), loss, response_error: None, cost_gap: None, theta_error: None };
            if let Some(p) = theta_true {
                let truth: Vec<f64> = read_json(&p)?;
                let (e, g) = decision_metrics(&ds, phi.as_ref(), &truth, &theta)?;
                row.response_error = Some(e);
                row.cost_gap = Some(g);
                row.theta_error = Some(theta_error(&truth, &theta));
            }
            println!("{}", write_one(&out, "eval", &row, format)?.display());
        }
        Command::Bench { config, seed, method, out, format } => {
            let mut cfg = experiment_config(&config, seed)?;
            if let Some(m) = method {
                cfg.methods = vec![m];
            }
            let result = run_experiment(&cfg)?;
            for p in result.write_to_dir(&out, format.into())? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
