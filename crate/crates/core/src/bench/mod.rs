//! Seeded data generators and the experiment harness.
//!
//! Desk-scale defaults (full-scale sizes in parentheses):
//!
//! | experiment     | N         | sizes                    |
//! |----------------|-----------|--------------------------|
//! | consistent     | 100 (100) | n=6, t=4 (same)          |
//! | inconsistent   | 100 (100) | n=10, t=8 (same)         |
//! | mixed_integer  | 20 (100)  | u=v=3, t=2 (u=v=6, t=4)  |
//! | samd_bench     | 50 (50)   | n=10, t=8 (n=20, t=15)   |

mod generate;
mod methods;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, sub};
use crate::model::{DistanceFn, FeatureMap, IODataset, IdentityFeatures, MixedLinearFeatures};
use crate::{Error, Result, ThetaSet};

pub use generate::{gen_consistent, gen_inconsistent, gen_mixed_integer, gen_samd_bench, generate, GeneratedData};
pub use methods::{samd_reference, train_method, Method, SamdReference, TrainOutcome, CIRCUMCENTER_MAX_DIM};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Consistent,
    Inconsistent,
    MixedInteger,
    SamdBench,
}

/// Settings of the first-order method comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamdBenchConfig {
    pub kappa: f64,
    /// Iterations of the full-batch variants.
    pub steps_full: usize,
    /// Iterations of the stochastic variants.
    pub steps_stochastic: usize,
    pub batch_size: usize,
    /// Node budget of the approximate variants.
    pub max_nodes: usize,
    /// Exact loss evaluation stride, full-batch / stochastic.
    pub loss_every_full: usize,
    pub loss_every_stochastic: usize,
    /// Target gap as a fraction of `f(0) − f*`.
    pub gap_target_rel: f64,
}

impl Default for SamdBenchConfig {
    fn default() -> Self {
        Self {
            kappa: 0.01,
            steps_full: 400,
            steps_stochastic: 4000,
            batch_size: 1,
            max_nodes: 256,
            loss_every_full: 1,
            loss_every_stochastic: 20,
            gap_target_rel: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Training-set size; defaults per experiment.
    #[serde(rename = "N")]
    pub n_train: Option<usize>,
    pub n: Option<usize>,
    pub u: Option<usize>,
    pub v: Option<usize>,
    pub t: Option<usize>,
    pub n_test: Option<usize>,
    pub noise_std: Option<f64>,
    pub seeds: Vec<u64>,
    /// Prefix sizes of the training set; defaults to `[N]`.
    pub train_sizes: Vec<usize>,
    /// Method names; defaults per experiment.
    pub methods: Vec<String>,
    pub output: Option<PathBuf>,
    pub record_timing: bool,
    /// κ of the ASL trainers.
    pub kappa: f64,
    pub samd: SamdBenchConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Consistent,
            n_train: None,
            n: None,
            u: None,
            v: None,
            t: None,
            n_test: None,
            noise_std: None,
            seeds: (0..10).collect(),
            train_sizes: Vec::new(),
            methods: Vec::new(),
            output: None,
            record_timing: false,
            kappa: 0.001,
            samd: SamdBenchConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self { experiment, ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn n_train(&self) -> usize {
        self.n_train.unwrap_or(match self.experiment {
            ExperimentKind::Consistent | ExperimentKind::Inconsistent => 100,
            ExperimentKind::MixedInteger => 20,
            ExperimentKind::SamdBench => 50,
        })
    }

    pub fn n_test(&self) -> usize {
        self.n_test.unwrap_or_else(|| self.n_train())
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(match self.experiment {
            ExperimentKind::Consistent => 6,
            ExperimentKind::MixedInteger => self.u() + self.v(),
            _ => 10,
        })
    }

    pub fn u(&self) -> usize {
        self.u.unwrap_or(3)
    }

    pub fn v(&self) -> usize {
        self.v.unwrap_or(3)
    }

    pub fn t(&self) -> usize {
        self.t.unwrap_or(match self.experiment {
            ExperimentKind::Consistent => 4,
            ExperimentKind::MixedInteger => 2,
            _ => 8,
        })
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std.unwrap_or(match self.experiment {
            ExperimentKind::Inconsistent => 0.05,
            _ => 0.0,
        })
    }

    pub fn train_sizes(&self) -> Vec<usize> {
        if self.train_sizes.is_empty() {
            vec![self.n_train()]
        } else {
            self.train_sizes.clone()
        }
    }

    /// Cost-vector dimension.
    pub fn dim(&self) -> usize {
        match self.experiment {
            ExperimentKind::MixedInteger => self.u() + self.v(),
            _ => self.n(),
        }
    }

    pub fn theta_set(&self) -> ThetaSet {
        match self.experiment {
            ExperimentKind::Inconsistent => ThetaSet::All,
            _ => ThetaSet::NonnegOrthant,
        }
    }

    pub fn features(&self) -> Box<dyn FeatureMap> {
        match self.experiment {
            ExperimentKind::MixedInteger => Box::new(MixedLinearFeatures::standard(self.u(), self.v())),
            _ => Box::new(IdentityFeatures::new(self.n())),
        }
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let names: Vec<String> = if self.methods.is_empty() {
            let d: &[&str] = match self.experiment {
                ExperimentKind::Consistent => &["feasibility", "incenter", "asl_enumerated", "sl_facets"],
                ExperimentKind::Inconsistent => &["asl_enumerated", "sl_facets"],
                ExperimentKind::MixedInteger => &["feasibility", "asl_mi_lp_z", "asl_mi_lp_yz"],
                ExperimentKind::SamdBench => &["sm", "md", "ssm", "smd", "asm", "amd", "sasm", "samd"],
            };
            d.iter().map(|s| s.to_string()).collect()
        } else {
            self.methods.clone()
        };
        names
            .iter()
            .map(|s| Method::parse(s).ok_or_else(|| Error::Config(format!("unknown method {s:?}"))))
            .collect()
    }

    /// Size, seed and method checks; runs before any data is generated.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        let n_train = self.n_train();
        for (name, v) in [("N", n_train), ("n_test", self.n_test()), ("t", self.t()), ("n", self.n())] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.experiment == ExperimentKind::MixedInteger && self.v() == 0 {
            return Err(Error::Config("v must be positive".into()));
        }
        for &s in &self.train_sizes() {
            if s == 0 || s > n_train {
                return Err(Error::Config(format!("train size {s} must lie in 1..={n_train}")));
            }
        }
        if !(self.kappa >= 0.0) || !(self.samd.kappa >= 0.0) {
            return Err(Error::Config("kappa must be >= 0".into()));
        }
        if self.samd.batch_size == 0 || self.samd.batch_size > n_train || self.samd.max_nodes == 0 {
            return Err(Error::Config("samd batch_size must lie in 1..=N and max_nodes must be positive".into()));
        }
        for m in self.methods()? {
            m.check_compatible(self)?;
        }
        Ok(())
    }
}

/// One (seed, train size, method) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub seed: u64,
    pub train_size: usize,
    /// `ok`, or the error message of a failed solve.
    pub status: String,
    /// `‖θ_true/‖θ_true‖ − θ_IO/‖θ_IO‖‖₂`.
    pub theta_error: Option<f64>,
    /// Mean `d(x_IO, x_true)` over the test set.
    pub response_error: Option<f64>,
    /// `(Cost_IO − Cost_true)/|Cost_true|` on the test set.
    pub cost_gap: Option<f64>,
    pub in_sample_response_error: Option<f64>,
    pub in_sample_cost_gap: Option<f64>,
    /// First-order methods: training loss gap of the returned iterate.
    pub loss_gap: Option<f64>,
    /// First-order methods: algorithm time until the recorded loss gap first
    /// falls below the target.
    pub time_to_target_s: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub train_size: usize,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<MetricsRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn aggregate(rows: &[MetricsRow]) -> Vec<Aggregate> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let k = (r.method.clone(), r.train_size);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let metrics: [(&str, fn(&MetricsRow) -> Option<f64>); 6] = [
        ("theta_error", |r| r.theta_error),
        ("response_error", |r| r.response_error),
        ("cost_gap", |r| r.cost_gap),
        ("in_sample_response_error", |r| r.in_sample_response_error),
        ("loss_gap", |r| r.loss_gap),
        ("time_to_target_s", |r| r.time_to_target_s),
    ];
    let mut out = Vec::new();
    for (method, size) in keys {
        for (name, get) in metrics {
            let mut vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method && r.train_size == size)
                .filter_map(get)
                .filter(|v| v.is_finite())
                .collect();
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(f64::total_cmp);
            out.push(Aggregate {
                method: method.clone(),
                train_size: size,
                metric: name.to_string(),
                count: vals.len(),
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                p5: percentile(&vals, 0.05),
                p95: percentile(&vals, 0.95),
            });
        }
    }
    out
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        v.to_vec()
    }
}

pub fn theta_error(theta_true: &[f64], theta_io: &[f64]) -> f64 {
    norm2(&sub(&normalized(theta_true), &normalized(theta_io)))
}

/// `(mean d(x_IO, x̂), (Cost_IO − Cost_true)/|Cost_true|)` with decisions
/// `x_IO` re-optimized under `θ_IO` and costs measured under `θ_true`.
pub fn decision_metrics(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    theta_true: &[f64],
    theta_io: &[f64],
) -> Result<(f64, f64)> {
    let d = DistanceFn::euclidean();
    let results: Vec<Result<(f64, f64, f64)>> = ds
        .instances
        .par_iter()
        .map(|inst| {
            let x = inst.oracle.forward_min(&inst.signal, theta_io, phi)?;
            let cost = |r| crate::linalg::dot(theta_true, &phi.eval(&inst.signal, r));
            Ok((d.eval(&x, &inst.response), cost(&x), cost(&inst.response)))
        })
        .collect();
    let (mut err, mut c_io, mut c_true) = (0.0, 0.0, 0.0);
    for r in results {
        let (e, a, b) = r?;
        err += e;
        c_io += a;
        c_true += b;
    }
    let gap = if c_true.abs() > 1e-12 { (c_io - c_true) / c_true.abs() } else { c_io - c_true };
    Ok((err / ds.len() as f64, gap))
}

/// Worker pool capped by `INVOPT_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("INVOPT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("INVOPT_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Config("INVOPT_THREADS must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

fn run_cell(
    cfg: &ExperimentConfig,
    data: &GeneratedData,
    reference: Option<&SamdReference>,
    seed: u64,
    size: usize,
    method: Method,
) -> MetricsRow {
    let phi = cfg.features();
    let mut row = MetricsRow {
        method: method.name(),
        seed,
        train_size: size,
        status: "ok".into(),
        theta_error: None,
        response_error: None,
        cost_gap: None,
        in_sample_response_error: None,
        in_sample_cost_gap: None,
        loss_gap: None,
        time_to_target_s: None,
        wall_time_s: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let train = data.train.prefix(size)?;
        let clock = Instant::now();
        let out = train_method(method, cfg, &train, phi.as_ref(), reference)?;
        if cfg.record_timing {
            row.wall_time_s = clock.elapsed().as_secs_f64();
        }
        row.theta_error = Some(theta_error(&data.theta_true, &out.theta));
        let (e, g) = decision_metrics(&data.test, phi.as_ref(), &data.theta_true, &out.theta)?;
        row.response_error = Some(e);
        row.cost_gap = Some(g);
        let (e, g) = decision_metrics(&train, phi.as_ref(), &data.theta_true, &out.theta)?;
        row.in_sample_response_error = Some(e);
        row.in_sample_cost_gap = Some(g);
        row.loss_gap = out.loss_gap;
        row.time_to_target_s = out.time_to_target_s;
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = e.to_string().replace('\n', " ");
    }
    row
}

/// Generates data per seed and runs every (seed × train size × method) cell.
/// Cells run on the worker pool except for `samd_bench`, whose cells are
/// timed against each other and therefore run one at a time. Rows come out in
/// (seed, train size, method) order regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods()?;
    let sizes = cfg.train_sizes();
    let pool = thread_pool()?;
    let needs_reference = methods.iter().any(|m| matches!(m, Method::Samd(_)));
    pool.install(|| {
        let data: Vec<GeneratedData> = cfg
            .seeds
            .par_iter()
            .map(|&s| generate(cfg, s))
            .collect::<Result<_>>()?;
        let mut cells = Vec::new();
        for (k, &seed) in cfg.seeds.iter().enumerate() {
            for &size in &sizes {
                for &m in &methods {
                    cells.push((k, seed, size, m));
                }
            }
        }
        let references: Vec<Option<SamdReference>> = if needs_reference {
            let pairs: Vec<(usize, usize)> =
                (0..cfg.seeds.len()).flat_map(|k| sizes.iter().map(move |&s| (k, s))).collect();
            pairs
                .par_iter()
                .map(|&(k, s)| samd_reference(cfg, &data[k].train.prefix(s)?, cfg.features().as_ref()).map(Some))
                .collect::<Result<_>>()?
        } else {
            vec![None; cfg.seeds.len() * sizes.len()]
        };
        let reference = |k: usize, size: usize| {
            let j = sizes.iter().position(|&s| s == size).unwrap();
            references[k * sizes.len() + j].as_ref()
        };
        let rows: Vec<MetricsRow> = if cfg.experiment == ExperimentKind::SamdBench {
            cells
                .iter()
                .map(|&(k, seed, size, m)| run_cell(cfg, &data[k], reference(k, size), seed, size, m))
                .collect()
        } else {
            cells
                .par_iter()
                .map(|&(k, seed, size, m)| run_cell(cfg, &data[k], reference(k, size), seed, size, m))
                .collect()
        };
        let aggregates = aggregate(&rows);
        Ok(ExperimentResult { rows, aggregates })
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl ExperimentResult {
    pub fn write_rows_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_aggregates_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for a in &self.aggregates {
            out.serialize(a)?;
        }
        out.flush()?;
        Ok(())
    }

    /// `metrics.csv` + `summary.csv`, or `results.json`.
    pub fn write_to_dir(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        match format {
            OutputFormat::Csv => {
                let rows = dir.join("metrics.csv");
                let summary = dir.join("summary.csv");
                self.write_rows_csv(std::fs::File::create(&rows)?)?;
                self.write_aggregates_csv(std::fs::File::create(&summary)?)?;
                Ok(vec![rows, summary])
            }
            OutputFormat::Json => {
                let path = dir.join("results.json");
                serde_json::to_writer_pretty(std::fs::File::create(&path)?, self)?;
                Ok(vec![path])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert!((percentile(&v, 0.05) - 1.2).abs() < 1e-12);
        assert!((percentile(&v, 0.95) - 4.8).abs() < 1e-12);
    }

    #[test]
    fn mismatch_is_rejected_up_front() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::MixedInteger);
        cfg.methods = vec!["incenter".into()];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.methods = vec!["nonsense".into()];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn config_json_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "inconsistent", "seeds": [1, 2]}"#).unwrap();
        assert_eq!((cfg.n_train(), cfg.n(), cfg.t()), (100, 10, 8));
        assert_eq!(cfg.noise_std(), 0.05);
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
