use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::linalg::DenseMatrix;
use crate::model::{
    BinaryLpOracle, FeasibleSetOracle, IODataset, IOInstance, IdentityFeatures, MixedIntegerOracle,
    MixedIntegerSignal, MixedLinearFeatures, Signal,
};
use crate::rng::{stream, STREAM_NOISE, STREAM_TEST_SIGNALS, STREAM_THETA, STREAM_TRAIN_SIGNALS};
use crate::{Error, Result};

use super::{ExperimentConfig, ExperimentKind};

/// Training set, noiseless test set and the cost vector that generated them.
#[derive(Clone, Debug)]
pub struct GeneratedData {
    pub train: IODataset,
    pub test: IODataset,
    pub theta_true: Vec<f64>,
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.random_range(lo..=hi)).collect();
    DenseMatrix::from_row_major(rows, cols, data)
}

/// Covering-type binary LP `A x <= b` with `A ∈ [−1,0]`, `b ∈ [b_lo, 0]`;
/// rows are resampled until `Σ_j A_kj <= b_k`, so that `x = 1` is feasible.
fn covering_signal(rng: &mut ChaCha8Rng, n: usize, t: usize, b_lo: f64) -> Signal {
    let mut a = DenseMatrix::zeros(t, n);
    let mut b = vec![0.0; t];
    for k in 0..t {
        loop {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=0.0)).collect();
            let bk = rng.random_range(b_lo..=0.0);
            if row.iter().sum::<f64>() <= bk {
                a.row_mut(k).copy_from_slice(&row);
                b[k] = bk;
                break;
            }
        }
    }
    Signal::BinaryLp { a, b }
}

/// Signal with `A ∈ [−1,1]`, `b ∈ [−1,0]`, resampled until `X(s)` is nonempty.
fn general_signal(rng: &mut ChaCha8Rng, n: usize, t: usize) -> Result<(Signal, Arc<BinaryLpOracle>)> {
    loop {
        let a = uniform_matrix(rng, t, n, -1.0, 1.0);
        let b: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..=0.0)).collect();
        let s = Signal::BinaryLp { a, b };
        let oracle = Arc::new(BinaryLpOracle::new());
        if !oracle.enumerate(&s)?.is_empty() {
            return Ok((s, oracle));
        }
    }
}

fn binary_instance(s: Signal, oracle: Arc<BinaryLpOracle>, theta: &[f64]) -> Result<IOInstance> {
    let phi = IdentityFeatures::new(theta.len());
    let x = oracle.forward_min(&s, theta, &phi)?;
    Ok(IOInstance::new(s, x, oracle))
}

fn check_positive(cfg: &ExperimentConfig, sizes: &[(&str, usize)]) -> Result<()> {
    for (name, v) in sizes {
        if *v == 0 {
            return Err(Error::Config(format!("{name} must be positive")));
        }
    }
    if cfg.seeds.is_empty() {
        return Err(Error::Config("seeds must be non-empty".into()));
    }
    Ok(())
}

fn binary_datasets(
    seed: u64,
    n_train: usize,
    n_test: usize,
    theta: &[f64],
    mut make: impl FnMut(&mut ChaCha8Rng) -> Result<(Signal, Arc<BinaryLpOracle>)>,
    noise_std: f64,
) -> Result<(IODataset, IODataset)> {
    let mut train_rng = stream(seed, STREAM_TRAIN_SIGNALS);
    let mut test_rng = stream(seed, STREAM_TEST_SIGNALS);
    let mut noise_rng = stream(seed, STREAM_NOISE);
    let normal = Normal::new(0.0, noise_std.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut train = Vec::with_capacity(n_train);
    for _ in 0..n_train {
        let (s, o) = make(&mut train_rng)?;
        let cost: Vec<f64> = if noise_std > 0.0 {
            theta.iter().map(|t| t + normal.sample(&mut noise_rng)).collect()
        } else {
            theta.to_vec()
        };
        train.push(binary_instance(s, o, &cost)?);
    }
    let mut test = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let (s, o) = make(&mut test_rng)?;
        test.push(binary_instance(s, o, theta)?);
    }
    Ok((IODataset::new(train, seed)?, IODataset::new(test, seed)?))
}

/// `θ_true ~ U[0,1]^n`, covering signals with `b ∈ [−1,0]`, exact responses.
pub fn gen_consistent(cfg: &ExperimentConfig, seed: u64) -> Result<GeneratedData> {
    let (n, t) = (cfg.n(), cfg.t());
    check_positive(cfg, &[("n", n), ("t", t), ("N", cfg.n_train()), ("n_test", cfg.n_test())])?;
    let mut rng = stream(seed, STREAM_THETA);
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let (train, test) = binary_datasets(
        seed,
        cfg.n_train(),
        cfg.n_test(),
        &theta,
        |r| Ok((covering_signal(r, n, t, -1.0), Arc::new(BinaryLpOracle::new()))),
        0.0,
    )?;
    Ok(GeneratedData { train, test, theta_true: theta })
}

/// `θ_true ~ U[−1,1]^n`, `A ~ U[−1,1]`, `b ~ U[−1,0]` with nonempty `X(s)`;
/// training responses solve the problem under `θ_true + w`, `w ~ N(0, σ²I)`
/// drawn per instance; test responses are noiseless.
pub fn gen_inconsistent(cfg: &ExperimentConfig, seed: u64) -> Result<GeneratedData> {
    let (n, t) = (cfg.n(), cfg.t());
    check_positive(cfg, &[("n", n), ("t", t), ("N", cfg.n_train()), ("n_test", cfg.n_test())])?;
    if !(cfg.noise_std() >= 0.0) {
        return Err(Error::Config("noise_std must be >= 0".into()));
    }
    let mut rng = stream(seed, STREAM_THETA);
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let (train, test) =
        binary_datasets(seed, cfg.n_train(), cfg.n_test(), &theta, |r| general_signal(r, n, t), cfg.noise_std())?;
    Ok(GeneratedData { train, test, theta_true: theta })
}

/// Covering signals with `b ∈ [−n/3, 0]` for the first-order method comparison.
pub fn gen_samd_bench(cfg: &ExperimentConfig, seed: u64) -> Result<GeneratedData> {
    let (n, t) = (cfg.n(), cfg.t());
    check_positive(cfg, &[("n", n), ("t", t), ("N", cfg.n_train()), ("n_test", cfg.n_test())])?;
    let mut rng = stream(seed, STREAM_THETA);
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let b_lo = -(n as f64) / 3.0;
    let (train, test) = binary_datasets(
        seed,
        cfg.n_train(),
        cfg.n_test(),
        &theta,
        |r| Ok((covering_signal(r, n, t, b_lo), Arc::new(BinaryLpOracle::new()))),
        0.0,
    )?;
    Ok(GeneratedData { train, test, theta_true: theta })
}

fn mixed_signal(rng: &mut ChaCha8Rng, u: usize, v: usize, t: usize) -> MixedIntegerSignal {
    let mut a = DenseMatrix::zeros(t, u);
    let mut b = DenseMatrix::zeros(t, v);
    let mut c = vec![0.0; t];
    for k in 0..t {
        loop {
            let ra: Vec<f64> = (0..u).map(|_| rng.random_range(-1.0..=0.0)).collect();
            let rb: Vec<f64> = (0..v).map(|_| rng.random_range(-1.0..=0.0)).collect();
            let ck = rng.random_range(-2.0..=0.0);
            if ra.iter().sum::<f64>() + rb.iter().sum::<f64>() <= ck {
                a.row_mut(k).copy_from_slice(&ra);
                b.row_mut(k).copy_from_slice(&rb);
                c[k] = ck;
                break;
            }
        }
    }
    MixedIntegerSignal {
        a,
        b,
        c,
        w: serde_json::Value::Null,
        y_box: true,
    }
}

/// `θ_true = (q_y, q_z) ~ U[0,1]^{u+v}`, `A, B ~ U[−1,0]`, `c ~ U[−2,0]` with
/// `Σ_j [A B]_kj <= c_k`; responses solve the MILP exactly.
pub fn gen_mixed_integer(cfg: &ExperimentConfig, seed: u64) -> Result<GeneratedData> {
    let (u, v, t) = (cfg.u(), cfg.v(), cfg.t());
    check_positive(cfg, &[("v", v), ("t", t), ("N", cfg.n_train()), ("n_test", cfg.n_test())])?;
    let mut rng = stream(seed, STREAM_THETA);
    let theta: Vec<f64> = (0..u + v).map(|_| rng.random_range(0.0..=1.0)).collect();
    let phi = MixedLinearFeatures::standard(u, v);
    let make = |rng: &mut ChaCha8Rng, count: usize| -> Result<Vec<IOInstance>> {
        (0..count)
            .map(|_| {
                let s = Signal::mixed_integer(mixed_signal(rng, u, v, t))?;
                let oracle = Arc::new(MixedIntegerOracle::new());
                let x = oracle.forward_min(&s, &theta, &phi)?;
                Ok(IOInstance::new(s, x, oracle))
            })
            .collect()
    };
    let train = make(&mut stream(seed, STREAM_TRAIN_SIGNALS), cfg.n_train())?;
    let test = make(&mut stream(seed, STREAM_TEST_SIGNALS), cfg.n_test())?;
    Ok(GeneratedData {
        train: IODataset::new(train, seed)?,
        test: IODataset::new(test, seed)?,
        theta_true: theta,
    })
}

pub fn generate(cfg: &ExperimentConfig, seed: u64) -> Result<GeneratedData> {
    match cfg.experiment {
        ExperimentKind::Consistent => gen_consistent(cfg, seed),
        ExperimentKind::Inconsistent => gen_inconsistent(cfg, seed),
        ExperimentKind::MixedInteger => gen_mixed_integer(cfg, seed),
        ExperimentKind::SamdBench => gen_samd_bench(cfg, seed),
    }
}
