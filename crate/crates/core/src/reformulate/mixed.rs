use rayon::prelude::*;

use crate::linalg::{dot, sub, DenseMatrix};
use crate::losses::Regularizer;
use crate::model::{CostVector, DistanceFn, DistanceKind, FeatureMap, IODataset, MixedIntegerOracle, ThetaSet};
use crate::solvers::y_lp_solution;
use crate::{Error, Result};

use super::master::{Master, Row};
use super::{BlockDual, TrainerOptions, TrainerSolution, TrainerStatus};

#[derive(Clone, Debug)]
pub struct MixedIntegerOptions {
    pub kappa: f64,
    pub regularizer: Regularizer,
    pub theta_set: ThetaSet,
    /// Distance on the integer block.
    pub dz: DistanceKind,
    /// Adds `‖ŷ − y‖_∞` to the distance (the `2u` signed blocks).
    pub penalize_y: bool,
    /// Adds `<1, θ> = 1`.
    pub sum_to_one: bool,
    /// Recover multipliers for every block only when
    /// `Σ_i M_i · |k-range| · rows` stays below this many numbers.
    pub max_dual_entries: usize,
    pub trainer: TrainerOptions,
}

impl Default for MixedIntegerOptions {
    fn default() -> Self {
        Self {
            kappa: 0.001,
            regularizer: Regularizer::HalfSqL2,
            theta_set: ThetaSet::All,
            dz: DistanceKind::Euclidean,
            penalize_y: false,
            sum_to_one: false,
            max_dual_entries: 1 << 22,
            trainer: TrainerOptions::default(),
        }
    }
}

/// Data of one `(i, j)` pair: `φ(s, (y, z_j)) = M y + m0`, the `y`-system and `d_z`.
struct ZData {
    z: Vec<i64>,
    m: DenseMatrix,
    m0: Vec<f64>,
    a: DenseMatrix,
    rhs: Vec<f64>,
    dz: f64,
}

struct InstanceData {
    f_hat: Vec<f64>,
    y_hat: Vec<f64>,
    u: usize,
    zs: Vec<ZData>,
}

fn h(k: usize, u: usize, penalize_y: bool) -> Vec<f64> {
    let mut v = vec![0.0; u];
    if penalize_y {
        if k < u {
            v[k] = 1.0;
        } else {
            v[k - u] = -1.0;
        }
    }
    v
}

fn k_range(u: usize, penalize_y: bool) -> usize {
    if penalize_y && u > 0 {
        2 * u
    } else {
        1
    }
}

fn prepare(ds: &IODataset, phi: &dyn FeatureMap, dz: &DistanceFn) -> Result<Vec<InstanceData>> {
    let p = ds.check_dimension(phi)?;
    ds.instances
        .par_iter()
        .map(|inst| {
            let oracle = inst.oracle.as_mixed_integer().ok_or_else(|| {
                Error::Invalid("mixed-integer trainer needs mixed-integer instances".into())
            })?;
            let m = MixedIntegerOracle::signal(&inst.signal)?;
            let u = m.u();
            let z_enum = oracle.z_enum(&inst.signal)?;
            if z_enum.is_empty() {
                return Err(Error::Infeasible);
            }
            if inst.response.continuous.len() != u {
                return Err(Error::DimensionMismatch {
                    context: "mixed-integer response continuous block",
                    expected: u,
                    got: inst.response.continuous.len(),
                });
            }
            let zs = z_enum
                .iter()
                .map(|z| {
                    let (mm, m0) = phi.affine_in_continuous(&inst.signal, u, z);
                    if mm.nrows() != p || m0.len() != p {
                        return Err(Error::DimensionMismatch {
                            context: "feature blocks vs cost vector",
                            expected: p,
                            got: m0.len(),
                        });
                    }
                    let (a, rhs) = m.y_system(z);
                    Ok(ZData {
                        z: z.clone(),
                        m: mm,
                        m0,
                        a,
                        rhs,
                        dz: dz.discrete_part(&inst.response.discrete, z),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(InstanceData {
                f_hat: phi.eval(&inst.signal, &inst.response),
                y_hat: inst.response.continuous.clone(),
                u,
                zs,
            })
        })
        .collect()
}

/// Constant part of block `(i, j, k)`: `<h_k, ŷ> + d_z(ẑ, z_j)`.
fn block_const(inst: &InstanceData, zd: &ZData, hk: &[f64]) -> f64 {
    dot(hk, &inst.y_hat) + zd.dz
}

/// Cut of block `(i, j, k)` at the inner maximizer `y*`:
/// `<θ, φ̂_i − M y* − m0> + <h_k, ŷ_i − y*> + d_z <= β_i`. By LP duality the
/// block holds for some `λ_ijk >= 0` exactly when all such cuts hold.
fn make_cut(i: usize, j: usize, k: usize, serial: usize, inst: &InstanceData, y: &[f64], penalize_y: bool) -> Row {
    let zd = &inst.zs[j];
    let hk = h(k, inst.u, penalize_y);
    let my = zd.m.mul_vec(y);
    let a: Vec<f64> = (0..inst.f_hat.len())
        .map(|r| inst.f_hat[r] - zd.m0[r] - my.get(r).copied().unwrap_or(0.0))
        .collect();
    Row {
        key: (i, j, k, serial),
        theta: a,
        rhs: -(block_const(inst, zd, &hk) - dot(&hk, y)),
    }
}

/// Inner value of block `(j, k)` at `θ` by the primal LP over `y`: the value,
/// the multipliers `λ` of that LP and the maximizer `y*`.
fn block_value(
    inst: &InstanceData,
    j: usize,
    k: usize,
    theta: &[f64],
    penalize_y: bool,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let zd = &inst.zs[j];
    let hk = h(k, inst.u, penalize_y);
    let lin = dot(theta, &sub(&inst.f_hat, &zd.m0)) + block_const(inst, zd, &hk);
    if inst.u == 0 {
        return Ok((lin, vec![0.0; zd.rhs.len()], Vec::new()));
    }
    let mut c = zd.m.tr_mul_vec(theta);
    for (ci, hi) in c.iter_mut().zip(&hk) {
        *ci += hi;
    }
    let sol = y_lp_solution(&zd.a, &zd.rhs, c)?;
    Ok((lin - sol.objective, sol.ineq_duals, sol.x))
}

/// Most violated block per instance.
fn separate(
    data: &[InstanceData],
    theta: &[f64],
    beta: &[f64],
    penalize_y: bool,
    tol: f64,
) -> Result<Vec<(usize, usize, usize, Vec<f64>)>> {
    let found: Vec<Result<Option<(usize, usize, usize, Vec<f64>)>>> = data
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut best: Option<(usize, usize, f64, Vec<f64>)> = None;
            for j in 0..inst.zs.len() {
                for k in 0..k_range(inst.u, penalize_y) {
                    let (v, _, y) = block_value(inst, j, k, theta, penalize_y)?;
                    if best.as_ref().is_none_or(|b| v > b.2) {
                        best = Some((j, k, v, y));
                    }
                }
            }
            let (j, k, v, y) = best.expect("non-empty Z");
            let violated = beta[i] == f64::NEG_INFINITY || v - beta[i] > tol * (1.0 + beta[i].abs());
            Ok(violated.then_some((i, j, k, y)))
        })
        .collect();
    let mut out = Vec::new();
    for r in found {
        if let Some(c) = r? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Dualized epigraph LP of the empirical ASL over mixed-integer sets
/// `{(y, z) : A y + B z <= c, z ∈ {0,1}^v}` for hypotheses affine in `y`.
///
/// Constraints, for every instance `i`, integer assignment `z_ij` and signed
/// coordinate `h_k` (only `h = 0` unless `penalize_y`):
///
/// ```text
/// <θ, φ̂_i − φ(ŝ_i, (0, z_ij))> + <λ_ijk, c_i − B_i z_ij> + <h_k, ŷ_i> + d_z(ẑ_i, z_ij) <= β_i
/// M_ijᵀ θ + h_k + A_iᵀ λ_ijk = 0,   λ_ijk >= 0
/// ```
///
/// where `φ(ŝ_i, (y, z_ij)) = M_ij y + φ(ŝ_i, (0, z_ij))`; for the
/// `<y, Qφ₁> + <q, φ₂>` hypothesis `M_ijᵀ θ = Qφ₁(ŵ_i, z_ij)`.
///
/// Solved in the `(θ, β)` space: the blocks are enforced through cuts at the
/// maximizing `y` of each violated block. At the returned `θ` the multipliers
/// of every block are the duals of its inner LP (`duals`), and
/// `full_residual` measures `(θ, β, λ)` against all blocks of the program.
#[allow(clippy::too_many_arguments)]
pub fn train_asl_mixed_integer_lp(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    dz: DistanceKind,
    kappa: f64,
    regularizer: Regularizer,
    theta_set: &ThetaSet,
    penalize_y: bool,
) -> Result<TrainerSolution> {
    let opts = MixedIntegerOptions {
        kappa,
        regularizer,
        theta_set: theta_set.clone(),
        dz,
        penalize_y,
        ..Default::default()
    };
    train_asl_mixed_integer_lp_with(ds, phi, &opts)
}

/// Feasibility baseline for mixed-integer data: the same program with
/// `d = 0`, no regularizer, `θ >= 0` and `<1, θ> = 1`.
pub fn train_feasibility_mixed_integer(ds: &IODataset, phi: &dyn FeatureMap) -> Result<TrainerSolution> {
    let opts = MixedIntegerOptions {
        kappa: 0.0,
        regularizer: Regularizer::None,
        theta_set: ThetaSet::NonnegOrthant,
        dz: DistanceKind::Zero,
        penalize_y: false,
        sum_to_one: true,
        ..Default::default()
    };
    train_asl_mixed_integer_lp_with(ds, phi, &opts)
}

pub fn train_asl_mixed_integer_lp_with(
    ds: &IODataset,
    phi: &dyn FeatureMap,
    opts: &MixedIntegerOptions,
) -> Result<TrainerSolution> {
    if !(opts.kappa >= 0.0) || !opts.kappa.is_finite() {
        return Err(Error::Invalid(format!("kappa must be finite and >= 0, got {}", opts.kappa)));
    }
    if opts.dz == DistanceKind::Custom {
        return Err(Error::Unsupported("d_z must be a built-in distance".into()));
    }
    let dz = DistanceFn::mixed(opts.dz, opts.penalize_y);
    let data = prepare(ds, phi, &dz)?;
    let p = phi.dim();
    let py = opts.penalize_y;
    let mut master = Master::new(p, ds.len(), opts.kappa, opts.regularizer, opts.theta_set.clone(), false);
    if opts.sum_to_one {
        master.theta_eqs.push((vec![1.0; p], 1.0));
    }
    // Initial blocks: the maximizers at θ = 0.
    let zero = vec![0.0; p];
    let init = separate(&data, &zero, &vec![f64::NEG_INFINITY; ds.len()], py, 0.0)?;
    for (i, j, k, y) in init {
        master.insert(make_cut(i, j, k, 0, &data[i], &y, py));
    }

    let mut status = TrainerStatus::IterationLimit;
    let mut rounds = opts.trainer.max_rounds;
    let mut sol = master.solve()?;
    for round in 1..=opts.trainer.max_rounds {
        let cuts = separate(&data, &sol.theta, &sol.beta, py, opts.trainer.tol)?;
        if cuts.is_empty() {
            if sol.at_artificial {
                return Err(Error::Unbounded);
            }
            status = TrainerStatus::Optimal;
            rounds = round;
            break;
        }
        for (i, j, k, y) in cuts {
            master.insert(make_cut(i, j, k, round, &data[i], &y, py));
        }
        sol = master.solve()?;
    }

    // Multipliers for every block from the y-LPs at the final θ; with them
    // (θ, β, λ) is feasible for the full program.
    let entries: usize = data
        .iter()
        .map(|d| d.zs.iter().map(|z| z.rhs.len()).sum::<usize>() * k_range(d.u, py))
        .sum();
    let theta = &sol.theta;
    let (duals, full_residual) = if entries <= opts.max_dual_entries {
        let per: Vec<Result<Vec<BlockDual>>> = data
            .par_iter()
            .enumerate()
            .map(|(i, inst)| {
                let mut out = Vec::new();
                for j in 0..inst.zs.len() {
                    for k in 0..k_range(inst.u, py) {
                        let (value, lambda, _) = block_value(inst, j, k, theta, py)?;
                        out.push(BlockDual {
                            instance: i,
                            z: inst.zs[j].z.clone(),
                            k,
                            lambda,
                            value,
                        });
                    }
                }
                Ok(out)
            })
            .collect();
        let mut all = Vec::new();
        for r in per {
            all.extend(r?);
        }
        let mut worst: f64 = 0.0;
        for bd in &all {
            worst = worst.max(bd.value - sol.beta[bd.instance]);
            let inst = &data[bd.instance];
            let j = inst.zs.iter().position(|z| z.z == bd.z).expect("own z");
            let zd = &inst.zs[j];
            let hk = h(bd.k, inst.u, py);
            let lhs_lin = dot(theta, &sub(&inst.f_hat, &zd.m0)) + dot(&bd.lambda, &zd.rhs) + block_const(inst, zd, &hk);
            worst = worst.max(lhs_lin - sol.beta[bd.instance]);
            let mut stat = zd.m.tr_mul_vec(theta);
            for (c, s) in stat.iter_mut().enumerate() {
                *s += hk[c] + (0..zd.rhs.len()).map(|t| zd.a[(t, c)] * bd.lambda[t]).sum::<f64>();
            }
            worst = worst.max(crate::linalg::norm_inf(&stat));
            worst = worst.max(bd.lambda.iter().fold(0.0_f64, |m, &l| m.max(-l)));
        }
        (Some(all), worst)
    } else {
        let mut worst: f64 = 0.0;
        for (i, inst) in data.iter().enumerate() {
            for j in 0..inst.zs.len() {
                for k in 0..k_range(inst.u, py) {
                    worst = worst.max(block_value(inst, j, k, theta, py)?.0 - sol.beta[i]);
                }
            }
        }
        (None, worst)
    };

    Ok(TrainerSolution {
        theta: CostVector::new(sol.theta.clone())?,
        objective: sol.objective,
        slacks: sol.beta,
        duals,
        status,
        kkt: sol.kkt,
        full_residual,
        rounds,
        working_rows: master.rows.len(),
    })
}
