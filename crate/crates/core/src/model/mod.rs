//! Domain types: signals, responses, instances, datasets, budgets.

mod distance;
mod features;
pub mod io;
mod oracle;

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, DenseMatrix};
use crate::{Error, Result};

pub use distance::{DistanceFn, DistanceKind, DistanceScope};
pub use features::{FeatureMap, IdentityFeatures, MixedLinearFeatures, PhiFn};
pub use oracle::{
    binary_points, enumerate_binary_lp, BinaryLpOracle, FeasibleSetOracle, FiniteSetOracle,
    InnerMax, MixedIntegerOracle, OracleKind, DEFAULT_ENUMERATION_CAP,
};

/// Learned cost vector θ. All entries are finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Self(entries))
        } else {
            Err(Error::NonFinite("cost vector"))
        }
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Unit Euclidean-norm copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = crate::linalg::norm2(&self.0);
        if n > 0.0 {
            Self(self.0.iter().map(|v| v / n).collect())
        } else {
            self.clone()
        }
    }
}

impl Deref for CostVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for CostVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CostVector> for Vec<f64> {
    fn from(c: CostVector) -> Self {
        c.0
    }
}

/// Admissible set Θ for the cost vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSet {
    #[default]
    All,
    NonnegOrthant,
    /// `lo <= θ_j <= hi` for every coordinate.
    Box { lo: f64, hi: f64 },
    /// `‖θ‖₁ <= radius`.
    L1Ball { radius: f64 },
}

impl ThetaSet {
    /// Per-coordinate bounds when Θ is a box (possibly unbounded).
    pub fn bounds(&self, p: usize) -> Option<Vec<(f64, f64)>> {
        match *self {
            ThetaSet::All => Some(vec![(f64::NEG_INFINITY, f64::INFINITY); p]),
            ThetaSet::NonnegOrthant => Some(vec![(0.0, f64::INFINITY); p]),
            ThetaSet::Box { lo, hi } => Some(vec![(lo, hi); p]),
            ThetaSet::L1Ball { .. } => None,
        }
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        match *self {
            ThetaSet::All => true,
            ThetaSet::NonnegOrthant => theta.iter().all(|&v| v >= -tol),
            ThetaSet::Box { lo, hi } => theta.iter().all(|&v| v >= lo - tol && v <= hi + tol),
            ThetaSet::L1Ball { radius } => crate::linalg::norm1(theta) <= radius + tol,
        }
    }

    /// Euclidean projection onto Θ, in place.
    pub fn project(&self, theta: &mut [f64]) {
        match *self {
            ThetaSet::All => {}
            ThetaSet::NonnegOrthant => theta.iter_mut().for_each(|v| *v = v.max(0.0)),
            ThetaSet::Box { lo, hi } => theta.iter_mut().for_each(|v| *v = v.clamp(lo, hi)),
            ThetaSet::L1Ball { radius } => project_l1_ball(theta, radius),
        }
    }
}

/// Sort-based Euclidean projection onto `{θ : ‖θ‖₁ <= radius}`.
pub fn project_l1_ball(theta: &mut [f64], radius: f64) {
    if crate::linalg::norm1(theta) <= radius {
        return;
    }
    let mut mags: Vec<f64> = theta.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - radius) / (k + 1) as f64;
        if m > t {
            tau = t;
        } else {
            break;
        }
    }
    for v in theta.iter_mut() {
        *v = v.signum() * (v.abs() - tau).max(0.0);
    }
}

/// Signal of the mixed-integer family: `A y + B z <= c`, plus an opaque
/// discrete context `w` handed to the feature callbacks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedIntegerSignal {
    #[serde(rename = "A")]
    pub a: DenseMatrix,
    #[serde(rename = "B")]
    pub b: DenseMatrix,
    pub c: Vec<f64>,
    #[serde(default)]
    pub w: serde_json::Value,
    /// Adds `0 <= y <= 1` to the continuous block.
    #[serde(default = "default_true")]
    pub y_box: bool,
}

fn default_true() -> bool {
    true
}

impl MixedIntegerSignal {
    pub fn u(&self) -> usize {
        self.a.ncols()
    }

    pub fn v(&self) -> usize {
        self.b.ncols()
    }

    /// Constraint rows on `y` for a fixed `z`, with the y-box appended as rows:
    /// returns `(A_aug, c_aug - B_aug z)`.
    pub fn y_system(&self, z: &[i64]) -> (DenseMatrix, Vec<f64>) {
        let u = self.u();
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        let mut a = self.a.clone();
        let mut rhs: Vec<f64> = if self.b.nrows() == 0 {
            self.c.clone()
        } else {
            self.b
                .rows_iter()
                .zip(&self.c)
                .map(|(row, &ci)| ci - dot(row, &zf))
                .collect()
        };
        if a.nrows() != rhs.len() {
            // u = 0 with an empty A: one zero-width row per constraint.
            a = DenseMatrix::zeros(rhs.len(), u);
        }
        if self.y_box {
            for k in 0..u {
                let mut row = vec![0.0; u];
                row[k] = 1.0;
                a.push_row(&row);
                rhs.push(1.0);
                row[k] = -1.0;
                a.push_row(&row);
                rhs.push(0.0);
            }
        }
        (a, rhs)
    }
}

/// Exogenous signal ŝ.
#[derive(Clone, Debug, PartialEq)]
pub enum Signal {
    /// Binary linear program `{x ∈ {0,1}^n : A x <= b}`.
    BinaryLp { a: DenseMatrix, b: Vec<f64> },
    MixedInteger(MixedIntegerSignal),
    /// Payload interpreted only by a custom oracle / feature map.
    Opaque(serde_json::Value),
}

impl Signal {
    pub fn binary_lp(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "binary LP signal: rows of A vs length of b",
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(Signal::BinaryLp { a, b })
    }

    pub fn mixed_integer(s: MixedIntegerSignal) -> Result<Self> {
        let t = s.c.len();
        if s.a.nrows() != t && !(s.a.nrows() == 0 && s.u() == 0) {
            return Err(Error::DimensionMismatch {
                context: "mixed-integer signal: rows of A vs length of c",
                expected: t,
                got: s.a.nrows(),
            });
        }
        if s.b.nrows() != t && !(s.b.nrows() == 0 && s.v() == 0) {
            return Err(Error::DimensionMismatch {
                context: "mixed-integer signal: rows of B vs length of c",
                expected: t,
                got: s.b.nrows(),
            });
        }
        Ok(Signal::MixedInteger(s))
    }
}

/// Response x = (y, z): a continuous part and a discrete part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Response {
    #[serde(rename = "y", default)]
    pub continuous: Vec<f64>,
    #[serde(rename = "z", default)]
    pub discrete: Vec<i64>,
}

impl Response {
    pub fn discrete(z: Vec<i64>) -> Self {
        Self {
            continuous: Vec::new(),
            discrete: z,
        }
    }

    pub fn mixed(y: Vec<f64>, z: Vec<i64>) -> Self {
        Self {
            continuous: y,
            discrete: z,
        }
    }

    pub fn len(&self) -> usize {
        self.continuous.len() + self.discrete.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(y, z)` concatenated as reals.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.continuous.clone();
        v.extend(self.discrete.iter().map(|&z| z as f64));
        v
    }

    /// Compact text form used in CSV exports, e.g. `y=0.5;1|z=0;1`.
    pub fn to_compact(&self) -> String {
        let y: Vec<String> = self.continuous.iter().map(|v| format!("{v}")).collect();
        let z: Vec<String> = self.discrete.iter().map(|v| v.to_string()).collect();
        format!("y={}|z={}", y.join(";"), z.join(";"))
    }
}

/// Inner-solver effort limit for the loss maximization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: Option<usize>,
    pub suboptimality_eps: Option<f64>,
    pub exact: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Self::exact()
    }
}

impl Budget {
    pub fn exact() -> Self {
        Self {
            max_nodes: None,
            suboptimality_eps: None,
            exact: true,
        }
    }

    /// Scan at most `n` responses / integer assignments.
    pub fn nodes(n: usize) -> Self {
        Self {
            max_nodes: Some(n.max(1)),
            suboptimality_eps: None,
            exact: false,
        }
    }

    /// Accept any response within `eps` of the maximum.
    pub fn suboptimal(eps: f64) -> Self {
        Self {
            max_nodes: None,
            suboptimality_eps: Some(eps),
            exact: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exact && (self.max_nodes.is_some() || self.suboptimality_eps.is_some()) {
            return Err(Error::Invalid("exact budget cannot carry caps".into()));
        }
        if let Some(e) = self.suboptimality_eps {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::Invalid(format!("suboptimality_eps must be >= 0, got {e}")));
            }
        }
        if self.max_nodes == Some(0) {
            return Err(Error::Invalid("max_nodes must be positive".into()));
        }
        Ok(())
    }

    /// A budget with neither cap behaves as exact.
    pub fn is_exact(&self) -> bool {
        self.exact || (self.max_nodes.is_none() && self.suboptimality_eps.is_none())
    }
}

/// One observed (signal, response) pair with its feasible-set oracle.
#[derive(Clone)]
pub struct IOInstance {
    pub signal: Signal,
    pub response: Response,
    pub oracle: Arc<dyn FeasibleSetOracle>,
    /// Set when the response lies outside the feasible set.
    pub infeasible: bool,
}

impl fmt::Debug for IOInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IOInstance")
            .field("signal", &self.signal)
            .field("response", &self.response)
            .field("oracle", &self.oracle.kind())
            .field("infeasible", &self.infeasible)
            .finish()
    }
}

impl IOInstance {
    pub fn new(signal: Signal, response: Response, oracle: Arc<dyn FeasibleSetOracle>) -> Self {
        let infeasible = !oracle.contains(&signal, &response);
        Self {
            signal,
            response,
            oracle,
            infeasible,
        }
    }

    /// Binary-LP instance with its own caching oracle.
    pub fn binary_lp(a: DenseMatrix, b: Vec<f64>, x: Vec<i64>) -> Result<Self> {
        let signal = Signal::binary_lp(a, b)?;
        Ok(Self::new(signal, Response::discrete(x), Arc::new(BinaryLpOracle::new())))
    }

    pub fn mixed_integer(signal: MixedIntegerSignal, response: Response) -> Result<Self> {
        let signal = Signal::mixed_integer(signal)?;
        Ok(Self::new(signal, response, Arc::new(MixedIntegerOracle::new())))
    }

    /// Finite instance over an explicit response list.
    pub fn finite(responses: Vec<Response>, x_hat: Response) -> Self {
        Self::new(
            Signal::Opaque(serde_json::Value::Null),
            x_hat,
            Arc::new(FiniteSetOracle::new(responses)),
        )
    }
}

#[derive(Clone, Debug)]
pub struct IODataset {
    pub instances: Vec<IOInstance>,
    pub seed: u64,
}

impl IODataset {
    pub fn new(instances: Vec<IOInstance>, seed: u64) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::Invalid("dataset must be non-empty".into()));
        }
        Ok(Self { instances, seed })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// First `n` instances, same seed.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        Self::new(self.instances[..n.min(self.len())].to_vec(), self.seed)
    }

    /// Checks that `φ` produces vectors of its declared dimension on every instance.
    pub fn check_dimension(&self, phi: &dyn FeatureMap) -> Result<usize> {
        let p = phi.dim();
        for inst in &self.instances {
            let got = phi.eval(&inst.signal, &inst.response).len();
            if got != p {
                return Err(Error::DimensionMismatch {
                    context: "feature map output",
                    expected: p,
                    got,
                });
            }
        }
        Ok(p)
    }
}

/// `<θ, φ(s, x)>`
pub fn evaluate_hypothesis(theta: &[f64], phi: &dyn FeatureMap, s: &Signal, x: &Response) -> Result<f64> {
    let f = phi.eval(s, x);
    if f.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            context: "cost vector vs feature map",
            expected: f.len(),
            got: theta.len(),
        });
    }
    Ok(dot(theta, &f))
}

pub fn check_feasible(inst: &IOInstance) -> bool {
    inst.oracle.contains(&inst.signal, &inst.response)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_examples() {
        let phi = IdentityFeatures::new(2);
        let s = Signal::Opaque(serde_json::Value::Null);
        let x = Response::discrete(vec![0, 1]);
        assert_eq!(evaluate_hypothesis(&[1.0, 0.0], &phi, &s, &x).unwrap(), 0.0);
        assert_eq!(evaluate_hypothesis(&[0.0, 0.0], &phi, &s, &x).unwrap(), 0.0);
        let x = Response::discrete(vec![1, 1]);
        assert_eq!(evaluate_hypothesis(&[0.5, 2.0], &phi, &s, &x).unwrap(), 2.5);
        assert!(matches!(
            evaluate_hypothesis(&[1.0], &phi, &s, &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn feasibility_checks() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]);
        let ok = IOInstance::binary_lp(a.clone(), vec![1.0], vec![1, 0]).unwrap();
        assert!(check_feasible(&ok) && !ok.infeasible);
        let bad = IOInstance::binary_lp(a.clone(), vec![1.0], vec![1, 1]).unwrap();
        assert!(!check_feasible(&bad) && bad.infeasible);
        let nonbinary = IOInstance::binary_lp(a, vec![5.0], vec![2, 0]).unwrap();
        assert!(!check_feasible(&nonbinary));
    }

    #[test]
    fn cost_vector_rejects_nan() {
        assert!(CostVector::new(vec![1.0, f64::NAN]).is_err());
        let c: CostVector = serde_json::from_str("[3.0,4.0]").unwrap();
        assert_eq!(&c.normalized()[..], &[0.6, 0.8]);
    }

    #[test]
    fn l1_projection() {
        let mut t = vec![3.0, -1.0, 0.5];
        project_l1_ball(&mut t, 2.0);
        assert!((crate::linalg::norm1(&t) - 2.0).abs() < 1e-12);
        assert_eq!(t, vec![2.0, 0.0, 0.0]);
        let mut inside = vec![0.25, -0.25];
        project_l1_ball(&mut inside, 1.0);
        assert_eq!(inside, vec![0.25, -0.25]);
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::exact().validate().is_ok());
        let bad = Budget {
            max_nodes: Some(3),
            suboptimality_eps: None,
            exact: true,
        };
        assert!(bad.validate().is_err());
        assert!(Budget::suboptimal(-1.0).validate().is_err());
    }
}
