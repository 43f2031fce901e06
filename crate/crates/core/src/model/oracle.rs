use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, DenseMatrix};
use crate::solvers::{argmax, lp};
use crate::{Error, Result};

use super::{Budget, DistanceFn, FeatureMap, MixedIntegerSignal, Response, Signal};

/// Largest `n` for which `{0,1}^n` is enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    FiniteEnumerable,
    MixedInteger,
}

/// Result of the loss maximization `max_x <θ, φ(x̂) − φ(x)> + d(x̂, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerMax {
    pub response: Response,
    pub value: f64,
    /// Upper bound on `true max − value`; 0 for exact solves.
    pub eps: f64,
}

/// Access to the feasible set `X(s)` of the forward problem.
pub trait FeasibleSetOracle: Send + Sync {
    fn kind(&self) -> OracleKind;

    fn contains(&self, s: &Signal, x: &Response) -> bool;

    /// All feasible responses in the canonical (lexicographic) order.
    fn enumerate(&self, s: &Signal) -> Result<Arc<Vec<Response>>>;

    /// Box containing every feasible flattened response, if known.
    fn response_box(&self, s: &Signal) -> Option<(Vec<f64>, Vec<f64>)>;

    fn inner_max(
        &self,
        s: &Signal,
        x_hat: &Response,
        theta: &[f64],
        phi: &dyn FeatureMap,
        d: &DistanceFn,
        budget: &Budget,
    ) -> Result<InnerMax>;

    /// A minimizer of `<θ, φ(s, x)>`; ties go to the first in canonical order.
    fn forward_min(&self, s: &Signal, theta: &[f64], phi: &dyn FeatureMap) -> Result<Response>;

    fn as_mixed_integer(&self) -> Option<&MixedIntegerOracle> {
        None
    }
}

impl fmt::Debug for dyn FeasibleSetOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeasibleSetOracle({:?})", self.kind())
    }
}

/// Points of `{0,1}^n` in lexicographic order (`x_0` most significant).
pub fn binary_points(n: usize) -> impl Iterator<Item = Vec<i64>> {
    (0..1u64 << n).map(move |k| (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as i64).collect())
}

fn row_ok(a: &DenseMatrix, b: &[f64], x: &[f64]) -> bool {
    a.rows_iter()
        .zip(b)
        .all(|(row, &bi)| dot(row, x) <= bi + FEAS_TOL * (1.0 + bi.abs()))
}

/// Feasible subset of `{0,1}^n` for `A x <= b`, in lexicographic order.
pub fn enumerate_binary_lp(a: &DenseMatrix, b: &[f64], cap: usize) -> Result<Vec<Response>> {
    let n = a.ncols();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "binary LP: rows of A vs length of b",
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let mut out = Vec::new();
    let mut xf = vec![0.0; n];
    for x in binary_points(n) {
        for (f, &v) in xf.iter_mut().zip(&x) {
            *f = v as f64;
        }
        if row_ok(a, b, &xf) {
            out.push(Response::discrete(x));
        }
    }
    Ok(out)
}

fn fingerprint(parts: &[&[f64]]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in parts {
        p.len().hash(&mut h);
        for v in *p {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// `{x ∈ {0,1}^n : A x <= b}`; the enumeration is cached per signal.
pub struct BinaryLpOracle {
    cap: usize,
    cache: OnceLock<(u64, Arc<Vec<Response>>)>,
}

impl Default for BinaryLpOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl BinaryLpOracle {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(cap: usize) -> Self {
        Self {
            cap,
            cache: OnceLock::new(),
        }
    }

    fn parts(s: &Signal) -> Result<(&DenseMatrix, &[f64])> {
        match s {
            Signal::BinaryLp { a, b } => Ok((a, b)),
            _ => Err(Error::Invalid("binary LP oracle needs a binary LP signal".into())),
        }
    }
}

impl FeasibleSetOracle for BinaryLpOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::FiniteEnumerable
    }

    fn contains(&self, s: &Signal, x: &Response) -> bool {
        let Ok((a, b)) = Self::parts(s) else { return false };
        x.continuous.is_empty()
            && x.discrete.len() == a.ncols()
            && x.discrete.iter().all(|&v| v == 0 || v == 1)
            && row_ok(a, b, &x.flat())
    }

    fn enumerate(&self, s: &Signal) -> Result<Arc<Vec<Response>>> {
        let (a, b) = Self::parts(s)?;
        let key = fingerprint(&[a.as_slice(), b, &[a.ncols() as f64]]);
        if let Some((k, list)) = self.cache.get() {
            if *k == key {
                return Ok(list.clone());
            }
            return Ok(Arc::new(enumerate_binary_lp(a, b, self.cap)?));
        }
        let list = Arc::new(enumerate_binary_lp(a, b, self.cap)?);
        let _ = self.cache.set((key, list.clone()));
        Ok(list)
    }

    fn response_box(&self, s: &Signal) -> Option<(Vec<f64>, Vec<f64>)> {
        let (a, _) = Self::parts(s).ok()?;
        Some((vec![0.0; a.ncols()], vec![1.0; a.ncols()]))
    }

    fn inner_max(
        &self,
        s: &Signal,
        x_hat: &Response,
        theta: &[f64],
        phi: &dyn FeatureMap,
        d: &DistanceFn,
        budget: &Budget,
    ) -> Result<InnerMax> {
        let list = self.enumerate(s)?;
        argmax::argmax_finite(&list, self.response_box(s), s, x_hat, theta, phi, d, budget)
    }

    fn forward_min(&self, s: &Signal, theta: &[f64], phi: &dyn FeatureMap) -> Result<Response> {
        let list = self.enumerate(s)?;
        argmax::argmin_finite(&list, s, theta, phi)
    }
}

/// Explicit finite feasible set, independent of the signal.
pub struct FiniteSetOracle {
    responses: Arc<Vec<Response>>,
}

impl FiniteSetOracle {
    pub fn new(responses: Vec<Response>) -> Self {
        Self {
            responses: Arc::new(responses),
        }
    }
}

impl FeasibleSetOracle for FiniteSetOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::FiniteEnumerable
    }

    fn contains(&self, _s: &Signal, x: &Response) -> bool {
        self.responses.iter().any(|r| r == x)
    }

    fn enumerate(&self, _s: &Signal) -> Result<Arc<Vec<Response>>> {
        Ok(self.responses.clone())
    }

    fn response_box(&self, _s: &Signal) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = self.responses.first()?.flat();
        let mut lo = first.clone();
        let mut hi = first;
        for r in self.responses.iter() {
            for (k, v) in r.flat().into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        Some((lo, hi))
    }

    fn inner_max(
        &self,
        s: &Signal,
        x_hat: &Response,
        theta: &[f64],
        phi: &dyn FeatureMap,
        d: &DistanceFn,
        budget: &Budget,
    ) -> Result<InnerMax> {
        argmax::argmax_finite(&self.responses, self.response_box(s), s, x_hat, theta, phi, d, budget)
    }

    fn forward_min(&self, s: &Signal, theta: &[f64], phi: &dyn FeatureMap) -> Result<Response> {
        argmax::argmin_finite(&self.responses, s, theta, phi)
    }
}

/// `{(y, z) : A y + B z <= c, z ∈ {0,1}^v, 0 <= y <= 1 (optional)}`.
///
/// Integer assignments are enumerated (those admitting some feasible `y`),
/// and the continuous block is handled by one LP per assignment.
pub struct MixedIntegerOracle {
    cap: usize,
    cache: OnceLock<(u64, Arc<Vec<Vec<i64>>>)>,
}

impl Default for MixedIntegerOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl MixedIntegerOracle {
    pub fn new() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            cache: OnceLock::new(),
        }
    }

    pub fn signal(s: &Signal) -> Result<&MixedIntegerSignal> {
        match s {
            Signal::MixedInteger(m) => Ok(m),
            _ => Err(Error::Invalid("mixed-integer oracle needs a mixed-integer signal".into())),
        }
    }

    fn compute_z_enum(&self, m: &MixedIntegerSignal) -> Result<Vec<Vec<i64>>> {
        let v = m.v();
        if v > self.cap {
            return Err(Error::EnumerationCap { n: v, cap: self.cap });
        }
        let u = m.u();
        let mut out = Vec::new();
        for z in binary_points(v) {
            let (a, rhs) = m.y_system(&z);
            let feasible = if u == 0 {
                rhs.iter().all(|&r| r >= -FEAS_TOL * (1.0 + r.abs()))
            } else {
                let mut spec = lp::LinearProgramSpec::new(vec![0.0; u]);
                spec.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); u];
                spec.ineq_matrix = a;
                spec.ineq_rhs = rhs;
                lp::solve_lp(&spec)?.status == lp::LpStatus::Optimal
            };
            if feasible {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// Integer assignments `Z(ŵ)` admitting a feasible continuous part, lexicographic.
    pub fn z_enum(&self, s: &Signal) -> Result<Arc<Vec<Vec<i64>>>> {
        let m = Self::signal(s)?;
        let y_box = [if m.y_box { 1.0 } else { 0.0 }];
        let key = fingerprint(&[m.a.as_slice(), m.b.as_slice(), &m.c, &y_box, &[m.u() as f64, m.v() as f64]]);
        if let Some((k, list)) = self.cache.get() {
            if *k == key {
                return Ok(list.clone());
            }
            return Ok(Arc::new(self.compute_z_enum(m)?));
        }
        let list = Arc::new(self.compute_z_enum(m)?);
        let _ = self.cache.set((key, list.clone()));
        Ok(list)
    }
}

impl FeasibleSetOracle for MixedIntegerOracle {
    fn kind(&self) -> OracleKind {
        OracleKind::MixedInteger
    }

    fn contains(&self, s: &Signal, x: &Response) -> bool {
        let Ok(m) = Self::signal(s) else { return false };
        if x.continuous.len() != m.u() || x.discrete.len() != m.v() {
            return false;
        }
        if !x.discrete.iter().all(|&v| v == 0 || v == 1) {
            return false;
        }
        if m.y_box && !x.continuous.iter().all(|&y| (-FEAS_TOL..=1.0 + FEAS_TOL).contains(&y)) {
            return false;
        }
        let (a, rhs) = m.y_system(&x.discrete);
        row_ok(&a, &rhs, &x.continuous)
    }

    /// Only purely discrete signals (`u = 0`) are enumerable.
    fn enumerate(&self, s: &Signal) -> Result<Arc<Vec<Response>>> {
        let m = Self::signal(s)?;
        if m.u() > 0 {
            return Err(Error::NotEnumerable);
        }
        let zs = self.z_enum(s)?;
        Ok(Arc::new(zs.iter().map(|z| Response::discrete(z.clone())).collect()))
    }

    fn response_box(&self, s: &Signal) -> Option<(Vec<f64>, Vec<f64>)> {
        let m = Self::signal(s).ok()?;
        let (ylo, yhi) = if m.y_box { (0.0, 1.0) } else { (f64::NEG_INFINITY, f64::INFINITY) };
        let mut lo = vec![ylo; m.u()];
        let mut hi = vec![yhi; m.u()];
        lo.extend(std::iter::repeat_n(0.0, m.v()));
        hi.extend(std::iter::repeat_n(1.0, m.v()));
        Some((lo, hi))
    }

    fn inner_max(
        &self,
        s: &Signal,
        x_hat: &Response,
        theta: &[f64],
        phi: &dyn FeatureMap,
        d: &DistanceFn,
        budget: &Budget,
    ) -> Result<InnerMax> {
        let zs = self.z_enum(s)?;
        argmax::argmax_mixed_integer(s, &zs, x_hat, theta, phi, d, budget)
    }

    fn forward_min(&self, s: &Signal, theta: &[f64], phi: &dyn FeatureMap) -> Result<Response> {
        let zs = self.z_enum(s)?;
        argmax::argmin_mixed_integer(s, &zs, theta, phi)
    }

    fn as_mixed_integer(&self) -> Option<&MixedIntegerOracle> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let neg_i = DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]]);
        let all = enumerate_binary_lp(&neg_i, &[0.0, 0.0], 24).unwrap();
        let z: Vec<Vec<i64>> = all.iter().map(|r| r.discrete.clone()).collect();
        assert_eq!(z, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let ones = DenseMatrix::from_rows(&[vec![1.0, 1.0]]);
        let only = enumerate_binary_lp(&ones, &[0.0], 24).unwrap();
        assert_eq!(only, vec![Response::discrete(vec![0, 0])]);
    }

    #[test]
    fn cap_exceeded() {
        let a = DenseMatrix::zeros(1, 25);
        assert!(matches!(
            enumerate_binary_lp(&a, &[0.0], 24),
            Err(Error::EnumerationCap { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn mixed_integer_z_filtering() {
        // y + z1 + z2 <= 1.5 with y in [0, 1]: z = (1,1) needs y <= -0.5, infeasible.
        let m = MixedIntegerSignal {
            a: DenseMatrix::from_rows(&[vec![1.0]]),
            b: DenseMatrix::from_rows(&[vec![1.0, 1.0]]),
            c: vec![1.5],
            w: serde_json::Value::Null,
            y_box: true,
        };
        let s = Signal::MixedInteger(m);
        let o = MixedIntegerOracle::new();
        let zs = o.z_enum(&s).unwrap();
        assert_eq!(*zs, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert!(o.contains(&s, &Response::mixed(vec![0.5], vec![1, 0])));
        assert!(!o.contains(&s, &Response::mixed(vec![0.6], vec![1, 0])));
    }
}
