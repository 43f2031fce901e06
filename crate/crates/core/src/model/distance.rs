use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Response;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// d ≡ 0 (plain suboptimality loss).
    Zero,
    Euclidean,
    L1,
    /// 0-1 distance: 0 when the responses coincide, 1 otherwise.
    Hamming,
    Custom,
}

/// Which parts of the response the distance looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceScope {
    /// `kind` applied to the flattened response `(y, z)`.
    Full,
    /// `kind` applied to `z` only, plus `‖ŷ − y‖_∞` when `penalize_y`.
    Mixed { penalize_y: bool },
}

pub type CustomDistance = Arc<dyn Fn(&Response, &Response) -> f64 + Send + Sync>;

/// Distance d(x̂, x) >= 0 with d(x, x) = 0.
#[derive(Clone)]
pub struct DistanceFn {
    pub kind: DistanceKind,
    pub scope: DistanceScope,
    custom: Option<CustomDistance>,
}

impl fmt::Debug for DistanceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceFn")
            .field("kind", &self.kind)
            .field("scope", &self.scope)
            .finish()
    }
}

impl DistanceFn {
    pub fn of_kind(kind: DistanceKind) -> Self {
        assert!(kind != DistanceKind::Custom, "use DistanceFn::custom");
        Self {
            kind,
            scope: DistanceScope::Full,
            custom: None,
        }
    }

    pub fn zero() -> Self {
        Self::of_kind(DistanceKind::Zero)
    }

    pub fn euclidean() -> Self {
        Self::of_kind(DistanceKind::Euclidean)
    }

    pub fn l1() -> Self {
        Self::of_kind(DistanceKind::L1)
    }

    pub fn hamming() -> Self {
        Self::of_kind(DistanceKind::Hamming)
    }

    pub fn custom(f: impl Fn(&Response, &Response) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: DistanceKind::Custom,
            scope: DistanceScope::Full,
            custom: Some(Arc::new(f)),
        }
    }

    /// `d_z(ẑ, z)` (+ `‖ŷ − y‖_∞` when `penalize_y`), the mixed-integer distance.
    pub fn mixed(dz: DistanceKind, penalize_y: bool) -> Self {
        assert!(dz != DistanceKind::Custom, "custom distances use Full scope");
        Self {
            kind: dz,
            scope: DistanceScope::Mixed { penalize_y },
            custom: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == DistanceKind::Zero
            && !matches!(self.scope, DistanceScope::Mixed { penalize_y: true })
    }

    fn apply(kind: DistanceKind, a: &[f64], b: &[f64]) -> f64 {
        match kind {
            DistanceKind::Zero => 0.0,
            DistanceKind::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            DistanceKind::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            DistanceKind::Hamming => {
                if a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y) {
                    0.0
                } else {
                    1.0
                }
            }
            DistanceKind::Custom => unreachable!("custom handled by caller"),
        }
    }

    /// Distance restricted to the discrete blocks.
    pub fn discrete_part(&self, z_hat: &[i64], z: &[i64]) -> f64 {
        let a: Vec<f64> = z_hat.iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        Self::apply(self.kind, &a, &b)
    }

    pub fn eval(&self, x_hat: &Response, x: &Response) -> f64 {
        match (self.kind, self.scope) {
            (DistanceKind::Custom, _) => (self.custom.as_ref().expect("custom callback"))(x_hat, x),
            (kind, DistanceScope::Full) => Self::apply(kind, &x_hat.flat(), &x.flat()),
            (_, DistanceScope::Mixed { penalize_y }) => {
                let dz = self.discrete_part(&x_hat.discrete, &x.discrete);
                if penalize_y {
                    let dy = x_hat
                        .continuous
                        .iter()
                        .zip(&x.continuous)
                        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                    dy + dz
                } else {
                    dz
                }
            }
        }
    }

    /// Upper bound of d(x̂, x) over all `x` whose flattened form lies in `[lo, hi]`.
    pub fn upper_bound(&self, x_hat: &Response, lo: &[f64], hi: &[f64]) -> f64 {
        let xf = x_hat.flat();
        let far: Vec<f64> = xf
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&v, (&l, &h))| (v - l).abs().max((h - v).abs()))
            .collect();
        let zero = vec![0.0; far.len()];
        match (self.kind, self.scope) {
            (DistanceKind::Custom, _) => f64::INFINITY,
            (DistanceKind::Hamming, DistanceScope::Full) => 1.0,
            (kind, DistanceScope::Full) => Self::apply(kind, &far, &zero),
            (kind, DistanceScope::Mixed { penalize_y }) => {
                let u = x_hat.continuous.len();
                let dz = match kind {
                    DistanceKind::Hamming => 1.0,
                    k => Self::apply(k, &far[u..], &zero[u..]),
                };
                let dy = if penalize_y {
                    far[..u].iter().fold(0.0_f64, |m, v| m.max(*v))
                } else {
                    0.0
                };
                dz + dy
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_distances() {
        let a = Response::discrete(vec![0, 1, 1]);
        let b = Response::discrete(vec![1, 1, 0]);
        assert_eq!(DistanceFn::l1().eval(&a, &b), 2.0);
        assert!((DistanceFn::euclidean().eval(&a, &b) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(DistanceFn::hamming().eval(&a, &b), 1.0);
        assert_eq!(DistanceFn::hamming().eval(&a, &a), 0.0);
        assert_eq!(DistanceFn::zero().eval(&a, &b), 0.0);
    }

    #[test]
    fn mixed_distance() {
        let a = Response::mixed(vec![0.5, 0.0], vec![1, 0]);
        let b = Response::mixed(vec![0.0, 0.25], vec![0, 0]);
        assert_eq!(DistanceFn::mixed(DistanceKind::L1, true).eval(&a, &b), 1.5);
        assert_eq!(DistanceFn::mixed(DistanceKind::L1, false).eval(&a, &b), 1.0);
        let ub = DistanceFn::mixed(DistanceKind::L1, true).upper_bound(&a, &[0.0; 4], &[1.0; 4]);
        assert_eq!(ub, 1.0 + 2.0);
    }
}
