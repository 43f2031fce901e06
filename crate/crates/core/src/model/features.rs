use std::fmt;
use std::sync::Arc;

use crate::linalg::DenseMatrix;

use super::{Response, Signal};

/// Feature mapping φ(s, x) ∈ R^p of a linear hypothesis `<θ, φ(s, x)>`.
pub trait FeatureMap: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, s: &Signal, x: &Response) -> Vec<f64>;

    /// Coordinate-wise bounds of φ(s, x) over all `x` whose flattened form
    /// lies in the box `[lo, hi]`. `None` when unknown.
    fn bounds(&self, _s: &Signal, _lo: &[f64], _hi: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        None
    }

    /// For maps affine in the continuous block: `φ(s, (y, z)) = M y + m0`.
    /// The default probes the map at `y = 0` and the unit vectors, which is
    /// exact whenever the map really is affine in `y`.
    fn affine_in_continuous(&self, s: &Signal, u: usize, z: &[i64]) -> (DenseMatrix, Vec<f64>) {
        let p = self.dim();
        let base = self.eval(s, &Response::mixed(vec![0.0; u], z.to_vec()));
        let mut m = DenseMatrix::zeros(p, u);
        for a in 0..u {
            let mut y = vec![0.0; u];
            y[a] = 1.0;
            let col = self.eval(s, &Response::mixed(y, z.to_vec()));
            for r in 0..p {
                m[(r, a)] = col[r] - base[r];
            }
        }
        (m, base)
    }
}

/// φ(s, x) = (y, z): the flattened response.
#[derive(Clone, Copy, Debug)]
pub struct IdentityFeatures {
    dim: usize,
}

impl IdentityFeatures {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl FeatureMap for IdentityFeatures {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _s: &Signal, x: &Response) -> Vec<f64> {
        x.flat()
    }

    fn bounds(&self, _s: &Signal, lo: &[f64], hi: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        Some((lo.to_vec(), hi.to_vec()))
    }

    fn affine_in_continuous(&self, _s: &Signal, u: usize, z: &[i64]) -> (DenseMatrix, Vec<f64>) {
        let mut m = DenseMatrix::zeros(self.dim, u);
        for a in 0..u {
            m[(a, a)] = 1.0;
        }
        let mut base = vec![0.0; u];
        base.extend(z.iter().map(|&v| v as f64));
        (m, base)
    }
}

/// Feature callback on the discrete context `w` and the integer block `z`.
pub type PhiFn = Arc<dyn Fn(&serde_json::Value, &[i64]) -> Vec<f64> + Send + Sync>;

/// Linear hypothesis of the mixed-integer family,
/// `<y, Q φ₁(w, z)> + <q, φ₂(w, z)>`, with `θ = (vec(Q), q)` where `vec`
/// stacks the columns of the `u × d₁` matrix `Q`.
#[derive(Clone)]
pub struct MixedLinearFeatures {
    pub u: usize,
    pub d1: usize,
    pub d2: usize,
    pub phi1: PhiFn,
    pub phi2: PhiFn,
}

impl fmt::Debug for MixedLinearFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedLinearFeatures")
            .field("u", &self.u)
            .field("d1", &self.d1)
            .field("d2", &self.d2)
            .finish()
    }
}

impl MixedLinearFeatures {
    /// φ₁ ≡ 1 and φ₂(w, z) = z, so `θ = (q_y, q_z)` and the cost is `<q_y, y> + <q_z, z>`.
    pub fn standard(u: usize, v: usize) -> Self {
        Self {
            u,
            d1: 1,
            d2: v,
            phi1: Arc::new(|_, _| vec![1.0]),
            phi2: Arc::new(|_, z| z.iter().map(|&v| v as f64).collect()),
        }
    }

    fn context(s: &Signal) -> &serde_json::Value {
        match s {
            Signal::MixedInteger(m) => &m.w,
            Signal::Opaque(v) => v,
            Signal::BinaryLp { .. } => &serde_json::Value::Null,
        }
    }
}

impl FeatureMap for MixedLinearFeatures {
    fn dim(&self) -> usize {
        self.u * self.d1 + self.d2
    }

    fn eval(&self, s: &Signal, x: &Response) -> Vec<f64> {
        let w = Self::context(s);
        let f1 = (self.phi1)(w, &x.discrete);
        let f2 = (self.phi2)(w, &x.discrete);
        debug_assert_eq!(f1.len(), self.d1);
        debug_assert_eq!(f2.len(), self.d2);
        let mut out = Vec::with_capacity(self.dim());
        for &fb in &f1 {
            for a in 0..self.u {
                out.push(x.continuous.get(a).copied().unwrap_or(0.0) * fb);
            }
        }
        out.extend(f2);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_mixed_features_are_identity() {
        let phi = MixedLinearFeatures::standard(2, 3);
        let s = Signal::Opaque(serde_json::Value::Null);
        let x = Response::mixed(vec![0.25, 0.5], vec![1, 0, 1]);
        assert_eq!(phi.eval(&s, &x), x.flat());
        let (m, m0) = phi.affine_in_continuous(&s, 2, &[1, 0, 1]);
        let (mi, m0i) = IdentityFeatures::new(5).affine_in_continuous(&s, 2, &[1, 0, 1]);
        assert_eq!(m, mi);
        assert_eq!(m0, m0i);
    }

    #[test]
    fn column_major_q_layout() {
        let phi = MixedLinearFeatures {
            u: 2,
            d1: 2,
            d2: 0,
            phi1: Arc::new(|_, z| vec![1.0, z[0] as f64]),
            phi2: Arc::new(|_, _| vec![]),
        };
        let s = Signal::Opaque(serde_json::Value::Null);
        let x = Response::mixed(vec![3.0, 5.0], vec![2]);
        // columns: Q[:,0] pairs with φ₁₀ = 1, Q[:,1] with φ₁₁ = 2
        assert_eq!(phi.eval(&s, &x), vec![3.0, 5.0, 6.0, 10.0]);
    }
}
