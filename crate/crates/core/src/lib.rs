//! Inverse optimization for linear hypotheses.
//!
//! Given signal/response pairs produced by an expert that minimizes an unknown
//! cost `<θ, φ(s, x)>` over a feasible set `X(s)`, this crate recovers `θ`.
//! It provides
//!
//! * the consistent-cone geometry: feasibility program, incenter (and its
//!   generalized regularized form) and a small-dimension circumcenter,
//! * the augmented suboptimality loss, its hinge variant, the generalized
//!   predictability loss, and exact / stochastic / ε-approximate subgradients,
//! * finite convex trainers: the epigraph program for enumerable feasible sets,
//!   the dualized LP for mixed-integer feasible sets and the ∞-norm facet LPs,
//! * stochastic approximate mirror descent with Euclidean and entropic geometry,
//! * a dense simplex LP solver and an active-set QP solver,
//! * seeded data generators and an experiment harness.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bench;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod losses;
pub mod model;
pub mod reformulate;
pub mod rng;
pub mod samd;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{
    Budget, CostVector, DistanceFn, DistanceKind, FeatureMap, FeasibleSetOracle, IODataset,
    IOInstance, Response, Signal, ThetaSet,
};
