//! Exact optimal transport on finite metric spaces, organised around the
//! Kantorovich monad.
//!
//! Everything here works on finite rosters of points with an explicit
//! distance table:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`spaces`] | finite (pseudo)metric spaces, normed point sets, ℓ1 products, weighted combinations |
//! | [`measures`] | finitely supported probability measures, Dirac deltas, pushforwards, mixtures |
//! | [`power`] | tuples and multisets of points with their rescaled metrics, uniform-fiber maps |
//! | [`graded`] | currying and flattening of nested tuples/multisets and their coherence checks |
//! | [`monad`] | empirical distributions, expectation `PPX -> PX`, monad-law checks |
//! | [`transport`] | Wasserstein-1 solvers: brute force, assignment, min-cost flow, dual certificates |
//! | [`algebras`] | barycenters on normed vector spaces, convex-space axioms, the simplex operad |
//! | [`approx`] | weight rationalisation, ball truncation, empirical sampling and convergence studies |
//! | [`cli`] | the `kanto` command-line front end |
//!
//! Weights are `f64`, optionally shadowed by exact rationals. When every
//! input carries exact weights, the solvers and law checks take the exact
//! path.
//!
//! ```
//! use std::sync::Arc;
//! use kantorovich::{measures::DiscreteMeasure, spaces::FiniteMetricSpace, transport};
//!
//! let line = Arc::new(FiniteMetricSpace::from_line(&[0.0, 1.0, 2.0]));
//! let p = DiscreteMeasure::from_rational(line.clone(), vec![0, 2], vec![1, 1], 2).unwrap();
//! let q = DiscreteMeasure::dirac(line, 1).unwrap();
//! let res = transport::w1_flow(&p, &q).unwrap();
//! assert!((res.cost - 1.0).abs() < 1e-12);
//! ```

pub mod algebras;
pub mod approx;
mod assignment;
pub mod cli;
mod error;
mod flow;
pub mod formats;
pub mod graded;
pub mod measures;
pub mod monad;
pub mod power;
pub mod random;
pub mod spaces;
pub mod suite;
pub mod transport;

pub use assignment::{brute_force_assignment, hungarian};
pub use error::{Error, Result};

/// Tolerance on distance comparisons (metric axioms, shortness, isometry).
pub const TAU_METRIC: f64 = 1e-9;
/// Tolerance on probability weights (simplex membership, measure equality).
pub const TAU_WEIGHT: f64 = 1e-9;
/// Tolerance on optimal costs and duality gaps.
pub const TAU_SOLVER: f64 = 1e-8;
/// Default cap on the number of points of a product construction.
pub const DEFAULT_SIZE_CAP: usize = 1_000_000;
