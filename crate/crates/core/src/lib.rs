//! Total-influence estimation for monotone Boolean functions.
//!
//! The crate is `no_std` (with `alloc`) and pure: every randomized routine
//! takes an explicit [`RngStream`], so a `(seed, stream)` pair fully
//! determines a run. File formats, the CLI and parallel drivers live in the
//! `influence-cli` companion crate.
//!
//! Modules, bottom-up:
//!
//! - [`lattice`]: packed lattice points, uniform sampling, downward walks.
//! - [`zoo`]: function specifications and the query-counting oracle.
//! - [`exact`]: brute-force ground truth at desk scale and the two independent
//!   computations of the walk success probability.
//! - [`estimator`]: parameter derivation and the walk / direct estimators.
//! - [`lowerbound`]: hard-instance families and the distinguishing game.
//! - [`numeric`]: log-space binomial probabilities stable to `n ~ 10^9`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub mod estimator;
pub mod exact;
pub mod lattice;
pub mod lowerbound;
pub mod numeric;
pub mod zoo;

pub use error::{Error, Result};
pub use estimator::{
    derive_params, estimate_influence_direct, estimate_influence_walk, EstimateReport,
    EstimatorParams, Regime, RunStatus,
};
pub use exact::{InfluenceProfile, Scalar};
pub use lattice::{CutoffLevel, Point, RngStream};
pub use lowerbound::{FamilyInstance, FamilyKind, GameReport, GameStrategy};
pub use zoo::{FunctionKind, FunctionSpec, OracleHandle, PrefixSet};
