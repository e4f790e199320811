//! Random walks on finite weighted graphs treated as electric networks.
//!
//! Edges carry conductances `C_yz`; the walk moves from `y` to a neighbor `z`
//! with probability `C_yz / C_y`. The crate computes return, hitting and
//! commute times, effective resistances and the stationary law exactly (dense
//! grounded-Laplacian solves), estimates them by seeded simulation, and
//! replays the pendant-vertex argument for `E_z[T_z^+] = C / C_z` step by step.
//!
//! ```
//! use ohmwalk::{build_network, return_time, return_time_formula, VertexId};
//!
//! let net = build_network([("a", "b", 1.0), ("b", "c", 2.0)]).unwrap();
//! let b = VertexId::from("b");
//! let exact = return_time(&net, &b).unwrap();
//! assert!((exact - return_time_formula(&net, &b).unwrap()).abs() < 1e-12);
//! ```

pub mod chain;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod monte_carlo;
pub mod network;
pub mod numeric;
pub mod par;
pub mod pendant;
pub mod proof;
pub mod solver;

pub use chain::{chain_to_network, Kernel};
pub use error::{Error, Result};
pub use monte_carlo::{
    estimate_excursions, estimate_hitting_time, estimate_return_time, step, Estimate,
    ExcursionStats, SimParams, WalkRng, WalkTrace,
};
pub use network::{build_network, Distribution, Network, VertexId};
pub use numeric::{relative_error, DEFAULT_TOLERANCE};
pub use par::Execution;
pub use pendant::{attach_pendant, AugmentedNetwork};
pub use proof::{
    generalized_pendant_check, replay, verify_theorems, ProofTrace, ReplayOptions, TheoremReport,
};
pub use solver::{
    commute_time, effective_resistance, hitting_time, return_time, return_time_formula,
    stationary_distribution, ExactSolver, HittingProfile, Laplacian,
};
