//! Single-facility location mechanisms over normed spaces.
//!
//! The crate evaluates mechanisms that map a profile of reported agent
//! locations to a lottery over facility locations, computes their exact
//! expected maximum and social cost, certifies optimal benchmarks, and checks
//! game-theoretic properties (strategyproofness, group-strategyproofness,
//! unanimity, translation invariance, segment support) either at given inputs
//! or through seeded adversarial search.
//!
//! ```
//! use facloc::{Mechanism, MechanismSpec, Norm, Profile, cost_mc};
//!
//! let profile = Profile::from_coords(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
//! let norm = Norm::euclidean();
//! let lottery = MechanismSpec::RandMed.apply(&profile, &norm).unwrap();
//! assert_eq!(lottery.len(), 3);
//! assert!((cost_mc(&lottery, &profile, &norm).unwrap() - 1.5).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod geometry;
pub mod mechanisms;
pub mod objectives;
pub mod properties;
pub mod report;
pub mod rng;
pub mod scenarios;
pub mod search;
pub mod tol;

pub use error::{Error, Result};
pub use geometry::{
    centroid, expected_distance, norm_eval, point_on_segment_at_distance, radius,
    strict_convexity_witness, Agent, Atom, Lottery, Norm, Point, Profile,
};
pub use mechanisms::{Mechanism, MechanismSpec};
pub use objectives::{
    approx_ratio, cost, cost_mc, cost_sc, opt_max_cost, opt_social_cost, ApproxRatio, Objective,
    OptMethod, OptResult,
};
pub use properties::{PropertyVerdict, Status, Witness};
pub use search::{search_gsp_violation, search_sp_violation, search_worst_ratio, SearchConfig};

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = concat!("facloc ", env!("CARGO_PKG_VERSION"));
