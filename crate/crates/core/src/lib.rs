//! Simulation and analysis of a closed network community in which members
//! submit documents that are judged authentic or fake by three peers chosen
//! with probability proportional to their reputation.
//!
//! The crate is organized as:
//!
//! * [`model`]: reputation grid, behavior functions, selection/evaluation
//!   probabilities and the compartmental vector field for the no-clique,
//!   one-clique and two-antagonistic-cliques variants.
//! * [`dynamics`]: adaptive Dormand–Prince 5(4) integration, trajectories and
//!   steady-state detection.
//! * [`analysis`]: analytic equilibrium families, finite-difference Jacobians,
//!   eigenvalues and the reduced three-level vector field.
//! * [`oracle`]: a stochastic agent-based simulation of the same protocol used
//!   to cross-check the mean-field equations.
//! * [`harness`]: configuration parsing, figure presets, parameter sweeps and
//!   CSV/SVG output.
//! * [`par`]: data-parallel helpers with a sequential fallback when the
//!   `parallel` feature is disabled.

pub mod analysis;
pub mod dynamics;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod par;

pub use model::{
    BehaviorParams, CliqueParams, CommunityState, Group, ModelError, ModelParams, ReputationGrid,
    Variant,
};
