//! Reputation grid, behavior functions, probability formulas and the
//! compartmental vector field for all three community variants.

mod grid;
mod params;
mod probs;
mod rhs;
mod state;

use thiserror::Error;

pub use grid::{make_grid, ReputationGrid};
pub use params::{
    authenticity_prob, correctness_prob, BehaviorParams, CliqueParams, Group, ModelParams, Variant,
};
pub use probs::{
    agenda_correctness, category_probs, eval_probs, majority_prob, overall_pc, selection_probs,
    snapshot, CategoryProbs, DocCategory, EvalProbs, SelectionProbs, Snapshot, Topic, Truth,
};
pub use rhs::{residual, rhs, VectorField};
pub use state::{CommunityState, MASS_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("reputation grid needs at least one step")]
    InvalidGrid,
    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
}
