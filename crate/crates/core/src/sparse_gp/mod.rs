//! Nystrom embeddings, the DTC posterior with rank-one updates, and the
//! exact posterior used as an oracle and by the exact baselines.

mod dictionary;
mod exact;
mod history;
mod state;

pub use dictionary::{Dictionary, PINV_RTOL};
pub use exact::{
    effective_dimension, effective_dimension_from_variances, exact_posterior, ridge_leverage_scores,
    ExactCandidateGp, ExactPosterior,
};
pub use history::History;
pub use state::BatchState;
