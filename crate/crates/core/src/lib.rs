//! Ranking individuals from several kinds of pairwise interaction at once.
//!
//! Each interaction records a winner (or instigator), a loser (or recipient)
//! and an interaction type. Underneath every interaction sits a latent
//! Bradley-Terry contest deciding which party is *dominant*; the type then
//! decides, with its own *valence probability* `q_t`, whether the dominant
//! party is the one observed winning. Strengths and valences are estimated
//! jointly by expectation-maximization, either by maximum likelihood or as a
//! MAP estimate under a logistic prior on the scores.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command-line
//! front end and other IO live in the `multirank` crate.
//!
//! ```
//! use multirank_core::{fit, Dataset, FitConfig, InteractionRecord};
//!
//! let records = vec![
//!     InteractionRecord::new(0, 1, 0),
//!     InteractionRecord::new(0, 1, 0),
//!     InteractionRecord::new(1, 2, 0),
//! ];
//! let data = Dataset::with_default_labels(3, 1, records).unwrap();
//! let result = fit(&data, &FitConfig::default()).unwrap();
//! assert_eq!(result.ranking, vec![0, 1, 2]);
//! ```
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod em;
pub mod error;
pub mod eval;
pub mod model;
pub mod rng;
pub mod synthetic;

pub use em::{
    e_step, fit, m_step_strengths, m_step_valences, normalize_strengths, orient, FitConfig,
    FitResult, Mode, Responsibilities, StrengthSolve,
};
pub use error::{Error, Result};
pub use eval::{
    fit_unimodal_baseline, rank_from_strengths, ranks_from_order, run_benchmark_cell, run_instance,
    run_synthetic_benchmark, spearman_r2, standard_cells, summarize_cell, BenchmarkCell,
    CellConfig,
};
pub use model::{
    count_matrix, dominance_probability, log_marginal_likelihood, log_posterior, log_prior_scores,
    logistic, record_joint_probability, CountMatrix, Dataset, InteractionRecord, ModelParams,
};
pub use synthetic::{generate_dataset, logistic_quantile, sample_logistic_score, SyntheticTruth};
