//! File formats and the command-line front end for `multirank-core`.
//!
//! * [`interactions`]: the `winner,loser,type` CSV interchange format.
//! * [`report`]: fit-result JSON and CSV, the synthetic truth sidecar and the
//!   benchmark tables.
//! * [`app`]: the `multirank` command itself.

pub mod app;
pub mod error;
pub mod interactions;
pub mod report;

pub use error::InputError;
pub use interactions::{parse_interactions, read_interactions, write_interactions};
