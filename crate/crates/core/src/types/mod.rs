//! Unknown-type inference: per-agent action histories clustered into types.

mod assignment;
mod history;
mod kmeans;

pub use assignment::{purity, relabel, TypeAssignment};
pub use history::ActionHistoryBuffer;
pub use kmeans::{kmeans, KMeansFit, MAX_ITERATIONS};
