//! Numerical checks of the mean-field approximation bounds, and the spin game
//! showing where a single mean field goes wrong.

mod deviation;
mod smoothness;
mod spin;
mod suite;

pub use deviation::{
    average_deviation, check_theorem1, check_theorem2, multi_bound_is_tighter, random_deviation_instance, BoundCheck,
    DeviationReport, BOUND_TOLERANCE,
};
pub use smoothness::{check_theorem3, random_smoothness_instance, SmoothnessInstance, Theorem3Check, THEOREM3_TOLERANCE};
pub use spin::{best_spin, spin_game_trace, spin_reward, Grid, SpinGameTrace, SpinStage, DOWN, UP};
pub use suite::{
    deviation_suite, smoothness_suite, summarize, write_deviation_csv, write_smoothness_csv, write_spin_csv, DeviationRow,
    SmoothnessRow, SuiteSummary,
};
