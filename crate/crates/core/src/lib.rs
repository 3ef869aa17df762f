//! Multi-type mean field Q-learning on a gridworld: the simulator, the
//! learners, type inference, training and tournaments, and numerical checks
//! of the approximation bounds.
//!
//! Learning code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod harness;
pub mod learning;
pub mod scalar;
pub mod scenario;
pub mod seeds;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type QModelF64 = learning::QModel<f64>;
pub type QModelF32 = learning::QModel<f32>;
pub type ReplayBufferF64 = learning::ReplayBuffer<f64>;
pub type ReplayBufferF32 = learning::ReplayBuffer<f32>;
pub type HyperparamsF64 = learning::Hyperparams<f64>;
pub type HyperparamsF32 = learning::Hyperparams<f32>;
pub type TrainSpecF64 = harness::TrainSpec<f64>;
pub type TrainSpecF32 = harness::TrainSpec<f32>;
pub type TrainRunF64 = harness::TrainRun<f64>;
pub type TrainRunF32 = harness::TrainRun<f32>;
pub type ContestantF64 = harness::Contestant<f64>;
pub type FaceoffSpecF64 = harness::FaceoffSpec<f64>;
pub type TypeAssignmentF64 = types::TypeAssignment<f64>;
