//! Mean-field Q-learning: models, policies, replay and persistence.

mod hyper;
mod mean_action;
mod model;
mod persist;
mod policy;
mod replay;

pub use hyper::{BetaSchedule, Hyperparams};
pub use mean_action::{mean_actions, MeanAction};
pub use model::{td_target, Algorithm, FeatureLayout, QModel, ReplayEntry};
pub use persist::{load_model, read_model, save_model, write_model};
pub use policy::{boltzmann_policy, expected_value, sample_index};
pub use replay::ReplayBuffer;
