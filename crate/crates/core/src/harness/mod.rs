//! Episode loop, self-play training and frozen-policy faceoffs.

mod episode;
mod faceoff;
mod features;
mod report;
mod train;
mod types;

pub use episode::{check_models, required_types, run_episode, EpisodeOutcome};
pub use faceoff::{faceoff, seating, winners, Contestant, FaceoffResult, FaceoffSpec, GameRecord, Lineup, FACEOFF_BETA};
pub use features::{Featurizer, LOCAL_RANGE};
pub(crate) use report::writer;
pub use report::{
    write_faceoff_csv, write_faceoff_summary_csv, write_metrics_csv, write_purity_csv, write_type_log_csv,
};
pub use train::{fresh_models, train, train_with, EpisodeMetrics, GroupMetrics, TrainRun, TrainSpec};
pub use types::{group_roles, TypeLogRow, TypeSettings, TypeState};
