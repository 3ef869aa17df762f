use std::sync::Arc;

use super::episode::{required_types, run_episode};
use super::features::Featurizer;
use super::types::{TypeLogRow, TypeSettings, TypeState};
use crate::engine::{ActionSet, ActionVocabulary, Event, World};
use crate::error::{Error, Result};
use crate::learning::{Algorithm, Hyperparams, QModel, ReplayBuffer};
use crate::scalar::Scalar;
use crate::scenario::{ScenarioConfig, TypeMode};
use crate::seeds::{derive_seed, rng_for, SeedRole};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSpec<S> {
    pub scenario: ScenarioConfig,
    /// Learning algorithm of each group.
    pub algorithms: Vec<Algorithm>,
    pub hyper: Hyperparams<S>,
    pub episodes: usize,
    pub seed: u64,
    /// Used when the scenario's types are unknown.
    pub types: TypeSettings,
    pub log_types: bool,
    /// Keep the events of the final episode.
    pub record_events: bool,
}

impl<S: Scalar> TrainSpec<S> {
    /// Self-play: every group learns with `algorithm`.
    pub fn self_play(scenario: ScenarioConfig, algorithm: Algorithm, episodes: usize, seed: u64) -> Self {
        let algorithms = vec![algorithm; scenario.num_groups()];
        Self {
            scenario,
            algorithms,
            hyper: Hyperparams::default(),
            episodes,
            seed,
            types: TypeSettings::default(),
            log_types: false,
            record_events: false,
        }
    }

    pub fn inferred_types(&self) -> Option<usize> {
        (self.scenario.mode == TypeMode::UnknownTypes).then_some(self.types.num_types)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.hyper.validate()?;
        self.types.validate()?;
        if self.episodes == 0 {
            return Err(Error::InvalidConfig("at least one episode is required".into()));
        }
        if self.algorithms.len() != self.scenario.num_groups() {
            return Err(Error::InvalidConfig(format!(
                "{} algorithms for {} groups",
                self.algorithms.len(),
                self.scenario.num_groups()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupMetrics {
    pub reward: f64,
    /// Mean pre-update minibatch loss; `None` while the buffer is too small.
    pub loss: Option<f64>,
    pub alive_at_end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub steps: u64,
    pub groups: Vec<GroupMetrics>,
    pub purity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainRun<S> {
    pub spec: TrainSpec<S>,
    pub metrics: Vec<EpisodeMetrics>,
    pub models: Vec<QModel<S>>,
    pub type_log: Vec<TypeLogRow>,
    pub events: Vec<Event>,
}

/// Zero-initialised models shaped for `config`.
pub fn fresh_models<S: Scalar>(
    config: &ScenarioConfig,
    algorithms: &[Algorithm],
    radius: usize,
    inferred_types: Option<usize>,
) -> Result<Vec<QModel<S>>> {
    let featurizer = Featurizer::new(radius, config.num_groups());
    let vocab = ActionVocabulary::for_scenario(config);
    config
        .groups
        .iter()
        .zip(algorithms)
        .map(|(g, &alg)| {
            let actions = ActionSet::new(g.speed, g.attack_range).len();
            let m = required_types(alg, config.num_groups(), inferred_types);
            QModel::linear(alg, m, actions, featurizer.len(), vocab.len())
        })
        .collect()
}

/// Self-play training. Each episode is played with the current models and
/// appended to the per-group replay buffers; afterwards every group runs one
/// minibatch update per member (batch size K, skipped while the buffer holds
/// fewer than K transitions) followed by one soft target update.
pub fn train<S: Scalar>(spec: TrainSpec<S>) -> Result<TrainRun<S>> {
    train_with(spec, |_| {})
}

/// [`train`] with a callback after each episode, e.g. for progress output.
pub fn train_with<S: Scalar>(spec: TrainSpec<S>, mut on_episode: impl FnMut(&EpisodeMetrics)) -> Result<TrainRun<S>> {
    spec.validate()?;
    let config = Arc::new(spec.scenario.clone());
    let groups = config.num_groups();
    let hyper = &spec.hyper;
    let inferred = spec.inferred_types();
    let featurizer = Featurizer::new(hyper.radius, groups);
    let vocab = ActionVocabulary::for_scenario(&config);
    let mut models = fresh_models::<S>(&config, &spec.algorithms, hyper.radius, inferred)?;
    let mut replay = (0..groups)
        .map(|_| ReplayBuffer::new(hyper.replay_capacity))
        .collect::<Result<Vec<_>>>()?;
    let mut types = inferred
        .map(|_| TypeState::<S>::new(&config, vocab.len(), spec.types, spec.seed, spec.log_types))
        .transpose()?;

    let mut metrics = Vec::with_capacity(spec.episodes);
    let mut type_log = Vec::new();
    let mut events = Vec::new();
    for episode in 0..spec.episodes {
        let beta = hyper.beta.at(episode);
        let mut world = World::reset(Arc::clone(&config), derive_seed(spec.seed, SeedRole::World, episode as u64))?;
        let mut policy_rng = rng_for(spec.seed, SeedRole::Policy, episode as u64);
        if let Some(t) = types.as_mut() {
            t.begin_episode(episode);
        }
        let last = episode + 1 == spec.episodes;
        let outcome = run_episode(
            &mut world,
            &models,
            featurizer,
            &vocab,
            beta,
            &mut policy_rng,
            Some(&mut replay),
            types.as_mut(),
            spec.record_events && last,
        )?;

        let mut replay_rng = rng_for(spec.seed, SeedRole::Replay, episode as u64);
        let mut group_metrics = Vec::with_capacity(groups);
        for g in 0..groups {
            let mut losses = Vec::new();
            for _ in 0..config.groups[g].initial_count {
                if replay[g].len() < hyper.batch_size {
                    break;
                }
                let batch = replay[g].sample(hyper.batch_size, &mut replay_rng)?;
                losses.push(models[g].q_update(&batch, hyper.alpha, hyper.gamma, beta)?.as_f64());
            }
            models[g].soft_update(hyper.tau);
            group_metrics.push(GroupMetrics {
                reward: outcome.rewards[g],
                loss: (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64),
                alive_at_end: outcome.alive_at_end[g],
            });
        }
        let row = EpisodeMetrics {
            episode,
            steps: outcome.steps,
            groups: group_metrics,
            purity: outcome.purity,
        };
        on_episode(&row);
        metrics.push(row);
        if let Some(t) = types.as_mut() {
            type_log.extend(t.take_log());
        }
        if last {
            events = outcome.events;
        }
    }
    Ok(TrainRun {
        spec,
        metrics,
        models,
        type_log,
        events,
    })
}
