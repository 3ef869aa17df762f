//! One episode of play, with or without learning.

use std::sync::Arc;

use rand::Rng;

use super::features::Featurizer;
use super::types::TypeState;
use crate::engine::{neighborhood, ActionVocabulary, AgentId, Event, Partition, World};
use crate::error::{Error, Result};
use crate::learning::{Algorithm, FeatureLayout, MeanAction, QModel, ReplayBuffer, ReplayEntry};
use crate::scalar::Scalar;

/// What a group's model gets as mean-action input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MeanSource {
    None,
    Single,
    ByGroup,
    ByType,
}

fn mean_source(algorithm: Algorithm, inferred_types: bool) -> MeanSource {
    match algorithm {
        Algorithm::Il => MeanSource::None,
        Algorithm::Mfq => MeanSource::Single,
        Algorithm::Mtmfq if inferred_types => MeanSource::ByType,
        Algorithm::Mtmfq => MeanSource::ByGroup,
    }
}

/// The mean-action type count a group's model must have.
pub fn required_types(algorithm: Algorithm, num_groups: usize, inferred_types: Option<usize>) -> usize {
    match algorithm {
        Algorithm::Il => 0,
        Algorithm::Mfq => 1,
        Algorithm::Mtmfq => inferred_types.unwrap_or(num_groups),
    }
}

/// Checks that `models` fit the world's groups one to one.
pub fn check_models<S: Scalar>(
    world: &World,
    models: &[QModel<S>],
    featurizer: &Featurizer,
    vocab: &ActionVocabulary,
    inferred_types: Option<usize>,
) -> Result<()> {
    let groups = world.config().num_groups();
    if models.len() != groups {
        return Err(Error::IncompatibleModel(format!("{} models for {groups} groups", models.len())));
    }
    for (g, model) in models.iter().enumerate() {
        let layout = FeatureLayout::Linear {
            obs_dim: featurizer.len(),
            mean_dim: vocab.len(),
        };
        let m = required_types(model.algorithm(), groups, inferred_types);
        model
            .check_compatible(world.action_set(g)?.len(), layout, m)
            .map_err(|e| Error::IncompatibleModel(format!("group {g}: {e}")))?;
    }
    Ok(())
}

/// Totals of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutcome {
    /// Sum of every member's step rewards, per group.
    pub rewards: Vec<f64>,
    pub alive_at_end: Vec<usize>,
    pub steps: u64,
    /// Replay entries written, per group.
    pub transitions: Vec<usize>,
    pub events: Vec<Event>,
    /// Mean clustering purity over the episode (unknown types only).
    pub purity: Option<f64>,
}

/// Per-agent learner inputs at one instant.
struct Inputs<S> {
    obs: Vec<Option<Arc<[S]>>>,
    means: Vec<Option<Arc<[MeanAction<S>]>>>,
}

struct Player<'a> {
    sources: Vec<MeanSource>,
    featurizer: Featurizer,
    vocab: &'a ActionVocabulary,
}

impl Player<'_> {
    fn means<S: Scalar>(
        &self,
        world: &World,
        id: AgentId,
        last_actions: &[Option<usize>],
        types: Option<&TypeState<S>>,
    ) -> Result<Arc<[MeanAction<S>]>> {
        let group = world.agents()[id].group;
        let partition = match self.sources[group] {
            MeanSource::None => return Ok(Arc::from(Vec::new())),
            MeanSource::Single => Partition::Single,
            MeanSource::ByGroup => Partition::ByGroup,
            MeanSource::ByType => {
                let t = types.expect("type-based means need type state");
                Partition::ByType {
                    labels: t.labels(),
                    num_types: t.num_types(),
                }
            }
        };
        let hood = neighborhood(world, id, self.featurizer.radius, partition)?;
        let classes = hood.by_class.len();
        // groups in egocentric order, like the features
        let shift = if self.sources[group] == MeanSource::ByGroup { group } else { 0 };
        (0..classes)
            .map(|j| &hood.by_class[(shift + j) % classes])
            .map(|members| {
                let taken: Vec<usize> = members.iter().filter_map(|&k| last_actions[k]).collect();
                MeanAction::from_actions(&taken, self.vocab.len())
            })
            .collect::<Result<Vec<_>>>()
            .map(Arc::from)
    }

    fn inputs<S: Scalar>(&self, world: &World, last_actions: &[Option<usize>], types: Option<&TypeState<S>>) -> Result<Inputs<S>> {
        let n = world.agents().len();
        let mut inputs = Inputs {
            obs: vec![None; n],
            means: vec![None; n],
        };
        for id in world.alive_ids() {
            inputs.obs[id] = Some(Arc::from(self.featurizer.features::<S>(world, id)?));
            inputs.means[id] = Some(self.means(world, id, last_actions, types)?);
        }
        Ok(inputs)
    }
}

/// Plays `world` to the end. Each step: build features and per-type mean
/// actions from the neighbours' previous actions, sample every agent's action
/// from its group model's Boltzmann policy, step the engine, and (when
/// `replay` is given) store one transition per acting agent. With `types`,
/// actions also feed the history buffer and agents are re-clustered on the
/// configured stride.
///
/// A transition is terminal when its agent died or the episode ended by
/// elimination; hitting the step limit is a truncation and bootstraps.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<S: Scalar, R: Rng>(
    world: &mut World,
    models: &[QModel<S>],
    featurizer: Featurizer,
    vocab: &ActionVocabulary,
    beta: S,
    rng: &mut R,
    mut replay: Option<&mut [ReplayBuffer<S>]>,
    mut types: Option<&mut TypeState<S>>,
    record_events: bool,
) -> Result<EpisodeOutcome> {
    let inferred = types.as_ref().map(|t| t.num_types());
    check_models(world, models, &featurizer, vocab, inferred)?;
    let groups = world.config().num_groups();
    if replay.as_ref().is_some_and(|r| r.len() != groups) {
        return Err(Error::InvalidConfig("one replay buffer per group required".into()));
    }
    let player = Player {
        sources: models.iter().map(|m| mean_source(m.algorithm(), inferred.is_some())).collect(),
        featurizer,
        vocab,
    };

    let n = world.agents().len();
    let mut last_actions: Vec<Option<usize>> = vec![None; n];
    let mut rewards = vec![0.0; groups];
    let mut transitions = vec![0; groups];
    let mut events = Vec::new();
    let mut current = player.inputs(world, &last_actions, types.as_deref())?;

    while !world.is_done() {
        let mut joint = Vec::with_capacity(n);
        for id in world.alive_ids() {
            let group = world.agents()[id].group;
            let obs = current.obs[id].as_ref().expect("alive agents have inputs");
            let means = current.means[id].as_ref().expect("alive agents have inputs");
            joint.push((id, models[group].select_action(obs, means, beta, rng)?));
        }
        let outcome = world.step(&joint)?;
        for &(id, local) in &joint {
            let global = vocab.global(world.agents()[id].group, local);
            last_actions[id] = Some(global);
            if let Some(t) = types.as_deref_mut() {
                t.record(id, global)?;
            }
        }
        if let Some(t) = types.as_deref_mut() {
            if t.due(world.step_index()) {
                t.recluster(world)?;
            }
        }
        let eliminated = world.alive_counts().iter().filter(|&&c| c > 0).count() <= 1;
        let next = player.inputs(world, &last_actions, types.as_deref())?;

        for &(id, action) in &joint {
            let group = world.agents()[id].group;
            let reward = outcome.rewards[id];
            rewards[group] += reward;
            if let Some(buffers) = replay.as_deref_mut() {
                let alive = world.agents()[id].alive;
                let obs = current.obs[id].clone().expect("acting agents have inputs");
                let means = current.means[id].clone().expect("acting agents have inputs");
                let (next_obs, next_means) = match (&next.obs[id], &next.means[id]) {
                    (Some(o), Some(m)) => (o.clone(), m.clone()),
                    _ => (obs.clone(), means.clone()),
                };
                buffers[group].push(ReplayEntry {
                    obs,
                    action,
                    reward: S::lit(reward),
                    next_obs,
                    means,
                    next_means,
                    done: !alive || eliminated,
                });
                transitions[group] += 1;
            }
        }
        if record_events {
            events.extend(outcome.events);
        }
        current = next;
    }

    Ok(EpisodeOutcome {
        rewards,
        alive_at_end: world.alive_counts(),
        steps: world.step_index(),
        transitions,
        events,
        purity: types.and_then(|t| t.episode_purity()),
    })
}
