//! Type inference state carried through unknown-type play.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{AgentId, World};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::ScenarioConfig;
use crate::seeds::{derive_seed, rng_for, SeedRole};
use crate::types::{kmeans, purity, relabel, ActionHistoryBuffer, TypeAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TypeSettings {
    /// Number of types M the learners are told to expect.
    pub num_types: usize,
    /// Actions remembered per agent (C).
    pub history: usize,
    /// Steps between re-clusterings; 1 clusters every step.
    pub stride: u64,
    pub restarts: usize,
}

impl Default for TypeSettings {
    fn default() -> Self {
        Self {
            num_types: 2,
            history: 20,
            stride: 5,
            restarts: 2,
        }
    }
}

impl TypeSettings {
    pub fn validate(&self) -> Result<()> {
        if self.num_types == 0 || self.history == 0 || self.stride == 0 {
            return Err(Error::InvalidConfig("types, history and stride must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the assignment log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeLogRow {
    pub episode: usize,
    pub step: u64,
    pub agent: AgentId,
    pub label: usize,
}

/// Role of every group for purity scoring: groups with identical movement
/// and attack capabilities share a role (predators vs prey).
pub fn group_roles(config: &ScenarioConfig) -> Vec<usize> {
    let mut signatures: Vec<(u64, u32)> = Vec::new();
    config
        .groups
        .iter()
        .map(|g| {
            let sig = (g.speed.to_bits(), g.attack_range);
            signatures.iter().position(|&s| s == sig).unwrap_or_else(|| {
                signatures.push(sig);
                signatures.len() - 1
            })
        })
        .collect()
}

/// Action histories, current labels and clustering bookkeeping. Histories and
/// labels persist across episodes.
#[derive(Clone, Debug)]
pub struct TypeState<S> {
    settings: TypeSettings,
    history: ActionHistoryBuffer,
    labels: Vec<usize>,
    centroids: Vec<Vec<S>>,
    /// Role of each group.
    roles: Vec<usize>,
    seed: u64,
    clusterings: u64,
    episode: usize,
    purity_samples: Vec<f64>,
    log: Option<Vec<TypeLogRow>>,
}

impl<S: Scalar> TypeState<S> {
    /// Random initial labels drawn from the seed.
    pub fn new(config: &ScenarioConfig, action_count: usize, settings: TypeSettings, seed: u64, log: bool) -> Result<Self> {
        settings.validate()?;
        let n = config.total_agents();
        let mut rng = rng_for(seed, SeedRole::TypeInit, 0);
        let labels = (0..n).map(|_| rng.gen_range(0..settings.num_types)).collect();
        Ok(Self {
            settings,
            history: ActionHistoryBuffer::new(n, settings.history, action_count)?,
            labels,
            centroids: vec![vec![S::one() / S::from_count(action_count); action_count]; settings.num_types],
            roles: group_roles(config),
            seed,
            clusterings: 0,
            episode: 0,
            purity_samples: Vec::new(),
            log: log.then(Vec::new),
        })
    }

    pub fn settings(&self) -> &TypeSettings {
        &self.settings
    }

    pub fn num_types(&self) -> usize {
        self.settings.num_types
    }

    /// Current label of every agent id.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn history(&self) -> &ActionHistoryBuffer {
        &self.history
    }

    pub fn record(&mut self, agent: AgentId, global_action: usize) -> Result<()> {
        self.history.record_action(agent, global_action)
    }

    pub(crate) fn begin_episode(&mut self, episode: usize) {
        self.episode = episode;
        self.purity_samples.clear();
    }

    /// Mean purity over this episode's clusterings, if any happened.
    pub(crate) fn episode_purity(&self) -> Option<f64> {
        (!self.purity_samples.is_empty())
            .then(|| self.purity_samples.iter().sum::<f64>() / self.purity_samples.len() as f64)
    }

    pub(crate) fn take_log(&mut self) -> Vec<TypeLogRow> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub(crate) fn due(&self, step: u64) -> bool {
        step % self.settings.stride == 0
    }

    /// Clusters the alive agents' action frequencies and relabels to stay
    /// consistent with the current labels.
    pub fn recluster(&mut self, world: &World) -> Result<()> {
        let alive: Vec<AgentId> = world.alive_ids().collect();
        if alive.is_empty() {
            return Ok(());
        }
        let vectors = alive
            .iter()
            .map(|&a| self.history.action_frequency::<S>(a))
            .collect::<Result<Vec<_>>>()?;
        let seed = derive_seed(self.seed, SeedRole::Clustering, self.clusterings);
        self.clusterings += 1;
        let fit = kmeans(&vectors, self.settings.num_types, seed, self.settings.restarts)?;
        let fresh = TypeAssignment::from_fit(&alive, &fit)?;
        let previous = TypeAssignment::new(alive.iter().map(|&a| (a, self.labels[a])).collect(), self.centroids.clone())?;
        let assignment = relabel(&fresh, &previous)?;
        for (&a, &l) in assignment.labels() {
            self.labels[a] = l;
        }
        self.centroids = assignment.centroids().to_vec();
        let agents = world.agents();
        self.purity_samples.push(purity(&assignment, |a| self.roles[agents[a].group]));
        if let Some(log) = self.log.as_mut() {
            log.extend(assignment.labels().iter().map(|(&agent, &label)| TypeLogRow {
                episode: self.episode,
                step: world.step_index(),
                agent,
                label,
            }));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{multi_battle_config, predator_prey_config};

    #[test]
    fn roles_split_predators_from_prey() {
        assert_eq!(group_roles(&predator_prey_config()), vec![0, 0, 1, 1]);
        assert_eq!(group_roles(&multi_battle_config()), vec![0, 0, 0, 0]);
    }

    #[test]
    fn initial_labels_are_seeded() {
        let cfg = predator_prey_config().desk_scale();
        let a = TypeState::<f64>::new(&cfg, 45, TypeSettings::default(), 3, false).unwrap();
        let b = TypeState::<f64>::new(&cfg, 45, TypeSettings::default(), 3, false).unwrap();
        assert_eq!(a.labels(), b.labels());
        assert_eq!(a.labels().len(), cfg.total_agents());
        assert!(a.labels().iter().all(|&l| l < 2));
    }
}
