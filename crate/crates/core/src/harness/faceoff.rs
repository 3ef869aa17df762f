//! Frozen-policy tournaments.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::episode::run_episode;
use super::features::Featurizer;
use super::train::fresh_models;
use super::types::{TypeSettings, TypeState};
use crate::engine::{ActionVocabulary, World};
use crate::error::{Error, Result};
use crate::learning::{Algorithm, QModel};
use crate::scalar::Scalar;
use crate::scenario::{ScenarioConfig, TypeMode};
use crate::seeds::{derive_seed, rng_for, SeedRole};

/// Inverse temperature used for evaluation: effectively greedy.
pub const FACEOFF_BETA: f64 = 100.0;

/// A named policy able to play one or more group slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Contestant<S> {
    pub name: String,
    /// Either one model per group slot, or a single model used in every slot.
    pub models: Vec<QModel<S>>,
}

impl<S: Scalar> Contestant<S> {
    pub fn new(name: impl Into<String>, models: Vec<QModel<S>>) -> Self {
        Self {
            name: name.into(),
            models,
        }
    }

    /// Zero-weight independent learners: the uniform random policy.
    pub fn frozen_random(config: &ScenarioConfig, radius: usize) -> Result<Self> {
        let algorithms = vec![Algorithm::Il; config.num_groups()];
        Ok(Self::new("random", fresh_models(config, &algorithms, radius, None)?))
    }

    pub fn slot_model(&self, group: usize) -> &QModel<S> {
        if self.models.len() == 1 {
            &self.models[0]
        } else {
            &self.models[group]
        }
    }
}

/// How contestants are seated over the games of a faceoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lineup {
    /// Contestant `g` always plays group `g`.
    Fixed,
    /// Shift every contestant one slot every `games / groups` games, so each
    /// plays every position equally often.
    Cyclic,
    /// Walk through every seating order in equal blocks. With cyclic group
    /// preferences the neighbours a contestant sits between matter as much as
    /// its own slot, and a plain shift never changes them.
    Permutations,
}

impl Lineup {
    pub fn name(self) -> &'static str {
        match self {
            Lineup::Fixed => "fixed",
            Lineup::Cyclic => "cyclic",
            Lineup::Permutations => "permutations",
        }
    }
}

impl fmt::Display for Lineup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lineup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Lineup::Fixed),
            "cyclic" => Ok(Lineup::Cyclic),
            "permutations" => Ok(Lineup::Permutations),
            other => Err(Error::Parse(format!("unknown lineup '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceoffSpec<S> {
    pub scenario: ScenarioConfig,
    /// One contestant per group.
    pub contestants: Vec<Contestant<S>>,
    pub lineup: Lineup,
    pub games: usize,
    pub seed: u64,
    pub radius: usize,
    pub types: TypeSettings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameRecord {
    pub game: usize,
    /// Contestant index playing each group.
    pub lineup: Vec<usize>,
    pub winners: Vec<usize>,
    pub alive: Vec<usize>,
    pub rewards: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceoffResult {
    pub games: usize,
    pub contestants: Vec<String>,
    /// Ties award a win to every leading group.
    pub wins_per_group: Vec<usize>,
    pub wins_per_contestant: Vec<usize>,
    pub mean_reward_per_group: Vec<f64>,
    pub records: Vec<GameRecord>,
}

/// The `index`-th permutation of `0..n` in lexicographic order.
fn nth_permutation(n: usize, mut index: u128) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut factorial: u128 = (1..n as u128).product();
    let mut out = Vec::with_capacity(n);
    for k in (1..=n).rev() {
        let i = (index / factorial) as usize;
        index %= factorial;
        out.push(pool.remove(i));
        if k > 1 {
            factorial /= (k - 1) as u128;
        }
    }
    out
}

/// Contestant index for each group in `game`.
pub fn seating(mode: Lineup, groups: usize, games: usize, game: usize) -> Vec<usize> {
    match mode {
        Lineup::Fixed => (0..groups).collect(),
        Lineup::Cyclic => {
            let block = (games / groups).max(1);
            let shift = (game / block) % groups;
            (0..groups).map(|g| (g + groups - shift) % groups).collect()
        }
        Lineup::Permutations => {
            let count: u128 = (1..=groups as u128).product();
            let index = if games as u128 >= count {
                game as u128 * count / games as u128
            } else {
                game as u128 % count
            };
            nth_permutation(groups, index)
        }
    }
}

/// Groups with the most agents alive.
pub fn winners(alive: &[usize]) -> Vec<usize> {
    let best = alive.iter().copied().max().unwrap_or(0);
    (0..alive.len()).filter(|&g| alive[g] == best).collect()
}

/// Plays `games` episodes with frozen models and greedy-ish policies.
pub fn faceoff<S: Scalar>(spec: &FaceoffSpec<S>) -> Result<FaceoffResult> {
    spec.scenario.validate()?;
    let groups = spec.scenario.num_groups();
    if spec.contestants.len() != groups {
        return Err(Error::InvalidConfig(format!(
            "{} contestants for {groups} groups",
            spec.contestants.len()
        )));
    }
    let config = Arc::new(spec.scenario.clone());
    let featurizer = Featurizer::new(spec.radius, groups);
    let vocab = ActionVocabulary::for_scenario(&config);
    let inferred = (config.mode == TypeMode::UnknownTypes).then_some(spec.types.num_types);

    let mut result = FaceoffResult {
        games: spec.games,
        contestants: spec.contestants.iter().map(|c| c.name.clone()).collect(),
        wins_per_group: vec![0; groups],
        wins_per_contestant: vec![0; groups],
        mean_reward_per_group: vec![0.0; groups],
        records: Vec::with_capacity(spec.games),
    };
    for game in 0..spec.games {
        let seats = seating(spec.lineup, groups, spec.games, game);
        let models: Vec<QModel<S>> = seats
            .iter()
            .enumerate()
            .map(|(g, &c)| spec.contestants[c].slot_model(g).clone())
            .collect();
        let game_seed = derive_seed(spec.seed, SeedRole::Faceoff, game as u64);
        let mut world = World::reset(Arc::clone(&config), derive_seed(game_seed, SeedRole::World, 0))?;
        let mut rng = rng_for(game_seed, SeedRole::Policy, 0);
        let mut types = inferred
            .map(|_| TypeState::<S>::new(&config, vocab.len(), spec.types, game_seed, false))
            .transpose()?;
        let outcome = run_episode(
            &mut world,
            &models,
            featurizer,
            &vocab,
            S::lit(FACEOFF_BETA),
            &mut rng,
            None,
            types.as_mut(),
            false,
        )?;
        let won = winners(&outcome.alive_at_end);
        for &g in &won {
            result.wins_per_group[g] += 1;
            result.wins_per_contestant[seats[g]] += 1;
        }
        for (total, r) in result.mean_reward_per_group.iter_mut().zip(&outcome.rewards) {
            *total += r;
        }
        result.records.push(GameRecord {
            game,
            lineup: seats,
            winners: won,
            alive: outcome.alive_at_end,
            rewards: outcome.rewards,
        });
    }
    if spec.games > 0 {
        for r in &mut result.mean_reward_per_group {
            *r /= spec.games as f64;
        }
    }
    Ok(result)
}
