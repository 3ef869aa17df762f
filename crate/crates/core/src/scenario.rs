//! Scenario parameters for the three battle games.
//!
//! The builders return the full-scale games (72 agents per team, or 45
//! predators and 90 prey per group, 500-step episodes). [`ScenarioConfig::desk_scale`]
//! shrinks the populations and horizon for single-machine runs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether agent types are handed to the learners or must be inferred.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeMode {
    KnownTypes,
    UnknownTypes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoodConfig {
    pub count: usize,
    pub hp: f64,
    pub collect_reward: f64,
    pub hit_reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub max_hp: f64,
    pub damage: f64,
    pub speed: f64,
    pub attack_range: u32,
    pub step_recovery: f64,
    pub move_penalty: f64,
    pub dead_penalty: f64,
    pub attack_empty_penalty: f64,
    /// Charged for every attack action, hit or miss.
    pub attack_penalty: f64,
    /// Reward for hitting a member of each group, indexed by target group.
    pub attack_reward: Vec<f64>,
    /// Reward for taking part in a kill, indexed by victim group.
    pub kill_reward: Vec<f64>,
    pub initial_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub max_steps: u64,
    pub mode: TypeMode,
    /// Attack receivers are charged the attacker's attack reward.
    pub receiver_punishment: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub food: Option<FoodConfig>,
    pub groups: Vec<GroupConfig>,
}

impl ScenarioConfig {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn total_agents(&self) -> usize {
        self.groups.iter().map(|g| g.initial_count).sum()
    }

    pub fn group(&self, g: usize) -> Result<&GroupConfig> {
        self.groups.get(g).ok_or(Error::InvalidGroup(g))
    }

    /// Desk-scale populations and horizon: 16 agents per team in the battle
    /// games, 12 predators and 24 prey per group, 150-step episodes.
    pub fn desk_scale(mut self) -> Self {
        let has_prey = self.groups.iter().any(|g| g.attack_range == 0);
        for g in &mut self.groups {
            g.initial_count = match (has_prey, g.attack_range == 0) {
                (false, _) => 16,
                (true, false) => 12,
                (true, true) => 24,
            };
        }
        self.max_steps = 150;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.groups.len();
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "scenario needs at least 2 groups, got {n}"
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("grid has zero cells".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        for (gi, g) in self.groups.iter().enumerate() {
            let scalars = [
                g.max_hp,
                g.damage,
                g.speed,
                g.step_recovery,
                g.move_penalty,
                g.dead_penalty,
                g.attack_empty_penalty,
                g.attack_penalty,
            ];
            if scalars.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(format!("group {gi}: non-finite stat")));
            }
            if !(g.max_hp > 0.0) {
                return Err(Error::InvalidConfig(format!("group {gi}: max_hp must be > 0")));
            }
            if g.speed < 0.0 || g.damage < 0.0 || g.step_recovery < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "group {gi}: speed, damage and recovery must be >= 0"
                )));
            }
            if g.initial_count == 0 {
                return Err(Error::InvalidConfig(format!(
                    "group {gi}: initial_count must be >= 1"
                )));
            }
            for (table, name) in [(&g.attack_reward, "attack_reward"), (&g.kill_reward, "kill_reward")] {
                if table.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "group {gi}: {name} has {} entries for {n} groups",
                        table.len()
                    )));
                }
                if table.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidConfig(format!("group {gi}: non-finite {name}")));
                }
                if table[gi] != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "group {gi}: {name} diagonal must be zero"
                    )));
                }
            }
        }
        if let Some(f) = &self.food {
            if !(f.hp > 0.0) || !f.collect_reward.is_finite() || !f.hit_reward.is_finite() {
                return Err(Error::InvalidConfig("food stats must be finite, hp > 0".into()));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Looks up a builder by name (`multi_battle`, `battle_gathering`, `predator_prey`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "multi_battle" => Some(multi_battle_config()),
            "battle_gathering" => Some(battle_gathering_config()),
            "predator_prey" => Some(predator_prey_config()),
            _ => None,
        }
    }
}

const BATTLE_GROUPS: [&str; 4] = ["A", "B", "C", "D"];

/// Four teams with cyclic preferences: each team earns 0.2/0.3/0.4 for hitting
/// and 80/90/100 for killing the next three teams in cyclic order, so A
/// favours D, B favours A, C favours B and D favours C.
pub fn multi_battle_config() -> ScenarioConfig {
    const ATTACK: [f64; 3] = [0.2, 0.3, 0.4];
    const KILL: [f64; 3] = [80.0, 90.0, 100.0];
    let groups = (0..4)
        .map(|g| {
            let mut attack_reward = vec![0.0; 4];
            let mut kill_reward = vec![0.0; 4];
            for k in 1..4 {
                let target = (g + k) % 4;
                attack_reward[target] = ATTACK[k - 1];
                kill_reward[target] = KILL[k - 1];
            }
            GroupConfig {
                name: BATTLE_GROUPS[g].to_string(),
                max_hp: 10.0,
                damage: 2.0,
                speed: 1.0,
                attack_range: 1,
                step_recovery: 0.1,
                move_penalty: -0.01,
                dead_penalty: -1.0,
                attack_empty_penalty: -0.1,
                attack_penalty: 0.0,
                attack_reward,
                kill_reward,
                initial_count: 72,
            }
        })
        .collect();
    ScenarioConfig {
        name: "multi_battle".into(),
        width: 40,
        height: 40,
        max_steps: 500,
        mode: TypeMode::KnownTypes,
        receiver_punishment: false,
        food: None,
        groups,
    }
}

/// Multi battle plus stationary food: +0.5 per hit on food, +80 for the capture.
pub fn battle_gathering_config() -> ScenarioConfig {
    ScenarioConfig {
        name: "battle_gathering".into(),
        food: Some(FoodConfig {
            count: 64,
            hp: 4.0,
            collect_reward: 80.0,
            hit_reward: 0.5,
        }),
        ..multi_battle_config()
    }
}

/// Two predator groups (A, B) and two prey groups (C, D). Types are not
/// revealed to the learners.
pub fn predator_prey_config() -> ScenarioConfig {
    let predator = |name: &str, attack_reward: Vec<f64>| GroupConfig {
        name: name.into(),
        max_hp: 10.0,
        damage: 2.0,
        speed: 2.0,
        attack_range: 2,
        step_recovery: 0.1,
        move_penalty: 0.0,
        dead_penalty: -0.1,
        attack_empty_penalty: 0.0,
        attack_penalty: -0.2,
        attack_reward,
        kill_reward: vec![],
        initial_count: 45,
    };
    let prey = |name: &str| GroupConfig {
        name: name.into(),
        max_hp: 10.0,
        damage: 0.0,
        speed: 2.5,
        attack_range: 0,
        step_recovery: 0.1,
        move_penalty: 0.0,
        dead_penalty: -0.1,
        attack_empty_penalty: 0.0,
        attack_penalty: 0.0,
        attack_reward: vec![0.0; 4],
        kill_reward: vec![],
        initial_count: 90,
    };
    let mut groups = vec![
        predator("A", vec![0.0, 0.5, 1.0, 3.0]),
        predator("B", vec![0.5, 0.0, 3.0, 1.0]),
        prey("C"),
        prey("D"),
    ];
    for (g, cfg) in groups.iter_mut().enumerate() {
        cfg.kill_reward = (0..4).map(|t| if t == g { 0.0 } else { 5.0 }).collect();
    }
    ScenarioConfig {
        name: "predator_prey".into(),
        width: 50,
        height: 50,
        max_steps: 500,
        mode: TypeMode::UnknownTypes,
        receiver_punishment: true,
        food: None,
        groups,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;

    #[test]
    fn multi_battle_favourite_opponents() {
        let cfg = multi_battle_config();
        assert_eq!(cfg.groups[A].attack_reward[D], 0.4);
        assert_eq!(cfg.groups[A].kill_reward[D], 100.0);
        assert_eq!(cfg.groups[B].kill_reward[A], 100.0);
        assert_eq!(cfg.groups[C].kill_reward[B], 100.0);
        assert_eq!(cfg.groups[D].kill_reward[C], 100.0);
        // spelled-out order for A: B, C, D
        assert_eq!(cfg.groups[A].attack_reward, vec![0.0, 0.2, 0.3, 0.4]);
        assert_eq!(cfg.groups[A].kill_reward, vec![0.0, 80.0, 90.0, 100.0]);
        // D: A, B, C
        assert_eq!(cfg.groups[D].attack_reward, vec![0.2, 0.3, 0.4, 0.0]);
        for g in 0..4 {
            assert_eq!(cfg.groups[g].attack_reward[g], 0.0);
            assert_eq!(cfg.groups[g].kill_reward[g], 0.0);
        }
    }

    #[test]
    fn multi_battle_rows_are_permutations() {
        let cfg = multi_battle_config();
        for (g, group) in cfg.groups.iter().enumerate() {
            let mut atk: Vec<f64> = (0..4).filter(|&t| t != g).map(|t| group.attack_reward[t]).collect();
            let mut kill: Vec<f64> = (0..4).filter(|&t| t != g).map(|t| group.kill_reward[t]).collect();
            atk.sort_by(f64::total_cmp);
            kill.sort_by(f64::total_cmp);
            assert_eq!(atk, vec![0.2, 0.3, 0.4]);
            assert_eq!(kill, vec![80.0, 90.0, 100.0]);
        }
    }

    #[test]
    fn multi_battle_stats() {
        let cfg = multi_battle_config();
        cfg.validate().unwrap();
        for g in &cfg.groups {
            assert_eq!(g.max_hp, 10.0);
            assert_eq!(g.damage, 2.0);
            assert_eq!(g.step_recovery, 0.1);
            assert_eq!(g.move_penalty, -0.01);
            assert_eq!(g.dead_penalty, -1.0);
            assert_eq!(g.attack_empty_penalty, -0.1);
        }
    }

    #[test]
    fn gathering_adds_food_only() {
        let bg = battle_gathering_config();
        let mb = multi_battle_config();
        let food = bg.food.as_ref().unwrap();
        assert_eq!(food.collect_reward, 80.0);
        assert_eq!(food.hit_reward, 0.5);
        assert_eq!(bg.groups, mb.groups);
        bg.validate().unwrap();
    }

    #[test]
    fn predator_prey_tables() {
        let cfg = predator_prey_config();
        cfg.validate().unwrap();
        assert_eq!(cfg.groups[A].attack_reward[D], 3.0);
        assert_eq!(cfg.groups[A].attack_reward[C], 1.0);
        assert_eq!(cfg.groups[A].attack_reward[B], 0.5);
        assert_eq!(cfg.groups[B].attack_reward[C], 3.0);
        assert_eq!(cfg.groups[B].attack_reward[D], 1.0);
        assert_eq!(cfg.groups[B].attack_reward[A], 0.5);
        for g in 0..4 {
            for t in 0..4 {
                let expect = if g == t { 0.0 } else { 5.0 };
                assert_eq!(cfg.groups[g].kill_reward[t], expect);
            }
        }
        assert_eq!(cfg.groups[C].attack_range, 0);
        assert_eq!(cfg.groups[D].attack_range, 0);
        assert_eq!(cfg.groups[C].speed, 2.5);
        assert_eq!(cfg.groups[A].speed, 2.0);
        assert_eq!(cfg.groups[A].attack_range, 2);
        assert_eq!(cfg.groups[A].attack_penalty, -0.2);
        assert_eq!(cfg.groups[A].dead_penalty, -0.1);
        let counts: Vec<_> = cfg.groups.iter().map(|g| g.initial_count).collect();
        assert_eq!(counts, vec![45, 45, 90, 90]);
        assert_eq!(cfg.mode, TypeMode::UnknownTypes);
        assert!(cfg.receiver_punishment);
    }

    #[test]
    fn desk_scale_counts() {
        let pp = predator_prey_config().desk_scale();
        let counts: Vec<_> = pp.groups.iter().map(|g| g.initial_count).collect();
        assert_eq!(counts, vec![12, 12, 24, 24]);
        let mb = multi_battle_config().desk_scale();
        assert!(mb.groups.iter().all(|g| g.initial_count == 16));
        assert_eq!(mb.max_steps, 150);
    }

    #[test]
    fn toml_round_trip() {
        for cfg in [multi_battle_config(), battle_gathering_config(), predator_prey_config()] {
            let text = cfg.to_toml().unwrap();
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn rejects_nonzero_diagonal_and_unknown_keys() {
        let mut cfg = multi_battle_config();
        cfg.groups[1].kill_reward[1] = 3.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));

        let text = multi_battle_config().to_toml().unwrap().replacen("max_steps", "max_stepz", 1);
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_single_group() {
        let mut cfg = multi_battle_config();
        cfg.groups.truncate(1);
        assert!(cfg.validate().is_err());
    }
}
