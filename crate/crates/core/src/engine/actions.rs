//! Discrete action sets.
//!
//! A group's actions are ordered: idle, then moves, then attacks, both in
//! row-major offset order (`dy` outer, `dx` inner). Moves are the nonzero
//! integer offsets with Euclidean norm at most the group speed; attacks are the
//! nonzero offsets with Chebyshev norm at most the attack range.
//!
//! Mean actions need a common coordinate system across groups whose action
//! sets differ (predators cannot make the prey's long moves, prey cannot
//! attack). [`ActionVocabulary`] is the union of every group's set in the same
//! ordering, and each group's local indices map monotonically into it.

use crate::error::Result;
use crate::scenario::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Idle,
    Move { dx: i32, dy: i32 },
    Attack { dx: i32, dy: i32 },
}

impl ActionKind {
    pub fn is_move(self) -> bool {
        matches!(self, ActionKind::Move { .. })
    }

    pub fn is_attack(self) -> bool {
        matches!(self, ActionKind::Attack { .. })
    }
}

/// An action as seen by one group: its index in the group's ordered set plus
/// what it does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ActionId {
    pub index: usize,
    pub kind: ActionKind,
}

fn move_offsets(speed: f64) -> Vec<(i32, i32)> {
    let r = speed.max(0.0).floor() as i32;
    let limit = speed * speed;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx, dy) != (0, 0) && f64::from(dx * dx + dy * dy) <= limit {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn attack_offsets(range: u32) -> Vec<(i32, i32)> {
    let r = range as i32;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx, dy) != (0, 0) {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// The ordered action set of one group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSet {
    kinds: Vec<ActionKind>,
}

impl ActionSet {
    pub fn new(speed: f64, attack_range: u32) -> Self {
        let mut kinds = vec![ActionKind::Idle];
        kinds.extend(move_offsets(speed).into_iter().map(|(dx, dy)| ActionKind::Move { dx, dy }));
        kinds.extend(attack_offsets(attack_range).into_iter().map(|(dx, dy)| ActionKind::Attack { dx, dy }));
        Self { kinds }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, index: usize) -> Option<ActionKind> {
        self.kinds.get(index).copied()
    }

    pub fn kinds(&self) -> &[ActionKind] {
        &self.kinds
    }

    pub fn ids(&self) -> Vec<ActionId> {
        self.kinds
            .iter()
            .enumerate()
            .map(|(index, &kind)| ActionId { index, kind })
            .collect()
    }

    pub fn position(&self, kind: ActionKind) -> Option<usize> {
        self.kinds.iter().position(|&k| k == kind)
    }
}

/// The ordered action set of `group` in `config`.
pub fn legal_actions(config: &ScenarioConfig, group: usize) -> Result<Vec<ActionId>> {
    let g = config.group(group)?;
    Ok(ActionSet::new(g.speed, g.attack_range).ids())
}

/// Sort key reproducing the set ordering: idle, moves, attacks, each row-major.
fn canonical_key(kind: ActionKind) -> (u8, i32, i32) {
    match kind {
        ActionKind::Idle => (0, 0, 0),
        ActionKind::Move { dx, dy } => (1, dy, dx),
        ActionKind::Attack { dx, dy } => (2, dy, dx),
    }
}

/// Union of all groups' action sets with per-group index maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionVocabulary {
    kinds: Vec<ActionKind>,
    local_to_global: Vec<Vec<usize>>,
}

impl ActionVocabulary {
    pub fn new(sets: &[ActionSet]) -> Self {
        let mut kinds: Vec<ActionKind> = sets.iter().flat_map(|s| s.kinds.iter().copied()).collect();
        kinds.sort_by_key(|k| canonical_key(*k));
        kinds.dedup();
        let local_to_global = sets
            .iter()
            .map(|s| {
                s.kinds
                    .iter()
                    .map(|k| kinds.iter().position(|v| v == k).expect("kind is in the union"))
                    .collect()
            })
            .collect();
        Self { kinds, local_to_global }
    }

    pub fn for_scenario(config: &ScenarioConfig) -> Self {
        let sets: Vec<ActionSet> = config
            .groups
            .iter()
            .map(|g| ActionSet::new(g.speed, g.attack_range))
            .collect();
        Self::new(&sets)
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kinds(&self) -> &[ActionKind] {
        &self.kinds
    }

    /// Global index of `group`'s local action `local`.
    pub fn global(&self, group: usize, local: usize) -> usize {
        self.local_to_global[group][local]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::scenario::{multi_battle_config, predator_prey_config};

    fn brute_force_count(speed: f64, range: u32) -> usize {
        // enumerate a generous box and count by definition
        let mut moves = 0;
        let mut attacks = 0;
        for dy in -10..=10i32 {
            for dx in -10..=10i32 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                if ((dx * dx + dy * dy) as f64).sqrt() <= speed {
                    moves += 1;
                }
                if dx.abs().max(dy.abs()) as u32 <= range {
                    attacks += 1;
                }
            }
        }
        1 + moves + attacks
    }

    #[test]
    fn battle_group_has_thirteen_actions() {
        let set = ActionSet::new(1.0, 1);
        assert_eq!(set.len(), 1 + 4 + 8);
        assert_eq!(set.len(), brute_force_count(1.0, 1));
        assert_eq!(set.kind(0), Some(ActionKind::Idle));
        assert_eq!(set.kind(1), Some(ActionKind::Move { dx: 0, dy: -1 }));
        assert_eq!(set.kind(2), Some(ActionKind::Move { dx: -1, dy: 0 }));
        assert_eq!(set.kind(5), Some(ActionKind::Attack { dx: -1, dy: -1 }));
    }

    #[test]
    fn counts_match_enumeration() {
        for &(speed, range) in &[(0.0, 0), (1.0, 0), (2.0, 2), (2.5, 0), (1.5, 3), (3.0, 1)] {
            assert_eq!(ActionSet::new(speed, range).len(), brute_force_count(speed, range));
        }
    }

    #[test]
    fn prey_cannot_attack() {
        let cfg = predator_prey_config();
        let prey = legal_actions(&cfg, 2).unwrap();
        assert!(prey.iter().all(|a| !a.kind.is_attack()));
        assert_eq!(prey.len(), 21);
        let predator = legal_actions(&cfg, 0).unwrap();
        assert_eq!(predator.len(), 1 + 12 + 24);
    }

    #[test]
    fn idle_only() {
        let set = ActionSet::new(0.0, 0);
        assert_eq!(set.kinds(), &[ActionKind::Idle]);
    }

    #[test]
    fn invalid_group() {
        assert!(matches!(legal_actions(&multi_battle_config(), 9), Err(Error::InvalidGroup(9))));
    }

    #[test]
    fn ordering_is_row_major() {
        let set = ActionSet::new(2.0, 2);
        let moves: Vec<_> = set
            .kinds()
            .iter()
            .filter_map(|k| match *k {
                ActionKind::Move { dx, dy } => Some((dy, dx)),
                _ => None,
            })
            .collect();
        let mut sorted = moves.clone();
        sorted.sort();
        assert_eq!(moves, sorted);
    }

    #[test]
    fn vocabulary_is_union() {
        let vocab = ActionVocabulary::for_scenario(&predator_prey_config());
        // idle + 20 prey moves + 24 predator attacks
        assert_eq!(vocab.len(), 45);
        let pred = ActionSet::new(2.0, 2);
        let prey = ActionSet::new(2.5, 0);
        for (i, k) in pred.kinds().iter().enumerate() {
            assert_eq!(vocab.kinds()[vocab.global(0, i)], *k);
        }
        for (i, k) in prey.kinds().iter().enumerate() {
            assert_eq!(vocab.kinds()[vocab.global(2, i)], *k);
        }
        let mb = ActionVocabulary::for_scenario(&multi_battle_config());
        assert_eq!(mb.len(), 13);
        assert!((0..13).all(|i| mb.global(3, i) == i));
    }
}
