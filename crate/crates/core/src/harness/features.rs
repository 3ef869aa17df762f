//! Learner-side features built from the engine's observation.
//!
//! Groups appear in egocentric order — the agent's own group first, then the
//! following groups cyclically — so a model means the same thing in any seat.
//!
//! The raw sector counts grow with crowd size, so they are squashed to
//! `c / (1 + c)`. On top of that come occupancy indicators for every cell
//! within [`LOCAL_RANGE`], one channel per group plus one for food — the
//! information an attack action actually depends on, down to which team a
//! target belongs to — and a constant bias.

use crate::engine::{observation_len, observe, AgentId, Cell, World, SECTORS};
use crate::error::Result;
use crate::scalar::Scalar;

pub const LOCAL_RANGE: i64 = 2;
const LOCAL_CELLS: usize = ((2 * LOCAL_RANGE + 1) * (2 * LOCAL_RANGE + 1) - 1) as usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Featurizer {
    pub radius: usize,
    pub num_groups: usize,
}

impl Featurizer {
    pub fn new(radius: usize, num_groups: usize) -> Self {
        Self { radius, num_groups }
    }

    pub fn len(&self) -> usize {
        observation_len(self.num_groups) + self.channels() * LOCAL_CELLS + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn channels(&self) -> usize {
        self.num_groups + 1
    }

    pub fn features<S: Scalar>(&self, world: &World, id: AgentId) -> Result<Vec<S>> {
        let obs = observe(world, id, self.radius)?;
        let raw = obs.as_slice();
        let me = world.agent(id)?;
        let squash = |c: f64| S::lit(c / (1.0 + c));
        let groups = self.num_groups;
        let counted = groups * SECTORS;
        let mut out = Vec::with_capacity(self.len());
        for j in 0..groups {
            let g = (me.group + j) % groups;
            out.extend(raw[g * SECTORS..(g + 1) * SECTORS].iter().map(|&c| squash(c)));
        }
        out.push(squash(raw[counted]));
        out.extend(raw[counted + 1..].iter().map(|&x| S::lit(x)));

        let base = out.len();
        out.resize(base + self.channels() * LOCAL_CELLS, S::zero());
        let (x, y) = (me.pos.0 as i64, me.pos.1 as i64);
        let mut k = 0;
        for dy in -LOCAL_RANGE..=LOCAL_RANGE {
            for dx in -LOCAL_RANGE..=LOCAL_RANGE {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (cx, cy) = (x + dx, y + dy);
                if cx >= 0 && cy >= 0 && (cx as usize) < world.width() && (cy as usize) < world.height() {
                    let slot = match world.cell(cx as usize, cy as usize) {
                        Cell::Agent(other) => Some((world.agents()[other].group + groups - me.group) % groups),
                        Cell::Food(_) => Some(self.num_groups),
                        Cell::Empty => None,
                    };
                    if let Some(s) = slot {
                        out[base + s * LOCAL_CELLS + k] = S::one();
                    }
                }
                k += 1;
            }
        }
        out.push(S::one());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::multi_battle_config;

    #[test]
    fn layout_and_local_cells() {
        let mut cfg = multi_battle_config();
        cfg.width = 10;
        cfg.height = 10;
        // agent 0 of group 0 at (5,5); a group-1 enemy directly east, a
        // group-3 enemy diagonally south-west, an ally two cells north
        let world = World::from_layout(cfg, &[(0, (5, 5)), (1, (6, 5)), (0, (5, 3)), (3, (4, 6))], &[], 1).unwrap();
        let f = Featurizer::new(6, 4);
        let x: Vec<f64> = f.features(&world, 0).unwrap();
        assert_eq!(x.len(), f.len());
        assert_eq!(*x.last().unwrap(), 1.0);
        let base = observation_len(4);
        // offset (1, 0) is index 12 in the row-major ring, (0, -2) is index 2
        // and (-1, 1) is index 15
        let channel = |c: usize| -> Vec<usize> { (0..LOCAL_CELLS).filter(|&k| x[base + c * LOCAL_CELLS + k] == 1.0).collect() };
        assert_eq!(channel(0), vec![2]);
        assert_eq!(channel(1), vec![12]);
        assert_eq!(channel(2), Vec::<usize>::new());
        assert_eq!(channel(3), vec![15]);
        assert_eq!(channel(4), Vec::<usize>::new());
        // one enemy in the east sector, squashed to 1/2
        assert_eq!(x[SECTORS], 0.5);
        assert!(x.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
    }

    #[test]
    fn groups_are_ordered_from_the_agent() {
        let mut cfg = multi_battle_config();
        cfg.width = 10;
        cfg.height = 10;
        // agent 0 (group 2) sees group 3 east and group 0 north
        let world = World::from_layout(cfg, &[(2, (5, 5)), (3, (6, 5)), (0, (5, 4))], &[], 1).unwrap();
        let f = Featurizer::new(6, 4);
        let x: Vec<f64> = f.features(&world, 0).unwrap();
        let base = observation_len(4);
        let channel = |c: usize| -> Vec<usize> { (0..LOCAL_CELLS).filter(|&k| x[base + c * LOCAL_CELLS + k] == 1.0).collect() };
        // group 3 is one step ahead of group 2, group 0 two steps
        assert_eq!(channel(1), vec![12]);
        assert_eq!(channel(2), vec![7]);
        assert!(channel(0).is_empty() && channel(3).is_empty());
        let sector_block = |j: usize| x[j * SECTORS..(j + 1) * SECTORS].iter().sum::<f64>();
        assert_eq!([sector_block(0), sector_block(1), sector_block(2), sector_block(3)], [0.0, 0.5, 0.5, 0.0]);
    }
}
