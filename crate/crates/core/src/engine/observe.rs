//! Local views of the world: fixed-length observation features and
//! neighbourhoods partitioned by group or inferred type.

use std::f64::consts::FRAC_PI_4;

use super::{AgentId, Cell, World};
use crate::error::{Error, Result};

pub const SECTORS: usize = 8;
const HP_LEVELS: usize = 4;

/// Length of the feature vector for a scenario with `num_groups` groups.
pub fn observation_len(num_groups: usize) -> usize {
    num_groups * SECTORS + 1 + HP_LEVELS + 2
}

/// Raw observation of one agent.
///
/// Layout: alive counts per group and angular sector (`group * 8 + sector`,
/// sector 0 due east, counter-clockwise), food count in the window, own HP as
/// a one-hot over four levels, position normalised to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation(pub Vec<f64>);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sector_count(&self, group: usize, sector: usize) -> f64 {
        self.0[group * SECTORS + sector]
    }
}

/// Sector of offset `(dx, dy)`, where `dy` grows southwards.
fn sector(dx: i64, dy: i64) -> usize {
    let angle = (-(dy as f64)).atan2(dx as f64);
    ((angle / FRAC_PI_4).round() as i64).rem_euclid(SECTORS as i64) as usize
}

fn window(world: &World, center: (usize, usize), radius: usize) -> (usize, usize, usize, usize) {
    let x0 = center.0.saturating_sub(radius);
    let y0 = center.1.saturating_sub(radius);
    let x1 = (center.0 + radius).min(world.width() - 1);
    let y1 = (center.1 + radius).min(world.height() - 1);
    (x0, y0, x1, y1)
}

fn alive_agent(world: &World, id: AgentId) -> Result<&super::AgentState> {
    let agent = world.agent(id)?;
    if !agent.alive {
        return Err(Error::DeadAgent(id));
    }
    Ok(agent)
}

pub fn observe(world: &World, id: AgentId, radius: usize) -> Result<Observation> {
    let agent = alive_agent(world, id)?;
    let groups = world.config().num_groups();
    let mut feats = vec![0.0; observation_len(groups)];
    let food_idx = groups * SECTORS;
    let (x0, y0, x1, y1) = window(world, agent.pos, radius);
    for y in y0..=y1 {
        for x in x0..=x1 {
            match world.cell(x, y) {
                Cell::Agent(k) if k != id => {
                    let dx = x as i64 - agent.pos.0 as i64;
                    let dy = y as i64 - agent.pos.1 as i64;
                    let g = world.agents()[k].group;
                    feats[g * SECTORS + sector(dx, dy)] += 1.0;
                }
                Cell::Food(_) => feats[food_idx] += 1.0,
                _ => {}
            }
        }
    }
    let max_hp = world.config().groups[agent.group].max_hp;
    let level = ((agent.hp / max_hp * HP_LEVELS as f64).floor() as usize).min(HP_LEVELS - 1);
    feats[food_idx + 1 + level] = 1.0;
    let norm = |v: usize, extent: usize| if extent > 1 { v as f64 / (extent - 1) as f64 } else { 0.0 };
    feats[food_idx + 1 + HP_LEVELS] = norm(agent.pos.0, world.width());
    feats[food_idx + 2 + HP_LEVELS] = norm(agent.pos.1, world.height());
    Ok(Observation(feats))
}

/// How neighbours are grouped.
#[derive(Clone, Copy, Debug)]
pub enum Partition<'a> {
    /// By scenario group (known types).
    ByGroup,
    /// By a type label per agent id (unknown types).
    ByType { labels: &'a [usize], num_types: usize },
    /// Everyone in one class.
    Single,
}

impl Partition<'_> {
    pub fn num_classes(&self, num_groups: usize) -> usize {
        match self {
            Partition::ByGroup => num_groups,
            Partition::ByType { num_types, .. } => *num_types,
            Partition::Single => 1,
        }
    }
}

/// Alive agents within Chebyshev distance `radius` of `center`, excluding
/// `center`, split into classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: AgentId,
    pub by_class: Vec<Vec<AgentId>>,
}

impl Neighborhood {
    pub fn counts(&self) -> Vec<usize> {
        self.by_class.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.by_class.iter().map(Vec::len).sum()
    }
}

pub fn neighborhood(world: &World, id: AgentId, radius: usize, partition: Partition<'_>) -> Result<Neighborhood> {
    let agent = alive_agent(world, id)?;
    let mut by_class = vec![Vec::new(); partition.num_classes(world.config().num_groups())];
    let (x0, y0, x1, y1) = window(world, agent.pos, radius);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if let Cell::Agent(k) = world.cell(x, y) {
                if k == id {
                    continue;
                }
                let class = match partition {
                    Partition::ByGroup => world.agents()[k].group,
                    Partition::ByType { labels, num_types } => {
                        let t = labels[k];
                        if t >= num_types {
                            return Err(Error::InvalidGroup(t));
                        }
                        t
                    }
                    Partition::Single => 0,
                };
                by_class[class].push(k);
            }
        }
    }
    Ok(Neighborhood { center: id, by_class })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sectors_cover_compass() {
        assert_eq!(sector(2, 0), 0); // east
        assert_eq!(sector(1, -1), 1); // north-east
        assert_eq!(sector(0, -3), 2); // north
        assert_eq!(sector(-1, -1), 3);
        assert_eq!(sector(-2, 0), 4); // west
        assert_eq!(sector(-1, 1), 5);
        assert_eq!(sector(0, 1), 6); // south
        assert_eq!(sector(1, 1), 7);
        assert_eq!(sector(5, -1), 0);
    }
}
