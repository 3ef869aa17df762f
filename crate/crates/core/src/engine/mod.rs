//! Discrete-time grid simulator for many agents.
//!
//! One [`World::step`] resolves a joint action in four phases:
//!
//! 1. attacks, all computed from pre-step positions and HP;
//! 2. damage application, deaths, kill credit and food capture;
//! 3. moves of the survivors, in a seeded random order, where a move into an
//!    occupied cell (or off the grid) is a no-op;
//! 4. HP recovery for survivors that took no damage this step.

mod actions;
mod events;
mod observe;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

pub use actions::{legal_actions, ActionId, ActionKind, ActionSet, ActionVocabulary};
pub use events::{write_events_csv, Event, EventKind};
pub use observe::{neighborhood, observation_len, observe, Neighborhood, Observation, Partition, SECTORS};

pub type AgentId = usize;

/// Cell coordinates, `x` to the east and `y` to the south.
pub type Pos = (usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub group: usize,
    pub pos: Pos,
    pub hp: f64,
    pub alive: bool,
    /// Local index into the group's action set.
    pub last_action: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoodState {
    pub pos: Pos,
    pub hp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cell {
    Empty,
    Agent(AgentId),
    Food(usize),
}

/// Per-agent reward split by source. `total()` is what the learner sees.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RewardBreakdown {
    pub movement: f64,
    /// Attack reward earned by hitting another agent.
    pub attack: f64,
    /// Attack penalty plus the empty-cell penalty.
    pub attack_cost: f64,
    /// Punishment for being hit (predator-prey only).
    pub received: f64,
    pub kill: f64,
    pub death: f64,
    pub food: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.movement + self.attack + self.attack_cost + self.received + self.kill + self.death + self.food
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Indexed by agent id; zero for agents dead before the step.
    pub rewards: Vec<f64>,
    pub breakdown: Vec<RewardBreakdown>,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    config: Arc<ScenarioConfig>,
    action_sets: Arc<[ActionSet]>,
    width: usize,
    height: usize,
    agents: Vec<AgentState>,
    food: Vec<FoodState>,
    grid: Vec<Cell>,
    step: u64,
    rng: ChaCha8Rng,
}

/// Spawn rectangle of one group: a compact block inside the group's region of
/// the map, pushed as close to the map centre as the region allows. Regions
/// are dealt in snake order (odd rows right to left), so four groups sit
/// clockwise and each group's neighbours in index order are its neighbours on
/// the map.
fn spawn_block(config: &ScenarioConfig, group: usize, count: usize) -> Result<(usize, usize, usize, usize)> {
    let n = config.num_groups();
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let row = group / cols;
    let col = if row % 2 == 0 { group % cols } else { cols - 1 - group % cols };
    let rx0 = col * config.width / cols;
    let rx1 = (col + 1) * config.width / cols;
    let ry0 = row * config.height / rows;
    let ry1 = (row + 1) * config.height / rows;
    let (rw, rh) = (rx1 - rx0, ry1 - ry0);
    if rw * rh < count {
        return Err(Error::Capacity {
            needed: count,
            available: rw * rh,
        });
    }
    let side = ((2 * count) as f64).sqrt().ceil() as usize;
    let (mut w, mut h) = (side.min(rw), side.min(rh));
    if w * h < count {
        w = rw;
        h = rh;
    }
    let clamp = |c: usize, lo: usize, hi: usize| c.max(lo).min(hi);
    let cx = config.width / 2;
    let cy = config.height / 2;
    let x0 = clamp(cx.saturating_sub(w / 2), rx0, rx1 - w);
    let y0 = clamp(cy.saturating_sub(h / 2), ry0, ry1 - h);
    Ok((x0, y0, w, h))
}

impl World {
    /// Builds the initial state: every group in its own spawn block, all HP
    /// at the group maximum, food scattered over the remaining cells.
    pub fn reset(config: Arc<ScenarioConfig>, seed: u64) -> Result<Self> {
        config.validate()?;
        let (width, height) = (config.width, config.height);
        let food_count = config.food.as_ref().map_or(0, |f| f.count);
        let needed = config.total_agents() + food_count;
        if needed > width * height {
            return Err(Error::Capacity {
                needed,
                available: width * height,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = vec![Cell::Empty; width * height];
        let mut agents = Vec::with_capacity(config.total_agents());
        for (g, group) in config.groups.iter().enumerate() {
            let (x0, y0, w, h) = spawn_block(&config, g, group.initial_count)?;
            let mut cells: Vec<Pos> = (y0..y0 + h).flat_map(|y| (x0..x0 + w).map(move |x| (x, y))).collect();
            cells.shuffle(&mut rng);
            for &pos in cells.iter().take(group.initial_count) {
                let id = agents.len();
                grid[pos.1 * width + pos.0] = Cell::Agent(id);
                agents.push(AgentState {
                    id,
                    group: g,
                    pos,
                    hp: group.max_hp,
                    alive: true,
                    last_action: 0,
                });
            }
        }
        let mut food = Vec::with_capacity(food_count);
        if let Some(fc) = &config.food {
            let free: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] == Cell::Empty).collect();
            if free.len() < fc.count {
                return Err(Error::Capacity {
                    needed,
                    available: width * height,
                });
            }
            for &cell in free.choose_multiple(&mut rng, fc.count) {
                grid[cell] = Cell::Food(food.len());
                food.push(FoodState {
                    pos: (cell % width, cell / width),
                    hp: fc.hp,
                });
            }
        }
        let action_sets = config
            .groups
            .iter()
            .map(|g| ActionSet::new(g.speed, g.attack_range))
            .collect();
        Ok(Self {
            config,
            action_sets,
            width,
            height,
            agents,
            food,
            grid,
            step: 0,
            rng,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn shared_config(&self) -> &Arc<ScenarioConfig> {
        &self.config
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> Result<&AgentState> {
        self.agents.get(id).ok_or(Error::UnknownAgent(id))
    }

    pub fn food(&self) -> &[FoodState] {
        &self.food
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn action_set(&self, group: usize) -> Result<&ActionSet> {
        self.action_sets.get(group).ok_or(Error::InvalidGroup(group))
    }

    pub fn alive_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.config.num_groups()];
        for a in self.agents.iter().filter(|a| a.alive) {
            counts[a.group] += 1;
        }
        counts
    }

    pub fn alive_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.agents.iter().filter(|a| a.alive).map(|a| a.id)
    }

    /// Episode over: horizon reached or at most one group still alive.
    pub fn is_done(&self) -> bool {
        self.step >= self.config.max_steps || self.alive_counts().iter().filter(|&&c| c > 0).count() <= 1
    }

    pub(crate) fn cell(&self, x: usize, y: usize) -> Cell {
        self.grid[y * self.width + x]
    }

    fn offset(&self, pos: Pos, dx: i32, dy: i32) -> Option<Pos> {
        let x = pos.0 as i64 + i64::from(dx);
        let y = pos.1 as i64 + i64::from(dy);
        (x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height).then(|| (x as usize, y as usize))
    }

    fn resolve_joint(&self, joint: &[(AgentId, usize)]) -> Result<Vec<Option<ActionKind>>> {
        let mut chosen: Vec<Option<ActionKind>> = vec![None; self.agents.len()];
        for &(id, index) in joint {
            let agent = self.agents.get(id).ok_or(Error::UnknownAgent(id))?;
            if !agent.alive {
                return Err(Error::DeadAgent(id));
            }
            let set = &self.action_sets[agent.group];
            let kind = set.kind(index).ok_or(Error::IllegalAction {
                agent: id,
                index,
                available: set.len(),
            })?;
            if chosen[id].replace(kind).is_some() {
                return Err(Error::DuplicateAction(id));
            }
        }
        if let Some(a) = self.agents.iter().find(|a| a.alive && chosen[a.id].is_none()) {
            return Err(Error::MissingAction(a.id));
        }
        Ok(chosen)
    }

    /// Executes one joint action given as `(agent id, local action index)`
    /// pairs. Every alive agent needs exactly one entry; pair order is
    /// irrelevant.
    pub fn step(&mut self, joint: &[(AgentId, usize)]) -> Result<StepOutcome> {
        let chosen = self.resolve_joint(joint)?;
        let config = Arc::clone(&self.config);
        let n = self.agents.len();
        let mut breakdown = vec![RewardBreakdown::default(); n];
        let mut events = Vec::new();
        let event_step = self.step + 1;

        for agent in self.agents.iter_mut() {
            if let Some(kind) = chosen[agent.id] {
                agent.last_action = self.action_sets[agent.group]
                    .position(kind)
                    .expect("chosen kind comes from the group's set");
            }
        }

        // attacks, from the pre-step snapshot
        let mut damage = vec![0.0; n];
        let mut hits: Vec<(AgentId, AgentId)> = Vec::new();
        let mut food_damage = vec![0.0; self.food.len()];
        let mut food_hits: Vec<(usize, AgentId)> = Vec::new();
        for i in 0..n {
            let Some(ActionKind::Attack { dx, dy }) = chosen[i] else {
                continue;
            };
            let attacker = &self.agents[i];
            let g = attacker.group;
            let gc = &config.groups[g];
            breakdown[i].attack_cost += gc.attack_penalty;
            let target = self.offset(attacker.pos, dx, dy).map(|(x, y)| self.cell(x, y));
            match target {
                Some(Cell::Agent(v)) => {
                    let vg = self.agents[v].group;
                    damage[v] += gc.damage;
                    hits.push((v, i));
                    breakdown[i].attack += gc.attack_reward[vg];
                    if config.receiver_punishment {
                        breakdown[v].received -= gc.attack_reward[vg];
                    }
                }
                Some(Cell::Food(f)) => {
                    food_damage[f] += gc.damage;
                    food_hits.push((f, i));
                    if let Some(fc) = &config.food {
                        breakdown[i].food += fc.hit_reward;
                    }
                }
                Some(Cell::Empty) | None => breakdown[i].attack_cost += gc.attack_empty_penalty,
            }
        }

        // damage, deaths and kill credit
        for v in 0..n {
            if damage[v] <= 0.0 {
                continue;
            }
            let agent = &mut self.agents[v];
            agent.hp -= damage[v];
            if agent.hp <= 0.0 {
                agent.hp = 0.0;
                agent.alive = false;
                let (x, y) = agent.pos;
                self.grid[y * self.width + x] = Cell::Empty;
                let vg = agent.group;
                let penalty = config.groups[vg].dead_penalty;
                breakdown[v].death += penalty;
                events.push(Event {
                    step: event_step,
                    agent: v,
                    kind: EventKind::Death,
                    value: penalty,
                });
                for &(_, attacker) in hits.iter().filter(|(victim, _)| *victim == v) {
                    let reward = config.groups[self.agents[attacker].group].kill_reward[vg];
                    breakdown[attacker].kill += reward;
                    events.push(Event {
                        step: event_step,
                        agent: attacker,
                        kind: EventKind::Kill { victim: v },
                        value: reward,
                    });
                }
            }
        }
        if !food_hits.is_empty() {
            let collect = config.food.as_ref().map_or(0.0, |f| f.collect_reward);
            let mut captured = vec![false; self.food.len()];
            for f in 0..self.food.len() {
                if food_damage[f] <= 0.0 {
                    continue;
                }
                self.food[f].hp -= food_damage[f];
                if self.food[f].hp <= 0.0 {
                    captured[f] = true;
                    for &(_, agent) in food_hits.iter().filter(|(food, _)| *food == f) {
                        breakdown[agent].food += collect;
                        events.push(Event {
                            step: event_step,
                            agent,
                            kind: EventKind::Collect,
                            value: collect,
                        });
                    }
                }
            }
            if captured.iter().any(|&c| c) {
                let mut idx = 0;
                self.food.retain(|_| {
                    let keep = !captured[idx];
                    idx += 1;
                    keep
                });
                self.rebuild_food_cells();
            }
        }

        // moves
        let mut movers: Vec<AgentId> = Vec::new();
        for i in 0..n {
            if let Some(ActionKind::Move { .. }) = chosen[i] {
                breakdown[i].movement += config.groups[self.agents[i].group].move_penalty;
                if self.agents[i].alive {
                    movers.push(i);
                }
            }
        }
        if !movers.is_empty() {
            movers.shuffle(&mut self.rng);
            for &i in &movers {
                let Some(ActionKind::Move { dx, dy }) = chosen[i] else {
                    unreachable!()
                };
                let from = self.agents[i].pos;
                if let Some(to) = self.offset(from, dx, dy) {
                    if self.cell(to.0, to.1) == Cell::Empty {
                        self.grid[from.1 * self.width + from.0] = Cell::Empty;
                        self.grid[to.1 * self.width + to.0] = Cell::Agent(i);
                        self.agents[i].pos = to;
                    }
                }
            }
        }

        // recovery
        for agent in self.agents.iter_mut().filter(|a| a.alive) {
            if damage[agent.id] == 0.0 {
                let g = &config.groups[agent.group];
                agent.hp = (agent.hp + g.step_recovery).min(g.max_hp);
            }
        }

        self.step += 1;
        let rewards = breakdown.iter().map(RewardBreakdown::total).collect();
        Ok(StepOutcome {
            rewards,
            breakdown,
            events,
        })
    }

    fn rebuild_food_cells(&mut self) {
        for cell in self.grid.iter_mut() {
            if let Cell::Food(_) = cell {
                *cell = Cell::Empty;
            }
        }
        for (i, f) in self.food.iter().enumerate() {
            self.grid[f.pos.1 * self.width + f.pos.0] = Cell::Food(i);
        }
    }

    /// Places agents and food by hand. Intended for tests and small
    /// constructed scenarios; panics on overlapping or out-of-range cells.
    pub fn from_layout(config: ScenarioConfig, agents: &[(usize, Pos)], food: &[Pos], seed: u64) -> Result<Self> {
        config.validate()?;
        let (width, height) = (config.width, config.height);
        let mut grid = vec![Cell::Empty; width * height];
        let mut states = Vec::with_capacity(agents.len());
        for (id, &(group, pos)) in agents.iter().enumerate() {
            let gc = config.group(group)?;
            assert!(pos.0 < width && pos.1 < height, "agent {id} off the grid");
            let cell = &mut grid[pos.1 * width + pos.0];
            assert_eq!(*cell, Cell::Empty, "cell {pos:?} already taken");
            *cell = Cell::Agent(id);
            states.push(AgentState {
                id,
                group,
                pos,
                hp: gc.max_hp,
                alive: true,
                last_action: 0,
            });
        }
        let food_hp = config.food.as_ref().map_or(1.0, |f| f.hp);
        let mut food_states = Vec::with_capacity(food.len());
        for &pos in food {
            let cell = &mut grid[pos.1 * width + pos.0];
            assert_eq!(*cell, Cell::Empty, "cell {pos:?} already taken");
            *cell = Cell::Food(food_states.len());
            food_states.push(FoodState { pos, hp: food_hp });
        }
        let action_sets = config
            .groups
            .iter()
            .map(|g| ActionSet::new(g.speed, g.attack_range))
            .collect();
        Ok(Self {
            config: Arc::new(config),
            action_sets,
            width,
            height,
            agents: states,
            food: food_states,
            grid,
            step: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Overrides one agent's HP; for constructing test situations.
    pub fn set_hp(&mut self, id: AgentId, hp: f64) -> Result<()> {
        let agent = self.agents.get_mut(id).ok_or(Error::UnknownAgent(id))?;
        agent.hp = hp;
        Ok(())
    }
}
