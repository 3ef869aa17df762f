use std::collections::VecDeque;

use crate::engine::AgentId;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The last `capacity` actions of every agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionHistoryBuffer {
    capacity: usize,
    action_count: usize,
    rings: Vec<VecDeque<usize>>,
}

impl ActionHistoryBuffer {
    pub fn new(num_agents: usize, capacity: usize, action_count: usize) -> Result<Self> {
        if capacity == 0 || action_count == 0 {
            return Err(Error::InvalidConfig("history needs a positive capacity and action count".into()));
        }
        Ok(Self {
            capacity,
            action_count,
            rings: vec![VecDeque::with_capacity(capacity); num_agents],
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn num_agents(&self) -> usize {
        self.rings.len()
    }

    fn ring(&self, agent: AgentId) -> Result<&VecDeque<usize>> {
        self.rings.get(agent).ok_or(Error::UnknownAgent(agent))
    }

    pub fn record_action(&mut self, agent: AgentId, action: usize) -> Result<()> {
        if action >= self.action_count {
            return Err(Error::InvalidActionId {
                index: action,
                count: self.action_count,
            });
        }
        let capacity = self.capacity;
        let ring = self.rings.get_mut(agent).ok_or(Error::UnknownAgent(agent))?;
        if ring.len() == capacity {
            ring.pop_front();
        }
        ring.push_back(action);
        Ok(())
    }

    /// Buffered actions, oldest first.
    pub fn history(&self, agent: AgentId) -> Result<impl Iterator<Item = usize> + '_> {
        Ok(self.ring(agent)?.iter().copied())
    }

    /// Normalised histogram of the buffered actions; uniform while empty.
    pub fn action_frequency<S: Scalar>(&self, agent: AgentId) -> Result<Vec<S>> {
        let ring = self.ring(agent)?;
        if ring.is_empty() {
            return Ok(vec![S::one() / S::from_count(self.action_count); self.action_count]);
        }
        let mut freq = vec![S::zero(); self.action_count];
        for &a in ring {
            freq[a] += S::one();
        }
        let n = S::from_count(ring.len());
        for f in &mut freq {
            *f /= n;
        }
        Ok(freq)
    }

    pub fn clear(&mut self) {
        self.rings.iter_mut().for_each(VecDeque::clear);
    }
}
