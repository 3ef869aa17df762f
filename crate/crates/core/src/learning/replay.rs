//! Fixed-capacity FIFO replay buffer.

use rand::seq::index;
use rand::Rng;

use super::model::ReplayEntry;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ReplayBuffer<S> {
    entries: Vec<ReplayEntry<S>>,
    capacity: usize,
    /// Slot the next push overwrites once full.
    head: usize,
}

impl<S> ReplayBuffer<S> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be positive".into()));
        }
        Ok(Self {
            entries: Vec::new(),
            capacity,
            head: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, evicting the oldest entry when full.
    pub fn push(&mut self, entry: ReplayEntry<S>) {
        if self.entries.len() < self.capacity {
            self.entries.push(entry);
        } else {
            self.entries[self.head] = entry;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// `k` distinct entries chosen uniformly at random.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<&ReplayEntry<S>>> {
        if k > self.entries.len() {
            return Err(Error::Capacity {
                needed: k,
                available: self.entries.len(),
            });
        }
        Ok(index::sample(rng, self.entries.len(), k).into_iter().map(|i| &self.entries[i]).collect())
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &ReplayEntry<S>> {
        let (newer, older) = self.entries.split_at(self.head);
        older.iter().chain(newer)
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.head = 0;
    }
}
