//! Per-type mean actions: empirical distributions of neighbours' one-hot
//! actions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SIMPLEX_TOL: f64 = 1e-9;

/// A point on the action simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanAction<S>(Vec<S>);

impl<S: Scalar> MeanAction<S> {
    /// Checks nonnegativity and unit sum (within 1e-9).
    pub fn new(probs: Vec<S>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("mean action"));
        }
        let sum: S = probs.iter().copied().sum();
        if probs.iter().any(|&p| p < S::zero() || !p.is_finite()) || (sum - S::one()).abs() > S::lit(SIMPLEX_TOL) {
            return Err(Error::InvalidConfig(format!("mean action is off the simplex (sum {sum})")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![S::one() / S::from_count(n); n])
    }

    pub fn one_hot(index: usize, n: usize) -> Self {
        let mut v = vec![S::zero(); n];
        v[index] = S::one();
        Self(v)
    }

    /// Empirical distribution of `actions`; uniform when there are none.
    pub fn from_actions(actions: &[usize], action_count: usize) -> Result<Self> {
        if actions.is_empty() {
            return Ok(Self::uniform(action_count));
        }
        let mut counts = vec![0usize; action_count];
        for &a in actions {
            *counts.get_mut(a).ok_or(Error::InvalidActionId {
                index: a,
                count: action_count,
            })? += 1;
        }
        let n = S::from_count(actions.len());
        Ok(Self(counts.into_iter().map(|c| S::from_count(c) / n).collect()))
    }

    pub fn probs(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Nearest simplex vertex, i.e. the most frequent action (lowest index on ties).
    pub fn vertex(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// One mean action per type from the neighbours' action ids of that type.
pub fn mean_actions<S: Scalar>(by_type: &[Vec<usize>], action_count: usize) -> Result<Vec<MeanAction<S>>> {
    by_type
        .iter()
        .map(|actions| MeanAction::from_actions(actions, action_count))
        .collect()
}
