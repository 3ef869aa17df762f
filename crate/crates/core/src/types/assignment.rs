use std::collections::BTreeMap;

use super::kmeans::KMeansFit;
use crate::engine::AgentId;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Agent → type label, with one centroid per label.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeAssignment<S> {
    labels: BTreeMap<AgentId, usize>,
    centroids: Vec<Vec<S>>,
}

impl<S: Scalar> TypeAssignment<S> {
    /// No agents yet; relabelling against it is the identity.
    pub fn empty() -> Self {
        Self {
            labels: BTreeMap::new(),
            centroids: Vec::new(),
        }
    }

    pub fn new(labels: BTreeMap<AgentId, usize>, centroids: Vec<Vec<S>>) -> Result<Self> {
        if let Some((_, &l)) = labels.iter().find(|(_, &l)| l >= centroids.len()) {
            return Err(Error::InvalidActionId {
                index: l,
                count: centroids.len(),
            });
        }
        Ok(Self { labels, centroids })
    }

    /// `agents[i]` gets the label of the i-th clustered vector.
    pub fn from_fit(agents: &[AgentId], fit: &KMeansFit<S>) -> Result<Self> {
        if agents.len() != fit.labels.len() {
            return Err(Error::MismatchedAgents);
        }
        Self::new(agents.iter().copied().zip(fit.labels.iter().copied()).collect(), fit.centroids.clone())
    }

    pub fn num_types(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, agent: AgentId) -> Option<usize> {
        self.labels.get(&agent).copied()
    }

    pub fn labels(&self) -> &BTreeMap<AgentId, usize> {
        &self.labels
    }

    pub fn centroids(&self) -> &[Vec<S>] {
        &self.centroids
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.labels.keys().copied()
    }

    pub fn members(&self, label: usize) -> Vec<AgentId> {
        self.labels.iter().filter(|(_, &l)| l == label).map(|(&a, _)| a).collect()
    }

    /// The same labels for the subset of agents in `keep`.
    pub fn restricted_to(&self, keep: impl IntoIterator<Item = AgentId>) -> Self {
        let labels = keep
            .into_iter()
            .filter_map(|a| self.labels.get(&a).map(|&l| (a, l)))
            .collect();
        Self {
            labels,
            centroids: self.centroids.clone(),
        }
    }

    /// Applies `perm[old] = new` to labels and centroids.
    fn permuted(&self, perm: &[usize]) -> Self {
        let mut centroids = self.centroids.clone();
        for (old, &new) in perm.iter().enumerate() {
            centroids[new] = self.centroids[old].clone();
        }
        Self {
            labels: self.labels.iter().map(|(&a, &l)| (a, perm[l])).collect(),
            centroids,
        }
    }
}

/// Renames `new`'s labels to agree with `previous` as much as possible:
/// greedily pair the (new, previous) labels sharing the most agents. The
/// grouping itself is untouched.
pub fn relabel<S: Scalar>(new: &TypeAssignment<S>, previous: &TypeAssignment<S>) -> Result<TypeAssignment<S>> {
    if previous.is_empty() {
        return Ok(new.clone());
    }
    if !new.labels.keys().eq(previous.labels.keys()) {
        return Err(Error::MismatchedAgents);
    }
    let m = new.num_types();
    let p = previous.num_types();
    let mut table = vec![vec![0usize; p]; m];
    for (a, &l) in &new.labels {
        table[l][previous.labels[a]] += 1;
    }
    let mut perm = vec![usize::MAX; m];
    let mut taken = vec![false; m.max(p)];
    for _ in 0..m.min(p) {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in table.iter().enumerate().filter(|(i, _)| perm[*i] == usize::MAX) {
            for (j, &c) in row.iter().enumerate().filter(|(j, _)| !taken[*j]) {
                if best.is_none_or(|(_, _, bc)| c > bc) {
                    best = Some((i, j, c));
                }
            }
        }
        let (i, j, _) = best.expect("unmatched labels remain");
        perm[i] = j;
        taken[j] = true;
    }
    // labels with no counterpart take the free slots in order
    let mut free = (0..m).filter(|&j| !taken[j]);
    for slot in perm.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = free.next().expect("a free label per unmatched one");
    }
    Ok(new.permuted(&perm))
}

/// Fraction of agents whose cluster's majority role is their own role.
pub fn purity<S: Scalar>(assignment: &TypeAssignment<S>, role_of: impl Fn(AgentId) -> usize) -> f64 {
    if assignment.is_empty() {
        return 1.0;
    }
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&a, &l) in &assignment.labels {
        *counts.entry((l, role_of(a))).or_default() += 1;
    }
    let mut majority = vec![0usize; assignment.num_types()];
    for (&(l, _), &c) in &counts {
        majority[l] = majority[l].max(c);
    }
    majority.iter().sum::<usize>() as f64 / assignment.len() as f64
}
