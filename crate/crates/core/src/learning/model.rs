//! Linear Q-function over `(observation, own action, per-type mean actions)`.
//!
//! The feature vector for action `a` has two blocks, each replicated per
//! action so that only `a`'s copies are nonzero:
//!
//! ```text
//! [ obs ⊗ onehot(a) | (ā_1 ‖ … ‖ ā_M) ⊗ onehot(a) ]
//!   A * obs_dim       A * M * mean_dim
//! ```
//!
//! MFQ is the `M = 1` case and independent Q-learning the `M = 0` case, in
//! which the mean-action block disappears and mean actions are ignored.
//!
//! The tabular layout maps `(observation bin, action, vertex of each mean
//! action)` to a single one-hot feature, which turns [`QModel::q_update`] into
//! the scalar recurrence `Q ← Q + α (y − Q)` on that entry.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use super::mean_action::MeanAction;
use super::policy::{boltzmann_policy, expected_value, sample_index};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Multi-type mean field Q-learning.
    Mtmfq,
    /// Single mean field Q-learning.
    Mfq,
    /// Independent Q-learning.
    Il,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mtmfq => "mtmfq",
            Algorithm::Mfq => "mfq",
            Algorithm::Il => "il",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Algorithm::Mtmfq => 0,
            Algorithm::Mfq => 1,
            Algorithm::Il => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Algorithm::Mtmfq),
            1 => Some(Algorithm::Mfq),
            2 => Some(Algorithm::Il),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mtmfq" => Ok(Algorithm::Mtmfq),
            "mfq" => Ok(Algorithm::Mfq),
            "il" | "iql" => Ok(Algorithm::Il),
            other => Err(Error::Parse(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureLayout {
    Linear { obs_dim: usize, mean_dim: usize },
    /// `obs` is a single value holding an integral bin index.
    Tabular { obs_bins: usize, mean_dim: usize },
}

impl FeatureLayout {
    pub fn mean_dim(&self) -> usize {
        match *self {
            FeatureLayout::Linear { mean_dim, .. } | FeatureLayout::Tabular { mean_dim, .. } => mean_dim,
        }
    }
}

/// One stored transition of one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayEntry<S> {
    pub obs: Arc<[S]>,
    pub action: usize,
    pub reward: S,
    pub next_obs: Arc<[S]>,
    pub means: Arc<[MeanAction<S>]>,
    pub next_means: Arc<[MeanAction<S>]>,
    pub done: bool,
}

impl<S: Scalar> ReplayEntry<S> {
    pub fn new(
        obs: Vec<S>,
        action: usize,
        reward: S,
        next_obs: Vec<S>,
        means: Vec<MeanAction<S>>,
        next_means: Vec<MeanAction<S>>,
        done: bool,
    ) -> Self {
        Self {
            obs: obs.into(),
            action,
            reward,
            next_obs: next_obs.into(),
            means: means.into(),
            next_means: next_means.into(),
            done,
        }
    }
}

/// `reward + gamma * value_next`, or just `reward` at a terminal transition.
pub fn td_target<S: Scalar>(reward: S, gamma: S, value_next: S, done: bool) -> S {
    if done {
        reward
    } else {
        reward + gamma * value_next
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QModel<S> {
    algorithm: Algorithm,
    num_types: usize,
    action_count: usize,
    layout: FeatureLayout,
    weights: Vec<S>,
    target_weights: Vec<S>,
}

impl<S: Scalar> QModel<S> {
    /// Zero-initialised model. `num_types` must be 0 for IL, 1 for MFQ and
    /// at least 1 for MTMFQ.
    pub fn new(algorithm: Algorithm, num_types: usize, action_count: usize, layout: FeatureLayout) -> Result<Self> {
        let ok = match algorithm {
            Algorithm::Mtmfq => num_types >= 1,
            Algorithm::Mfq => num_types == 1,
            Algorithm::Il => num_types == 0,
        };
        if !ok {
            return Err(Error::InvalidConfig(format!("{algorithm} cannot use {num_types} types")));
        }
        if action_count == 0 {
            return Err(Error::InvalidConfig("model needs at least one action".into()));
        }
        let dim = Self::dim_for(num_types, action_count, layout)?;
        Ok(Self {
            algorithm,
            num_types,
            action_count,
            layout,
            weights: vec![S::zero(); dim],
            target_weights: vec![S::zero(); dim],
        })
    }

    pub fn linear(algorithm: Algorithm, num_types: usize, action_count: usize, obs_dim: usize, mean_dim: usize) -> Result<Self> {
        Self::new(algorithm, num_types, action_count, FeatureLayout::Linear { obs_dim, mean_dim })
    }

    pub fn tabular(algorithm: Algorithm, num_types: usize, action_count: usize, obs_bins: usize, mean_dim: usize) -> Result<Self> {
        Self::new(algorithm, num_types, action_count, FeatureLayout::Tabular { obs_bins, mean_dim })
    }

    fn dim_for(num_types: usize, action_count: usize, layout: FeatureLayout) -> Result<usize> {
        match layout {
            FeatureLayout::Linear { obs_dim, mean_dim } => Ok(action_count * (obs_dim + num_types * mean_dim)),
            FeatureLayout::Tabular { obs_bins, mean_dim } => {
                let keys = u32::try_from(num_types)
                    .ok()
                    .and_then(|m| mean_dim.checked_pow(m))
                    .ok_or_else(|| Error::InvalidConfig("tabular key space overflows".into()))?;
                obs_bins
                    .checked_mul(action_count)
                    .and_then(|x| x.checked_mul(keys))
                    .ok_or_else(|| Error::InvalidConfig("tabular key space overflows".into()))
            }
        }
    }

    pub(crate) fn from_parts(
        algorithm: Algorithm,
        num_types: usize,
        action_count: usize,
        layout: FeatureLayout,
        weights: Vec<S>,
        target_weights: Vec<S>,
    ) -> Result<Self> {
        let mut model = Self::new(algorithm, num_types, action_count, layout)?;
        if weights.len() != model.dim() || target_weights.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                what: "model weights",
                expected: model.dim(),
                got: weights.len().max(target_weights.len()),
            });
        }
        if weights.iter().chain(&target_weights).any(|w| !w.is_finite()) {
            return Err(Error::ModelFormat("non-finite weight".into()));
        }
        model.weights = weights;
        model.target_weights = target_weights;
        Ok(model)
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [S] {
        &mut self.weights
    }

    pub fn target_weights(&self) -> &[S] {
        &self.target_weights
    }

    pub fn target_weights_mut(&mut self) -> &mut [S] {
        &mut self.target_weights
    }

    fn check_inputs(&self, obs: &[S], means: &[MeanAction<S>]) -> Result<()> {
        let expected_obs = match self.layout {
            FeatureLayout::Linear { obs_dim, .. } => obs_dim,
            FeatureLayout::Tabular { .. } => 1,
        };
        if obs.len() != expected_obs {
            return Err(Error::DimensionMismatch {
                what: "observation",
                expected: expected_obs,
                got: obs.len(),
            });
        }
        if self.num_types == 0 {
            return Ok(());
        }
        if means.len() != self.num_types {
            return Err(Error::DimensionMismatch {
                what: "mean actions per type",
                expected: self.num_types,
                got: means.len(),
            });
        }
        let mean_dim = self.layout.mean_dim();
        if let Some(m) = means.iter().find(|m| m.len() != mean_dim) {
            return Err(Error::DimensionMismatch {
                what: "mean action",
                expected: mean_dim,
                got: m.len(),
            });
        }
        Ok(())
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.action_count {
            return Err(Error::InvalidActionId {
                index: action,
                count: self.action_count,
            });
        }
        Ok(())
    }

    fn tabular_index(&self, obs: &[S], action: usize, means: &[MeanAction<S>]) -> Result<usize> {
        let FeatureLayout::Tabular { obs_bins, mean_dim } = self.layout else {
            unreachable!("tabular index on a linear layout")
        };
        let bin = obs[0];
        if bin < S::zero() || bin.fract() != S::zero() || bin.as_f64() >= obs_bins as f64 {
            return Err(Error::InvalidConfig(format!("tabular observation {bin} is not a bin below {obs_bins}")));
        }
        let bin = bin.as_f64() as usize;
        let key = means
            .iter()
            .take(self.num_types)
            .fold(0usize, |acc, m| acc * mean_dim + m.vertex());
        let keys = mean_dim.pow(self.num_types as u32);
        Ok((bin * self.action_count + action) * keys + key)
    }

    /// Q(obs, action, means) under `weights`; inputs already checked.
    fn q_with(&self, weights: &[S], obs: &[S], action: usize, means: &[MeanAction<S>]) -> Result<S> {
        match self.layout {
            FeatureLayout::Linear { obs_dim, mean_dim } => {
                let mut q = dot(&weights[action * obs_dim..(action + 1) * obs_dim], obs);
                if self.num_types > 0 {
                    let block = self.num_types * mean_dim;
                    let base = self.action_count * obs_dim + action * block;
                    for (m, mean) in means.iter().enumerate() {
                        let start = base + m * mean_dim;
                        q += dot(&weights[start..start + mean_dim], mean.probs());
                    }
                }
                Ok(q)
            }
            FeatureLayout::Tabular { .. } => Ok(weights[self.tabular_index(obs, action, means)?]),
        }
    }

    /// `weights += scale * featurize(obs, action, means)`, touching only the
    /// nonzero support.
    fn add_scaled(&mut self, obs: &[S], action: usize, means: &[MeanAction<S>], scale: S) -> Result<()> {
        match self.layout {
            FeatureLayout::Linear { obs_dim, mean_dim } => {
                let start = action * obs_dim;
                for (w, &x) in self.weights[start..start + obs_dim].iter_mut().zip(obs) {
                    *w += scale * x;
                }
                if self.num_types > 0 {
                    let block = self.num_types * mean_dim;
                    let base = self.action_count * obs_dim + action * block;
                    for (m, mean) in means.iter().enumerate() {
                        let start = base + m * mean_dim;
                        for (w, &x) in self.weights[start..start + mean_dim].iter_mut().zip(mean.probs()) {
                            *w += scale * x;
                        }
                    }
                }
            }
            FeatureLayout::Tabular { .. } => {
                let i = self.tabular_index(obs, action, means)?;
                self.weights[i] += scale;
            }
        }
        Ok(())
    }

    /// The explicit feature vector for `(obs, action, means)`.
    pub fn featurize(&self, obs: &[S], action: usize, means: &[MeanAction<S>]) -> Result<Vec<S>> {
        self.check_inputs(obs, means)?;
        self.check_action(action)?;
        let mut x = vec![S::zero(); self.dim()];
        match self.layout {
            FeatureLayout::Linear { obs_dim, mean_dim } => {
                x[action * obs_dim..(action + 1) * obs_dim].copy_from_slice(obs);
                if self.num_types > 0 {
                    let block = self.num_types * mean_dim;
                    let base = self.action_count * obs_dim + action * block;
                    for (m, mean) in means.iter().enumerate() {
                        let start = base + m * mean_dim;
                        x[start..start + mean_dim].copy_from_slice(mean.probs());
                    }
                }
            }
            FeatureLayout::Tabular { .. } => x[self.tabular_index(obs, action, means)?] = S::one(),
        }
        Ok(x)
    }

    fn all_q(&self, weights: &[S], obs: &[S], means: &[MeanAction<S>]) -> Result<Vec<S>> {
        self.check_inputs(obs, means)?;
        (0..self.action_count).map(|a| self.q_with(weights, obs, a, means)).collect()
    }

    /// Q-values of every action under the online weights.
    pub fn q_values(&self, obs: &[S], means: &[MeanAction<S>]) -> Result<Vec<S>> {
        self.all_q(&self.weights, obs, means)
    }

    pub fn target_q_values(&self, obs: &[S], means: &[MeanAction<S>]) -> Result<Vec<S>> {
        self.all_q(&self.target_weights, obs, means)
    }

    /// `Σ_a π(a) Q⁻(a)` with π the Boltzmann policy over the target Q-values.
    pub fn value_estimate(&self, next_obs: &[S], next_means: &[MeanAction<S>], beta: S) -> Result<S> {
        let q = self.target_q_values(next_obs, next_means)?;
        Ok(expected_value(&boltzmann_policy(&q, beta), &q))
    }

    fn targets_and_errors(&self, batch: &[&ReplayEntry<S>], gamma: S, beta: S) -> Result<Vec<S>> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("minibatch"));
        }
        batch
            .iter()
            .map(|e| {
                self.check_inputs(&e.obs, &e.means)?;
                self.check_action(e.action)?;
                let v = if e.done {
                    S::zero()
                } else {
                    self.value_estimate(&e.next_obs, &e.next_means, beta)?
                };
                let y = td_target(e.reward, gamma, v, e.done);
                Ok(y - self.q_with(&self.weights, &e.obs, e.action, &e.means)?)
            })
            .collect()
    }

    /// Mean squared TD error `1/K Σ (y − Q)²` with targets from the target weights.
    pub fn loss(&self, batch: &[&ReplayEntry<S>], gamma: S, beta: S) -> Result<S> {
        let errs = self.targets_and_errors(batch, gamma, beta)?;
        Ok(errs.iter().map(|&e| e * e).sum::<S>() / S::from_count(errs.len()))
    }

    /// Gradient of [`loss`](Self::loss) with respect to the online weights.
    pub fn loss_gradient(&self, batch: &[&ReplayEntry<S>], gamma: S, beta: S) -> Result<Vec<S>> {
        let errs = self.targets_and_errors(batch, gamma, beta)?;
        let scale = -S::lit(2.0) / S::from_count(errs.len());
        let mut grad = vec![S::zero(); self.dim()];
        for (e, &err) in batch.iter().zip(&errs) {
            let x = self.featurize(&e.obs, e.action, &e.means)?;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += scale * err * xi;
            }
        }
        Ok(grad)
    }

    /// One gradient step on the minibatch, `w ← w + α/K Σ (y − Q) x`, which is
    /// the half-MSE gradient scaled by `α`. Returns the pre-update loss.
    pub fn q_update(&mut self, batch: &[&ReplayEntry<S>], alpha: S, gamma: S, beta: S) -> Result<S> {
        let errs = self.targets_and_errors(batch, gamma, beta)?;
        let k = S::from_count(errs.len());
        let loss = errs.iter().map(|&e| e * e).sum::<S>() / k;
        if alpha != S::zero() {
            let step = alpha / k;
            for (e, &err) in batch.iter().zip(&errs) {
                self.add_scaled(&e.obs, e.action, &e.means, step * err)?;
            }
        }
        Ok(loss)
    }

    /// `target ← τ·online + (1 − τ)·target`.
    pub fn soft_update(&mut self, tau: S) {
        let keep = S::one() - tau;
        for (t, &w) in self.target_weights.iter_mut().zip(&self.weights) {
            *t = tau * w + keep * *t;
        }
    }

    /// Samples an action from the Boltzmann policy over the online Q-values.
    pub fn select_action<R: Rng + ?Sized>(&self, obs: &[S], means: &[MeanAction<S>], beta: S, rng: &mut R) -> Result<usize> {
        let q = self.q_values(obs, means)?;
        Ok(sample_index(&boltzmann_policy(&q, beta), rng))
    }

    /// Checks that a loaded model fits a slot in a scenario.
    pub fn check_compatible(&self, action_count: usize, layout: FeatureLayout, num_types: usize) -> Result<()> {
        if self.action_count != action_count || self.layout != layout || self.num_types != num_types {
            return Err(Error::IncompatibleModel(format!(
                "model has {} actions, {} types, {:?}; slot needs {} actions, {} types, {:?}",
                self.action_count, self.num_types, self.layout, action_count, num_types, layout
            )));
        }
        Ok(())
    }
}
