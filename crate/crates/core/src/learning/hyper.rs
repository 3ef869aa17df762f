use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inverse temperature growing geometrically per episode, so exploration
/// fades towards greedy play.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaSchedule<S> {
    pub initial: S,
    pub growth: S,
}

impl<S: Scalar> BetaSchedule<S> {
    pub fn at(&self, episode: usize) -> S {
        self.initial * self.growth.powi(episode as i32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams<S> {
    /// Learning rate.
    pub alpha: S,
    /// Discount.
    pub gamma: S,
    /// Target-network soft-update rate.
    pub tau: S,
    pub beta: BetaSchedule<S>,
    pub replay_capacity: usize,
    /// Minibatch size.
    pub batch_size: usize,
    /// Chebyshev radius of the neighbourhood and observation window.
    pub radius: usize,
}

impl<S: Scalar> Default for Hyperparams<S> {
    fn default() -> Self {
        Self {
            alpha: S::lit(0.1),
            gamma: S::lit(0.95),
            tau: S::lit(0.01),
            beta: BetaSchedule {
                initial: S::lit(0.3),
                growth: S::lit(1.003),
            },
            replay_capacity: 50_000,
            batch_size: 64,
            radius: 6,
        }
    }
}

impl<S: Scalar> Hyperparams<S> {
    /// `alpha = 0` is accepted so a run can be frozen without code changes.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.alpha >= S::zero() && self.alpha <= S::one()) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.gamma >= S::zero() && self.gamma < S::one()) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.tau > S::zero() && self.tau <= S::one()) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.beta.initial >= S::zero()) || !(self.beta.growth >= S::one()) || !self.beta.initial.is_finite() {
            return bad("beta must start >= 0 and never decrease");
        }
        if self.replay_capacity == 0 || self.batch_size == 0 {
            return bad("replay capacity and batch size must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let h = Hyperparams::<f64>::default();
        h.validate().unwrap();
        assert_eq!(h.beta.at(0), 0.3);
        assert!(h.beta.at(100) > h.beta.at(99));
    }

    #[test]
    fn rejects_out_of_range() {
        let mut h = Hyperparams::<f64>::default();
        h.gamma = 1.0;
        assert!(h.validate().is_err());
        let mut h = Hyperparams::<f64>::default();
        h.beta.growth = 0.99;
        assert!(h.validate().is_err());
        let mut h = Hyperparams::<f32>::default();
        h.alpha = 0.0;
        assert!(h.validate().is_ok());
    }
}
