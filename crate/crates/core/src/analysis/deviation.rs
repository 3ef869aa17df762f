//! Average deviation of actions from their mean field, under one global type
//! or a partition into types.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{l2_distance, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport<S> {
    pub n: usize,
    /// Agents per type (K_i).
    pub counts: Vec<usize>,
    /// ‖a_k − ā‖ against the global mean.
    pub single_deviations: Vec<S>,
    /// ‖a_k − ā_i‖ against the agent's own type mean.
    pub multi_deviations: Vec<S>,
    /// Realised per-type average deviation (ε_i); 0 for empty types.
    pub epsilons: Vec<S>,
    /// ‖ā_i − ā‖ (α_i); 0 for empty types.
    pub alphas: Vec<S>,
    pub lhs_single: S,
    pub lhs_multi: S,
    /// Σ K_i/N (ε_i + α_i).
    pub rhs_single: S,
    /// Σ K_i/N ε_i.
    pub rhs_multi: S,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck<S> {
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
}

pub const BOUND_TOLERANCE: f64 = 1e-12;

fn mean<S: Scalar>(vectors: &[&Vec<S>], dim: usize) -> Vec<S> {
    let mut m = vec![S::zero(); dim];
    for v in vectors {
        for (acc, &x) in m.iter_mut().zip(v.iter()) {
            *acc += x;
        }
    }
    let n = S::from_count(vectors.len().max(1));
    m.iter_mut().for_each(|x| *x /= n);
    m
}

/// `actions[k]` is agent k's (one-hot) action and `types[k] < num_types` its type.
pub fn average_deviation<S: Scalar>(actions: &[Vec<S>], types: &[usize], num_types: usize) -> Result<DeviationReport<S>> {
    if actions.is_empty() {
        return Err(Error::EmptyInput("actions"));
    }
    if types.len() != actions.len() {
        return Err(Error::DimensionMismatch {
            what: "type labels",
            expected: actions.len(),
            got: types.len(),
        });
    }
    let dim = actions[0].len();
    if let Some(a) = actions.iter().find(|a| a.len() != dim) {
        return Err(Error::DimensionMismatch {
            what: "action vector",
            expected: dim,
            got: a.len(),
        });
    }
    if let Some(&t) = types.iter().find(|&&t| t >= num_types) {
        return Err(Error::InvalidGroup(t));
    }
    let n = actions.len();
    let nf = S::from_count(n);
    let global = mean(&actions.iter().collect::<Vec<_>>(), dim);
    let members: Vec<Vec<&Vec<S>>> = (0..num_types)
        .map(|t| actions.iter().zip(types).filter(|(_, &l)| l == t).map(|(a, _)| a).collect())
        .collect();
    let counts: Vec<usize> = members.iter().map(Vec::len).collect();
    let type_means: Vec<Vec<S>> = members.iter().map(|m| mean(m, dim)).collect();

    let single_deviations: Vec<S> = actions.iter().map(|a| l2_distance(a, &global)).collect();
    let multi_deviations: Vec<S> = actions
        .iter()
        .zip(types)
        .map(|(a, &t)| l2_distance(a, &type_means[t]))
        .collect();
    let mut epsilons = vec![S::zero(); num_types];
    for (&d, &t) in multi_deviations.iter().zip(types) {
        epsilons[t] += d;
    }
    for (e, &k) in epsilons.iter_mut().zip(&counts) {
        if k > 0 {
            *e /= S::from_count(k);
        }
    }
    let alphas: Vec<S> = type_means
        .iter()
        .zip(&counts)
        .map(|(m, &k)| if k > 0 { l2_distance(m, &global) } else { S::zero() })
        .collect();
    let weight = |t: usize| S::from_count(counts[t]) / nf;
    let rhs_multi = (0..num_types).map(|t| weight(t) * epsilons[t]).sum();
    let rhs_single = (0..num_types).map(|t| weight(t) * (epsilons[t] + alphas[t])).sum();
    Ok(DeviationReport {
        n,
        lhs_single: single_deviations.iter().copied().sum::<S>() / nf,
        lhs_multi: multi_deviations.iter().copied().sum::<S>() / nf,
        counts,
        single_deviations,
        multi_deviations,
        epsilons,
        alphas,
        rhs_single,
        rhs_multi,
    })
}

/// Treating all types as one: global-mean deviation against Σ K_i/N (ε_i + α_i).
pub fn check_theorem1<S: Scalar>(report: &DeviationReport<S>) -> BoundCheck<S> {
    BoundCheck {
        lhs: report.lhs_single,
        rhs: report.rhs_single,
        holds: report.lhs_single <= report.rhs_single + S::lit(BOUND_TOLERANCE),
    }
}

/// Types kept apart: type-mean deviation against Σ K_i/N ε_i.
pub fn check_theorem2<S: Scalar>(report: &DeviationReport<S>) -> BoundCheck<S> {
    BoundCheck {
        lhs: report.lhs_multi,
        rhs: report.rhs_multi,
        holds: report.lhs_multi <= report.rhs_multi + S::lit(BOUND_TOLERANCE),
    }
}

/// The multi-type bound never exceeds the single-type one.
pub fn multi_bound_is_tighter<S: Scalar>(report: &DeviationReport<S>) -> bool {
    report.rhs_multi <= report.rhs_single
}

/// A random population: 1–20 agents, 2–5 actions, 2–4 types, each type with
/// its own random action preferences.
pub fn random_deviation_instance<S: Scalar, R: Rng>(rng: &mut R) -> (Vec<Vec<S>>, Vec<usize>, usize) {
    let n = rng.gen_range(1..=20);
    let actions = rng.gen_range(2..=5);
    let num_types = rng.gen_range(2..=4);
    let prefs: Vec<Vec<f64>> = (0..num_types)
        .map(|_| (0..actions).map(|_| rng.gen_range(0.0f64..1.0).powi(3)).collect())
        .collect();
    let mut vectors = Vec::with_capacity(n);
    let mut types = Vec::with_capacity(n);
    for _ in 0..n {
        let t = rng.gen_range(0..num_types);
        let total: f64 = prefs[t].iter().sum();
        let mut u = rng.gen_range(0.0..total);
        let mut a = actions - 1;
        for (i, &p) in prefs[t].iter().enumerate() {
            if u < p {
                a = i;
                break;
            }
            u -= p;
        }
        let mut v = vec![S::zero(); actions];
        v[a] = S::one();
        vectors.push(v);
        types.push(t);
    }
    (vectors, types, num_types)
}
