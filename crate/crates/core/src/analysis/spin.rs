//! The stateless spin game: a central agent picks up or down, rewarded by
//! how its four neighbours A, B (one pair) and C, D (the other pair) spin.
//!
//! Matching both of C and D costs 2; otherwise matching both of A and B earns
//! 2; anything else earns nothing. Grid A has A, B up and C, D down; grid B
//! the reverse. Stages run A, A, B, A, A, B, ... and the agent updates both
//! actions every stage, then acts greedily on the updated values.
//!
//! Mean actions are keyed by neighbour up-counts: one count over all four
//! neighbours for MFQ, one count per pair for MTMFQ. Both grids have two
//! neighbours up, so MFQ cannot tell them apart.

use crate::error::{Error, Result};
use crate::learning::{Algorithm, MeanAction, QModel, ReplayEntry};
use crate::scalar::Scalar;

pub const UP: usize = 0;
pub const DOWN: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grid {
    A,
    B,
}

impl Grid {
    /// Grid of 1-based `stage`.
    pub fn for_stage(stage: usize) -> Self {
        if stage % 3 == 0 {
            Grid::B
        } else {
            Grid::A
        }
    }

    /// Spins of neighbours A, B, C, D.
    pub fn neighbours(self) -> [usize; 4] {
        match self {
            Grid::A => [UP, UP, DOWN, DOWN],
            Grid::B => [DOWN, DOWN, UP, UP],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Grid::A => "A",
            Grid::B => "B",
        }
    }
}

pub fn spin_reward(action: usize, neighbours: [usize; 4]) -> f64 {
    let [a, b, c, d] = neighbours;
    if action == c && action == d {
        -2.0
    } else if action == a && action == b {
        2.0
    } else {
        0.0
    }
}

pub fn best_spin(neighbours: [usize; 4]) -> usize {
    if spin_reward(DOWN, neighbours) > spin_reward(UP, neighbours) {
        DOWN
    } else {
        UP
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinStage<S> {
    pub stage: usize,
    pub grid: Grid,
    /// Neighbour up-counts the values are keyed on (empty for IL).
    pub key: Vec<usize>,
    pub q_up: S,
    pub q_down: S,
    pub chosen: usize,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinGameTrace<S> {
    pub algorithm: Algorithm,
    pub alpha: S,
    pub stages: Vec<SpinStage<S>>,
}

impl<S> SpinGameTrace<S> {
    pub fn mistakes(&self) -> usize {
        self.stages.iter().filter(|s| !s.correct).count()
    }
}

/// Up-counts per neighbour class.
fn up_counts(algorithm: Algorithm, neighbours: [usize; 4]) -> Vec<usize> {
    let ups = |ids: &[usize]| ids.iter().filter(|&&k| neighbours[k] == UP).count();
    match algorithm {
        Algorithm::Il => Vec::new(),
        Algorithm::Mfq => vec![ups(&[0, 1, 2, 3])],
        Algorithm::Mtmfq => vec![ups(&[0, 1]), ups(&[2, 3])],
    }
}

/// Tabular model for the game: one observation bin, two actions, and each
/// mean action a one-hot over the possible up-counts.
fn spin_model<S: Scalar>(algorithm: Algorithm) -> Result<QModel<S>> {
    match algorithm {
        Algorithm::Il => QModel::tabular(algorithm, 0, 2, 1, 1),
        Algorithm::Mfq => QModel::tabular(algorithm, 1, 2, 1, 5),
        Algorithm::Mtmfq => QModel::tabular(algorithm, 2, 2, 1, 3),
    }
}

/// Plays `stages` stages from zero values with learning rate `alpha`.
/// Each update is `Q ← Q + α (r − Q)` on the stage's key.
pub fn spin_game_trace<S: Scalar>(algorithm: Algorithm, stages: usize, alpha: S) -> Result<SpinGameTrace<S>> {
    if stages == 0 {
        return Err(Error::InvalidConfig("the spin game needs at least one stage".into()));
    }
    if !(alpha >= S::zero() && alpha <= S::one()) {
        return Err(Error::InvalidConfig(format!("learning rate {alpha} is outside [0, 1]")));
    }
    let mut model = spin_model::<S>(algorithm)?;
    let mean_dim = model.layout().mean_dim();
    let obs = vec![S::zero()];
    let mut rows = Vec::with_capacity(stages);
    for stage in 1..=stages {
        let grid = Grid::for_stage(stage);
        let neighbours = grid.neighbours();
        let key = up_counts(algorithm, neighbours);
        let means: Vec<MeanAction<S>> = key.iter().map(|&c| MeanAction::one_hot(c, mean_dim)).collect();
        for action in [UP, DOWN] {
            let entry = ReplayEntry::new(
                obs.clone(),
                action,
                S::lit(spin_reward(action, neighbours)),
                obs.clone(),
                means.clone(),
                means.clone(),
                true,
            );
            model.q_update(&[&entry], alpha, S::zero(), S::one())?;
        }
        let q = model.q_values(&obs, &means)?;
        let chosen = if q[DOWN] > q[UP] { DOWN } else { UP };
        rows.push(SpinStage {
            stage,
            grid,
            key,
            q_up: q[UP],
            q_down: q[DOWN],
            chosen,
            correct: chosen == best_spin(neighbours),
        });
    }
    Ok(SpinGameTrace {
        algorithm,
        alpha,
        stages: rows,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use approx::assert_abs_diff_eq;

    use super::*;

    /// Plain table of `(action, key) → Q`.
    fn table_oracle(algorithm: Algorithm, stages: usize, alpha: f64) -> Vec<(f64, f64)> {
        let mut q: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
        let mut out = Vec::new();
        for stage in 1..=stages {
            let n = Grid::for_stage(stage).neighbours();
            let key = up_counts(algorithm, n);
            for a in [UP, DOWN] {
                let v = q.entry((a, key.clone())).or_insert(0.0);
                *v += alpha * (spin_reward(a, n) - *v);
            }
            out.push((q[&(UP, key.clone())], q[&(DOWN, key)]));
        }
        out
    }

    #[test]
    fn rewards_follow_the_grids() {
        assert_eq!(spin_reward(UP, Grid::A.neighbours()), 2.0);
        assert_eq!(spin_reward(DOWN, Grid::A.neighbours()), -2.0);
        assert_eq!(spin_reward(UP, Grid::B.neighbours()), -2.0);
        assert_eq!(spin_reward(DOWN, Grid::B.neighbours()), 2.0);
        // C and D disagreeing: no penalty, A and B decide
        assert_eq!(spin_reward(UP, [UP, UP, UP, DOWN]), 2.0);
        assert_eq!(spin_reward(DOWN, [UP, DOWN, UP, DOWN]), 0.0);
    }

    #[test]
    fn grids_cycle_a_a_b() {
        let grids: Vec<_> = (1..=6).map(Grid::for_stage).collect();
        assert_eq!(grids, [Grid::A, Grid::A, Grid::B, Grid::A, Grid::A, Grid::B]);
    }

    #[test]
    fn mfq_makes_one_mistake_in_three() {
        let t = spin_game_trace::<f64>(Algorithm::Mfq, 3, 0.1).unwrap();
        let q: Vec<_> = t.stages.iter().map(|s| (s.q_up, s.q_down)).collect();
        for (got, want) in q.iter().zip([(0.2, -0.2), (0.38, -0.38), (0.142, -0.142)]) {
            assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-12);
            assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-12);
        }
        assert_eq!(t.stages[2].chosen, UP);
        assert!(!t.stages[2].correct);
        assert_eq!(t.mistakes(), 1);
    }

    #[test]
    fn mtmfq_is_always_right() {
        let t = spin_game_trace::<f64>(Algorithm::Mtmfq, 3, 0.1).unwrap();
        let q: Vec<_> = t.stages.iter().map(|s| (s.q_up, s.q_down)).collect();
        for (got, want) in q.iter().zip([(0.2, -0.2), (0.38, -0.38), (-0.2, 0.2)]) {
            assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-12);
            assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-12);
        }
        assert_eq!(t.stages[0].key, [2, 0]);
        assert_eq!(t.stages[2].key, [0, 2]);
        assert_eq!(t.stages[2].chosen, DOWN);
        assert_eq!(t.mistakes(), 0);
    }

    #[test]
    fn long_runs_match_the_table() {
        for alg in [Algorithm::Il, Algorithm::Mfq, Algorithm::Mtmfq] {
            for alpha in [0.05, 0.1, 0.7, 1.0] {
                let t = spin_game_trace::<f64>(alg, 30, alpha).unwrap();
                let oracle = table_oracle(alg, 30, alpha);
                for (s, (up, down)) in t.stages.iter().zip(oracle) {
                    assert_abs_diff_eq!(s.q_up, up, epsilon = 1e-12);
                    assert_abs_diff_eq!(s.q_down, down, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn mfq_errs_on_every_grid_b_stage() {
        let mfq = spin_game_trace::<f64>(Algorithm::Mfq, 30, 0.1).unwrap();
        for s in &mfq.stages {
            assert_eq!(s.correct, s.grid == Grid::A, "stage {}", s.stage);
        }
        let mtmfq = spin_game_trace::<f64>(Algorithm::Mtmfq, 30, 0.1).unwrap();
        assert_eq!(mtmfq.mistakes(), 0);
    }

    #[test]
    fn zero_rate_learns_nothing() {
        let t = spin_game_trace::<f64>(Algorithm::Mtmfq, 6, 0.0).unwrap();
        assert!(t.stages.iter().all(|s| s.q_up == 0.0 && s.q_down == 0.0));
    }

    #[test]
    fn f32_agrees() {
        let t = spin_game_trace::<f32>(Algorithm::Mfq, 3, 0.1).unwrap();
        assert!((t.stages[2].q_up - 0.142).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(spin_game_trace::<f64>(Algorithm::Mfq, 0, 0.1).is_err());
        assert!(spin_game_trace::<f64>(Algorithm::Mfq, 3, 1.5).is_err());
    }
}
