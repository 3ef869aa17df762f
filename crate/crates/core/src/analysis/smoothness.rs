//! Quadratic Q-functions decomposed over subsets of neighbours, for checking
//! how far the multi-type mean-field value is from the exact one.
//!
//! Subset `i` has its own quadratic
//! `Q_i(z) = c_i + g·(z − ā) + ½ (z − ā)ᵀ H_i (z − ā)` over the concatenated
//! per-type actions `z`, expanded around the realised per-type means `ā` with
//! a gradient `g` shared by all subsets. The first-order terms then cancel
//! (the deviations average to zero), so the approximation error is exactly
//! the mean second-order remainder `1/X Σ ½ δ_iᵀ H_i δ_i`.
//!
//! The stated bound `½ L ε` uses the average deviation norm `ε = 1/X Σ ‖δ_i‖`.
//! The remainder is really bounded by `½ L · 1/X Σ ‖δ_i‖²`, which is smaller
//! only while deviations stay below unit length; both are reported.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{dot, l2_norm, Scalar};

pub const THEOREM3_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessInstance<S> {
    pub num_types: usize,
    pub action_count: usize,
    /// Action id of each type's representative, per subset (X × M).
    pub subsets: Vec<Vec<usize>>,
    /// Value at the mean, per subset.
    pub offsets: Vec<S>,
    /// Shared gradient at the mean, length M·A.
    pub gradient: Vec<S>,
    /// Row-major symmetric Hessian per subset, (M·A)².
    pub hessians: Vec<Vec<S>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem3Check<S> {
    /// Mean of the subset quadratics at the actual actions.
    pub q: S,
    /// Mean of the subset quadratics at the per-type means.
    pub q_mtmf: S,
    pub error: S,
    /// Mean second-order remainder ½ δᵀHδ.
    pub remainder: S,
    /// Largest |eigenvalue| over all subset Hessians.
    pub lipschitz: S,
    /// Average deviation norm.
    pub epsilon: S,
    /// ½ L ε.
    pub bound: S,
    pub holds: bool,
    /// ½ L · mean ‖δ‖², always valid.
    pub squared_bound: S,
    pub holds_squared: bool,
}

impl<S: Scalar> SmoothnessInstance<S> {
    pub fn dim(&self) -> usize {
        self.num_types * self.action_count
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.subsets.len();
        if x == 0 || self.num_types == 0 || self.action_count == 0 {
            return Err(Error::EmptyInput("smoothness instance"));
        }
        let d = self.dim();
        let bad = |what: &'static str, expected: usize, got: usize| Err(Error::DimensionMismatch { what, expected, got });
        if self.offsets.len() != x {
            return bad("subset offsets", x, self.offsets.len());
        }
        if self.hessians.len() != x {
            return bad("subset Hessians", x, self.hessians.len());
        }
        if self.gradient.len() != d {
            return bad("gradient", d, self.gradient.len());
        }
        for s in &self.subsets {
            if s.len() != self.num_types {
                return bad("subset actions", self.num_types, s.len());
            }
            if let Some(&a) = s.iter().find(|&&a| a >= self.action_count) {
                return Err(Error::InvalidActionId {
                    index: a,
                    count: self.action_count,
                });
            }
        }
        for h in &self.hessians {
            if h.len() != d * d {
                return bad("Hessian entries", d * d, h.len());
            }
            for i in 0..d {
                for j in 0..i {
                    if h[i * d + j] != h[j * d + i] {
                        return Err(Error::InvalidConfig("Hessian is not symmetric".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Concatenated one-hot actions of subset `i`.
    pub fn joint_action(&self, i: usize) -> Vec<S> {
        let mut z = vec![S::zero(); self.dim()];
        for (m, &a) in self.subsets[i].iter().enumerate() {
            z[m * self.action_count + a] = S::one();
        }
        z
    }

    /// Concatenated per-type mean actions.
    pub fn mean_action(&self) -> Vec<S> {
        let mut mean = vec![S::zero(); self.dim()];
        for i in 0..self.subsets.len() {
            for (acc, x) in mean.iter_mut().zip(self.joint_action(i)) {
                *acc += x;
            }
        }
        let x = S::from_count(self.subsets.len());
        mean.iter_mut().for_each(|v| *v /= x);
        mean
    }

    fn quadratic_form(&self, i: usize, v: &[S]) -> S {
        let d = self.dim();
        let h = &self.hessians[i];
        (0..d).map(|r| v[r] * dot(&h[r * d..(r + 1) * d], v)).sum()
    }

    /// `Q_i(z)`.
    pub fn evaluate(&self, i: usize, z: &[S], mean: &[S]) -> S {
        let dz: Vec<S> = z.iter().zip(mean).map(|(&a, &b)| a - b).collect();
        self.offsets[i] + dot(&self.gradient, &dz) + S::lit(0.5) * self.quadratic_form(i, &dz)
    }

    /// max |λ| over every subset Hessian, from a symmetric eigendecomposition.
    pub fn lipschitz(&self) -> S {
        let d = self.dim();
        let mut l = 0.0f64;
        for h in &self.hessians {
            let m = DMatrix::from_iterator(d, d, h.iter().map(|x| x.as_f64()));
            for ev in m.symmetric_eigenvalues().iter() {
                l = l.max(ev.abs());
            }
        }
        S::lit(l)
    }
}

pub fn check_theorem3<S: Scalar>(instance: &SmoothnessInstance<S>) -> Result<Theorem3Check<S>> {
    instance.validate()?;
    let x = S::from_count(instance.subsets.len());
    let mean = instance.mean_action();
    let mut q = S::zero();
    let mut q_mtmf = S::zero();
    let mut remainder = S::zero();
    let mut norm_sum = S::zero();
    let mut sq_sum = S::zero();
    for i in 0..instance.subsets.len() {
        let z = instance.joint_action(i);
        let delta: Vec<S> = z.iter().zip(&mean).map(|(&a, &b)| a - b).collect();
        q += instance.evaluate(i, &z, &mean);
        q_mtmf += instance.evaluate(i, &mean, &mean);
        remainder += S::lit(0.5) * instance.quadratic_form(i, &delta);
        let norm = l2_norm(&delta);
        norm_sum += norm;
        sq_sum += norm * norm;
    }
    let (q, q_mtmf, remainder) = (q / x, q_mtmf / x, remainder / x);
    let epsilon = norm_sum / x;
    let lipschitz = instance.lipschitz();
    let half_l = S::lit(0.5) * lipschitz;
    let error = (q - q_mtmf).abs();
    let bound = half_l * epsilon;
    let squared_bound = half_l * sq_sum / x;
    let tol = S::lit(THEOREM3_TOLERANCE);
    Ok(Theorem3Check {
        q,
        q_mtmf,
        error,
        remainder,
        lipschitz,
        epsilon,
        bound,
        holds: error <= bound + tol,
        squared_bound,
        holds_squared: error <= squared_bound + tol,
    })
}

/// Random instance: 1–12 subsets, 1–3 types, 2–5 actions, Hessians
/// `(B + Bᵀ)/2` with `B ~ U(−1, 1)` (or all zero), offsets and gradient
/// `~ U(−1, 1)`.
pub fn random_smoothness_instance<S: Scalar, R: Rng>(rng: &mut R, zero_hessian: bool) -> SmoothnessInstance<S> {
    let x = rng.gen_range(1..=12);
    let m = rng.gen_range(1..=3);
    let a = rng.gen_range(2..=5);
    let d = m * a;
    let mut uniform = || S::lit(rng.gen_range(-1.0..1.0));
    let offsets = (0..x).map(|_| uniform()).collect();
    let gradient = (0..d).map(|_| uniform()).collect();
    let hessians = (0..x)
        .map(|_| {
            let b: Vec<S> = (0..d * d).map(|_| uniform()).collect();
            let mut h = vec![S::zero(); d * d];
            if !zero_hessian {
                for i in 0..d {
                    for j in 0..d {
                        h[i * d + j] = (b[i * d + j] + b[j * d + i]) * S::lit(0.5);
                    }
                }
            }
            h
        })
        .collect();
    let subsets = (0..x).map(|_| (0..m).map(|_| rng.gen_range(0..a)).collect()).collect();
    SmoothnessInstance {
        num_types: m,
        action_count: a,
        subsets,
        offsets,
        gradient,
        hessians,
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn scaled_identity(d: usize, l: f64) -> Vec<f64> {
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = l;
        }
        h
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3; [[0, -4], [-4, 0]] has ±4
        let inst = SmoothnessInstance {
            num_types: 1,
            action_count: 2,
            subsets: vec![vec![0], vec![1]],
            offsets: vec![0.0, 0.0],
            gradient: vec![0.0, 0.0],
            hessians: vec![vec![2.0, 1.0, 1.0, 2.0], vec![0.0, -4.0, -4.0, 0.0]],
        };
        assert_relative_eq!(inst.lipschitz(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn everyone_at_the_mean_has_no_error() {
        let d = 6;
        let inst = SmoothnessInstance {
            num_types: 2,
            action_count: 3,
            subsets: vec![vec![1, 2]; 4],
            offsets: vec![0.3, -0.1, 0.0, 2.0],
            gradient: vec![1.0; d],
            hessians: vec![scaled_identity(d, 5.0); 4],
        };
        let c = check_theorem3(&inst).unwrap();
        assert_eq!(c.epsilon, 0.0);
        assert_eq!(c.error, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn remainder_is_the_error() {
        // H = L·I: every remainder is ½ L ‖δ‖², so the error equals the
        // squared bound exactly.
        let d = 4;
        let inst = SmoothnessInstance {
            num_types: 2,
            action_count: 2,
            subsets: vec![vec![0, 0], vec![1, 1], vec![0, 1]],
            offsets: vec![0.0; 3],
            gradient: vec![0.5, -0.5, 0.25, 0.0],
            hessians: vec![scaled_identity(d, 2.0); 3],
        };
        let c = check_theorem3(&inst).unwrap();
        assert_relative_eq!(c.error, c.remainder, epsilon = 1e-12);
        assert_relative_eq!(c.error, c.squared_bound, epsilon = 1e-12);
        assert_relative_eq!(c.lipschitz, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn stated_bound_fails_for_large_deviations() {
        // Three types, two subsets playing opposite actions in every type:
        // each δ_i has three blocks ±(½, −½), so ‖δ_i‖² = 3/2 > ‖δ_i‖ ≈ 1.22.
        // With H = L·I the error ½L·3/2 exceeds ½L·ε.
        let l = 1.0;
        let inst = SmoothnessInstance {
            num_types: 3,
            action_count: 2,
            subsets: vec![vec![0, 0, 0], vec![1, 1, 1]],
            offsets: vec![0.0; 2],
            gradient: vec![0.0; 6],
            hessians: vec![scaled_identity(6, l); 2],
        };
        let c = check_theorem3(&inst).unwrap();
        assert_relative_eq!(c.epsilon, 1.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.error, 0.75, epsilon = 1e-12);
        assert!(!c.holds);
        assert!(c.holds_squared);
    }

    #[test]
    fn rejects_asymmetric_hessian() {
        let inst = SmoothnessInstance {
            num_types: 1,
            action_count: 2,
            subsets: vec![vec![0]],
            offsets: vec![0.0],
            gradient: vec![0.0; 2],
            hessians: vec![vec![1.0, 2.0, 0.0, 1.0]],
        };
        assert!(check_theorem3(&inst).is_err());
    }

    proptest! {
        #[test]
        fn zero_hessian_is_exact(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_smoothness_instance::<f64, _>(&mut rng, true);
            let c = check_theorem3(&inst).unwrap();
            prop_assert!(c.error <= 1e-12);
            prop_assert_eq!(c.lipschitz, 0.0);
        }

        #[test]
        fn error_is_the_mean_remainder(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_smoothness_instance::<f64, _>(&mut rng, false);
            let c = check_theorem3(&inst).unwrap();
            prop_assert!((c.error - c.remainder.abs()).abs() <= 1e-12);
            prop_assert!(c.holds_squared);
        }
    }
}
