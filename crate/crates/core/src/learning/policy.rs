//! Boltzmann (softmax) action selection.

use rand::Rng;

use crate::scalar::Scalar;

/// `softmax(beta * q)`, computed with the maximum subtracted first.
pub fn boltzmann_policy<S: Scalar>(q: &[S], beta: S) -> Vec<S> {
    if q.is_empty() {
        return Vec::new();
    }
    let max = q.iter().copied().fold(S::neg_infinity(), S::max);
    let mut probs: Vec<S> = q.iter().map(|&x| (beta * (x - max)).exp()).collect();
    let total: S = probs.iter().copied().sum();
    for p in &mut probs {
        *p /= total;
    }
    probs
}

/// Expected value of `q` under `probs`.
pub fn expected_value<S: Scalar>(probs: &[S], q: &[S]) -> S {
    crate::scalar::dot(probs, q)
}

/// Inverse-CDF draw from a probability vector. Consumes exactly one `f64`
/// from `rng`.
pub fn sample_index<S: Scalar, R: Rng + ?Sized>(probs: &[S], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the final partial sum
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_beta_is_uniform() {
        let p = boltzmann_policy(&[3.0, -1.0, 0.5], 0.0);
        assert_eq!(p, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn ln3_gives_three_to_one() {
        let p = boltzmann_policy(&[1.0_f64, 0.0], 3.0_f64.ln());
        assert!((p[0] - 0.75).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
        assert!((expected_value(&p, &[1.0, 0.0]) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn large_beta_is_greedy() {
        let p = boltzmann_policy(&[1.0_f64, 0.0], 50.0);
        assert!(p[0] > 1.0 - 1e-9);
    }

    #[test]
    fn no_overflow_for_huge_values() {
        let p = boltzmann_policy(&[1e6_f64, 1e6 - 1.0], 100.0);
        assert!(p.iter().all(|x| x.is_finite()));
        let p32 = boltzmann_policy(&[500.0_f32, 0.0], 10.0);
        assert_eq!(p32[0], 1.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let probs = [0.2, 0.3, 0.5];
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<usize> = (0..50).map(|_| sample_index(&probs, &mut a)).collect();
        let ys: Vec<usize> = (0..50).map(|_| sample_index(&probs, &mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn never_samples_zero_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probs = [0.0, 1.0, 0.0];
        assert!((0..1000).all(|_| sample_index(&probs, &mut rng) == 1));
    }

    fn argmax(v: &[f64]) -> usize {
        let mut best = 0;
        for i in 1..v.len() {
            if v[i] > v[best] {
                best = i;
            }
        }
        best
    }

    proptest! {
        #[test]
        fn policy_is_on_simplex(q in prop::collection::vec(-100.0f64..100.0, 1..20), beta in 0.0f64..20.0) {
            let p = boltzmann_policy(&q, beta);
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn shift_invariance(q in prop::collection::vec(-10.0f64..10.0, 1..12), beta in 0.0f64..5.0, c in -50.0f64..50.0) {
            let shifted: Vec<f64> = q.iter().map(|x| x + c).collect();
            let a = boltzmann_policy(&q, beta);
            let b = boltzmann_policy(&shifted, beta);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn argmax_is_preserved(q in prop::collection::vec(-10.0f64..10.0, 1..12), beta in 0.01f64..5.0) {
            let p = boltzmann_policy(&q, beta);
            prop_assert_eq!(q[argmax(&p)], q[argmax(&q)]);
        }
    }
}
