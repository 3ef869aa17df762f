//! The single-type and independent learners as special cases of the
//! multi-type one, plus the finite-difference check of the TD gradient.

use mtmf_core::learning::{boltzmann_policy, Algorithm, MeanAction, QModel, ReplayEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OBS: usize = 9;
const ACTIONS: usize = 5;

fn random_mean(rng: &mut ChaCha8Rng, n: usize) -> MeanAction<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    MeanAction::new(raw.iter().map(|x| x / total).collect()).unwrap()
}

fn random_entry(rng: &mut ChaCha8Rng, num_types: usize) -> ReplayEntry<f64> {
    let obs = (0..OBS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let next_obs = (0..OBS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let means = (0..num_types).map(|_| random_mean(rng, ACTIONS)).collect();
    let next_means = (0..num_types).map(|_| random_mean(rng, ACTIONS)).collect();
    ReplayEntry::new(
        obs,
        rng.gen_range(0..ACTIONS),
        rng.gen_range(-2.0..2.0),
        next_obs,
        means,
        next_means,
        rng.gen_bool(0.1),
    )
}

#[test]
fn mtmfq_with_one_type_is_mfq() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let stream: Vec<ReplayEntry<f64>> = (0..500).map(|_| random_entry(&mut rng, 1)).collect();
    let mut mfq = QModel::linear(Algorithm::Mfq, 1, ACTIONS, OBS, ACTIONS).unwrap();
    let mut mtmfq = QModel::linear(Algorithm::Mtmfq, 1, ACTIONS, OBS, ACTIONS).unwrap();
    for chunk in stream.chunks(20) {
        let batch: Vec<&ReplayEntry<f64>> = chunk.iter().collect();
        let a = mfq.q_update(&batch, 0.1, 0.95, 1.5).unwrap();
        let b = mtmfq.q_update(&batch, 0.1, 0.95, 1.5).unwrap();
        assert_eq!(a, b);
        mfq.soft_update(0.05);
        mtmfq.soft_update(0.05);
    }
    let gap = mfq
        .weights()
        .iter()
        .zip(mtmfq.weights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(gap <= 1e-12, "weights differ by {gap}");
    assert!(mfq.weights().iter().any(|&w| w != 0.0));
}

#[test]
fn il_ignores_mean_actions_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut il = QModel::linear(Algorithm::Il, 0, ACTIONS, OBS, ACTIONS).unwrap();
    il.weights_mut().iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
    for _ in 0..100 {
        let obs: Vec<f64> = (0..OBS).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base = il.q_values(&obs, &[]).unwrap();
        let perturbed = vec![random_mean(&mut rng, ACTIONS); 3];
        let q = il.q_values(&obs, &perturbed).unwrap();
        assert!(base.iter().zip(&q).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let m = rng.gen_range(1..=3);
        let mut model = QModel::linear(Algorithm::Mtmfq, m, ACTIONS, OBS, ACTIONS).unwrap();
        model.weights_mut().iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
        model.target_weights_mut().iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
        let entries: Vec<_> = (0..rng.gen_range(1..=16)).map(|_| random_entry(&mut rng, m)).collect();
        let batch: Vec<&ReplayEntry<f64>> = entries.iter().collect();
        let (gamma, beta) = (0.9, 2.0);
        let analytic = model.loss_gradient(&batch, gamma, beta).unwrap();
        let mut numeric = vec![0.0; analytic.len()];
        for i in 0..analytic.len() {
            let w = model.weights()[i];
            model.weights_mut()[i] = w + h;
            let up = model.loss(&batch, gamma, beta).unwrap();
            model.weights_mut()[i] = w - h;
            let down = model.loss(&batch, gamma, beta).unwrap();
            model.weights_mut()[i] = w;
            numeric[i] = (up - down) / (2.0 * h);
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
        assert!(diff / norm <= 1e-5, "seed {seed}: relative error {}", diff / norm);
    }
}

#[test]
fn zero_beta_samples_uniformly() {
    // chi-squared goodness of fit, 4 degrees of freedom; the 0.1% critical
    // value is 18.47
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut model = QModel::linear(Algorithm::Mfq, 1, ACTIONS, OBS, ACTIONS).unwrap();
    model.weights_mut().iter_mut().for_each(|w| *w = rng.gen_range(-3.0..3.0));
    let obs: Vec<f64> = (0..OBS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let means = vec![random_mean(&mut rng, ACTIONS)];
    assert_eq!(boltzmann_policy(&model.q_values(&obs, &means).unwrap(), 0.0), vec![0.2; ACTIONS]);
    let n = 10_000;
    let mut counts = [0usize; ACTIONS];
    for _ in 0..n {
        counts[model.select_action(&obs, &means, 0.0, &mut rng).unwrap()] += 1;
    }
    let expected = n as f64 / ACTIONS as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 18.47, "chi2 = {chi2}, counts {counts:?}");
}
