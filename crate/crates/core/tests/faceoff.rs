use mtmf_core::harness::{faceoff, fresh_models, Contestant, FaceoffSpec, Lineup, TypeSettings};
use mtmf_core::learning::{load_model, save_model, Algorithm};
use mtmf_core::scenario::multi_battle_config;

#[test]
fn identical_models_win_equally_often() {
    let cfg = multi_battle_config().desk_scale();
    // a fresh model plays the uniform policy, which knows nothing about its seat
    let model = fresh_models::<f64>(&cfg, &[Algorithm::Mtmfq; 4], 6, None).unwrap().remove(0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shared.mtmf");
    save_model(&model, &path).unwrap();
    let before = std::fs::read(&path).unwrap();

    // per-seed counts are noisy (one seat's rate has a standard deviation of
    // about 2.3 points over 400 games), so rates are pooled across seeds
    let seeds = [1, 2];
    let mut wins = [0usize; 4];
    for seed in seeds {
        let contestants = (0..4)
            .map(|i| Contestant::new(format!("copy{i}"), vec![load_model::<f64>(&path).unwrap()]))
            .collect();
        let spec = FaceoffSpec {
            scenario: cfg.clone(),
            contestants,
            lineup: Lineup::Fixed,
            games: 400,
            seed,
            radius: 6,
            types: TypeSettings::default(),
        };
        let result = faceoff(&spec).unwrap();
        assert!(result.wins_per_group.iter().sum::<usize>() >= 400);
        for (total, w) in wins.iter_mut().zip(&result.wins_per_group) {
            *total += w;
        }
    }
    let games = (400 * seeds.len()) as f64;
    let rates: Vec<f64> = wins.iter().map(|&w| w as f64 / games).collect();
    let spread = rates.iter().cloned().fold(f64::MIN, f64::max) - rates.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 0.10, "win rates {rates:?}");
    // playing never touches the model
    assert_eq!(std::fs::read(&path).unwrap(), before);
}
