use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use persq_core::features::{FeatureVector, Range, Scaler, WindowedSample, FEATURE_WIDTH};
use persq_core::model::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;

fn close(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= 1e-7 || diff / analytic.abs().max(numeric.abs()) <= 1e-4
}

fn randomize<P: ParamSet>(params: &mut P, rng: &mut ChaCha8Rng) {
    for s in params.slices_mut() {
        s.iter_mut().for_each(|x| *x = rng.random_range(-0.8..0.8));
    }
}

fn toy_model(
    input: usize,
    hidden: Vec<usize>,
    window_t: usize,
    dropout: f64,
    rng: &mut ChaCha8Rng,
) -> PerSqModel {
    let cfg = ModelConfig {
        input_size: input,
        hidden_sizes: hidden,
        dropout_rate: dropout,
        window_t,
        seed: rng.random(),
    };
    let mut model = PerSqModel::init(&cfg).unwrap();
    randomize(model.params_mut(), rng);
    model
}

fn half_sq(model: &PerSqModel, seq: &[Vec<f64>], masks: Option<DropoutMasks>, target: f64) -> f64 {
    let (y, _) = model.forward_with_masks(seq, masks).unwrap();
    0.5 * (y - target).powi(2)
}

/// Compares every analytic entry with a central difference; returns the
/// number of entries checked.
fn check_lstm(
    model: &mut PerSqModel,
    seq: &[Vec<f64>],
    masks: Option<DropoutMasks>,
    target: f64,
) -> usize {
    let (_, cache) = model.forward_with_masks(seq, masks.clone()).unwrap();
    let analytic = model
        .backward_sequence(seq, target, &cache)
        .unwrap()
        .to_flat();
    let mut checked = 0;
    let n_slices = model.params().slices().len();
    for s in 0..n_slices {
        let len = model.params().slices()[s].len();
        for j in 0..len {
            let orig = model.params().slices()[s][j];
            model.params_mut().slices_mut()[s][j] = orig + EPS;
            let plus = half_sq(model, seq, masks.clone(), target);
            model.params_mut().slices_mut()[s][j] = orig - EPS;
            let minus = half_sq(model, seq, masks.clone(), target);
            model.params_mut().slices_mut()[s][j] = orig;
            let numeric = (plus - minus) / (2.0 * EPS);
            let a = analytic[checked];
            assert!(
                close(a, numeric),
                "slice {s} entry {j}: analytic {a} vs numeric {numeric}"
            );
            checked += 1;
        }
    }
    checked
}

#[test]
fn lstm_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for instance in 0..20 {
        let input = rng.random_range(1..=4);
        let depth = rng.random_range(1..=3);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=4)).collect();
        let window_t = rng.random_range(0..=2);
        let dropout = if instance % 2 == 0 { 0.0 } else { 0.4 };
        let mut model = toy_model(input, hidden.clone(), window_t, dropout, &mut rng);
        let seq: Vec<Vec<f64>> = (0..=window_t)
            .map(|_| (0..input).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let masks =
            (dropout > 0.0).then(|| DropoutMasks::sample(&mut rng, dropout, &hidden, seq.len()));
        let target = rng.random_range(0.0..1.0);
        let checked = check_lstm(&mut model, &seq, masks, target);
        assert_eq!(checked, model.params().num_params());
    }
}

#[test]
fn three_step_two_unit_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut model = toy_model(2, vec![2, 2, 2], 2, 0.0, &mut rng);
    let seq = vec![vec![0.1, 0.9], vec![0.5, 0.2], vec![0.7, 0.3]];
    check_lstm(&mut model, &seq, None, 0.4);
}

#[test]
fn single_step_window_has_zero_recurrent_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut model = toy_model(3, vec![2], 0, 0.0, &mut rng);
    let seq = vec![vec![0.2, 0.4, 0.6]];
    check_lstm(&mut model, &seq, None, 0.9);
    let (_, cache) = model.forward_with_masks(&seq, None).unwrap();
    let grad = model.backward_sequence(&seq, 0.9, &cache).unwrap();
    assert!(grad.layers[0]
        .recurrent_weights
        .as_slice()
        .iter()
        .all(|g| *g == 0.0));
}

#[test]
fn zero_loss_gives_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = toy_model(3, vec![3, 2], 1, 0.0, &mut rng);
    let seq = vec![vec![0.3, 0.1, 0.2], vec![0.9, 0.5, 0.4]];
    let (y, cache) = model.forward_with_masks(&seq, None).unwrap();
    let grad = model.backward_sequence(&seq, y, &cache).unwrap();
    assert!(grad.to_flat().iter().all(|g| *g == 0.0));
}

#[test]
fn stale_cache_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut model = toy_model(2, vec![2], 1, 0.0, &mut rng);
    let seq = vec![vec![0.3, 0.1], vec![0.9, 0.5]];
    let (_, cache) = model.forward_with_masks(&seq, None).unwrap();
    let other = vec![vec![0.3, 0.1], vec![0.9, 0.6]];
    assert!(matches!(
        model.backward_sequence(&other, 0.5, &cache),
        Err(ModelError::StaleCache)
    ));
    model.params_mut().head.bias[0] += 0.1;
    assert!(matches!(
        model.backward_sequence(&seq, 0.5, &cache),
        Err(ModelError::StaleCache)
    ));
}

#[test]
fn mlp_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let input = rng.random_range(1..=8);
        let mut params = MlpParams::init(input, &[8, 8], rng.random()).unwrap();
        randomize(&mut params, &mut rng);
        let x: Vec<f64> = (0..input).map(|_| rng.random_range(0.0..1.0)).collect();
        let target = rng.random_range(0.0..1.0);
        let analytic = params.gradient(&x, target).unwrap().to_flat();
        let loss = |p: &MlpParams| 0.5 * (p.forward(&x).unwrap().0 - target).powi(2);
        let mut k = 0;
        for s in 0..params.slices().len() {
            for j in 0..params.slices()[s].len() {
                let orig = params.slices()[s][j];
                params.slices_mut()[s][j] = orig + EPS;
                let plus = loss(&params);
                params.slices_mut()[s][j] = orig - EPS;
                let minus = loss(&params);
                params.slices_mut()[s][j] = orig;
                let numeric = (plus - minus) / (2.0 * EPS);
                assert!(
                    close(analytic[k], numeric),
                    "entry {k}: {} vs {numeric}",
                    analytic[k]
                );
                k += 1;
            }
        }
    }
}

#[test]
fn zero_mlp_outputs_its_bias() {
    let mut params = MlpParams::init(4, &[8, 8], 1).unwrap().zeros_like();
    params.layers.last_mut().unwrap().bias[0] = 0.37;
    assert_eq!(params.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap().0, 0.37);
}

#[test]
fn init_is_seeded_and_default_sizes() {
    let cfg = ModelConfig {
        seed: 7,
        ..ModelConfig::default()
    };
    let a = PerSqModel::init(&cfg).unwrap();
    let b = PerSqModel::init(&cfg).unwrap();
    assert_eq!(a.params().to_flat(), b.params().to_flat());
    assert_eq!(a.hidden_sizes(), vec![50, 30, 20]);
    assert_eq!(a.params().layers[0].input_size(), FEATURE_WIDTH);
    assert_eq!(a.params().head.inputs(), 20);
}

#[test]
fn init_bounds_and_forget_bias() {
    let model = PerSqModel::init(&ModelConfig::default()).unwrap();
    for layer in &model.params().layers {
        let h = layer.hidden_size();
        let bound_in = 1.0 / (layer.input_size() as f64).sqrt();
        let bound_rec = 1.0 / (h as f64).sqrt();
        assert!(layer
            .input_weights
            .as_slice()
            .iter()
            .all(|w| w.abs() <= bound_in));
        assert!(layer
            .recurrent_weights
            .as_slice()
            .iter()
            .all(|w| w.abs() <= bound_rec));
        assert!(layer.gate_bias(Gate::Forget).iter().all(|b| *b == 1.0));
        for gate in [Gate::Input, Gate::Cell, Gate::Output] {
            assert!(
                layer.gate_bias(gate).iter().all(|b| *b == 0.0),
                "{}",
                gate.name()
            );
        }
    }
}

#[test]
fn zero_layer_is_an_argument_error() {
    let cfg = ModelConfig {
        hidden_sizes: vec![50, 0, 20],
        ..ModelConfig::default()
    };
    assert!(matches!(
        PerSqModel::init(&cfg),
        Err(ModelError::Argument(_))
    ));
}

#[test]
fn zero_network_predicts_zero() {
    let mut model = PerSqModel::init(&ModelConfig::default()).unwrap();
    let zeros = model.params().zeros_like();
    *model.params_mut() = zeros;
    let window = vec![FeatureVector::new(vec![0.5; FEATURE_WIDTH]).unwrap(); 4];
    let (y, _) = model.forward(&window, Mode::Eval).unwrap();
    assert_eq!(y, 0.0);
}

#[test]
fn eval_forward_is_deterministic_and_checks_shape() {
    let model = PerSqModel::init(&ModelConfig::default()).unwrap();
    let window = vec![FeatureVector::new(vec![0.25; FEATURE_WIDTH]).unwrap(); 4];
    let a = model.forward(&window, Mode::Eval).unwrap().0;
    let b = model.forward(&window, Mode::Eval).unwrap().0;
    assert_eq!(a.to_bits(), b.to_bits());
    assert!(matches!(
        model.forward(&window[..3], Mode::Eval),
        Err(ModelError::Shape(_))
    ));
}

#[test]
fn train_mode_replays_with_the_same_masks() {
    let cfg = ModelConfig {
        dropout_rate: 0.5,
        ..ModelConfig::default()
    };
    let model = PerSqModel::init(&cfg).unwrap();
    let seq: Vec<Vec<f64>> = (0..4)
        .map(|i| vec![0.1 * i as f64; FEATURE_WIDTH])
        .collect();
    let mut rng = ModelRng::seed_from_u64(99);
    let (y, cache) = model.forward_sequence(&seq, Mode::Train(&mut rng)).unwrap();

    let mut replay_rng = ModelRng::seed_from_u64(99);
    let masks = DropoutMasks::sample(&mut replay_rng, 0.5, &[50, 30, 20], 4);
    assert_eq!(cache.masks(), Some(&masks));
    let (replayed, _) = model.forward_with_masks(&seq, Some(masks)).unwrap();
    assert_eq!(y.to_bits(), replayed.to_bits());
    let (eval, _) = model.forward_sequence(&seq, Mode::Eval).unwrap();
    assert_ne!(y, eval);
}

#[test]
fn inverted_dropout_preserves_expectation() {
    let mut rng = ModelRng::seed_from_u64(4);
    let rate = 0.2;
    let activation = 0.7;
    let trials = 20_000;
    let mut sum = vec![0.0; 5];
    for _ in 0..trials {
        let m = DropoutMasks::sample(&mut rng, rate, &[5], 1);
        for (s, k) in sum.iter_mut().zip(&m.0[0][0]) {
            *s += activation * k;
        }
    }
    for s in sum {
        let mean = s / trials as f64;
        assert!((mean - activation).abs() / activation < 0.02, "{mean}");
    }
}

fn sq_scaler() -> Scaler {
    let mut scaler = Scaler {
        numeric: Default::default(),
        categorical: persq_core::features::default_categories(),
        sq: Some(Range {
            min: 0.0,
            max: 100.0,
        }),
        constant_features: Vec::new(),
    };
    for name in persq_core::features::NUMERIC_FEATURES {
        scaler
            .numeric
            .insert(name.to_string(), Range { min: 0.0, max: 1.0 });
    }
    scaler
}

/// Samples whose target is a fixed linear map of the target day's features
/// plus uniform noise of half-width `noise`.
fn noisy_linear_samples(n: usize, window_t: usize, seed: u64, noise: f64) -> Vec<WindowedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    (0..n)
        .map(|i| {
            let window: Vec<FeatureVector> = (0..=window_t)
                .map(|_| {
                    FeatureVector::new(
                        (0..FEATURE_WIDTH)
                            .map(|_| rng.random_range(0.0..1.0))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            let today = window.last().unwrap().values();
            let jitter = if noise > 0.0 {
                rng.random_range(-noise..noise)
            } else {
                0.0
            };
            let target_sq = 20.0 + 30.0 * today[0] + 20.0 * today[2] + 10.0 * today[11] + jitter;
            WindowedSample {
                user_id: "toy".into(),
                target_date: start + chrono::Days::new(i as u64),
                window,
                target_sq,
                prev_sq: Some(50.0),
            }
        })
        .collect()
}

fn linear_samples(n: usize, window_t: usize, seed: u64) -> Vec<WindowedSample> {
    noisy_linear_samples(n, window_t, seed, 0.0)
}

#[test]
fn training_lowers_loss_and_is_reproducible() {
    let samples = linear_samples(200, 1, 1);
    let cfg = ModelConfig {
        hidden_sizes: vec![8, 6, 4],
        window_t: 1,
        ..ModelConfig::default()
    };
    let train = TrainConfig {
        epochs: 40,
        early_stop_patience: None,
        ..TrainConfig::default()
    };
    let run = || {
        let mut m = PerSqModel::init(&cfg).unwrap().with_scaler(sq_scaler());
        let report = m.train(&samples, &train).unwrap();
        (m, report)
    };
    let (a, report) = run();
    let (b, again) = run();
    assert_eq!(report.loss_history, again.loss_history);
    assert_eq!(a.params().to_flat(), b.params().to_flat());
    assert_eq!(report.loss_history.len(), 40);
    let smooth = |h: &[f64]| h.iter().sum::<f64>() / h.len() as f64;
    let h = &report.loss_history;
    assert!(smooth(&h[h.len() - 10..]) < smooth(&h[..10]), "{h:?}");
}

#[test]
fn training_preconditions() {
    let mut m = PerSqModel::init(&ModelConfig::default())
        .unwrap()
        .with_scaler(sq_scaler());
    let zero_epochs = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    assert!(matches!(
        m.train(&linear_samples(4, 3, 2), &zero_epochs),
        Err(ModelError::Argument(_))
    ));
    assert!(matches!(
        m.train(&[], &TrainConfig::default()),
        Err(ModelError::Argument(_))
    ));
    let mut unscaled = PerSqModel::init(&ModelConfig::default()).unwrap();
    assert!(matches!(
        unscaled.train(&linear_samples(4, 3, 2), &TrainConfig::default()),
        Err(ModelError::State(_))
    ));
}

#[test]
fn divergence_names_the_epoch() {
    let mut m = PerSqModel::init(&ModelConfig {
        hidden_sizes: vec![4],
        window_t: 0,
        ..ModelConfig::default()
    })
    .unwrap()
    .with_scaler(sq_scaler());
    let mut samples = linear_samples(8, 0, 3);
    samples[0].target_sq = f64::MAX;
    let err = m.train(&samples, &TrainConfig::default()).unwrap_err();
    assert!(matches!(err, ModelError::Divergence { epoch: 1 }), "{err}");
}

#[test]
fn predictions_stay_in_percent_range() {
    let mut scaler = sq_scaler();
    scaler.sq = Some(Range {
        min: 60.0,
        max: 100.0,
    });
    let mut m = PerSqModel::init(&ModelConfig::default())
        .unwrap()
        .with_scaler(scaler);
    let bias = m.params().head.bias[0];
    for shift in [-50.0, 0.0, 50.0] {
        m.params_mut().head.bias[0] = bias + shift;
        for s in linear_samples(5, 3, 4) {
            let p = m.predict(&s).unwrap();
            assert!((0.0..=100.0).contains(&p), "{p}");
        }
    }
}

#[test]
fn persq_fits_linear_toy_within_twice_ols() {
    let train = noisy_linear_samples(300, 1, 5, 3.0);
    let test = noisy_linear_samples(60, 1, 6, 3.0);
    let ols = LinearBaseline::fit(&train, &sq_scaler()).unwrap();
    let rmse = |f: &dyn Fn(&WindowedSample) -> f64| {
        (test
            .iter()
            .map(|s| (f(s) - s.target_sq).powi(2))
            .sum::<f64>()
            / test.len() as f64)
            .sqrt()
    };
    let ols_rmse = rmse(&|s| ols.predict(s).unwrap());

    let mut m = PerSqModel::init(&ModelConfig {
        window_t: 1,
        dropout_rate: 0.0,
        ..ModelConfig::default()
    })
    .unwrap()
    .with_scaler(sq_scaler());
    m.train(&train, &TrainConfig::default()).unwrap();
    let persq_rmse = rmse(&|s| m.predict(s).unwrap());
    assert!(
        persq_rmse <= 2.0 * ols_rmse,
        "persq {persq_rmse} vs ols {ols_rmse}"
    );
}

fn pinv_solve(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let p = x[0].len() + 1;
    let a = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let pinv = a.pseudo_inverse(1e-12).unwrap();
    (pinv * DVector::from_column_slice(y))
        .iter()
        .copied()
        .collect()
}

#[test]
fn ols_matches_pseudo_inverse_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let p = rng.random_range(1..6);
        let n = rng.random_range(p + 2..40);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let fit = LinearRegression::fit(&x, &y).unwrap();
        assert!(!fit.ridge_used);
        let oracle = pinv_solve(&x, &y);
        assert!((fit.intercept - oracle[0]).abs() < 1e-8);
        for (c, o) in fit.coefficients.iter().zip(&oracle[1..]) {
            assert!((c - o).abs() < 1e-8, "{c} vs {o}");
        }
    }
}

#[test]
fn collinear_columns_take_the_ridge_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            let a: f64 = rng.random_range(-1.0..1.0);
            let group = (i % 3) as f64 / 2.0;
            vec![a, group, 1.0 - group]
        })
        .collect();
    let y: Vec<f64> = x
        .iter()
        .map(|r| 1.0 + 3.0 * r[0] + rng.random_range(-0.1..0.1))
        .collect();
    let fit = LinearRegression::fit(&x, &y).unwrap();
    assert!(fit.ridge_used);
    assert!(
        fit.coefficients.iter().all(|c| c.abs() < 10.0),
        "{:?}",
        fit.coefficients
    );
    let oracle = pinv_solve(&x, &y);
    for r in &x {
        let expected = oracle[0] + r.iter().zip(&oracle[1..]).map(|(a, b)| a * b).sum::<f64>();
        assert!((fit.predict(r).unwrap() - expected).abs() < 1e-3);
    }
}

#[test]
fn ols_recovers_exact_linear_map() {
    let x: Vec<Vec<f64>> = (0..30)
        .map(|i| vec![i as f64 / 30.0, ((i * 7) % 11) as f64 / 11.0])
        .collect();
    let y: Vec<f64> = x.iter().map(|r| 0.5 + 2.0 * r[0] - 1.5 * r[1]).collect();
    let fit = LinearRegression::fit(&x, &y).unwrap();
    for (r, t) in x.iter().zip(&y) {
        assert!((fit.predict(r).unwrap() - t).abs() <= 1e-8);
    }
}

#[test]
fn constant_target_gives_intercept_only() {
    let x: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![i as f64 / 20.0, ((i * 3) % 7) as f64])
        .collect();
    let fit = LinearRegression::fit(&x, &[4.0; 20]).unwrap();
    assert!((fit.intercept - 4.0).abs() < 1e-9);
    assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-9));
}

#[test]
fn too_few_samples_engage_ridge() {
    let x = vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 0.0]];
    let fit = LinearRegression::fit(&x, &[1.0, 2.0]).unwrap();
    assert!(fit.ridge_used);
    assert!(fit.coefficients.iter().all(|c| c.is_finite()));
}

#[test]
fn mlp_beats_linear_on_xor() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let samples: Vec<FlatSample> = (0..400)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            let target = if (a > 0.5) != (b > 0.5) { 1.0 } else { 0.0 };
            FlatSample {
                x: vec![a, b],
                target,
            }
        })
        .collect();
    let x: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.target).collect();
    let ols = LinearRegression::fit(&x, &y).unwrap();
    let ols_loss = samples
        .iter()
        .map(|s| (ols.predict(&s.x).unwrap() - s.target).powi(2))
        .sum::<f64>()
        / 400.0;

    let mut mlp = MlpBaseline::new(MlpParams::init(2, &[8, 8], 5).unwrap());
    let cfg = TrainConfig {
        learning_rate: 1e-2,
        epochs: 300,
        early_stop_patience: None,
        ..TrainConfig::default()
    };
    let report = mlp.train_flat(&samples, &cfg).unwrap();
    let final_loss = *report.loss_history.last().unwrap();
    assert!(
        final_loss < ols_loss,
        "mlp {final_loss} vs linear {ols_loss}"
    );
}

#[test]
fn checkpoint_round_trip_and_rejection() {
    let model = PerSqModel::init(&ModelConfig::default())
        .unwrap()
        .with_scaler(sq_scaler());
    let ckpt = Checkpoint::from_persq(&model).unwrap();
    let text = ckpt.to_json().unwrap();
    let restored = Checkpoint::from_json(&text).unwrap().into_persq().unwrap();
    assert_eq!(restored.params(), model.params());
    assert_eq!(restored.config(), model.config());

    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["model"]["hidden_sizes"] = serde_json::json!([50, 30, 21]);
    assert!(Checkpoint::from_json(&value.to_string()).is_err());

    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["model"]["params"]["layers"][1]["input_weights"]["cols"] = serde_json::json!(49);
    assert!(Checkpoint::from_json(&value.to_string()).is_err());

    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["format_version"] = serde_json::json!(99);
    assert!(Checkpoint::from_json(&value.to_string()).is_err());
}

#[test]
fn fine_tune_uses_lower_rate() {
    assert_eq!(TrainConfig::fine_tune().learning_rate, 1e-4);
    let mut m = PerSqModel::init(&ModelConfig {
        hidden_sizes: vec![4],
        window_t: 0,
        ..ModelConfig::default()
    })
    .unwrap()
    .with_scaler(sq_scaler());
    let before = m.params().clone();
    let cfg = TrainConfig {
        epochs: 2,
        ..TrainConfig::fine_tune()
    };
    m.fine_tune(&linear_samples(20, 0, 8), &cfg).unwrap();
    assert_ne!(m.params(), &before);
}
