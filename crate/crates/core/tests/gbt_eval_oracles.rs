mod common;

use lasml::dataset::{Column, Output};
use lasml::eval::{bootstrap_eval, cross_validate, diagnose, mse, r2, Diagnosis, DiagnosisRule, ModelSpec};
use lasml::gbt::{feature_importance, fit_gbt, split_gain, GbtConfig};
use lasml::model::{fit_model, Family, Target};
use lasml::synthetic;
use rand::Rng;

#[test]
fn split_gain_hand_case() {
    assert_eq!(split_gain(2.0, 1.0, -2.0, 1.0, 1.0, 0.0), 2.0);
    assert_eq!(split_gain(2.0, 1.0, -2.0, 1.0, 1.0, 0.5), 1.5);
}

#[test]
fn stump_finds_a_step() {
    let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 39.0, ((i * 7) % 11) as f64]).collect();
    let y: Vec<f64> = x.iter().map(|r| if r[0] < 0.5 { 1.0 } else { 3.0 }).collect();
    let cfg = GbtConfig {
        n_trees: 1,
        max_depth: 1,
        learning_rate: 1.0,
        lambda: 0.0,
        ..GbtConfig::default()
    };
    let m = fit_gbt(&x, &y, &cfg).unwrap();
    let splits: Vec<_> = m.trees[0].splits().collect();
    assert_eq!(splits.len(), 1);
    let (feature, threshold, _) = splits[0];
    assert_eq!(feature, 0);
    // Midpoint between the last 1.0 row (19/39) and the first 3.0 row (20/39).
    assert!((threshold - 19.5 / 39.0).abs() < 1e-12);
    for (r, t) in x.iter().zip(&y) {
        assert!((m.predict(r).unwrap() - t).abs() < 1e-12);
    }
}

#[test]
fn importance_concentrates_on_the_driving_feature() {
    let mut rng = common::rng(3);
    for driver in 0..4 {
        let x: Vec<Vec<f64>> = (0..150).map(|_| (0..4).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| 10.0 * r[driver] + rng.random_range(-0.05..0.05)).collect();
        let m = fit_gbt(&x, &y, &GbtConfig::default()).unwrap();
        let imp = feature_importance(&m);
        assert_eq!(imp[0].0, driver);
        assert!(imp[0].1 >= 0.9, "{imp:?}");
    }
}

#[test]
fn metric_identities() {
    let y = [3.0, -1.0, 4.0, 1.5, 9.0];
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert!(r2(&y, &[mean; 5]).unwrap().abs() < 1e-12);
    assert!((r2(&y, &y).unwrap() - 1.0).abs() < 1e-12);
    assert!((mse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

/// Leave-one-out by hand: refit without row i, predict row i, express the
/// error in the min-max frame of the full set.
fn loo_oracle(family: &Family, data: &lasml::dataset::Dataset) -> f64 {
    let depth = data.column(Column::Output(Output::Depth));
    let lo = depth.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = depth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = data.len();
    let mut total = 0.0;
    for (i, &measured) in depth.iter().enumerate() {
        let rest: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let model = fit_model(family, Target::Single(Output::Depth), &data.subset(&rest)).unwrap();
        let x = model.scale_params(&data.rows()[i].params).unwrap();
        let scaled = model.predict_scaled(&[x]).unwrap().mean[0][0];
        let r = model.scaler.range(Column::Output(Output::Depth)).unwrap();
        let physical = scaled * (r.max - r.min) + r.min;
        let err = (physical - lo) / (hi - lo) - (measured - lo) / (hi - lo);
        total += err * err;
    }
    total / n as f64
}

#[test]
fn cross_validation_with_k_equal_n_is_leave_one_out() {
    let data = synthetic::bundled();
    let small = data.subset(&(0..124).step_by(5).collect::<Vec<_>>());
    assert_eq!(small.len(), 25);
    for family in [Family::linear(), Family::poly(2), Family::gbt()] {
        let spec = ModelSpec::new("x", family.clone(), Target::Single(Output::Depth));
        let cv = cross_validate(&spec, &small, small.len(), 4).unwrap();
        let oracle = loo_oracle(&family, &small);
        assert!((cv - oracle).abs() <= 1e-9 * oracle.max(1.0), "{family}: {cv} vs {oracle}");
    }
}

#[test]
fn bootstrap_is_seeded_and_reports_spread() {
    let data = synthetic::bundled();
    let spec = ModelSpec::new("p2", Family::poly(2), Target::All);
    let a = bootstrap_eval(&spec, &data, 12, 0.2, 9).unwrap();
    assert_eq!(a, bootstrap_eval(&spec, &data, 12, 0.2, 9).unwrap());
    assert_ne!(a, bootstrap_eval(&spec, &data, 12, 0.2, 10).unwrap());
    assert_eq!(a.repeat_mse.len(), 12);
    assert!(a.mse_std > 0.0);
}

#[test]
fn diagnoses_of_reference_scores() {
    // Reference scores converted back from the ×100 MSE convention. The scaled
    // target variance follows from the linear row: R² = 1 − MSE/Var.
    let variance = 0.01925 / (1.0 - 0.676);
    let rule = DiagnosisRule::for_variance(variance);
    assert_eq!(diagnose(0.00676, 0.01769, &rule).unwrap(), Diagnosis::Overfit);
    assert_eq!(diagnose(0.03624, 0.03511, &rule).unwrap(), Diagnosis::Underfit);
}
