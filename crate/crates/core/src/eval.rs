//! Metrics, cross-validation, bootstrapping, fit diagnosis and model
//! comparison.
//!
//! All errors are measured in a fixed min-max frame: the output ranges of the
//! dataset handed to the top-level call. Models themselves are always fitted
//! with scalers from their own training rows; the frame only converts µm
//! errors into unit-free numbers so families and folds are comparable.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{fit_full_scaler, Column, kfold_indices, split_indices, Dataset, Output, ScalerParams};
use crate::error::{Error, Result};
use crate::mlp::MlpConfig;
use crate::model::{fit_model, Family, Target};

pub const TABLE_FORMAT_VERSION: u32 = 1;

pub fn mse(y: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y.len() != y_pred.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {} targets vs {} predictions",
            y.len(),
            y_pred.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Metric("empty input".into()));
    }
    Ok(y.iter().zip(y_pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

/// `1 − RSS/TSS`.
pub fn r2(y: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y.len() != y_pred.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {} targets vs {} predictions",
            y.len(),
            y_pred.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::Metric("r2 needs at least two points".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if !(tss > 0.0) {
        return Err(Error::Metric("constant target (TSS = 0)".into()));
    }
    let rss: f64 = y.iter().zip(y_pred).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - rss / tss)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One model family applied to one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub label: String,
    pub family: Family,
    pub target: Target,
}

impl ModelSpec {
    pub fn new(label: impl Into<String>, family: Family, target: Target) -> Self {
        Self {
            label: label.into(),
            family,
            target,
        }
    }

    /// Linear, second to fourth order polynomials, boosted trees and the /64/32/ network.
    pub fn default_set(target: Target, seed: u64) -> Vec<ModelSpec> {
        vec![
            ModelSpec::new("linear", Family::linear(), target),
            ModelSpec::new("poly2", Family::poly(2), target),
            ModelSpec::new("poly3", Family::poly(3), target),
            ModelSpec::new("poly4", Family::poly(4), target),
            ModelSpec::new("gbt", Family::gbt().with_seed(seed), target),
            ModelSpec::new("mlp", Family::mlp(&[64, 32], seed), target),
        ]
    }
}

/// Output ranges used to express errors without units.
#[derive(Debug, Clone)]
pub struct MetricFrame {
    scaler: ScalerParams,
}

impl MetricFrame {
    pub fn of(data: &Dataset) -> Result<Self> {
        Ok(Self {
            scaler: fit_full_scaler(data)?,
        })
    }

    fn scaled_targets(&self, data: &Dataset, targets: &[Output]) -> Result<Vec<Vec<f64>>> {
        data.rows()
            .iter()
            .map(|r| {
                let y = self.scaler.scale_outputs(&r.geometry.to_array())?;
                Ok(targets.iter().map(|o| y[o.index()]).collect())
            })
            .collect()
    }
}

/// Measured and predicted values for one held-out row and output, in the
/// metric frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub output: Output,
    pub measured: f64,
    pub predicted: f64,
}

/// Fits `spec` on `train` and predicts `test`; pairs are per row, per target.
pub fn fit_and_predict(spec: &ModelSpec, train: &Dataset, test: &Dataset, frame: &MetricFrame) -> Result<Vec<Pair>> {
    let model = fit_model(&spec.family, spec.target, train)?;
    let targets = spec.target.outputs();
    let x = test
        .rows()
        .iter()
        .map(|r| model.scale_params(&r.params))
        .collect::<Result<Vec<_>>>()?;
    let pred = model.predict_scaled(&x)?;
    let measured = frame.scaled_targets(test, &targets)?;
    let mut pairs = Vec::with_capacity(test.len() * targets.len());
    for (m, p) in measured.iter().zip(&pred.mean) {
        for (j, o) in targets.iter().enumerate() {
            let r = model.scaler.range(Column::Output(*o))?;
            let physical = p[j] * (r.max - r.min) + r.min;
            let predicted = frame.scaler.scale(physical, Column::Output(*o))?;
            pairs.push(Pair {
                output: *o,
                measured: m[j],
                predicted,
            });
        }
    }
    Ok(pairs)
}

fn pair_mse(pairs: &[Pair]) -> Result<f64> {
    let (y, p): (Vec<f64>, Vec<f64>) = pairs.iter().map(|q| (q.measured, q.predicted)).unzip();
    mse(&y, &p)
}

/// Mean R² over the outputs present in `pairs`.
fn pair_r2(pairs: &[Pair]) -> Result<f64> {
    let mut outputs: Vec<Output> = pairs.iter().map(|p| p.output).collect();
    outputs.sort();
    outputs.dedup();
    let mut total = 0.0;
    for o in &outputs {
        let (y, p): (Vec<f64>, Vec<f64>) = pairs
            .iter()
            .filter(|q| q.output == *o)
            .map(|q| (q.measured, q.predicted))
            .unzip();
        total += r2(&y, &p)?;
    }
    Ok(total / outputs.len() as f64)
}

pub fn cross_validate_in(spec: &ModelSpec, train: &Dataset, k: usize, seed: u64, frame: &MetricFrame) -> Result<f64> {
    let folds = kfold_indices(train.len(), k, seed)?;
    let scores = folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            // Ascending row order, so a fold's model does not depend on how
            // the other folds were shuffled.
            let mut rest: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            rest.sort_unstable();
            let pairs = fit_and_predict(spec, &train.subset(&rest), &train.subset(fold), frame)
                .map_err(|e| e.context(format!("fold {i}")))?;
            pair_mse(&pairs)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Average validation-fold MSE over `k` folds of `train`.
pub fn cross_validate(spec: &ModelSpec, train: &Dataset, k: usize, seed: u64) -> Result<f64> {
    cross_validate_in(spec, train, k, seed, &MetricFrame::of(train)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mse_mean: f64,
    pub mse_std: f64,
    pub r2_mean: f64,
    pub r2_std: f64,
    pub repeat_mse: Vec<f64>,
    pub repeat_r2: Vec<f64>,
}

/// Train/test index pairs for repeats `0..repeats`, split `r` seeded with `seed + r`.
pub fn bootstrap_splits(n: usize, repeats: usize, test_fraction: f64, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    (0..repeats)
        .map(|r| split_indices(n, test_fraction, seed.wrapping_add(r as u64)))
        .collect()
}

pub fn bootstrap_eval_in(
    spec: &ModelSpec,
    data: &Dataset,
    repeats: usize,
    test_fraction: f64,
    seed: u64,
    frame: &MetricFrame,
) -> Result<BootstrapSummary> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be >= 1".into()));
    }
    let splits = bootstrap_splits(data.len(), repeats, test_fraction, seed)?;
    let results = splits
        .par_iter()
        .enumerate()
        .map(|(r, (train, test))| {
            let pairs = fit_and_predict(spec, &data.subset(train), &data.subset(test), frame)
                .map_err(|e| e.context(format!("repeat {r}")))?;
            Ok((pair_mse(&pairs)?, pair_r2(&pairs).map_err(|e| e.context(format!("repeat {r}")))?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (repeat_mse, repeat_r2): (Vec<f64>, Vec<f64>) = results.into_iter().unzip();
    let (mse_mean, mse_std) = mean_std(&repeat_mse);
    let (r2_mean, r2_std) = mean_std(&repeat_r2);
    Ok(BootstrapSummary {
        mse_mean,
        mse_std,
        r2_mean,
        r2_std,
        repeat_mse,
        repeat_r2,
    })
}

/// Repeated random train/test splits with refitting.
pub fn bootstrap_eval(spec: &ModelSpec, data: &Dataset, repeats: usize, test_fraction: f64, seed: u64) -> Result<BootstrapSummary> {
    bootstrap_eval_in(spec, data, repeats, test_fraction, seed, &MetricFrame::of(data)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnosis {
    Ok,
    Overfit,
    Underfit,
}

impl Diagnosis {
    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::Ok => "ok",
            Diagnosis::Overfit => "overfit",
            Diagnosis::Underfit => "underfit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisRule {
    /// Overfit when `test_mse / cv_mse` exceeds this.
    pub ratio_threshold: f64,
    /// Underfit when both MSEs exceed this.
    pub underfit_threshold: f64,
}

impl DiagnosisRule {
    pub const DEFAULT_RATIO: f64 = 2.0;
    pub const DEFAULT_VARIANCE_FRACTION: f64 = 0.5;

    /// Default thresholds for a scaled target with the given variance.
    pub fn for_variance(target_variance: f64) -> Self {
        Self {
            ratio_threshold: Self::DEFAULT_RATIO,
            underfit_threshold: Self::DEFAULT_VARIANCE_FRACTION * target_variance,
        }
    }
}

pub fn diagnose(cv_mse: f64, test_mse: f64, rule: &DiagnosisRule) -> Result<Diagnosis> {
    if !(cv_mse >= 0.0) || !(test_mse >= 0.0) {
        return Err(Error::Metric(format!(
            "MSEs must be >= 0, got cv {cv_mse}, test {test_mse}"
        )));
    }
    if cv_mse == 0.0 {
        return Ok(if test_mse > 0.0 { Diagnosis::Overfit } else { Diagnosis::Ok });
    }
    if test_mse / cv_mse > rule.ratio_threshold {
        return Ok(Diagnosis::Overfit);
    }
    if cv_mse > rule.underfit_threshold && test_mse > rule.underfit_threshold {
        return Ok(Diagnosis::Underfit);
    }
    Ok(Diagnosis::Ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub k: usize,
    pub repeats: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            k: 10,
            repeats: 100,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

/// One comparison-table row. MSEs are raw (not ×100).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cv_mse: f64,
    pub test_mse: f64,
    pub bootstrap_mse_mean: f64,
    pub bootstrap_mse_std: f64,
    pub r2_mean: f64,
    pub wall_time_s: f64,
    pub diagnosis: Diagnosis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub family: String,
    #[serde(flatten)]
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOutcome {
    Report(EvalReport),
    Error { code: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub label: String,
    pub output: Output,
    pub measured: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub format_version: u32,
    pub protocol: Protocol,
    pub target_variance: f64,
    pub rows: Vec<ComparisonRow>,
    #[serde(skip)]
    pub scatter: Vec<ScatterPoint>,
}

fn evaluate_spec(
    spec: &ModelSpec,
    data: &Dataset,
    train: &Dataset,
    test: &Dataset,
    protocol: &Protocol,
    frame: &MetricFrame,
    rule: &DiagnosisRule,
) -> Result<(EvalReport, Vec<Pair>)> {
    let start = Instant::now();
    let cv_mse = cross_validate_in(spec, train, protocol.k, protocol.seed, frame)?;
    let pairs = fit_and_predict(spec, train, test, frame)?;
    let test_mse = pair_mse(&pairs)?;
    let boot = bootstrap_eval_in(spec, data, protocol.repeats, protocol.test_fraction, protocol.seed, frame)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    Ok((
        EvalReport {
            cv_mse,
            test_mse,
            bootstrap_mse_mean: boot.mse_mean,
            bootstrap_mse_std: boot.mse_std,
            r2_mean: boot.r2_mean,
            wall_time_s,
            diagnosis: diagnose(cv_mse, test_mse, rule)?,
        },
        pairs,
    ))
}

/// Evaluates every spec under the same protocol: an initial train/test split,
/// k-fold CV on the training part, the held-out test MSE, and bootstrap
/// repeats over the full dataset. A failing spec yields an error row and
/// does not abort the others.
pub fn compare_models(data: &Dataset, specs: &[ModelSpec], protocol: &Protocol) -> Result<Comparison> {
    if specs.is_empty() {
        return Err(Error::Config("at least one model spec is required".into()));
    }
    let mut labels: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("model spec labels must be unique".into()));
    }
    let frame = MetricFrame::of(data)?;
    let (train_idx, test_idx) = split_indices(data.len(), protocol.test_fraction, protocol.seed)?;
    let (train, test) = (data.subset(&train_idx), data.subset(&test_idx));

    let mut target_variance = 0.0;
    let mut rows = Vec::with_capacity(specs.len());
    let mut scatter = Vec::new();
    for spec in specs {
        let targets = spec.target.outputs();
        let scaled = frame.scaled_targets(&train, &targets)?;
        let var = (0..targets.len())
            .map(|j| {
                let col: Vec<f64> = scaled.iter().map(|y| y[j]).collect();
                mean_std(&col).1.powi(2)
            })
            .sum::<f64>()
            / targets.len() as f64;
        target_variance = var;
        let rule = DiagnosisRule::for_variance(var);
        let outcome = match evaluate_spec(spec, data, &train, &test, protocol, &frame, &rule) {
            Ok((report, pairs)) => {
                scatter.extend(pairs.into_iter().map(|p| ScatterPoint {
                    label: spec.label.clone(),
                    output: p.output,
                    measured: p.measured,
                    predicted: p.predicted,
                }));
                RowOutcome::Report(report)
            }
            Err(e) => RowOutcome::Error {
                code: e.code().to_string(),
                message: e.to_string(),
            },
        };
        rows.push(ComparisonRow {
            label: spec.label.clone(),
            family: spec.family.name().to_string(),
            outcome,
        });
    }
    Ok(Comparison {
        format_version: TABLE_FORMAT_VERSION,
        protocol: *protocol,
        target_variance,
        rows,
        scatter,
    })
}

impl Comparison {
    pub fn report(&self, label: &str) -> Option<&EvalReport> {
        self.rows.iter().find(|r| r.label == label).and_then(|r| match &r.outcome {
            RowOutcome::Report(rep) => Some(rep),
            RowOutcome::Error { .. } => None,
        })
    }

    /// Table as CSV with raw and ×100 MSE columns. Wall times are included
    /// only on request so the default output is reproducible byte for byte.
    pub fn to_csv(&self, with_timings: bool) -> String {
        let mut out = String::from(
            "label,family,cv_mse,test_mse,bootstrap_mse_mean,bootstrap_mse_std,r2_mean,\
             cv_mse_x100,test_mse_x100,bootstrap_mse_mean_x100,diagnosis,error",
        );
        if with_timings {
            out.push_str(",wall_time_s");
        }
        out.push('\n');
        for row in &self.rows {
            match &row.outcome {
                RowOutcome::Report(r) => {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{},",
                        row.label,
                        row.family,
                        r.cv_mse,
                        r.test_mse,
                        r.bootstrap_mse_mean,
                        r.bootstrap_mse_std,
                        r.r2_mean,
                        r.cv_mse * 100.0,
                        r.test_mse * 100.0,
                        r.bootstrap_mse_mean * 100.0,
                        r.diagnosis.as_str(),
                    ));
                    if with_timings {
                        out.push_str(&format!(",{:.3}", r.wall_time_s));
                    }
                }
                RowOutcome::Error { code, .. } => {
                    out.push_str(&format!("{},{},,,,,,,,,,{}", row.label, row.family, code));
                    if with_timings {
                        out.push(',');
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, with_timings: bool) -> Result<String> {
        let mut doc = self.clone();
        if !with_timings {
            for row in &mut doc.rows {
                if let RowOutcome::Report(r) = &mut row.outcome {
                    r.wall_time_s = 0.0;
                }
            }
        }
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// `spec_label,output_name,measured,predicted` for the held-out split.
    pub fn scatter_csv(&self) -> String {
        let mut out = String::from("spec_label,output_name,measured,predicted\n");
        for p in &self.scatter {
            out.push_str(&format!("{},{},{},{}\n", p.label, p.output, p.measured, p.predicted));
        }
        out
    }
}

/// Hidden-layer shapes compared by default; includes /64/32/.
pub fn default_structures() -> Vec<Vec<usize>> {
    vec![
        vec![32],
        vec![64],
        vec![128],
        vec![32, 16],
        vec![64, 32],
        vec![64, 64],
        vec![128, 64],
        vec![32, 32, 16],
        vec![64, 32, 16],
        vec![128, 64, 32],
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub hidden: Vec<usize>,
    pub r2_mean: f64,
    pub r2_std: f64,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub wall_time_mean_s: f64,
}

impl SweepRow {
    pub fn structure_label(&self) -> String {
        format!(
            "/{}/",
            self.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join("/")
        )
    }
}

/// Bootstraps each hidden-layer structure over the same split sequence.
pub fn sweep_nn_structures(
    data: &Dataset,
    structures: &[Vec<usize>],
    target: Target,
    repeats: usize,
    test_fraction: f64,
    base: &MlpConfig,
) -> Result<Vec<SweepRow>> {
    if structures.is_empty() {
        return Err(Error::Config("at least one structure is required".into()));
    }
    let frame = MetricFrame::of(data)?;
    structures
        .iter()
        .map(|hidden| {
            let mut config = MlpConfig::with_hidden(base.layer_sizes[0], hidden, 1);
            config.hidden_activation = base.hidden_activation;
            config.learning_rate = base.learning_rate;
            config.max_epochs = base.max_epochs;
            config.early_stop_patience = base.early_stop_patience;
            config.seed = base.seed;
            let spec = ModelSpec::new("sweep", Family::Mlp { config, n_init: 1 }, target);
            let start = Instant::now();
            let boot = bootstrap_eval_in(&spec, data, repeats, test_fraction, base.seed, &frame)
                .map_err(|e| e.context(format!("structure {hidden:?}")))?;
            Ok(SweepRow {
                hidden: hidden.clone(),
                r2_mean: boot.r2_mean,
                r2_std: boot.r2_std,
                mse_mean: boot.mse_mean,
                mse_std: boot.mse_std,
                wall_time_mean_s: start.elapsed().as_secs_f64() / repeats as f64,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow], with_timings: bool) -> String {
    let mut out = String::from("structure,r2_mean,r2_std,mse_mean,mse_std");
    if with_timings {
        out.push_str(",wall_time_mean_s");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}",
            r.structure_label(),
            r.r2_mean,
            r.r2_std,
            r.mse_mean,
            r.mse_std
        ));
        if with_timings {
            out.push_str(&format!(",{:.3}", r.wall_time_mean_s));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn r2_cases() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(r2(&y, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!((r2(&y, &[1.0, 2.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(r2(&[4.0, 4.0], &[4.0, 4.0]), Err(Error::Metric(_))));
        assert!(r2(&[4.0], &[4.0]).is_err());
    }

    #[test]
    fn diagnosis_cases() {
        let rule = DiagnosisRule {
            ratio_threshold: 2.0,
            underfit_threshold: 0.03,
        };
        assert_eq!(diagnose(0.00676, 0.01769, &rule).unwrap(), Diagnosis::Overfit);
        assert_eq!(diagnose(0.02, 0.02, &rule).unwrap(), Diagnosis::Ok);
        assert_eq!(diagnose(0.03624, 0.03511, &rule).unwrap(), Diagnosis::Underfit);
        assert_eq!(diagnose(0.0, 0.1, &rule).unwrap(), Diagnosis::Overfit);
        assert_eq!(diagnose(0.0, 0.0, &rule).unwrap(), Diagnosis::Ok);
        assert!(diagnose(-1.0, 0.0, &rule).is_err());
    }

    #[test]
    fn default_sets() {
        let labels: Vec<String> = ModelSpec::default_set(Target::Single(Output::Depth), 0)
            .into_iter()
            .map(|s| s.label)
            .collect();
        assert_eq!(labels, ["linear", "poly2", "poly3", "poly4", "gbt", "mlp"]);
        assert!(default_structures().contains(&vec![64, 32]));
        assert_eq!(default_structures().len(), 10);
    }

    proptest::proptest! {
        #[test]
        fn mse_scales_quadratically_and_ignores_order(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
            alpha in -5.0f64..5.0,
        ) {
            let (y, p): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let base = mse(&y, &p).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| alpha * v).collect();
            let ps: Vec<f64> = p.iter().map(|v| alpha * v).collect();
            let scaled = mse(&ys, &ps).unwrap();
            proptest::prop_assert!((scaled - alpha * alpha * base).abs() <= 1e-9 * (1.0 + scaled.abs()));
            let (yr, pr): (Vec<f64>, Vec<f64>) = pairs.iter().rev().copied().unzip();
            proptest::prop_assert!((mse(&yr, &pr).unwrap() - base).abs() <= 1e-12 * (1.0 + base));
        }
    }
}
