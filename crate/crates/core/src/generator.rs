//! Candidate laser parameters for inverse design: regular grids over the
//! machine ranges and a small tabular GAN trained on the measured inputs.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{fit_scaler, Column, Dataset, Feature, LaserParams, ScalerParams, CSV_HEADER, N_FEATURES};
use crate::error::{Error, Result};
use crate::mlp::{Activation, Adam, Network};
use crate::model::{ModelFile, MODEL_FORMAT_VERSION};

/// Largest grid `grid_candidates` will build.
pub const MAX_GRID: u64 = 10_000_000;

/// Consecutive low-variance epochs that count as mode collapse.
pub const COLLAPSE_PATIENCE: usize = 50;

const PROBE_SIZE: usize = 256;
const REAL_LABEL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Grid,
    Gan,
}

impl Source {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "grid" => Ok(Source::Grid),
            "gan" => Ok(Source::Gan),
            other => Err(Error::Config(format!("unknown candidate source '{other}' (grid|gan)"))),
        }
    }
}

/// Candidate parameter rows plus how they were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub source: Source,
    pub seed: Option<u64>,
    pub rows: Vec<LaserParams>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Dataset CSV layout without the geometry columns.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER[..N_FEATURES].join(",");
        out.push('\n');
        for p in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.frequency(),
                p.amplitude(),
                p.passes(),
                p.laser_distance()
            ));
        }
        out
    }
}

/// Evenly spaced values from `lo` to `hi`; a single count gives `lo`.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Number of grid points before passes are deduplicated.
pub fn grid_size(counts: [usize; N_FEATURES]) -> Result<u64> {
    if counts.contains(&0) {
        return Err(Error::Config("grid counts must be >= 1".into()));
    }
    counts
        .iter()
        .try_fold(1u64, |acc, &c| acc.checked_mul(c as u64))
        .filter(|&n| n <= MAX_GRID)
        .ok_or_else(|| Error::Size(format!("grid {counts:?} exceeds {MAX_GRID} candidates")))
}

/// Cartesian product of per-feature linearly spaced values. Passes are
/// rounded to integers and repeated values dropped, so the result can only
/// be smaller than the product of `counts`.
pub fn grid_candidates(ranges: [(f64, f64); N_FEATURES], counts: [usize; N_FEATURES]) -> Result<CandidateSet> {
    grid_size(counts)?;
    for (f, (lo, hi)) in Feature::ALL.iter().zip(ranges) {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!("invalid range [{lo}, {hi}] for {f}")));
        }
    }
    let mut axes: Vec<Vec<f64>> = (0..N_FEATURES)
        .map(|i| linspace(ranges[i].0, ranges[i].1, counts[i]))
        .collect();
    let passes = &mut axes[Feature::Passes.index()];
    for p in passes.iter_mut() {
        *p = p.round().max(1.0);
    }
    passes.dedup();

    let mut rows = Vec::with_capacity(axes.iter().map(Vec::len).product());
    for &f in &axes[0] {
        for &a in &axes[1] {
            for &n in &axes[2] {
                for &d in &axes[3] {
                    rows.push(LaserParams::new(f, a, n as u32, d)?);
                }
            }
        }
    }
    Ok(CandidateSet {
        source: Source::Grid,
        seed: None,
        rows,
    })
}

/// Nominal machine ranges of the four parameters.
pub fn table_ranges() -> [(f64, f64); N_FEATURES] {
    Feature::ALL.map(Feature::table_range)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    pub noise_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub collapse_std_floor: f64,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            noise_dim: 8,
            generator_hidden: vec![32, 32],
            discriminator_hidden: vec![32, 32],
            epochs: 3000,
            learning_rate: 1e-3,
            batch_size: 32,
            seed: 0,
            collapse_std_floor: 0.01,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.noise_dim > 0
            && self.batch_size > 0
            && self.generator_hidden.iter().chain(&self.discriminator_hidden).all(|&h| h > 0)
            && !self.generator_hidden.is_empty()
            && !self.discriminator_hidden.is_empty();
        if !positive {
            return Err(Error::Config("GAN sizes must be positive with at least one hidden layer".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if !(self.collapse_std_floor > 0.0 && self.collapse_std_floor < 0.5) {
            return Err(Error::Config(format!(
                "collapse_std_floor must lie in (0, 0.5), got {}",
                self.collapse_std_floor
            )));
        }
        Ok(())
    }

    fn generator_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.noise_dim];
        s.extend(&self.generator_hidden);
        s.push(N_FEATURES);
        s
    }

    fn discriminator_sizes(&self) -> Vec<usize> {
        let mut s = vec![N_FEATURES];
        s.extend(&self.discriminator_hidden);
        s.push(1);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GanEpoch {
    pub epoch: usize,
    pub discriminator_loss: f64,
    pub generator_loss: f64,
}

/// Trained generator/discriminator pair. The generator emits scaled
/// parameters in `(0, 1)^4`; `scaler` maps them back to physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanModel {
    pub config: GanConfig,
    pub scaler: ScalerParams,
    pub generator: Network,
    pub discriminator: Network,
    pub history: Vec<GanEpoch>,
}

fn noise(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, dim), || StandardNormal.sample(rng))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Binary cross-entropy on logits, `softplus(z) − y·z`, which is stable for large |z|.
fn bce_with_logits(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

/// Mean BCE over a logit column and its gradient with respect to the logits.
fn bce_batch(logits: &Array2<f64>, label: f64) -> (f64, Array2<f64>) {
    let n = logits.nrows() as f64;
    let loss = logits.iter().map(|&z| bce_with_logits(z, label)).sum::<f64>() / n;
    let grad = logits.mapv(|z| (sigmoid(z) - label) / n);
    (loss, grad)
}

fn column_std(x: &Array2<f64>) -> Vec<f64> {
    x.std_axis(Axis(0), 0.0).to_vec()
}

/// Alternating discriminator/generator steps on minibatches of the scaled
/// feature rows of `data`. One epoch is one shuffled pass over the rows.
pub fn train_gan(data: &Dataset, config: &GanConfig) -> Result<GanModel> {
    config.validate()?;
    if data.len() < 10 {
        return Err(Error::Config(format!("GAN training needs >= 10 rows, got {}", data.len())));
    }
    let columns: Vec<Column> = Column::features().collect();
    let scaler = fit_scaler(data, &columns)?;
    let real_rows = data
        .features()
        .iter()
        .map(|x| scaler.scale_features(x))
        .collect::<Result<Vec<_>>>()?;
    let real = Array2::from_shape_fn((real_rows.len(), N_FEATURES), |(i, j)| real_rows[i][j]);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut generator = Network::init(
        &config.generator_sizes(),
        Activation::LeakyRelu,
        Activation::Sigmoid,
        &mut rng,
    )?;
    let mut discriminator = Network::init(
        &config.discriminator_sizes(),
        Activation::LeakyRelu,
        Activation::Identity,
        &mut rng,
    )?;
    let mut g_opt = Adam::new(&generator, config.learning_rate);
    let mut d_opt = Adam::new(&discriminator, config.learning_rate);
    g_opt.beta1 = 0.5;
    d_opt.beta1 = 0.5;
    let probe = noise(&mut rng, PROBE_SIZE, config.noise_dim);

    let n = real.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut low_streak = 0usize;
    for epoch in 0..config.epochs {
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let (mut d_total, mut g_total, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let real_batch = real.select(Axis(0), chunk);
            let m = chunk.len();

            // Discriminator step: real rows labelled 0.9, generated rows 0.
            let fake = generator.forward(noise(&mut rng, m, config.noise_dim).view())?;
            let real_cache = discriminator.forward_cached(real_batch.view())?;
            let fake_cache = discriminator.forward_cached(fake.view())?;
            let (l_real, g_real) = bce_batch(real_cache.output(), REAL_LABEL);
            let (l_fake, g_fake) = bce_batch(fake_cache.output(), 0.0);
            let (mut d_grads, _) = discriminator.backward(&real_cache, &g_real)?;
            let (d_fake_grads, _) = discriminator.backward(&fake_cache, &g_fake)?;
            d_grads.add_assign(&d_fake_grads);
            d_opt.update(&mut discriminator, &d_grads);

            // Generator step with the non-saturating loss −log D(G(z)).
            let z = noise(&mut rng, m, config.noise_dim);
            let g_cache = generator.forward_cached(z.view())?;
            let d_cache = discriminator.forward_cached(g_cache.output().view())?;
            let (l_gen, g_logit) = bce_batch(d_cache.output(), 1.0);
            let (_, d_sample) = discriminator.backward(&d_cache, &g_logit)?;
            let (g_grads, _) = generator.backward(&g_cache, &d_sample)?;
            g_opt.update(&mut generator, &g_grads);

            d_total += l_real + l_fake;
            g_total += l_gen;
            batches += 1;
        }
        let record = GanEpoch {
            epoch,
            discriminator_loss: d_total / batches as f64,
            generator_loss: g_total / batches as f64,
        };
        if !(record.discriminator_loss.is_finite() && record.generator_loss.is_finite()) {
            return Err(Error::Training {
                epoch,
                message: "non-finite GAN loss".into(),
            });
        }
        history.push(record);

        let stds = column_std(&generator.forward(probe.view())?);
        let (feature, std) = stds
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best });
        if std < config.collapse_std_floor {
            low_streak += 1;
            if low_streak >= COLLAPSE_PATIENCE {
                return Err(Error::ModeCollapse { epoch, feature, std });
            }
        } else {
            low_streak = 0;
        }
    }
    Ok(GanModel {
        config: config.clone(),
        scaler,
        generator,
        discriminator,
        history,
    })
}

impl GanModel {
    /// `n` generator samples in scaled space, seeded independently of training.
    pub fn sample_scaled(&self, n: usize, seed: u64) -> Result<Array2<f64>> {
        if n == 0 {
            return Ok(Array2::zeros((0, N_FEATURES)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.generator.forward(noise(&mut rng, n, self.config.noise_dim).view())
    }

    /// Discriminator probability that each scaled row is real.
    pub fn discriminate(&self, scaled: &Array2<f64>) -> Result<Vec<f64>> {
        Ok(self.discriminator.forward(scaled.view())?.iter().map(|&z| sigmoid(z)).collect())
    }

    pub fn to_file(&self) -> Result<ModelFile> {
        Ok(ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            family: "gan".into(),
            scalers: self.scaler.clone(),
            parameters: serde_json::to_value(GanParameters {
                config: self.config.clone(),
                generator: self.generator.clone(),
                discriminator: self.discriminator.clone(),
                history: self.history.clone(),
            })?,
        })
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        file.check_version()?;
        if file.family != "gan" {
            return Err(Error::Format(format!("expected a GAN file, found family '{}'", file.family)));
        }
        let p: GanParameters = serde_json::from_value(file.parameters)?;
        Ok(Self {
            config: p.config,
            scaler: file.scalers,
            generator: p.generator,
            discriminator: p.discriminator,
            history: p.history,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file()?)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GanParameters {
    config: GanConfig,
    generator: Network,
    discriminator: Network,
    history: Vec<GanEpoch>,
}

/// `n` generated parameter rows in physical units, passes rounded.
pub fn sample_gan(model: &GanModel, n: usize, seed: u64) -> Result<CandidateSet> {
    let scaled = model.sample_scaled(n, seed)?;
    let rows = scaled
        .rows()
        .into_iter()
        .map(|r| {
            let x = model.scaler.unscale_features(&[r[0], r[1], r[2], r[3]])?;
            LaserParams::from_features(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidateSet {
        source: Source::Gan,
        seed: Some(seed),
        rows,
    })
}

/// Uniformly random parameter rows inside `ranges`, for callers that want
/// unstructured candidates without training a GAN.
pub fn uniform_candidates(ranges: [(f64, f64); N_FEATURES], n: usize, seed: u64) -> Result<CandidateSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let x = ranges.map(|(lo, hi)| rng.random_range(lo..=hi));
            LaserParams::from_features(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidateSet {
        source: Source::Grid,
        seed: Some(seed),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn default_grid_has_54000_rows() {
        let counts = [15, 15, 16, 15];
        assert_eq!(grid_size(counts).unwrap(), 54_000);
        let grid = grid_candidates(table_ranges(), counts).unwrap();
        assert_eq!(grid.len(), 54_000);
        let ranges = table_ranges();
        for p in &grid.rows {
            for f in Feature::ALL {
                let (lo, hi) = ranges[f.index()];
                let v = p.get(f);
                assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{f} = {v}");
            }
        }
    }

    #[test]
    fn unit_grid_sits_at_minima() {
        let grid = grid_candidates(table_ranges(), [1, 1, 1, 1]).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid.rows[0].features(), table_ranges().map(|r| r.0));
    }

    #[test]
    fn passes_dedup_only_shrinks() {
        let grid = grid_candidates(table_ranges(), [2, 2, 400, 2]).unwrap();
        assert_eq!(grid.len(), 2 * 2 * 151 * 2);
        assert!(grid.len() as u64 <= grid_size([2, 2, 400, 2]).unwrap());
    }

    #[test]
    fn oversized_and_empty_grids_are_rejected() {
        assert!(matches!(grid_size([1000, 1000, 100, 2]), Err(Error::Size(_))));
        assert!(matches!(grid_size([0, 1, 1, 1]), Err(Error::Config(_))));
        assert!(matches!(grid_size([usize::MAX, usize::MAX, 2, 2]), Err(Error::Size(_))));
    }

    #[test]
    fn candidate_csv_header() {
        let grid = grid_candidates(table_ranges(), [1, 1, 1, 1]).unwrap();
        assert_eq!(
            grid.to_csv(),
            "frequency_hz,amplitude_mm,passes,laser_distance_mm\n200,0.1,10,91.676\n"
        );
    }

    #[test]
    fn bce_gradient_matches_finite_difference() {
        for &(z, y) in &[(0.3, 0.9), (-4.0, 0.0), (12.0, 1.0)] {
            let h = 1e-6;
            let fd = (bce_with_logits(z + h, y) - bce_with_logits(z - h, y)) / (2.0 * h);
            assert!((fd - (sigmoid(z) - y)).abs() < 1e-7);
        }
        assert!(bce_with_logits(-800.0, 1.0).is_finite());
    }

    fn short_config(seed: u64) -> GanConfig {
        GanConfig {
            epochs: 20,
            seed,
            ..GanConfig::default()
        }
    }

    #[test]
    fn gan_is_deterministic_and_in_unit_cube() {
        let data = synthetic::bundled();
        let a = train_gan(&data, &short_config(3)).unwrap();
        let b = train_gan(&data, &short_config(3)).unwrap();
        assert_eq!(a.generator, b.generator);
        let s = a.sample_scaled(200, 1).unwrap();
        assert!(s.iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(sample_gan(&a, 0, 1).unwrap().len(), 0);
        let back = GanModel::from_file(a.to_file().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn gan_rejects_bad_config() {
        let data = synthetic::bundled();
        let mut cfg = short_config(0);
        cfg.collapse_std_floor = 0.5;
        assert!(matches!(train_gan(&data, &cfg), Err(Error::Config(_))));
        assert!(train_gan(&data.subset(&[0, 1, 2]), &short_config(0)).is_err());
    }

    #[test]
    fn collapse_is_reported() {
        // A floor no generator spread can clear triggers the detector after
        // exactly the patience window.
        let data = synthetic::bundled();
        let cfg = GanConfig {
            epochs: 200,
            collapse_std_floor: 0.49,
            ..GanConfig::default()
        };
        match train_gan(&data, &cfg) {
            Err(Error::ModeCollapse { epoch, .. }) => assert_eq!(epoch, COLLAPSE_PATIENCE - 1),
            other => panic!("expected collapse, got {other:?}"),
        }
    }
}
