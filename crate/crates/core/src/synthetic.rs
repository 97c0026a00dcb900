//! Seeded synthetic stand-in for the experimental channel measurements.
//!
//! The generator lays out 124 runs as one-at-a-time sweeps (three parameters
//! fixed, one varied), matching how the real campaign was organised, and
//! evaluates a smooth response surface with multiplicative noise:
//!
//! - depth rises with the number of passes and saturates above ~40 passes,
//!   grows with the laser-substrate distance and falls as the frequency rises
//!   towards 500 Hz;
//! - both widths dip around an amplitude of 0.5 mm, the top width barely
//!   depends on the number of passes;
//! - the bottom width collapses beyond ~45 passes and at larger distances,
//!   turning the cross-section triangular.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{ChannelGeometry, Dataset, Feature, LaserParams, N_FEATURES, N_OUTPUTS};

/// Seed of the bundled dataset.
pub const BUNDLED_SEED: u64 = 2022;
/// Row count of the bundled dataset.
pub const BUNDLED_ROWS: usize = 124;

/// The bundled dataset as CSV text, byte-identical to `generate(BUNDLED_SEED)`.
pub const BUNDLED_CSV: &str = include_str!("../data/laser_channels_synthetic.csv");

const FREQUENCY_LEVELS: [f64; 8] = [200.0, 300.0, 400.0, 500.0, 700.0, 900.0, 1200.0, 1600.0];
const AMPLITUDE_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2];
const PASSES_LEVELS: [f64; 11] = [10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 80.0, 120.0, 160.0];
const DISTANCE_LEVELS: [f64; 7] = [91.676, 91.9, 92.2, 92.5, 92.8, 93.0, 93.2];

/// (varied feature, number of groups, points per group); 4·8 + 4·8 + 5·6 + 5·6 = 124.
const SWEEPS: [(Feature, usize, usize); 4] = [
    (Feature::Amplitude, 4, 8),
    (Feature::Passes, 4, 8),
    (Feature::LaserDistance, 5, 6),
    (Feature::Frequency, 5, 6),
];

fn levels(feature: Feature) -> &'static [f64] {
    match feature {
        Feature::Frequency => &FREQUENCY_LEVELS,
        Feature::Amplitude => &AMPLITUDE_LEVELS,
        Feature::Passes => &PASSES_LEVELS,
        Feature::LaserDistance => &DISTANCE_LEVELS,
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Noise-free response surface `[depth, top_width, bottom_width]` in µm for
/// a raw feature vector `[frequency, amplitude, passes, laser_distance]`.
pub fn channel_truth(x: [f64; N_FEATURES]) -> [f64; N_OUTPUTS] {
    let [f, a, n, dist] = x;
    let (d_lo, d_hi) = Feature::LaserDistance.table_range();
    let t = (dist - d_lo) / (d_hi - d_lo);

    let saturation = 1.0 - (-n / 14.0).exp();
    let slow_wobble = 1.0 + 0.5 * sigmoid((350.0 - f) / 60.0);
    let focus = 0.9 + 0.2 * t;
    let amp = 1.0 - 0.12 * (a - 0.6).powi(2);
    let depth = 480.0 * saturation * slow_wobble * focus * amp;

    let dip = (a - 0.5).abs().powf(1.2);
    let top = 430.0 + 420.0 * dip + 20.0 * (t - 0.5) - 0.02 * (f - 900.0);

    let open = sigmoid((45.0 - n) / 7.0);
    let ratio = 0.45 * open * (1.15 - 0.6 * t) * (0.8 + 0.4 * (a - 0.5).abs());
    let bottom = top * ratio.clamp(0.0, 0.95);

    [depth, top, bottom]
}

fn round_tenth(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Generates the sweep-structured dataset for `seed`.
pub fn generate(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<[u64; N_FEATURES]> = HashSet::new();
    let mut points: Vec<[f64; N_FEATURES]> = Vec::with_capacity(BUNDLED_ROWS);

    for (varied, groups, per_group) in SWEEPS {
        let mut made = 0;
        while made < groups {
            let mut base = [0.0; N_FEATURES];
            for f in Feature::ALL {
                let lv = levels(f);
                base[f.index()] = lv[rng.random_range(0..lv.len())];
            }
            let lv = levels(varied);
            let mut picks: Vec<usize> = index::sample(&mut rng, lv.len(), per_group).into_vec();
            picks.sort_unstable();
            let group: Vec<[f64; N_FEATURES]> = picks
                .iter()
                .map(|&i| {
                    let mut x = base;
                    x[varied.index()] = lv[i];
                    x
                })
                .collect();
            if group.iter().any(|x| seen.contains(&x.map(f64::to_bits))) {
                continue;
            }
            for x in group {
                seen.insert(x.map(f64::to_bits));
                points.push(x);
            }
            made += 1;
        }
    }

    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let records = points
        .into_iter()
        .map(|x| {
            let [depth, top, bottom] = channel_truth(x);
            let depth = round_tenth(depth * (1.0 + 0.015 * noise.sample(&mut rng)));
            let top = round_tenth(top * (1.0 + 0.015 * noise.sample(&mut rng)));
            let mut bottom = round_tenth(bottom + 6.0 * noise.sample(&mut rng));
            if bottom < 15.0 {
                bottom = 0.0;
            }
            let bottom = bottom.min(top);
            let params = LaserParams::new(x[0], x[1], x[2] as u32, x[3]).expect("levels are positive");
            let geometry = ChannelGeometry::new(depth, top, bottom).expect("non-negative geometry");
            (params, geometry)
        })
        .collect();
    Dataset::from_records(records)
}

/// The bundled 124-row dataset.
pub fn bundled() -> Dataset {
    crate::dataset::parse_csv(BUNDLED_CSV).expect("bundled dataset parses")
}

/// Uniform random samples of `channel_truth` over the nominal machine range,
/// without noise. Passes are rounded to integers.
pub fn sample_truth(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|_| {
            let mut x = [0.0; N_FEATURES];
            for f in Feature::ALL {
                let (lo, hi) = f.table_range();
                x[f.index()] = rng.random_range(lo..=hi);
            }
            x[2] = x[2].round();
            let y = channel_truth(x);
            let params = LaserParams::from_features(x).expect("in range");
            let geometry = ChannelGeometry::new(y[0], y[1], y[2]).expect("truth geometry is valid");
            (params, geometry)
        })
        .collect();
    Dataset::from_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::group_by_fixed;

    #[test]
    fn bundled_file_matches_generator() {
        let generated = generate(BUNDLED_SEED).to_csv();
        if std::env::var_os("LASML_BLESS").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/laser_channels_synthetic.csv");
            std::fs::write(path, &generated).unwrap();
        }
        assert_eq!(generated, BUNDLED_CSV);
    }

    #[test]
    fn bundled_shape() {
        let ds = bundled();
        assert_eq!(ds.len(), BUNDLED_ROWS);
        let mut combos = HashSet::new();
        for r in ds.rows() {
            assert!(r.params.out_of_range().is_empty());
            assert!(combos.insert(r.params.features().map(f64::to_bits)));
        }
        for f in Feature::ALL {
            assert!(!group_by_fixed(&ds, f).is_empty(), "no groups for {f}");
        }
        assert!(ds.rows().iter().any(|r| r.geometry.is_triangular()));
        assert!(ds.rows().iter().any(|r| !r.geometry.is_triangular()));
    }

    #[test]
    fn depth_saturates_with_passes() {
        let at = |n: f64| channel_truth([800.0, 0.5, n, 92.5])[0];
        assert!(at(40.0) - at(10.0) > 4.0 * (at(160.0) - at(40.0)));
        let top = |n: f64| channel_truth([800.0, 0.5, n, 92.5])[1];
        assert_eq!(top(10.0), top(160.0));
    }

    #[test]
    fn truth_samples_are_deterministic() {
        assert_eq!(sample_truth(20, 3), sample_truth(20, 3));
        assert_ne!(sample_truth(20, 3), sample_truth(20, 4));
    }
}
