//! Laser-run records, CSV ingestion, min-max scaling and index generators for
//! splits, folds and fixed-parameter groups.
//!
//! Every index generator here is a pure function of its arguments and seed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CSV header, in the exact column order the parser expects.
pub const CSV_HEADER: [&str; 7] = [
    "frequency_hz",
    "amplitude_mm",
    "passes",
    "laser_distance_mm",
    "depth_um",
    "top_width_um",
    "bottom_width_um",
];

pub const N_FEATURES: usize = 4;
pub const N_OUTPUTS: usize = 3;

/// Ratio between wobble frequency (Hz) and linear stage speed (mm/s).
pub const FREQUENCY_PER_SPEED: f64 = 40.0;

/// Independent laser parameters, in model input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Frequency,
    Amplitude,
    Passes,
    LaserDistance,
}

impl Feature {
    pub const ALL: [Feature; N_FEATURES] = [
        Feature::Frequency,
        Feature::Amplitude,
        Feature::Passes,
        Feature::LaserDistance,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Frequency => "frequency",
            Feature::Amplitude => "amplitude",
            Feature::Passes => "passes",
            Feature::LaserDistance => "laser_distance",
        }
    }

    pub fn csv_name(self) -> &'static str {
        CSV_HEADER[self.index()]
    }

    /// Nominal machine range of the parameter.
    pub fn table_range(self) -> (f64, f64) {
        match self {
            Feature::Frequency => (200.0, 1600.0),
            Feature::Amplitude => (0.100, 1.200),
            Feature::Passes => (10.0, 160.0),
            Feature::LaserDistance => (91.676, 93.200),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == name || f.csv_name() == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measured channel dimensions, in model output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Depth,
    TopWidth,
    BottomWidth,
}

impl Output {
    pub const ALL: [Output; N_OUTPUTS] = [Output::Depth, Output::TopWidth, Output::BottomWidth];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Output::Depth => "depth",
            Output::TopWidth => "top_width",
            Output::BottomWidth => "bottom_width",
        }
    }

    pub fn csv_name(self) -> &'static str {
        CSV_HEADER[N_FEATURES + self.index()]
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == name || o.csv_name() == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Any scalable column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "snake_case")]
pub enum Column {
    Feature(Feature),
    Output(Output),
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Feature(f) => f.name(),
            Column::Output(o) => o.name(),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Feature::from_name(name)
            .map(Column::Feature)
            .or_else(|_| Output::from_name(name).map(Column::Output))
    }

    pub fn features() -> impl Iterator<Item = Column> {
        Feature::ALL.into_iter().map(Column::Feature)
    }

    pub fn outputs() -> impl Iterator<Item = Column> {
        Output::ALL.into_iter().map(Column::Output)
    }
}

/// Linear stage speed in mm/s implied by a wobble frequency in Hz.
pub fn derive_linear_speed(frequency: f64) -> Result<f64> {
    if !(frequency > 0.0) || !frequency.is_finite() {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    Ok(frequency / FREQUENCY_PER_SPEED)
}

/// One set of machine settings. `linear_speed` is always derived from the
/// frequency and cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserParams {
    frequency: f64,
    amplitude: f64,
    passes: u32,
    laser_distance: f64,
    linear_speed: f64,
}

impl LaserParams {
    /// Rejects non-positive or non-finite values. Values outside the nominal
    /// machine range are accepted; see [`LaserParams::out_of_range`].
    pub fn new(frequency: f64, amplitude: f64, passes: u32, laser_distance: f64) -> Result<Self> {
        let linear_speed = derive_linear_speed(frequency)?;
        for (name, v) in [("amplitude", amplitude), ("laser_distance", laser_distance)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if passes == 0 {
            return Err(Error::Domain("passes must be positive, got 0".into()));
        }
        Ok(Self {
            frequency,
            amplitude,
            passes,
            laser_distance,
            linear_speed,
        })
    }

    /// Builds parameters from a feature vector, rounding passes to the
    /// nearest integer.
    pub fn from_features(x: [f64; N_FEATURES]) -> Result<Self> {
        let passes = x[2].round();
        if !(passes >= 1.0) || passes > u32::MAX as f64 {
            return Err(Error::Domain(format!("passes must be positive, got {}", x[2])));
        }
        Self::new(x[0], x[1], passes as u32, x[3])
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn passes(&self) -> u32 {
        self.passes
    }

    pub fn laser_distance(&self) -> f64 {
        self.laser_distance
    }

    pub fn linear_speed(&self) -> f64 {
        self.linear_speed
    }

    pub fn get(&self, feature: Feature) -> f64 {
        self.features()[feature.index()]
    }

    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.frequency,
            self.amplitude,
            self.passes as f64,
            self.laser_distance,
        ]
    }

    /// Features whose value falls outside the nominal machine range.
    pub fn out_of_range(&self) -> Vec<Feature> {
        Feature::ALL
            .into_iter()
            .filter(|f| {
                let (lo, hi) = f.table_range();
                let v = self.get(*f);
                v < lo || v > hi
            })
            .collect()
    }
}

impl<'de> Deserialize<'de> for LaserParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            frequency: f64,
            amplitude: f64,
            passes: u32,
            laser_distance: f64,
        }
        let raw = Raw::deserialize(d)?;
        LaserParams::new(raw.frequency, raw.amplitude, raw.passes, raw.laser_distance)
            .map_err(serde::de::Error::custom)
    }
}

/// Channel cross-section in µm. A zero bottom width is a triangular channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    pub depth: f64,
    pub top_width: f64,
    pub bottom_width: f64,
}

impl ChannelGeometry {
    pub fn new(depth: f64, top_width: f64, bottom_width: f64) -> Result<Self> {
        for (name, v) in [
            ("depth", depth),
            ("top_width", top_width),
            ("bottom_width", bottom_width),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Geometry(format!("{name} must be >= 0, got {v}")));
            }
        }
        if bottom_width > top_width {
            return Err(Error::Geometry(format!(
                "bottom width {bottom_width} exceeds top width {top_width}"
            )));
        }
        Ok(Self {
            depth,
            top_width,
            bottom_width,
        })
    }

    pub fn is_triangular(&self) -> bool {
        self.bottom_width == 0.0
    }

    pub fn width_difference(&self) -> f64 {
        self.top_width - self.bottom_width
    }

    pub fn get(&self, output: Output) -> f64 {
        self.to_array()[output.index()]
    }

    pub fn to_array(&self) -> [f64; N_OUTPUTS] {
        [self.depth, self.top_width, self.bottom_width]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub id: RowId,
    pub params: LaserParams,
    pub geometry: ChannelGeometry,
}

/// Ordered, immutable collection of experiments with unique row ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    rows: Vec<Experiment>,
}

impl Dataset {
    pub fn new(rows: Vec<Experiment>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for r in &rows {
            if !seen.insert(r.id) {
                return Err(Error::Domain(format!("duplicate row id {}", r.id.0)));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_records(records: Vec<(LaserParams, ChannelGeometry)>) -> Self {
        let rows = records
            .into_iter()
            .enumerate()
            .map(|(i, (params, geometry))| Experiment {
                id: RowId(i),
                params,
                geometry,
            })
            .collect();
        Self { rows }
    }

    pub fn feature_names() -> [&'static str; N_FEATURES] {
        Feature::ALL.map(Feature::name)
    }

    pub fn output_names() -> [&'static str; N_OUTPUTS] {
        Output::ALL.map(Output::name)
    }

    pub fn rows(&self) -> &[Experiment] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn features(&self) -> Vec<[f64; N_FEATURES]> {
        self.rows.iter().map(|r| r.params.features()).collect()
    }

    pub fn outputs(&self) -> Vec<[f64; N_OUTPUTS]> {
        self.rows.iter().map(|r| r.geometry.to_array()).collect()
    }

    pub fn column(&self, column: Column) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match column {
                Column::Feature(f) => r.params.get(f),
                Column::Output(o) => r.geometry.get(o),
            })
            .collect()
    }

    /// Rows at the given positions, in the given order, keeping their ids.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let p = &r.params;
            let g = &r.geometry;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.frequency(),
                p.amplitude(),
                p.passes(),
                p.laser_distance(),
                g.depth,
                g.top_width,
                g.bottom_width
            ));
        }
        out
    }

    pub fn summary(&self) -> DatasetSummary {
        let columns = Column::features()
            .chain(Column::outputs())
            .map(|c| {
                let v = self.column(c);
                let (min, max, mean) = if v.is_empty() {
                    (None, None, None)
                } else {
                    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (Some(min), Some(max), Some(v.iter().sum::<f64>() / v.len() as f64))
                };
                ColumnSummary {
                    name: c.name().to_string(),
                    min,
                    max,
                    mean,
                }
            })
            .collect();
        DatasetSummary {
            format_version: DatasetSummary::FORMAT_VERSION,
            rows: self.len(),
            triangular_rows: self.rows.iter().filter(|r| r.geometry.is_triangular()).count(),
            out_of_range_rows: self
                .rows
                .iter()
                .filter(|r| !r.params.out_of_range().is_empty())
                .count(),
            columns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

/// Versioned JSON summary of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub format_version: u32,
    pub rows: usize,
    pub triangular_rows: usize,
    pub out_of_range_rows: usize,
    pub columns: Vec<ColumnSummary>,
}

impl DatasetSummary {
    pub const FORMAT_VERSION: u32 = 1;
}

/// Parses the seven-column experiment CSV. Row numbers in errors count the
/// header as row 1.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(h) => h?,
        None => {
            return Err(Error::Parse {
                row: 1,
                column: "header".into(),
                message: "missing header row".into(),
            })
        }
    };
    let names: Vec<&str> = header.iter().collect();
    if names != CSV_HEADER {
        let column = names
            .iter()
            .enumerate()
            .find(|(i, n)| CSV_HEADER.get(*i) != Some(*n))
            .map(|(_, n)| n.to_string())
            .unwrap_or_else(|| CSV_HEADER[names.len().min(CSV_HEADER.len() - 1)].to_string());
        return Err(Error::Parse {
            row: 1,
            column,
            message: format!("header must be exactly `{}`", CSV_HEADER.join(",")),
        });
    }

    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 2;
        let rec = rec?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != CSV_HEADER.len() {
            let column = if rec.len() > CSV_HEADER.len() {
                format!("#{}", CSV_HEADER.len() + 1)
            } else {
                CSV_HEADER[rec.len()].to_string()
            };
            return Err(Error::Parse {
                row,
                column,
                message: format!("expected {} cells, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let mut cells = [0.0; 7];
        for (j, cell) in rec.iter().enumerate() {
            cells[j] = cell.parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: CSV_HEADER[j].into(),
                message: format!("not a number: {cell:?}"),
            })?;
        }
        let passes = cells[2];
        if passes.fract() != 0.0 || !(passes >= 1.0) || passes > u32::MAX as f64 {
            return Err(Error::Parse {
                row,
                column: "passes".into(),
                message: format!("passes must be a positive integer, got {passes}"),
            });
        }
        let params = LaserParams::new(cells[0], cells[1], passes as u32, cells[3]).map_err(|e| {
            let column = match &e {
                Error::Domain(m) if m.starts_with("amplitude") => "amplitude_mm",
                Error::Domain(m) if m.starts_with("laser_distance") => "laser_distance_mm",
                _ => "frequency_hz",
            };
            Error::Parse {
                row,
                column: column.into(),
                message: e.to_string(),
            }
        })?;
        let geometry = ChannelGeometry::new(cells[4], cells[5], cells[6]).map_err(|e| {
            let column = if cells[4] < 0.0 || !cells[4].is_finite() {
                "depth_um"
            } else if cells[5] < 0.0 || !cells[5].is_finite() {
                "top_width_um"
            } else {
                "bottom_width_um"
            };
            Error::Parse {
                row,
                column: column.into(),
                message: e.to_string(),
            }
        })?;
        rows.push(Experiment {
            id: RowId(rows.len()),
            params,
            geometry,
        });
    }
    Ok(Dataset { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub column: Column,
    pub min: f64,
    pub max: f64,
}

/// Per-column min/max used for `(x - min) / (max - min)` scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    ranges: Vec<ColumnRange>,
}

impl ScalerParams {
    pub fn from_ranges(ranges: Vec<ColumnRange>) -> Result<Self> {
        for r in &ranges {
            if !(r.max > r.min) {
                return Err(Error::DegenerateColumn(r.column.name().into()));
            }
        }
        Ok(Self { ranges })
    }

    pub fn ranges(&self) -> &[ColumnRange] {
        &self.ranges
    }

    pub fn range(&self, column: Column) -> Result<&ColumnRange> {
        self.ranges
            .iter()
            .find(|r| r.column == column)
            .ok_or_else(|| Error::UnknownColumn(column.name().into()))
    }

    pub fn scale(&self, value: f64, column: Column) -> Result<f64> {
        let r = self.range(column)?;
        Ok((value - r.min) / (r.max - r.min))
    }

    pub fn unscale(&self, value: f64, column: Column) -> Result<f64> {
        let r = self.range(column)?;
        Ok(value * (r.max - r.min) + r.min)
    }

    /// Scales by column name, e.g. `"amplitude"`.
    pub fn scale_named(&self, value: f64, column: &str) -> Result<f64> {
        self.scale(value, Column::from_name(column)?)
    }

    /// True when `value` lies outside the fitted range of `column`.
    pub fn is_extrapolated(&self, value: f64, column: Column) -> Result<bool> {
        let r = self.range(column)?;
        Ok(value < r.min || value > r.max)
    }

    pub fn scale_features(&self, x: &[f64; N_FEATURES]) -> Result<[f64; N_FEATURES]> {
        let mut out = [0.0; N_FEATURES];
        for f in Feature::ALL {
            out[f.index()] = self.scale(x[f.index()], Column::Feature(f))?;
        }
        Ok(out)
    }

    pub fn unscale_features(&self, x: &[f64; N_FEATURES]) -> Result<[f64; N_FEATURES]> {
        let mut out = [0.0; N_FEATURES];
        for f in Feature::ALL {
            out[f.index()] = self.unscale(x[f.index()], Column::Feature(f))?;
        }
        Ok(out)
    }

    pub fn scale_outputs(&self, y: &[f64; N_OUTPUTS]) -> Result<[f64; N_OUTPUTS]> {
        let mut out = [0.0; N_OUTPUTS];
        for o in Output::ALL {
            out[o.index()] = self.scale(y[o.index()], Column::Output(o))?;
        }
        Ok(out)
    }

    pub fn unscale_outputs(&self, y: &[f64; N_OUTPUTS]) -> Result<[f64; N_OUTPUTS]> {
        let mut out = [0.0; N_OUTPUTS];
        for o in Output::ALL {
            out[o.index()] = self.unscale(y[o.index()], Column::Output(o))?;
        }
        Ok(out)
    }
}

/// Fits min/max for the selected columns.
pub fn fit_scaler(data: &Dataset, columns: &[Column]) -> Result<ScalerParams> {
    if data.len() < 2 {
        return Err(Error::Split(format!(
            "at least 2 rows are needed to fit a scaler, got {}",
            data.len()
        )));
    }
    let ranges = columns
        .iter()
        .map(|&column| {
            let v = data.column(column);
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ColumnRange { column, min, max }
        })
        .collect();
    ScalerParams::from_ranges(ranges)
}

/// Scaler over all four features and all three outputs.
pub fn fit_full_scaler(data: &Dataset) -> Result<ScalerParams> {
    let cols: Vec<Column> = Column::features().chain(Column::outputs()).collect();
    fit_scaler(data, &cols)
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx
}

/// Seeded train/test partition of `0..n`. The test side holds
/// `round(test_fraction * n)` rows, clamped so that neither side is empty.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Split(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 rows, got {n}")));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let idx = shuffled(n, seed);
    let test = idx[..n_test].to_vec();
    let train = idx[n_test..].to_vec();
    Ok((train, test))
}

pub fn split_train_test(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.len(), test_fraction, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

/// `k` disjoint folds covering `0..n`, sizes differing by at most one.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Fold(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let idx = shuffled(n, seed);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPoint {
    pub row: RowId,
    pub varied_value: f64,
    pub geometry: ChannelGeometry,
    /// Top width minus bottom width.
    pub width_difference: f64,
}

/// Runs that share the values of every feature except `varied`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedGroup {
    pub varied: Feature,
    pub fixed: Vec<(Feature, f64)>,
    pub points: Vec<GroupPoint>,
}

/// Groups rows by exact equality of the three non-varied features. Groups
/// with a single point are dropped; points are sorted by the varied value.
pub fn group_by_fixed(data: &Dataset, varied: Feature) -> Vec<FixedGroup> {
    let others: Vec<Feature> = Feature::ALL.into_iter().filter(|f| *f != varied).collect();
    let mut buckets: HashMap<[u64; 3], Vec<&Experiment>> = HashMap::new();
    for r in data.rows() {
        let key = [0, 1, 2].map(|i| r.params.get(others[i]).to_bits());
        buckets.entry(key).or_default().push(r);
    }
    // positive finite floats order the same as their bit patterns
    let sorted: BTreeMap<[u64; 3], Vec<&Experiment>> = buckets.into_iter().collect();
    sorted
        .into_values()
        .filter(|rows| rows.len() >= 2)
        .map(|rows| {
            let first = rows[0];
            let fixed = others.iter().map(|&f| (f, first.params.get(f))).collect();
            let mut points: Vec<GroupPoint> = rows
                .iter()
                .map(|r| GroupPoint {
                    row: r.id,
                    varied_value: r.params.get(varied),
                    geometry: r.geometry,
                    width_difference: r.geometry.width_difference(),
                })
                .collect();
            points.sort_by(|a, b| a.varied_value.total_cmp(&b.varied_value).then(a.row.cmp(&b.row)));
            FixedGroup {
                varied,
                fixed,
                points,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        CSV_HEADER.join(",")
    }

    fn params(f: f64, a: f64, n: u32, d: f64) -> LaserParams {
        LaserParams::new(f, a, n, d).unwrap()
    }

    fn geo(d: f64, t: f64, b: f64) -> ChannelGeometry {
        ChannelGeometry::new(d, t, b).unwrap()
    }

    #[test]
    fn parse_single_row_derives_speed() {
        let text = format!("{}\n1600,0.5,40,92.5,600,480,100\n", header());
        let ds = parse_csv(&text).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.rows()[0].params.linear_speed(), 40.0);
        assert_eq!(ds.rows()[0].geometry.bottom_width, 100.0);
    }

    #[test]
    fn parse_header_only_is_empty() {
        let ds = parse_csv(&format!("{}\n", header())).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn parse_rejects_bottom_wider_than_top() {
        let text = format!("{}\n1600,0.5,40,92.5,600,480,500\n", header());
        match parse_csv(&text) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "bottom_width_um");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_cells_and_columns() {
        let bad_num = format!("{}\n1600,abc,40,92.5,600,480,100\n", header());
        assert!(matches!(
            parse_csv(&bad_num),
            Err(Error::Parse { ref column, .. }) if column == "amplitude_mm"
        ));
        let missing = format!("{}\n1600,0.5,40,92.5,600,480\n", header());
        assert!(matches!(parse_csv(&missing), Err(Error::Parse { row: 2, .. })));
        let extra = format!("{}\n1600,0.5,40,92.5,600,480,100,1\n", header());
        assert!(matches!(parse_csv(&extra), Err(Error::Parse { row: 2, .. })));
        let speed_col = format!("{},linear_speed_mm_s\n", header());
        assert!(matches!(parse_csv(&speed_col), Err(Error::Parse { row: 1, .. })));
        let fractional = format!("{}\n1600,0.5,40.5,92.5,600,480,100\n", header());
        assert!(matches!(
            parse_csv(&fractional),
            Err(Error::Parse { ref column, .. }) if column == "passes"
        ));
        let negative = format!("{}\n-5,0.5,40,92.5,600,480,100\n", header());
        assert!(matches!(
            parse_csv(&negative),
            Err(Error::Parse { ref column, .. }) if column == "frequency_hz"
        ));
    }

    #[test]
    fn out_of_range_is_flagged_not_rejected() {
        let p = params(100.0, 0.5, 40, 92.0);
        assert_eq!(p.out_of_range(), vec![Feature::Frequency]);
    }

    #[test]
    fn linear_speed_cases() {
        assert_eq!(derive_linear_speed(1600.0).unwrap(), 40.0);
        assert_eq!(derive_linear_speed(200.0).unwrap(), 5.0);
        assert_eq!(derive_linear_speed(40.0).unwrap(), 1.0);
        assert!(matches!(derive_linear_speed(0.0), Err(Error::Domain(_))));
        assert!(matches!(derive_linear_speed(-3.0), Err(Error::Domain(_))));
    }

    fn amplitude_dataset(values: &[f64]) -> Dataset {
        Dataset::from_records(
            values
                .iter()
                .map(|&a| (params(800.0, a, 40, 92.0), geo(500.0, 480.0, 100.0)))
                .collect(),
        )
    }

    #[test]
    fn scaler_cases() {
        let ds = amplitude_dataset(&[0.1, 0.4, 1.2, 0.65]);
        let col = Column::Feature(Feature::Amplitude);
        let s = fit_scaler(&ds, &[col]).unwrap();
        let r = s.range(col).unwrap();
        assert_eq!((r.min, r.max), (0.1, 1.2));
        assert_eq!(s.scale(0.1, col).unwrap(), 0.0);
        assert_eq!(s.scale(1.2, col).unwrap(), 1.0);
        assert!((s.scale(0.65, col).unwrap() - 0.5).abs() < 1e-12);
        assert!((s.scale_named(0.65, "amplitude").unwrap() - 0.5).abs() < 1e-12);
        assert!(s.is_extrapolated(1.5, col).unwrap());
        assert!(s.scale(1.5, col).unwrap() > 1.0);
        assert!(matches!(
            s.scale(1.0, Column::Feature(Feature::Passes)),
            Err(Error::UnknownColumn(_))
        ));

        let two = amplitude_dataset(&[2.0, 4.0]);
        let s2 = fit_scaler(&two, &[col]).unwrap();
        assert_eq!((s2.range(col).unwrap().min, s2.range(col).unwrap().max), (2.0, 4.0));

        let flat = amplitude_dataset(&[0.5, 0.5, 0.5]);
        assert!(matches!(fit_scaler(&flat, &[col]), Err(Error::DegenerateColumn(c)) if c == "amplitude"));
    }

    #[test]
    fn split_sizes() {
        let (train, test) = split_indices(124, 0.2, 7).unwrap();
        assert_eq!((train.len(), test.len()), (99, 25));
        assert_eq!(split_indices(124, 0.2, 7).unwrap(), (train, test));
        let (a, b) = split_indices(2, 0.999, 1).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
        assert!(split_indices(10, 0.0, 1).is_err());
        assert!(split_indices(10, 1.0, 1).is_err());
        assert!(split_indices(1, 0.5, 1).is_err());
    }

    #[test]
    fn split_datasets_are_disjoint() {
        let ds = amplitude_dataset(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        let (train, test) = split_train_test(&ds, 0.3, 3).unwrap();
        assert_eq!(test.len(), 3);
        let mut ids: Vec<usize> = train.rows().iter().chain(test.rows()).map(|r| r.id.0).collect();
        ids.sort();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_cases() {
        let loo = kfold_indices(10, 10, 0).unwrap();
        assert!(loo.iter().all(|f| f.len() == 1));
        let folds = kfold_indices(124, 10, 0).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, [12, 12, 12, 12, 12, 12, 13, 13, 13, 13]);
        assert!(kfold_indices(5, 6, 0).is_err());
        assert!(kfold_indices(5, 1, 0).is_err());
    }

    #[test]
    fn grouping_cases() {
        let ds = Dataset::from_records(vec![
            (params(200.0, 0.5, 40, 92.5), geo(600.0, 480.0, 100.0)),
            (params(400.0, 0.5, 40, 92.5), geo(550.0, 470.0, 90.0)),
            (params(800.0, 0.7, 40, 92.5), geo(500.0, 400.0, 0.0)),
        ]);
        let groups = group_by_fixed(&ds, Feature::Frequency);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].points.len(), 2);
        assert_eq!(groups[0].points[0].width_difference, 380.0);
        assert_eq!(groups[0].fixed[0], (Feature::Amplitude, 0.5));
        assert!(group_by_fixed(&ds, Feature::Amplitude).is_empty());
    }

    #[test]
    fn summary_counts() {
        let ds = amplitude_dataset(&[0.1, 0.3]);
        let s = ds.summary();
        assert_eq!(s.rows, 2);
        assert_eq!(s.columns.len(), 7);
        assert_eq!(s.columns[1].mean, Some(0.2));
        let empty = Dataset::default().summary();
        assert_eq!(empty.columns[0].min, None);
    }
}
