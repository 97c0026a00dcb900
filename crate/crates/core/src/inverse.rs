//! Inverse design: run a surrogate over a candidate set, keep the rows whose
//! predicted geometry falls inside a tolerance box and rank them by distance
//! to the target.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, LaserParams, Output, N_FEATURES, N_OUTPUTS};
use crate::error::{Error, Result};
use crate::generator::CandidateSet;
use crate::model::{GeometryPrediction, TrainedModel};

/// Candidates closer than this in scaled input space count as duplicates.
pub const DEFAULT_COLLAPSE_DISTANCE: f64 = 0.02;
pub const DEFAULT_TOP_K: usize = 10;

const CHUNK: usize = 2048;

/// Target geometry in µm with a symmetric tolerance per output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignTarget {
    pub depth_um: f64,
    pub top_width_um: f64,
    pub bottom_width_um: f64,
    pub tolerance_um: [f64; N_OUTPUTS],
}

impl DesignTarget {
    pub fn new(depth: f64, top_width: f64, bottom_width: f64, tolerance: [f64; N_OUTPUTS]) -> Result<Self> {
        let target = Self {
            depth_um: depth,
            top_width_um: top_width,
            bottom_width_um: bottom_width,
            tolerance_um: tolerance,
        };
        target.validate()?;
        Ok(target)
    }

    /// Triangular channel: bottom width zero.
    pub fn triangular(depth: f64, top_width: f64, tolerance: [f64; N_OUTPUTS]) -> Result<Self> {
        Self::new(depth, top_width, 0.0, tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        for (o, v) in Output::ALL.iter().zip(self.values()) {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("target {o} must be finite and >= 0, got {v}")));
            }
        }
        for (o, t) in Output::ALL.iter().zip(self.tolerance_um) {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("tolerance for {o} must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> [f64; N_OUTPUTS] {
        [self.depth_um, self.top_width_um, self.bottom_width_um]
    }

    pub fn is_triangular(&self) -> bool {
        self.bottom_width_um == 0.0
    }

    pub fn contains(&self, geometry: &[f64; N_OUTPUTS]) -> bool {
        self.values()
            .iter()
            .zip(geometry)
            .zip(self.tolerance_um)
            .all(|((t, g), tol)| (g - t).abs() <= tol)
    }

    pub fn widened(&self, factor: f64) -> Self {
        Self {
            tolerance_um: self.tolerance_um.map(|t| t * factor),
            ..*self
        }
    }
}

/// A candidate that passed the tolerance filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Row index in the candidate set.
    pub index: usize,
    pub params: LaserParams,
    pub predicted: GeometryPrediction,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    pub top_k: usize,
    /// Zero disables near-duplicate collapsing.
    pub collapse_distance: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            top_k: DEFAULT_TOP_K,
            collapse_distance: DEFAULT_COLLAPSE_DISTANCE,
        }
    }
}

/// Surrogate predictions for every candidate, computed in parallel chunks.
pub fn predict_candidates(model: &TrainedModel, candidates: &CandidateSet) -> Result<Vec<GeometryPrediction>> {
    if !model.predicts_all_outputs() {
        return Err(Error::State(
            "inverse design needs a model trained on all three outputs".into(),
        ));
    }
    let chunks = candidates
        .rows
        .par_chunks(CHUNK)
        .map(|chunk| model.predict_geometry(chunk))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn scaled_outputs(model: &TrainedModel, y: &[f64; N_OUTPUTS]) -> Result<[f64; N_OUTPUTS]> {
    model.scaler.scale_outputs(y)
}

fn distance<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Every candidate inside the tolerance box, scored and sorted (ascending
/// score, then index). No collapsing or truncation.
pub fn filter_in_box(
    model: &TrainedModel,
    candidates: &CandidateSet,
    predictions: &[GeometryPrediction],
    target: &DesignTarget,
) -> Result<Vec<Candidate>> {
    target.validate()?;
    let goal = scaled_outputs(model, &target.values())?;
    let mut kept = Vec::new();
    for (index, (params, pred)) in candidates.rows.iter().zip(predictions).enumerate() {
        if !target.contains(&pred.mean) {
            continue;
        }
        let score = distance(&scaled_outputs(model, &pred.mean)?, &goal);
        kept.push(Candidate {
            index,
            params: *params,
            predicted: *pred,
            score,
        });
    }
    kept.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    Ok(kept)
}

/// Drops any candidate within `min_distance` (scaled inputs) of a better one.
fn collapse(model: &TrainedModel, ranked: Vec<Candidate>, min_distance: f64, top_k: usize) -> Result<Vec<Candidate>> {
    let mut kept: Vec<(Candidate, [f64; N_FEATURES])> = Vec::new();
    for c in ranked {
        if kept.len() == top_k {
            break;
        }
        let x = model.scaler.scale_features(&c.params.features())?;
        if min_distance > 0.0 && kept.iter().any(|(_, y)| distance(&x, y) < min_distance) {
            continue;
        }
        kept.push((c, x));
    }
    Ok(kept.into_iter().map(|(c, _)| c).collect())
}

/// Ranks the candidates whose predicted geometry meets `target`.
pub fn design(
    model: &TrainedModel,
    candidates: &CandidateSet,
    target: &DesignTarget,
    options: &DesignOptions,
) -> Result<Vec<Candidate>> {
    target.validate()?;
    if !(options.collapse_distance >= 0.0) {
        return Err(Error::Config("collapse distance must be >= 0".into()));
    }
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let predictions = predict_candidates(model, candidates)?;
    let ranked = filter_in_box(model, candidates, &predictions, target)?;
    collapse(model, ranked, options.collapse_distance, options.top_k)
}

/// `rank,score,<four parameters>,<three predictions>,<three stds>`.
pub fn design_csv(results: &[Candidate]) -> String {
    let mut out = String::from(
        "rank,score,frequency_hz,amplitude_mm,passes,laser_distance_mm,\
         depth_um,top_width_um,bottom_width_um,depth_std_um,top_width_std_um,bottom_width_std_um\n",
    );
    for (rank, c) in results.iter().enumerate() {
        let p = &c.params;
        let [d, t, b] = c.predicted.mean;
        let [sd, st, sb] = c.predicted.std;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            rank + 1,
            c.score,
            p.frequency(),
            p.amplitude(),
            p.passes(),
            p.laser_distance(),
            d,
            t,
            b,
            sd,
            st,
            sb
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    /// Some returned candidate truly lands within twice the tolerance.
    pub achieved: bool,
    /// Smallest worst-output true error, in units of tolerance, over the
    /// returned candidates (over all candidates when none were returned).
    /// `None` for an empty candidate set.
    pub best_true_error: Option<f64>,
    pub returned: usize,
}

/// Designs for `target`, then checks the returned parameters against the
/// known truth.
pub fn round_trip<F>(
    model: &TrainedModel,
    truth: F,
    candidates: &CandidateSet,
    target: &DesignTarget,
    options: &DesignOptions,
) -> Result<RoundTripReport>
where
    F: Fn(&LaserParams) -> [f64; N_OUTPUTS],
{
    let results = design(model, candidates, target, options)?;
    let goal = target.values();
    let error = |p: &LaserParams| {
        let y = truth(p);
        (0..N_OUTPUTS)
            .map(|k| (y[k] - goal[k]).abs() / target.tolerance_um[k])
            .fold(0.0, f64::max)
    };
    let pool: Vec<&LaserParams> = if results.is_empty() {
        candidates.rows.iter().collect()
    } else {
        results.iter().map(|c| &c.params).collect()
    };
    let best = pool.into_iter().map(error).reduce(f64::min);
    Ok(RoundTripReport {
        achieved: !results.is_empty() && best.is_some_and(|e| e <= 2.0),
        best_true_error: best,
        returned: results.len(),
    })
}

/// Predicted geometry column names as used by the design CSV.
pub fn output_columns() -> [Column; N_OUTPUTS] {
    Output::ALL.map(Column::Output)
}
