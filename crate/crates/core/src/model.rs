//! Uniform wrapper over the three surrogate families and the versioned model
//! file format shared by every family (and the GAN).
//!
//! Models are fitted in min-max scaled space; the scaler fitted on the
//! training rows travels with the model so predictions come back in µm.

use std::fmt;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    fit_full_scaler, Column, Dataset, LaserParams, Output, ScalerParams, N_FEATURES, N_OUTPUTS,
};
use crate::error::{Error, Result};
use crate::gbt::{fit_gbt, GbtConfig, GbtModel};
use crate::mlp::{to_matrix, MlpConfig, MlpEnsemble};
use crate::regress::{fit_regression, RegressionModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Model family with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Regression { order: usize },
    Gbt { config: GbtConfig },
    Mlp { config: MlpConfig, n_init: usize },
}

impl Family {
    pub fn linear() -> Self {
        Family::Regression { order: 1 }
    }

    pub fn poly(order: usize) -> Self {
        Family::Regression { order }
    }

    pub fn gbt() -> Self {
        Family::Gbt {
            config: GbtConfig::default(),
        }
    }

    /// A single network with the given hidden widths and default training settings.
    pub fn mlp(hidden: &[usize], seed: u64) -> Self {
        Family::Mlp {
            config: MlpConfig {
                seed,
                ..MlpConfig::with_hidden(N_FEATURES, hidden, N_OUTPUTS)
            },
            n_init: 1,
        }
    }

    /// Short name used on the command line and in model files.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Regression { order: 1 } => "linear",
            Family::Regression { order: 2 } => "poly2",
            Family::Regression { order: 3 } => "poly3",
            Family::Regression { order: 4 } => "poly4",
            Family::Regression { .. } => "poly",
            Family::Gbt { .. } => "gbt",
            Family::Mlp { .. } => "mlp",
        }
    }

    /// Parses `linear|poly2|poly3|poly4|gbt|mlp` with default hyperparameters.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Family::linear()),
            "poly2" => Ok(Family::poly(2)),
            "poly3" => Ok(Family::poly(3)),
            "poly4" => Ok(Family::poly(4)),
            "gbt" => Ok(Family::gbt()),
            "mlp" => Ok(Family::mlp(&[64, 32], 0)),
            other => Err(Error::Config(format!("unknown model family {other:?}"))),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            Family::Regression { .. } => {}
            Family::Gbt { config } => config.seed = seed,
            Family::Mlp { config, .. } => config.seed = seed,
        }
        self
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which outputs a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Single(Output),
    All,
}

impl Target {
    pub fn outputs(self) -> Vec<Output> {
        match self {
            Target::Single(o) => vec![o],
            Target::All => Output::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "models", rename_all = "snake_case")]
pub enum Fitted {
    Regression(Vec<RegressionModel>),
    Gbt(Vec<GbtModel>),
    Mlp(MlpEnsemble),
}

/// Scaled-space predictions for a batch: `mean[row][target]`, `std[row][target]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPrediction {
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

/// Physical-unit prediction of all three outputs (µm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryPrediction {
    pub mean: [f64; N_OUTPUTS],
    pub std: [f64; N_OUTPUTS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub family: Family,
    pub targets: Vec<Output>,
    pub scaler: ScalerParams,
    pub fitted: Fitted,
}

type Rows = Vec<Vec<f64>>;

fn scaled_xy(data: &Dataset, scaler: &ScalerParams, targets: &[Output]) -> Result<(Rows, Rows)> {
    let mut xs = Vec::with_capacity(data.len());
    let mut ys = Vec::with_capacity(data.len());
    for r in data.rows() {
        xs.push(scaler.scale_features(&r.params.features())?.to_vec());
        let y = scaler.scale_outputs(&r.geometry.to_array())?;
        ys.push(targets.iter().map(|o| y[o.index()]).collect());
    }
    Ok((xs, ys))
}

/// Fits `family` on `train` with a scaler fitted to `train` alone.
pub fn fit_model(family: &Family, target: Target, train: &Dataset) -> Result<TrainedModel> {
    let scaler = fit_full_scaler(train)?;
    let targets = target.outputs();
    let (xs, ys) = scaled_xy(train, &scaler, &targets)?;
    let column = |j: usize| -> Vec<f64> { ys.iter().map(|y| y[j]).collect() };

    let fitted = match family {
        Family::Regression { order } => Fitted::Regression(
            (0..targets.len())
                .map(|j| fit_regression(&xs, &column(j), *order))
                .collect::<Result<_>>()?,
        ),
        Family::Gbt { config } => Fitted::Gbt(
            (0..targets.len())
                .map(|j| fit_gbt(&xs, &column(j), config))
                .collect::<Result<_>>()?,
        ),
        Family::Mlp { config, n_init } => {
            let mut cfg = config.clone();
            let last = cfg.layer_sizes.len() - 1;
            if cfg.layer_sizes[0] != N_FEATURES {
                return Err(Error::Config(format!(
                    "network input layer must have {N_FEATURES} units, got {}",
                    cfg.layer_sizes[0]
                )));
            }
            cfg.layer_sizes[last] = targets.len();
            let x = to_matrix(&xs)?;
            let y = to_matrix(&ys)?;
            Fitted::Mlp(MlpEnsemble::train(&cfg, x.view(), y.view(), *n_init)?)
        }
    };
    let family = match (family, &fitted) {
        (Family::Mlp { n_init, .. }, Fitted::Mlp(e)) => Family::Mlp {
            config: e.members[0].config.clone(),
            n_init: *n_init,
        },
        _ => family.clone(),
    };
    Ok(TrainedModel {
        family,
        targets,
        scaler,
        fitted,
    })
}

impl TrainedModel {
    pub fn predicts_all_outputs(&self) -> bool {
        self.targets == Output::ALL
    }

    /// Predicts every target for scaled feature rows.
    pub fn predict_scaled(&self, x: &[[f64; N_FEATURES]]) -> Result<ScaledPrediction> {
        let t = self.targets.len();
        let zeros = || vec![vec![0.0; t]; x.len()];
        match &self.fitted {
            Fitted::Regression(models) => {
                let mut mean = zeros();
                for (row, xi) in mean.iter_mut().zip(x) {
                    for (j, m) in models.iter().enumerate() {
                        row[j] = m.predict(xi)?;
                    }
                }
                Ok(ScaledPrediction { mean, std: zeros() })
            }
            Fitted::Gbt(models) => {
                let mut mean = zeros();
                for (row, xi) in mean.iter_mut().zip(x) {
                    for (j, m) in models.iter().enumerate() {
                        row[j] = m.predict(xi)?;
                    }
                }
                Ok(ScaledPrediction { mean, std: zeros() })
            }
            Fitted::Mlp(ensemble) => {
                if x.is_empty() {
                    return Ok(ScaledPrediction {
                        mean: vec![],
                        std: vec![],
                    });
                }
                let flat: Vec<f64> = x.iter().flatten().copied().collect();
                let q = Array2::from_shape_vec((x.len(), N_FEATURES), flat).expect("row-major batch");
                let p = ensemble.predict(q.view())?;
                let rows = |a: &Array2<f64>| a.outer_iter().map(|r| r.to_vec()).collect();
                Ok(ScaledPrediction {
                    mean: rows(&p.mean),
                    std: rows(&p.std),
                })
            }
        }
    }

    /// Scales raw parameters with the model's training scaler.
    pub fn scale_params(&self, params: &LaserParams) -> Result<[f64; N_FEATURES]> {
        self.scaler.scale_features(&params.features())
    }

    /// Predicts all three outputs in µm, with ensemble standard deviations.
    pub fn predict_geometry(&self, params: &[LaserParams]) -> Result<Vec<GeometryPrediction>> {
        if !self.predicts_all_outputs() {
            return Err(Error::State(format!(
                "model predicts {:?} only; geometry prediction needs all three outputs",
                self.targets
            )));
        }
        let x = params.iter().map(|p| self.scale_params(p)).collect::<Result<Vec<_>>>()?;
        let pred = self.predict_scaled(&x)?;
        pred.mean
            .iter()
            .zip(&pred.std)
            .map(|(m, s)| {
                let mean = self.scaler.unscale_outputs(&[m[0], m[1], m[2]])?;
                let mut std = [0.0; N_OUTPUTS];
                for o in Output::ALL {
                    let r = self.scaler.range(Column::Output(o))?;
                    std[o.index()] = s[o.index()] * (r.max - r.min);
                }
                Ok(GeometryPrediction { mean, std })
            })
            .collect()
    }

    pub fn to_file(&self) -> Result<ModelFile> {
        let parameters = serde_json::to_value(ModelParameters {
            family: self.family.clone(),
            targets: self.targets.clone(),
            fitted: self.fitted.clone(),
        })?;
        Ok(ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            family: self.family.name().to_string(),
            scalers: self.scaler.clone(),
            parameters,
        })
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        file.check_version()?;
        if file.family == "gan" {
            return Err(Error::Format("file holds a GAN, not a surrogate model".into()));
        }
        let p: ModelParameters = serde_json::from_value(file.parameters)?;
        if p.family.name() != file.family {
            return Err(Error::Format(format!(
                "family mismatch: header says {}, parameters say {}",
                file.family,
                p.family.name()
            )));
        }
        Ok(Self {
            family: p.family,
            targets: p.targets,
            scaler: file.scalers,
            fitted: p.fitted,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file()?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelParameters {
    family: Family,
    targets: Vec<Output>,
    fitted: Fitted,
}

/// On-disk model document: `{format_version, family, scalers, parameters}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub family: String,
    pub scalers: ScalerParams,
    pub parameters: serde_json::Value,
}

impl ModelFile {
    pub fn check_version(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        Ok(())
    }
}
