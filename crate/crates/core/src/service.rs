//! HTTP service used by the web UI. Handlers are thin adapters over the
//! library: they parse JSON, call the same functions the CLI uses and
//! serialise the result.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path as UrlPath, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use crate::cli::{load_dataset, parse_target};
use crate::dataset::{Dataset, DatasetSummary, Feature, LaserParams, Output, N_FEATURES, N_OUTPUTS};
use crate::error::{Error, Result};
use crate::gbt::feature_importance;
use crate::generator::{grid_candidates, sample_gan, table_ranges, train_gan, CandidateSet, GanConfig, GanModel, Source};
use crate::inverse::{design, DesignOptions, DesignTarget, DEFAULT_TOP_K};
use crate::mlp::MlpConfig;
use crate::model::{fit_model, Family, Fitted, TrainedModel};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_path: Option<PathBuf>,
    pub model_dir: PathBuf,
    pub static_dir: PathBuf,
    /// Concurrent training jobs.
    pub workers: usize,
    /// Seed used when a request does not give one.
    pub seed: u64,
}

/// Error body `{"error": ..., "code": ...}` with an HTTP status.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn not_found(what: &str, id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            code: "not_found".into(),
            message: format!("unknown {what} '{id}'"),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::State(_) => StatusCode::CONFLICT,
            e if e.is_input_error() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.message,
            code: self.code,
        };
        (self.status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub code: String,
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

/// JSON body extractor whose rejections use the common error body.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> std::result::Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Self(v)),
            Err(r) => Err(ApiError {
                status: r.status(),
                code: "bad_request".into(),
                message: r.body_text(),
            }),
        }
    }
}

/// Registry entry metadata, stored next to the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub model_id: String,
    pub family: String,
    pub targets: Vec<Output>,
    pub created_at: u64,
    pub data_fingerprint: String,
    pub seed: u64,
}

#[derive(Debug)]
struct Registered {
    meta: ModelMeta,
    model: Arc<TrainedModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub kind: String,
    pub status: JobStatus,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

struct Inner {
    data: Dataset,
    fingerprint: String,
    seed: u64,
    model_dir: PathBuf,
    models: RwLock<BTreeMap<String, Registered>>,
    next_model: AtomicU64,
    jobs: RwLock<BTreeMap<String, Job>>,
    next_job: AtomicU64,
    workers: Arc<Semaphore>,
    gans: Mutex<HashMap<u64, Arc<GanModel>>>,
}

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

/// FNV-1a over the dataset CSV, stable across runs and platforms.
pub fn fingerprint(data: &Dataset) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in data.to_csv().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn id_number(id: &str, prefix: char) -> Option<u64> {
    id.strip_prefix(prefix)?.parse().ok()
}

impl AppState {
    /// Opens (and creates) `model_dir`, reloading every model persisted there.
    pub fn new(data: Dataset, model_dir: &Path, workers: usize, seed: u64) -> Result<Self> {
        fs::create_dir_all(model_dir).map_err(|e| Error::from(e).context(model_dir.display()))?;
        let mut models = BTreeMap::new();
        let mut next = 1;
        let mut entries: Vec<PathBuf> = fs::read_dir(model_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".meta.json"))
            .collect();
        entries.sort();
        for meta_path in entries {
            let meta: ModelMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)
                .map_err(|e| Error::from(e).context(meta_path.display()))?;
            let model_path = model_dir.join(format!("{}.model.json", meta.model_id));
            let model = TrainedModel::load(&model_path).map_err(|e| e.context(model_path.display()))?;
            if let Some(n) = id_number(&meta.model_id, 'm') {
                next = next.max(n + 1);
            }
            models.insert(
                meta.model_id.clone(),
                Registered {
                    meta,
                    model: Arc::new(model),
                },
            );
        }
        Ok(Self {
            inner: Arc::new(Inner {
                fingerprint: fingerprint(&data),
                data,
                seed,
                model_dir: model_dir.to_path_buf(),
                models: RwLock::new(models),
                next_model: AtomicU64::new(next),
                jobs: RwLock::new(BTreeMap::new()),
                next_job: AtomicU64::new(1),
                workers: Arc::new(Semaphore::new(workers.max(1))),
                gans: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.inner.data
    }

    /// Persists and registers `model` under a fresh id.
    pub fn register(&self, model: TrainedModel, seed: u64) -> Result<ModelMeta> {
        let n = self.inner.next_model.fetch_add(1, Ordering::SeqCst);
        let meta = ModelMeta {
            model_id: format!("m{n}"),
            family: model.family.name().to_string(),
            targets: model.targets.clone(),
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            data_fingerprint: self.inner.fingerprint.clone(),
            seed,
        };
        let dir = &self.inner.model_dir;
        model.save(&dir.join(format!("{}.model.json", meta.model_id)))?;
        fs::write(
            dir.join(format!("{}.meta.json", meta.model_id)),
            serde_json::to_string_pretty(&meta)?,
        )?;
        self.inner.models.write().expect("registry lock").insert(
            meta.model_id.clone(),
            Registered {
                meta: meta.clone(),
                model: Arc::new(model),
            },
        );
        Ok(meta)
    }

    pub fn model(&self, id: &str) -> std::result::Result<Arc<TrainedModel>, ApiError> {
        self.inner
            .models
            .read()
            .expect("registry lock")
            .get(id)
            .map(|r| r.model.clone())
            .ok_or_else(|| ApiError::not_found("model", id))
    }

    pub fn models(&self) -> Vec<ModelMeta> {
        let models = self.inner.models.read().expect("registry lock");
        let mut list: Vec<ModelMeta> = models.values().map(|r| r.meta.clone()).collect();
        list.sort_by_key(|m| id_number(&m.model_id, 'm').unwrap_or(u64::MAX));
        list
    }

    pub fn job(&self, id: &str) -> Option<Job> {
        self.inner.jobs.read().expect("job lock").get(id).cloned()
    }

    fn set_job(&self, job: Job) {
        self.inner.jobs.write().expect("job lock").insert(job.job_id.clone(), job);
    }

    /// The GAN for `seed`, trained on the service dataset on first use.
    pub fn gan(&self, seed: u64) -> Result<Arc<GanModel>> {
        if let Some(g) = self.inner.gans.lock().expect("gan lock").get(&seed) {
            return Ok(g.clone());
        }
        let gan = Arc::new(train_gan(&self.inner.data, &GanConfig {
            seed,
            ..GanConfig::default()
        })?);
        self.inner.gans.lock().expect("gan lock").entry(seed).or_insert(gan.clone());
        Ok(gan)
    }
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/dataset/summary", get(dataset_summary))
        .route("/api/train", post(start_training))
        .route("/api/models", get(list_models))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/predict", post(predict))
        .route("/api/design", post(design_handler))
        .route("/api/importance/{model_id}", get(importance))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn dataset_summary(State(state): State<AppState>) -> Json<DatasetSummary> {
    Json(state.dataset().summary())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRequest {
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub hidden: Option<Vec<usize>>,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default)]
    pub n_init: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_family() -> String {
    "mlp".into()
}

fn default_output() -> String {
    "all".into()
}

impl TrainRequest {
    /// The family described by this request, with `seed` applied.
    pub fn family(&self, seed: u64) -> Result<Family> {
        let family = Family::parse(&self.family)?.with_seed(seed);
        Ok(match family {
            Family::Mlp { config, .. } => {
                let hidden = self.hidden.clone().unwrap_or_else(|| config.hidden().to_vec());
                let n_init = self.n_init.unwrap_or(1);
                if n_init == 0 {
                    return Err(Error::Config("n_init must be >= 1".into()));
                }
                let config = MlpConfig {
                    seed,
                    ..MlpConfig::with_hidden(N_FEATURES, &hidden, N_OUTPUTS)
                };
                config.validate()?;
                Family::Mlp { config, n_init }
            }
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobAccepted {
    pub job_id: String,
    pub status: JobStatus,
}

async fn start_training(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<TrainRequest>,
) -> std::result::Result<(StatusCode, Json<JobAccepted>), ApiError> {
    let seed = req.seed.unwrap_or(state.inner.seed);
    let family = req.family(seed)?;
    let target = parse_target(&req.output)?;
    let job_id = format!("j{}", state.inner.next_job.fetch_add(1, Ordering::SeqCst));
    state.set_job(Job {
        job_id: job_id.clone(),
        kind: "train".into(),
        status: JobStatus::Pending,
        seed,
        model_id: None,
        error: None,
    });
    let worker = state.clone();
    let id = job_id.clone();
    tokio::spawn(async move {
        let permit = worker.inner.workers.clone().acquire_owned().await;
        let task_state = worker.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            let _permit = permit;
            let model = fit_model(&family, target, task_state.dataset())?;
            task_state.register(model, seed)
        })
        .await;
        let mut job = worker.job(&id).expect("job was registered");
        match outcome {
            Ok(Ok(meta)) => {
                job.status = JobStatus::Done;
                job.model_id = Some(meta.model_id);
            }
            Ok(Err(e)) => {
                job.status = JobStatus::Failed;
                job.error = Some(ErrorBody {
                    error: e.to_string(),
                    code: e.code().to_string(),
                });
            }
            Err(join) => {
                job.status = JobStatus::Failed;
                job.error = Some(ErrorBody {
                    error: join.to_string(),
                    code: "internal_error".into(),
                });
            }
        }
        worker.set_job(job);
    });
    Ok((
        StatusCode::ACCEPTED,
        Json(JobAccepted {
            job_id,
            status: JobStatus::Pending,
        }),
    ))
}

async fn list_models(State(state): State<AppState>) -> Json<Vec<ModelMeta>> {
    Json(state.models())
}

async fn get_job(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Job> {
    state.job(&id).map(Json).ok_or_else(|| ApiError::not_found("job", &id))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBody {
    pub frequency_hz: f64,
    pub amplitude_mm: f64,
    pub passes: f64,
    pub laser_distance_mm: f64,
}

impl ParamsBody {
    pub fn to_params(self) -> Result<LaserParams> {
        if self.passes.fract() != 0.0 {
            return Err(Error::Domain(format!("passes must be an integer, got {}", self.passes)));
        }
        LaserParams::from_features([self.frequency_hz, self.amplitude_mm, self.passes, self.laser_distance_mm])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub model_id: String,
    pub params: OneOrMany<ParamsBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryBody {
    pub depth_um: f64,
    pub top_width_um: f64,
    pub bottom_width_um: f64,
    pub depth_std_um: f64,
    pub top_width_std_um: f64,
    pub bottom_width_std_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub model_id: String,
    pub predictions: Vec<GeometryBody>,
    /// Parameters outside the range the model was trained on, per row.
    pub extrapolated: Vec<Vec<Feature>>,
}

pub fn predict_response(model_id: &str, model: &TrainedModel, params: &[LaserParams]) -> Result<PredictResponse> {
    let preds = model.predict_geometry(params)?;
    let extrapolated = params
        .iter()
        .map(|p| {
            Feature::ALL
                .into_iter()
                .filter(|&f| {
                    model
                        .scaler
                        .is_extrapolated(p.get(f), crate::dataset::Column::Feature(f))
                        .unwrap_or(false)
                })
                .collect()
        })
        .collect();
    Ok(PredictResponse {
        model_id: model_id.to_string(),
        predictions: preds
            .iter()
            .map(|g| GeometryBody {
                depth_um: g.mean[0],
                top_width_um: g.mean[1],
                bottom_width_um: g.mean[2],
                depth_std_um: g.std[0],
                top_width_std_um: g.std[1],
                bottom_width_std_um: g.std[2],
            })
            .collect(),
        extrapolated,
    })
}

async fn predict(State(state): State<AppState>, ApiJson(req): ApiJson<PredictRequest>) -> ApiResult<PredictResponse> {
    let model = state.model(&req.model_id)?;
    let bodies = match req.params {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(v) => v,
    };
    let params = bodies.into_iter().map(ParamsBody::to_params).collect::<Result<Vec<_>>>()?;
    Ok(Json(predict_response(&req.model_id, &model, &params)?))
}

/// Target geometry; short (`depth`) and unit-suffixed (`depth_um`) names are both accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBody {
    #[serde(alias = "depth_um")]
    pub depth: f64,
    #[serde(alias = "top_width", alias = "top_width_um")]
    pub top: f64,
    #[serde(alias = "bottom_width", alias = "bottom_width_um")]
    pub bottom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRequest {
    pub model_id: String,
    pub target: TargetBody,
    #[serde(alias = "tol_um", alias = "tolerance_um")]
    pub tol: OneOrMany<f64>,
    #[serde(default = "default_source")]
    pub source: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub grid_counts: Option<[usize; N_FEATURES]>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

fn default_source() -> String {
    "gan".into()
}

fn default_n() -> usize {
    5000
}

impl DesignRequest {
    pub fn design_target(&self) -> Result<DesignTarget> {
        let tol = match &self.tol {
            OneOrMany::One(t) => [*t; N_OUTPUTS],
            OneOrMany::Many(v) => v
                .as_slice()
                .try_into()
                .map_err(|_| Error::Config(format!("tol needs 1 or 3 values, got {}", v.len())))?,
        };
        DesignTarget::new(self.target.depth, self.target.top, self.target.bottom, tol)
    }

    pub fn options(&self) -> DesignOptions {
        DesignOptions {
            top_k: self.top_k.unwrap_or(DEFAULT_TOP_K),
            ..DesignOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub rank: usize,
    pub score: f64,
    pub candidate_index: usize,
    pub frequency_hz: f64,
    pub amplitude_mm: f64,
    pub passes: u32,
    pub laser_distance_mm: f64,
    #[serde(flatten)]
    pub predicted: GeometryBody,
    pub in_tolerance: [bool; N_OUTPUTS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResponse {
    pub model_id: String,
    pub source: Source,
    pub seed: u64,
    pub candidates_considered: usize,
    pub target: DesignTarget,
    pub candidates: Vec<DesignRow>,
}

/// Runs `inverse::design` and shapes the result for the API.
pub fn design_response(
    model_id: &str,
    model: &TrainedModel,
    candidates: &CandidateSet,
    target: &DesignTarget,
    options: &DesignOptions,
    seed: u64,
) -> Result<DesignResponse> {
    let ranked = design(model, candidates, target, options)?;
    let goal = target.values();
    let rows = ranked
        .iter()
        .enumerate()
        .map(|(i, c)| DesignRow {
            rank: i + 1,
            score: c.score,
            candidate_index: c.index,
            frequency_hz: c.params.frequency(),
            amplitude_mm: c.params.amplitude(),
            passes: c.params.passes(),
            laser_distance_mm: c.params.laser_distance(),
            predicted: GeometryBody {
                depth_um: c.predicted.mean[0],
                top_width_um: c.predicted.mean[1],
                bottom_width_um: c.predicted.mean[2],
                depth_std_um: c.predicted.std[0],
                top_width_std_um: c.predicted.std[1],
                bottom_width_std_um: c.predicted.std[2],
            },
            in_tolerance: std::array::from_fn(|k| {
                (c.predicted.mean[k] - goal[k]).abs() <= target.tolerance_um[k]
            }),
        })
        .collect();
    Ok(DesignResponse {
        model_id: model_id.to_string(),
        source: candidates.source,
        seed,
        candidates_considered: candidates.len(),
        target: *target,
        candidates: rows,
    })
}

fn request_candidates(state: &AppState, req: &DesignRequest, seed: u64) -> Result<CandidateSet> {
    match Source::parse(&req.source)? {
        Source::Grid => grid_candidates(table_ranges(), req.grid_counts.unwrap_or([15, 15, 16, 15])),
        Source::Gan => sample_gan(state.gan(seed)?.as_ref(), req.n, seed),
    }
}

async fn design_handler(State(state): State<AppState>, ApiJson(req): ApiJson<DesignRequest>) -> ApiResult<DesignResponse> {
    let model = state.model(&req.model_id)?;
    let target = req.design_target()?;
    let seed = req.seed.unwrap_or(state.inner.seed);
    let response = tokio::task::spawn_blocking(move || {
        let candidates = request_candidates(&state, &req, seed)?;
        design_response(&req.model_id, &model, &candidates, &target, &req.options(), seed)
    })
    .await
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        code: "internal_error".into(),
        message: e.to_string(),
    })??;
    Ok(Json(response))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureShare {
    pub feature: Feature,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputImportance {
    pub output: Output,
    pub features: Vec<FeatureShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceResponse {
    pub model_id: String,
    pub outputs: Vec<OutputImportance>,
}

pub fn importance_response(model_id: &str, model: &TrainedModel) -> Result<ImportanceResponse> {
    let Fitted::Gbt(trees) = &model.fitted else {
        return Err(Error::State(format!(
            "feature importance needs a gbt model, '{model_id}' is {}",
            model.family.name()
        )));
    };
    Ok(ImportanceResponse {
        model_id: model_id.to_string(),
        outputs: model
            .targets
            .iter()
            .zip(trees)
            .map(|(o, t)| OutputImportance {
                output: *o,
                features: feature_importance(t)
                    .into_iter()
                    .map(|(f, importance)| FeatureShare {
                        feature: Feature::ALL[f],
                        importance,
                    })
                    .collect(),
            })
            .collect(),
    })
}

async fn importance(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<ImportanceResponse> {
    let model = state.model(&id)?;
    Ok(Json(importance_response(&id, &model)?))
}

/// Loads the dataset and registry, binds the port and serves until Ctrl-C.
pub fn serve_blocking(config: ServiceConfig) -> Result<()> {
    let data = load_dataset(config.data_path.as_deref())?;
    let state = AppState::new(data, &config.model_dir, config.workers, config.seed)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let addr = SocketAddr::from(([127, 0, 0, 1], config.port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Error::from(e).context(format!("bind {addr}")))?;
        println!("listening on http://{}", listener.local_addr()?);
        let app = router(state, Some(&config.static_dir));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
