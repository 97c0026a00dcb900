use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("scaling error: column {0} has a degenerate range (max == min)")]
    DegenerateColumn(String),

    #[error("unknown column: {0}")]
    UnknownColumn(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("fold error: {0}")]
    Fold(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("shape error: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("mode collapse detected at epoch {epoch} (feature {feature} std {std:.4})")]
    ModeCollapse {
        epoch: usize,
        feature: usize,
        std: f64,
    },

    #[error("size error: {0}")]
    Size(String),

    #[error("state error: {0}")]
    State(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wraps `self` with a short context prefix such as `fold 3`.
    pub fn context(self, context: impl fmt::Display) -> Self {
        Error::Context {
            context: context.to_string(),
            source: Box::new(self),
        }
    }

    /// Stable machine-readable code, used by the CLI and the HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Csv(_) => "parse_error",
            Error::Domain(_) => "domain_error",
            Error::Geometry(_) => "geometry_error",
            Error::DegenerateColumn(_) => "scaling_error",
            Error::UnknownColumn(_) => "lookup_error",
            Error::Split(_) => "split_error",
            Error::Fold(_) => "fold_error",
            Error::Fit(_) => "fit_error",
            Error::Config(_) => "config_error",
            Error::Shape { .. } => "shape_error",
            Error::Training { .. } => "training_error",
            Error::Metric(_) => "metric_error",
            Error::ModeCollapse { .. } => "mode_collapse",
            Error::Size(_) => "size_error",
            Error::State(_) => "state_error",
            Error::Format(_) | Error::Json(_) => "format_error",
            Error::Context { source, .. } => source.code(),
            Error::Io(_) => "io_error",
        }
    }

    /// True for errors caused by bad input (files, arguments) rather than by a
    /// failed computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Context { source, .. } => source.is_input_error(),
            Error::Parse { .. }
            | Error::Csv(_)
            | Error::Domain(_)
            | Error::Geometry(_)
            | Error::UnknownColumn(_)
            | Error::Config(_)
            | Error::Format(_)
            | Error::Json(_)
            | Error::Io(_) => true,
            _ => false,
        }
    }
}
