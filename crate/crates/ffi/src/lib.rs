//! C ABI over the lasml toolkit.
//!
//! Every function returns a `LasmlStatus`. On failure the message is kept
//! per thread and can be read with `lasml_last_error_message`. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lasml::dataset::{Dataset, LaserParams};
use lasml::generator::{grid_candidates, table_ranges};
use lasml::inverse::{design, DesignOptions, DesignTarget, DEFAULT_COLLAPSE_DISTANCE};
use lasml::model::{fit_model, Family, Target, TrainedModel};

/// Result of every call. Zero means success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LasmlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    ParseError = 3,
    DomainError = 4,
    ConfigError = 5,
    StateError = 6,
    IoError = 7,
    FormatError = 8,
    SizeError = 9,
    ComputeError = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&lasml::Error> for LasmlStatus {
    fn from(e: &lasml::Error) -> Self {
        match e.code() {
            "parse_error" => LasmlStatus::ParseError,
            "domain_error" | "geometry_error" | "lookup_error" => LasmlStatus::DomainError,
            "config_error" | "shape_error" => LasmlStatus::ConfigError,
            "state_error" => LasmlStatus::StateError,
            "io_error" => LasmlStatus::IoError,
            "format_error" => LasmlStatus::FormatError,
            "size_error" => LasmlStatus::SizeError,
            _ => LasmlStatus::ComputeError,
        }
    }
}

/// Opaque dataset handle.
pub struct LasmlDataset {
    inner: Dataset,
}

/// Opaque trained-model handle.
pub struct LasmlModel {
    inner: TrainedModel,
}

/// Process parameters of one candidate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LasmlParams {
    pub frequency_hz: f64,
    pub amplitude_mm: f64,
    pub passes: u32,
    pub laser_distance_mm: f64,
}

/// Predicted channel geometry in µm. Standard deviations are zero for
/// single-network and non-network models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LasmlGeometry {
    pub depth_um: f64,
    pub top_width_um: f64,
    pub bottom_width_um: f64,
    pub depth_std_um: f64,
    pub top_width_std_um: f64,
    pub bottom_width_std_um: f64,
}

/// Target geometry with a symmetric tolerance per output, all in µm.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LasmlTarget {
    pub depth_um: f64,
    pub top_width_um: f64,
    pub bottom_width_um: f64,
    pub tolerance_um: [f64; 3],
}

/// One ranked design candidate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LasmlDesignRow {
    pub candidate_index: usize,
    pub score: f64,
    pub params: LasmlParams,
    pub predicted: LasmlGeometry,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LasmlStatus, String);

impl From<lasml::Error> for Failure {
    fn from(e: lasml::Error) -> Self {
        Failure(LasmlStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LasmlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LasmlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LasmlStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {message}"));
            LasmlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(LasmlStatus::InvalidString, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_params(p: &LasmlParams) -> Result<LaserParams, Failure> {
    Ok(LaserParams::new(p.frequency_hz, p.amplitude_mm, p.passes, p.laser_distance_mm)?)
}

fn from_params(p: &LaserParams) -> LasmlParams {
    LasmlParams {
        frequency_hz: p.frequency(),
        amplitude_mm: p.amplitude(),
        passes: p.passes(),
        laser_distance_mm: p.laser_distance(),
    }
}

fn from_prediction(g: &lasml::model::GeometryPrediction) -> LasmlGeometry {
    LasmlGeometry {
        depth_um: g.mean[0],
        top_width_um: g.mean[1],
        bottom_width_um: g.mean[2],
        depth_std_um: g.std[0],
        top_width_std_um: g.std[1],
        bottom_width_std_um: g.std[2],
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lasml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lasml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The bundled synthetic dataset.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn lasml_dataset_bundled(out: *mut *mut LasmlDataset) -> LasmlStatus {
    guard(|| {
        let handle = Box::into_raw(Box::new(LasmlDataset {
            inner: lasml::synthetic::bundled(),
        }));
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// Parses a dataset from CSV text.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasml_dataset_parse_csv(csv: *const c_char, out: *mut *mut LasmlDataset) -> LasmlStatus {
    guard(|| {
        let data = lasml::dataset::parse_csv(str_arg(csv, "csv")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(Box::into_raw(Box::new(LasmlDataset { inner: data })));
        Ok(())
    })
}

/// Reads a dataset CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasml_dataset_load(path: *const c_char, out: *mut *mut LasmlDataset) -> LasmlStatus {
    guard(|| {
        let data = lasml::cli::load_dataset(Some(Path::new(str_arg(path, "path")?)))?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(Box::into_raw(Box::new(LasmlDataset { inner: data })));
        Ok(())
    })
}

/// Number of rows in a dataset.
///
/// # Safety
/// `dataset` must be a live handle and `out_len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasml_dataset_len(dataset: *const LasmlDataset, out_len: *mut usize) -> LasmlStatus {
    guard(|| write_out(out_len, ref_arg(dataset, "dataset")?.inner.len(), "out_len"))
}

/// Releases a dataset handle. NULL is ignored.
///
/// # Safety
/// `dataset` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lasml_dataset_free(dataset: *mut LasmlDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fits a model on all three outputs. `family` is one of linear, poly2,
/// poly3, poly4, gbt or mlp.
///
/// # Safety
/// `dataset` must be a live handle, `family` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasml_model_train(
    dataset: *const LasmlDataset,
    family: *const c_char,
    seed: u64,
    out: *mut *mut LasmlModel,
) -> LasmlStatus {
    guard(|| {
        let data = &ref_arg(dataset, "dataset")?.inner;
        let family = Family::parse(str_arg(family, "family")?)?.with_seed(seed);
        let model = fit_model(&family, Target::All, data)?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(Box::into_raw(Box::new(LasmlModel { inner: model })));
        Ok(())
    })
}

/// Loads a model file written by the CLI, the service or `lasml_model_save`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasml_model_load(path: *const c_char, out: *mut *mut LasmlModel) -> LasmlStatus {
    guard(|| {
        let model = TrainedModel::load(Path::new(str_arg(path, "path")?))?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(Box::into_raw(Box::new(LasmlModel { inner: model })));
        Ok(())
    })
}

/// Writes a model file.
///
/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lasml_model_save(model: *const LasmlModel, path: *const c_char) -> LasmlStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        Ok(model.inner.save(Path::new(str_arg(path, "path")?))?)
    })
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lasml_model_free(model: *mut LasmlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicts geometry for `n` parameter rows into `out[0..n]`.
///
/// # Safety
/// `model` must be a live handle; `params` and `out` must each point to `n`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn lasml_model_predict(
    model: *const LasmlModel,
    params: *const LasmlParams,
    n: usize,
    out: *mut LasmlGeometry,
) -> LasmlStatus {
    guard(|| {
        let model = &ref_arg(model, "model")?.inner;
        let rows = slice_arg(params, n, "params")?.iter().map(to_params).collect::<Result<Vec<_>, _>>()?;
        let preds = model.predict_geometry(&rows)?;
        if n > 0 && out.is_null() {
            return Err(null("out"));
        }
        for (i, g) in preds.iter().enumerate() {
            out.add(i).write(from_prediction(g));
        }
        Ok(())
    })
}

/// Ranks grid candidates for a target. `grid_counts` holds four per-parameter
/// counts; `top_k` of zero uses the default. Up to `capacity` rows go to
/// `out` and the number written to `out_len`.
///
/// # Safety
/// `model` must be a live handle, `target` valid, `grid_counts` four
/// elements, `out` `capacity` elements and `out_len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lasml_design_grid(
    model: *const LasmlModel,
    target: *const LasmlTarget,
    grid_counts: *const usize,
    top_k: usize,
    out: *mut LasmlDesignRow,
    capacity: usize,
    out_len: *mut usize,
) -> LasmlStatus {
    guard(|| {
        let model = &ref_arg(model, "model")?.inner;
        let t = ref_arg(target, "target")?;
        let counts: [usize; 4] = slice_arg(grid_counts, 4, "grid_counts")?.try_into().expect("four counts");
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let target = DesignTarget::new(t.depth_um, t.top_width_um, t.bottom_width_um, t.tolerance_um)?;
        let options = DesignOptions {
            top_k: if top_k == 0 { DesignOptions::default().top_k } else { top_k },
            collapse_distance: DEFAULT_COLLAPSE_DISTANCE,
        };
        let candidates = grid_candidates(table_ranges(), counts)?;
        let ranked = design(model, &candidates, &target, &options)?;
        out_len.write(ranked.len());
        if ranked.len() > capacity {
            return Err(Failure(
                LasmlStatus::BufferTooSmall,
                format!("{} rows do not fit a buffer of {capacity}", ranked.len()),
            ));
        }
        if !ranked.is_empty() && out.is_null() {
            return Err(null("out"));
        }
        for (i, c) in ranked.iter().enumerate() {
            out.add(i).write(LasmlDesignRow {
                candidate_index: c.index,
                score: c.score,
                params: from_params(&c.params),
                predicted: from_prediction(&c.predicted),
            });
        }
        Ok(())
    })
}

/// Mean squared error of `n` predictions.
///
/// # Safety
/// `y` and `y_hat` must point to `n` elements and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lasml_mse(y: *const f64, y_hat: *const f64, n: usize, out: *mut f64) -> LasmlStatus {
    guard(|| {
        let v = lasml::eval::mse(slice_arg(y, n, "y")?, slice_arg(y_hat, n, "y_hat")?)?;
        write_out(out, v, "out")
    })
}

/// Coefficient of determination of `n` predictions.
///
/// # Safety
/// `y` and `y_hat` must point to `n` elements and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lasml_r2(y: *const f64, y_hat: *const f64, n: usize, out: *mut f64) -> LasmlStatus {
    guard(|| {
        let v = lasml::eval::r2(slice_arg(y, n, "y")?, slice_arg(y_hat, n, "y_hat")?)?;
        write_out(out, v, "out")
    })
}
