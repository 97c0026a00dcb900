use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use lasml::generator::{grid_candidates, sample_gan, table_ranges, train_gan, GanConfig};
use lasml::inverse::{DesignOptions, DesignTarget};
use lasml::model::{fit_model, Family, Target, TrainedModel};
use lasml::service::{design_response, importance_response, predict_response, router, AppState};
use lasml::synthetic::bundled;

struct Fixture {
    _dir: tempfile::TempDir,
    state: AppState,
    app: Router,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    let state = AppState::new(bundled(), &dir.path().join("models"), 2, 0).unwrap();
    let app = router(state.clone(), Some(dir.path()));
    Fixture { _dir: dir, state, app }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn train(app: &Router, body: Value) -> String {
    let (status, accepted) = call(app, "POST", "/api/train", Some(body)).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{accepted}");
    let job = accepted["job_id"].as_str().unwrap().to_string();
    for _ in 0..600 {
        let (status, v) = call(app, "GET", &format!("/api/jobs/{job}"), None).await;
        assert_eq!(status, StatusCode::OK);
        match v["status"].as_str().unwrap() {
            "pending" => tokio::time::sleep(std::time::Duration::from_millis(20)).await,
            "done" => return v["model_id"].as_str().unwrap().to_string(),
            _ => panic!("job failed: {v}"),
        }
    }
    panic!("job {job} did not finish");
}

fn assert_error_body(v: &Value) {
    assert!(v["error"].is_string() && v["code"].is_string(), "{v}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn health_and_summary() {
    let f = fixture();
    assert_eq!(call(&f.app, "GET", "/api/health", None).await, (StatusCode::OK, json!({"status": "ok"})));
    let (status, v) = call(&f.app, "GET", "/api/dataset/summary", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, serde_json::to_value(bundled().summary()).unwrap());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn trained_models_match_the_library() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "poly2", "seed": 4})).await;
    let expected = fit_model(&Family::poly(2), Target::All, &bundled()).unwrap();
    let (_, models) = call(&f.app, "GET", "/api/models", None).await;
    assert_eq!(models[0]["model_id"], id.as_str());
    assert_eq!(models[0]["family"], "poly2");
    assert_eq!(models[0]["seed"], 4);

    let params = json!({"frequency_hz": 500.0, "amplitude_mm": 0.5, "passes": 40, "laser_distance_mm": 92.5});
    let (status, v) = call(&f.app, "POST", "/api/predict", Some(json!({"model_id": id, "params": params}))).await;
    assert_eq!(status, StatusCode::OK);
    let p = lasml::dataset::LaserParams::new(500.0, 0.5, 40, 92.5).unwrap();
    let golden = predict_response(&id, &expected, &[p]).unwrap();
    assert_eq!(v, serde_json::to_value(golden).unwrap());

    let (status, v) = call(&f.app, "POST", "/api/predict", Some(json!({"model_id": id, "params": [params, params]}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 2);

    let second = train(&f.app, json!({"family": "poly2", "seed": 4})).await;
    assert_ne!(second, id, "retraining always creates a new id");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn mlp_training_records_seed_and_topology() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "mlp", "hidden": [8], "seed": 2, "output": "depth"})).await;
    let (_, models) = call(&f.app, "GET", "/api/models", None).await;
    assert_eq!(models[0]["targets"], json!(["depth"]));
    let (_, job) = call(&f.app, "GET", "/api/jobs/j1", None).await;
    assert_eq!(job["seed"], 2);
    assert_eq!(job["model_id"], id.as_str());
}

fn grid_design_golden(model: &TrainedModel, id: &str, target: DesignTarget) -> Value {
    let cands = grid_candidates(table_ranges(), [8, 8, 8, 8]).unwrap();
    serde_json::to_value(design_response(id, model, &cands, &target, &DesignOptions::default(), 0).unwrap()).unwrap()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn design_matches_the_library_for_both_spellings() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "poly2"})).await;
    let model = fit_model(&Family::poly(2), Target::All, &bundled()).unwrap();
    let target = DesignTarget::new(444.5, 500.0, 100.0, [50.0; 3]).unwrap();
    let golden = grid_design_golden(&model, &id, target);
    assert!(!golden["candidates"].as_array().unwrap().is_empty());

    let short = json!({"model_id": id, "target": {"depth": 444.5, "top": 500.0, "bottom": 100.0}, "tol": 50.0,
                       "source": "grid", "grid_counts": [8, 8, 8, 8]});
    let suffixed = json!({"model_id": id, "target": {"depth_um": 444.5, "top_width_um": 500.0, "bottom_width_um": 100.0},
                          "tolerance_um": [50.0, 50.0, 50.0], "source": "grid", "grid_counts": [8, 8, 8, 8]});
    for body in [short, suffixed] {
        let (status, v) = call(&f.app, "POST", "/api/design", Some(body)).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        assert_eq!(v, golden);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn gan_design_matches_the_library() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "poly2"})).await;
    let body = json!({"model_id": id, "target": {"depth": 635, "top": 500, "bottom": 0}, "tol": 50, "source": "gan", "n": 5000, "seed": 3});
    let (status, v) = call(&f.app, "POST", "/api/design", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");

    let model = fit_model(&Family::poly(2), Target::All, &bundled()).unwrap();
    let gan = train_gan(&bundled(), &GanConfig { seed: 3, ..GanConfig::default() }).unwrap();
    let cands = sample_gan(&gan, 5000, 3).unwrap();
    let target = DesignTarget::triangular(635.0, 500.0, [50.0; 3]).unwrap();
    let golden = design_response(&id, &model, &cands, &target, &DesignOptions::default(), 3).unwrap();
    assert_eq!(v, serde_json::to_value(golden).unwrap());
    for row in v["candidates"].as_array().unwrap() {
        assert_eq!(row["in_tolerance"], json!([true, true, true]));
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_designs_equal_serial_ones() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "gbt"})).await;
    let body = json!({"model_id": id, "target": {"depth": 400, "top": 520, "bottom": 90}, "tol": 60, "source": "grid", "grid_counts": [8, 8, 8, 8]});
    let serial = call(&f.app, "POST", "/api/design", Some(body.clone())).await;
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let app = f.app.clone();
            let body = body.clone();
            tokio::spawn(async move { call(&app, "POST", "/api/design", Some(body)).await })
        })
        .collect();
    for h in handles {
        assert_eq!(h.await.unwrap(), serial);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn importance_endpoint() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "gbt"})).await;
    let (status, v) = call(&f.app, "GET", &format!("/api/importance/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let model = fit_model(&Family::gbt(), Target::All, &bundled()).unwrap();
    assert_eq!(v, serde_json::to_value(importance_response(&id, &model).unwrap()).unwrap());
    assert_eq!(v["outputs"][0]["features"][0]["feature"], "passes");

    let poly = train(&f.app, json!({"family": "linear"})).await;
    let (status, v) = call(&f.app, "GET", &format!("/api/importance/{poly}"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error_body(&v);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn errors_use_the_common_body() {
    let f = fixture();
    let cases = [
        ("GET", "/api/jobs/j999", None, StatusCode::NOT_FOUND),
        ("GET", "/api/importance/m42", None, StatusCode::NOT_FOUND),
        ("POST", "/api/train", Some(json!({"family": "svm"})), StatusCode::BAD_REQUEST),
        ("POST", "/api/train", Some(json!({"famly": "mlp"})), StatusCode::UNPROCESSABLE_ENTITY),
        ("POST", "/api/predict", Some(json!({"model_id": "m1"})), StatusCode::UNPROCESSABLE_ENTITY),
        ("POST", "/api/design", Some(json!({"model_id": "nope", "target": {"depth": 1, "top": 1, "bottom": 0}, "tol": 5})), StatusCode::NOT_FOUND),
    ];
    for (method, uri, body, expected) in cases {
        let (status, v) = call(&f.app, method, uri, body).await;
        assert_eq!(status, expected, "{method} {uri}: {v}");
        assert_error_body(&v);
    }
    let id = train(&f.app, json!({"family": "linear"})).await;
    let bad_tol = json!({"model_id": id, "target": {"depth": 1, "top": 1, "bottom": 0}, "tol": 0});
    let (status, v) = call(&f.app, "POST", "/api/design", Some(bad_tol)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "domain_error");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn registry_survives_a_restart() {
    let f = fixture();
    let id = train(&f.app, json!({"family": "poly3"})).await;
    let dir = f._dir.path().join("models");
    let reopened = AppState::new(bundled(), &dir, 1, 0).unwrap();
    let ids: Vec<String> = reopened.models().into_iter().map(|m| m.model_id).collect();
    assert_eq!(ids, vec![id.clone()]);
    assert_eq!(*reopened.model(&id).unwrap(), *f.state.model(&id).unwrap());
    let app = router(reopened, None);
    let next = train(&app, json!({"family": "linear"})).await;
    assert_ne!(next, id);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn static_files_are_served() {
    let f = fixture();
    let (status, v) = call(&f.app, "GET", "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, Value::String("<html>ui</html>".into()));
}
