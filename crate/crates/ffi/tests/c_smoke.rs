//! Compiles a C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "lasml.h"

int main(void) {
    LasmlDataset *ds = NULL;
    LasmlModel *model = NULL;
    size_t n = 0;
    if (lasml_dataset_bundled(&ds) != LASML_STATUS_OK) return 10;
    if (lasml_dataset_len(ds, &n) != LASML_STATUS_OK || n != 124) return 11;
    if (lasml_model_train(ds, "linear", 0, &model) != LASML_STATUS_OK) return 12;
    LasmlParams p = {500.0, 0.5, 40, 92.5};
    LasmlGeometry g;
    if (lasml_model_predict(model, &p, 1, &g) != LASML_STATUS_OK) return 13;
    if (lasml_model_train(ds, "svm", 0, &model) != LASML_STATUS_CONFIG_ERROR) return 14;
    if (lasml_last_error_message() == NULL) return 15;
    printf("%.6f %.6f %.6f\n", g.depth_um, g.top_width_um, g.bottom_width_um);
    lasml_model_free(model);
    lasml_dataset_free(ds);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test> → target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("liblasml_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler runs");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));

    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let values: Vec<f64> = String::from_utf8(run.stdout)
        .unwrap()
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();

    let model = lasml::model::fit_model(&lasml::model::Family::linear(), lasml::model::Target::All, &lasml::synthetic::bundled()).unwrap();
    let p = lasml::dataset::LaserParams::new(500.0, 0.5, 40, 92.5).unwrap();
    let want = model.predict_geometry(&[p]).unwrap()[0].mean;
    for (got, want) in values.iter().zip(want) {
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }
}
