//! Compiles a small C program against the generated header and the static
//! library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "avar_mdp.h"

static const char *MODEL =
    "{\"states\": 1, \"actions\": 1, \"admissible\": [[0]],"
    " \"transitions\": [{\"x\": 0, \"a\": 0, \"x2\": 0, \"p\": 1.0}],"
    " \"costs\": [{\"x\": 0, \"a\": 0, \"c\": 1}]}";

int main(void) {
    AvarModel *model = NULL;
    AvarSolution *solution = NULL;
    double avar = 0.0, s_star = 0.0;
    if (avar_model_from_json(MODEL, &model) != AVAR_STATUS_OK) return 1;
    if (avar_solve_finite(model, 0, 3, 0.6, 1.0, 1.0, &solution) != AVAR_STATUS_OK) return 2;
    if (avar_solution_avar(solution, &avar, &s_star) != AVAR_STATUS_OK) return 3;
    if (avar_solve_finite(model, 0, 3, 2.0, 1.0, 1.0, &solution) != AVAR_STATUS_INVALID_ARGUMENT) return 4;
    if (avar_last_error_message() == NULL) return 5;
    avar_solution_free(solution);
    avar_model_free(model);
    printf("%g %g\n", avar, s_star);
    return fabs(avar - 3.0) < 1e-12 ? 0 : 6;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libavar_mdp_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    let bin = tmp.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler named cc on PATH");
    assert!(status.success());

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "3 3\n");
}
