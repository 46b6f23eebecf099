//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "factsim.h"

int main(void) {
    FactsimRouge r;
    if (factsim_rouge("The car is fast", "The car is not slow", &r) != FACTSIM_STATUS_OK) return 1;
    if (r.r1 < 0.666 || r.r1 > 0.667) return 2;

    FactsimFactSet *reviews = NULL, *summary = NULL;
    FactsimEncoder *enc = NULL;
    FactsimReport *report = NULL;
    if (factsim_parse_tuples("[('car', 'fast'), ('seat', 'soft')]", &reviews) != FACTSIM_STATUS_OK) return 3;
    if (factsim_factset_new(1, &summary) != FACTSIM_STATUS_OK) return 4;
    if (factsim_factset_push(summary, "car", "fast", 0) != FACTSIM_STATUS_OK) return 5;
    if (factsim_encoder_test(&enc) != FACTSIM_STATUS_OK) return 6;
    if (factsim_score(enc, reviews, summary, &report) != FACTSIM_STATUS_OK) return 7;
    FactsimScores s;
    factsim_report_scores(report, &s);
    if (s.consistency != 1.0) return 8;

    FactsimFactSet *bad = NULL;
    if (factsim_parse_tuples("nothing", &bad) != FACTSIM_STATUS_PARSE) return 9;
    if (factsim_last_error() == NULL) return 10;

    printf("%.6f %.6f %.6f\n", s.coverage, s.consistency, s.factsim);
    factsim_report_free(report);
    factsim_encoder_free(enc);
    factsim_factset_free(reviews);
    factsim_factset_free(summary);
    return 0;
}
"#;

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libfactsim_ffi.a");
    assert!(
        lib.exists(),
        "static library not built at {}",
        lib.display()
    );
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler named cc is on PATH");
    assert!(status.success(), "C compilation failed");

    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "C program exited with {:?}",
        out.status
    );
    let line = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<f64> = line
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(fields.len(), 3);
    assert_eq!(fields[1], 1.0);
    assert!(fields[0] < 1.0 && fields[2] < 1.0);
}
