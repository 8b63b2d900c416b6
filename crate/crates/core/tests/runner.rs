use std::fs;
use std::path::{Path, PathBuf};

use lvhybrid::runner::{
    load_config, parse_config, run_scenario, sweep, write_sweep_summary, CheckKind, Scenario,
    Status, SweepAxis,
};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn quick(extra_checks: &str, out: &Path) -> Scenario {
    let mut sc = parse_config(&format!(
        "[scenario]\nname = quick\n[domain]\nnodes = 33\n[profiles]\na = 0.5 + cos(2*pi*x)\nu0 = 0.3\nv0 = 0.3\n\
         [run]\nt_max = 60\n[checks]\n{extra_checks}\n"
    ))
    .unwrap();
    sc.out_dir = out.to_path_buf();
    sc
}

#[test]
fn bundled_scenarios_parse() {
    let mut count = 0;
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ini") {
            let sc = load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(
                !sc.checks.is_empty(),
                "{} requests no checks",
                path.display()
            );
            count += 1;
        }
    }
    assert!(count >= 10);
}

#[test]
fn artifacts_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let sc = quick(
            "global-bound\nsink-extinction\nfloor-ustar",
            &dir.path().join(sub),
        );
        run_scenario(&sc).unwrap()
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first.verdicts.len(), 3);
    for name in [
        "diagnostics.csv",
        "report.json",
        "field_0000000.000.csv",
        "field_0000060.000.csv",
    ] {
        assert!(dir.path().join("a").join(name).exists(), "{name}");
    }
    let a = fs::read(dir.path().join("a/diagnostics.csv")).unwrap();
    let b = fs::read(dir.path().join("b/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
    let fa = fs::read(dir.path().join("a/field_0000060.000.csv")).unwrap();
    let fb = fs::read(dir.path().join("b/field_0000060.000.csv")).unwrap();
    assert_eq!(fa, fb);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/report.json")).unwrap())
            .unwrap();
    assert_eq!(json["scenario"], "quick");
    assert_eq!(json["verdicts"].as_array().unwrap().len(), 3);
    let csv = String::from_utf8(a).unwrap();
    assert!(csv.starts_with("t,sup_u,sup_v,min_u,min_v,M,gradlog,floor_violation,bound_excess\n"));
    assert_eq!(csv.lines().count(), 62);
    assert_eq!(second.verdicts, first.verdicts);
}

#[test]
fn failing_check_fails_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = quick("global-bound = -1", dir.path());
    let r = run_scenario(&sc).unwrap();
    assert_eq!(
        r.verdict(CheckKind::GlobalBound).unwrap().status,
        Status::Fail
    );
    assert!(!r.passed());
}

#[test]
fn unmet_hypotheses_are_skipped_with_a_reason() {
    let dir = tempfile::tempdir().unwrap();
    let sc = quick(
        "ordered-coexistence\nlyapunov-threshold\nfloor-amin",
        dir.path(),
    );
    let r = run_scenario(&sc).unwrap();
    assert_eq!(r.verdicts.len(), 3);
    for v in &r.verdicts {
        assert_eq!(v.status, Status::Skipped, "{v:?}");
        assert!(
            v.note.as_ref().is_some_and(|n| n.contains("sinks")),
            "{v:?}"
        );
    }
    assert!(r.passed());
}

#[test]
fn sweep_isolates_failures() {
    let dir = tempfile::tempdir().unwrap();
    let base = quick("global-bound", dir.path());
    let entries = sweep(&base, SweepAxis::D, &[0.05, -1.0, 0.2], 2);
    assert_eq!(entries.len(), 3);
    assert!(entries[0].result.is_ok());
    assert!(entries[1].result.is_err());
    assert!(entries[2].result.is_ok());
    let mut out = Vec::new();
    write_sweep_summary(&entries, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(2).unwrap().starts_with("-1.0,,,error,"));
    assert!(dir.path().join("d=0.05/report.json").exists());
    assert!(sweep(&base, SweepAxis::C, &[0.1], 1)[0].result.is_err());
}

#[test]
fn two_dimensional_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc = parse_config(
        "[scenario]\nname = flat2d\n[domain]\ndimension = 2\nnodes = 9, 5\nextent = 1, 0.5\n\
         [profiles]\na = 1 + 0.2*cos(pi*x)*cos(2*pi*y)\nu0 = 0.4\nv0 = 0.4\n[run]\nt_max = 3\n\
         [checks]\nglobal-bound\nsteady-identity\n[params]\nbound_after = 0\n",
    )
    .unwrap();
    sc.out_dir = dir.path().to_path_buf();
    let r = run_scenario(&sc).unwrap();
    assert!(r.passed(), "{r:?}");
    let field = fs::read_to_string(dir.path().join("field_0000003.000.csv")).unwrap();
    assert!(field.starts_with("x,y,u,v\n"));
    assert_eq!(field.lines().count(), 1 + 45);
}
