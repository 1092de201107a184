use dampwave::harness::{run_experiment, verify, ExperimentConfig, HarnessError, Manifest, Stage};
use std::fs;
use std::path::Path;

fn quick(out: &Path, extra: &[&str]) -> ExperimentConfig {
    let mut o = vec![
        "mesh.source=\"icosphere:1:2\"".to_string(),
        "time.t_max=9.0".into(),
        format!("run.output={:?}", out.display().to_string()),
    ];
    o.extend(extra.iter().map(|s| s.to_string()));
    ExperimentConfig::preset("sphere-full", &o).unwrap()
}

fn manifest(dir: &Path) -> Manifest {
    fs::read_to_string(dir.join("manifest.txt")).unwrap().parse().unwrap()
}

#[test]
fn same_seed_gives_identical_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&quick(&a, &[])).unwrap();
    run_experiment(&quick(&b, &[])).unwrap();
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma, mb);
    assert!(ma.files().count() >= 8);
    for (name, _) in ma.files() {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn different_seed_changes_the_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&quick(&a, &[])).unwrap();
    run_experiment(&quick(&b, &["run.seed=2"])).unwrap();
    let hash = |d: &Path| manifest(d).get("file.trajectory.csv.sha256").unwrap().to_string();
    assert_ne!(hash(&a), hash(&b));
}

#[test]
fn artifact_directory_is_complete_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_experiment(&quick(tmp.path(), &[])).unwrap();
    assert!(run.certification.envelope_ok);
    let report = verify(tmp.path()).unwrap();
    assert_eq!(report.status, "ok");
    assert!(report.envelope_checked);
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,E,kinetic,potential,dissipated_increment,dissipation_residual\n"));
    let env = fs::read_to_string(tmp.path().join("envelope.csv")).unwrap();
    assert!(env.starts_with("t,S,E,"));
    // the resolved config alone reproduces the run
    let cfg_text = fs::read_to_string(tmp.path().join("config.toml")).unwrap();
    let again = tmp.path().join("again");
    let cfg = ExperimentConfig::from_toml(&cfg_text, &[format!("run.output={:?}", again.display().to_string())]).unwrap();
    run_experiment(&cfg).unwrap();
    assert_eq!(manifest(tmp.path()), manifest(&again));
}

#[test]
fn tampering_is_detected() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&quick(tmp.path(), &[])).unwrap();
    let p = tmp.path().join("trajectory.csv");
    let mut text = fs::read_to_string(&p).unwrap();
    text.push_str("99,0,0,0,0,0\n");
    fs::write(&p, text).unwrap();
    assert!(matches!(verify(tmp.path()), Err(HarnessError::Verify(_))));
}

#[test]
fn invalid_config_is_rejected_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let o = format!("run.output={:?}", out.display().to_string());
    assert!(ExperimentConfig::preset("sphere-full", &["damping.a0=0".into(), o]).is_err());
    assert!(!out.exists());
}

#[test]
fn stage_failure_is_recorded_with_partial_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    // a tube narrower than the mesh resolution is rejected while building the damping
    let cfg = quick(tmp.path(), &["patches.selection=\"all\"", "damping.eps_tube=0.05"]);
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, HarnessError::Stage { stage: Stage::Geometry, .. }), "{err}");
    let m = manifest(tmp.path());
    assert_eq!(m.get("status"), Some("failed"));
    assert_eq!(m.get("failed_stage"), Some("geometry"));
    assert_eq!(m.get("stage.mesh"), Some("ok"));
    assert!(m.get("error").unwrap().contains("tube width"));
    assert!(tmp.path().join("validation.txt").exists());
    assert!(!tmp.path().join("trajectory.csv").exists());
    assert_eq!(verify(tmp.path()).unwrap().status, "failed");
}

#[test]
fn too_short_run_fails_in_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let err = run_experiment(&quick(tmp.path(), &["time.t_max=4.0"])).unwrap_err();
    assert!(matches!(err, HarnessError::Stage { stage: Stage::Decay, .. }), "{err}");
    assert!(tmp.path().join("trajectory.csv").exists());
    verify(tmp.path()).unwrap();
}

#[test]
fn snapshots_and_multiplier_are_written_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_experiment(&quick(tmp.path(), &["diagnostics.snapshots=true", "diagnostics.multiplier=true"])).unwrap();
    assert!(run.multiplier.unwrap().normalized.is_finite());
    let m = manifest(tmp.path());
    assert!(m.get("file.snapshots.csv.sha256").is_some());
    assert!(m.get("file.multiplier.txt.sha256").is_some());
    verify(tmp.path()).unwrap();
}
