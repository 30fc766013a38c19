use std::fs;
use std::process::Command;

use center_manifold::certification::CertReport;
use center_manifold::config::ConstantsConfig;
use center_manifold::harness::{export, run_pipeline, Check, ExportFormat, RunConfig, SurfaceKind, SurfaceSpec};
use center_manifold::Error;

fn quick(kind: SurfaceKind, checks: &[Check]) -> RunConfig {
    let mut run = RunConfig::new(SurfaceSpec::new(kind));
    run.checks = checks.to_vec();
    run
}

#[test]
fn plane_passes_everything_with_zero_blend() {
    let run = quick(SurfaceKind::Plane, &Check::ALL);
    let out = run_pipeline(&run).unwrap();
    assert!(out.report.passed(), "{:?}", out.report.failures());
    assert_eq!(out.surfaces.len(), 2);
    for h in &out.surfaces {
        assert!(h.values.max_abs() == 0.0);
        assert_eq!(h.c_norm(4), 0.0);
    }
    assert_eq!(out.report.schema_version, 1);
    assert!(out.report.metadata.contains_key("run_config"));
}

#[test]
fn blend_error_decreases_on_harmonic_quadratic() {
    let run = quick(SurfaceKind::HarmonicQuadratic { eps: 0.05 }, &[Check::BlendStability]);
    let out = run_pipeline(&run).unwrap();
    let e: Vec<f64> = out.levels.iter().map(|l| l.c0_error).collect();
    assert_eq!(out.levels.iter().map(|l| l.k).collect::<Vec<_>>(), vec![7, 8]);
    assert!(e[1] <= e[0], "{e:?}");
    let rec = out.report.records.iter().find(|r| r.name == "blend_c0_k7_k8").unwrap();
    assert!(rec.pass);
}

#[test]
fn stage_failures_name_level_and_cube() {
    let mut run = quick(SurfaceKind::HarmonicQuadratic { eps: 0.05 }, &[Check::Partition]);
    run.constants.eps0 = 1e-4;
    match run_pipeline(&run) {
        Err(Error::Cube { k: 7, cube, source }) => {
            assert_eq!(cube, [-3, -3]);
            assert!(matches!(*source, Error::NotAdmissible { .. }), "{source}");
        }
        other => panic!("{:?}", other.err()),
    }
}

#[test]
fn heavy_defects_violate_the_mass_hypothesis() {
    let kind = SurfaceKind::Spiked {
        base: Box::new(SurfaceKind::Plane),
        defect_fraction: 0.05,
        defect_mass: Some(0.01),
        seed: 7,
    };
    let err = run_pipeline(&quick(kind, &[Check::Decay])).err().unwrap();
    assert!(matches!(err, Error::MassHypothesis { .. }), "{err}");
    assert!(err.is_input_error());
}

#[test]
fn config_validation_and_round_trip() {
    let mut run = quick(SurfaceKind::Enneper { eps: 0.1 }, &[Check::Decay, Check::Tilt]);
    run.seed = 11;
    let back = RunConfig::from_json(&run.to_json().unwrap()).unwrap();
    assert_eq!(back.levels(), (7, 8));
    assert_eq!(back.checks, run.checks);
    assert_eq!(back.seed, 11);
    let minimal = RunConfig::from_json(r#"{"surface":{"kind":"plane"}}"#).unwrap();
    assert_eq!(minimal.checks, Check::ALL.to_vec());
    assert_eq!(minimal.constants, ConstantsConfig::default());

    run.k_max = Some(12);
    assert!(matches!(run.validate(), Err(Error::InvalidConfig(_))));
    assert!(RunConfig::from_json(r#"{"surface":{"kind":"enneper","eps":0.1},"k_min":6}"#).is_err());
    assert_eq!(Check::parse("basic_decay").unwrap(), Check::BasicDecay);
    assert!(Check::parse("nope").is_err());
}

#[test]
fn export_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let empty = CertReport::new(&ConstantsConfig::default());
    let files = export(&empty, &[], ExportFormat::Csv, dir.path()).unwrap();
    let text = fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("# schema_version=1\nname,"));

    let mut run = quick(SurfaceKind::HarmonicQuadratic { eps: 0.05 }, &[Check::Decay, Check::BlendStability]);
    run.k_max = Some(7);
    let a = run_pipeline(&run).unwrap();
    let b = run_pipeline(&run).unwrap();
    let (da, db) = (dir.path().join("a"), dir.path().join("b"));
    for format in [ExportFormat::Json, ExportFormat::Csv] {
        let fa = export(&a.report, &a.surfaces, format, &da).unwrap();
        let fb = export(&b.report, &b.surfaces, format, &db).unwrap();
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{x:?}");
        }
    }
    let csv = fs::read_to_string(da.join("h_k7.csv")).unwrap();
    let side = a.surfaces[0].values.side();
    // comment line and column header
    assert_eq!(csv.lines().count(), side * side + 2);
}

fn cmfold(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_cmfold")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    };
    let plane = cfg("plane.json", r#"{"surface":{"kind":"plane"},"checks":["decay","partition"],"k_max":7}"#);
    let out = dir.path().join("report.json");
    assert_eq!(cmfold(&["certify", "--config", &plane, "--out", out.to_str().unwrap()]), 0);
    assert!(CertReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap().passed());

    let spiked = cfg(
        "spiked.json",
        r#"{"surface":{"kind":"spiked","base":{"kind":"harmonic_quadratic","eps":0.05},
            "defect_fraction":0.001,"defect_mass":0.001,"seed":7},"checks":["basic_decay"],"k_max":7}"#,
    );
    assert_eq!(cmfold(&["certify", "--config", &spiked, "--out", out.to_str().unwrap()]), 1);

    let broken = cfg("broken.json", r#"{"surface":{"kind":"enneper"}}"#);
    assert_eq!(cmfold(&["certify", "--config", &broken]), 2);
    assert_eq!(cmfold(&["certify", "--config", &plane, "--k", "3"]), 2);
    assert_eq!(cmfold(&["certify", "--config", &plane, "--checks", "bogus"]), 2);
    assert_eq!(cmfold(&["frobnicate"]), 2);

    let surf = dir.path().join("surface.json");
    assert_eq!(cmfold(&["generate", "--config", &plane, "--out", surf.to_str().unwrap()]), 0);
    assert!(fs::metadata(&surf).unwrap().len() > 0);
}
