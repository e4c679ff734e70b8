mod common;

use std::path::Path;

use blendsem_core::config::Experiment;
use blendsem_core::diagnostics::SERIES_HEADER;
use blendsem_core::{FluxKind, RunConfig, Solver, VolumeForm};

const PRESETS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets");

fn preset(name: &str) -> String {
    std::fs::read_to_string(Path::new(PRESETS).join(name)).unwrap()
}

fn no_env() -> Vec<(String, String)> {
    Vec::new()
}

#[test]
fn presets_parse() {
    let khi = RunConfig::load(&preset("khi.cfg"), no_env(), &[]).unwrap();
    assert_eq!(khi.experiment, Experiment::KelvinHelmholtz);
    assert_eq!((khi.mesh.elements_x, khi.degree), (64, 3));
    assert_eq!(khi.time.t_end, 25.0);
    let sedov = RunConfig::load(&preset("sedov.cfg"), no_env(), &[]).unwrap();
    assert_eq!(sedov.experiment, Experiment::Sedov);
    assert_eq!(sedov.surface_flux, FluxKind::Hlle);
    assert_eq!(sedov.volume_form, VolumeForm::Split);
    assert!(sedov.indicator.enabled && sedov.indicator.propagation_sweep);
    for desk in ["khi_desk.cfg", "sedov_desk.cfg"] {
        let c = RunConfig::load(&preset(desk), no_env(), &[]).unwrap();
        assert_eq!(c.mesh.elements_x, 16, "{desk}");
    }
}

#[test]
fn overrides_take_precedence_over_environment_and_file() {
    let text = "run.experiment = khi\ntime.t_end = 3\ntime.cfl = 0.4\n";
    let env = vec![
        ("BLENDSEM_TIME_T_END".to_string(), "2".to_string()),
        ("BLENDSEM_TIME.CFL".to_string(), "0.3".to_string()),
        ("UNRELATED".to_string(), "x".to_string()),
    ];
    let c = RunConfig::load(text, env.clone(), &[]).unwrap();
    assert_eq!((c.time.t_end, c.time.cfl), (2.0, 0.3));
    let c = RunConfig::load(text, env, &["time.t_end=1".to_string()]).unwrap();
    assert_eq!((c.time.t_end, c.time.cfl), (1.0, 0.3));
}

#[test]
fn invalid_values_are_rejected() {
    for bad in [
        "flux.surface = central",
        "mesh.elements_x = 1",
        "limiter.beta = 0",
        "gas.gamma = 1",
        "time.cfl = -1",
        "indicator.alpha_max = 2",
        "no_such.key = 1",
        "just garbage",
    ] {
        assert!(RunConfig::load(bad, no_env(), &[]).is_err(), "{bad}");
    }
}

#[test]
fn run_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let text = "run.experiment = khi\nmesh.elements_x = 4\nmesh.elements_y = 4\nsolver.degree = 2\n\
                time.t_end = 0.05\noutput.sample_interval = 0.01\noutput.snapshot_interval = 0.025\n";
    let cfg = RunConfig::load(text, no_env(), &[]).unwrap();
    let mut sim = Solver::new(cfg).unwrap();
    let summary = sim.run(Some(dir.path()), &mut ()).unwrap();
    assert!(summary.reached_t_end);
    assert_eq!(summary.samples.len(), 6);

    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next().unwrap(), SERIES_HEADER);
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), SERIES_HEADER.split(',').count());
        assert!((row[0] - 0.01 * i as f64).abs() <= 1e-12);
        assert!(row[11] > 0.0 && row[12] > 0.0);
    }

    // initial, two intervals and the final state
    let snaps = dir.path().join("snapshots");
    let mut names: Vec<_> = std::fs::read_dir(&snaps)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names
        .iter()
        .any(|n| n.starts_with("snap_000000_0.000000") && n.ends_with(".vtk")));
    assert!(names.iter().any(|n| n.contains("_0.050000") && n.ends_with(".csv")));
    assert_eq!(
        names.iter().filter(|n| n.ends_with(".vtk")).count(),
        summary.snapshots.len()
    );
    assert_eq!(names.len(), 2 * summary.snapshots.len());
    for p in &summary.snapshots {
        assert!(p.exists());
    }
}

#[test]
fn uniform_custom_flow_is_steady() {
    let text = "run.experiment = custom\nmesh.elements_x = 3\nmesh.elements_y = 3\nsolver.degree = 3\n\
                custom.rho = 1.3\ncustom.vx = 0.4\ncustom.vy = -0.2\ncustom.p = 0.8\ntime.t_end = 0.2\n";
    let mut sim = Solver::new(RunConfig::load(text, no_env(), &[]).unwrap()).unwrap();
    let initial = sim.state.clone();
    sim.run(None, &mut ()).unwrap();
    assert!(common::max_abs_diff(&initial, &sim.state) <= 1e-12);
}
