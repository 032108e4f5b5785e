use std::path::Path;
use std::process::Command;

use swarm_sacrifice_cli::{execute, load_config, summary_from_csv, Layer};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarm-sacrifice"))
}

fn files_equal(a: &Path, b: &Path) {
    let names = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
        v.sort();
        v
    };
    assert_eq!(names(a), names(b));
    for name in names(a) {
        let (pa, pb) = (a.join(&name), b.join(&name));
        if pa.is_dir() {
            files_equal(&pa, &pb);
        } else {
            assert_eq!(
                std::fs::read(&pa).unwrap(),
                std::fs::read(&pb).unwrap(),
                "{name:?} differs"
            );
        }
    }
}

#[test]
fn missing_fields_take_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"layer": "wellmixed", "n_agents": 10}"#).unwrap();
    let c = load_config(Some(&path), &[])
        .unwrap()
        .resolved(Layer::Wellmixed)
        .unwrap();
    assert_eq!(c.dt, Some(0.01));
    assert_eq!(c.gamma_thresh, 0.4);
    assert_eq!(c.tau_window, None);
    assert_eq!(c.n_agents, Some(10));
}

#[test]
fn too_many_localizers_names_the_field() {
    let out = bin()
        .args(["meanfield", "--out"])
        .arg(tempfile::tempdir().unwrap().path())
        .args(["n_agents=5", "n_pl=[2,6]"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n_pl") && err.contains("exceeds N"), "{err}");
}

#[test]
fn unknown_keys_and_bad_json_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, "{\n  \"r_lsot\": 0.1\n}").unwrap();
    let err = format!("{:#}", load_config(Some(&path), &[]).unwrap_err());
    assert!(err.contains("r_lsot"), "{err}");

    std::fs::write(&path, "{\n  \"r_lost\": 0.1,\n  oops\n}").unwrap();
    let err = format!("{:#}", load_config(Some(&path), &[]).unwrap_err());
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn grid_cell_failures_name_the_cell() {
    let c = load_config(None, &["r_int=[1, -1]".into()]);
    assert!(format!("{:#}", c.unwrap_err()).contains("r_int"));
    let c = load_config(None, &["tau_p=-1".into(), "regime=\"individual\"".into()]).unwrap();
    let err = format!(
        "{:#}",
        execute(Layer::Meanfield, &c, tempfile::tempdir().unwrap().path()).unwrap_err()
    );
    assert!(err.contains("grid cell r_int="), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (layer, extra) in [
        (
            "wellmixed",
            vec!["horizon=30", "runs=2", "record_occupancy=true", "collaboration=both"],
        ),
        ("spatial", vec!["horizon=30"]),
        ("meanfield", vec![]),
    ] {
        for dir in [&a, &b] {
            let status = bin()
                .arg(layer)
                .arg("--out")
                .arg(dir.path())
                .args(&extra)
                .status()
                .unwrap();
            assert!(status.success());
        }
    }
    files_equal(a.path(), b.path());
}

#[test]
fn worker_count_does_not_change_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let status = bin()
            .args(["wellmixed", "--workers", workers, "--out"])
            .arg(dir.path())
            .args(["horizon=20", "runs=3"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    files_equal(a.path(), b.path());
}

#[test]
fn printed_summary_matches_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (layer, file, extra) in [
        (Layer::Meanfield, "meanfield.csv", vec![]),
        (
            Layer::Wellmixed,
            "wellmixed.csv",
            vec!["horizon=20".to_string(), "collaboration=both".into()],
        ),
        (
            Layer::Spatial,
            "spatial.csv",
            vec!["scenario=coverage".into(), "runs=2".into(), "horizon=20".into()],
        ),
    ] {
        let c = load_config(None, &extra).unwrap();
        let outcome = execute(layer, &c, dir.path()).unwrap();
        assert_eq!(
            summary_from_csv(layer, &dir.path().join(file)).unwrap(),
            outcome.summary
        );
    }
    // Through the binary as well: stdout is exactly the summary.
    let out = bin()
        .args(["sweep", "--out"])
        .arg(dir.path())
        .args(["layer=wellmixed", "horizon=15", "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let printed: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(
        printed,
        summary_from_csv(Layer::Wellmixed, &dir.path().join("wellmixed.csv")).unwrap()
    );
}

#[test]
fn outputs_record_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["spatial", "--seed", "9", "--out"])
        .arg(dir.path())
        .arg("horizon=10")
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("spatial.csv")).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("# config {") && l.contains("\"seed\":9")));
    assert!(text.lines().any(|l| l == "# seed 9"));
}

#[test]
fn trajectory_file_round_trip() {
    use swarm_sacrifice::spatial::{synth_random_walk, write_trajectories, CylinderGeometry, WalkParams};
    let dir = tempfile::tempdir().unwrap();
    let g = CylinderGeometry::default();
    let mut frames = Vec::new();
    for id in 0..4 {
        frames.extend(synth_random_walk(&g, 20.0, &WalkParams::default(), id, 3).unwrap());
    }
    let path = dir.path().join("traj.csv");
    write_trajectories(std::fs::File::create(&path).unwrap(), &[], &frames).unwrap();
    let c = load_config(None, &[format!("trajectory_file={}", path.display())]).unwrap();
    let outcome = execute(Layer::Spatial, &c, dir.path()).unwrap();
    assert!(outcome.summary[0].starts_with("smart: n=4 "));
}
