use qincompat::devices::{fourier_pair, mub_qubit};
use qincompat::obscompat::{check_joint, degree_of_compatibility, NoiseMode};
use qincompat::Tolerances;
use qincompat_cli::device_file::{load, Device, DeviceFile};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qincompat"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, name: &str, dim: usize, file: &str) -> PathBuf {
    let o = run(&["generate", name, "--dim", &dim.to_string(), "--out", file], dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(file)
}

#[test]
fn check_joint_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "x", 2, "x.json");
    generate(d, "z", 2, "z.json");
    assert_eq!(run(&["check-joint", "z.json", "z.json"], d).status.code(), Some(0));
    assert_eq!(run(&["check-joint", "x.json", "z.json"], d).status.code(), Some(1));
    assert_eq!(run(&["check-joint", "x.json"], d).status.code(), Some(3));
    assert_eq!(run(&["no-such-command"], d).status.code(), Some(3));
    std::fs::write(d.join("bad.json"), r#"{"kind":"observable","dim":2,"outcomes":["a"],"effects":[[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#).unwrap();
    let o = run(&["check-joint", "bad.json", "x.json"], d);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));
}

#[test]
fn witness_is_a_valid_joint_observable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "z", 2, "z.json");
    let o = run(&["check-joint", "z.json", "z.json", "--witness", "joint.json"], d);
    assert_eq!(o.status.code(), Some(0));
    match load(&d.join("joint.json")).unwrap() {
        Device::Observable(m) => assert_eq!(m.num_outcomes(), 4),
        other => panic!("unexpected {}", other.kind()),
    }
}

#[test]
fn canonical_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (name, dim) in [("q", 3), ("p", 3), ("identity-channel", 2), ("maximally-entangled", 2), ("probe0", 2)] {
        let path = generate(d, name, dim, "dev.json");
        let text = std::fs::read_to_string(&path).unwrap();
        let dev = DeviceFile::parse(&text).unwrap().into_device().unwrap();
        assert_eq!(DeviceFile::from_device(&dev).to_canonical_string(), text, "{name}");
    }
}

#[test]
fn degree_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "q", 2, "q.json");
    generate(d, "p", 2, "p.json");
    let o = run(&["degree", "q.json", "p.json", "--json"], d);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cli = rec["value"].as_f64().unwrap();
    let (q, p) = fourier_pair(2).unwrap();
    let lib = degree_of_compatibility(&[q, p], NoiseMode::OptimizedTrivial, &Tolerances::default()).unwrap();
    assert_eq!(cli, lib.value);
    assert!((cli - 0.7071).abs() < 5e-3);
}

#[test]
fn verdicts_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "x", 2, "x.json");
    generate(d, "y", 2, "y.json");
    let o = run(&["check-joint", "x.json", "y.json", "--json"], d);
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (x, y, _) = mub_qubit();
    let lib = check_joint(&[x, y], &Tolerances::default()).unwrap();
    assert_eq!(rec["status"].as_str().unwrap(), lib.status().label());
    assert_eq!(rec["iterations"].as_u64().unwrap() as usize, lib.verdict.iterations);
}

#[test]
fn criteria_reports_miyadera_imai_witness() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "x", 2, "x.json");
    generate(d, "z", 2, "z.json");
    let out = stdout(&run(&["criteria", "x.json", "z.json"], d));
    assert!(out.lines().any(|l| l.starts_with("miyadera-imai: CERTIFIED x=")), "{out}");
}

#[test]
fn process_reports_commuting_incompatible_pair() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "probe0", 2, "t0.json");
    generate(d, "probe1", 2, "t1.json");
    let o = run(&["process", "t0.json", "t1.json", "--json"], d);
    assert_eq!(o.status.code(), Some(1));
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rec["status"].as_str().unwrap().starts_with("INFEASIBLE"));
    assert!(rec["details"]["max_commutator"].as_f64().unwrap() < 1e-14);
}

#[test]
fn channel_and_instrument_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "identity-channel", 2, "id.json");
    generate(d, "depolarizing", 2, "dep.json");
    generate(d, "z", 2, "z.json");
    assert_eq!(run(&["channel-compat", "id.json", "id.json"], d).status.code(), Some(1));
    assert_eq!(run(&["channel-compat", "id.json", "dep.json"], d).status.code(), Some(0));
    assert_eq!(run(&["obs-channel", "z.json", "id.json"], d).status.code(), Some(1));
    let o = run(&["obs-channel", "z.json", "dep.json", "--witness", "inst.json"], d);
    assert_eq!(o.status.code(), Some(0));
    let inst: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("inst.json")).unwrap()).unwrap();
    assert_eq!(inst["operation_chois"].as_array().unwrap().len(), 2);
}

#[test]
fn steering_and_order_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "x", 2, "x.json");
    generate(d, "z", 2, "z.json");
    generate(d, "maximally-entangled", 2, "omega.json");
    assert_eq!(run(&["steering", "omega.json", "x.json", "z.json", "--dim-a", "2"], d).status.code(), Some(1));
    assert_eq!(run(&["steering", "omega.json", "z.json"], d).status.code(), Some(3));
    assert_eq!(run(&["order", "z.json", "z.json"], d).status.code(), Some(0));
    assert_eq!(run(&["order", "x.json", "z.json"], d).status.code(), Some(1));
}

#[test]
fn region_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "q", 2, "q.json");
    generate(d, "p", 2, "p.json");
    let o = run(
        &["region", "q.json", "p.json", "--grid", "0:1:3", "--formula-dim", "2", "--parallel", "2", "--out", "grid.csv"],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("grid.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "lambda1,lambda2,verdict,formula");
    assert_eq!(rows.len(), 10);
    assert!(rows.contains(&"1,1,INFEASIBLE_CERTIFIED,false"));
    assert_eq!(run(&["region", "q.json", "p.json", "--weights", "0.5,0.5"], d).status.code(), Some(0));
}

#[test]
fn reproduce_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        assert_eq!(run(&["reproduce", "bc-bound-table", "--out", out], d).status.code(), Some(0));
        assert_eq!(run(&["reproduce", "process-q", "--out", out], d).status.code(), Some(0));
    }
    for f in ["bc_bound_table.csv", "process_q.csv"] {
        let a = std::fs::read_to_string(d.join("a").join(f)).unwrap();
        let b = std::fs::read_to_string(d.join("b").join(f)).unwrap();
        assert_eq!(a, b);
    }
    let bc = std::fs::read_to_string(d.join("a/bc_bound_table.csv")).unwrap();
    assert!(bc.lines().any(|l| l.starts_with("3,2,0.555556")));
    let pq = std::fs::read_to_string(d.join("a/process_q.csv")).unwrap();
    assert!(pq.contains("# seed: "));
    let q: f64 = pq.lines().find(|l| l.starts_with("orthogonal-probes")).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((q - 0.5).abs() < 5e-3);
}

#[test]
fn fig4_boundary_passes_through_diagonal_point() {
    let (d, l) = (3, 0.683);
    let l2 = qincompat_cli::reproduce::boundary_lambda2(d, l).unwrap();
    assert!((l2 - l).abs() < 2e-3, "{l2}");
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn record_format_follows_out_extension() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "x", 2, "x.json");
    generate(d, "z", 2, "z.json");
    run(&["check-joint", "x.json", "z.json", "--out", "r.csv"], d);
    run(&["check-joint", "x.json", "z.json", "--out", "r.json"], d);
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(csv.starts_with("command,inputs,status,"));
    assert!(csv.lines().nth(1).unwrap().contains("INFEASIBLE"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "check-joint");
}
