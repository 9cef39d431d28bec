use std::fs;
use std::process::{Command, Output};

fn cavity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn cube_reports_two_pi_squared() {
    let o = cavity(&["cuboid", "--l", "1", "1", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("{\"schema\":1,"), "{out}");
    assert!(out.contains("\"lambda1\":1.9739208802178716e1"), "{out}");
}

#[test]
fn ball_prints_full_precision_constants() {
    let o = cavity(&["ball", "--radius", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("\"pi\":3.1415926535897931e0"), "{out}");
    assert!(out.contains("\"a11_prime\":2.74370726999227"), "{out}");
}

#[test]
fn sweep_csv_has_fixed_header_and_all_rows() {
    let o = cavity(&["sweep", "--k", "2", "--resolution", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("l1,l2,l3,k,lambda1"));
    assert_eq!(lines.count(), 100);
}

#[test]
fn sweep_summary_reports_gap() {
    let o = cavity(&["sweep", "--k", "2", "--resolution", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for key in ["\"grid_min\"", "\"infimum\":1.9739208802178716e1", "\"gap\""] {
        assert!(out.contains(key), "{out}");
    }
}

#[test]
fn dumbbell_emits_one_record_per_height() {
    let o = cavity(&["dumbbell", "--h-grid", "10,100,1000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.starts_with("{\"schema\":1,") && l.contains("\"method\":\"trial\"")));
}

#[test]
fn dumbbell_fem_writes_mesh_and_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.vtk");
    let geom = dir.path().join("omega.json");
    let o = cavity(&[
        "dumbbell",
        "--delta",
        "0.25",
        "--eta",
        "0.05",
        "--h-grid",
        "10",
        "--fem",
        "--target-h",
        "0.125",
        "--dump-mesh",
        mesh.to_str().unwrap(),
        "--dump-geometry",
        geom.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().contains(",fem,"));
    assert!(fs::read_to_string(&mesh).unwrap().starts_with("# vtk DataFile"));
    assert!(fs::read_to_string(&geom).unwrap().starts_with("[[-1.0,"));
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "--seed", "11"],
        vec!["dumbbell", "--beta", "2"],
        vec!["sweep", "--k", "3", "--resolution", "50", "--format", "csv"],
    ] {
        let mut outputs = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("out{i}"));
            let mut full = args.clone();
            full.extend(["--output", path.to_str().unwrap()]);
            let o = cavity(&full);
            assert_eq!(o.status.code(), Some(0), "{args:?}");
            outputs.push(fs::read(&path).unwrap());
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        vec!["cuboid", "--l", "1", "0", "1"],
        vec!["ball", "--volume", "-2"],
        vec!["ball", "--radius", "1", "--surface", "2"],
        vec!["sweep", "--k", "2", "--resolution", "3"],
        vec!["dumbbell", "--beta", "1", "--p", "1"],
        vec!["dumbbell", "--delta", "0.1", "--eta", "0.2"],
        vec!["dumbbell", "--dump-mesh", "x.vtk"],
        vec!["frobnicate"],
    ] {
        let o = cavity(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.json");
    let o = cavity(&["verify", "--output", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    // the suite prints its table to stderr only once it has run
    assert!(!String::from_utf8_lossy(&o.stderr).contains("checks,"));
}

#[test]
fn help_exits_with_zero() {
    let o = cavity(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dumbbell"));
}
