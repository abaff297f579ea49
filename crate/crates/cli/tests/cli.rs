use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracfem")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn mesh_writes_files_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["mesh", "--cube", "-n", "4", "--dim", "3", "-o", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("125 vertices, 384 tetrahedra"));
    let (node, ele) = (dir.path().join("cube.node"), dir.path().join("cube.ele"));
    assert!(node.exists() && ele.exists());
    let info = fracfem(&["mesh", "--info", p(&node), p(&ele)]);
    assert!(info.status.success());
    let text = stdout(&info);
    assert!(text.contains("h = 0.433013") && text.contains("total volume = 1.000000"), "{text}");
}

#[test]
fn zero_resolution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["mesh", "--cube", "-n", "0", "-o", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
    assert!(stdout(&o).is_empty());
}

#[test]
fn order_out_of_range_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["convergence", "--preset", "cube", "--beta", "1.2", "0.5", "0.5", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beta"));
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "betas = [0.5, 0.5]\n").unwrap();
    let o = fracfem(&["assemble", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_mesh_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["assemble", "--mesh", "/nonexistent/a.node", "/nonexistent/a.ele", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trace_outside_point_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["trace", "--point", "1.5", "0.5", "0.5", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_single_tetrahedron_centroid_has_one_segment() {
    let dir = tempfile::tempdir().unwrap();
    let (node, ele) = (dir.path().join("t.node"), dir.path().join("t.ele"));
    fs::write(&node, "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n").unwrap();
    fs::write(&ele, "1 4 0\n1 1 2 3 4\n").unwrap();
    let o = fracfem(&["trace", "--mesh", p(&node), p(&ele), "--point", "0.25", "0.25", "0.25", "--axis", "1", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cols: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cols[1], "0");
    assert!((cols[3].parse::<f64>().unwrap() - 0.25).abs() <= 1e-15);
}

#[test]
fn random_trace_lengths_sum_to_boundary_distance() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, side) in [("7", "left"), ("8", "right"), ("9", "left")] {
        let o = fracfem(&["trace", "-n", "4", "--axis", "2", "--side", side, "--seed", seed, "--out", p(dir.path())]);
        assert!(o.status.success(), "{}", stderr(&o));
        let err = stderr(&o);
        let point_line = err.lines().find(|l| l.starts_with("point ")).unwrap();
        let coords: Vec<f64> = point_line
            .trim_start_matches("point [")
            .trim_end_matches(']')
            .split(", ")
            .map(|v| v.parse().unwrap())
            .collect();
        let want = if side == "left" { coords[2] } else { 1.0 - coords[2] };
        let text = stdout(&o);
        let total: f64 = text
            .lines()
            .skip(1)
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                c[3].parse::<f64>().unwrap() - c[2].parse::<f64>().unwrap()
            })
            .sum();
        assert!((total - want).abs() <= 1e-10, "{total} vs {want}");
        assert_eq!(fs::read_to_string(dir.path().join("trace.csv")).unwrap(), text);
    }
}

#[test]
fn two_level_study_has_one_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["convergence", "--preset", "cube", "--dim", "2", "--levels", "2", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert_eq!(table.lines().count(), 3, "{table}");
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][4].is_empty());
    let order: f64 = rows[1][4].parse().unwrap();
    assert!((1.5..2.5).contains(&order), "{order}");
    assert!(dir.path().join("solution.vtk").exists());
}

#[test]
fn bench_reports_four_variants_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfem(&["bench", "--sizes", "2", "3", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("elements,variant,seconds"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn echoed_config_reproduces_the_matrix() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = fracfem(&["assemble", "-n", "3", "--beta", "0.6", "0.7", "0.8", "--threads", "1", "--out", p(first.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echoed = first.path().join("effective_config.toml");
    let again = fracfem(&["assemble", "--config", p(&echoed), "--out", p(second.path())]);
    assert!(again.status.success(), "{}", stderr(&again));
    for file in ["matrix.mtx", "pattern.mtx"] {
        let a = fs::read(first.path().join(file)).unwrap();
        let b = fs::read(second.path().join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
    let strip = |path: &Path| -> String {
        fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with("out =")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&echoed), strip(&second.path().join("effective_config.toml")));
}

#[test]
fn classical_assembly_is_sparser() {
    let dir = tempfile::tempdir().unwrap();
    let nnz = |extra: &[&str]| -> usize {
        let mut args = vec!["assemble", "-n", "4", "--out", p(dir.path())];
        args.extend_from_slice(extra);
        let o = fracfem(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        let line = text.lines().find(|l| l.starts_with("nnz = ")).unwrap();
        line["nnz = ".len()..].parse().unwrap()
    };
    assert!(nnz(&["--classical"]) < nnz(&[]));
}
