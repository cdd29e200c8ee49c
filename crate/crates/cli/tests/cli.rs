use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn polydg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polydg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn voronoi_hierarchy(dir: &Path, cells: &str, levels: &str) {
    assert_eq!(code(&polydg(dir, &["mesh", "--voronoi", cells, "-o", "fine.json"])), 0);
    assert_eq!(code(&polydg(dir, &["hierarchy", "-i", "fine.json", "-J", levels, "-o", "h"])), 0);
}

#[test]
fn structured_mesh_has_two_triangles_per_square() {
    let tmp = TempDir::new().unwrap();
    let o = polydg(tmp.path(), &["mesh", "--tri", "16", "-o", "tri.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("elements 512"), "{}", stdout(&o));
    assert!(tmp.path().join("tri.json").exists());
}

#[test]
fn voronoi_mesh_is_deterministic_per_seed() {
    let tmp = TempDir::new().unwrap();
    for name in ["a.json", "b.json"] {
        assert_eq!(code(&polydg(tmp.path(), &["mesh", "--voronoi", "64", "--seed", "7", "-o", name])), 0);
    }
    assert_eq!(code(&polydg(tmp.path(), &["mesh", "--voronoi", "64", "--seed", "8", "-o", "c.json"])), 0);
    let read = |n: &str| fs::read(tmp.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&polydg(tmp.path(), &["mesh", "--tri", "0", "-o", "x.json"])), 1);
    assert_eq!(code(&polydg(tmp.path(), &["mesh", "-o", "x.json"])), 1);
    assert_eq!(code(&polydg(tmp.path(), &["mesh", "--tri", "2", "--voronoi", "8", "-o", "x.json"])), 1);
    assert_eq!(code(&polydg(tmp.path(), &["solve", "--solver", "cg"])), 1);
    assert_eq!(code(&polydg(tmp.path(), &["study", "iterations", "--solvers", "w1"])), 1);
    assert_eq!(code(&polydg(tmp.path(), &["--help"])), 0);
}

#[test]
fn hierarchy_writes_levels_and_quality() {
    let tmp = TempDir::new().unwrap();
    voronoi_hierarchy(tmp.path(), "256", "4");
    let h = tmp.path().join("h");
    for f in ["level_1.json", "level_4.json", "level_4_to_3.json", "quality.csv"] {
        assert!(h.join(f).exists(), "missing {f}");
    }
    let q = fs::read_to_string(h.join("quality.csv")).unwrap();
    let level_rows = q.lines().skip(1).filter(|l| !l.starts_with("Theta")).count();
    assert_eq!(level_rows, 4, "{q}");
    assert!(q.lines().any(|l| l.starts_with("Theta")), "{q}");
}

#[test]
fn too_many_levels_is_a_validity_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&polydg(tmp.path(), &["mesh", "--voronoi", "64", "-o", "fine.json"])), 0);
    let o = polydg(tmp.path(), &["hierarchy", "-i", "fine.json", "-J", "50", "-o", "h"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn malformed_mesh_file_is_a_validity_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&polydg(tmp.path(), &["hierarchy", "-i", "bad.json", "-o", "h"])), 3);
}

#[test]
fn two_level_wcycle_matches_two_level_solver() {
    let tmp = TempDir::new().unwrap();
    voronoi_hierarchy(tmp.path(), "128", "3");
    let common = ["solve", "--hierarchy", "h", "--m", "4", "--rhs", "random"];
    let tl = polydg(tmp.path(), &[&common[..], &["--solver", "tl", "-o", "tl.csv", "--history", "tl_h.csv"]].concat());
    let w = polydg(
        tmp.path(),
        &[&common[..], &["--solver", "wcycle", "-J", "2", "-o", "w.csv", "--history", "w_h.csv"]].concat(),
    );
    assert_eq!(code(&tl), 0);
    assert_eq!(code(&w), 0);
    let read = |n: &str| fs::read_to_string(tmp.path().join(n)).unwrap();
    assert_eq!(read("tl_h.csv"), read("w_h.csv"));
    // same row apart from the solver label
    let strip = |s: String| s.lines().nth(1).unwrap().split_once(',').unwrap().1.to_string();
    assert_eq!(strip(read("tl.csv")), strip(read("w.csv")));
}

#[test]
fn non_convergence_exits_with_code_two_and_still_reports() {
    let tmp = TempDir::new().unwrap();
    voronoi_hierarchy(tmp.path(), "128", "2");
    let o = polydg(tmp.path(), &["solve", "--hierarchy", "h", "--solver", "cg", "--max-iter", "3"]);
    assert_eq!(code(&o), 2);
    let report = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().ends_with("false,false"), "{report}");
}

#[test]
fn repeated_runs_give_identical_reports() {
    let tmp = TempDir::new().unwrap();
    voronoi_hierarchy(tmp.path(), "128", "3");
    for out in ["a.csv", "b.csv"] {
        let o = polydg(tmp.path(), &["solve", "--hierarchy", "h", "--solver", "wcycle", "--m", "3", "-o", out]);
        assert_eq!(code(&o), 0);
    }
    let read = |n: &str| fs::read(tmp.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn matrix_dump_is_symmetric_matrix_market() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&polydg(tmp.path(), &["mesh", "--tri", "2", "-o", "tri.json"])), 0);
    let o = polydg(tmp.path(), &["solve", "-i", "tri.json", "--solver", "cg", "--dump-matrix", "a.mtx"]);
    assert_eq!(code(&o), 0);
    let mtx = fs::read_to_string(tmp.path().join("a.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real symmetric"), "{mtx}");
}

#[test]
fn small_iteration_study_writes_csv() {
    let tmp = TempDir::new().unwrap();
    let o = polydg(
        tmp.path(),
        &["study", "iterations", "--sets", "128", "--m", "3", "--solvers", "tl,w3,cg,pcg", "-o", "it.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("it.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("set,p,m,solver,levels,iterations,rho,converged"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{csv}");
    assert!(rows[2].starts_with("1,1,,CG,"), "{csv}");
}

#[test]
fn small_analysis_studies_run() {
    let tmp = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["study", "coercivity", "--sets", "64", "-o", "c.csv"],
        &["study", "contraction", "--cells", "64", "--p", "1", "--m", "3", "-J", "2", "-o", "k.csv"],
        &["study", "rates", "--p", "1", "--n", "4,8", "-o", "r.csv"],
        &["study", "eigscaling", "--p", "1", "--n", "4,8", "-o", "e.csv"],
    ];
    for args in cases {
        let o = polydg(tmp.path(), args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let k = fs::read_to_string(tmp.path().join("k.csv")).unwrap();
    let value: f64 = k.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(value > 0.0 && value < 1.0, "{k}");
}
