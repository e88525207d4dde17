use std::fs;
use std::process::{Command, Output};

const HEADER: &str = "experiment,mesh,pattern,p,k_label,solver,preconditioner,iterations,newton_iters,final_residual,wall_ms";

fn polydg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polydg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_smoke() {
    let o = polydg(&["analyze", "--theta-samples", "1", "--wave-samples", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pattern,p,k_label,lambda_max,log_ratio"));
    assert_eq!(lines.count(), 48);
}

#[test]
fn hexagon_p0_ratio_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ratios.csv");
    let o = polydg(&["--out", out.to_str().unwrap(), "analyze", "--p", "0", "--k", "k1", "--theta-samples", "5", "--wave-samples", "8"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let hex = csv.lines().find(|l| l.starts_with("hexagon,")).unwrap();
    assert!(hex.ends_with(",1.000000"), "{hex}");
    assert_eq!(csv.lines().count(), 5);
    let config = fs::read_to_string(dir.path().join("ratios.csv.config")).unwrap();
    assert!(config.contains("seed=1"));
}

#[test]
fn advect_writes_the_report_header() {
    let o = polydg(&["advect", "--pattern", "square", "--h", "0.25", "--p", "0,1", "--k", "k1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("advect,regular,square,0,k1,jacobi,none,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 11));
}

#[test]
fn gmres_rows_name_the_preconditioner() {
    let o = polydg(&["advect", "--pattern", "hex", "--h", "0.25", "--p", "1", "--k", "k2", "--solver", "gmres", "--preconditioner", "ilu0"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("advect,regular,hexagon,1,k2,gmres,ilu0,"));
}

#[test]
fn unconverged_solves_exit_with_one() {
    let o = polydg(&["--tol", "1e-30", "advect", "--pattern", "square", "--bc", "periodic", "--h", "0.3", "--p", "0", "--k", "k1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(polydg(&["advect", "--p", "5"]).status.code(), Some(2));
    assert_eq!(polydg(&["--tol", "-1", "analyze"]).status.code(), Some(2));
    assert_eq!(polydg(&["mesh", "gen", "--pattern", "square", "--area", "0.1"]).status.code(), Some(2));
}

#[test]
fn generated_mesh_feeds_advect() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("v.mesh");
    let o = polydg(&["--out", mesh.to_str().unwrap(), "--seed", "7", "mesh", "gen", "--pattern", "voronoi", "--h", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(&mesh).unwrap();
    let again = dir.path().join("w.mesh");
    assert!(polydg(&["--out", again.to_str().unwrap(), "--seed", "7", "mesh", "gen", "--pattern", "voronoi", "--h", "0.2"]).status.success());
    assert_eq!(first, fs::read(&again).unwrap());

    let o = polydg(&["advect", "--mesh", mesh.to_str().unwrap(), "--h", "0.2", "--p", "1", "--k", "k1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("advect,file,file,1,k1,jacobi,none,"));
}

#[test]
fn random_advect_reports_both_meshes() {
    let o = polydg(&["random-advect", "--h", "0.2", "--p", "0", "--k", "k1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let meshes: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(meshes, ["voronoi", "delaunay"]);
}

#[test]
fn euler_vortex_reports_newton_iterations() {
    let o = polydg(&["euler-vortex", "--pattern", "square", "--h", "3", "--p", "0", "--k", "k1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let newton: usize = row.split(',').nth(8).unwrap().parse().unwrap();
    assert!(newton >= 1, "{row}");
}
