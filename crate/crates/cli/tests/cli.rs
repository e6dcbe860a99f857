use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thb-sbm"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn text(o: &Output) -> (String, String) {
    (
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn validate_passes_on_a_clean_checkout() {
    let o = bin().arg("validate").output().unwrap();
    let (out, err) = text(&o);
    assert!(o.status.success(), "{out}\n{err}");
    assert!(out.contains(" 0 failed"), "{out}");
    assert!(out.contains("fixture k x1: dofs"), "{out}");
}

#[test]
fn study_writes_identical_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("quick.toml");
    let mut files = Vec::new();
    for (k, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let o = bin()
            .args(["study", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env("THB_SBM_THREADS", threads)
            .output()
            .unwrap();
        let (so, se) = text(&o);
        assert!(o.status.success(), "{so}\n{se}");
        assert!(so.contains("L2 slope"), "{so}");
        files.push(std::fs::read(out.join("quick.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let csv = String::from_utf8(files.remove(0)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "run_id,geometry,bc_case,strategy,degree,n_spans,h_char,dofs,err_l2_rel,err_h1_rel,wall_time_s"
    );
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("quick-none-p2-n10,rectangle+1hole,dirichlet/neumann,none,2,10,"));
}

#[test]
fn run_reports_relative_errors() {
    let o = bin()
        .args(["run", "--config"])
        .arg(configs().join("body_fitted.toml"))
        .args(["--degree", "2", "--spans", "8"])
        .output()
        .unwrap();
    let (out, err) = text(&o);
    assert!(o.status.success(), "{out}\n{err}");
    assert!(out.contains("L2 relative"), "{out}");
    assert!(out.contains("H1 relative"), "{out}");
}

#[test]
fn dump_basis_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["dump-basis", "--config"])
        .arg(configs().join("neumann_hole.toml"))
        .args(["--degree", "2", "--strategy", "p", "--spans", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let (out, err) = text(&o);
    assert!(o.status.success(), "{out}\n{err}");
    assert!(out.contains("level 1: degree 3"), "{out}");
    for f in ["neumann_hole-functions.csv", "neumann_hole-elements.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

fn run_bad_config(body: &str) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, body).unwrap();
    let o = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    (o.status.code().unwrap_or(-1), text(&o).1)
}

const GOOD: &str = r#"
name = "t"
[geometry]
outer = { kind = "rectangle", bc = "dirichlet" }
[problem]
solution = "linear"
[discretization]
degrees = [1]
strategies = ["none"]
[schedule]
kind = "step"
start = 4
end = 4
"#;

#[test]
fn config_errors_name_the_key() {
    let (code, err) = run_bad_config(&GOOD.replace("solution =", "solutoin ="));
    assert_eq!(code, 2);
    assert!(err.contains("solutoin"), "{err}");
    let (code, err) = run_bad_config(&GOOD.replace("degrees = [1]", "degrees = [9]"));
    assert_eq!(code, 2);
    assert!(err.contains("discretization.degrees"), "{err}");
    let (code, err) = run_bad_config(&GOOD.replace("bc = \"dirichlet\"", "bc = \"robin\""));
    assert_eq!(code, 2);
    assert!(err.contains("robin"), "{err}");
}

#[test]
fn geometry_mesh_incompatibility_fails() {
    // hole larger than the background
    let body = GOOD.replace(
        "outer = { kind = \"rectangle\", bc = \"dirichlet\" }",
        "outer = { kind = \"rectangle\", bc = \"dirichlet\" }\nholes = [{ kind = \"circle\", center = [0.5, 0.5], radius = 0.7, bc = \"neumann\" }]",
    );
    let (code, err) = run_bad_config(&body);
    assert_eq!(code, 2);
    assert!(err.contains("geometry"), "{err}");
}

#[test]
fn run_matches_the_library() {
    let o = bin()
        .args(["run", "--config"])
        .arg(configs().join("quick.toml"))
        .args(["--strategy", "k"])
        .output()
        .unwrap();
    let (out, err) = text(&o);
    assert!(o.status.success(), "{out}\n{err}");
    let cfg = thb_sbm::config::RunConfig::load(configs().join("quick.toml")).unwrap();
    let r = thb_sbm::study::run_single(
        &cfg.problem().unwrap(),
        2,
        10,
        thb_sbm::study::Refinement::K,
        thb_sbm::par::Execution::Sequential,
    )
    .unwrap();
    assert!(out.contains(&format!("L2 relative {:.6e}", r.errors.l2_rel)), "{out}");
}
