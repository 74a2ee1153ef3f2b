use std::process::{Command, Output};

fn etdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etdg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn study_writes_csv_to_stdout() {
    let o = etdg(&[
        "study",
        "--problem",
        "laplace",
        "--pmin",
        "1",
        "--pmax",
        "2",
        "--refinements",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem,method,p,h,ndof,nzes,l2_error,dg_error,cond_full,cond_reduced,t_assemble,t_embed,t_solve"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert!(rows.iter().all(|r| r.len() == 13 && r[0] == "laplace"));
    assert_eq!((rows[0][1], rows[1][1]), ("dg", "embedded"));
    // timings are off by default
    assert!(rows.iter().all(|r| r[10].is_empty() && r[12].is_empty()));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        "problem = poisson\npmin = 2\npmax = 3\nrefinements = 2\n",
    )
    .unwrap();
    let o = etdg(&[
        "study",
        "--config",
        cfg.to_str().unwrap(),
        "--pmax",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.starts_with("poisson,") && l.split(',').nth(2) == Some("2")));
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let args = [
        "study",
        "--problem",
        "advection",
        "--pmin",
        "2",
        "--pmax",
        "2",
        "--refinements",
        "2",
        "--threads",
        "1",
    ];
    let (a, b) = (etdg(&args), etdg(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let o = etdg(&["study", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    assert_eq!(etdg(&["study", "--problem", "wave"]).status.code(), Some(2));
    assert_eq!(
        etdg(&["study", "--pmin", "4", "--pmax", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(etdg(&["planewave1d", "--eps", "0"]).status.code(), Some(2));
    assert_eq!(
        etdg(&["study", "--config", "/nonexistent/etdg.cfg"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn planewave_table() {
    let o = etdg(&["planewave1d"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[2] == "2"));
}

#[test]
fn dof_table_matches_closed_form() {
    let o = etdg(&["doftable"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let p3 = text.lines().find(|l| l.starts_with("3,")).unwrap();
    let cols: Vec<&str> = p3.split(',').collect();
    assert_eq!(&cols[..5], &["3", "54", "540", "378", "216"]);
    assert_eq!(
        etdg(&["doftable", "--elements", "7"]).status.code(),
        Some(2)
    );
}
