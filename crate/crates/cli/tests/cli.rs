use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heistheta")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn invariant_quartics_projective_dimension_first() {
    let o = run(&["inv", "dim", "--delta", "2,2,2", "--degree", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("14"));
    assert!(text.contains("vector dimension: 15"));
}

#[test]
fn pullback_octics_dimension() {
    let o = run(&["inv", "dim", "--delta", "2,4", "--degree", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("14"));
}

#[test]
fn squared_action_table_rows() {
    let o = run(&["rep", "table", "--delta", "2,4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with('t')).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[2].split_whitespace().collect::<Vec<_>>(), ["t2", "t4", "t0", "-t6"]);
    assert_eq!(rows[7].split_whitespace().collect::<Vec<_>>(), ["t7", "t6", "t5", "-t4"]);
    assert!(text.contains("(24 entries)"));
}

#[test]
fn pairing_and_products() {
    let o = run(&["heis", "pair", "--delta", "2,4", "--a", "tau1", "--b", "tau2"]);
    assert!(stdout(&o).trim_end().ends_with("= -i"));
    let o = run(&["heis", "pair", "--delta", "2,4", "--a", "0,1;0,0", "--b", "0,0;0,3"]);
    assert!(stdout(&o).trim_end().ends_with("= -i"));
    let o = run(&["heis", "mul", "--delta", "2,4", "--a", "sigma1", "--b", "sigma2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["heis", "pair", "--delta", "2,4", "--a", "nonsense", "--b", "tau2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn signs_and_wsplit() {
    let o = run(&["rep", "signs", "--delta", "2,4"]);
    assert!(stdout(&o).starts_with("iota = a6.a7"));
    let o = run(&["rep", "wsplit", "--delta", "2,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("W+ = <s0+s1, s2+s4, s3+s5, s6+s7>"));
}

#[test]
fn verify_all_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o1 = run(&["verify", "all", "--config", "random", "--seed", "7", "--out", a.to_str().unwrap()]);
    let o2 = run(&["verify", "all", "--config", "random", "--seed", "7", "--out", b.to_str().unwrap()]);
    assert_eq!(o1.status.code(), Some(0), "{}", stdout(&o1));
    assert_eq!(o2.status.code(), Some(0));
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let report: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(report["pass"], true);
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names[0], "weil_table");
    assert!(names.iter().position(|n| *n == "eigenspace_split").unwrap() < names.iter().position(|n| *n == "equivariance").unwrap());
}

#[test]
fn config_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"g":2,"delta":[1,4],"omega":[[[0.1,1.5],[0.2,0.3]],[[0.2,0.3],[-0.1,1.2]]],"seed":3,"epsilon":1e-12,"samples":20}"#,
    )
    .unwrap();
    let o = run(&["theta", "build", "--config", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("index 4"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"g":2,"delta":[1,4],"omega":[[[0.1,1.5],[0.2,0.3]],[[0.5,0.3],[-0.1,1.2]]]}"#).unwrap();
    assert_eq!(run(&["theta", "build", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["theta", "build", "--config", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(run(&["inv", "dim", "--bogus"]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    // the two-torsion scan is specific to (1,2,4)
    let o = run(&["theta", "torsion", "--delta", "1,4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] torsion_scan"));
}

#[test]
fn numeric_subcommands_pass() {
    for sub in ["diagram", "torsion", "fibers", "deg4", "nested14"] {
        let o = run(&["theta", sub, "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0), "{sub}: {}", stdout(&o));
    }
}
