use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chfif::bundled;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chfif"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn problems() -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let e = write(dir.path(), "uniform.problem", bundled::UNIFORM);
    let t = write(dir.path(), "slow.problem", bundled::SLOW);
    (dir, e, t)
}

#[test]
fn validate_summarises_the_graph() {
    let (_d, e, _) = problems();
    let o = run(&["validate", e.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(
        s.contains("K[1] = [3, 2]") && s.contains("K[2] = [1, 3]"),
        "{s}"
    );
    assert!(s.contains("maps 9"));
}

#[test]
fn validate_all_pairs_is_stricter() {
    let (d, _, _) = problems();
    let text = "
[[datasets]]
vertex = 1
points = [[0, 0], [3, 1], [6, 0]]
[[datasets]]
vertex = 2
points = [[0, 0], [1, 1], [2, 0]]
[[graph]]
vertex = 1
sources = [1, 1]
[[graph]]
vertex = 2
sources = [2, 1]
[[params]]
vertex = 1
uniform = { alpha = 0.2, beta = 0.1, gamma = 0.2 }
[[params]]
vertex = 2
uniform = { alpha = 0.2, beta = 0.1, gamma = 0.2 }
";
    let p = write(d.path(), "p.problem", text);
    assert!(run(&["validate", p.to_str().unwrap()]).status.success());
    let o = run(&["validate", "--all-pairs", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("graph[vertex=1].sources[1]"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn solve_csv_and_oracle_agree() {
    let (d, e, _) = problems();
    let coeffs = d.path().join("coeffs.csv");
    let o = run(&[
        "solve",
        e.to_str().unwrap(),
        "--format",
        "csv",
        "--emit-coeffs",
        coeffs.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let closed = stdout(&o);
    assert_eq!(closed, std::fs::read_to_string(&coeffs).unwrap());
    let rows: Vec<&str> = closed.lines().collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0], "vertex,map,source,a,b,c,d,e,f,alpha,beta,gamma");
    assert!(rows[1].starts_with("1,1,1,0.2,0.0,-0.2,"), "{}", rows[1]);

    let o = run(&["solve", e.to_str().unwrap(), "--format", "csv", "--oracle"]);
    let oracle = stdout(&o);
    for (a, b) in closed.lines().zip(oracle.lines()).skip(1) {
        for (x, y) in a.split(',').zip(b.split(',')) {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
    let text = stdout(&run(&["solve", e.to_str().unwrap()]));
    assert!(text.lines().next().unwrap().contains("alpha"));
}

#[test]
fn eval_writes_samples() {
    let (d, e, _) = problems();
    let out = d.path().join("samples.csv");
    let o = run(&[
        "eval",
        e.to_str().unwrap(),
        "--grid-density",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + (5 * 8 + 1) + (4 * 8 + 1));
    assert!(
        csv.lines().any(|l| l == "1,2.0,1.0,1.0"),
        "knot (2, 1, 1) is reproduced"
    );
    assert!(stderr(&o).contains("empirical ratio"));

    let o = run(&["eval", e.to_str().unwrap(), "--max-iters", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn chaos_clouds_repeat_for_a_seed() {
    let (_d, e, _) = problems();
    let args = [
        "attractor",
        e.to_str().unwrap(),
        "--mode",
        "chaos",
        "--steps",
        "3000",
        "--seed",
        "9",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * (3000 - 100));
    for line in a.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let hi = if f[0] == 1.0 { 5.0 } else { 4.0 };
        assert!(f[1] >= 0.0 && f[1] <= hi);
    }
    let c = stdout(&run(&[
        "attractor",
        e.to_str().unwrap(),
        "--mode",
        "chaos",
        "--steps",
        "3000",
        "--seed",
        "10",
    ]));
    assert_ne!(a, c);
}

#[test]
fn deterministic_attractor_reports_its_trace() {
    let (_d, e, _) = problems();
    let o = run(&["attractor", e.to_str().unwrap(), "--tol", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("iteration 1 distance"));
    assert!(stdout(&o).lines().count() > 11);
}

#[test]
fn verify_exit_code_follows_the_report() {
    let (d, e, _) = problems();
    let o = run(&["verify", e.to_str().unwrap(), "--no-projection"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS join-up residual"));

    let bad = write(
        d.path(),
        "bad.problem",
        &format!(
            "{}\n[[overrides]]\nvertex = 1\nmap = 1\nb = 0.5\n",
            bundled::UNIFORM
        ),
    );
    let o = run(&["verify", bad.to_str().unwrap(), "--no-projection"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL join-up residual"));

    let o = run(&[
        "verify",
        e.to_str().unwrap(),
        "--no-projection",
        "--format",
        "json",
    ]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["checks"][0]["outcome"], "pass");

    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("maps[vertex=1][1]"));
}

#[test]
fn render_is_reproducible() {
    let (d, _, t) = problems();
    let a = d.path().join("a.svg");
    let b = d.path().join("b.svg");
    for p in [&a, &b] {
        let o = run(&[
            "render",
            t.to_str().unwrap(),
            "--cloud-steps",
            "2000",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let svg = std::fs::read_to_string(&a).unwrap();
    assert_eq!(svg, std::fs::read_to_string(&b).unwrap());
    assert!(svg.starts_with("<svg"));
    assert_eq!(
        svg.matches(r#"class="f2""#).count(),
        2,
        "the slow problem asks for f2"
    );
}

#[test]
fn bad_input_is_reported() {
    let (d, e, _) = problems();
    let p = write(d.path(), "empty.problem", "");
    let o = run(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing section `datasets`"));

    let text = std::fs::read_to_string(&e).unwrap().replacen(
        "uniform = { alpha = 0.3333333333333333, beta = 0.3333333333333333, gamma = 0.3333333333333333 }",
        "uniform = { alpha = 0.3, beta = 0.7, gamma = 0.3 }",
        1,
    );
    let p = write(d.path(), "beta.problem", &text);
    let o = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("params[vertex=1].uniform"),
        "{}",
        stderr(&o)
    );

    let o = run(&[
        "validate",
        d.path().join("missing.problem").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
