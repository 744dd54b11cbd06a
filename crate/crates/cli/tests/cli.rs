// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn mxepi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mxepi")).args(args).output().expect("spawn mxepi")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn write_graph(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let p = dir.join(name);
    let path = p.to_str().unwrap();
    let mut args = vec!["generate", "--out", path];
    args.extend_from_slice(extra);
    let o = mxepi(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path.to_string()
}

#[test]
fn exit_codes() {
    assert_eq!(mxepi(&["--help"]).status.code(), Some(0));
    assert_eq!(mxepi(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(mxepi(&["metrics", "/nonexistent/graph.txt"]).status.code(), Some(1));
    let o = mxepi(&[
        "generate", "--kind", "er-sf", "--n", "200", "--ka", "4", "--kb", "4", "--asn", "0.9",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(mxepi(&["generate", "--ka", "4", "--kb", "4", "--threads", "0"]).status.code(), Some(1));
}

#[test]
fn generate_then_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), "g.txt", &["--n", "500", "--ka", "4", "--kb", "3", "--asn", "0.5", "--seed", "3"]);
    let o = mxepi(&["metrics", &g]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("n=500\n"));
    let asn: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("asn="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((asn - 0.5).abs() <= 0.01, "{asn}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_graph(dir.path(), "run.conf", "# defaults\nn = 300\nka = 4\nkb = 4\nseed = 1\n");
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let o = mxepi(&["--config", &cfg, "generate", "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mxepi(&["generate", "--config", &cfg, "--n", "250", "--out", b.to_str().unwrap()]);
    assert!(o.status.success());
    let first = std::fs::read_to_string(a).unwrap();
    let second = std::fs::read_to_string(b).unwrap();
    assert!(first.contains("#n=300"));
    assert!(second.contains("#n=250"));
    assert!(second.starts_with("#multiplex-edgelist v1 n=250\n"));
}

#[test]
fn empty_study_writes_header_only() {
    let o = mxepi(&[
        "study", "asn", "--ka", "4", "--kb", "4", "--n", "100", "--targets", "", "--lambda", "0.3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(
        data_lines(&text),
        vec!["target,achieved,status,threshold,s_theory,s_sim,stderr,outbreak_prob,realizations,instances"]
    );
}

#[test]
fn infeasible_study_target_is_marked() {
    let o = mxepi(&[
        "study", "asn", "--kind", "er-sf", "--ka", "4", "--kb", "4", "--n", "200",
        "--targets", "0,0.9", "--lambda", "0.3", "--theory-only",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0,") && rows[1].contains(",ok,"));
    assert!(rows[2].contains(",infeasible,nan,"));
}

#[test]
fn single_layer_threshold_is_one_axis_row() {
    let dir = tempfile::tempdir().unwrap();
    // Triangle in layer A only.
    let g = write_graph(dir.path(), "tri.txt", "#multiplex-edgelist v1 n=3\nA 0 1\nA 1 2\nA 0 2\n");
    let o = mxepi(&["threshold", &g]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows = data_lines(&text);
    // Every degree is 2, so <k>/(<k^2>-<k>) = 1.
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "lambda_a,lambda_b");
    let (a, b) = rows[1].split_once(',').unwrap();
    assert!((a.parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(b, "0");
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda_a_c=0.99999999"));
}

#[test]
fn coarse_threshold_grid() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), "g.txt", &["--n", "400", "--ka", "3", "--kb", "2", "--seed", "2"]);
    let out = dir.path().join("curve.csv");
    let o = mxepi(&["threshold", &g, "--step", "0.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("lambda_a_c="));
    let text = std::fs::read_to_string(out).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "lambda_a,lambda_b");
    let pts: Vec<(f64, f64)> = rows[1..]
        .iter()
        .map(|r| {
            let (a, b) = r.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(pts.first().unwrap().0, 0.0);
    assert_eq!(pts.last().unwrap().1, 0.0);
    assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
}

#[test]
fn theory_only_sections_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate(dir.path(), "g.txt", &["--n", "300", "--ka", "4", "--kb", "3", "--seed", "5"]);
    let out = dir.path().join("s.csv");
    let o = mxepi(&[
        "sweep", &g, "--theory-only", "--fix-lambda-a", "0,0.2", "--step", "0.1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["s_la0.csv", "s_la0.2.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let rows = data_lines(&text);
        assert_eq!(rows[0], "lambda_a,lambda_b,s_theory");
        assert_eq!(rows.len(), 7);
    }

    let run = |threads: &str| {
        let o = mxepi(&[
            "sweep", &g, "--step", "0.25", "--realizations", "40", "--seed", "9", "--threads", threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let text = String::from_utf8(one).unwrap();
    assert_eq!(data_lines(&text).len(), 1 + 9);
    assert!(text.contains("#rng chacha8 seed=9"));
}
