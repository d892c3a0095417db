use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pace::io;

fn pace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pace")).args(args).env_remove("PACE_WORKERS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, method: &str) -> String {
    let path = dir.join(format!("{method}.json"));
    let method = match method {
        "pace" => r#"{"pace": {"T": 20, "sampler": {"scheme": "random_m", "m": 60, "m_star": 2}}}"#,
        "gale" => r#"{"gale": {"T": 20, "sampler": {"scheme": "random_m", "m": 60, "m_star": 2}}}"#,
        _ => r#"{"base_only": {}}"#,
    };
    let text = format!(
        r#"{{"v": 1, "source": {{"sbm": {{"n": 150, "K": 2, "rho_a": 0.3, "r": 0.2}}}},
            "method": {method}, "base": {{"name": "spectral_adj"}}, "seeds": [3, 4]}}"#
    );
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn run_writes_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["pace", "gale", "base_only"] {
        let config = write_config(dir.path(), method);
        let out = pace(&["run", &config, "--workers", "2"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(&headers[0], "seed");
        assert_eq!(headers.iter().next_back(), Some("total_s"));
        let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][0], "3");
        assert_eq!(&rows[1][1], method);
        let delta = headers.iter().position(|h| h == "delta_extended").unwrap();
        let value: f64 = rows[0][delta].parse().unwrap();
        assert!((0.0..=2.0).contains(&value));
    }
}

#[test]
fn metrics_only_reports_match_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "pace");
    let reports: Vec<String> = ["1", "3"]
        .iter()
        .map(|w| {
            let out = pace(&["run", &config, "--workers", w, "--metrics-only"]);
            assert!(out.status.success());
            stdout(&out)
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert!(!reports[0].contains("total_s"));
}

#[test]
fn run_writes_labels_and_chat_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "pace");
    let report = dir.path().join("report.csv");
    let labels = dir.path().join("labels");
    let chats = dir.path().join("chat");
    let out = pace(&[
        "run",
        &config,
        "--workers",
        "1",
        "--out",
        report.to_str().unwrap(),
        "--labels-dir",
        labels.to_str().unwrap(),
        "--chat-dir",
        chats.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).is_empty());
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 3);
    let z = io::read_labels(&labels.join("seed-3.labels")).unwrap();
    assert_eq!(z.len(), 150);
    let chat = io::read_chat_file(&chats.join("seed-4.chat")).unwrap();
    assert_eq!(chat.rows(), 150);
    assert!(chat.is_symmetric());
}

#[test]
fn config_errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"v": 1, "source": {"sbm": {"n": -3}}}"#).unwrap();
    let out = pace(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/source/sbm/n"));
}

#[test]
fn stitch_failure_exits_with_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    // No two samples of 40 nodes can share 1000 of them.
    let text = r#"{"v": 1, "source": {"sbm": {"n": 100, "K": 2, "rho_a": 0.3, "r": 0.2}},
                   "method": {"gale": {"T": 5, "m1": 1000, "sampler": {"scheme": "random_m", "m": 40, "m_star": 2}}},
                   "base": {"name": "spectral_adj"}, "seeds": [0]}"#;
    fs::write(&config, text).unwrap();
    let out = pace(&["run", config.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generated_graphs_load_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    let labels = dir.path().join("g.labels");
    let out = pace(&[
        "gen-sbm",
        "--n",
        "120",
        "--k",
        "3",
        "--rho-a",
        "0.3",
        "--r",
        "0.1",
        "--pi",
        "0.2,0.3,0.5",
        "--seed",
        "9",
        "--edges",
        edges.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let el = io::read_edge_list(&edges).unwrap();
    assert!(el.graph.edge_count() > 0);
    assert_eq!(io::read_labels(&labels).unwrap().len(), 120);

    let out = pace(&["eval", labels.to_str().unwrap(), labels.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().nth(1), Some("0,0,0,0"));

    let bad = pace(&["gen-sbm", "--n", "10", "--k", "2", "--rho-a", "0.3", "--r", "0.1", "--pi", "1.0", "--edges", "x"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn edge_list_sources_use_labels_by_original_id() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    let labels = dir.path().join("g.labels");
    // Two dense blocks joined by one edge, ids offset by 10, plus a detached pair.
    let mut text = String::new();
    for block in [10..20u64, 20..30] {
        for u in block.clone() {
            for v in block.clone().filter(|&v| v > u) {
                text.push_str(&format!("{u} {v}\n"));
            }
        }
    }
    text.push_str("19 20\n40 41\n");
    fs::write(&edges, text).unwrap();
    let mut label_text = String::new();
    for id in 0..42 {
        label_text.push_str(match id {
            10..=19 => "0\n",
            20..=29 => "1\n",
            _ => "-\n",
        });
    }
    fs::write(&labels, label_text).unwrap();
    let config = dir.path().join("c.json");
    let text = format!(
        r#"{{"v": 1, "source": {{"edge_list": {{"path": {:?}, "labels": {:?}, "K": 2}}}},
            "method": {{"base_only": {{}}}}, "base": {{"name": "spectral_adj"}}, "seeds": [0]}}"#,
        edges.to_str().unwrap(),
        labels.to_str().unwrap()
    );
    fs::write(&config, text).unwrap();
    let out = pace(&["run", config.to_str().unwrap(), "--workers", "1", "--metrics-only"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout(&out);
    let mut reader = csv::Reader::from_reader(report.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let col = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_owned();
    assert_eq!(col("n"), "20");
    assert_eq!(col("delta"), "0");
}
