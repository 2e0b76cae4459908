use std::process::{Command, Output};

use serde_json::Value;

fn eprlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eprlab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--output", "json"]);
    let out = eprlab(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn without_config(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn close(v: &Value, want: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() <= 1e-12
}

#[test]
fn exit_statuses() {
    assert_eq!(eprlab(&["--help"]).status.code(), Some(0));
    assert_eq!(eprlab(&["predict", "--model", "unknown"]).status.code(), Some(2));
    assert_eq!(eprlab(&["predict", "--model", "aniso", "--r", "0"]).status.code(), Some(2));
    assert_eq!(eprlab(&["sweep", "--start", "10", "--stop", "0", "--step", "1"]).status.code(), Some(2));
    assert_eq!(eprlab(&["chsh"]).status.code(), Some(2));
}

#[test]
fn predict_qm_table() {
    let out = eprlab(&["predict", "--model", "qm", "--theta-a", "30", "--theta-b", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let body = without_config(&text);
    let mut lines = body.lines().filter(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    lines.next();
    let row: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    let col = header.iter().position(|h| *h == "p_yy").unwrap();
    assert!((row[col].parse::<f64>().unwrap() - 0.375).abs() <= 1e-12);
}

#[test]
fn predict_balls_view_a_rows() {
    let doc = json(&["predict", "--model", "balls", "--view", "A", "--theta-a", "60", "--theta-b", "0"]);
    let rows = doc["rows"].as_array().unwrap();
    let expect = [
        ("positive", [0.25, 0.75, 0.0, 0.0]),
        ("negative", [0.0, 0.0, 0.75, 0.25]),
        ("summed", [0.125, 0.375, 0.375, 0.125]),
    ];
    assert_eq!(rows.len(), expect.len());
    for (row, (scope, cells)) in rows.iter().zip(expect) {
        assert_eq!(row["scope"], scope);
        for (name, want) in ["p_yy", "p_yn", "p_ny", "p_nn"].iter().zip(cells) {
            assert!(close(&row[*name], want), "{scope} {name}: {}", row[*name]);
        }
    }
    assert!(close(&rows[0]["weight"], 0.5));
}

#[test]
fn aniso_output_independent_of_r() {
    let run = |r: &str| {
        let out = eprlab(&["predict", "--model", "aniso", "--r", r, "--theta-a", "37", "--theta-b", "-11"]);
        assert!(out.status.success());
        without_config(&stdout(&out))
    };
    assert_eq!(run("0.25"), run("0.75"));
}

#[test]
fn simulate_equal_axes() {
    let args = ["simulate", "--model", "qm", "--theta-a", "0", "--theta-b", "0", "--trials", "1000", "--seed", "7"];
    let first = eprlab(&args);
    let second = eprlab(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let mut with_json = args.to_vec();
    with_json.extend(["--output", "json"]);
    let doc = json(&args);
    let row = &doc["rows"][0];
    assert_eq!(row["count_yn"], 0);
    assert_eq!(row["count_ny"], 0);
    assert_eq!(row["n"], 1000);
    assert_eq!(doc["config"]["seed"], 7);
}

#[test]
fn sweep_qm_p_yy_column() {
    let doc = json(&["sweep", "--model", "qm", "--start", "0", "--stop", "90", "--step", "30"]);
    let column: Vec<f64> = doc["rows"].as_array().unwrap().iter().map(|r| r["p_yy"].as_f64().unwrap()).collect();
    assert_eq!(column.len(), 4);
    for (x, want) in column.iter().zip([0.5, 0.375, 0.125, 0.0]) {
        assert!((x - want).abs() <= 1e-12, "{column:?}");
    }
}

#[test]
fn sweep_balls_matches_qm_and_degenerate_range() {
    let range = ["--start", "-45", "--stop", "135", "--step", "7.5"];
    let qm = json(&[&["sweep", "--model", "qm"][..], &range].concat());
    let balls = json(&[&["sweep", "--model", "balls"][..], &range].concat());
    for (a, b) in qm["rows"].as_array().unwrap().iter().zip(balls["rows"].as_array().unwrap()) {
        assert!(close(&a["p_yy"], b["p_yy"].as_f64().unwrap()));
    }
    let single = json(&["sweep", "--start", "5", "--stop", "10", "--step", "50"]);
    assert_eq!(single["rows"].as_array().unwrap().len(), 1);
    assert_eq!(single["rows"][0]["theta_deg"], 5.0);
}

#[test]
fn chsh_values() {
    let angles = ["--a", "0", "--a-prime", "45", "--b", "22.5", "--b-prime", "67.5"];
    let qm = json(&[&["chsh", "--model", "qm"][..], &angles].concat());
    assert!((qm["rows"][0]["s"].as_f64().unwrap() - 2.8284271247461903).abs() <= 1e-9);
    let lhv = json(&[&["chsh", "--model", "lhv"][..], &angles].concat());
    assert!(lhv["rows"][0]["s"].as_f64().unwrap() <= 2.0 + 1e-9);
    let scan_qm = json(&["chsh", "--model", "qm", "--scan", "2.5"]);
    let scan_balls = json(&["chsh", "--model", "balls", "--scan", "2.5"]);
    assert_eq!(scan_qm["rows"], scan_balls["rows"]);
    let emp = json(&[&["chsh", "--empirical", "--trials", "50000", "--seed", "1"][..], &angles].concat());
    let row = &emp["rows"][1];
    assert_eq!(row["label"], "empirical");
    assert!((row["s"].as_f64().unwrap() - 2.8284271247461903).abs() < 4.0 * row["se"].as_f64().unwrap());
}

#[test]
fn csv_and_json_agree() {
    let args = ["simulate", "--model", "balls", "--view", "B", "--theta-a", "22.5", "--trials", "5000", "--seed", "3"];
    let doc = json(&args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--output", "csv"]);
    let text = stdout(&eprlab(&csv_args));
    let body = without_config(&text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), json_rows.len());
    for (c, j) in rows.iter().zip(json_rows) {
        assert_eq!(headers.len(), j.as_object().unwrap().len());
        for (name, field) in headers.iter().zip(c.iter()) {
            let v = &j[name];
            match v {
                Value::Number(n) => assert_eq!(field.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{name}"),
                Value::String(s) => assert_eq!(field, s),
                Value::Bool(b) => assert_eq!(field, b.to_string()),
                Value::Null => assert_eq!(field, ""),
                other => panic!("unexpected {other}"),
            }
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("eprlab-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, "model = \"balls\"\ntheta_a = 60.0\nview = \"B\"\noutput = \"json\"\n").unwrap();
    let out = eprlab(&["predict", "--config", path.to_str().unwrap(), "--theta-a", "30"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["config"]["model"], "balls");
    assert_eq!(doc["config"]["view"], "B");
    assert_eq!(doc["config"]["theta_a"], 30.0);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);

    let out_path = dir.join("result.csv");
    let written = eprlab(&[
        "predict", "--config", path.to_str().unwrap(), "--output", "csv", "--out", out_path.to_str().unwrap(),
    ]);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("# model = \"balls\""));
    assert!(text.contains("theta_deg,scope,weight,p_yy"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_reproduces_from_its_own_config() {
    let first = eprlab(&["simulate", "--model", "lhv", "--theta-a", "30", "--trials", "2000"]);
    assert!(first.status.success());
    let text = stdout(&first);
    let config: String = text.lines().filter_map(|l| l.strip_prefix("# ")).map(|l| format!("{l}\n")).collect();
    let dir = std::env::temp_dir().join(format!("eprlab-repro-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("embedded.toml");
    std::fs::write(&path, config).unwrap();
    let second = eprlab(&["simulate", "--config", path.to_str().unwrap()]);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(stdout(&second), text);
}
