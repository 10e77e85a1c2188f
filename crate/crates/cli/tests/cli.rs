//! End-to-end runs of the `kempeflip` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kempeflip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kempeflip"))
        .args(args)
        .env_remove("KEMPEFLIP_WORKERS")
        .output()
        .expect("the binary runs")
}

fn json(output: &Output) -> Value {
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(str::to_string).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn verify_lp_reports_the_optimum_and_exports_the_program() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let report = json(&kempeflip(&["verify-lp", "--lp", "lp4", "--preset", "dpp_obs51", "--out", out]));
    assert_eq!(report["summary"]["objective_exact"], "161/88");
    assert_eq!(report["summary"]["dpp_feasible"], true);
    assert_eq!(report["preset"], "dpp_obs51");
    let program = fs::read_to_string(dir.path().join("lp4.lp")).unwrap();
    assert!(program.contains("Subject To"));
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify-lp.json")).unwrap()).unwrap();
    assert_eq!(saved["summary"], report["summary"]);
}

#[test]
fn couple_csv_reproduces_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let report =
        json(&kempeflip(&["couple", "--graph", "g2", "--delta", "4", "--trials", "300", "--seed", "9", "--out", out]));
    let (header, rows) = table(&dir.path().join("couple.csv"));
    assert_eq!(header, ["trial", "t_stop", "final_hamming", "truncated"]);
    assert_eq!(rows.len(), 300);
    assert_eq!(report["rows"], 300);
    let mean = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum::<f64>() / rows.len() as f64;
    assert!((mean - report["summary"]["mean_t_stop"].as_f64().unwrap()).abs() < 1e-9);
    let widest = rows.iter().map(|r| r[2].parse::<u64>().unwrap()).max().unwrap();
    assert_eq!(widest, report["summary"]["max_final_hamming"].as_u64().unwrap());
}

#[test]
fn stages_table_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    json(&kempeflip(&["stages", "--delta", "4", "--trials", "200", "--out", out]));
    let (header, rows) = table(&dir.path().join("stages.csv"));
    assert_eq!(header, ["transition", "count", "trials", "freq", "stderr", "paper_bound"]);
    for row in &rows {
        if row[0] != "T_stop" {
            let (count, trials, freq): (f64, f64, f64) =
                (row[1].parse().unwrap(), row[2].parse().unwrap(), row[3].parse().unwrap());
            assert!((count / trials - freq).abs() < 1e-12);
        }
    }
}

#[test]
fn results_do_not_depend_on_the_worker_count() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_kempeflip"))
            .args(["couple", "--trials", "64", "--seed", "3", "--out", dir.path().to_str().unwrap()])
            .env("KEMPEFLIP_WORKERS", workers)
            .output()
            .unwrap();
        let report = json(&status);
        (report["workers"].as_u64().unwrap(), fs::read_to_string(dir.path().join("couple.csv")).unwrap())
    };
    let (one, serial) = run("1");
    let (three, parallel) = run("3");
    assert_eq!((one, three), (1, 3));
    assert_eq!(serial, parallel);
}

#[test]
fn the_configuration_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-file");
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "trials = 7\nseed = 5\nk = 9\nout = {:?}\n\n[graph]\ntype = \"g1\"\ndelta = 3\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let report = json(&kempeflip(&[
        "couple",
        "--trials",
        "100",
        "--seed",
        "1",
        "--delta",
        "6",
        "--config",
        config.to_str().unwrap(),
    ]));
    assert_eq!(report["config"]["trials"], 7);
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["config"]["k"], 9);
    assert_eq!(report["config"]["graph"]["type"], "g1");
    assert!(out.join("couple.csv").exists());

    fs::write(&config, "kind = \"mixing\"\n").unwrap();
    let clash = kempeflip(&["couple", "--config", config.to_str().unwrap()]);
    assert!(!clash.status.success());
}

#[test]
fn every_subcommand_runs_on_a_small_instance() {
    let cases: [&[&str]; 8] = [
        &["sample", "--graph", "path", "--n", "4", "--k", "3", "--trials", "20", "--steps", "30"],
        &["list-sample", "--graph", "path", "--n", "4", "--trials", "20", "--steps", "30"],
        &["couple", "--delta", "2", "--trials", "10"],
        &["stages", "--delta", "2", "--trials", "10"],
        &["mixing", "--delta", "3", "--sizes", "6,8", "--trials", "5"],
        &["construct", "--graph", "g2", "--delta", "4"],
        &["contract", "--graph", "random", "--n", "6", "--delta", "3", "--trials", "5"],
        &["verify-lp", "--lp", "lp3"],
    ];
    for args in cases {
        let report = json(&kempeflip(args));
        assert_eq!(report["command"], args[0]);
        assert_eq!(report["tool"], "kempeflip");
        assert!(report["elapsed_ms"].is_u64());
    }
}

#[test]
fn custom_parameters_and_graph_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.txt");
    fs::write(&params, "1 1\n2 13/42\n3 1/6\n4 2/21\n5 1/21\n6 1/35\n").unwrap();
    let graph = dir.path().join("g.txt");
    fs::write(&graph, "3 2\n0 1\n1 2\n").unwrap();
    let report = json(&kempeflip(&[
        "construct",
        "--graph-file",
        graph.to_str().unwrap(),
        "--params",
        params.to_str().unwrap(),
        "--k",
        "4",
    ]));
    assert_eq!(report["preset"], "custom");
    assert_eq!(report["summary"]["n"], 3);
}

#[test]
fn invalid_input_fails_cleanly() {
    for args in [
        &["construct", "--graph", "g2", "--delta", "3"][..],
        &["sample", "--preset", "nope"],
        &["verify-lp", "--lp", "lp9"],
        &["construct", "--graph", "file"],
        &["couple", "--config", "/nonexistent/run.toml"],
    ] {
        let output = kempeflip(args);
        assert!(!output.status.success(), "{args:?} should fail");
        assert!(!output.stderr.is_empty());
    }
}
