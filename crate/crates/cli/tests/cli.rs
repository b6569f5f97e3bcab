//! Behavior tests for the command-line interface, driving the compiled
//! binary against small fixtures in temporary directories.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clusterval::clusterer::{cluster, Algorithm, ClustererConfig};
use clusterval::graph::{Clustering, Graph};
use clusterval::io::{serialize_clustering, serialize_edge_list};
use clusterval::synth::{generate_planted_partition, PlantedConfig};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clusterval"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(output.status.success(), "command failed: {}", String::from_utf8_lossy(&output.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

fn two_triangles() -> (Graph, Clustering) {
    let g = Graph::new(
        6,
        vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0)],
    )
    .unwrap();
    (g, Clustering::new(vec![0, 0, 0, 1, 1, 1]))
}

fn write_triangles(dir: &Path) {
    let (g, truth) = two_triangles();
    fs::write(dir.join("graph.txt"), serialize_edge_list(&g)).unwrap();
    fs::write(dir.join("truth.csv"), serialize_clustering(&truth)).unwrap();
}

#[test]
fn ensemble_with_zero_runs_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_triangles(dir.path());
    let out =
        run_in(dir.path(), &["ensemble", "--graph", "graph.txt", "--runs", "0", "--out", "ens"]);
    assert_ok(&out);
    let names: Vec<String> = fs::read_dir(dir.path().join("ens"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["manifest.txt"]);
}

#[test]
fn select_on_identical_runs_reports_run_zero_with_no_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_triangles(dir.path());
    // Label propagation settles on the two components whatever the seed,
    // so every run is identical.
    assert_ok(&run_in(
        dir.path(),
        &["ensemble", "--graph", "graph.txt", "--algo", "lp", "--runs", "4", "--out", "ens"],
    ));
    assert_ok(&run_in(dir.path(), &["select", "ens", "--truth", "truth.csv", "--out", "sel"]));
    let report = read(dir.path(), "sel/report.txt");
    assert!(report.contains("selected_run=0"), "report:\n{report}");
    for line in report.lines() {
        if line.starts_with("error_count=") {
            assert_eq!(line, "error_count=0");
        }
    }
    let measures = read(dir.path(), "sel/measures.csv");
    assert!(measures.lines().count() == 5, "measures:\n{measures}");
}

#[test]
fn matrix_input_reproduces_ensemble_mode_grouping() {
    let dir = tempfile::tempdir().unwrap();
    let planted = PlantedConfig { n: 40, k: 2, p_in: 0.6, p_out: 0.1, seed: 3 };
    let (g, _) = generate_planted_partition(&planted).unwrap();
    fs::write(dir.path().join("graph.txt"), serialize_edge_list(&g)).unwrap();

    assert_ok(&run_in(
        dir.path(),
        &["ensemble", "--graph", "graph.txt", "--runs", "8", "--seed", "21", "--out", "ens"],
    ));
    assert_ok(&run_in(dir.path(), &["select", "ens", "--target-groups", "3", "--out", "sel"]));
    assert_ok(&run_in(
        dir.path(),
        &["select", "sel/cc.csv", "--target-groups", "3", "--out", "msel"],
    ));

    assert_eq!(
        read(dir.path(), "sel/metaclusters.csv"),
        read(dir.path(), "msel/metaclusters.csv"),
        "matrix input grouped differently"
    );
    assert_eq!(read(dir.path(), "sel/cc.csv"), read(dir.path(), "msel/cc.csv"));
    let selected = |report: &str| -> String {
        report
            .lines()
            .find(|l| l.starts_with("selected_run="))
            .expect("selected_run line")
            .to_string()
    };
    assert_eq!(
        selected(&read(dir.path(), "sel/report.txt")),
        selected(&read(dir.path(), "msel/report.txt"))
    );
}

#[test]
fn matrix_input_splits_ten_recorded_runs_into_eight_groups() {
    let matrix = "\
0,295103,256331,256133,271857,276110,290615,299755,264138,238910
295103,0,306462,300546,330041,322390,351844,364421,316995,297961
256331,306462,0,266670,283163,286792,305892,319234,281329,249949
256133,300546,266670,0,288318,279170,300185,316771,278838,254273
271857,330041,283163,288318,0,298401,317803,331593,298879,275383
276110,322390,286792,279170,298401,0,332039,335560,298008,269108
290615,351844,305892,300185,317803,332039,0,366598,318968,290417
299755,364421,319234,316771,331593,335560,366598,0,327866,295330
264138,316995,281329,278838,298879,298008,318968,327866,0,266450
238910,297961,249949,254273,275383,269108,290417,295330,266450,0
";
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cc.csv"), matrix).unwrap();
    assert_ok(&run_in(dir.path(), &["select", "cc.csv", "--target-groups", "8", "--out", "sel"]));
    let grouping = read(dir.path(), "sel/metaclusters.csv");
    let mut groups = std::collections::BTreeSet::new();
    let mut members = 0;
    for line in grouping.lines() {
        let (group, _) = line.split_once(',').expect("group,member line");
        groups.insert(group.to_string());
        members += 1;
    }
    assert_eq!(members, 10);
    assert_eq!(groups.len(), 8);
}

#[test]
fn select_cleans_up_its_output_directory_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_triangles(dir.path());
    fs::create_dir(dir.path().join("ens")).unwrap();
    fs::write(dir.path().join("ens/run_000.csv"), "vertex,label\n0,0\n1,0\n").unwrap();
    fs::write(dir.path().join("ens/run_001.csv"), "vertex,label\n0,0\n1,0\n2,1\n").unwrap();

    let out = run_in(dir.path(), &["select", "ens", "--graph", "graph.txt", "--out", "sel"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("sel").exists(), "failed run left its output directory behind");
}

#[test]
fn select_without_graph_or_manifest_explains_what_is_missing() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("ens")).unwrap();
    fs::write(dir.path().join("ens/run_000.csv"), "vertex,label\n0,0\n1,1\n").unwrap();
    let out = run_in(dir.path(), &["select", "ens", "--out", "sel"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--graph"), "stderr was: {stderr}");
}

#[test]
fn matrix_input_rejects_graph_and_truth_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cc.csv"), "0,1\n1,0\n").unwrap();
    write_triangles(dir.path());
    let out = run_in(dir.path(), &["select", "cc.csv", "--graph", "graph.txt", "--out", "sel"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("sel").exists());
}

#[test]
fn validate_reports_the_closed_form_measures() {
    let dir = tempfile::tempdir().unwrap();
    write_triangles(dir.path());
    let out = run_in(
        dir.path(),
        &["validate", "--graph", "graph.txt", "truth.csv", "--truth", "truth.csv"],
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout, "q=0.5\ndunn=6\nerror_count=0\nerror_fraction=0\n");

    let out = run_in(dir.path(), &["validate", "--graph", "graph.txt", "truth.csv", "--csv"]);
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout, "measure,value\nq,0.5\ndunn,6\n");
}

#[test]
fn validate_strict_fails_on_an_edgeless_graph() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.txt"), "n 3\n").unwrap();
    fs::write(dir.path().join("c.csv"), "vertex,label\n0,0\n1,0\n2,1\n").unwrap();

    let out = run_in(dir.path(), &["validate", "--graph", "empty.txt", "c.csv"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("q=undefined"));

    let strict = run_in(dir.path(), &["validate", "--graph", "empty.txt", "c.csv", "--strict"]);
    assert!(!strict.status.success());
    assert!(String::from_utf8_lossy(&strict.stderr).contains("undefined"));
}

#[test]
fn phased_single_fraction_equals_one_base_run() {
    let dir = tempfile::tempdir().unwrap();
    write_triangles(dir.path());
    assert_ok(&run_in(
        dir.path(),
        &[
            "phased",
            "--graph",
            "graph.txt",
            "--fractions",
            "1.0",
            "--algo",
            "lp",
            "--seed",
            "4",
            "--out",
            "ph",
        ],
    ));
    let (g, _) = two_triangles();
    let base = ClustererConfig { seed: 4, ..ClustererConfig::new(Algorithm::LabelPropagation) };
    let expected = cluster(&g, &base).unwrap();

    let trace = read(dir.path(), "ph/trace.csv");
    let mut labels = vec![usize::MAX; 6];
    for line in trace.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "0", "more than one phase in {trace}");
        labels[fields[1].parse::<usize>().unwrap()] = fields[2].parse().unwrap();
    }
    assert_eq!(labels, expected.labels());
}

#[test]
fn phased_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_triangles(dir.path());
    let args = [
        "phased",
        "--graph",
        "graph.txt",
        "--truth",
        "truth.csv",
        "--fractions",
        "0.4,0.7,1.0",
        "--policy",
        "modgain",
        "--seed",
        "8",
        "--out",
        "ph",
    ];
    assert_ok(&run_in(dir.path(), &args));
    let first: Vec<String> = ["ph/trace.csv", "ph/phases.csv", "ph/manifest.txt"]
        .iter()
        .map(|n| read(dir.path(), n))
        .collect();
    assert_ok(&run_in(dir.path(), &args));
    let second: Vec<String> = ["ph/trace.csv", "ph/phases.csv", "ph/manifest.txt"]
        .iter()
        .map(|n| read(dir.path(), n))
        .collect();
    assert_eq!(first, second);
}

#[test]
fn conflicting_stop_flags_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["select", "x", "--target-groups", "2", "--threshold", "0.5", "--out", "sel"],
    );
    assert_eq!(out.status.code(), Some(2), "expected a usage error");
}
