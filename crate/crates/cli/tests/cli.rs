use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use algiso::graph::{load_graph, save_graph};
use algiso_cli::report::{cmd_compare, CompareConfig, ComparisonReport, MethodKind, Relation};
use serde_json::Value;
use tempfile::TempDir;

const PATH: &str = r#"{"vertices":["a","b","c"],"undirected":true,"default_color":"non-edge","loop_color":"vertex",
"edges":[["a","b","edge"],["b","c","edge"]]}"#;

const TRIANGLE: &str = r#"{"vertices":["a","b","c"],"undirected":true,"default_color":"non-edge","loop_color":"vertex",
"edges":[["a","b","edge"],["b","c","edge"],["a","c","edge"]]}"#;

const BULL: &str = r#"{"vertices":["a","b","c","d","e"],"undirected":true,"default_color":"non-edge","loop_color":"vertex",
"edges":[["a","b","edge"],["b","c","edge"],["a","c","edge"],["a","d","edge"],["b","e","edge"]]}"#;

fn algiso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algiso")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn class_sets(v: &Value) -> BTreeSet<BTreeSet<String>> {
    v["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_array().unwrap().iter().map(|t| t.to_string()).collect())
        .collect()
}

#[test]
fn refute_same_orbit_pair_is_norefute() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.json", PATH);
    for calc in ["nc", "mc", "pc"] {
        let v = json(&algiso(&["refute", "--input", s(&g), "--calculus", calc, "--degree", "2", "--map", "a:c,b:b"]));
        assert_eq!(v["result"], "NOREFUTE", "{calc}");
        assert!(v["witness"].is_null());
    }
}

#[test]
fn refute_reports_a_witness() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.json", PATH);
    let v = json(&algiso(&[
        "refute",
        "--input",
        s(&g),
        "--calculus",
        "nc",
        "--degree",
        "2",
        "--char",
        "3",
        "--map",
        "a:b",
    ]));
    assert_eq!(v["result"], "REFUTE");
    assert_eq!(v["degree"], 2);
    assert_eq!(v["characteristic"], 3);
    let terms = v["witness"].as_array().unwrap();
    assert!(!terms.is_empty());
    for t in terms {
        for key in ["coefficient", "multiplier", "axiom", "polynomial"] {
            assert!(t[key].is_string(), "{key} in {t}");
        }
    }
    // The pinned variable is written in the x_{v u} orientation.
    assert!(terms.iter().any(|t| t["polynomial"].as_str().unwrap().contains("x[b->a]")));
}

#[test]
fn refine_is_stable_on_its_own_output() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "bull.json", BULL);
    for extra in [&["--operator", "counting", "--r", "1"][..], &["--operator", "sol", "--combined", "--char", "2"][..]]
    {
        let first = dir.path().join("first.json");
        let mut args = vec!["refine", "--input", s(&g), "--width", "3", "--out", s(&first)];
        args.extend_from_slice(extra);
        let out = algiso(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
        let mut again = vec!["refine", "--input", s(&g), "--width", "3", "--start", s(&first)];
        again.extend_from_slice(extra);
        let b = json(&algiso(&again));
        assert_eq!(a["classes"], b["classes"]);
        assert_eq!(b["iterations"], 1);
    }
}

#[test]
fn orbits_and_partition_commands_agree_on_the_path() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.json", PATH);
    let orbits = json(&algiso(&["orbits", "--input", s(&g), "--width", "2"]));
    let nc = json(&algiso(&["partition", "--input", s(&g), "--calculus", "nc", "--width", "2", "--degree", "2"]));
    assert_eq!(class_sets(&orbits), class_sets(&nc));
    assert_eq!(orbits["k"], 2);
}

#[test]
fn compare_path_reaches_orbits() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.json", PATH);
    let out = algiso(&["compare", "--input", s(&g), "--widths", "2", "--degrees", "2", "--chars", "0,2"]);
    assert!(!out.stderr.is_empty(), "table goes to stderr");
    let report: ComparisonReport = serde_json::from_slice(&out.stdout).unwrap();
    let sec = &report.sections[0];
    let orbits = sec.methods.iter().position(|m| m.kind == MethodKind::Orbits).unwrap();
    assert_eq!(sec.methods.len(), 1 + 2 + 6 + 1);
    assert!(sec.order.iter().all(|row| row[orbits] == Some(Relation::Equal)));
    assert!(report.order_consistent(&load_graph(PATH).unwrap()).unwrap());
}

#[test]
fn compare_order_matrix_matches_embedded_partitions() {
    let g = load_graph(BULL).unwrap();
    let cfg = CompareConfig { widths: vec![1, 2], characteristics: vec![0, 2, 3], ..CompareConfig::default() };
    let report = cmd_compare(&g, &cfg).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: ComparisonReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert!(back.order_consistent(&g).unwrap());
    // Tampering with a stored entry is detected.
    let mut bad = back.clone();
    bad.sections[1].order[0][1] = Some(Relation::Incomparable);
    if bad.sections[1].order[0][1] != report.sections[1].order[0][1] {
        assert!(!bad.order_consistent(&g).unwrap());
    }
}

#[test]
fn compare_chain_never_shows_mc_beyond_pc() {
    for text in [PATH, TRIANGLE, BULL] {
        let g = load_graph(text).unwrap();
        let cfg = CompareConfig {
            widths: vec![1, 2],
            degrees: vec![2, 3],
            characteristics: vec![0, 2, 3],
            ..CompareConfig::default()
        };
        let report = cmd_compare(&g, &cfg).unwrap();
        for sec in &report.sections {
            assert_eq!(sec.chain.len(), 6);
            for e in &sec.chain {
                assert_eq!(e.nc_within_mc, Some(true), "{e:?}");
                assert_eq!(e.mc_within_pc, Some(true), "{e:?}");
            }
        }
    }
}

#[test]
fn compare_is_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "bull.json", BULL);
    let run = |jobs: &str| algiso(&["compare", "--input", s(&g), "--chars", "0,2", "--jobs", jobs]).stdout;
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("4"));
}

#[test]
fn permuted_graph_gives_the_same_report_modulo_naming() {
    let g = load_graph(BULL).unwrap();
    let h = load_graph(&save_graph(&g.permuted(&[3, 0, 4, 1, 2]).unwrap())).unwrap();
    let cfg = CompareConfig { widths: vec![1, 2], characteristics: vec![0, 2], ..CompareConfig::default() };
    let (a, b) = (cmd_compare(&g, &cfg).unwrap(), cmd_compare(&h, &cfg).unwrap());
    assert_eq!(a.graph.vertices, b.graph.vertices);
    for (x, y) in a.sections.iter().zip(&b.sections) {
        assert_eq!(x.methods, y.methods);
        assert_eq!(x.order, y.order);
        assert_eq!(x.chain, y.chain);
        for (cx, cy) in x.cells.iter().zip(&y.cells) {
            assert_eq!(cx.classes, cy.classes);
            let sets = |c: &algiso_cli::report::Cell| -> BTreeSet<BTreeSet<Vec<String>>> {
                c.partition.as_ref().unwrap().classes.iter().map(|cl| cl.iter().cloned().collect()).collect()
            };
            assert_eq!(sets(cx), sets(cy), "{}", cx.method);
        }
        let pairs = |s: &algiso_cli::report::WidthSection| -> BTreeSet<(String, String)> {
            s.witnesses.iter().map(|w| (w.separated_by.clone(), w.not_separated_by.clone())).collect()
        };
        assert_eq!(pairs(x), pairs(y));
    }
}

#[test]
fn large_partitions_are_not_embedded() {
    let g = load_graph(BULL).unwrap();
    let cfg = CompareConfig { embed_limit: 10, calculi: vec![], ..CompareConfig::default() };
    let report = cmd_compare(&g, &cfg).unwrap();
    for c in &report.sections[0].cells {
        assert!(c.partition.is_none());
        assert!(c.classes.is_some());
    }
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.json", PATH);
    let broken = write(&dir, "broken.json", "{\"vertices\": [");
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["orbits", "--input", s(&broken), "--width", "1"],
        vec!["orbits", "--input", s(&missing), "--width", "1"],
        vec!["refute", "--input", s(&g), "--calculus", "nc", "--degree", "2", "--map", "a:z"],
        vec!["refute", "--input", s(&g), "--calculus", "nc", "--degree", "2", "--char", "4", "--map", "a:b"],
        vec!["refine", "--input", s(&g), "--width", "2", "--operator", "counting", "--r", "2"],
    ] {
        let out = algiso(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn guards_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.json", PATH);
    let out = algiso(&[
        "refute",
        "--input",
        s(&g),
        "--calculus",
        "pc",
        "--degree",
        "2",
        "--guard-monomials",
        "3",
        "--map",
        "a:b",
    ]);
    assert_eq!(out.status.code(), Some(3));

    // Guarded cells are reported and the rest of the report is still written.
    let out = algiso(&["compare", "--input", s(&g), "--guard-rows", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let report: ComparisonReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.guard_exceeded());
    let cells = &report.sections[0].cells;
    assert!(cells.iter().any(|c| c.method == "counting" && c.classes == Some(5)));
}

#[test]
fn cfi_commands_write_graphs() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "tri.json", TRIANGLE);
    let single = json(&algiso(&["cfi", "--base", s(&base), "--p", "2", "--twist", "e0:1"]));
    let g = load_graph(&single.to_string()).unwrap();
    assert_eq!(g.n(), 18);

    let prefix = dir.path().join("T").to_str().unwrap().to_string();
    let listing = json(&algiso(&["cfi", "--base", s(&base), "--p", "2", "--family", "--out-prefix", &prefix]));
    let files: Vec<String> =
        listing["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
    assert_eq!(files.len(), 3);
    let union = load_graph(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
    assert_eq!(union.n(), 36);

    let out = algiso(&["cfi", "--base", s(&base), "--p", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cfi_union_compare_shows_nc_separating_copies() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "tri.json", TRIANGLE);
    let prefix = dir.path().join("T").to_str().unwrap().to_string();
    json(&algiso(&["cfi", "--base", s(&base), "--p", "2", "--family", "--out-prefix", &prefix]));
    let union = format!("{prefix}union.json");
    let out = algiso(&[
        "compare",
        "--input",
        &union,
        "--widths",
        "2",
        "--degrees",
        "3",
        "--chars",
        "2",
        "--calculi",
        "nc",
        "--jobs",
        "3",
    ]);
    let report: ComparisonReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(out.status.success());
    let sec = &report.sections[0];
    let copy = |t: &[String]| t.iter().map(|v| v.split('/').next().unwrap().to_string()).collect::<BTreeSet<_>>();
    let w = sec
        .witnesses
        .iter()
        .find(|w| w.separated_by == "nc3/2" && w.not_separated_by == "counting")
        .expect("nc separates what counting does not");
    assert_ne!(copy(&w.pair[0]), copy(&w.pair[1]), "{w:?}");
    // Cross-copy pairs of the same local shape land in different NC classes.
    let nc = sec.cells.iter().find(|c| c.method == "nc3/2").unwrap().partition.as_ref().unwrap();
    for class in &nc.classes {
        let copies: BTreeSet<_> = class.iter().map(|t| copy(t)).collect();
        assert_eq!(copies.len(), 1, "a class mixes copies");
    }
}
