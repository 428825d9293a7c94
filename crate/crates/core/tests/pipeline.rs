//! Subcommand behavior: exit codes, bundles and the command-line surface.

use std::path::{Path, PathBuf};
use std::process::Command;

use overload::pipeline::bundle::hash_file;
use overload::pipeline::{
    cmd_analyze, cmd_export_graph, cmd_simulate, cmd_validate, read_manifest, write_inputs, Format,
    RunConfig, EXIT_ESTIMATION, EXIT_IO, EXIT_OK, EXIT_VALIDATION,
};
use overload::sim::{simulate_org, SimScenario};

fn small_inputs(dir: &Path) -> (PathBuf, PathBuf) {
    let truth = simulate_org(&SimScenario {
        n_employees: 120,
        seed: 11,
        ..SimScenario::default()
    })
    .unwrap();
    write_inputs(dir, &truth).unwrap()
}

fn config(employees: PathBuf, citations: PathBuf, out: PathBuf) -> RunConfig {
    RunConfig {
        employees,
        citations,
        out_dir: out,
        ..RunConfig::default()
    }
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (e, c) = small_inputs(&tmp.path().join("in"));
    let clean = cmd_validate(&config(e.clone(), c.clone(), tmp.path().join("v1")));
    assert_eq!(clean.code, EXIT_OK);
    assert!(tmp.path().join("v1/validation.txt").is_file());

    let mut text = std::fs::read_to_string(&c).unwrap();
    let rows = text.lines().count() - 1;
    text.push_str("E0001,E9999,2,5,3,Email\n");
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, text).unwrap();
    let dangling = cmd_validate(&config(e.clone(), bad, tmp.path().join("v2")));
    assert_eq!(dangling.code, EXIT_VALIDATION);
    let report = std::fs::read_to_string(tmp.path().join("v2/validation.txt")).unwrap();
    let line = report.lines().find(|l| l.contains("E9999")).unwrap();
    assert!(line.contains(&(rows + 1).to_string()), "{line}");

    let missing = cmd_validate(&config(
        tmp.path().join("nope.csv"),
        c,
        tmp.path().join("v3"),
    ));
    assert_eq!(missing.code, EXIT_IO);
    assert!(missing.stderr.contains("nope.csv"));
}

#[test]
fn constant_efficiency_degrades_to_descriptives() {
    let tmp = tempfile::tempdir().unwrap();
    let mut truth = simulate_org(&SimScenario {
        n_employees: 120,
        seed: 12,
        ..SimScenario::default()
    })
    .unwrap();
    for c in &mut truth.citations {
        c.efficiency = 4;
    }
    let (e, c) = write_inputs(&tmp.path().join("in"), &truth).unwrap();
    let out = tmp.path().join("out");
    let o = cmd_analyze(&config(e, c, out.clone()));
    assert_eq!(o.code, EXIT_ESTIMATION);
    let m = read_manifest(&out).unwrap();
    assert!(!m.complete);
    assert!(!m.errors.is_empty());
    assert!(out.join("descriptives.txt").is_file());
    assert!(m.files.iter().any(|f| f.name == "descriptives.txt"));
}

#[test]
fn analyze_machine_format_and_inputs_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let (e, c) = small_inputs(&tmp.path().join("in"));
    let before = (hash_file(&e).unwrap(), hash_file(&c).unwrap());
    let out = tmp.path().join("out");
    let mut cfg = config(e.clone(), c.clone(), out.clone());
    cfg.format = Format::Machine;
    let o = cmd_analyze(&cfg);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(before, (hash_file(&e).unwrap(), hash_file(&c).unwrap()));
    let m = read_manifest(&out).unwrap();
    assert!(m.complete);
    assert_eq!(m.files.len(), 8);
    for f in &m.files {
        assert_eq!(hash_file(&out.join(&f.name)).unwrap(), f.sha256);
    }
    let models: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("models.json")).unwrap()).unwrap();
    assert!(models.is_object());
    let svg = std::fs::read_to_string(out.join("odds_ratios.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn simulate_reports_three_estimators() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        out_dir: tmp.path().join("sim"),
        ..RunConfig::default()
    };
    cfg.simulation.replications = 50;
    cfg.format = Format::Machine;
    let o = cmd_simulate(&cfg);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let study: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("sim/study.json")).unwrap())
            .unwrap();
    let rows = study["estimators"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["mcse"].as_f64().unwrap() > 0.0));
    for f in ["employees.csv", "citations.csv", "talent.csv"] {
        assert!(tmp.path().join("sim").join(f).is_file());
    }
}

#[test]
fn simulate_without_confounding_says_so() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        out_dir: tmp.path().to_path_buf(),
        ..RunConfig::default()
    };
    cfg.simulation.scenario.gamma_talent = 0.0;
    cfg.simulation.replications = 100;
    let o = cmd_simulate(&cfg);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("no material endogeneity detected"));
}

#[test]
fn invalid_scenario_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        out_dir: tmp.path().to_path_buf(),
        ..RunConfig::default()
    };
    cfg.simulation.scenario.citations_per_employee = 0;
    assert_eq!(cmd_simulate(&cfg).code, EXIT_IO);
    cfg.simulation.scenario.citations_per_employee = 6;
    cfg.simulation.replications = 10;
    assert_eq!(cmd_simulate(&cfg).code, EXIT_IO);
}

#[test]
fn export_graph_writes_network_and_instrument() {
    let tmp = tempfile::tempdir().unwrap();
    let (e, c) = small_inputs(&tmp.path().join("in"));
    let out = tmp.path().join("g");
    assert_eq!(cmd_export_graph(&config(e, c, out.clone())).code, EXIT_OK);
    let m = read_manifest(&out).unwrap();
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["instrument.csv", "network.graphml"]);
    let inst = std::fs::read_to_string(out.join("instrument.csv")).unwrap();
    assert_eq!(inst.lines().count(), 121);
}

#[test]
fn binary_reads_config_and_flags_win() {
    let bin = env!("CARGO_BIN_EXE_overload");
    let tmp = tempfile::tempdir().unwrap();
    small_inputs(&tmp.path().join("in"));
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "employees = \"in/employees.csv\"\ncitations = \"in/citations.csv\"\nout_dir = \"from_file\"\nseed = 5\n").unwrap();
    let out = tmp.path().join("from_flag");
    let status = Command::new(bin)
        .args(["describe", "--config"])
        .arg(&cfg)
        .args(["--seed", "17", "--format", "machine", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let m = read_manifest(&out).unwrap();
    assert_eq!(m.config["seed"], 17);
    assert!(out.join("descriptives.json").is_file());
    assert!(!tmp.path().join("from_file").exists());

    let missing = Command::new(bin)
        .args(["validate", "--employees", "/nonexistent.csv"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
}
