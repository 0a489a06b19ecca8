use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command as Proc, Output};

use pinmg_cli::config::{self, Command, Overrides};
use pinmg_cli::RunManifest;
use pinmg_core::cases;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn case(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases").join(name)
}

fn pinmg(args: &[&str], config: &Path, out: &Path) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_pinmg"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn resolve(path: &Path, cmd: Command, ov: &Overrides) -> pinmg_cli::Resolved {
    config::load(path)
        .unwrap()
        .resolve(path.parent().unwrap(), cmd, ov)
        .unwrap()
}

#[test]
fn shipped_case_files_match_the_library_presets() {
    for name in ["case1.toml", "case1b.toml", "case2_single.toml", "case2_multi.toml"] {
        let r = resolve(&case(name), Command::Simulate, &Overrides::default());
        assert_eq!(r.net.edges(), cases::five_bus_network().edges(), "{name}");
        assert_eq!(r.topology.unwrap(), cases::five_bus_topology(), "{name}");
        assert_eq!(r.gains, pinmg_core::ControllerGains::default(), "{name}");
        assert_eq!(r.doc.pinning.gain, cases::CASE_GAIN);
    }
    let r = resolve(&case("case3.toml"), Command::Simulate, &Overrides::default());
    assert_eq!(r.net.edges(), cases::four_bus_network().edges());
    assert_eq!(r.topology.unwrap(), cases::four_bus_topology());

    let load_step = resolve(&case("case2_single.toml"), Command::Simulate, &Overrides::default());
    let s = load_step.scenario.unwrap();
    let reference = cases::load_step_scenario(1e-4);
    assert_eq!(s.events, reference.events);
    assert_eq!(s.t_end, reference.t_end);
}

#[test]
fn four_bus_analysis_reports_paths_six_and_four() {
    let dir = TempDir::new().unwrap();
    let o = pinmg(&["analyze"], &case("case3.toml"), dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("analysis.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[0][2]), ("DG1", "6"));
    assert_eq!((rows[1][0], rows[1][2]), ("DG2", "4"));
    // The communication graph is directed, so no bounds are reported.
    assert!(rows.iter().all(|r| r[5] == "NOT_APPLICABLE" && r[6] == "NOT_APPLICABLE"));
    assert!(rows[0][7].contains("undirected"));
}

#[test]
fn empty_candidate_list_analyses_every_singleton() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[network]\npreset = \"five-bus\"\n");
    let o = pinmg(&["analyze"], &cfg, dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("analysis.csv")).unwrap();
    let sets: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sets, ["DG1", "DG2", "DG3", "DG4", "DG5"]);
}

#[test]
fn undirected_network_gets_numeric_bounds() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[network]\ntext = \"\"\"\nnodes 4\ndirected false\n1 2\n2 3\n3 4\n\"\"\"\n[analyze]\ncandidates = [[2], [1, 4]]\n",
    );
    let o = pinmg(&["analyze", "--gain", "1.0"], &cfg, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("analysis.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let phi: f64 = f[4].parse().unwrap();
        let lo: f64 = f[5].parse().unwrap();
        let hi: f64 = f[6].parse().unwrap();
        assert!(lo <= phi + 1e-7 && phi <= hi + 1e-7, "{line}");
    }
}

#[test]
fn target_rate_selection_matches_the_cases() {
    let dir = TempDir::new().unwrap();
    let o = pinmg(&["pin"], &case("case1.toml"), dir.path());
    assert!(o.status.success());
    let sel: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("selection.json")).unwrap()).unwrap();
    assert_eq!(sel["pinned"], serde_json::json!(["DG2"]));
    assert_eq!(sel["ties"][0], serde_json::json!(["DG2", "DG3"]));
    assert_eq!(sel["score_trace"][0].as_array().unwrap().len(), 5);

    let o = pinmg(&["pin", "--lambda-star", "20"], &case("case1.toml"), dir.path());
    assert!(o.status.success());
    let sel: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("selection.json")).unwrap()).unwrap();
    assert_eq!(sel["pinned"], serde_json::json!(["DG2", "DG4"]));
}

#[test]
fn fixed_m_equal_to_n_pins_everything() {
    let dir = TempDir::new().unwrap();
    let o = pinmg(&["pin", "--mode", "fixed-m", "--m", "5"], &case("case1.toml"), dir.path());
    assert!(o.status.success());
    let sel: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("selection.json")).unwrap()).unwrap();
    let mut got: Vec<String> = serde_json::from_value(sel["pinned"].clone()).unwrap();
    got.sort();
    assert_eq!(got, ["DG1", "DG2", "DG3", "DG4", "DG5"]);
}

#[test]
fn exhaustive_mode_lists_alternatives() {
    let dir = TempDir::new().unwrap();
    let o = pinmg(&["pin", "--mode", "exhaustive", "--m", "1"], &case("case1.toml"), dir.path());
    assert!(o.status.success());
    let sel: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("selection.json")).unwrap()).unwrap();
    assert_eq!(sel["alternatives"], serde_json::json!([["DG2"], ["DG3"]]));
}

#[test]
fn unattainable_target_exits_3_with_best_phi() {
    let dir = TempDir::new().unwrap();
    let o = pinmg(&["pin", "--lambda-star", "1000"], &case("case1.toml"), dir.path());
    assert_eq!(o.status.code(), Some(3));
    let sel: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("selection.json")).unwrap()).unwrap();
    assert_eq!(sel["status"], "unattainable");
    assert!(sel["best_phi"].as_f64().unwrap() > 0.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("best achieved phi"));
}

#[test]
fn malformed_configs_exit_2_with_location() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("[network]\npreset = \"five-bus\"\n[pinning\n", "line 3"),
        ("[network]\npreset = \"five-bus\"\n[pinning]\nsett = [1]\n", "sett"),
        ("[network]\npreset = \"five-bus\"\n[pinning]\nset = [\"DG9\"]\n", "pinning.set"),
        ("[network]\npreset = \"five-bus\"\n[pinning]\nset = [2]\ngain = -1.0\n", "pinning.gain"),
        ("[network]\npreset = \"five-bus\"\n[pin]\nmode = \"fixed-m\"\n", "pin.m"),
        ("[network]\nfile = \"missing.net\"\n", "network.file"),
    ];
    for (text, needle) in cases {
        let cfg = write_config(&dir, text);
        let cmd = if needle == "pin.m" { "pin" } else { "simulate" };
        let o = pinmg(&[cmd], &cfg, &dir.path().join("out"));
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{needle} not in {err}");
    }
}

#[test]
fn unstable_run_exits_4_and_keeps_partial_csv() {
    let dir = TempDir::new().unwrap();
    let base = fs::read_to_string(case("case2_single.toml")).unwrap();
    // Oversized frequency droop on DG1 drives the plant unstable.
    let text = base
        .replace("[network]\nfile = \"5bus.net\"", "[network]\npreset = \"five-bus\"")
        .replacen("type = \"type-i\"\n", "type = \"type-i\"\nm_p = 0.1\n", 1);
    let cfg = write_config(&dir, &text);
    let o = pinmg(&["simulate"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("plant.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    let metrics = fs::read_to_string(dir.path().join("metrics.toml")).unwrap();
    assert!(metrics.contains("status = \"unstable\""));
    let m = RunManifest::read(&dir.path().join("manifest.toml")).unwrap();
    assert_eq!(m.exit_code, 4);
    assert!(m.outputs.iter().any(|e| e.path == "plant.csv"));
}

#[test]
fn zero_duration_gives_an_empty_trajectory() {
    let dir = TempDir::new().unwrap();
    for (cfg, csv) in [("case1.toml", "errors.csv"), ("case2_multi.toml", "plant.csv")] {
        let o = pinmg(&["simulate", "--t-end", "0"], &case(cfg), dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(dir.path().join(csv)).unwrap();
        assert_eq!(text.lines().count(), 1, "header only");
    }
}

#[test]
fn flags_override_document_fields() {
    let ov = Overrides {
        mode: Some("plant".into()),
        gain: Some(0.5),
        dt: Some(5e-5),
        t_end: Some(0.3),
        pinned: Some(vec!["4".parse().unwrap(), "DG1".parse().unwrap()]),
        ..Overrides::default()
    };
    let r = resolve(&case("case1.toml"), Command::Simulate, &ov);
    assert_eq!(r.doc.pinning.gain, 0.5);
    assert_eq!(r.pinned, vec![3, 0]);
    let s = r.scenario.unwrap();
    assert_eq!((s.dt, s.t_end), (5e-5, 0.3));
}

#[test]
fn manifest_lists_every_output_with_its_digest() {
    let dir = TempDir::new().unwrap();
    let o = pinmg(&["simulate", "--t-end", "0.2"], &case("case1.toml"), dir.path());
    assert!(o.status.success());
    let m = RunManifest::read(&dir.path().join("manifest.toml")).unwrap();
    let mut names: Vec<&str> = m.outputs.iter().map(|e| e.path.as_str()).collect();
    names.sort();
    assert_eq!(names, ["errors.csv", "metrics.toml"]);
    for e in &m.outputs {
        let data = fs::read(dir.path().join(&e.path)).unwrap();
        assert_eq!(e.sha256, hex::encode(Sha256::digest(&data)));
        assert_eq!(e.bytes, data.len() as u64);
    }
    assert_eq!(m.command, "simulate");
    assert_eq!(m.resolved.simulate.t_end, Some(0.2));
}

#[test]
fn simulate_can_read_a_selection_file() {
    let dir = TempDir::new().unwrap();
    let sel_dir = dir.path().join("sel");
    assert!(pinmg(&["pin", "--lambda-star", "20"], &case("case1.toml"), &sel_dir).status.success());
    let net = case("5bus.net");
    let cfg = write_config(
        &dir,
        &format!(
            "[network]\nfile = {:?}\n[pinning]\nfrom_selection = \"sel/selection.json\"\n",
            net.display().to_string()
        ),
    );
    let r = resolve(&cfg, Command::Simulate, &Overrides::default());
    assert_eq!(r.pinned, vec![1, 3]);
}

#[test]
fn presets_reproduce_the_inline_case_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[network]\npreset = \"five-bus\"\n[pinning]\nset = [\"DG1\", \"DG3\"]\n[simulate]\nmode = \"plant\"\nt_end = 0.7\n\
         [plant]\npreset = \"five-bus\"\n[scenario]\npreset = \"load-step\"\n",
    );
    let a = dir.path().join("preset");
    let b = dir.path().join("inline");
    assert!(pinmg(&["simulate"], &cfg, &a).status.success());
    assert!(pinmg(&["simulate", "--t-end", "0.7"], &case("case2_multi.toml"), &b).status.success());
    assert_eq!(fs::read(a.join("plant.csv")).unwrap(), fs::read(b.join("plant.csv")).unwrap());
}
