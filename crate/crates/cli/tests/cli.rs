use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const LINE_SCENE: &str = r#"{
  "buildings": [
    {"id": "a", "x": 0, "y": 0, "radius": 3, "height": 20, "recharge_pads": 0},
    {"id": "b", "x": 100, "y": 0, "radius": 3, "height": 40, "recharge_pads": 2},
    {"id": "c", "x": 200, "y": 0, "radius": 3, "height": 20, "recharge_pads": 0},
    {"id": "island", "x": 100, "y": 300, "radius": 3, "height": 20, "recharge_pads": 0}
  ],
  "no_fly_zones": [
    {"id": "moat", "vertices": [[-50, 150], [250, 150], [250, 200], [-50, 200]]}
  ]
}"#;

const SMALL_SWARM: &str = r#"{
  "drones": [
    {"id": "d0", "payload": 0.5, "battery_capacity": 3000, "reserve_fraction": 0.1},
    {"id": "d1", "payload": 0.5, "battery_capacity": 3000, "reserve_fraction": 0.1},
    {"id": "d2", "payload": 0.5, "battery_capacity": 3000, "reserve_fraction": 0.1}
  ],
  "spacing": 2.0,
  "cruise_speed": 5.0
}"#;

fn skyway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skyway")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self {
            dir: TempDir::new().unwrap(),
        };
        ws.put("scene.json", LINE_SCENE);
        ws.put("swarm.json", SMALL_SWARM);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn put(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn plan(&self, src: &str, dst: &str, extra: &[&str]) -> Output {
        let (scene, swarm, out) = (self.arg("scene.json"), self.arg("swarm.json"), self.arg("plan.json"));
        let mut args = vec![
            "plan", "--scene", &scene, "--swarm", &swarm, "--src", src, "--dst", dst, "--out", &out,
        ];
        args.extend_from_slice(extra);
        skyway(&args)
    }

    fn simulate(&self, extra: &[&str]) -> Output {
        let (scene, swarm, plan) = (self.arg("scene.json"), self.arg("swarm.json"), self.arg("plan.json"));
        let mut args = vec!["simulate", "--scene", &scene, "--swarm", &swarm, "--plan", &plan];
        args.extend_from_slice(extra);
        skyway(&args)
    }
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn two_building_scene_exports_three_features() {
    let ws = Workspace::new();
    ws.put(
        "pair.json",
        r#"{"buildings": [
            {"id": "x", "x": 0, "y": 0, "radius": 2, "height": 10, "recharge_pads": 0},
            {"id": "y", "x": 50, "y": 0, "radius": 2, "height": 10, "recharge_pads": 0}
        ], "no_fly_zones": []}"#,
    );
    let out = skyway(&[
        "build-network",
        "--scene",
        &ws.arg("pair.json"),
        "--swarm",
        &ws.arg("swarm.json"),
    ]);
    assert_eq!(code(&out), 0);
    let geo: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(geo["features"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_scene_is_an_input_error() {
    let ws = Workspace::new();
    ws.put("bad.json", "{\"buildings\": [");
    let out = skyway(&[
        "build-network",
        "--scene",
        &ws.arg("bad.json"),
        "--swarm",
        &ws.arg("swarm.json"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn empty_network_warns_but_succeeds() {
    let ws = Workspace::new();
    ws.put(
        "walled.json",
        r#"{"buildings": [
            {"id": "x", "x": 0, "y": 0, "radius": 2, "height": 10, "recharge_pads": 0},
            {"id": "y", "x": 50, "y": 0, "radius": 2, "height": 10, "recharge_pads": 0}
        ], "no_fly_zones": [{"id": "wall", "vertices": [[20, -40], [30, -40], [30, 40], [20, 40]]}]}"#,
    );
    let out_file = ws.arg("net.geojson");
    let out = skyway(&[
        "build-network",
        "--scene",
        &ws.arg("walled.json"),
        "--swarm",
        &ws.arg("swarm.json"),
        "--out",
        &out_file,
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(
        read_json(&ws.path("net.geojson"))["features"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn trivial_route_needs_the_flag() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "a", &[])), 2);
    let out = ws.plan("a", "a", &["--allow-trivial"]);
    assert_eq!(code(&out), 0);
    let plan = read_json(&ws.path("plan.json"));
    assert_eq!(plan["total_time"], 0.0);
    assert!(plan["legs"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_node_is_an_input_error() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "nowhere", &[])), 2);
}

#[test]
fn unreachable_destination_reports_frontier() {
    let ws = Workspace::new();
    let out = ws.plan("a", "island", &[]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("expanded"));
}

#[test]
fn plan_summary_and_recharge_stop() {
    let ws = Workspace::new();
    let out = ws.plan("a", "c", &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("total_time: "));
    assert!(text.contains("route: a -> b -> c"));
    assert!(text.contains("recharge at b"));
    let plan = read_json(&ws.path("plan.json"));
    assert_eq!(plan["stops"]["b"]["kind"], "Recharge");
    assert_eq!(plan["inputs"]["scene"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_fresh_plan() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "c", &[])), 0);
    let csv = ws.arg("samples.csv");
    let out = ws.simulate(&["--samples", &csv]);
    assert_eq!(code(&out), 0);
    let log = String::from_utf8(out.stdout).unwrap();
    let kinds: Vec<String> = log
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["kind"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(kinds.first().unwrap(), "Depart");
    assert_eq!(kinds.last().unwrap(), "Done");
    assert!(kinds.iter().any(|k| k == "RechargeStart"));
    let samples = fs::read_to_string(ws.path("samples.csv")).unwrap();
    assert!(samples.starts_with("t,drone_id,x,y,z,battery_j\n"));
}

#[test]
fn simulate_writes_event_file() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "c", &[])), 0);
    let events = ws.arg("events.jsonl");
    assert_eq!(code(&ws.simulate(&["--out", &events, "--dt", "0.05"])), 0);
    assert!(fs::read_to_string(ws.path("events.jsonl")).unwrap().lines().count() > 3);
}

#[test]
fn edited_scene_hash_is_stale() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "c", &[])), 0);
    let mut plan = read_json(&ws.path("plan.json"));
    plan["inputs"]["scene"] = serde_json::Value::from("0".repeat(64));
    ws.put("plan.json", &serde_json::to_string_pretty(&plan).unwrap());
    let out = ws.simulate(&[]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("scene"));
}

#[test]
fn changed_input_file_is_stale() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "c", &[])), 0);
    ws.put(
        "swarm.json",
        &SMALL_SWARM.replace("\"spacing\": 2.0", "\"spacing\": 2.5"),
    );
    assert_eq!(code(&ws.simulate(&[])), 4);
}

#[test]
fn plan_without_recharge_faults() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "c", &[])), 0);
    let mut plan = read_json(&ws.path("plan.json"));
    plan["stops"]["b"] = serde_json::json!({"kind": "Flyover"});
    ws.put("plan.json", &serde_json::to_string_pretty(&plan).unwrap());
    let out = ws.simulate(&[]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ran out of battery"));
}

#[test]
fn plan_file_missing_hashes_is_an_input_error() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.plan("a", "c", &[])), 0);
    let mut plan = read_json(&ws.path("plan.json"));
    plan.as_object_mut().unwrap().remove("inputs");
    ws.put("plan.json", &serde_json::to_string_pretty(&plan).unwrap());
    assert_eq!(code(&ws.simulate(&[])), 2);
}

#[test]
fn demo_writes_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = skyway(&["demo", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for name in ["network.geojson", "plan.json", "events.jsonl", "samples.csv"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("total_time"));
}
