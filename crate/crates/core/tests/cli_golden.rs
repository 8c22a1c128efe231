mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nmopso::objectives::evaluate_all;
use nmopso::scenario::load_scenario_file;
use nmopso::terrain::load_terrain;
use nmopso::CartesianPath;
use tempfile::TempDir;

use common::bundled_path;

fn nmopso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmopso")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FLAT: &str = r#"{
  "terrain": {"generate": {"width": 20, "height": 20, "cellsize": 10, "roughness": 0, "seed": 1}},
  "start": [20, 20, 50], "goal": [180, 20, 50],
  "obstacles": [{"x": 100, "y": 100, "radius": 10}],
  "drone_size": 1, "safe_distance": 10, "r_min": 5, "h_min": 20, "h_max": 80
}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn plan_args<'a>(scenario: &'a str, dir: &'a Path) -> Vec<String> {
    [
        "plan", "--scenario", scenario, "--pop", "30", "--iters", "50",
        "--out", s(&dir.join("front.csv")), "--paths", s(&dir.join("paths.json")), "--stats", s(&dir.join("stats.csv")),
    ]
    .iter()
    .map(|a| a.to_string())
    .collect()
}

#[test]
fn plan_writes_three_files() {
    let dir = TempDir::new().unwrap();
    let args = plan_args(s(&bundled_path()), dir.path());
    let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
    let manifest = dir.path().join("manifest.json");
    full.extend(["--manifest", s(&manifest)]);
    let out = nmopso(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let front = fs::read_to_string(dir.path().join("front.csv")).unwrap();
    assert!(front.starts_with("f1,f2,f3,f4\n"));
    let paths: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("paths.json")).unwrap()).unwrap();
    assert_eq!(paths.as_array().unwrap().len(), front.lines().count() - 1);
    assert!(fs::read_to_string(dir.path().join("stats.csv")).unwrap().contains("\ns_d,"));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config"]["population"], 30);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&nmopso(&["plan", "--scenario", "x.json", "--frobnicate"])), 64);
    assert_eq!(code(&nmopso(&["plan"])), 64);
    assert_eq!(code(&nmopso(&["launch"])), 64);
    assert_eq!(code(&nmopso(&["plan", "--scenario", s(&bundled_path()), "--pop", "1"])), 64);
    assert_eq!(code(&nmopso(&["--help"])), 0);
    assert_eq!(code(&nmopso(&["--version"])), 0);
}

#[test]
fn bad_scenarios_exit_65() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\"terrain\": ");
    assert_eq!(code(&nmopso(&["plan", "--scenario", s(&broken)])), 65);
    let same = write(&dir, "same.json", &FLAT.replace("[180, 20, 50]", "[20, 20, 50]"));
    assert_eq!(code(&nmopso(&["plan", "--scenario", s(&same)])), 65);
    assert_eq!(code(&nmopso(&["plan", "--scenario", s(&dir.path().join("missing.json"))])), 65);
}

#[test]
fn blocked_start_exits_2_after_full_run() {
    let dir = TempDir::new().unwrap();
    let blocked = write(&dir, "blocked.json", &FLAT.replace(r#""x": 100, "y": 100"#, r#""x": 22, "y": 20"#));
    let args = plan_args(s(&blocked), dir.path());
    let out = nmopso(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&out), 2);
    assert_eq!(fs::read_to_string(dir.path().join("front.csv")).unwrap(), "f1,f2,f3,f4\n");
}

#[test]
fn unwritable_outputs_exit_66() {
    let dir = TempDir::new().unwrap();
    let nowhere = dir.path().join("no/such/dir");
    let args = plan_args(s(&bundled_path()), &nowhere);
    assert_eq!(code(&nmopso(&args.iter().map(String::as_str).collect::<Vec<_>>())), 66);
    let out = s(&nowhere.join("t.asc")).to_string();
    let tg = ["terrain-gen", "--width", "4", "--height", "4", "--cellsize", "10", "--roughness", "0", "--out", &out];
    assert_eq!(code(&nmopso(&tg)), 66);
}

#[test]
fn evaluate_reports_objectives() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "flat.json", FLAT);

    let straight = write(&dir, "straight.txt", "20 20 50\n100 20 50\n180 20 50\n");
    let out = nmopso(&["evaluate", "--scenario", s(&scenario), "--path", s(&straight)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("f1 0\nf2 0\nf3 0\nf4 0\n"), "{text}");
    assert!(text.contains("kinematics pass"));

    let through = write(&dir, "through.txt", "20 20 50\n100 100 50\n180 20 50\n");
    let out = nmopso(&["evaluate", "--scenario", s(&scenario), "--path", s(&through)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8(out.stdout).unwrap().contains("f2 inf\n"));

    let bad = write(&dir, "bad.txt", "20 20\n");
    assert_eq!(code(&nmopso(&["evaluate", "--scenario", s(&scenario), "--path", s(&bad)])), 65);

    let composite_text = "20 20 50\n60 35 40\n120 60 70\n180 20 50\n";
    let composite = write(&dir, "composite.txt", composite_text);
    let out = nmopso(&["evaluate", "--scenario", s(&scenario), "--path", s(&composite)]);
    let want = evaluate_all(&CartesianPath::parse(composite_text).unwrap(), &load_scenario_file(&scenario).unwrap());
    let printed: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .take(4)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(printed, want.0.to_vec());
}

#[test]
fn compare_tables() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "flat.json", FLAT);
    let base = ["compare", "--scenario", s(&scenario), "--pop", "30", "--iters", "40"];
    let one = nmopso(&[&base[..], &["--algos", "nmopso", "--runs", "1"]].concat());
    assert_eq!(code(&one), 0);
    let table = String::from_utf8(one.stdout).unwrap();
    assert_eq!(table.lines().count(), 6);
    assert!(table.starts_with("algo,runs,feasible_runs,statistic,max,min,mean,std\n"));
    let again = nmopso(&[&base[..], &["--algos", "nmopso", "--runs", "1"]].concat());
    assert_eq!(table, String::from_utf8(again.stdout).unwrap());

    let both = nmopso(&[&base[..], &["--algos", "nmopso,wpso", "--runs", "2"]].concat());
    let table = String::from_utf8(both.stdout).unwrap();
    for algo in ["nmopso", "wpso"] {
        let f1 = table.lines().find(|l| l.starts_with(&format!("{algo},2,")) && l.contains(",f1,")).unwrap();
        assert!(!f1.ends_with(",,,,"), "{f1}");
    }
    assert_eq!(code(&nmopso(&[&base[..], &["--algos", "nmopso,pesa2", "--runs", "1"]].concat())), 64);
}

#[test]
fn terrain_gen_round_trips() {
    let dir = TempDir::new().unwrap();
    let gen = |name: &str, rough: &str, seed: &str| {
        let p = dir.path().join(name);
        let args = ["terrain-gen", "--width", "12", "--height", "9", "--cellsize", "5", "--roughness", rough, "--seed", seed, "--out", s(&p)];
        assert_eq!(code(&nmopso(&args)), 0);
        fs::read_to_string(p).unwrap()
    };
    let flat = load_terrain(&gen("flat.asc", "0", "1")).unwrap();
    assert!(flat.elevations().iter().all(|&z| z == 0.0));
    let a = gen("a.asc", "0.6", "3");
    assert_eq!(a, gen("b.asc", "0.6", "3"));
    let t = load_terrain(&a).unwrap();
    assert_eq!((t.ncols(), t.nrows()), (12, 9));
    assert_eq!(code(&nmopso(&["terrain-gen", "--width", "4", "--height", "4", "--cellsize", "1", "--roughness", "2", "--out", s(&dir.path().join("x"))])), 64);
}

#[test]
fn front_file_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut fronts = Vec::new();
    for threads in ["1", "3"] {
        let sub = dir.path().join(threads);
        fs::create_dir(&sub).unwrap();
        let args = plan_args(s(&bundled_path()), &sub);
        let out = Command::new(env!("CARGO_BIN_EXE_nmopso")).args(&args).env("NMOPSO_THREADS", threads).output().unwrap();
        assert_eq!(code(&out), 0);
        fronts.push((fs::read(sub.join("front.csv")).unwrap(), fs::read(sub.join("paths.json")).unwrap()));
    }
    assert_eq!(fronts[0], fronts[1]);
}
