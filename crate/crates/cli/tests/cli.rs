use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use randcover_cli::{RunManifest, EXIT_INVALID, EXIT_OK};
use tempfile::TempDir;

fn randcover(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randcover"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Every file under `dir` except the manifest, which records the runtime.
fn tables(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn lists_presets() {
    let tmp = TempDir::new().unwrap();
    let o = randcover(&["presets"], tmp.path());
    assert_eq!(code(&o), EXIT_OK);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "cantor-1d"));
    assert!(text.lines().any(|l| l == "falconer-scalar"));
}

#[test]
fn s0_examples() {
    for (args, want) in [(["0.5,1", "2"], 1.5), (["0.4,0.5", "2"], 2.0), (["2", "1"], 0.5)] {
        let tmp = TempDir::new().unwrap();
        let o = randcover(&["s0", "--power-law", args[0], "--d", args[1]], tmp.path());
        assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(tmp.path().join("s0.json")).unwrap()).unwrap();
        assert_eq!(v["s0"].as_f64().unwrap(), want);
        assert!((v["numeric"]["s0"].as_f64().unwrap() - want).abs() < 1e-3);
        assert_eq!(manifest(tmp.path()).command, "s0");
    }
}

#[test]
fn invalid_input_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&randcover(&["s0", "--power-law", "0.5,1", "--d", "3"], tmp.path())), EXIT_INVALID);
    assert_eq!(code(&randcover(&["cover", "--preset", "no-such"], tmp.path())), EXIT_INVALID);
    assert_eq!(code(&randcover(&["cover"], tmp.path())), EXIT_INVALID);
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"name":"x","d":1,"seed":1,"colour":"red"}"#).unwrap();
    assert_eq!(code(&randcover(&["cover", "--config", bad.to_str().unwrap()], tmp.path())), EXIT_INVALID);
}

#[test]
fn infeasible_strict_plan_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let o = randcover(&["cantor", "--preset", "cantor-strict"], tmp.path());
    assert_eq!(code(&o), EXIT_INVALID);
    let f: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("feasibility.json")).unwrap(),
    )
    .unwrap();
    assert!(f.to_string().contains("growth"), "{f}");
}

#[test]
fn same_seed_gives_identical_tables() {
    for (cmd, preset) in [("cover", "dichotomy-convergent"), ("cantor", "cantor-1d")] {
        let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(code(&randcover(&[cmd, "--preset", preset], a.path())), EXIT_OK);
        assert_eq!(code(&randcover(&[cmd, "--preset", preset], b.path())), EXIT_OK);
        assert_eq!(code(&randcover(&[cmd, "--preset", preset, "--seed", "2"], c.path())), EXIT_OK);
        let (ta, tb, tc) = (tables(a.path()), tables(b.path()), tables(c.path()));
        assert!(!ta.is_empty());
        assert_eq!(ta, tb, "{cmd} is not reproducible");
        assert_ne!(ta, tc, "{cmd} ignores the seed");
        assert_eq!(manifest(c.path()).config.seed, 2);
    }
}

#[test]
fn manifest_replays_the_run() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&randcover(&["cover", "--preset", "fan-kahane", "--seed", "9"], a.path())), EXIT_OK);
    let m = a.path().join("manifest.json");
    assert_eq!(code(&randcover(&["cover", "--config", m.to_str().unwrap()], b.path())), EXIT_OK);
    assert_eq!(tables(a.path()), tables(b.path()));
    let (ma, mb) = (manifest(a.path()), manifest(b.path()));
    assert_eq!(ma.config_hash, mb.config_hash);
    assert_eq!(ma.config, mb.config);
    assert_eq!(ma.outputs, mb.outputs);
}

#[test]
fn every_listed_output_exists() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&randcover(&["dim", "--preset", "dim-upper"], tmp.path())), EXIT_OK);
    let m = manifest(tmp.path());
    assert!(!m.outputs.is_empty());
    for p in &m.outputs {
        assert!(tmp.path().join(p).is_file(), "{}", p.display());
    }
}
