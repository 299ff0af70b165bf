use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn meanorbit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meanorbit"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = meanorbit(&["certify", "--a", "30", "--b", "0.3333333333", "--depth", "10", "--require-pass"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = read_json(&dir.path().join("certificate.json"));
    assert_eq!(cert["pass"], Value::Bool(true));
    assert_eq!(cert["component_count"], 233);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(cert["config_hash"], manifest["config_hash"]);
    let k = fs::read_to_string(dir.path().join("k_approximation.csv")).unwrap();
    assert!(k.starts_with(&format!("# config_hash={}\nlabel,left,right\n", manifest["config_hash"].as_str().unwrap())));
    assert_eq!(k.lines().count(), 2 + 233);
}

#[test]
fn symbolic_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = meanorbit(&["symbolic", "--max-n", "12"], dir.path());
    assert!(out.status.success());
    let table = read_json(&dir.path().join("symbolic.json"));
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows[2]["B_n"], 4);
    assert_eq!(rows[9]["B_n"], 123);
    assert_eq!(rows.len(), 12);
}

#[test]
fn mean_law_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = meanorbit(&["mean-law", "--a", "12", "--b", "0.3333333333", "--max-period", "6", "--require-pass"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = read_json(&dir.path().join("mean_law.json"));
    assert!(r["report"]["worst_deviation"].as_f64().unwrap() <= 1e-8);
    assert!(r["report"]["checked"].as_u64().unwrap() >= 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let failing = meanorbit(&["certify", "--a", "10", "--b", "0.49", "--require-pass"], dir.path());
    assert_eq!(failing.status.code(), Some(1));
    let tolerated = meanorbit(&["certify", "--a", "10", "--b", "0.49"], dir.path());
    assert_eq!(tolerated.status.code(), Some(0));
    for bad in [
        vec!["certify", "--a", "30", "--b", "1.5"],
        vec!["certify", "--a", "3", "--b", "1/3"],
        vec!["certify", "--a", "30"],
        vec!["bifurcation", "--b", "1/3", "--a-min", "2"],
        vec!["no-such-command"],
    ] {
        let out = meanorbit(&bad, dir.path());
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
    let cfg = dir.path().join("broken.json");
    fs::write(&cfg, "{\"command\": 3}").unwrap();
    let out = meanorbit(&["--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_and_replayable() {
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    let args = ["shiftlab", "--a", "30", "--b", "1/3", "--random", "200", "--seed", "11", "--degree", "6"];
    assert!(meanorbit(&args, one.path()).status.success());
    assert!(meanorbit(&args, two.path()).status.success());
    let files = ["shiftlab_residuals.csv", "shiftlab_fit.json", "shiftlab_rank.json"];
    for f in files {
        assert_eq!(fs::read(one.path().join(f)).unwrap(), fs::read(two.path().join(f)).unwrap(), "{f}");
    }
    // replay from the manifest's config
    let manifest = read_json(&one.path().join("manifest.json"));
    let three = tempfile::tempdir().unwrap();
    let cfg = three.path().join("run.json");
    let mut config = manifest["config"].clone();
    config["out_dir"] = Value::String(three.path().join("out").to_string_lossy().into_owned());
    fs::write(&cfg, config.to_string()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_meanorbit")).arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in files {
        assert_eq!(fs::read(one.path().join(f)).unwrap(), fs::read(three.path().join("out").join(f)).unwrap(), "{f}");
    }
    // another seed changes the hash
    let four = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[8] = "12";
    assert!(meanorbit(&other, four.path()).status.success());
    let h1 = read_json(&one.path().join("manifest.json"))["config_hash"].clone();
    let h2 = read_json(&four.path().join("manifest.json"))["config_hash"].clone();
    assert_ne!(h1, h2);
}

#[test]
fn fraction_and_decimal_b_differ_in_hash_only_when_values_differ() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    assert!(meanorbit(&["conjugacy-check", "--a", "30", "--b", "1/4", "--grid", "100"], dir_a.path()).status.success());
    assert!(meanorbit(&["conjugacy-check", "--a", "30", "--b", "0.25", "--grid", "100"], dir_b.path()).status.success());
    assert_eq!(
        fs::read(dir_a.path().join("conjugacy.json")).unwrap(),
        fs::read(dir_b.path().join("conjugacy.json")).unwrap()
    );
}

#[test]
fn every_output_carries_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["orbit", "--a", "30", "--b", "1/3", "--n", "50"],
        &["periodic", "--a", "30", "--b", "1/3", "--period", "2"],
        &["bifurcation", "--b", "1/3", "--a-min", "8.5", "--a-max", "9.5", "--a-steps", "5", "--samples", "4"],
        &["find-a0", "--b", "0.2", "--a-min", "40", "--a-max", "60"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let sub = dir.path().join(i.to_string());
        let out = meanorbit(args, &sub);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let hash = read_json(&sub.join("manifest.json"))["config_hash"].as_str().unwrap().to_string();
        for entry in fs::read_dir(&sub).unwrap() {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            assert!(text.contains(&hash), "{}", path.display());
        }
    }
}
