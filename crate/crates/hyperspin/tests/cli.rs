use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hyperspin");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HYPERSPIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "metadata.json" {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn two_point_scan_writes_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--scan", "10,10,5,2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let lines = fs::read_to_string(dir.path().join("lines.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(lines.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), hyperspin::format::LINES_HEADER);
    let mut ns: Vec<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
    ns.dedup();
    assert_eq!(ns, ["1", "2"]);
    assert!(dir.path().join("profiles/profile_0001.csv").exists());
    assert!(dir.path().join("profiles/profile_0002.csv").exists());
    assert!(!dir.path().join("profiles/profile_0003.csv").exists());
    let meta = json(&dir.path().join("metadata.json"));
    assert_eq!(meta["command"], "synth");
    assert_eq!(meta["files"].as_array().unwrap().len(), 4);
}

#[test]
fn same_seed_gives_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["synth", "--scan", "10,10,5,6", "--seed", "7", "--noisy", "--fid"];
    assert!(run(&args, a.path()).status.success());
    assert!(run(&args, b.path()).status.success());
    let fa = data_files(a.path());
    assert!(fa.iter().any(|(p, _)| p.starts_with("fid")));
    assert_eq!(fa, data_files(b.path()));

    let c = tempfile::tempdir().unwrap();
    let args8 = ["synth", "--scan", "10,10,5,6", "--seed", "8", "--noisy", "--no-profiles"];
    assert!(run(&args8, c.path()).status.success());
    assert_ne!(
        fs::read(a.path().join("observations.csv")).unwrap(),
        fs::read(c.path().join("observations.csv")).unwrap()
    );
}

#[test]
fn reruns_are_byte_identical_for_every_command() {
    for args in [
        vec!["solutions"],
        vec!["branching"],
        vec!["map", "--scan", "10,10,5,3"],
        vec!["ellipsoid"],
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run(&args, a.path()).status.success(), "{args:?}");
        assert!(run(&args, b.path()).status.success(), "{args:?}");
        assert_eq!(data_files(a.path()), data_files(b.path()), "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let go = |n: &str, d: &Path| {
        Command::new(BIN)
            .args(["synth", "--scan", "10,10,5,8", "--no-profiles", "--noisy", "--out"])
            .arg(d)
            .env("HYPERSPIN_THREADS", n)
            .output()
            .unwrap()
    };
    assert!(go("1", a.path()).status.success());
    assert!(go("3", b.path()).status.success());
    assert_eq!(data_files(a.path()), data_files(b.path()));
    assert_eq!(json(&a.path().join("metadata.json"))["threads"], 1);
    assert_eq!(json(&b.path().join("metadata.json"))["threads"], 3);
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["0", "-2", "many"] {
        let o = Command::new(BIN)
            .args(["solutions", "--out"])
            .arg(dir.path())
            .env("HYPERSPIN_THREADS", bad)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(2), "{bad}");
        assert!(stderr(&o).contains("HYPERSPIN_THREADS"));
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn malformed_observation_row_exits_2_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.csv");
    fs::write(
        &obs,
        "scan_n,Bx_mT,By_mT,Bz_mT,k,l,kind,offset_kHz,sigma_kHz\n1,0,10,0,1,5,hole,12.5,1\n2,1,9,0.5,1,5,antihole,x,1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["fit", "--obs", obs.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_model_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["--model", "/nonexistent/model.json", "solutions"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/model.json"));
    assert!(!out.exists());
}

#[test]
fn invalid_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut model = json(&data("site_model.json"));
    model["ground"]["quadrupole"]["d"] = 0.0.into();
    let p = dir.path().join("m.json");
    fs::write(&p, model.to_string()).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--model", p.to_str().unwrap(), "solutions"], &out);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"version": "1", "seed": 3, "widht_khz": 5}"#).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "solutions"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("widht_khz"), "{}", stderr(&o));
    assert!(!out.exists());

    fs::write(&cfg, r#"{"version": "2"}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "solutions"], &out).status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"version": "1", "seed": 3, "scan": {"bx": 10, "by": 10, "bz": 5, "n": 5}, "profile": {"enabled": false}}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "--seed", "11", "synth"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("metadata.json"))["seed"], 11);
    assert!(!dir.path().join("profiles").exists());
    let text = fs::read_to_string(dir.path().join("observations.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').next().unwrap().parse::<usize>().unwrap() <= 5));
}

#[test]
fn lo_inside_the_band_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"version": "1", "scan": {"bx": 10, "by": 10, "bz": 5, "n": 2}, "fid": {"lo_detune_mhz": 0.1}}"#).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "synth"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Nyquist"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn bad_flag_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [vec!["synth", "--transition", "2,5"], vec!["synth", "--scan", "10,10,5"], vec!["synth", "--width-khz", "-1"]] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn fit_of_bundled_dataset_recovers_the_excited_state() {
    let dir = tempfile::tempdir().unwrap();
    let obs = data("observations.csv");
    let o = run(&["--model", data("site_model.json").to_str().unwrap(), "fit", "--obs", obs.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&dir.path().join("fit_result.json"));
    assert!(r["rms_khz"].as_f64().unwrap() < 1e-3);
    assert_eq!(r["target"], "excited");
    let p = &r["params"];
    let mut g: Vec<f64> = ["g1", "g2", "g3"].iter().map(|k| p[k].as_f64().unwrap()).collect();
    g.sort_by(f64::total_cmp);
    for (a, b) in g.iter().zip([9.069, 9.11, 9.158]) {
        assert!((a - b).abs() < 1e-4, "{g:?}");
    }
    let summary = fs::read_to_string(dir.path().join("fit_summary.txt")).unwrap();
    assert!(summary.contains("rms residual"));
}

#[test]
fn fit_of_planar_scan_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth");
    assert!(run(&["synth", "--scan", "10,10,0,200", "--no-profiles"], &synth).status.success());
    let out = dir.path().join("fit");
    let o = run(&["fit", "--obs", synth.join("observations.csv").to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("stage"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn fit_without_observations_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["fit"], dir.path()).status.code(), Some(2));
}

#[test]
fn solutions_table_lists_the_published_ground_row() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["solutions"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("solutions.txt")).unwrap();
    let row4 = text.lines().find(|l| l.trim_start().starts_with("4 ")).unwrap();
    let cols: Vec<&str> = row4.split_whitespace().collect();
    assert_eq!(&cols[..5], ["4", "++-", "-29.90", "53.48", "124.05"]);
    let j = json(&dir.path().join("solutions.json"));
    assert!(j.is_object());
}

#[test]
fn branching_text_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let m = data("branching_measured.json");
    assert!(run(&["branching", "--measured", m.to_str().unwrap()], dir.path()).status.success());
    let j = json(&dir.path().join("branching.json"));
    let text = fs::read_to_string(dir.path().join("branching.txt")).unwrap();
    for row in j["averaged"].as_array().unwrap() {
        for v in row.as_array().unwrap() {
            assert!(text.contains(&format!("{:.3}", v.as_f64().unwrap())));
        }
    }
    let ranking = fs::read_to_string(dir.path().join("ranking.txt")).unwrap();
    let first = ranking.lines().nth(1).unwrap();
    assert!(first.contains("++-") || first.contains("--+"), "{first}");
}

#[test]
fn map_and_ellipsoid_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["map", "--scan", "10,10,5,3"], dir.path()).status.success());
    let map = fs::read_to_string(dir.path().join("map.csv")).unwrap();
    // 2 subsites x 6 x 6 level pairs per point
    assert_eq!(map.lines().count(), 1 + 3 * 2 * 36);
    assert!(run(&["ellipsoid"], dir.path()).status.success());
    let ground = fs::read_to_string(dir.path().join("ellipsoid_ground.csv")).unwrap();
    assert_eq!(ground.lines().count(), 1 + 3 * 36 * 72);
}
