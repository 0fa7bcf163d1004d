// Copyright 2026 The wbpsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn wbpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wbpsim"))
        .args(args)
        .env("WBPSIM_WORKERS", "1")
        .output()
        .expect("spawn wbpsim")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_conf(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn digest_of(csv: &str) -> String {
    csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string()
}

#[test]
fn minimal_config_runs() {
    let out = wbpsim(&["run", data("minimal.conf").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("# [system]"));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("config_id,"));
}

#[test]
fn bad_values_name_the_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_conf(dir.path(), "zero.conf", "[system]\nclusters = 0\n");
    let out = wbpsim(&["run", &zero]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("clusters"), "{}", stderr(&out));

    let unknown = write_conf(dir.path(), "unknown.conf", "[system]\nclusters = 2\n\n[run]\nslots = 2\nspeed = 3\n");
    let out = wbpsim(&["run", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("line 6") && msg.contains("speed"), "{msg}");
}

#[test]
fn trace_does_not_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let conf = data("3c4t.conf");
    let trace = dir.path().join("t.jsonl");
    let plain = wbpsim(&["run", conf.to_str().unwrap()]);
    let traced = wbpsim(&["run", conf.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert!(plain.status.success() && traced.status.success());
    let (a, b) = (String::from_utf8(plain.stdout).unwrap(), String::from_utf8(traced.stdout).unwrap());
    assert_eq!(a, b);
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    let times: Vec<u64> = lines.iter().map(|v| v["t"].as_u64().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(digest_of(&a).len(), 64);
}

#[test]
fn reruns_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let conf = data("3c4t.conf");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = wbpsim(&["run", conf.to_str().unwrap(), "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // The seed only changes payload bits; timing and the digest stay put.
    let other = String::from_utf8(wbpsim(&["run", conf.to_str().unwrap(), "--seed", "2"]).stdout).unwrap();
    let first = std::fs::read_to_string(&a).unwrap();
    assert_eq!(other.lines().nth(1).unwrap().split(',').nth(6), Some("2"));
    assert_eq!(digest_of(&other), digest_of(&first));
}

#[test]
fn injected_fault_fails_strict_and_warns_lenient() {
    let conf = data("minimal.conf");
    let strict = wbpsim(&["run", conf.to_str().unwrap(), "--inject-fault"]);
    assert_eq!(strict.status.code(), Some(3), "{}", stderr(&strict));
    let lenient = wbpsim(&["run", conf.to_str().unwrap(), "--inject-fault", "--lenient"]);
    assert!(lenient.status.success(), "{}", stderr(&lenient));
    assert!(stderr(&lenient).contains("protocol violation"));
}

#[test]
fn feature_flags_change_the_row() {
    let conf = data("3c4t.conf");
    let base = wbpsim(&["run", conf.to_str().unwrap(), "--no-multithreading", "--no-lazy-deletion"]);
    assert!(base.status.success());
    let row = String::from_utf8(base.stdout).unwrap();
    let fields: Vec<&str> = row.lines().nth(1).unwrap().split(',').collect();
    let header: Vec<&str> = row.lines().next().unwrap().split(',').collect();
    let col = |name: &str| fields[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("mt"), "false");
    assert_eq!(col("ld"), "false");
    assert_eq!(col("residency_hits"), "0");
}

#[test]
fn small_sweep_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_conf(dir.path(), "s.conf", "[link]\nusers = 2\n[tdd]\npattern = U,D\nslot_duration = 1000\n[run]\nslots = 4\n");
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_wbpsim"))
            .args(["sweep", &conf, "--grid", "1,2 x 2..3"])
            .env("WBPSIM_WORKERS", workers)
            .output()
            .unwrap()
    };
    let (one, two) = (run("1"), run("2"));
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(String::from_utf8(one.stdout).unwrap().lines().count(), 5);
}

#[test]
fn ablation_emits_six_rows() {
    let out = wbpsim(&["ablation", data("3c4t.conf").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["12T-6L6S/base", "12T-6L6S/mt", "12T-6L6S/mt+ld", "3C4T-2L2S/base", "3C4T-2L2S/mt", "3C4T-2L2S/mt+ld"]);
}

#[test]
fn calibrate_reports_every_anchor() {
    let out = wbpsim(&["calibrate", data("anchors.csv").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.contains("fft,512,64,1122,1122"), "{csv}");
}
