//! End-to-end tests that drive the compiled binary the way a user would:
//! a config file in, JSON/CSV artifacts out, and the documented exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_stegcap")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args).env_remove("STEGCAP_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary failed to launch")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("killed by signal")
}

fn write_cfg(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(cfg).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).expect("missing output file")).unwrap()
}

fn binary_cfg() -> Value {
    json!({
        "seed": 7,
        "source": {"alphabet": 2, "probs": [0.5, 0.5]},
        "distortion": {"d": [[0.0, 1.0], [1.0, 0.0]]},
        "capacity": {"d1": 0.2, "d2": 0.2, "l": 2, "tol": 1e-3, "multistarts": 8}
    })
}

fn nested_cfg() -> Value {
    json!({
        "seed": 7,
        "source": {"alphabet": 2, "probs": [0.5, 0.5]},
        "codec": {
            "family": "nested", "n": 3, "rate": 2.0 / 3.0, "d1": 1.0,
            "gen2": ["111", "110", "011"], "gen1": ["111"]
        },
        "warden": {"attack": "passive", "trials": 500}
    })
}

#[test]
fn closed_form_sweep_writes_an_increasing_then_flat_csv() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = binary_cfg();
    cfg["capacity"]["sweep"] = json!({"over": "d1", "from": 0.0, "to": 0.6, "steps": 7});
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &cfg);
    let out_dir = tmp.path().join("run");

    let out = run(
        &[
            "capacity",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--binary-closed-form",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("capacity_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d1,d2,value"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 7);
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!((values[0]).abs() < 1e-12);
    // the curve saturates once the embedding budget stops binding
    assert!((values[6] - values[5]).abs() < 1e-12);
    assert!((values[6] - 0.2780719051126377).abs() < 1e-9);

    let manifest = read_json(&out_dir.join("manifest.json"));
    assert!(manifest["command"].as_str().unwrap().starts_with("capacity"));
    assert!(manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .any(|o| o == "capacity_sweep.csv"));
}

#[test]
fn passive_capacity_matches_the_entropy_oracle() {
    let tmp = TempDir::new().unwrap();
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &binary_cfg());
    let out_dir = tmp.path().join("run");

    let out = run(
        &[
            "capacity",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--passive",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // a uniform binary covertext with budget 0.2 admits exactly h(0.2) bits
    let report = read_json(&out_dir.join("capacity.json"));
    let value = report["value"].as_f64().unwrap();
    assert!((value - 0.7219280948873623).abs() < 1e-4);
    assert_eq!(report["converged"], json!(true));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0.722"), "stdout: {stdout}");
}

#[test]
fn a_malformed_config_fails_fast_without_partial_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg_path = tmp.path().join("bad.json");
    fs::write(&cfg_path, br#"{"capacity": {"d1": "oops"}}"#).unwrap();
    let out_dir = tmp.path().join("run");

    let out = run(
        &[
            "capacity",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--passive",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(!out_dir.exists(), "a rejected config must not leave files behind");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn seed_resolution_prefers_flag_over_config_over_environment() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = nested_cfg();
    cfg["warden"]["trials"] = json!(50);
    let with_seed = write_cfg(tmp.path(), "with_seed.json", &cfg);
    cfg.as_object_mut().unwrap().remove("seed");
    let no_seed = write_cfg(tmp.path(), "no_seed.json", &cfg);

    let seed_of = |cfg_path: &Path, dir: &str, extra: &[&str], envs: &[(&str, &str)]| {
        let out_dir = tmp.path().join(dir);
        let mut args = vec![
            "codec",
            "loopback",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out = run(&args, envs);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        read_json(&out_dir.join("trial_report.json"))["seed"]
            .as_u64()
            .unwrap()
    };

    assert_eq!(seed_of(&no_seed, "env", &[], &[("STEGCAP_SEED", "12345")]), 12345);
    assert_eq!(seed_of(&no_seed, "default", &[], &[]), 0);
    assert_eq!(
        seed_of(&no_seed, "flag", &["--seed", "9"], &[("STEGCAP_SEED", "12345")]),
        9
    );
    assert_eq!(
        seed_of(&with_seed, "cfg", &[], &[("STEGCAP_SEED", "12345")]),
        7,
        "a config seed outranks the environment"
    );

    let out_dir = tmp.path().join("badenv");
    let out = run(
        &[
            "codec",
            "loopback",
            "--config",
            no_seed.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[("STEGCAP_SEED", "notanumber")],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn passive_exponent_reports_the_zero_rate_threshold() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = binary_cfg();
    cfg["exponent"] = json!({
        "d1": 0.4, "tol": 1e-3,
        "rates": {"from": 0.0, "to": 1.2, "steps": 7}
    });
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &cfg);
    let out_dir = tmp.path().join("run");

    let out = run(
        &[
            "exponent",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--passive",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("exponent_curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rate,exponent"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 7);
    // at rate zero the exponent equals the divergence ceiling h(0.4)
    assert!((rows[0].1 - 0.9709505944547063).abs() < 1e-9);
    for (rate, e) in &rows {
        let oracle = (0.9709505944547063 - rate).max(0.0);
        assert!((e - oracle).abs() < 1e-9, "rate {rate}: {e} vs {oracle}");
    }

    let summary = read_json(&out_dir.join("exponent_summary.json"));
    let zero_rate = summary["zero_rate"].as_f64().unwrap();
    assert!((zero_rate - 1.0).abs() < 1e-9, "zero_rate {zero_rate}");
}

#[test]
fn nested_codec_round_trips_every_message_and_is_error_free_in_loopback() {
    let tmp = TempDir::new().unwrap();
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &nested_cfg());
    let cover = tmp.path().join("cover.txt");
    fs::write(&cover, "010\n").unwrap();

    for msg in 0..4u32 {
        let enc_dir = tmp.path().join(format!("enc{msg}"));
        let out = run(
            &[
                "codec",
                "encode",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                enc_dir.to_str().unwrap(),
                "--covertext",
                cover.to_str().unwrap(),
                "--message",
                &msg.to_string(),
                "--key-seed",
                "5",
            ],
            &[],
        );
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

        let dec_dir = tmp.path().join(format!("dec{msg}"));
        let out = run(
            &[
                "codec",
                "decode",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                dec_dir.to_str().unwrap(),
                "--stegotext",
                enc_dir.join("stegotext.txt").to_str().unwrap(),
                "--key-seed",
                "5",
            ],
            &[],
        );
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let decoded = read_json(&dec_dir.join("decoded.json"));
        assert_eq!(decoded["message"], json!(msg));
    }

    let out_dir = tmp.path().join("loopback");
    let out = run(
        &[
            "codec",
            "loopback",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("trial_report.json"));
    assert_eq!(report["trials"], json!(500));
    assert_eq!(report["errors"], json!(0));
}

#[test]
fn permuted_codebooks_round_trip_with_matching_key_seeds() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "seed": 7,
        "source": {"alphabet": 2, "probs": [0.5, 0.5]},
        "distortion": {"d": [[0.0, 1.0], [1.0, 0.0]]},
        "codec": {"family": "rm", "n": 8, "rate": 0.25, "l": 2, "epsilon": 0.05, "d1": 0.25}
    });
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &cfg);

    let build_dir = tmp.path().join("build");
    let out = run(
        &[
            "codec",
            "build",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            build_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let codebook = build_dir.join("codebook.sbcb");
    assert!(codebook.exists());

    let cover = tmp.path().join("cover.txt");
    fs::write(&cover, "01101001\n").unwrap();
    let enc_dir = tmp.path().join("enc");
    let out = run(
        &[
            "codec",
            "encode",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            enc_dir.to_str().unwrap(),
            "--codebook",
            codebook.to_str().unwrap(),
            "--covertext",
            cover.to_str().unwrap(),
            "--message",
            "1",
            "--key-seed",
            "5",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let stego = fs::read_to_string(enc_dir.join("stegotext.txt")).unwrap();
    let stego = stego.trim();
    assert_eq!(stego.len(), 8);
    // embedding never disturbs the empirical symbol counts
    let ones = |s: &str| s.chars().filter(|&c| c == '1').count();
    assert_eq!(ones(stego), ones("01101001"));

    let dec_dir = tmp.path().join("dec");
    let out = run(
        &[
            "codec",
            "decode",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dec_dir.to_str().unwrap(),
            "--codebook",
            codebook.to_str().unwrap(),
            "--stegotext",
            enc_dir.join("stegotext.txt").to_str().unwrap(),
            "--key-seed",
            "5",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&dec_dir.join("decoded.json"))["message"], json!(1));
}

#[test]
fn decode_ties_surface_as_codec_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "seed": 7,
        "source": {"alphabet": 2, "probs": [0.5, 0.5]},
        "distortion": {"d": [[0.0, 1.0], [1.0, 0.0]]},
        "codec": {"family": "rm", "n": 4, "rate": 0.25, "l": 2, "epsilon": 0.05, "d1": 0.5}
    });
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &cfg);

    let build_dir = tmp.path().join("build");
    let out = run(
        &[
            "codec",
            "build",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            build_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let codebook = build_dir.join("codebook.sbcb");

    // the all-zero class holds one sequence, so both messages map to it and
    // the scorer cannot separate them; that must be an error, not a guess
    let cover = tmp.path().join("cover.txt");
    fs::write(&cover, "0000\n").unwrap();
    let enc_dir = tmp.path().join("enc");
    let out = run(
        &[
            "codec",
            "encode",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            enc_dir.to_str().unwrap(),
            "--codebook",
            codebook.to_str().unwrap(),
            "--covertext",
            cover.to_str().unwrap(),
            "--message",
            "0",
            "--key-seed",
            "5",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let dec_dir = tmp.path().join("dec");
    let out = run(
        &[
            "codec",
            "decode",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dec_dir.to_str().unwrap(),
            "--codebook",
            codebook.to_str().unwrap(),
            "--stegotext",
            enc_dir.join("stegotext.txt").to_str().unwrap(),
            "--key-seed",
            "5",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 4);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tie"), "stderr: {stderr}");
}

#[test]
fn exact_verification_passes_uniform_nested_and_rejects_a_skewed_source() {
    let tmp = TempDir::new().unwrap();
    let cfg_path = write_cfg(tmp.path(), "uniform.json", &nested_cfg());
    let out_dir = tmp.path().join("pass");
    let out = run(
        &[
            "verify",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("security_report.json"));
    assert_eq!(report["method"], json!("exact"));
    assert!(report["tv_distance"].as_f64().unwrap() <= 1e-12);

    let mut cfg = nested_cfg();
    cfg["source"] = json!({"alphabet": 2, "probs": [0.7, 0.3]});
    let cfg_path = write_cfg(tmp.path(), "skewed.json", &cfg);
    let out_dir = tmp.path().join("fail");
    let out = run(
        &[
            "verify",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 5);
    // the violation is reported, and the evidence still lands on disk
    let report = read_json(&out_dir.join("security_report.json"));
    assert!(report["tv_distance"].as_f64().unwrap() > 1e-3);
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn the_permutation_key_is_what_makes_the_prototype_secure() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = json!({
        "seed": 7,
        "source": {"alphabet": 2, "probs": [0.5, 0.5]},
        "distortion": {"d": [[0.0, 1.0], [1.0, 0.0]]},
        "codec": {"family": "rm", "n": 4, "rate": 0.25, "l": 2, "epsilon": 0.05, "d1": 0.5}
    });

    let cfg_path = write_cfg(tmp.path(), "keyed.json", &cfg);
    let out_dir = tmp.path().join("keyed");
    let out = run(
        &[
            "verify",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("security_report.json"));
    assert!(report["tv_distance"].as_f64().unwrap() <= 1e-12);

    // the identical codebook without the key leaks its structure
    cfg["codec"]["family"] = json!("stacked");
    let cfg_path = write_cfg(tmp.path(), "keyless.json", &cfg);
    let out_dir = tmp.path().join("keyless");
    let out = run(
        &[
            "verify",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 5);
    let report = read_json(&out_dir.join("security_report.json"));
    assert!(report["tv_distance"].as_f64().unwrap() > 0.1);
}

#[test]
fn sampled_verification_is_labelled_as_an_estimate() {
    let tmp = TempDir::new().unwrap();
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &nested_cfg());
    let out_dir = tmp.path().join("run");
    let out = run(
        &[
            "verify",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--sampled",
            "--samples",
            "20000",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("security_report.json"));
    assert_eq!(report["method"], json!("sampled"));
    assert_eq!(report["samples"], json!(20000));
    assert_eq!(report["note"], json!("sampled, not a proof"));
    assert!(report["tv_distance"].as_f64().unwrap() < 0.05);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("not a proof"), "stdout: {stdout}");
}

#[test]
fn identical_seeds_reproduce_identical_results() {
    let tmp = TempDir::new().unwrap();
    let cfg_path = write_cfg(tmp.path(), "cfg.json", &binary_cfg());
    let mut artifacts = Vec::new();
    for dir in ["a", "b"] {
        let out_dir = tmp.path().join(dir);
        let out = run(
            &[
                "capacity",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--passive",
            ],
            &[],
        );
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        artifacts.push(fs::read(out_dir.join("capacity.json")).unwrap());
    }
    assert_eq!(artifacts[0], artifacts[1], "same config and seed must be bit-stable");
}

#[test]
fn an_unsaturated_auxiliary_alphabet_is_flagged_not_hidden() {
    let tmp = TempDir::new().unwrap();
    let base = json!({
        "seed": 3,
        "distortion": {"d": [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]},
        "capacity": {"d1": 0.4, "d2": 0.0, "l": 3, "tol": 1e-3, "multistarts": 8}
    });

    let cfg_path = write_cfg(tmp.path(), "ok.json", &base);
    let out_dir = tmp.path().join("ok");
    let out = run(
        &[
            "capacity",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--verify-cyclic",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("capacity.json"));
    assert_eq!(report["passed"], json!(true));

    // with two auxiliary symbols the marginal-free optimum u = x is not
    // expressible, so the check honestly fails and the run exits noisily
    let mut small = base.clone();
    small["capacity"]["l"] = json!(2);
    let cfg_path = write_cfg(tmp.path(), "small.json", &small);
    let out_dir = tmp.path().join("small");
    let out = run(
        &[
            "capacity",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--verify-cyclic",
        ],
        &[],
    );
    assert_eq!(exit_code(&out), 3);
    let report = read_json(&out_dir.join("capacity.json"));
    assert_eq!(report["passed"], json!(false));
    assert!(out_dir.join("manifest.json").exists());
}
