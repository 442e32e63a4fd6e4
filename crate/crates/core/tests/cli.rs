use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nekhoroshev::cli::{normalform_report, run_command, Format, RunConfig};

const COMMANDS: [&str; 6] = ["verify", "normalform", "stability", "measure", "simulate", "demo"];

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn nklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nklab")).args(args).output().unwrap()
}

fn shipped() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(configs())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_round_trip() {
    for p in shipped() {
        let c = RunConfig::load(&p).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, c, "{}", p.display());
    }
}

#[test]
fn default_config_exits_zero() {
    for cmd in COMMANDS {
        let out = nklab(&[cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn small_c0_fails_with_witness() {
    let cfg = configs().join("bad_c0.toml");
    let out = nklab(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("a1_growth")).unwrap();
    assert!(row.contains("false") && row.contains("witness j"), "{row}");
}

#[test]
fn malformed_config_names_the_field() {
    let dir = std::env::temp_dir().join(format!("nklab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "[simulate]\nd_t = 0.1\n").unwrap();
    let out = nklab(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d_t"));

    let tight = dir.join("tight.toml");
    std::fs::write(&tight, "[normalform]\nbudget = 50\n").unwrap();
    let out = nklab(&["normalform", "--config", tight.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_flag_writes_the_payload() {
    let dir = std::env::temp_dir().join(format!("nklab-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("stability.json");
    let out = nklab(&["stability", "--format", "json", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    for r in rows.as_array().unwrap() {
        for k in ["eps", "d", "N", "ln_t"] {
            assert!(r.get(k).is_some(), "{k}");
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_flag_changes_random_draws() {
    let a = nklab(&["normalform", "--seed", "1"]).stdout;
    let b = nklab(&["normalform", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn jobs_do_not_change_payloads() {
    let a = nklab(&["measure", "--jobs", "1"]).stdout;
    let b = nklab(&["measure", "--jobs", "3"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn demo_configs_validate() {
    let cfg = RunConfig::load(&configs().join("demo_convnls_v0.toml")).unwrap();
    let rep = normalform_report(&cfg).unwrap();
    assert!(rep.residual_sup < 1e-8);
    let chain: Vec<f64> = rep.trace.iter().map(|t| t.ln_p_chain).collect();
    assert!(chain.windows(2).all(|w| w[1] < w[0]), "{chain:?}");

    for name in ["demo_convnls_v0.toml", "demo_convnls_random_v.toml", "demo_fractional.toml"] {
        let cfg = RunConfig::load(&configs().join(name)).unwrap();
        let json = run_command("normalform", &cfg, Some(Format::Json)).unwrap().payload;
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for k in ["z0", "generators", "trace", "residual_sup", "ln_gate"] {
            assert!(v.get(k).is_some(), "{name}: {k}");
        }
        let csv = run_command("simulate", &cfg, Some(Format::Csv)).unwrap().payload;
        assert!(csv.starts_with("t,norm_s,norm_l2,energy,norm_low,norm_high\n"), "{name}");
        let csv = run_command("measure", &cfg, Some(Format::Csv)).unwrap().payload;
        assert!(csv.starts_with("family,gamma,N,d,fraction,ci_low,ci_high"), "{name}");
    }
}
