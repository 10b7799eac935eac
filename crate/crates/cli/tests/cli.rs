use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ehdspray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehdspray"))
        .args(args)
        .env_remove("EHDSPRAY_OUT_DIR")
        .output()
        .unwrap()
}

const BASE: &str = r#"
seed = 3

[ink]
surface_tension = 0.072
conductivity = 1e-4
relative_permittivity = 70.0
viscosity = 1.2e-3
evaporation_constant = 1e-9

[process]
flow_rate_per_head = 9.7e-11

[transport]
duration = 2e-3
emission_cutoff = 1e-4
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_ok(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![
        cmd,
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let res = ehdspray(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn missing_required_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &BASE.replace("surface_tension = 0.072\n", ""));
    let res = ehdspray(&[
        "rate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("ink.surface_tension"), "{err}");
    assert!(err.contains("line 4"), "section line reported: {err}");
}

#[test]
fn bad_values_and_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let c = cfg.to_str().unwrap();
    let res = ehdspray(&["rate", "--config", c, "--set", "process.flow_rate_per_head=-1"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("process.flow_rate_per_head"));
    let typo = write_config(dir.path(), "t.toml", &format!("{BASE}\n[layout]\nhead_count = 2\n"));
    let res = ehdspray(&["rate", "--config", typo.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("layout.head_count"));
    assert_eq!(ehdspray(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ehdspray(&["rate"]).status.code(), Some(2), "no --config");
}

#[test]
fn bracket_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    // No spacing in the bracket reaches this threshold.
    let res = ehdspray(&[
        "layout-opt",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().join("o").to_str().unwrap(),
        "--set",
        "layout_opt.threshold=0.99999",
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    // the table is still written for inspection
    assert!(dir.path().join("o/layout_opt.csv").exists());
}

#[test]
fn io_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        ehdspray(&["rate", "--config", missing.to_str().unwrap()]).status.code(),
        Some(4)
    );
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let blocker = write_config(dir.path(), "file", "");
    let res = ehdspray(&[
        "rate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn repeated_runs_differ_only_in_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_ok("plume", &cfg, &a, &[]);
    run_ok("plume", &cfg, &b, &[]);
    run_ok("plume", &cfg, &c, &["--reproducible"]);
    let strip = |bytes: &[u8]| -> String {
        String::from_utf8_lossy(bytes)
            .lines()
            .filter(|l| !l.starts_with("# generated "))
            .map(|l| format!("{l}\n"))
            .collect()
    };
    let (fa, fb, fc) = (files(&a), files(&b), files(&c));
    assert_eq!(fa.len(), 3);
    for ((x, y), z) in fa.iter().zip(&fb).zip(&fc) {
        assert_eq!(strip(&x.1), strip(&y.1), "{}", x.0);
        assert_eq!(strip(&x.1).as_bytes(), &z.1[..], "{}", x.0);
        assert!(!String::from_utf8_lossy(&z.1).contains("# generated "));
    }
}

#[test]
fn effective_config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(
        "deposit",
        &cfg,
        &a,
        &["--reproducible", "--seed", "17", "--set", "deposit.grid.cell_size=2e-4"],
    );
    let echo = a.join("effective_config.toml");
    run_ok("deposit", &echo, &b, &["--reproducible"]);
    assert_eq!(files(&a), files(&b));
    let text = fs::read_to_string(&echo).unwrap();
    assert!(text.contains("seed = 17"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let out = dir.path().join("env_out");
    let res = Command::new(env!("CARGO_BIN_EXE_ehdspray"))
        .args(["rate", "--config", cfg.to_str().unwrap(), "--set", "rate.n_heads=[1]"])
        .env("EHDSPRAY_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(out.join("rate.csv").exists());
}

#[test]
fn print_defaults_is_a_loadable_config() {
    let res = ehdspray(&["--print-defaults"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("REQUIRED"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.toml", &text);
    run_ok(
        "field-map",
        &cfg,
        &dir.path().join("o"),
        &["--set", "field_map.nu=3", "--set", "field_map.nv=3"],
    );
    let map = fs::read_to_string(dir.path().join("o/field_map.csv")).unwrap();
    assert_eq!(map.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);
}

#[test]
fn every_output_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let out = dir.path().join("o");
    for cmd in ["field-map", "interference", "layout-opt", "rate", "deposit"] {
        run_ok(
            cmd,
            &cfg,
            &out,
            &["--reproducible", "--set", "field_map.nu=5", "--set", "field_map.nv=5"],
        );
    }
    let all = files(&out);
    assert_eq!(all.len(), 9);
    for (name, bytes) in all {
        let text = String::from_utf8_lossy(&bytes);
        assert!(text.contains("ehdspray 0.1.0"), "{name}");
        assert!(text.contains("config_sha256 "), "{name}");
        assert!(text.contains("seed 3"), "{name}");
    }
}

#[test]
fn binary_grid_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", BASE);
    let out = dir.path().join("o");
    run_ok("deposit", &cfg, &out, &["--reproducible"]);
    let bytes = fs::read(out.join("thickness.grid")).unwrap();
    let (grid, prov) = ehdspray_core::deposition::read_binary_grid(&bytes[..]).unwrap();
    assert!(prov.iter().any(|l| l.starts_with("config_sha256")));
    let csv = fs::read_to_string(out.join("thickness.csv")).unwrap();
    let values: Vec<f64> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert_eq!(values, grid.thickness);
    assert!(grid.total_volume() > 0.0);
}
