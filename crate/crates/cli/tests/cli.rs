use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bardamage(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bardamage"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn parse_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const SAMPLES: &str = r#"
steps = 40
cells = 8
eps_list = [0.1, 0.05]

[material]
kappa = 0.5
a0 = 1.0
a1 = 2.0
length = 1.0
horizon = 2.0

[datum]
kind = "samples"
times = [0.0, 1.0, 2.0]
w0 = [0.0, 0.0, 0.0]
wl = [0.0, 1.0, 1.5]
"#;

#[test]
fn lists_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = bardamage(&["preset-list"], dir.path());
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        ["monotone", "constant", "loading-unloading", "high-unload"]
    );
}

#[test]
fn classify_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = bardamage(&["classify", "--preset", "monotone"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "PerfectPlasticity");
    assert!(v["witness_pair"].is_null());
    assert_eq!(v["flow_rule_violations"], 0);

    let o = bardamage(&["classify"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "DamageOnly");
    assert_eq!(v["t0"], 0.5);
    let w = v["witness_pair"].as_array().unwrap();
    assert!(w[0].as_f64().unwrap() < w[1].as_f64().unwrap());
}

#[test]
fn limit_table_is_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = bardamage(&["simulate-limit", "--steps", "4"], dir.path());
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "t,J,sigma,l,E_closed,E_integrated,e,p_total,t0_flag,saturated\n\
         0,0,0,0,0,0,0,0,1,0\n\
         0.5,0.5,1,0,0.25,0.25,0.5,0,1,1\n\
         1,1,1,0.5,0.75,0.75,0.5,0.5,0,1\n\
         1.5,0.5,0.5,0.5,0.375,0.375,0.25,0.25,0,0\n\
         2,0,0,0.5,0.25,0.25,0,0,0,0\n"
    );
}

#[test]
fn eps_table_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SAMPLES).unwrap();
    let o = bardamage(
        &[
            "simulate-eps",
            "--config",
            "run.toml",
            "--out",
            "tables/eps.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("tables/eps.csv")).unwrap();
    assert!(text.starts_with("t,J,sigma,Theta_mean,l_eps,energy,work_cum,eb_residual\n"));
    let rows = parse_rows(&text);
    assert_eq!(rows.len(), 41);
    for r in &rows {
        assert!(r[2].abs() <= (2.0f64 / 1.95).sqrt() + 1e-12);
        // balance defect only at the step where damage starts: O((a1/L) ΔJ²)
        assert!(r[7].abs() <= 2.0 * 0.05 * 0.05);
    }
}

#[test]
fn figures_trace_hysteresis_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let o = bardamage(&["emit-figures", "--out", sub], dir.path());
        assert!(o.status.success());
    }
    for f in [
        "sigma_vs_t.csv",
        "sigma_vs_J.csv",
        "l_vs_t.csv",
        "energy_vs_t.csv",
        "comparison.csv",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let curve = parse_rows(&fs::read_to_string(dir.path().join("a/sigma_vs_J.csv")).unwrap());
    // rows are in time order: loading up to t = 1, then unloading with slope 1
    let peak = curve.iter().position(|r| r[0] == 1.0).unwrap();
    for (k, r) in curve.iter().enumerate() {
        let (j, s) = (r[0], r[1]);
        let want = if k <= peak { (2.0 * j).min(1.0) } else { j };
        assert!((s - want).abs() < 1e-12, "J = {j}");
    }
    assert_eq!(curve.last().unwrap(), &vec![0.0, 0.0]);

    let cmp = parse_rows(&fs::read_to_string(dir.path().join("a/comparison.csv")).unwrap());
    let last = cmp.last().unwrap();
    // plasticity ends in compression with residual strain, damage returns to the origin
    assert!((last[3] + 1.0).abs() < 1e-12);
    assert_eq!(last[4], 0.0);
}

#[test]
fn envelope_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = bardamage(&["envelope-table", "--points", "10"], dir.path());
    assert!(o.status.success());
    let rows = parse_rows(&stdout(&o));
    assert_eq!(rows.len(), 11);
    for r in rows {
        assert!(r[2] <= r[1] + 1e-12);
        assert!((0.0..=1.0).contains(&r[3]));
    }
}

#[test]
fn sweep_reports_monotone_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let o = bardamage(&["sweep-eps", "--steps", "100", "--cells", "8"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["sigma_monotone"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        bardamage(&["classify", "--preset", "nope"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bardamage(&["simulate-limit", "--config", "missing.toml"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(
        dir.path().join("bad.toml"),
        SAMPLES.replace("a1 = 2.0", "a1 = 0.5"),
    )
    .unwrap();
    assert_eq!(
        bardamage(&["simulate-limit", "--config", "bad.toml"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bardamage(&["simulate-eps", "--eps", "3.0"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(
        dir.path().join("huge.toml"),
        SAMPLES.replace("1.0, 1.5]", "1.0, 1e308]"),
    )
    .unwrap();
    assert_eq!(
        bardamage(&["simulate-eps", "--config", "huge.toml"], dir.path())
            .status
            .code(),
        Some(3)
    );
}
