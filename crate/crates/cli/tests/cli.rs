use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cfkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json_out(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

/// Metadata comment and the CSV body.
fn csv_out(o: &Output) -> (Value, Vec<Vec<String>>) {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let (first, rest) = text.split_once('\n').unwrap();
    let meta = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
    let rows = rest
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (meta, rows)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

const SQUARE: &str = "--box=-1:1,-1:1";

#[test]
fn disintegrate_closed_form() {
    let v = json_out(&cfkit(&["disintegrate", SQUARE, "--t", "1", "--x", "0"]));
    let d = &v["result"][0]["disintegration"];
    let sos: Vec<f64> = d["sos"].as_array().unwrap().iter().map(num).collect();
    assert!((sos[0] - 1.0).abs() < 1e-12 && sos[1].abs() < 1e-12 && (sos[2] - 3.0).abs() < 1e-12);
    assert!((num(&d["hankel"][1][1]) - 1.0 / 3.0).abs() < 1e-10);
    assert!((num(&d["measure"]["nodes"][1]) - 1.0 / 3f64.sqrt()).abs() < 1e-10);
    assert!((num(&d["mass"]) - 1.0).abs() < 1e-10);
    assert!(num(&v["result"][0]["factorization_residual"]) <= 1e-8);
    let meta = &v["metadata"];
    assert_eq!(meta["tool"], "cfkit");
    assert_eq!(meta["config"]["t"], 1);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    assert!(meta["iterations"]["newton[0]"].is_u64());
}

#[test]
fn curve_region_config() {
    let cfg = scratch("region.json");
    std::fs::write(
        &cfg,
        r#"{"measure": {"type": "curve_region", "x_interval": [-1, 1],
            "lower": {"poly": [-0.8, 0.0, 0.2]}, "upper": {"poly": [0.9, -0.1]}},
            "y_grid": "-1.5:1.5:101"}"#,
    )
    .unwrap();
    let v = json_out(&cfkit(&[
        "disintegrate",
        "--config",
        cfg.to_str().unwrap(),
        "--x",
        "0.0",
        "--t",
        "3",
    ]));
    let r = &v["result"][0];
    assert!(num(&r["factorization_residual"]) <= 1e-8);
    assert!(num(&r["sos_min_on_grid"]) >= 1.0 - 1e-9);
    assert_eq!(r["disintegration"]["hankel"].as_array().unwrap().len(), 4);
    assert_eq!(v["metadata"]["config"]["t"], 3);
}

#[test]
fn cf_grid_shape() {
    let out = scratch("grid.csv");
    let o = cfkit(&[
        "cf-grid",
        SQUARE,
        "--t",
        "3",
        "--x-grid",
        "-1.5:1.5:101",
        "--y-grid",
        "-1.5:1.5:101",
        "--gamma",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let o2 = Output {
        stdout: text.into_bytes(),
        ..o
    };
    let (meta, rows) = csv_out(&o2);
    assert_eq!(rows[0], ["x", "y", "cf", "score", "inside"]);
    assert_eq!(rows.len(), 1 + 101 * 101);
    assert!(num(&meta["conditions"]["moment_matrix"]) > 1.0);
    let center = rows
        .iter()
        .find(|r| r[0] == "0.0" && r[1] == "0.0")
        .unwrap();
    assert_eq!(center[4], "true");
    let corner = &rows[1];
    assert_eq!(corner[4], "false");
}

#[test]
fn thread_cap_keeps_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_cfkit"))
            .args([
                "cf-grid", SQUARE, "--t", "4", "--x-grid", "-1:1:31", "--y-grid", "-1:1:31",
            ])
            .env("CF_MAX_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn score_points_file() {
    let pts = scratch("pts.csv");
    std::fs::write(&pts, "x,y\n0,0\n0.5,-0.5\n3,3\n-0.9,0.9\n").unwrap();
    let (meta, rows) = csv_out(&cfkit(&[
        "score",
        "--input",
        pts.to_str().unwrap(),
        "--gamma",
        "0.5",
        SQUARE,
        "--t",
        "2",
    ]));
    assert_eq!(rows[0], ["x", "y", "score", "inside"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][3], "true");
    assert_eq!(rows[3][3], "false");
    assert_eq!(meta["gamma"], 0.5);

    // the point cloud itself as the measure
    let (_, rows) = csv_out(&cfkit(&[
        "score",
        "--input",
        pts.to_str().unwrap(),
        "--t",
        "1",
    ]));
    assert_eq!(rows.len(), 5);
}

#[test]
fn exit_codes() {
    let o = cfkit(&["maxdet", "--poly", "1,0,-1"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["kind"], "NotInInterior");
    assert_eq!(err["exit_code"], 2);

    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"t": 2, "colour": "red"}"#).unwrap();
    let o = cfkit(&["moments", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["kind"], "ConfigError");

    assert_eq!(cfkit(&["moments", "--t", "x"]).status.code(), Some(1));
    assert_eq!(cfkit(&["moments", "--t", "2"]).status.code(), Some(1));
    assert_eq!(
        cfkit(&["conjecture-probe", SQUARE, "--t-list", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cfkit(&["--help"]).status.code(), Some(0));

    let o = cfkit(&[
        "weighted-maxdet",
        "--poly",
        "0,1",
        "--generators",
        "1;1,0,-1",
        "--t",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_commands() {
    let v = json_out(&cfkit(&["maxdet", "--poly", "1,0,2,0,1"]));
    let h = &v["result"]["hankel"];
    assert!((num(&h[0][0]) - 9.0 / 8.0).abs() < 1e-8);
    assert!((num(&h[1][1]) - 3.0 / 8.0).abs() < 1e-8);

    let v = json_out(&cfkit(&[
        "weighted-maxdet",
        "--poly",
        "2,1",
        "--generators",
        "1;1,0,-1",
        "--t",
        "1",
    ]));
    assert!(num(&v["result"]["residual"]) <= 1e-7);
    assert_eq!(v["result"]["blocks"].as_array().unwrap().len(), 2);
}

#[test]
fn sweeps_and_probe() {
    let (meta, rows) = csv_out(&cfkit(&[
        "decay-sweep",
        SQUARE,
        "--x",
        "0",
        "--y",
        "1.5",
        "--t-list",
        "2..8",
    ]));
    assert_eq!(rows.len(), 8);
    let vals: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(num(&meta["slope"]) < 0.0);

    let (_, rows) = csv_out(&cfkit(&[
        "asymptotic-sweep",
        "--box=-1:1",
        "--x",
        "0",
        "--t-list",
        "100",
    ]));
    let scaled: f64 = rows[1][2].parse().unwrap();
    assert!((scaled / std::f64::consts::FRAC_PI_2 - 1.0).abs() < 0.05);

    let (_, rows) = csv_out(&cfkit(&[
        "asymptotic-sweep",
        SQUARE,
        "--x",
        "0",
        "--y",
        "0",
        "--t-list",
        "2,4",
    ]));
    assert_eq!(rows.len(), 3);

    let a = cfkit(&["conjecture-probe", SQUARE, "--x", "0", "--t-list", "1..5"]);
    let b = cfkit(&["conjecture-probe", SQUARE, "--x", "0", "--t-list", "1..5"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json_out(&a);
    assert_eq!(v["result"]["distances"].as_array().unwrap().len(), 4);
}

#[test]
fn tables_and_moments() {
    let (meta, rows) = csv_out(&cfkit(&["moments", SQUARE, "--t", "1"]));
    assert_eq!(rows[0], ["monomial", "degree", "value"]);
    assert_eq!(rows[1], ["1", "0", "1.0"]);
    assert_eq!(rows.len(), 1 + 6);
    assert_eq!(meta["degree"], 2);

    let v = json_out(&cfkit(&["orthonormal", SQUARE, "--t", "3"]));
    assert!(num(&v["result"]["max_table_difference"]) <= 1e-8);
    assert!(num(&v["result"]["orthonormality_residual"]) <= 1e-8);
    assert_eq!(v["result"]["labels"][3], "x^3");
    assert_eq!(v["result"]["labels"][4], "y");

    let pts = scratch("cloud.csv");
    let body: String = (0..40)
        .map(|i| {
            let a = i as f64 * 0.37;
            format!("{},{},{}\n", a.sin(), a.cos() * 0.5, (2.0 * a).sin())
        })
        .collect();
    std::fs::write(&pts, body).unwrap();
    let v = json_out(&cfkit(&[
        "disintegrate",
        "--samples",
        pts.to_str().unwrap(),
        "--t",
        "1",
        "--conditioned",
        "2",
        "--x",
        "0.1",
    ]));
    assert_eq!(v["result"][0]["mode"], "coefficients only");
}
