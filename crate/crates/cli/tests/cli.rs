use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mosaic_wiretap::format::write_channel;
use mosaic_wiretap::quantum::DensityOperator;
use mosaic_wiretap::wiretap::CqChannel;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mosaic-wiretap"));
    c.env_remove("MOSAIC_WIRETAP_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn write_ch(dir: &Path, name: &str, ch: &CqChannel<f64>) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, write_channel(ch)).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.txt");
    let o = run(&["mosaic", "build", "--q", "2", "--t", "2", "--ell", "1", "--out", s(&m)]);
    assert_eq!(code(&o), 0);
    let o = run(&["mosaic", "verify", "--in", s(&m)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["verdict"], "mosaic of (4,2,1) BIBDs");
    assert_eq!(v["result"]["members"].as_array().unwrap().len(), 2);
}

#[test]
fn flipped_bit_fails_verification() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.txt");
    assert_eq!(
        code(&run(&[
            "mosaic",
            "build",
            "--q",
            "2",
            "--t",
            "3",
            "--ell",
            "1",
            "--out",
            s(&m)
        ])),
        0
    );
    let text = fs::read_to_string(&m).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // first data row of the first member
    let row = &mut lines[2];
    let flipped: String = row
        .chars()
        .enumerate()
        .map(|(i, c)| {
            if i == 0 {
                if c == '1' {
                    '0'
                } else {
                    '1'
                }
            } else {
                c
            }
        })
        .collect();
    *row = flipped;
    fs::write(&m, lines.join("\n") + "\n").unwrap();
    let o = run(&["mosaic", "verify", "--in", s(&m)]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["result"]["verdict"], "not a mosaic");
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("never.txt");
    let o = run(&[
        "mosaic",
        "build",
        "--q",
        "2",
        "--t",
        "2",
        "--ell",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of range"));
    assert!(!out.exists());
    assert_eq!(code(&run(&["mosaic", "build", "--q", "2", "--t", "2"])), 1);
    assert_eq!(
        code(&run(&["mosaic", "build", "--q", "4", "--t", "2", "--ell", "1"])),
        1
    );
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["mosaic", "verify", "--in", "/nonexistent/file"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn constant_channel_has_zero_margin_and_leakage() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ch = CqChannel::constant(4, DensityOperator::<f64>::random(3, &mut rng));
    let p = write_ch(dir.path(), "const.json", &ch);
    let field = ["--q", "2", "--t", "2", "--ell", "1", "--channel", s(&p)];

    let o = run(&[&["bound"][..], &field].concat());
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["result"]["margin"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["result"]["bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = run(&[&["leakage"][..], &field, &["--search"]].concat());
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let r = &v["result"]["reports"][0];
    assert!(r["avg_leakage"].as_f64().unwrap().abs() < 1e-12);
    assert!(r["margin"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["result"]["search"]["value"].as_f64().unwrap().abs() < 1e-12);

    let o = run(&[&["corollary3"][..], &field].concat());
    assert_eq!(code(&o), 0);
    assert!(json(&o)["result"]["lhs"].as_f64().unwrap() < 1e-12);
}

#[test]
fn point_distribution_leaks_nothing() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ch = CqChannel::<f64>::random(8, 2, &mut rng);
    let p = write_ch(dir.path(), "v.json", &ch);
    for spec in ["point:1", "point:000"] {
        let o = run(&[
            "leakage",
            "--q",
            "2",
            "--t",
            "3",
            "--ell",
            "1",
            "--channel",
            s(&p),
            "--dist",
            spec,
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert!(v["result"]["reports"][0]["avg_leakage"].as_f64().unwrap().abs() < 1e-12);
    }
    let o = run(&[
        "leakage",
        "--q",
        "2",
        "--t",
        "3",
        "--ell",
        "1",
        "--channel",
        s(&p),
        "--dist",
        "point:zz",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn random_distribution_sweep_has_no_violations() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ch = CqChannel::<f64>::random(9, 3, &mut rng);
    let p = write_ch(dir.path(), "v.json", &ch);
    let csv = dir.path().join("rows.csv");
    let o = run(&[
        "leakage",
        "--q",
        "3",
        "--t",
        "2",
        "--ell",
        "1",
        "--channel",
        s(&p),
        "--dist",
        "random:7:100",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 100);
    assert!(v["result"]["min_margin"].as_f64().unwrap() >= -1e-7);
    let rows = fs::read_to_string(&csv).unwrap();
    // 100 distributions x 24 seeds x 3 colors
    assert_eq!(rows.lines().count(), 1 + 100 * 24 * 3);
    assert!(rows.lines().nth(1).unwrap().starts_with("0,0,0,"));
    assert!(rows.lines().nth(2).unwrap().starts_with("0,0,1,"));
    assert!(rows.lines().nth(4).unwrap().starts_with("0,1,0,"));
}

#[test]
fn mismatched_channel_is_rejected() {
    let dir = TempDir::new().unwrap();
    let ch = CqChannel::constant(3, DensityOperator::<f64>::maximally_mixed(2));
    let p = write_ch(dir.path(), "v.json", &ch);
    let o = run(&["bound", "--q", "2", "--t", "2", "--ell", "1", "--channel", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("3 inputs"));
}

fn helstrom_error(overlap_sq: f64) -> f64 {
    (1.0 - (1.0 - overlap_sq).sqrt()) / 2.0
}

#[test]
fn simulate_error_examples() {
    let dir = TempDir::new().unwrap();
    let noiseless = CqChannel::from_states((0..4).map(|i| DensityOperator::<f64>::basis(4, i)).collect()).unwrap();
    let p = write_ch(dir.path(), "w.json", &noiseless);
    let o = run(&["simulate", "--q", "2", "--t", "2", "--ell", "1", "--channel", s(&p)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["result"]["public_avg_error"].as_f64().unwrap(), 0.0);
    for seed in v["result"]["per_seed"].as_array().unwrap() {
        assert_eq!(seed["avg_error"].as_f64().unwrap(), 0.0);
        assert_eq!(seed["max_error"].as_f64().unwrap(), 0.0);
    }
    assert!(v["result"]["composite"]["avg_error"].as_f64().unwrap() < 1e-12);

    // two nonorthogonal pure states on a 2-point Latin-square mosaic
    let theta: f64 = 0.7;
    let psi0 = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
    let psi1 = [Complex::new(theta.cos(), 0.0), Complex::new(0.0, theta.sin())];
    let pair = CqChannel::from_states(vec![DensityOperator::pure(&psi0), DensityOperator::pure(&psi1)]).unwrap();
    let p = write_ch(dir.path(), "pair.json", &pair);
    let m = dir.path().join("latin.txt");
    fs::write(&m, "color a\n2 2\n10\n01\ncolor b\n2 2\n01\n10\n").unwrap();
    let csv = dir.path().join("seeds.csv");
    let o = run(&[
        "simulate",
        "--mosaic",
        s(&m),
        "--channel",
        s(&p),
        "--N",
        "2",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let expected = helstrom_error(theta.cos().powi(2));
    let public = v["result"]["public_avg_error"].as_f64().unwrap();
    assert!((public - expected).abs() < 1e-9, "{public} vs {expected}");
    let comp = &v["result"]["composite"];
    assert!(comp["avg_error"].as_f64().unwrap() <= comp["union_bound"].as_f64().unwrap() + 1e-9);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn rates_examples() {
    let o = run(&["rates", "--q", "2", "--t", "2", "--ell", "1", "--n", "1", "--N", "4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["rate_loss"].as_f64().unwrap(), 1.0);
    assert_eq!(v["result"]["messages"].as_u64().unwrap(), 2);
    assert_eq!(v["result"]["message_fraction"].as_f64().unwrap(), 0.5);
    let o = run(&[
        "rates",
        "--q",
        "2",
        "--t",
        "2",
        "--ell",
        "1",
        "--pe",
        "1e-4",
        "--eps-leak",
        "1e-4",
    ]);
    assert_eq!(json(&o)["result"]["blocks"].as_u64().unwrap(), 100);
    assert_eq!(code(&run(&["rates", "--q", "2", "--t", "2", "--ell", "1"])), 1);
    assert_eq!(
        code(&run(&[
            "rates",
            "--q",
            "2",
            "--t",
            "2",
            "--ell",
            "1",
            "--pe",
            "1.5",
            "--eps-leak",
            "0.1"
        ])),
        1
    );
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = CqChannel::<f64>::random(8, 2, &mut rng);
    let p = write_ch(dir.path(), "v.json", &ch);
    let args = [
        "leakage",
        "--q",
        "2",
        "--t",
        "3",
        "--ell",
        "2",
        "--channel",
        s(&p),
        "--dist",
        "random:1:5",
        "--search",
        "--rng-seed",
        "9",
    ];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "2"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let oa = run(&["check", "--quick", "--single", "--rng-seed", "5", "--out", s(&a)]);
    let ob = run(&["check", "--quick", "--single", "--rng-seed", "5", "--out", s(&b)]);
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(code(&ob), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let stderr = String::from_utf8_lossy(&oa.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS [")).count(), 9);
}
