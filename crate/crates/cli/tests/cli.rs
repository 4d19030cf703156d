use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cavleak(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavleak"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn cavleak")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = cavleak(out, args);
    assert!(
        o.status.success(),
        "cavleak {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(str::to_owned).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn modes_default_geometry() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["modes"]);
    let r = rows(&dir.path().join("modes.csv"));
    assert_eq!(r.len(), 10);
    assert_eq!(&r[0][..3], ["1", "0", "1"]);
    assert!((num(&r[0][3]) - 2.944e9).abs() < 0.5e6);
    let f: Vec<f64> = r.iter().map(|row| num(&row[3])).collect();
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn modes_permittivity_scaling() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["modes", "--count", "4"]);
    let vac = rows(&dir.path().join("modes.csv"));
    ok(dir.path(), &["modes", "--count", "4", "--eps-r", "11.45"]);
    let si = rows(&dir.path().join("modes.csv"));
    for (a, b) in vac.iter().zip(&si) {
        let ratio = num(&b[3]) / num(&a[3]);
        assert!((ratio - 1.0 / 11.45f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn modes_single_row() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["modes", "--count", "1"]);
    assert_eq!(rows(&dir.path().join("modes.csv")).len(), 1);
}

#[test]
fn fence_first_iteration() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["fence", "--iterations", "1"]);
    assert_eq!(
        header(&dir.path().join("fence_layout.csv")),
        ["x_m", "z_m", "diameter_m"]
    );
    assert_eq!(rows(&dir.path().join("fence_layout.csv")).len(), 5);
    let s = rows(&dir.path().join("fence.csv"));
    assert_eq!(s[0][1], "5");
    assert_eq!(num(&s[0][2]), 2.0);
}

#[test]
fn fence_zero_iterations_is_empty() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["fence", "--iterations", "0"]);
    assert!(rows(&dir.path().join("fence_layout.csv")).is_empty());
    let s = rows(&dir.path().join("fence.csv"));
    assert_eq!(num(&s[0][2]), 1.0);
}

#[test]
fn fence_solve_adds_numerical_column() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "fence",
            "--iterations",
            "1",
            "--solve",
            "--resolution",
            "65",
        ],
    );
    let path = dir.path().join("fence.csv");
    assert_eq!(header(&path).last().unwrap(), "f_c_numerical_Hz");
    let s = rows(&path);
    let (closed, solved) = (num(&s[0][3]), num(&s[0][4]));
    // five point wires raise the mode above the empty box but not past the
    // closed-form fenced value
    assert!(solved > 2.944e9 * 1.05, "{solved}");
    assert!(solved < closed * 1.05, "{solved} vs {closed}");
}

#[test]
fn fence_overlap_is_config_error() {
    let dir = TempDir::new().unwrap();
    let o = cavleak(
        dir.path(),
        &["fence", "--iterations", "2", "--wire-um", "20000"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pin_zero_budget() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["pin", "--max-wires", "0", "--resolution", "65"],
    );
    let r = rows(&dir.path().join("pinning.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(&r[0][..3], ["0", "0", "0"]);
    assert!(rows(&dir.path().join("pinning_layout.csv")).is_empty());
}

#[test]
fn pin_first_wire_at_center() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["pin", "--max-wires", "1", "--resolution", "65", "--fields"],
    );
    let r = rows(&dir.path().join("pinning.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(&r[1][..3], ["1", "1", "1"]);
    let layout = rows(&dir.path().join("pinning_layout.csv"));
    assert_eq!(layout.len(), 1);
    assert!((num(&layout[0][0]) - 0.036).abs() < 1e-9);
    assert!((num(&layout[0][1]) - 0.036).abs() < 1e-9);
    for stem in ["field_d00", "field_d01"] {
        let pgm = fs::read(dir.path().join(format!("{stem}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n65 65\n255\n"));
        assert!(dir.path().join(format!("{stem}.csv")).exists());
    }
}

#[test]
fn pin_seed_layout_counts_as_iteration_zero() {
    let dir = TempDir::new().unwrap();
    let seed = write(
        &dir,
        "seed.csv",
        "x_m,z_m,diameter_m\n0.018,0.018,5e-4\n0.054,0.054,5e-4\n",
    );
    ok(
        dir.path(),
        &[
            "pin",
            "--max-wires",
            "3",
            "--resolution",
            "65",
            "--layout",
            seed.to_str().unwrap(),
        ],
    );
    let r = rows(&dir.path().join("pinning.csv"));
    assert_eq!(&r[0][..3], ["0", "2", "2"]);
    assert_eq!(rows(&dir.path().join("pinning_layout.csv")).len(), 3);
}

#[test]
fn pin_target_terminates_near_reference_count() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(
        dir.path(),
        &["pin", "--target-ghz", "12.3", "--wire-um", "500"],
    );
    let r = rows(&dir.path().join("pinning.csv"));
    let n = num(&r.last().unwrap()[2]);
    assert!((n - 89.0).abs() <= 0.3 * 89.0, "N = {n}\n{stdout}");
}

#[test]
fn leakage_defaults() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(dir.path(), &["leakage", "--plot"]);
    let path = dir.path().join("leakage.csv");
    assert_eq!(
        header(&path),
        [
            "N",
            "f_tilde_c",
            "delta_Hz",
            "g_Hz",
            "p_undamped",
            "p_damped"
        ]
    );
    let r = rows(&path);
    assert_eq!(r.len(), 34);
    let resonant = &r[5];
    assert_eq!(resonant[0], "5");
    assert_eq!(num(&resonant[2]), 0.0);
    // the 250 ns window holds under three vacuum Rabi periods at N = 5
    assert!((num(&resonant[4]) - 0.5).abs() < 0.05);
    assert!(stdout.contains("threshold crossing"));
    let svg = fs::read_to_string(dir.path().join("leakage.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("undamped") && svg.contains("damped"));
}

#[test]
fn leakage_without_damping_has_single_curve() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["leakage", "--no-damping", "--plot", "--n-max", "8"],
    );
    let r = rows(&dir.path().join("leakage.csv"));
    assert_eq!(r.len(), 9);
    assert!(r.iter().all(|row| row[5].is_empty()));
    let svg = fs::read_to_string(dir.path().join("leakage.svg")).unwrap();
    assert!(!svg.contains("T1, T2 damped"));
}

#[test]
fn leakage_crossing_is_reported() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(dir.path(), &["leakage", "--no-damping"]);
    let line = stdout
        .lines()
        .find(|l| l.starts_with("threshold crossing"))
        .unwrap();
    let g0 = line
        .split('=')
        .next_back()
        .unwrap()
        .trim()
        .trim_end_matches("g0")
        .trim();
    let ratio: f64 = g0.parse().unwrap();
    assert!(ratio > 1.0 && ratio < 100.0, "{line}");
}

fn anticrossing_csv(g: f64, f_c: f64, noise: &[f64]) -> String {
    let mut s = String::from("f_R_Hz,lower_Hz,upper_Hz\n");
    for (i, e) in noise.iter().enumerate() {
        let f_r = f_c - 400e6 + 100e6 * i as f64;
        let d = f_r - f_c;
        let half = (g * g + d * d).sqrt() / 2.0;
        let mid = (f_r + f_c) / 2.0;
        s.push_str(&format!("{f_r},{},{}\n", mid - half + e, mid + half - e));
    }
    s
}

fn fitted_g(report: &str) -> (f64, f64) {
    let line = report.lines().find(|l| l.starts_with("g_Hz")).unwrap();
    let mut it = line.split_whitespace();
    let g = it.nth(2).unwrap().parse().unwrap();
    let ci = it.nth(1).unwrap().parse().unwrap();
    (g, ci)
}

#[test]
fn fit_roundtrip() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "ac.csv", &anticrossing_csv(120e6, 9e9, &[0.0; 9]));
    let stdout = ok(dir.path(), &["fit", data.to_str().unwrap()]);
    let (g, _) = fitted_g(&stdout);
    assert!((g - 120e6).abs() < 1e-3 * 120e6, "{stdout}");
    let saved = fs::read_to_string(dir.path().join("fit_report.txt")).unwrap();
    assert!(saved.contains("g_Hz"));
}

#[test]
fn fit_noisy_has_nonzero_interval() {
    let dir = TempDir::new().unwrap();
    let noise = [
        0.8e6, -1.1e6, 0.3e6, 1.4e6, -0.6e6, -0.2e6, 0.9e6, -1.3e6, 0.5e6,
    ];
    let data = write(&dir, "ac.csv", &anticrossing_csv(120e6, 9e9, &noise));
    let (g, ci) = fitted_g(&ok(dir.path(), &["fit", data.to_str().unwrap()]));
    assert!(ci > 0.0);
    assert!((g - 120e6).abs() < 0.02 * 120e6);
}

#[test]
fn fit_three_points_is_insufficient() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "ac.csv", &anticrossing_csv(120e6, 9e9, &[0.0; 3]));
    let o = cavleak(dir.path(), &["fit", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient data"));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let unknown = write(&dir, "a.toml", "[geometry]\nlength_m = 0.07\n");
    let o = cavleak(
        dir.path(),
        &["--config", unknown.to_str().unwrap(), "modes"],
    );
    assert_eq!(o.status.code(), Some(2));
    let negative = write(&dir, "b.toml", "[geometry]\nheight_mm = -3.0\n");
    let o = cavleak(
        dir.path(),
        &["--config", negative.to_str().unwrap(), "modes"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = cavleak(
        dir.path(),
        &[
            "--config",
            dir.path().join("missing.toml").to_str().unwrap(),
            "modes",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = cavleak(dir.path(), &["pin", "--theta", "1.5", "--max-wires", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eigensolver_cap_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "[grid]\nresolution = 65\nmax_iterations = 1\n",
    );
    let o = cavleak(
        dir.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "fence",
            "--iterations",
            "1",
            "--solve",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn config_file_values_and_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "[modes]\ncount = 3\n[geometry]\neps_r = 4.0\n",
    );
    ok(dir.path(), &["--config", cfg.to_str().unwrap(), "modes"]);
    let r = rows(&dir.path().join("modes.csv"));
    assert_eq!(r.len(), 3);
    assert!((num(&r[0][3]) - 2.94424e9 / 2.0).abs() < 1e5);
    ok(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "modes", "--count", "5"],
    );
    assert_eq!(rows(&dir.path().join("modes.csv")).len(), 5);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "2")] {
        ok(dir.path(), &["--jobs", jobs, "leakage", "--n-max", "12"]);
        ok(
            dir.path(),
            &[
                "pin",
                "--max-wires",
                "6",
                "--resolution",
                "65",
                "--seed",
                "7",
            ],
        );
        ok(dir.path(), &["fence", "--iterations", "2"]);
    }
    for name in [
        "leakage.csv",
        "pinning.csv",
        "pinning_layout.csv",
        "fence_layout.csv",
        "fence.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}
