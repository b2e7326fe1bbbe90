use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_wedge-diffraction");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("wedge-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> i32 {
    Command::new(BIN).arg("--config").arg(config).arg("--out-dir").arg(out).args(extra).output().unwrap().status.code().unwrap()
}

fn write_config(dir: &Path, from: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = fs::read_to_string(configs().join(from)).unwrap();
    for (a, b) in edits {
        assert!(text.contains(a), "{a}");
        text = text.replace(a, b);
    }
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p
}

fn read_table(p: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(p).unwrap().lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn identities_only_passes_and_writes_diagnostics() {
    let d = scratch("ids");
    assert_eq!(run(&configs().join("set2a.toml"), &d, &["--mode", "identities-only"]), 0);
    let diag = fs::read_to_string(d.join("diagnostics.txt")).unwrap();
    let last = diag.lines().last().unwrap();
    assert!(last.starts_with("SUMMARY") && last.ends_with("PASS"), "{last}");
    for l in diag.lines().skip(1) {
        assert_eq!(l.split(" | ").count(), 5, "{l}");
    }
    assert!(d.join("reflections.csv").exists());
}

#[test]
fn validation_errors_exit_2() {
    let d = scratch("bad");
    let c = write_config(&d, "set2a.toml", &[("theta_grid.count = 30", "theta_grid.count = 1")]);
    assert_eq!(run(&c, &d, &[]), 2);
    assert_eq!(run(&configs().join("set2a.toml"), &d, &["--mode", "oracle"]), 2);
    assert_eq!(run(&configs().join("set2a.toml"), &d, &["--mode", "index-only", "--tol-override", "no.such.check=1"]), 2);
    assert_eq!(run(&d.join("missing.toml"), &d, &[]), 2);
}

#[test]
fn failed_check_exits_3_with_diagnostics() {
    let d = scratch("idx");
    assert_eq!(run(&configs().join("set3b.toml"), &d, &["--mode", "index-only"]), 3);
    let diag = fs::read_to_string(d.join("diagnostics.txt")).unwrap();
    assert!(diag.lines().any(|l| l.starts_with("surface.expected_index") && l.ends_with("FAIL")));
    assert_eq!(run(&configs().join("set3b.toml"), &d, &["--mode", "index-only", "--tol-override", "surface.expected_index=1"]), 0);
}

#[test]
fn oracle_run_is_bit_identical() {
    let (a, b) = (scratch("o1"), scratch("o2"));
    assert_eq!(run(&configs().join("normal.toml"), &a, &[]), 0);
    assert_eq!(run(&configs().join("normal.toml"), &b, &[]), 0);
    for f in ["diffraction.csv", "plot.csv", "reflections.csv", "diagnostics.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let main = fs::read_to_string(a.join("diffraction.csv")).unwrap();
    assert_eq!(main.lines().next().unwrap(), "theta,re_D1,im_D1,re_D2,im_D2,flag");
    let plot = fs::read_to_string(a.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().next().unwrap(), "theta,|D1|,argD1,|D2|,argD2");
    assert!(plot.lines().all(|l| l.split(',').count() == 5));
}

#[test]
fn seeds_do_not_change_the_table() {
    let (a, b) = (scratch("s1"), scratch("s2"));
    assert_eq!(run(&configs().join("set2d.toml"), &a, &[]), 0);
    assert_eq!(run(&configs().join("set2d.toml"), &b, &["--seed-sigma0", "0.7,0.45"]), 0);
    let (ta, tb) = (read_table(&a.join("diffraction.csv")), read_table(&b.join("diffraction.csv")));
    let mut worst: f64 = 0.0;
    for (ra, rb) in ta.iter().zip(&tb) {
        let s = ra[1..5].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 1..5 {
            worst = worst.max((ra[k] - rb[k]).abs() / s);
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn zero_field_gives_zero_coefficients() {
    let d = scratch("zero");
    let c = write_config(&d, "set2a.toml", &[("problem.i1.re = 1.0", "problem.i1.re = 0.0"), ("problem.i2.re = 0.3", "problem.i2.re = 0.0")]);
    assert_eq!(run(&c, &d, &[]), 0);
    for row in read_table(&d.join("plot.csv")) {
        assert_eq!(row[1], 0.0);
        assert_eq!(row[3], 0.0);
    }
}

#[test]
fn shadow_boundary_rows_are_flagged() {
    let d = scratch("flag");
    // theta0 = pi/3 sits on the grid
    let c = write_config(
        &d,
        "normal.toml",
        &[
            ("theta_grid.start = 0.05", "theta_grid.start = 0.5235987755982988"),
            ("theta_grid.stop = 1.5", "theta_grid.stop = 1.5707963267948966e0"),
            ("theta_grid.count = 30", "theta_grid.count = 3"),
        ],
    );
    assert_eq!(run(&c, &d, &[]), 2);
    let c = write_config(
        &d,
        "normal.toml",
        &[
            ("theta_grid.start = 0.05", "theta_grid.start = 0.5235987755982988"),
            ("theta_grid.stop = 1.5", "theta_grid.stop = 1.3089969389957472"),
            ("theta_grid.count = 30", "theta_grid.count = 4"),
        ],
    );
    run(&c, &d, &[]);
    let main = fs::read_to_string(d.join("diffraction.csv")).unwrap();
    let flags: Vec<&str> = main.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(flags, ["0", "0", "1", "0"]);
}
