use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use protectosim::curves::CurveSet;
use protectosim::ensemble::Histogram;
use protectosim::sweep::SweepTable;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_protectosim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn protectosim")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn write_conf(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn figures_match_golden_files_and_repeat_byte_for_byte() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for id in ["fig1", "fig2", "fig3", "fig4"] {
        for dir in [&a, &b] {
            let o = run(&["figure", id, "--out", s(dir.path())]);
            assert_eq!(code(&o), 0, "{id}: {}", stderr(&o));
        }
    }
    let mut n = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let first = std::fs::read(a.path().join(&name)).unwrap();
        let second = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(first, second, "{name:?} differs between runs");
        let stored = std::fs::read(golden().join(&name)).unwrap();
        assert_eq!(first, stored, "{name:?} differs from golden file");
        n += 1;
    }
    assert_eq!(n, 5);
}

#[test]
fn figure_csv_round_trips() {
    let dir = TempDir::new().unwrap();
    let o = run(&["figure", "fig3", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let curves = CurveSet::read_csv(text.as_bytes()).unwrap();
    assert_eq!(curves.to_csv_string().unwrap(), text);
    assert!(curves.series("initial").is_some());
}

#[test]
fn figure_svg_and_overrides() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "figure",
        "fig2",
        "--out",
        s(dir.path()),
        "--format",
        "both",
        "--set",
        "sigma_p=0.05",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = std::fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(dir.path().join("fig2.csv").exists());
}

#[test]
fn figure_usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = run(&["figure", "fig9", "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let o = run(&["figure", "fig1", "--out", s(dir.path()), "--set", "bogus=1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn validate_passes_and_rejects_large_n() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "validate",
        "--n",
        "10",
        "--sd",
        "0.1,0.35",
        "--seed",
        "3",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let o = run(&["validate", "--n", "20", "--sd", "0.1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("20"));
}

#[test]
fn ensemble_writes_histogram_that_round_trips() {
    let dir = TempDir::new().unwrap();
    let conf = write_conf(
        dir.path(),
        "e.conf",
        "runs = 20000\nseed = 5\ns_d = 0.2\ngamma_deg = 45\nbins = 60\n",
    );
    let out = dir.path().join("out");
    let o = run(&["ensemble", s(&conf), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let bytes = std::fs::read(out.join("ensemble_histogram.csv")).unwrap();
    let h = Histogram::read_csv(bytes.as_slice()).unwrap();
    assert_eq!(h.total(), 20_000);
    assert_eq!(h.counts.len(), 60);
    let mut again = Vec::new();
    h.write_csv(&mut again).unwrap();
    assert_eq!(again, bytes);
    assert!(out.join("ensemble_summary.txt").exists());

    // same seed, same bytes
    let out2 = dir.path().join("out2");
    assert_eq!(code(&run(&["ensemble", s(&conf), "--out", s(&out2)])), 0);
    assert_eq!(
        std::fs::read(out2.join("ensemble_histogram.csv")).unwrap(),
        bytes
    );
}

#[test]
fn ensemble_single_run_prints_notice() {
    let dir = TempDir::new().unwrap();
    let conf = write_conf(dir.path(), "e.conf", "runs = 1\nseed = 1\n");
    let o = run(&["ensemble", s(&conf), "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("notice"));
}

#[test]
fn malformed_configs_exit_2_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("runs = lots\n", "runs"),
        ("seed = 1\nsigma_p = -1\n", "sigma_p"),
        ("seed = 1\nwhatever = 3\n", "whatever"),
        ("seed = 1\nseed = 2\n", "seed"),
    ];
    for (body, key) in cases {
        let conf = write_conf(dir.path(), "bad.conf", body);
        let o = run(&["ensemble", s(&conf), "--out", s(dir.path())]);
        assert_eq!(code(&o), 2, "{body:?}");
        assert!(stderr(&o).contains(key), "{body:?}: {}", stderr(&o));
    }
    let o = run(&["ensemble", s(&dir.path().join("missing.conf"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn plan_reports_potassium_numbers() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "plan",
        s(&configs().join("potassium.conf")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("plan.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), row.len());
    let col = |name: &str| -> f64 {
        row[header.iter().position(|h| *h == name).unwrap()]
            .parse()
            .unwrap()
    };
    assert!((415.0..=430.0).contains(&col("speed_m_per_s")));
    let s0 = col("displacement_0_m") * 1e3;
    assert!((0.110..=0.118).contains(&s0), "{s0}");
    assert!((col("xi") - 0.4).abs() < 1e-12);
}

#[test]
fn plan_missing_b0_exits_2() {
    let dir = TempDir::new().unwrap();
    let conf = write_conf(
        dir.path(),
        "p.conf",
        "mu = 9.3e-24\ngrad_B = 40\nd = 0.1\nT_oven = 420\nmass_or_species = K-39\ngamma_deg = 45\n",
    );
    let o = run(&["plan", s(&conf), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("B0"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_table_that_round_trips() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "sweep",
        s(&configs().join("sweep_pplus.conf")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bytes = std::fs::read(dir.path().join("sweep_p_plus.csv")).unwrap();
    let t = SweepTable::read_csv(bytes.as_slice()).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!((t.rows[0].1 - 0.97725).abs() < 1e-5);
    let mut again = Vec::new();
    t.write_csv(&mut again).unwrap();
    assert_eq!(again, bytes);
}
