use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use comb_thermo_core::bands::CombSpec;
use comb_thermo_core::oracle::box_spectrum;
use comb_thermo_core::scattering::DeltaPrimeDefect;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn call(&self, sub: &str, config: &Path, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_comb-thermo"))
            .arg(sub)
            .arg("--config")
            .arg(config)
            .args(extra)
            .env_remove("COMB_THERMO_WORKERS")
            .output()
            .unwrap()
    }

    /// Runs `sub` on `toml` and returns stdout rows split on commas, header dropped.
    fn rows(&self, sub: &str, toml: &str, extra: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
        let cfg = self.write("run.toml", toml);
        let out = self.call(sub, &cfg, extra);
        assert!(out.status.success(), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
        (header, rows)
    }
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn delta_prime(w0: f64, w1: f64, grid: &str) -> String {
    format!("[potential]\nkind = \"delta_prime\"\nw0 = {w0:?}\nw1 = {w1:?}\n\n[lattice]\na = 1.0\n\n[grid]\n{grid}\n")
}

fn poschl_teller(eps: f64, grid: &str) -> String {
    format!("[potential]\nkind = \"poschl_teller\"\nepsilon = {eps:?}\n\n[lattice]\na = 1.0\n\n[grid]\n{grid}\n")
}

#[test]
fn free_comb_bands_are_contiguous() {
    let run = Run::new();
    let (header, rows) = run.rows("bands", &delta_prime(0.0, 0.0, "omega_max = 30.0"), &[]);
    assert_eq!(header, ["n", "omega_min", "omega_max"]);
    assert!(rows.len() >= 9);
    for w in rows.windows(2) {
        assert!((num(&w[1][1]) - num(&w[0][2])).abs() < 1e-10);
    }
}

#[test]
fn kronig_penney_bands_match_box_roots() {
    let run = Run::new();
    let (_, rows) = run.rows("bands", &delta_prime(8.0, 0.0, "omega_max = 20.0"), &[]);
    let comb = CombSpec::new(DeltaPrimeDefect::new(8.0, 0.0).unwrap(), 1.0).unwrap();
    let spec = box_spectrum(&comb, 512, 20.0).unwrap();
    for (n, row) in rows.iter().enumerate() {
        let (lo, hi) = (num(&row[1]), num(&row[2]));
        if hi >= 20.0 {
            break;
        }
        let roots: Vec<f64> = spec.roots.iter().map(|r| r[n]).collect();
        let rmin = roots.iter().copied().fold(f64::INFINITY, f64::min);
        let rmax = roots.iter().copied().fold(0.0, f64::max);
        assert!(lo <= rmin && rmax <= hi, "band {n}");
        assert!((rmin - lo) < 1e-4 * hi && (hi - rmax) < 1e-4 * hi, "band {n}");
    }
}

#[test]
fn wide_defect_is_a_config_error() {
    let run = Run::new();
    let cfg = run.write("bad.toml", &poschl_teller(1.5, "omega_max = 10.0"));
    let out = run.call("bands", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon <= a"));
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let run = Run::new();
    let cfg = run.write("bad.toml", &delta_prime(3.0, 2.0, "omega_max = 10.0\nspeed = 1"));
    assert_eq!(run.call("bands", &cfg, &[]).status.code(), Some(2));
    let missing = run.dir.path().join("absent.toml");
    assert_eq!(run.call("bands", &missing, &[]).status.code(), Some(2));
}

#[test]
fn dos_reports_gaps_and_free_value() {
    let run = Run::new();
    let grid = "frequencies = { start = 0.05, stop = 6.0, step = 0.05 }";
    let (header, rows) = run.rows("dos", &delta_prime(0.0, 0.0, grid), &[]);
    assert_eq!(header, ["omega", "theta", "dos"]);
    for r in &rows {
        assert!((num(&r[2]) - 1.0 / std::f64::consts::PI).abs() < 1e-12, "{r:?}");
    }
    let (_, rows) = run.rows("dos", &delta_prime(8.0, 0.0, grid), &[]);
    assert!(rows.iter().any(|r| r[1].is_empty() && num(&r[2]) == 0.0));
}

#[test]
fn free_energy_is_negative_on_figure_range() {
    let run = Run::new();
    let grid = "t_range = { start = 0.1, stop = 5.0, step = 0.1 }";
    let (header, rows) = run.rows("free-energy", &delta_prime(3.0, 2.0, grid), &[]);
    assert_eq!(header, ["T", "delta_f", "err", "method"]);
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| num(&r[1]) < 0.0 && r[3] == "rotated"));
}

#[test]
fn all_methods_agree() {
    let run = Run::new();
    let toml = delta_prime(3.0, 2.0, "temperatures = [0.5, 1.0, 5.0]") + "[method]\nname = \"all\"\n";
    let (header, rows) = run.rows("free-energy", &toml, &[]);
    assert_eq!(header.len(), 8);
    for r in &rows {
        assert!(num(&r[7]) < 1e-5, "{r:?}");
    }
}

#[test]
fn single_temperature_gives_single_row() {
    let run = Run::new();
    let (_, rows) = run.rows("free-energy", &delta_prime(3.0, 2.0, "temperatures = [1.0]"), &[]);
    assert_eq!(rows.len(), 1);
}

#[test]
fn comb_entropy_is_positive_with_consistent_fd() {
    let run = Run::new();
    for (w0, w1) in [(0.1, 5.0), (8.0, 0.0), (3.0, 2.0)] {
        let toml = delta_prime(w0, w1, "temperatures = [0.2, 1.0, 3.0, 5.0]");
        let (header, rows) = run.rows("entropy", &toml, &["--check-fd"]);
        assert_eq!(header, ["T", "entropy", "err", "entropy_fd", "fd_rel_diff"]);
        for r in &rows {
            assert!(num(&r[1]) > 0.0, "{w0} {w1} {r:?}");
            let (s, fd) = (num(&r[1]), num(&r[3]));
            assert!((s - fd).abs() <= (1e-5 * s.abs()).max(1e-8), "{w0} {w1} {r:?}");
        }
    }
}

#[test]
fn poschl_teller_entropy_runs_with_fd_check() {
    let run = Run::new();
    let toml = poschl_teller(0.5, "temperatures = [0.25, 0.5, 1.0]");
    let (_, rows) = run.rows("entropy", &toml, &["--check-fd"]);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let (s, fd) = (num(&r[1]), num(&r[3]));
        assert!((s - fd).abs() <= (1e-5 * s.abs()).max(1e-8), "{r:?}");
    }
}

#[test]
fn single_defect_entropy_is_positive() {
    let run = Run::new();
    for (w0, w1) in [(0.01, 2.0), (3.0, 2.0), (2.0, 0.0)] {
        let toml = delta_prime(w0, w1, "temperatures = [0.1, 1.0, 5.0]");
        let (header, rows) = run.rows("single", &toml, &[]);
        assert_eq!(header, ["T", "delta_f", "err", "entropy", "entropy_err"]);
        assert!(rows.iter().all(|r| num(&r[1]) < 0.0 && num(&r[3]) > 0.0), "{w0} {w1}");
    }
}

#[test]
fn single_poschl_teller_has_a_bound_state() {
    let run = Run::new();
    let cfg = run.write("pt.toml", &poschl_teller(0.5, "temperatures = [1.0]"));
    let out = run.call("single", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bound state"));
}

fn sweep_toml(quantity: &str, t: f64, omega: (f64, f64, usize), gamma: (f64, f64, usize)) -> String {
    format!(
        "[lattice]\na = 1.0\n\n[grid]\ntemperatures = [{t:?}]\n\n[sweep]\nquantity = \"{quantity}\"\n\
         omega = {{ start = {:?}, stop = {:?}, points = {} }}\n\
         gamma = {{ start = {:?}, stop = {:?}, points = {} }}\n",
        omega.0, omega.1, omega.2, gamma.0, gamma.1, gamma.2
    )
}

#[test]
fn sweep_free_energy_negative_and_entropy_positive() {
    let run = Run::new();
    let (header, rows) =
        run.rows("sweep", &sweep_toml("free_energy", 5.0, (-0.9, 0.9, 4), (0.2, 8.0, 4)), &[]);
    assert_eq!(header, ["Omega", "gamma", "T", "value", "err", "status"]);
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r[5] == "ok" && num(&r[3]) < 0.0));
    let (_, rows) =
        run.rows("sweep", &sweep_toml("entropy", 5.0, (-0.9, 0.9, 4), (0.2, 8.0, 3)), &[]);
    assert!(rows.iter().all(|r| r[5] == "ok" && num(&r[3]) > 0.0));
}

#[test]
fn sweep_is_row_major_and_marks_infeasible_cells() {
    let run = Run::new();
    let (_, rows) =
        run.rows("sweep", &sweep_toml("free_energy", 1.0, (0.0, 1.5, 4), (1.0, 2.0, 2)), &[]);
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[1]))).collect();
    let expected = [0.0, 0.5, 1.0, 1.5].iter().flat_map(|&o| [(o, 1.0), (o, 2.0)]);
    assert_eq!(keys, expected.collect::<Vec<_>>());
    for r in &rows {
        let feasible = num(&r[0]) < 1.0 && num(&r[0]) != 0.0;
        assert_eq!(r[5], if feasible { "ok" } else { "infeasible" });
        assert_eq!(r[3].is_empty(), !feasible);
    }
}

#[test]
fn one_cell_sweep_equals_free_energy_point() {
    let run = Run::new();
    let (_, cell) =
        run.rows("sweep", &sweep_toml("free_energy", 1.0, (0.6, 0.6, 1), (0.6, 0.6, 1)), &[]);
    // Omega = 0.6 and gamma = 0.6 is w0 = 3, w1 = 2
    let (_, point) = run.rows("free-energy", &delta_prime(3.0, 2.0, "temperatures = [1.0]"), &[]);
    assert!((num(&cell[0][3]) - num(&point[0][1])).abs() < 1e-12 * num(&point[0][1]).abs());
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let run = Run::new();
    let cfg = run.write("s.toml", &sweep_toml("free_energy", 0.5, (-0.9, 0.9, 4), (0.2, 8.0, 4)));
    let one = run.call("sweep", &cfg, &["--workers", "1"]);
    let four = run.call("sweep", &cfg, &["--workers", "4"]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_comb-thermo"))
        .args(["sweep", "--config"])
        .arg(&cfg)
        .env("COMB_THERMO_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(env.stdout, one.stdout);
}

#[test]
fn output_file_and_json_format() {
    let run = Run::new();
    let cfg = run.write("f.toml", &delta_prime(3.0, 2.0, "temperatures = [0.5, 1.0]"));
    let path = run.dir.path().join("out.json");
    let out = run.call("free-energy", &cfg, &["--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["columns"][1], "delta_f");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(v["rows"][0][1].as_f64().unwrap() < 0.0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = Run::new();
    let toml = delta_prime(3.0, 2.0, "temperatures = [0.5, 1.0, 2.0]") + "[method]\nname = \"all\"\n";
    let cfg = run.write("d.toml", &toml);
    let a = run.call("free-energy", &cfg, &[]);
    let b = run.call("free-energy", &cfg, &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_passes_on_delta_prime_comb() {
    let run = Run::new();
    let cfg = run.write("v.toml", &delta_prime(3.0, 2.0, ""));
    let out = run.call("validate", &cfg, &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("pass")), "{text}");
    assert!(text.contains("free_comb_subtracted_zero,pass"));
}

#[test]
fn validate_reports_unreachable_tolerance() {
    let run = Run::new();
    let toml = delta_prime(3.0, 2.0, "") + "[tolerances]\nrel_tol = 1e-16\nabs_tol = 1e-18\n";
    let cfg = run.write("v.toml", &toml);
    let out = run.call("validate", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    let dos = text.lines().find(|l| l.starts_with("dos_normalization")).unwrap();
    assert!(dos.contains("FAIL") && dos.contains("panel"), "{dos}");
    assert!(text.lines().any(|l| l.starts_with("unitarity,pass")));
}
