//! Invariant battery behind `comb-thermo validate`.

use std::f64::consts::PI;

use num_complex::Complex64;

use comb_thermo_core::bands::{band_edges, density_of_states, CombSpec};
use comb_thermo_core::numerics::{integrate_adaptive, Interval, QuadratureSpec, Side, Transform};
use comb_thermo_core::oracle::delta_f_bruteforce;
use comb_thermo_core::scattering::ScatteringModel;
use comb_thermo_core::thermo::{
    delta_f, free_energy_matsubara, matsubara_breakdown, vacuum_energy, Method, ThermoRequest,
    Tolerances,
};

use crate::output::{Cell, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self.measured, Some(m) if m <= self.tolerance)
    }
}

type Outcome = Result<(f64, String), String>;

fn check(name: &'static str, tolerance: f64, run: impl FnOnce() -> Outcome) -> Check {
    match run() {
        Ok((m, detail)) => Check { name, measured: Some(m), tolerance, detail },
        Err(detail) => Check { name, measured: None, tolerance, detail },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Temperatures of the representation triangle.
pub const TRIANGLE_TEMPERATURES: [f64; 3] = [0.5, 1.0, 5.0];
/// Temperatures of the zero-temperature extrapolation, halving each step.
pub const ZERO_T_LADDER: [f64; 3] = [0.1, 0.05, 0.025];

/// Unitarity and the determinant modulus at 100 log-spaced momenta.
fn unitarity(comb: &CombSpec) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let k = 1e-3 * (5e4f64).powf(i as f64 / 99.0);
        let s = comb.model().amplitudes(Complex64::new(k, 0.0)).map_err(err)?;
        let u = (s.t.norm_sqr() + s.r_right.norm_sqr() - 1.0).abs();
        let d = (s.s_determinant().norm() - 1.0).abs();
        worst = worst.max(u).max(d);
    }
    Ok((worst, "k in [1e-3, 50]".into()))
}

/// `A(−conj k) = conj A(k)` at 20 points of the upper half-plane.
fn reality(comb: &CombSpec) -> Outcome {
    let mut worst = 0.0f64;
    let mut x = 0.5f64;
    for _ in 0..20 {
        x = (x + 0.618_033_988_749_895).fract();
        let y = (x * 7.0 + 0.3).fract();
        let k = Complex64::new(12.0 * x - 6.0, 0.05 + 3.0 * y);
        let a = comb.model().amplitudes(k).map_err(err)?;
        let b = comb.model().amplitudes(-k.conj()).map_err(err)?;
        for (u, v) in [(a.t, b.t), (a.r_left, b.r_left), (a.r_right, b.r_right)] {
            worst = worst.max((u.conj() - v).norm() / u.norm().max(1.0));
        }
    }
    Ok((worst, "20 points".into()))
}

fn dos_normalization(comb: &CombSpec, tol: &Tolerances) -> Outcome {
    let spec = QuadratureSpec::new(tol.rel_tol, tol.abs_tol);
    let bands = band_edges(comb, 40.0 * PI / comb.a(), 10).map_err(err)?;
    let mut worst = 0.0f64;
    for b in &bands {
        let mid = 0.5 * (b.omega_min + b.omega_max);
        let dos = |w: f64| density_of_states(comb, w).unwrap_or(0.0) * PI;
        let lo = integrate_adaptive(
            dos,
            Interval::new(b.omega_min, mid),
            &spec.with_transform(Transform::SqrtEdge(Side::Lower)),
        )
        .map_err(err)?;
        let hi = integrate_adaptive(
            dos,
            Interval::new(mid, b.omega_max),
            &spec.with_transform(Transform::SqrtEdge(Side::Upper)),
        )
        .map_err(err)?;
        worst = worst.max((lo.value + hi.value - PI * b.theta_span()).abs());
    }
    Ok((worst, format!("{} bands", bands.len())))
}

fn triangle_real_axis(comb: &CombSpec, tol: &Tolerances) -> Outcome {
    let mut worst = 0.0f64;
    for t in TRIANGLE_TEMPERATURES {
        let req = ThermoRequest::new(*comb, t).with_tolerances(*tol);
        let rot = delta_f(&req).map_err(err)?.value;
        let real = delta_f(&req.with_method(Method::RealAxis)).map_err(err)?.value;
        worst = worst.max(rel(real, rot));
    }
    Ok((worst, "T in {0.5, 1, 5}".into()))
}

fn triangle_matsubara(comb: &CombSpec, tol: &Tolerances) -> Outcome {
    let mut worst = 0.0f64;
    for t in TRIANGLE_TEMPERATURES {
        let req = ThermoRequest::new(*comb, t).with_tolerances(*tol);
        let rot = delta_f(&req).map_err(err)?.value;
        let m = matsubara_breakdown(&req.with_method(Method::Matsubara)).map_err(err)?;
        worst = worst.max(rel(m.total(), rot));
    }
    Ok((worst, "T in {0.5, 1, 5}".into()))
}

fn alpha_independence(comb: &CombSpec, tol: &Tolerances) -> Outcome {
    let at = |alpha| {
        delta_f(&ThermoRequest::new(*comb, 1.0).with_tolerances(*tol).with_method(Method::Rotated { alpha }))
            .map(|r| r.value)
            .map_err(err)
    };
    Ok((rel(at(PI / 6.0)?, at(PI / 3.0)?), "pi/6 vs pi/3 at T = 1".into()))
}

fn oracle_equivalence(comb: &CombSpec, tol: &Tolerances) -> Outcome {
    let rot = delta_f(&ThermoRequest::new(*comb, 1.0).with_tolerances(*tol)).map_err(err)?.value;
    let brute = delta_f_bruteforce(comb, 1.0, 200, 40.0).map_err(err)?;
    Ok((rel(brute, rot), format!("N = 200: {brute:e} vs {rot:e}")))
}

fn oracle_self_convergence(comb: &CombSpec) -> Outcome {
    let a = delta_f_bruteforce(comb, 1.0, 200, 40.0).map_err(err)?;
    let b = delta_f_bruteforce(comb, 1.0, 400, 40.0).map_err(err)?;
    Ok((rel(b, a), "N = 200 -> 400".into()))
}

/// Two-level Richardson extrapolation in `T²` over a halving ladder.
pub fn richardson_t2(f: [f64; 3]) -> f64 {
    let r1 = (4.0 * f[1] - f[0]) / 3.0;
    let r2 = (4.0 * f[2] - f[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

fn zero_temperature(comb: &CombSpec, tol: &Tolerances) -> Outcome {
    let e0 = vacuum_energy(comb, tol).map_err(err)?.value;
    let mut f = [0.0; 3];
    for (slot, t) in f.iter_mut().zip(ZERO_T_LADDER) {
        let req = ThermoRequest::new(*comb, t).with_tolerances(*tol).with_method(Method::Matsubara);
        *slot = free_energy_matsubara(&req).map_err(err)?.value;
    }
    let ext = richardson_t2(f);
    Ok(((ext - e0).abs(), format!("F_sub(0) = {ext:e}, E0_sub = {e0:e}")))
}

fn free_comb_subtracted(a: f64, tol: &Tolerances) -> Outcome {
    let free = CombSpec::free(a).map_err(err)?;
    let req = ThermoRequest::new(free, 1.0).with_tolerances(*tol).with_method(Method::Matsubara);
    let v = free_energy_matsubara(&req).map_err(err)?.value;
    Ok((v.abs(), format!("F_sub = {v:e}")))
}

fn blackbody(a: f64, tol: &Tolerances) -> Outcome {
    let free = CombSpec::free(a).map_err(err)?;
    let v = delta_f(&ThermoRequest::new(free, 1.0).with_tolerances(*tol)).map_err(err)?.value;
    let exact = -PI * a / 6.0;
    Ok((rel(v, exact), format!("{v:e} vs {exact:e}")))
}

/// Runs every check on `comb`; none of them panics on numeric failure.
pub fn battery(comb: &CombSpec, tol: &Tolerances) -> Vec<Check> {
    let a = comb.a();
    vec![
        check("unitarity", 1e-12, || unitarity(comb)),
        check("reality_reflection", 1e-12, || reality(comb)),
        check("dos_normalization", 1e-6, || dos_normalization(comb, tol)),
        check("triangle_real_axis", 1e-6, || triangle_real_axis(comb, tol)),
        check("triangle_matsubara", 1e-5, || triangle_matsubara(comb, tol)),
        check("alpha_independence", 1e-8, || alpha_independence(comb, tol)),
        check("oracle_equivalence", 1e-4, || oracle_equivalence(comb, tol)),
        check("oracle_self_convergence", 1e-5, || oracle_self_convergence(comb)),
        check("zero_temperature", 1e-4, || zero_temperature(comb, tol)),
        check("free_comb_subtracted_zero", 1e-10, || free_comb_subtracted(a, tol)),
        check("free_comb_blackbody", 1e-6, || blackbody(a, tol)),
    ]
}

pub fn report(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "status", "measured", "tolerance", "detail"]);
    for c in checks {
        t.push(vec![
            c.name.into(),
            if c.passed() { "pass" } else { "FAIL" }.into(),
            c.measured.map_or(Cell::Empty, Cell::Num),
            c.tolerance.into(),
            c.detail.clone().into(),
        ]);
    }
    t
}
