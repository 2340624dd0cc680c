//! Brute-force references: finite-box spectral sums and direct integration
//! of the wave equation through one defect.
//!
//! Deliberately simple and slow. Nothing here shares code paths with the
//! band or thermodynamic integrals beyond the lattice function itself.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::bands::{BandError, CombSpec, MAX_REFINEMENTS};
use crate::numerics::{brent, RootSpec};
use crate::scattering::PoschlTellerDefect;
use crate::thermo::{boltzmann, ThermoError};

/// Residual every returned root must satisfy.
pub const ROOT_RESIDUAL: f64 = 1e-10;
/// Sign-scan step in units of `π/a`.
pub const SCAN_DIVISIONS: f64 = 256.0;

/// Roots of `cos θ_i = h(ω)` for `θ_i = (i − ½)π/N`, `i = 1…N`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpectrum {
    pub n: usize,
    pub omega_cut: f64,
    pub thetas: Vec<f64>,
    pub roots: Vec<Vec<f64>>,
}

impl BoxSpectrum {
    pub fn total_roots(&self) -> usize {
        self.roots.iter().map(Vec::len).sum()
    }
}

fn h_real(comb: &CombSpec, omega: f64) -> Result<f64, BandError> {
    Ok(comb.lattice_value(Complex64::new(omega, 0.0))?.unscaled().0.re)
}

fn check_args(n: usize, omega_cut: f64) -> Result<(), BandError> {
    if n < 8 {
        return Err(BandError::InvalidArgument { what: "N", value: n as f64 });
    }
    if !(omega_cut > 0.0) || !omega_cut.is_finite() {
        return Err(BandError::InvalidArgument { what: "omega_cut", value: omega_cut });
    }
    Ok(())
}

/// Sign changes of `g` on `[lo, hi]` sampled with `step`, refining around
/// local minima of `|g|` that do not change sign.
fn sign_changes(
    g: &dyn Fn(f64) -> Result<f64, BandError>,
    lo: f64,
    hi: f64,
    step: f64,
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) -> Result<(), BandError> {
    let cells = libm::ceil((hi - lo) / step).max(1.0) as usize;
    let dx = (hi - lo) / cells as f64;
    let xs: Vec<f64> = (0..=cells).map(|i| if i == cells { hi } else { lo + dx * i as f64 }).collect();
    let ys = xs.iter().map(|&x| g(x)).collect::<Result<Vec<_>, _>>()?;
    for i in 0..cells {
        if ys[i] == 0.0 {
            if i > 0 || depth == 0 {
                out.push((xs[i], xs[i]));
            }
            continue;
        }
        if ys[i] * ys[i + 1] < 0.0 {
            out.push((xs[i], xs[i + 1]));
            continue;
        }
        let dip = i > 0 && ys[i].abs() < ys[i - 1].abs() && ys[i].abs() < ys[i + 1].abs();
        if dip && ys[i - 1] * ys[i] > 0.0 {
            let scale = ys[i - 1].abs().max(ys[i + 1].abs());
            if ys[i].abs() < 0.25 * scale {
                if depth >= MAX_REFINEMENTS {
                    return Err(BandError::ScanResolutionExceeded { at: xs[i] });
                }
                let mut inner = Vec::new();
                sign_changes(g, xs[i - 1], xs[i + 1], dx / 16.0, depth + 1, &mut inner)?;
                for b in inner {
                    if !out.iter().any(|o| o.0 <= b.0 && b.1 <= o.1) {
                        out.push(b);
                    }
                }
            }
        }
    }
    if ys[cells] == 0.0 && depth == 0 {
        out.push((hi, hi));
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out.dedup();
    Ok(())
}

fn roots_at(comb: &CombSpec, theta: f64, omega_cut: f64) -> Result<Vec<f64>, BandError> {
    let c = libm::cos(theta);
    let g = |w: f64| -> Result<f64, BandError> { Ok(c - h_real(comb, w)?) };
    let step = PI / (SCAN_DIVISIONS * comb.a());
    let mut brackets = Vec::new();
    sign_changes(&g, 0.0, omega_cut, step, 0, &mut brackets)?;
    let mut roots = Vec::with_capacity(brackets.len());
    for (lo, hi) in brackets {
        let x = if lo == hi {
            lo
        } else {
            let mut err = None;
            let r = brent(
                |w| match g(w) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                },
                &RootSpec::new(lo, hi, 1e-14 * hi.max(1.0)),
            );
            if let Some(e) = err {
                return Err(e);
            }
            r.map_err(BandError::Root)?.x
        };
        if !(x > 0.0) {
            continue;
        }
        let residual = g(x)?.abs();
        if residual >= ROOT_RESIDUAL {
            return Err(BandError::ScanResolutionExceeded { at: x });
        }
        roots.push(x);
    }
    Ok(roots)
}

/// Modes of a box of `N` cells with periodic ends, below `omega_cut`.
pub fn box_spectrum(comb: &CombSpec, n: usize, omega_cut: f64) -> Result<BoxSpectrum, BandError> {
    check_args(n, omega_cut)?;
    let thetas: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) * PI / n as f64).collect();
    let roots = thetas
        .iter()
        .map(|&t| roots_at(comb, t, omega_cut))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoxSpectrum { n, omega_cut, thetas, roots })
}

/// Per-cell Boltzmann sum over a box spectrum.
pub fn box_free_energy(spectrum: &BoxSpectrum, t: f64) -> Result<f64, ThermoError> {
    let mut sum = 0.0;
    for rs in &spectrum.roots {
        for &w in rs {
            sum += boltzmann(Complex64::new(w, 0.0), t)?.re;
        }
    }
    Ok(sum / spectrum.n as f64)
}

/// `(1/N) Σ_i Σ_n B(ω_{n,i}, T)`.
pub fn delta_f_bruteforce(
    comb: &CombSpec,
    t: f64,
    n: usize,
    omega_cut: f64,
) -> Result<f64, ThermoError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(ThermoError::InvalidRequest("temperature must be finite and positive"));
    }
    box_free_energy(&box_spectrum(comb, n, omega_cut)?, t)
}

/// `ψ″ = (V(x) − k²)ψ` integrated with classical Runge–Kutta.
fn rk4(
    v: impl Fn(f64) -> f64,
    k: f64,
    x0: f64,
    x1: f64,
    steps: usize,
    mut y: [Complex64; 2],
) -> [Complex64; 2] {
    let hx = (x1 - x0) / steps as f64;
    let rhs = |x: f64, y: [Complex64; 2]| [y[1], y[0] * (v(x) - k * k)];
    let add = |y: [Complex64; 2], d: [Complex64; 2], s: f64| [y[0] + d[0] * s, y[1] + d[1] * s];
    for i in 0..steps {
        let x = x0 + hx * i as f64;
        let k1 = rhs(x, y);
        let k2 = rhs(x + 0.5 * hx, add(y, k1, 0.5 * hx));
        let k3 = rhs(x + 0.5 * hx, add(y, k2, 0.5 * hx));
        let k4 = rhs(x + hx, add(y, k3, hx));
        y = [
            y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (hx / 6.0),
            y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (hx / 6.0),
        ];
    }
    y
}

/// Transmission and left reflection of a potential supported on `[−w/2, w/2]`
/// at real `k > 0`, from integrating `e^{ikx}` back from the right edge.
pub fn transfer_matrix_amplitudes(
    v: impl Fn(f64) -> f64,
    width: f64,
    k: f64,
    steps: usize,
) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let xr = 0.5 * width;
    let xl = -xr;
    let er = (i * k * xr).exp();
    let y = rk4(v, k, xr, xl, steps, [er, i * k * er]);
    let el = (i * k * xl).exp();
    let fwd = (y[0] + y[1] / (i * k)) / (el * 2.0);
    let back = (y[0] - y[1] / (i * k)) * el / 2.0;
    (fwd.inv(), back / fwd)
}

/// Transfer-matrix amplitudes of the truncated Pöschl–Teller well.
pub fn poschl_teller_amplitudes(
    defect: &PoschlTellerDefect,
    k: f64,
    steps: usize,
) -> (Complex64, Complex64) {
    transfer_matrix_amplitudes(
        |x| {
            let c = libm::cosh(x);
            -2.0 / (c * c)
        },
        defect.epsilon(),
        k,
        steps,
    )
}
