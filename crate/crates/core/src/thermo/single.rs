//! Isolated defect: `ΔF = (1/π)∫₀^∞ dk δ′(k) B(k, T)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::numerics::{Segment, Side, Transform};
use crate::scattering::{Defect, DeltaPrimeDefect, ScatteringModel};

use super::{
    boltzmann_dt_real, boltzmann_real, integrate_fallible, validate_temperature, Diagnostics,
    Method, ThermoError, ThermoResult, Tolerances,
};

/// `2γ/(γ² + 4k²)`, the phase-shift derivative written through `γ` alone.
pub fn single_defect_integrand(gamma: f64, k: f64) -> f64 {
    2.0 * gamma / (gamma * gamma + 4.0 * k * k)
}

fn segments(scales: &[f64], cut: f64) -> Vec<Segment> {
    let mut marks: Vec<f64> = scales.iter().copied().filter(|&x| x > 0.0 && x < cut).collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    marks.push(cut);
    let mut segs = Vec::new();
    let mut x0 = 0.0;
    for (i, &x1) in marks.iter().enumerate() {
        let tr = if i == 0 { Transform::SqrtEdge(Side::Lower) } else { Transform::None };
        segs.push(Segment::new(x0, x1, tr));
        x0 = x1;
    }
    segs
}

fn phase_integral(
    density: impl Fn(f64) -> Result<f64, ThermoError>,
    weight: impl Fn(f64) -> f64,
    scales: &[f64],
    t: f64,
    tol: &Tolerances,
    tail_scale: f64,
) -> Result<ThermoResult, ThermoError> {
    validate_temperature(t)?;
    tol.validate()?;
    let cut = t * tol.tail_factor();
    let segs = segments(scales, cut);
    let q = integrate_fallible(
        |k| {
            if !(k > 0.0) {
                return Ok(0.0);
            }
            Ok(density(k)? * weight(k) / PI)
        },
        &segs,
        &tol.quadrature().with_max_panels(4000),
    )?;
    let x = cut / t;
    let bound = density(cut)?.abs() * tail_scale * t * libm::exp(-x) / (PI * -libm::expm1(-x));
    if bound > tol.abs_tol + tol.rel_tol * q.value.abs() {
        return Err(ThermoError::TruncationUnreachable { cutoff: cut, bound });
    }
    Ok(ThermoResult {
        value: q.value,
        err_estimate: q.err_estimate + bound,
        method: Method::RealAxis,
        diagnostics: Diagnostics {
            panels: q.panels,
            evaluations: q.evaluations,
            cutoff: cut,
            truncation_bound: bound,
            terms: 0,
        },
    })
}

fn require_repulsive(defect: &DeltaPrimeDefect) -> Result<f64, ThermoError> {
    if !(defect.w0() > 0.0) {
        return Err(ThermoError::InvalidRequest("single-defect free energy needs w0 > 0"));
    }
    Ok(defect.gamma())
}

/// Thermal free energy of one δ-δ′ point interaction.
pub fn delta_f_single_defect(
    defect: &DeltaPrimeDefect,
    t: f64,
    tolerances: &Tolerances,
) -> Result<ThermoResult, ThermoError> {
    let g = require_repulsive(defect)?;
    phase_integral(
        |k| Ok(single_defect_integrand(g, k)),
        |k| boltzmann_real(k, t),
        &[0.5 * g, 2.0 * g, t],
        t,
        tolerances,
        t,
    )
}

/// `S = −(1/π)∫ dk δ′(k) ∂B/∂T` for one δ-δ′ point interaction.
pub fn entropy_single_defect(
    defect: &DeltaPrimeDefect,
    t: f64,
    tolerances: &Tolerances,
) -> Result<ThermoResult, ThermoError> {
    let g = require_repulsive(defect)?;
    let x = tolerances.tail_factor();
    phase_integral(
        |k| Ok(single_defect_integrand(g, k)),
        |k| -boltzmann_dt_real(k, t),
        &[0.5 * g, 2.0 * g, t],
        t,
        tolerances,
        1.0 + x,
    )
}

/// Same integral for any defect through its phase-shift derivative.
///
/// Bound states would require imaginary frequencies for a massless field, so
/// they are rejected.
pub fn delta_f_single(
    defect: &Defect,
    t: f64,
    tolerances: &Tolerances,
) -> Result<ThermoResult, ThermoError> {
    if let Some(b) = defect.bound_states().first() {
        return Err(ThermoError::UnstableSpectrum { kappa: b.kappa, mass: 0.0 });
    }
    let mut scales = Vec::from([t, 1.0]);
    if let Defect::DeltaPrime(d) = defect {
        scales.extend([0.5 * d.gamma(), 2.0 * d.gamma()]);
    }
    phase_integral(
        |k| Ok(defect.phase_derivative(k)?),
        |k| boltzmann_real(k, t),
        &scales,
        t,
        tolerances,
        t,
    )
}
