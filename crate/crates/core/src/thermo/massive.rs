//! Field of mass `m` on the comb, `ω = √(k² + m²)`.
//!
//! The ray integral uses `B(√(k² + m²))`. Modes with imaginary momentum
//! `k = iξ`, `ξ < m`, have real frequency `√(m² − ξ²)` and enter as a band of
//! bound states.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::bands::{imaginary_bands, CombSpec};
use crate::numerics::{Segment, Side, Transform};

use super::matsubara::imaginary_density;
use super::rotated::ray_integral;
use super::{
    boltzmann, boltzmann_real, integrate_fallible, validate_temperature, Method, ThermoError,
    ThermoRequest, ThermoResult, Tolerances,
};

/// `∫ (dξ/π) |dθ/dξ| B(√(m² − ξ²))` over the imaginary bands of the comb.
pub fn bound_band_term(
    comb: &CombSpec,
    mass: f64,
    t: f64,
    tolerances: &Tolerances,
) -> Result<(f64, f64), ThermoError> {
    validate_temperature(t)?;
    let bands = imaginary_bands(comb)?;
    if let Some(&(_, top)) = bands.iter().find(|b| b.1 >= mass) {
        return Err(ThermoError::UnstableSpectrum { kappa: top, mass });
    }
    if bands.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut segs = Vec::new();
    for &(lo, hi) in &bands {
        let m = 0.5 * (lo + hi);
        segs.push(Segment::new(lo, m, Transform::SqrtEdge(Side::Lower)));
        segs.push(Segment::new(m, hi, Transform::SqrtEdge(Side::Upper)));
    }
    let q = integrate_fallible(
        |xi| {
            let d = imaginary_density(comb, xi)?;
            if d == 0.0 {
                return Ok(0.0);
            }
            Ok(d / PI * boltzmann_real(libm::sqrt((mass - xi) * (mass + xi)), t))
        },
        &segs,
        &tolerances.quadrature(),
    )?;
    Ok((q.value, q.err_estimate))
}

/// `ΔF` of a massive field, bound band included.
pub fn delta_f_massive(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    let m = req.mass;
    if !(m > 0.0) {
        return Err(ThermoError::InvalidRequest("delta_f_massive needs mass > 0"));
    }
    let t = req.temperature;
    let (bound, bound_err) = bound_band_term(&req.comb, m, t, &req.tolerances)?;
    let cos_a = libm::cos(req.alpha());
    let m2 = Complex64::new(m * m, 0.0);
    let r = ray_integral(
        req,
        |k| boltzmann((k * k + m2).sqrt(), t),
        |xi, d| 2.0 * t * d * libm::exp(-xi * cos_a / t),
    )?;
    Ok(ThermoResult {
        value: r.value + bound,
        err_estimate: r.err_estimate + bound_err,
        method: Method::Rotated { alpha: req.alpha() },
        diagnostics: r.diagnostics,
    })
}
