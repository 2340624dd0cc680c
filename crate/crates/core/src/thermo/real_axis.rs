//! Band sum `ΔF = Σ_bands ∫ dω ρ(ω) B(ω, T)` with `ρ = |dθ/dω|/π`.

use alloc::vec::Vec;

use crate::bands::{band_edges, density_unguarded, Band, CombSpec};
use crate::numerics::{Segment, Side, Transform};

use super::{
    boltzmann_dt_real, boltzmann_real, integrate_fallible, Diagnostics, Method, ThermoError,
    ThermoRequest, ThermoResult,
};

fn band_segments(bands: &[Band]) -> Vec<Segment> {
    let mut segs = Vec::with_capacity(2 * bands.len());
    for b in bands {
        let mid = 0.5 * (b.omega_min + b.omega_max);
        segs.push(Segment::new(b.omega_min, mid, Transform::SqrtEdge(Side::Lower)));
        segs.push(Segment::new(mid, b.omega_max, Transform::SqrtEdge(Side::Upper)));
    }
    segs
}

/// Bound on `∫_{ω_c}^∞ ρ |B|`, using at most `aω/π + 2` states below `ω`.
fn tail_bound(comb: &CombSpec, t: f64, omega_cut: f64) -> f64 {
    let x = omega_cut / t;
    t * libm::exp(-x) * (2.0 + comb.a() * t / core::f64::consts::PI) / (-libm::expm1(-x))
}

fn band_integral(
    req: &ThermoRequest,
    weight: impl Fn(f64) -> f64,
    derivative: bool,
) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    req.require_massless()?;
    let t = req.temperature;
    let tol = req.tolerances;
    let omega_cut = req.cutoff.unwrap_or(t * tol.tail_factor());
    let bands = band_edges(&req.comb, omega_cut, usize::MAX)?;
    let segs = band_segments(&bands);
    let spec = tol.quadrature().with_max_panels(2000usize.max(40 * segs.len()));
    let comb = req.comb;
    let q = integrate_fallible(
        |w| {
            if !(w > 0.0) {
                return Ok(0.0);
            }
            Ok(density_unguarded(&comb, w)? * weight(w))
        },
        &segs,
        &spec,
    )?;
    let mut bound = tail_bound(&req.comb, t, omega_cut);
    if derivative {
        bound *= (1.0 + omega_cut / t) / t;
    }
    if bound > tol.abs_tol + tol.rel_tol * q.value.abs() {
        return Err(ThermoError::TruncationUnreachable { cutoff: omega_cut, bound });
    }
    let mut diagnostics =
        Diagnostics { cutoff: omega_cut, truncation_bound: bound, ..Default::default() };
    diagnostics.absorb(&q);
    Ok(ThermoResult {
        value: q.value,
        err_estimate: q.err_estimate + bound,
        method: Method::RealAxis,
        diagnostics,
    })
}

/// Real-frequency representation of `ΔF`.
pub fn delta_f_real_axis(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    let t = req.temperature;
    band_integral(req, |w| boltzmann_real(w, t), false)
}

/// `S = −Σ_bands ∫ dω ρ(ω) ∂B/∂T`; the integrand is non-negative.
pub fn entropy_real_axis(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    let t = req.temperature;
    band_integral(req, |w| -boltzmann_dt_real(w, t), true)
}
