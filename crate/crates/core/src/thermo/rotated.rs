//! Ray representation `ΔF = ∫₀^∞ dξ (1/π) Im[B(ξe^{iα}, T) D_V(ξe^{iα})]`.
//!
//! `D_V = −∂_ξ h/√(h² − 1)` with the root taken as `h·√(1 − 1/h²)`. That
//! branch is analytic off `h ∈ [−1, 1]`, which the ray never meets, and it
//! reduces to `h` for large `|h|`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::bands::CombSpec;
use crate::scattering::ScatteringModel;
use crate::numerics::{Segment, Side, Transform};

use super::{
    boltzmann, boltzmann_dt, integrate_fallible, validate_alpha, validate_temperature,
    Diagnostics, Method, ThermoError, ThermoRequest, ThermoResult,
};

const CUT_TOL: f64 = 1e-14;
/// Below this `|1 − 1/h²|` is recomputed from cancellation-free gap factors.
const NEAR_EDGE: f64 = 1e-3;
/// Without gap factors, `|1 − 1/h²|` below this carries too few digits.
const NOISY_EDGE: f64 = 1e-6;

/// `D_V` at `k = ξe^{iα}`; `α` may be negative for the lower ray.
pub fn d_v(comb: &CombSpec, xi: f64, alpha: f64) -> Result<Complex64, ThermoError> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(ThermoError::InvalidRequest("xi must be finite and positive"));
    }
    match edge_factor(comb, xi, alpha)? {
        Edge::Resolved(p) => Ok(p.d_v(p.w.sqrt())),
        Edge::Noisy(w) => d_v_extrapolated(comb, xi, alpha, w),
        Edge::OnCut(p) => {
            let side = cut_side(comb, xi, alpha)?;
            Ok(p.d_v(Complex64::new(0.0, side * libm::sqrt(p.w.norm()))))
        }
    }
}

struct Parts {
    dir: Complex64,
    h: Complex64,
    dh: Complex64,
    w: Complex64,
}

impl Parts {
    fn d_v(&self, root: Complex64) -> Complex64 {
        -self.dir * self.dh / (self.h * root)
    }
}

enum Edge {
    Resolved(Parts),
    /// `|1 − 1/h²|` too small to carry digits.
    Noisy(f64),
    /// `1 − 1/h²` on the negative axis to rounding.
    OnCut(Parts),
}

fn edge_factor(comb: &CombSpec, xi: f64, alpha: f64) -> Result<Edge, ThermoError> {
    let dir = Complex64::from_polar(1.0, alpha);
    let k = dir * xi;
    let v = comb.lattice_value(k)?;
    let inv_h2 = (v.h * v.h).inv() * libm::exp(-2.0 * v.log_scale);
    let mut w = Complex64::new(1.0, 0.0) - inv_h2;
    let near_origin = xi * comb.a() < 1.0;
    if w.norm() < NEAR_EDGE {
        match comb.model().lattice_gap_factors_complex(k, comb.a()) {
            Some((om, op)) => w = -om * op * inv_h2,
            None if w.norm() < NOISY_EDGE && near_origin => return Ok(Edge::Noisy(w.norm())),
            None => {}
        }
    }
    let parts = Parts { dir, h: v.h, dh: v.dh, w };
    if w.re <= 0.0 && w.im.abs() <= CUT_TOL * w.norm() {
        if near_origin {
            return Ok(Edge::OnCut(parts));
        }
        return Err(ThermoError::BranchCut { xi });
    }
    Ok(Edge::Resolved(parts))
}

/// Sign of `Im √(1 − 1/h²)` continued inward from where it is resolved.
fn cut_side(comb: &CombSpec, xi: f64, alpha: f64) -> Result<f64, ThermoError> {
    let mut x = 2.0 * xi;
    while x * comb.a() < 1.0 {
        if let Edge::Resolved(p) = edge_factor(comb, x, alpha)? {
            return Ok(if p.w.im < 0.0 { -1.0 } else { 1.0 });
        }
        x *= 2.0;
    }
    Err(ThermoError::BranchCut { xi })
}

/// Near a band edge at `k = 0` the factor `h² − 1` is lost to rounding.
/// `D_V` is even in `k` there, so it is continued linearly in `ξ²`.
fn d_v_extrapolated(
    comb: &CombSpec,
    xi: f64,
    alpha: f64,
    w: f64,
) -> Result<Complex64, ThermoError> {
    let mut x1 = xi * libm::sqrt(NOISY_EDGE / w.max(1e-300)).clamp(2.0, 1e12);
    while x1 * comb.a() < 1.0 {
        if let (Edge::Resolved(p1), Edge::Resolved(p2)) =
            (edge_factor(comb, x1, alpha)?, edge_factor(comb, 2.0 * x1, alpha)?)
        {
            let (d1, d2) = (p1.d_v(p1.w.sqrt()), p2.d_v(p2.w.sqrt()));
            let s = (xi * xi - x1 * x1) / (3.0 * x1 * x1);
            return Ok(d1 + (d2 - d1) * s);
        }
        x1 *= 2.0;
    }
    Err(ThermoError::BranchCut { xi })
}

/// `(1/π) Im[B(ξe^{iα}, T) D_V(ξe^{iα})]`.
pub fn rotated_integrand(
    comb: &CombSpec,
    xi: f64,
    alpha: f64,
    t: f64,
) -> Result<f64, ThermoError> {
    validate_alpha(alpha)?;
    validate_temperature(t)?;
    let k = Complex64::from_polar(xi, alpha);
    Ok((boltzmann(k, t)? * d_v(comb, xi, alpha)?).im / PI)
}

pub(crate) struct RayIntegral {
    pub value: f64,
    pub err_estimate: f64,
    pub diagnostics: Diagnostics,
}

/// `∫₀^{ξ_cut} dξ (1/π) Im[W(ξe^{iα}) D_V]` for a weight decaying like `e^{−ξ cos α/T}`.
///
/// `tail` bounds `|W|·|D_V|` beyond the cutoff, given the cutoff and `|D_V|` there.
pub(crate) fn ray_integral<W>(
    req: &ThermoRequest,
    weight: W,
    tail: impl Fn(f64, f64) -> f64,
) -> Result<RayIntegral, ThermoError>
where
    W: Fn(Complex64) -> Result<Complex64, ThermoError>,
{
    let t = req.temperature;
    let alpha = req.alpha();
    validate_alpha(alpha)?;
    let tol = req.tolerances;
    let cos_a = libm::cos(alpha);
    let xi_cut = req.cutoff.unwrap_or(t / cos_a * tol.tail_factor());
    let comb = req.comb;
    let f = |xi: f64| -> Result<f64, ThermoError> {
        if !(xi > 0.0) {
            return Ok(0.0);
        }
        let k = Complex64::from_polar(xi, alpha);
        Ok((weight(k)? * d_v(&comb, xi, alpha)?).im / PI)
    };
    let knee = t.min(1.0 / comb.a()).min(0.5 * xi_cut);
    let segs = [
        Segment::new(0.0, knee, Transform::SqrtEdge(Side::Lower)),
        Segment::plain(knee, xi_cut),
    ];
    let q = integrate_fallible(f, &segs, &tol.quadrature().with_max_panels(4000))?;
    let d_cut = d_v(&comb, xi_cut, alpha)?.norm();
    let bound = tail(xi_cut, 2.0 * d_cut.max(comb.a())) * t / (PI * cos_a);
    if bound > tol.abs_tol + tol.rel_tol * q.value.abs() {
        return Err(ThermoError::TruncationUnreachable { cutoff: xi_cut, bound });
    }
    let mut diagnostics = Diagnostics { cutoff: xi_cut, truncation_bound: bound, ..Default::default() };
    diagnostics.absorb(&q);
    Ok(RayIntegral { value: q.value, err_estimate: q.err_estimate + bound, diagnostics })
}

fn finish(r: RayIntegral, req: &ThermoRequest) -> ThermoResult {
    ThermoResult {
        value: r.value,
        err_estimate: r.err_estimate,
        method: Method::Rotated { alpha: req.alpha() },
        diagnostics: r.diagnostics,
    }
}

/// Rotated-ray representation of `ΔF`.
pub fn delta_f_rotated(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    req.require_massless()?;
    let t = req.temperature;
    let cos_a = libm::cos(req.alpha());
    let r = ray_integral(
        req,
        |k| boltzmann(k, t),
        |xi, d| 2.0 * t * d * libm::exp(-xi * cos_a / t),
    )?;
    Ok(finish(r, req))
}

/// `S = −(1/π)∫ dξ Im[∂_T B · D_V]` along the same ray.
pub fn entropy_rotated(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    req.require_massless()?;
    let t = req.temperature;
    let cos_a = libm::cos(req.alpha());
    let r = ray_integral(
        req,
        |k| boltzmann_dt(k, t).map(|b| -b),
        |xi, d| 2.0 * d * (1.0 + xi / t) * libm::exp(-xi * cos_a / t),
    )?;
    Ok(finish(r, req))
}
