//! Subtracted Matsubara representation.
//!
//! With `G(ξ) = ∫₀^π (dθ/π) ln|cos θ − h(iξ)|` the bare sum `T Σ'_ℓ G(ξ_ℓ)`
//! diverges. Two references are subtracted pointwise: the asymptotic lattice
//! `h_asym(k) = cos(ka)/t(∞)`, and the isolated defect seen by a field of mass
//! `μ`, whose trace log is `ln(t(∞)/t(i√(ξ² + μ²)))`. What remains, `G_sub`,
//! decays like `ξ^{−3}`, so both the sum `F_sub` and the vacuum integral
//! `E0_sub = ∫ dξ G_sub/(2π)` converge absolutely.
//!
//! The thermal free energy is reassembled as
//! `ΔF = F_sub − E0_sub + ΔF_asym + ΔF_μ + ΔF_imag`, where the last three
//! restore the thermal parts of the references and the modes on the
//! imaginary momentum axis that the Matsubara contour crosses.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use crate::bands::{imaginary_bands, CombSpec};
use crate::numerics::{integrate_segments, QuadratureSpec, Segment, Side, Transform};
use crate::scattering::{Defect, ScatteringModel};

use super::{
    boltzmann_real, integrate_fallible, validate_temperature, Diagnostics, Method, ThermoError,
    ThermoRequest, ThermoResult, Tolerances, MAX_MATSUBARA_TERMS,
};

/// Mass of the defect reference: above every bound state and above `1`, and
/// comparable with the inverse lattice spacing.
pub fn reference_mass(comb: &CombSpec) -> f64 {
    let kappa = comb.model().bound_states().iter().map(|b| b.kappa).fold(0.0, f64::max);
    2.0 * (1.0f64).max(1.0 / comb.a()).max(kappa)
}

fn length_scale(comb: &CombSpec) -> f64 {
    reference_mass(comb).max(1.0 / comb.a())
}

/// `∫₀^π (dθ/π) ln|cos θ − h|` split as `(log_scale, rest)` for `h = ĥ e^{log_scale}`.
fn trace_log_parts(h_scaled: f64, log_scale: f64) -> (f64, f64) {
    let ah = h_scaled.abs();
    let inside = log_scale < 30.0 && ah * libm::exp(log_scale) <= 1.0;
    if inside || ah == 0.0 {
        return (0.0, -LN_2);
    }
    let r = 1.0 - libm::exp(-2.0 * log_scale) / (ah * ah);
    (log_scale, libm::log(ah) + libm::log1p(libm::sqrt(r.max(0.0))) - LN_2)
}

/// `G(ξ) − G_asym(ξ) − ln(t(∞)/t(i√(ξ² + μ²)))`.
pub fn subtracted_trace_log(comb: &CombSpec, xi: f64, mu: f64) -> Result<f64, ThermoError> {
    let (h, _, l) = comb.imaginary_value(xi)?;
    let z = num_complex::Complex64::new(0.0, xi);
    let a = comb.asymptotic_value(z);
    let (l1, r1) = trace_log_parts(h, l);
    let (l2, r2) = trace_log_parts(a.h.re, a.log_scale);
    let defect = comb.model().transmission_log_ratio(libm::sqrt(xi * xi + mu * mu))?;
    Ok((l1 - l2) + (r1 - r2) - defect)
}

fn breakpoints(comb: &CombSpec) -> Result<(Vec<(f64, f64)>, f64), ThermoError> {
    let bands = imaginary_bands(comb)?;
    Ok((bands, length_scale(comb)))
}

/// Segments covering `[lo, far]`, with square-root substitutions next to the
/// edges of imaginary bands where `G` has a square-root kink.
fn vacuum_segments(lo: f64, bands: &[(f64, f64)], scale: f64, far: f64) -> Vec<Segment> {
    let mut marks: Vec<(f64, bool)> = bands
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&x| x > lo)
        .map(|x| (x, true))
        .collect();
    for s in [1.0, 5.0, 60.0] {
        if s * scale > lo {
            marks.push((s * scale, false));
        }
    }
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut segs = Vec::new();
    let mut x0 = lo;
    let mut edge0 = bands.iter().any(|&(a, b)| a == lo || b == lo);
    for (x1, edge1) in marks {
        if x1 <= x0 {
            edge0 |= edge1;
            continue;
        }
        match (edge0, edge1) {
            (true, true) => {
                let m = 0.5 * (x0 + x1);
                segs.push(Segment::new(x0, m, Transform::SqrtEdge(Side::Lower)));
                segs.push(Segment::new(m, x1, Transform::SqrtEdge(Side::Upper)));
            }
            (true, false) => segs.push(Segment::new(x0, x1, Transform::SqrtEdge(Side::Lower))),
            (false, true) => segs.push(Segment::new(x0, x1, Transform::SqrtEdge(Side::Upper))),
            (false, false) => segs.push(Segment::plain(x0, x1)),
        }
        x0 = x1;
        edge0 = edge1;
    }
    segs.push(Segment::new(x0, far, Transform::RationalTail { scale: x0.max(1.0) }));
    segs
}

/// Past this point `G_sub` is summed up analytically as `C/ξ³`; further out
/// the difference of the two lattice trace logs drowns in rounding.
fn far_point(lo: f64, scale: f64) -> f64 {
    (1e3 * scale).max(10.0 * lo)
}

fn tail_integral(
    comb: &CombSpec,
    lo: f64,
    mu: f64,
    bands: &[(f64, f64)],
    scale: f64,
    tol: &Tolerances,
) -> Result<(f64, f64, usize, usize), ThermoError> {
    let far = far_point(lo, scale);
    let segs = vacuum_segments(lo, bands, scale, far);
    let spec = tol.quadrature().with_max_panels(4000);
    let q = integrate_fallible(|x| subtracted_trace_log(comb, x, mu), &segs, &spec)?;
    let rest = 0.5 * far * subtracted_trace_log(comb, far, mu)?;
    let value = (q.value + rest) / (2.0 * PI);
    let err = (q.err_estimate + rest.abs() * scale / far) / (2.0 * PI);
    Ok((value, err, q.panels, q.evaluations + 1))
}

/// `E0_sub = ∫₀^∞ dξ G_sub(ξ)/(2π)`, the subtracted vacuum energy per cell.
pub fn vacuum_energy(comb: &CombSpec, tolerances: &Tolerances) -> Result<ThermoResult, ThermoError> {
    tolerances.validate()?;
    let mu = reference_mass(comb);
    let (bands, scale) = breakpoints(comb)?;
    let (value, err, panels, evaluations) =
        tail_integral(comb, 0.0, mu, &bands, scale, tolerances)?;
    Ok(ThermoResult {
        value,
        err_estimate: err,
        method: Method::Matsubara,
        diagnostics: Diagnostics { panels, evaluations, cutoff: f64::INFINITY, ..Default::default() },
    })
}

/// `F_sub = T Σ'_{ℓ≥0} G_sub(2πTℓ)`.
///
/// Terms are summed explicitly up to `ξ_L`, well past every scale of the
/// comb; the remainder is the Euler–Maclaurin tail of the smooth `G_sub`.
pub fn free_energy_matsubara(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    req.require_massless()?;
    let comb = req.comb;
    let t = req.temperature;
    let mu = reference_mass(&comb);
    let scale = length_scale(&comb);
    let step = 2.0 * PI * t;
    let reach = (50.0 * scale).max(20.0 * step);
    let terms = libm::ceil(reach / step) as usize;
    if terms > MAX_MATSUBARA_TERMS {
        return Err(ThermoError::SumNotConverged { terms: MAX_MATSUBARA_TERMS });
    }
    let mut sum = 0.5 * subtracted_trace_log(&comb, 0.0, mu)?;
    for l in 1..terms {
        sum += subtracted_trace_log(&comb, step * l as f64, mu)?;
    }
    let xi_l = step * terms as f64;
    let d = 1e-3 * xi_l;
    let g_l = subtracted_trace_log(&comb, xi_l, mu)?;
    let slope = (subtracted_trace_log(&comb, xi_l + d, mu)?
        - subtracted_trace_log(&comb, xi_l - d, mu)?)
        / (2.0 * d);
    let (tail, tail_err, panels, evaluations) =
        tail_integral(&comb, xi_l, mu, &[], scale, &req.tolerances)?;
    let correction = t * g_l / 2.0 - t * step * slope / 12.0;
    let value = t * sum + correction + tail;
    let truncation_bound = (t * step * slope / 12.0).abs();
    Ok(ThermoResult {
        value,
        err_estimate: tail_err + truncation_bound * 1e-2 + f64::EPSILON * (t * sum).abs(),
        method: Method::Matsubara,
        diagnostics: Diagnostics {
            panels,
            evaluations: evaluations + terms + 3,
            cutoff: xi_l,
            truncation_bound: truncation_bound * 1e-2,
            terms,
        },
    })
}

/// Pieces of the Matsubara reconstruction of `ΔF`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatsubaraBreakdown {
    pub f_sub: f64,
    pub e0_sub: f64,
    /// Thermal part of the asymptotic lattice.
    pub asymptotic: f64,
    /// Thermal part of the massive defect reference, bound states included.
    pub defect_reference: f64,
    /// Modes of the comb on the imaginary momentum axis.
    pub imaginary: f64,
    pub terms: usize,
    pub err_estimate: f64,
}

impl MatsubaraBreakdown {
    pub fn total(&self) -> f64 {
        self.f_sub - self.e0_sub + self.asymptotic + self.defect_reference + self.imaginary
    }
}

/// Thermal part of the asymptotic lattice, `∫ (dθ/π) Σ_n B(ω_n(θ))` with
/// `cos(ω_n a) = t(∞) cos θ`.
fn asymptotic_thermal(comb: &CombSpec, t: f64, tol: &Tolerances) -> Result<(f64, f64), ThermoError> {
    let a = comb.a();
    let t_inf = comb.model().transmission_at_infinity();
    if (t_inf.abs() - 1.0).abs() < 1e-15 {
        return Ok((-PI * t * t * a / 6.0, 0.0));
    }
    let omega_cut = t * tol.tail_factor() + 2.0 * PI / a;
    let n_max = 1 + libm::ceil(omega_cut * a / (2.0 * PI)) as usize;
    let per_theta = |theta: f64| {
        let phi = libm::acos(t_inf * libm::cos(theta));
        let mut s = boltzmann_real(phi / a, t);
        for n in 1..=n_max {
            let base = 2.0 * PI * n as f64;
            s += boltzmann_real((base - phi) / a, t) + boltzmann_real((base + phi) / a, t);
        }
        s / PI
    };
    let spec = QuadratureSpec::new(tol.rel_tol.min(1e-10), tol.abs_tol * 1e-2);
    let segs = [
        Segment::new(0.0, 0.5 * PI, Transform::SqrtEdge(Side::Lower)),
        Segment::new(0.5 * PI, PI, Transform::SqrtEdge(Side::Upper)),
    ];
    let q = integrate_segments(per_theta, &segs, &spec)?;
    Ok((q.value, q.err_estimate))
}

/// `(1/π)∫₀^∞ dk δ′(k)[B(√(k² + μ²)) − B(μ)] + Σ_b [B(√(μ² − κ_b²)) − B(μ)]`.
fn defect_reference_thermal(
    model: &Defect,
    mu: f64,
    t: f64,
    tol: &Tolerances,
) -> Result<(f64, f64), ThermoError> {
    let b_mu = boltzmann_real(mu, t);
    let mut marks: Vec<f64> = Vec::new();
    if let Defect::DeltaPrime(d) = model {
        let g = d.gamma().abs();
        if g > 0.0 {
            marks.extend([0.5 * g, 2.0 * g]);
        }
    }
    marks.extend([1.0, mu, 4.0 * mu + t]);
    marks.retain(|&x| x > 0.0 && x <= 4.0 * mu + t);
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut segs = Vec::new();
    let mut x0 = 0.0;
    for &x1 in &marks {
        segs.push(Segment::plain(x0, x1));
        x0 = x1;
    }
    segs.push(Segment::new(x0, f64::INFINITY, Transform::RationalTail { scale: x0 }));
    let spec = tol.quadrature().with_max_panels(4000);
    let q = integrate_fallible(
        |k| {
            if !(k > 0.0) || !k.is_finite() {
                return Ok(0.0);
            }
            let w = libm::sqrt(k * k + mu * mu);
            Ok(model.phase_derivative(k)? * (boltzmann_real(w, t) - b_mu) / PI)
        },
        &segs,
        &spec,
    )?;
    let bound: f64 = model
        .bound_states()
        .iter()
        .map(|b| boltzmann_real(libm::sqrt(mu * mu - b.kappa * b.kappa), t) - b_mu)
        .sum();
    Ok((q.value + bound, q.err_estimate))
}

/// `−(T/π)∫_{|h(iξ)|<1} dξ |∂_ξ h|/√(1 − h²) · ln|2 sin(ξ/2T)|`.
fn imaginary_thermal(
    comb: &CombSpec,
    bands: &[(f64, f64)],
    t: f64,
    tol: &Tolerances,
) -> Result<(f64, f64), ThermoError> {
    if bands.is_empty() {
        return Ok((0.0, 0.0));
    }
    let step = 2.0 * PI * t;
    let mut segs = Vec::new();
    for &(lo, hi) in bands {
        let mut pts = Vec::new();
        pts.push(lo);
        let mut l = libm::floor(lo / step) as usize + 1;
        while step * (l as f64) < hi {
            pts.push(step * l as f64);
            l += 1;
        }
        pts.push(hi);
        for w in pts.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            segs.push(Segment::new(w[0], m, Transform::SqrtEdge(Side::Lower)));
            segs.push(Segment::new(m, w[1], Transform::SqrtEdge(Side::Upper)));
        }
    }
    let spec = tol.quadrature().with_max_panels(2000usize.max(40 * segs.len()));
    let q = integrate_fallible(
        |xi| {
            let d = imaginary_density(comb, xi)?;
            if d == 0.0 {
                return Ok(0.0);
            }
            let s = (2.0 * libm::sin(xi / (2.0 * t))).abs();
            Ok(-(t / PI) * d * libm::log(s))
        },
        &segs,
        &spec,
    )?;
    Ok((q.value, q.err_estimate))
}

/// `|dθ/dξ| = |∂_ξ h(iξ)|/√(1 − h²)` inside imaginary bands, zero outside.
pub(crate) fn imaginary_density(comb: &CombSpec, xi: f64) -> Result<f64, ThermoError> {
    let (h, dh, l) = comb.imaginary_value(xi)?;
    let s = libm::exp(l);
    let (h, dh) = (h * s, dh * s);
    let g = (1.0 - h) * (1.0 + h);
    if !(g > 0.0) {
        return Ok(0.0);
    }
    Ok(dh.abs() / libm::sqrt(g))
}

/// Full reconstruction of `ΔF` from the subtracted Matsubara sum.
pub fn matsubara_breakdown(req: &ThermoRequest) -> Result<MatsubaraBreakdown, ThermoError> {
    req.validate()?;
    req.require_massless()?;
    let comb = req.comb;
    let t = req.temperature;
    validate_temperature(t)?;
    let tol = req.tolerances;
    let f = free_energy_matsubara(req)?;
    let e0 = vacuum_energy(&comb, &tol)?;
    let (asymptotic, e1) = asymptotic_thermal(&comb, t, &tol)?;
    let (defect_reference, e2) = defect_reference_thermal(comb.model(), reference_mass(&comb), t, &tol)?;
    let bands = imaginary_bands(&comb)?;
    let (imaginary, e3) = imaginary_thermal(&comb, &bands, t, &tol)?;
    Ok(MatsubaraBreakdown {
        f_sub: f.value,
        e0_sub: e0.value,
        asymptotic,
        defect_reference,
        imaginary,
        terms: f.diagnostics.terms,
        err_estimate: f.err_estimate + e0.err_estimate + e1 + e2 + e3,
    })
}

/// Matsubara representation of `ΔF`.
pub fn delta_f_matsubara(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    let b = matsubara_breakdown(req)?;
    Ok(ThermoResult {
        value: b.total(),
        err_estimate: b.err_estimate,
        method: Method::Matsubara,
        diagnostics: Diagnostics { terms: b.terms, ..Default::default() },
    })
}
