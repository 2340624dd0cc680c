//! Lattice spectral machinery.
//!
//! A comb is a defect repeated with spacing `a`. Its lattice function
//! `h(k)` decides the spectrum: the secular function `cos θ − h(k)`
//! vanishes on Bloch modes, so allowed frequencies satisfy `|h(ω)| ≤ 1`
//! with quasi-momentum phase `θ(ω) = arccos h(ω)`.

mod scan;

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::numerics::RootError;
use crate::scattering::{
    DeltaPrimeDefect, Defect, LatticeValue, ScatteringError, ScatteringModel,
};
use scan::Sample;

/// Distance from a band edge inside which the density of states is refused.
pub const EDGE_WINDOW: f64 = 1e-9;
/// How many times `band_edges` quarters the scan step before giving up.
pub const MAX_REFINEMENTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandError {
    InvalidComb(&'static str),
    InvalidArgument { what: &'static str, value: f64 },
    Scattering(ScatteringError),
    Root(RootError),
    ScanResolutionExceeded { at: f64 },
    EdgeSingularity { omega: f64 },
}

impl fmt::Display for BandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidComb(msg) => write!(f, "invalid comb: {msg}"),
            Self::InvalidArgument { what, value } => write!(f, "invalid {what}: {value}"),
            Self::Scattering(e) => write!(f, "{e}"),
            Self::Root(e) => write!(f, "band-edge refinement failed: {e}"),
            Self::ScanResolutionExceeded { at } => {
                write!(f, "unresolved structure below the scan step near omega = {at}")
            }
            Self::EdgeSingularity { omega } => {
                write!(f, "density of states requested at a band edge (omega = {omega})")
            }
        }
    }
}

impl core::error::Error for BandError {}

impl From<ScatteringError> for BandError {
    fn from(e: ScatteringError) -> Self {
        Self::Scattering(e)
    }
}

/// A defect repeated with lattice spacing `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombSpec {
    model: Defect,
    a: f64,
}

impl CombSpec {
    pub fn new(model: impl Into<Defect>, a: f64) -> Result<Self, BandError> {
        let model = model.into();
        if !(a > 0.0) || !a.is_finite() {
            return Err(BandError::InvalidComb("lattice spacing a must be finite and positive"));
        }
        if model.support_width() > a {
            return Err(BandError::InvalidComb(
                "defect support must fit in one cell (epsilon <= a)",
            ));
        }
        Ok(Self { model, a })
    }

    /// Empty lattice, `h = cos(ka)`.
    pub fn free(a: f64) -> Result<Self, BandError> {
        Self::new(DeltaPrimeDefect::free(), a)
    }

    pub fn model(&self) -> &Defect {
        &self.model
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Scaled lattice function and derivative at complex `k`.
    pub fn lattice_value(&self, k: Complex64) -> Result<LatticeValue, BandError> {
        match self.model.lattice(k, self.a) {
            Some(v) => Ok(v?),
            None => {
                let h = h_lattice_generic(self, k)?;
                let step = 1e-5 * (1.0 + k.norm());
                let hp = h_lattice_generic(self, k + step)?;
                let hm = h_lattice_generic(self, k - step)?;
                Ok(LatticeValue { h, dh: (hp - hm) / (2.0 * step), log_scale: 0.0 })
            }
        }
    }

    /// Scaled large-momentum lattice function.
    pub fn asymptotic_value(&self, k: Complex64) -> LatticeValue {
        self.model.lattice_asymptotic(k, self.a)
    }

    fn real_sample(&self, omega: f64) -> Result<Sample, BandError> {
        let v = self.lattice_value(Complex64::new(omega, 0.0))?;
        Ok(Sample { h: v.h.re, dh: v.dh.re, log_scale: v.log_scale })
    }

    /// `h(iξ)` and `d/dξ h(iξ)`, both real, scaled by `e^{−log_scale}`.
    pub fn imaginary_value(&self, xi: f64) -> Result<(f64, f64, f64), BandError> {
        let v = self.lattice_value(Complex64::new(0.0, xi))?;
        Ok((v.h.re, -v.dh.im, v.log_scale))
    }

    fn imag_sample(&self, xi: f64) -> Result<Sample, BandError> {
        let (h, dh, log_scale) = self.imaginary_value(xi)?;
        Ok(Sample { h, dh, log_scale })
    }

    fn h_and_slope(&self, omega: f64) -> Result<(f64, f64, f64, f64), BandError> {
        let v = self.lattice_value(Complex64::new(omega, 0.0))?;
        let (h, dh) = v.unscaled();
        let (om, op) = self
            .model
            .lattice_gap_factors(omega, self.a)
            .unwrap_or((1.0 - h.re, 1.0 + h.re));
        Ok((h.re, dh.re, om, op))
    }
}

/// Lattice function `h(k)` at complex momentum.
pub fn h_lattice(comb: &CombSpec, k: Complex64) -> Result<Complex64, BandError> {
    Ok(comb.lattice_value(k)?.unscaled().0)
}

/// `h` assembled from the amplitudes: `[e^{−ika} + e^{ika}(t² − r_R r_L)]/(2t)`.
pub fn h_lattice_generic(comb: &CombSpec, k: Complex64) -> Result<Complex64, BandError> {
    let s = comb.model.amplitudes(k)?;
    let ika = Complex64::new(0.0, comb.a) * k;
    Ok(((-ika).exp() + ika.exp() * s.s_determinant()) / (s.t * 2.0))
}

/// Secular function `cos θ − h(k)`.
pub fn secular(comb: &CombSpec, theta: f64, k: Complex64) -> Result<Complex64, BandError> {
    if !(0.0..=PI).contains(&theta) {
        return Err(BandError::InvalidArgument { what: "theta", value: theta });
    }
    Ok(Complex64::new(libm::cos(theta), 0.0) - h_lattice(comb, k)?)
}

/// Which endpoint of a band carries `θ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    ZeroAtMin,
    ZeroAtMax,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub n: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub theta_at_min: f64,
    pub theta_at_max: f64,
}

impl Band {
    pub fn orientation(&self) -> Orientation {
        if self.theta_at_min < self.theta_at_max {
            Orientation::ZeroAtMin
        } else {
            Orientation::ZeroAtMax
        }
    }

    /// Fraction of the `[0, π]` sweep covered by the band.
    pub fn theta_span(&self) -> f64 {
        (self.theta_at_max - self.theta_at_min).abs() / PI
    }

    /// True when the band sweeps the full `θ ∈ [0, π]`.
    ///
    /// The lowest band is incomplete when part of it lies on the imaginary axis.
    pub fn is_complete(&self) -> bool {
        (self.theta_span() - 1.0).abs() < 1e-6
    }

    pub fn width(&self) -> f64 {
        self.omega_max - self.omega_min
    }
}

fn theta_of(h: f64, one_minus: f64, one_plus: f64) -> f64 {
    let s2 = one_minus * one_plus;
    libm::atan2(libm::sqrt(s2.max(0.0)), h)
}

/// Allowed bands with `omega_min < omega_cut`, refining the scan step on demand.
pub fn band_edges(comb: &CombSpec, omega_cut: f64, max_bands: usize) -> Result<Vec<Band>, BandError> {
    let mut step = PI / (64.0 * comb.a);
    let mut last = BandError::ScanResolutionExceeded { at: 0.0 };
    for _ in 0..=MAX_REFINEMENTS {
        match band_edges_with_step(comb, omega_cut, max_bands, step) {
            Err(e @ BandError::ScanResolutionExceeded { .. }) => {
                last = e;
                step *= 0.25;
            }
            other => return other,
        }
    }
    Err(last)
}

/// As [`band_edges`] with an explicit scan step.
pub fn band_edges_with_step(
    comb: &CombSpec,
    omega_cut: f64,
    max_bands: usize,
    step: f64,
) -> Result<Vec<Band>, BandError> {
    if !(omega_cut > 0.0) || !omega_cut.is_finite() {
        return Err(BandError::InvalidArgument { what: "omega_cut", value: omega_cut });
    }
    if !(step > 0.0) {
        return Err(BandError::InvalidArgument { what: "scan step", value: step });
    }
    let f = |w: f64| comb.real_sample(w);
    let (allowed0, events) = scan::scan(&f, 0.0, omega_cut, step, true)?;
    let mut bands = Vec::new();
    for (lo, hi) in scan::intervals(0.0, allowed0, &events) {
        if lo >= omega_cut || bands.len() >= max_bands {
            break;
        }
        if !hi.is_finite() {
            return Err(BandError::ScanResolutionExceeded { at: lo });
        }
        let end_theta = |w: f64| -> Result<f64, BandError> {
            let (h, _, om, op) = comb.h_and_slope(w)?;
            Ok(theta_of(h, om, op))
        };
        let snap = |t: f64| {
            if t < 1e-5 {
                0.0
            } else if PI - t < 1e-5 {
                PI
            } else {
                t
            }
        };
        let tmin = if lo == 0.0 { end_theta(lo)? } else { snap(end_theta(lo)?) };
        let tmax = snap(end_theta(hi)?);
        bands.push(Band {
            n: bands.len() + 1,
            omega_min: lo,
            omega_max: hi,
            theta_at_min: tmin,
            theta_at_max: tmax,
        });
    }
    Ok(bands)
}

/// Result of the pointwise dispersion query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dispersion {
    Allowed(f64),
    Forbidden,
}

impl Dispersion {
    pub fn theta(&self) -> Option<f64> {
        match self {
            Self::Allowed(t) => Some(*t),
            Self::Forbidden => None,
        }
    }
}

/// `θ(ω) = arccos h(ω)` inside bands.
pub fn dispersion_theta(comb: &CombSpec, omega: f64) -> Result<Dispersion, BandError> {
    if !(omega > 0.0) {
        return Err(BandError::InvalidArgument { what: "omega", value: omega });
    }
    let (h, _, om, op) = comb.h_and_slope(omega)?;
    if om < 0.0 || op < 0.0 {
        Ok(Dispersion::Forbidden)
    } else {
        Ok(Dispersion::Allowed(theta_of(h, om, op)))
    }
}

/// `dθ/dω = −h′(ω)/sin θ`; zero in gaps.
pub fn dispersion_slope(comb: &CombSpec, omega: f64) -> Result<f64, BandError> {
    if !(omega >= 0.0) {
        return Err(BandError::InvalidArgument { what: "omega", value: omega });
    }
    let (_, dh, om, op) = comb.h_and_slope(omega)?;
    if om < 0.0 || op < 0.0 {
        return Ok(0.0);
    }
    let nearest = om.min(op);
    if nearest <= EDGE_WINDOW * dh.abs() || nearest == 0.0 {
        return Err(BandError::EdgeSingularity { omega });
    }
    Ok(-dh / libm::sqrt(om * op))
}

/// Density of states per cell, `|dθ/dω|/π`.
pub fn density_of_states(comb: &CombSpec, omega: f64) -> Result<f64, BandError> {
    if !(omega > 0.0) {
        return Err(BandError::InvalidArgument { what: "omega", value: omega });
    }
    Ok(dispersion_slope(comb, omega)?.abs() / PI)
}

/// `|dθ/dω|/π` without the edge guard; zero outside bands.
///
/// Meant for quadrature nodes that approach an edge under a square-root
/// substitution, where the Jacobian cancels the divergence.
pub(crate) fn density_unguarded(comb: &CombSpec, omega: f64) -> Result<f64, BandError> {
    let (_, dh, om, op) = comb.h_and_slope(omega)?;
    let g = om * op;
    if !(g > 0.0) {
        return Ok(0.0);
    }
    Ok(dh.abs() / libm::sqrt(g) / PI)
}

/// Intervals of `ξ ≥ 0` where `|h(iξ)| < 1`.
///
/// These are Bloch modes with imaginary frequency; the rotated contour never
/// encloses them, so the Matsubara route has to account for them explicitly.
pub fn imaginary_bands(comb: &CombSpec) -> Result<Vec<(f64, f64)>, BandError> {
    let a = comb.a;
    let step = 0.01f64.min(PI / (64.0 * a));
    let mut hi = 4.0 + 8.0 / a;
    let f = |x: f64| comb.imag_sample(x);
    for _ in 0..8 {
        let (allowed0, events) = scan::scan(&f, 0.0, hi, step, true)?;
        let ivs = scan::intervals(0.0, allowed0, &events);
        let tail = f(hi)?;
        let grows = tail.excess() > 0.0 && tail.h * tail.dh > 0.0;
        if ivs.iter().all(|iv| iv.1.is_finite()) && grows {
            return Ok(ivs);
        }
        hi *= 2.0;
    }
    Err(BandError::ScanResolutionExceeded { at: hi })
}
