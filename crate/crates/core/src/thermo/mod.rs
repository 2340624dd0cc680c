//! Thermal free energy and entropy per unit cell.
//!
//! The temperature-dependent part `ΔF` of a comb is available in three
//! equivalent representations: a sum over real bands weighted by the density
//! of states, an integral along a ray `k = ξe^{iα}` in the complex momentum
//! plane, and a subtracted Matsubara sum over `ξ_ℓ = 2πTℓ`. Single defects
//! and massive fields have their own entry points.

mod massive;
mod matsubara;
mod real_axis;
mod rotated;
mod single;

use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::bands::{BandError, CombSpec};
use crate::numerics::{
    clog1p_neg_exp, expm1_neg, integrate_segments, QuadError, Quadrature, QuadratureSpec, Segment,
};
use crate::scattering::ScatteringError;

pub use massive::{bound_band_term, delta_f_massive};
pub use matsubara::{
    delta_f_matsubara, free_energy_matsubara, matsubara_breakdown, reference_mass,
    subtracted_trace_log, vacuum_energy, MatsubaraBreakdown,
};
pub use real_axis::{delta_f_real_axis, entropy_real_axis};
pub use rotated::{d_v, delta_f_rotated, entropy_rotated, rotated_integrand};
pub use single::{
    delta_f_single, delta_f_single_defect, entropy_single_defect, single_defect_integrand,
};

/// Minimum distance of the ray angle from `0` and `π/2`.
pub const ALPHA_MARGIN: f64 = 0.02;
/// Smallest relative tolerance a request may ask for.
pub const MIN_REL_TOL: f64 = 1e-12;
/// Cap on the number of Matsubara terms summed explicitly.
pub const MAX_MATSUBARA_TERMS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10 }
    }
}

impl Tolerances {
    pub const fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol }
    }

    pub(crate) fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec::new(self.rel_tol, self.abs_tol)
    }

    /// `ln(1/abs_tol) + 5`, the number of thermal lengths kept before truncation.
    pub(crate) fn tail_factor(&self) -> f64 {
        libm::log(1.0 / self.abs_tol) + 5.0
    }

    fn validate(&self) -> Result<(), ThermoError> {
        if !(self.rel_tol >= MIN_REL_TOL) || !self.rel_tol.is_finite() {
            return Err(ThermoError::InvalidRequest("rel_tol must be at least 1e-12"));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(ThermoError::InvalidRequest("abs_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    RealAxis,
    Rotated { alpha: f64 },
    Matsubara,
}

impl Method {
    pub const DEFAULT_ALPHA: f64 = PI / 4.0;

    pub fn name(&self) -> &'static str {
        match self {
            Self::RealAxis => "real_axis",
            Self::Rotated { .. } => "rotated",
            Self::Matsubara => "matsubara",
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Self::Rotated { alpha: Self::DEFAULT_ALPHA }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoRequest {
    pub comb: CombSpec,
    pub temperature: f64,
    pub mass: f64,
    pub method: Method,
    pub tolerances: Tolerances,
    /// Truncation point of the frequency or ray integral; derived from `abs_tol` when absent.
    pub cutoff: Option<f64>,
}

impl ThermoRequest {
    pub fn new(comb: CombSpec, temperature: f64) -> Self {
        Self {
            comb,
            temperature,
            mass: 0.0,
            method: Method::default(),
            tolerances: Tolerances::default(),
            cutoff: None,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<(), ThermoError> {
        validate_temperature(self.temperature)?;
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(ThermoError::InvalidRequest("mass must be finite and non-negative"));
        }
        if let Method::Rotated { alpha } = self.method {
            validate_alpha(alpha)?;
        }
        if let Some(c) = self.cutoff {
            if !(c > 0.0) || !c.is_finite() {
                return Err(ThermoError::InvalidRequest("cutoff must be finite and positive"));
            }
        }
        self.tolerances.validate()
    }

    fn require_massless(&self) -> Result<(), ThermoError> {
        if self.mass > 0.0 {
            return Err(ThermoError::InvalidRequest(
                "this representation is massless; use delta_f_massive",
            ));
        }
        Ok(())
    }

    fn alpha(&self) -> f64 {
        match self.method {
            Method::Rotated { alpha } => alpha,
            _ => Method::DEFAULT_ALPHA,
        }
    }
}

pub(crate) fn validate_temperature(t: f64) -> Result<(), ThermoError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(ThermoError::InvalidRequest("temperature must be finite and positive"));
    }
    Ok(())
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<(), ThermoError> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(ThermoError::InvalidRequest("alpha must lie in (0, pi/2)"));
    }
    if alpha < ALPHA_MARGIN || alpha > PI / 2.0 - ALPHA_MARGIN {
        return Err(ThermoError::AlphaTooClose { alpha });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub panels: usize,
    pub evaluations: usize,
    /// Frequency, momentum or Matsubara cutoff actually used.
    pub cutoff: f64,
    /// Bound on the discarded tail.
    pub truncation_bound: f64,
    /// Matsubara terms summed explicitly.
    pub terms: usize,
}

impl Diagnostics {
    fn absorb(&mut self, q: &Quadrature) {
        self.panels += q.panels;
        self.evaluations += q.evaluations;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoResult {
    pub value: f64,
    pub err_estimate: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThermoError {
    InvalidRequest(&'static str),
    AlphaTooClose { alpha: f64 },
    BranchPoint { omega: Complex64 },
    BranchCut { xi: f64 },
    TruncationUnreachable { cutoff: f64, bound: f64 },
    SumNotConverged { terms: usize },
    UnstableSpectrum { kappa: f64, mass: f64 },
    Quadrature(QuadError),
    Band(BandError),
    Scattering(ScatteringError),
}

impl fmt::Display for ThermoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidRequest(msg) => write!(f, "invalid request: {msg}"),
            Self::AlphaTooClose { alpha } => {
                write!(f, "alpha = {alpha} is within {ALPHA_MARGIN} of 0 or pi/2")
            }
            Self::BranchPoint { omega } => {
                write!(f, "Boltzmann factor evaluated on a branch point, omega = {omega}")
            }
            Self::BranchCut { xi } => {
                write!(f, "square-root branch ambiguous on the ray at xi = {xi}")
            }
            Self::TruncationUnreachable { cutoff, bound } => {
                write!(f, "cutoff {cutoff} leaves a tail of up to {bound:e}")
            }
            Self::SumNotConverged { terms } => {
                write!(f, "Matsubara sum not converged after {terms} terms")
            }
            Self::UnstableSpectrum { kappa, mass } => {
                write!(f, "bound state kappa = {kappa} is not below the mass {mass}")
            }
            Self::Quadrature(e) => write!(f, "{e}"),
            Self::Band(e) => write!(f, "{e}"),
            Self::Scattering(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ThermoError {}

impl From<QuadError> for ThermoError {
    fn from(e: QuadError) -> Self {
        Self::Quadrature(e)
    }
}

impl From<BandError> for ThermoError {
    fn from(e: BandError) -> Self {
        match e {
            BandError::Scattering(s) => Self::Scattering(s),
            other => Self::Band(other),
        }
    }
}

impl From<ScatteringError> for ThermoError {
    fn from(e: ScatteringError) -> Self {
        Self::Scattering(e)
    }
}

/// `B(ω, T) = T ln(1 − e^{−ω/T})`, principal logarithm.
pub fn boltzmann(omega: Complex64, t: f64) -> Result<Complex64, ThermoError> {
    validate_temperature(t)?;
    let x = omega / t;
    if (-expm1_neg(x)).norm() < 1e-300 {
        return Err(ThermoError::BranchPoint { omega });
    }
    Ok(clog1p_neg_exp(x) * t)
}

/// `∂B/∂T = ln(1 − e^{−ω/T}) − (ω/T)/(e^{ω/T} − 1)`.
pub fn boltzmann_dt(omega: Complex64, t: f64) -> Result<Complex64, ThermoError> {
    validate_temperature(t)?;
    let x = omega / t;
    let one_minus = -expm1_neg(x);
    if one_minus.norm() < 1e-300 {
        return Err(ThermoError::BranchPoint { omega });
    }
    let w = (-x).exp();
    Ok(clog1p_neg_exp(x) - x * w / one_minus)
}

/// Real-frequency Boltzmann factor; `ω > 0`.
pub(crate) fn boltzmann_real(omega: f64, t: f64) -> f64 {
    let x = omega / t;
    if x < 0.7 {
        t * libm::log(-libm::expm1(-x))
    } else {
        t * libm::log1p(-libm::exp(-x))
    }
}

pub(crate) fn boltzmann_dt_real(omega: f64, t: f64) -> f64 {
    let x = omega / t;
    let one_minus = -libm::expm1(-x);
    let log = if x < 0.7 { libm::log(one_minus) } else { libm::log1p(-libm::exp(-x)) };
    log - x * libm::exp(-x) / one_minus
}

/// Adaptive quadrature of a fallible integrand; the first integrand error wins.
pub(crate) fn integrate_fallible<F>(
    mut f: F,
    segments: &[Segment],
    spec: &QuadratureSpec,
) -> Result<Quadrature, ThermoError>
where
    F: FnMut(f64) -> Result<f64, ThermoError>,
{
    let mut failure = None;
    let r = integrate_segments(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        segments,
        spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?)
}

/// Free energy in the representation selected by the request.
pub fn delta_f(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    if req.mass > 0.0 {
        return delta_f_massive(req);
    }
    match req.method {
        Method::RealAxis => delta_f_real_axis(req),
        Method::Rotated { .. } => delta_f_rotated(req),
        Method::Matsubara => delta_f_matsubara(req),
    }
}

/// `S = −∂ΔF/∂T`.
///
/// The real-axis and rotated representations differentiate the Boltzmann
/// factor under the integral; the Matsubara route and massive fields fall back
/// to the finite difference.
pub fn entropy(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    if req.mass > 0.0 {
        return entropy_fd(req);
    }
    match req.method {
        Method::RealAxis => entropy_real_axis(req),
        Method::Rotated { .. } => entropy_rotated(req),
        Method::Matsubara => entropy_fd(req),
    }
}

/// Central difference of `ΔF` with step `max(1e−3·T, 1e−6)`.
pub fn entropy_fd(req: &ThermoRequest) -> Result<ThermoResult, ThermoError> {
    req.validate()?;
    let t = req.temperature;
    let step = (1e-3 * t).max(1e-6);
    let tight = Tolerances::new(MIN_REL_TOL, (req.tolerances.abs_tol * 1e-4).max(1e-300));
    let at = |temp: f64| delta_f(&req.with_temperature(temp).with_tolerances(tight));
    let up = at(t + step)?;
    let down = at(t - step)?;
    let value = -(up.value - down.value) / (2.0 * step);
    let err_estimate = (up.err_estimate + down.err_estimate) / (2.0 * step);
    let mut diagnostics = up.diagnostics;
    diagnostics.panels += down.diagnostics.panels;
    diagnostics.evaluations += down.diagnostics.evaluations;
    Ok(ThermoResult { value, err_estimate, method: req.method, diagnostics })
}
