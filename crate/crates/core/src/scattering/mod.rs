//! Scattering data of a single compact-support defect.
//!
//! Amplitudes are analytic in the complex momentum `k` and obey
//! `A(−conj k) = conj A(k)`. Models may additionally supply closed forms of
//! the lattice function; these are returned exponentially scaled so that
//! evaluation far up the imaginary axis cannot overflow.

mod delta_prime;
mod poschl_teller;

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

pub use delta_prime::DeltaPrimeDefect;
pub use poschl_teller::PoschlTellerDefect;

/// Evaluations closer than this to a denominator zero are refused.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringAmplitudes {
    pub k: Complex64,
    pub t: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
}

impl ScatteringAmplitudes {
    /// `t² − r_R r_L`.
    pub fn s_determinant(&self) -> Complex64 {
        self.t * self.t - self.r_right * self.r_left
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundState {
    pub kappa: f64,
}

/// Lattice function and its `k`-derivative, both multiplied by `e^{−log_scale}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeValue {
    pub h: Complex64,
    pub dh: Complex64,
    pub log_scale: f64,
}

impl LatticeValue {
    pub fn unscaled(&self) -> (Complex64, Complex64) {
        let s = libm::exp(self.log_scale);
        (self.h * s, self.dh * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScatteringError {
    InvalidParameter { name: &'static str, reason: &'static str },
    PoleEvaluation { k: Complex64 },
    OutOfDomain { what: &'static str, value: f64 },
}

impl fmt::Display for ScatteringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Self::PoleEvaluation { k } => write!(f, "amplitude pole hit at k = {k}"),
            Self::OutOfDomain { what, value } => write!(f, "{what} out of domain: {value}"),
        }
    }
}

impl core::error::Error for ScatteringError {}

/// Generic single-defect interface.
pub trait ScatteringModel {
    fn amplitudes(&self, k: Complex64) -> Result<ScatteringAmplitudes, ScatteringError>;

    /// Poles of the transmission amplitude on the positive imaginary axis.
    fn bound_states(&self) -> Vec<BoundState>;

    fn support_width(&self) -> f64;

    /// Limit of `t(k)` as `|k| → ∞`.
    fn transmission_at_infinity(&self) -> f64;

    /// Closed-form lattice function for spacing `a`, when the model has one.
    fn lattice(&self, _k: Complex64, _a: f64) -> Option<Result<LatticeValue, ScatteringError>> {
        None
    }

    /// `(1 − h, 1 + h)` at real momentum without cancellation near `|h| = 1`.
    fn lattice_gap_factors(&self, _k: f64, _a: f64) -> Option<(f64, f64)> {
        None
    }

    /// Unscaled `(1 − h, 1 + h)` at complex `k`, for `|k|` of order one.
    fn lattice_gap_factors_complex(
        &self,
        _k: Complex64,
        _a: f64,
    ) -> Option<(Complex64, Complex64)> {
        None
    }

    /// Large-`|k|` form of the lattice function, scaled like [`Self::lattice`].
    fn lattice_asymptotic(&self, k: Complex64, a: f64) -> LatticeValue {
        let t_inf = self.transmission_at_infinity();
        let (c, s, log_scale) = scaled_cos_sin(k * a);
        LatticeValue { h: c / t_inf, dh: -s * (a / t_inf), log_scale }
    }

    /// `t′(k)/t(k)`; its imaginary part on the real axis is the phase-shift derivative.
    fn transmission_log_derivative(&self, k: Complex64) -> Result<Complex64, ScatteringError>;

    /// `ln(t(∞)/t(iκ))` for `κ` above every bound state.
    fn transmission_log_ratio(&self, kappa: f64) -> Result<f64, ScatteringError>;

    /// `dδ/dk` on the real axis.
    fn phase_derivative(&self, k: f64) -> Result<f64, ScatteringError> {
        self.transmission_log_derivative(Complex64::new(k, 0.0)).map(|z| z.im)
    }
}

/// The two shipped defect models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Defect {
    DeltaPrime(DeltaPrimeDefect),
    PoschlTeller(PoschlTellerDefect),
}

impl From<DeltaPrimeDefect> for Defect {
    fn from(d: DeltaPrimeDefect) -> Self {
        Self::DeltaPrime(d)
    }
}

impl From<PoschlTellerDefect> for Defect {
    fn from(d: PoschlTellerDefect) -> Self {
        Self::PoschlTeller(d)
    }
}

macro_rules! dispatch {
    ($self:ident, $d:ident => $e:expr) => {
        match $self {
            Defect::DeltaPrime($d) => $e,
            Defect::PoschlTeller($d) => $e,
        }
    };
}

impl ScatteringModel for Defect {
    fn amplitudes(&self, k: Complex64) -> Result<ScatteringAmplitudes, ScatteringError> {
        dispatch!(self, d => d.amplitudes(k))
    }
    fn bound_states(&self) -> Vec<BoundState> {
        dispatch!(self, d => d.bound_states())
    }
    fn support_width(&self) -> f64 {
        dispatch!(self, d => d.support_width())
    }
    fn transmission_at_infinity(&self) -> f64 {
        dispatch!(self, d => d.transmission_at_infinity())
    }
    fn lattice(&self, k: Complex64, a: f64) -> Option<Result<LatticeValue, ScatteringError>> {
        dispatch!(self, d => d.lattice(k, a))
    }
    fn lattice_gap_factors(&self, k: f64, a: f64) -> Option<(f64, f64)> {
        dispatch!(self, d => d.lattice_gap_factors(k, a))
    }
    fn lattice_gap_factors_complex(
        &self,
        k: Complex64,
        a: f64,
    ) -> Option<(Complex64, Complex64)> {
        dispatch!(self, d => d.lattice_gap_factors_complex(k, a))
    }
    fn lattice_asymptotic(&self, k: Complex64, a: f64) -> LatticeValue {
        dispatch!(self, d => d.lattice_asymptotic(k, a))
    }
    fn transmission_log_derivative(&self, k: Complex64) -> Result<Complex64, ScatteringError> {
        dispatch!(self, d => d.transmission_log_derivative(k))
    }
    fn transmission_log_ratio(&self, kappa: f64) -> Result<f64, ScatteringError> {
        dispatch!(self, d => d.transmission_log_ratio(kappa))
    }
    fn phase_derivative(&self, k: f64) -> Result<f64, ScatteringError> {
        dispatch!(self, d => d.phase_derivative(k))
    }
}

/// `e^{i c z − |Im z|}`, the building block of scaled trigonometric forms.
#[inline]
pub(crate) fn expi_scaled(z: Complex64, c: f64, shift: f64) -> Complex64 {
    let w = Complex64::new(-c * z.im - shift, c * z.re);
    w.exp()
}

/// `(cos z, sin z)·e^{−|Im z|}` together with the scale `|Im z|`.
pub(crate) fn scaled_cos_sin(z: Complex64) -> (Complex64, Complex64, f64) {
    let shift = z.im.abs();
    let ep = expi_scaled(z, 1.0, shift);
    let em = expi_scaled(z, -1.0, shift);
    let c = (ep + em) * 0.5;
    let s = (ep - em) * Complex64::new(0.0, -0.5);
    (c, s, shift)
}
