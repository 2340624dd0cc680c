use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{
    scaled_cos_sin, BoundState, LatticeValue, ScatteringAmplitudes, ScatteringError,
    ScatteringModel, POLE_TOL,
};

/// Point interaction `w0·δ(x) + 2·w1·δ′(x)`.
///
/// `w0 = 0` is admitted as a degenerate limit; together with `w1 = 0` it is
/// the free line. `w1 = ±1` decouples the two half-lines and is rejected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaPrimeDefect {
    w0: f64,
    w1: f64,
}

impl DeltaPrimeDefect {
    pub fn new(w0: f64, w1: f64) -> Result<Self, ScatteringError> {
        if !w0.is_finite() || w0 < 0.0 {
            return Err(ScatteringError::InvalidParameter {
                name: "w0",
                reason: "must be finite and non-negative (no negative energy levels)",
            });
        }
        if !w1.is_finite() {
            return Err(ScatteringError::InvalidParameter { name: "w1", reason: "must be finite" });
        }
        if (w1 * w1 - 1.0).abs() < 1e-12 {
            return Err(ScatteringError::InvalidParameter {
                name: "w1",
                reason: "|w1| = 1 makes Omega = 0 and the defect opaque",
            });
        }
        Ok(Self { w0, w1 })
    }

    /// Builds the defect from `(Omega, gamma)`, taking the root with `w1 ≥ 0`.
    pub fn from_omega_gamma(omega: f64, gamma: f64) -> Result<Self, ScatteringError> {
        if !(omega >= -1.0 && omega < 1.0) {
            return Err(ScatteringError::InvalidParameter {
                name: "Omega",
                reason: "must satisfy -1 <= Omega < 1",
            });
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(ScatteringError::InvalidParameter {
                name: "gamma",
                reason: "must be finite and non-negative",
            });
        }
        let w1sq = (1.0 + omega) / (1.0 - omega);
        Self::new(gamma * (1.0 + w1sq), libm::sqrt(w1sq))
    }

    pub fn free() -> Self {
        Self { w0: 0.0, w1: 0.0 }
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn gamma(&self) -> f64 {
        self.w0 / (1.0 + self.w1 * self.w1)
    }

    pub fn omega(&self) -> f64 {
        let w1sq = self.w1 * self.w1;
        (w1sq - 1.0) / (w1sq + 1.0)
    }

    fn denominator(&self, k: Complex64) -> Result<Complex64, ScatteringError> {
        let c = 2.0 * (1.0 + self.w1 * self.w1);
        let d = k * c + Complex64::new(0.0, self.w0);
        if d.norm() < POLE_TOL * (c * k.norm() + self.w0).max(1.0) {
            return Err(ScatteringError::PoleEvaluation { k });
        }
        Ok(d)
    }

    /// Phase shift with the branch fixed by `δ(∞) = 0`.
    pub fn phase_shift(&self, k: f64) -> Result<f64, ScatteringError> {
        let g = self.gamma();
        if !(k > 0.0) {
            return Err(ScatteringError::OutOfDomain { what: "k", value: k });
        }
        if g == 0.0 {
            return Err(ScatteringError::OutOfDomain { what: "gamma", value: g });
        }
        let base = libm::atan(2.0 * k / g);
        Ok(if g > 0.0 { base - FRAC_PI_2 } else { base + FRAC_PI_2 })
    }

    /// `dδ/dk = 2w0(1+w1²)/(w0² + 4k²(1+w1²)²)`.
    pub fn phase_shift_derivative(&self, k: f64) -> Result<f64, ScatteringError> {
        if !(k >= 0.0) {
            return Err(ScatteringError::OutOfDomain { what: "k", value: k });
        }
        let p = 1.0 + self.w1 * self.w1;
        Ok(2.0 * self.w0 * p / (self.w0 * self.w0 + 4.0 * k * k * p * p))
    }
}

/// `sin(z)/z`, `(z cos z − sin z)/z²` scaled by `e^{−|Im z|}`.
fn scaled_sinc_pair(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        let e = libm::exp(-z.im.abs());
        let sinc = (Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0) * e;
        let d = z * (Complex64::new(-1.0 / 3.0, 0.0) + z2 / 30.0) * e;
        (sinc, d)
    } else {
        let (c, s, _) = scaled_cos_sin(z);
        (s / z, (z * c - s) / (z * z))
    }
}

impl ScatteringModel for DeltaPrimeDefect {
    fn amplitudes(&self, k: Complex64) -> Result<ScatteringAmplitudes, ScatteringError> {
        let d = self.denominator(k)?;
        let w1sq = self.w1 * self.w1;
        let iw0 = Complex64::new(0.0, self.w0);
        let t = -k * (2.0 * (w1sq - 1.0)) / d;
        let r_right = (-k * (4.0 * self.w1) - iw0) / d;
        let r_left = (k * (4.0 * self.w1) - iw0) / d;
        Ok(ScatteringAmplitudes { k, t, r_left, r_right })
    }

    fn bound_states(&self) -> Vec<BoundState> {
        Vec::new()
    }

    fn support_width(&self) -> f64 {
        0.0
    }

    fn transmission_at_infinity(&self) -> f64 {
        -self.omega()
    }

    fn lattice(&self, k: Complex64, a: f64) -> Option<Result<LatticeValue, ScatteringError>> {
        let z = k * a;
        let (c, s, log_scale) = scaled_cos_sin(z);
        let (sinc, dsinc) = scaled_sinc_pair(z);
        let g2 = 0.5 * self.gamma();
        let inv = -1.0 / self.omega();
        let h = (c + sinc * (g2 * a)) * inv;
        let dh = (-s * a + dsinc * (g2 * a * a)) * inv;
        Some(Ok(LatticeValue { h, dh, log_scale }))
    }

    fn lattice_gap_factors(&self, k: f64, a: f64) -> Option<(f64, f64)> {
        self.lattice_gap_factors_complex(Complex64::new(k, 0.0), a).map(|(m, p)| (m.re, p.re))
    }

    fn lattice_gap_factors_complex(
        &self,
        k: Complex64,
        a: f64,
    ) -> Option<(Complex64, Complex64)> {
        let z = k * a;
        let om = self.omega();
        let one = Complex64::new(1.0, 0.0);
        let sinc = if z.norm() < 1e-4 { one - z * z / 6.0 } else { z.sin() / z };
        let g = sinc * (0.5 * self.gamma() * a);
        let s = (z * 0.5).sin();
        let c = (z * 0.5).cos();
        let one_minus = ((1.0 + om) - s * s * 2.0 + g) / om;
        let one_plus = ((1.0 + om) - c * c * 2.0 - g) / om;
        Some((one_minus, one_plus))
    }

    fn transmission_log_derivative(&self, k: Complex64) -> Result<Complex64, ScatteringError> {
        let d = self.denominator(k)?;
        if k.norm() == 0.0 {
            return Err(ScatteringError::PoleEvaluation { k });
        }
        Ok(k.inv() - 2.0 * (1.0 + self.w1 * self.w1) / d)
    }

    fn transmission_log_ratio(&self, kappa: f64) -> Result<f64, ScatteringError> {
        if !(kappa > 0.0) {
            return Err(ScatteringError::OutOfDomain { what: "kappa", value: kappa });
        }
        Ok(libm::log1p(self.gamma() / (2.0 * kappa)))
    }

    fn phase_derivative(&self, k: f64) -> Result<f64, ScatteringError> {
        self.phase_shift_derivative(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_delta_amplitudes_at_unit_momentum() {
        let d = DeltaPrimeDefect::new(2.0, 0.0).unwrap();
        let a = d.amplitudes(c(1.0, 0.0)).unwrap();
        assert!((a.t - c(0.5, -0.5)).norm() < 1e-15);
        assert!((a.r_right - c(-0.5, -0.5)).norm() < 1e-15);
        assert!((a.r_left - a.r_right).norm() < 1e-15);
        assert!((a.t.norm_sqr() + a.r_right.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn high_momentum_is_transparent_for_pure_delta() {
        let d = DeltaPrimeDefect::new(2.0, 0.0).unwrap();
        let a = d.amplitudes(c(1e9, 0.0)).unwrap();
        assert!((a.t - c(1.0, 0.0)).norm() < 1e-8);
        assert!(a.r_right.norm() < 1e-8);
    }

    #[test]
    fn pole_is_refused() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        let pole = c(0.0, -3.0 / (2.0 * 5.0));
        assert!(matches!(d.amplitudes(pole), Err(ScatteringError::PoleEvaluation { .. })));
    }

    #[test]
    fn parameter_validation() {
        assert!(DeltaPrimeDefect::new(-1.0, 0.0).is_err());
        assert!(DeltaPrimeDefect::new(1.0, 1.0).is_err());
        assert!(DeltaPrimeDefect::new(1.0, -1.0).is_err());
        assert!(DeltaPrimeDefect::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn derived_couplings() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        assert!((d.gamma() - 0.6).abs() < 1e-15);
        assert!((d.omega() - 0.6).abs() < 1e-15);
        let e = DeltaPrimeDefect::from_omega_gamma(0.6, 0.6).unwrap();
        assert!((e.w0() - 3.0).abs() < 1e-14 && (e.w1() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn phase_shift_values() {
        let d = DeltaPrimeDefect::new(2.0, 0.0).unwrap();
        assert!((d.phase_shift(1.0).unwrap() + core::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(d.phase_shift(1e12).unwrap().abs() < 1e-11);
        assert!((d.phase_shift(1e-14).unwrap() + FRAC_PI_2).abs() < 1e-13);
        assert!((d.phase_shift_derivative(0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_lattice_form_value() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        let v = d.lattice(c(1.0, 0.0), 1.0).unwrap().unwrap();
        let (h, _) = v.unscaled();
        let expect = -(libm::cos(1.0) + 0.3 * libm::sin(1.0)) / 0.6;
        assert!((h.re - expect).abs() < 1e-15);
        assert!((h.re + 1.321_239_335_517_514_5).abs() < 1e-14);
        assert_eq!(h.im, 0.0);
    }

    #[test]
    fn gap_factors_match_lattice_value() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        for &k in &[1e-6, 0.4, 2.9, 11.0] {
            let h = d.lattice(c(k, 0.0), 1.0).unwrap().unwrap().unscaled().0.re;
            let (m, p) = d.lattice_gap_factors(k, 1.0).unwrap();
            assert!((m - (1.0 - h)).abs() < 1e-13 && (p - (1.0 + h)).abs() < 1e-13);
        }
        let free = DeltaPrimeDefect::free();
        let (m, _) = free.lattice_gap_factors(1e-5, 1.0).unwrap();
        assert!((m / (0.5e-10 - 1e-20 / 24.0) - 1.0).abs() < 1e-14, "{m:e}");
    }

    #[test]
    fn lattice_derivative_matches_difference() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        for &k in &[c(1e-4, 0.0), c(0.7, 0.2), c(0.0, 2.5), c(4.0, -1.0)] {
            let step = 1e-5;
            let hp = d.lattice(k + step, 1.3).unwrap().unwrap().unscaled().0;
            let hm = d.lattice(k - step, 1.3).unwrap().unwrap().unscaled().0;
            let dh = d.lattice(k, 1.3).unwrap().unwrap().unscaled().1;
            assert!((dh - (hp - hm) / (2.0 * step)).norm() < 1e-8 * (1.0 + dh.norm()), "{k}");
        }
    }

    #[test]
    fn log_derivative_of_transmission() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        let k = c(0.8, 0.3);
        let step = 1e-6;
        let tp = d.amplitudes(k + step).unwrap().t;
        let tm = d.amplitudes(k - step).unwrap().t;
        let t = d.amplitudes(k).unwrap().t;
        let fd = (tp - tm) / (2.0 * step) / t;
        assert!((d.transmission_log_derivative(k).unwrap() - fd).norm() < 1e-8);
    }

    #[test]
    fn transmission_log_ratio_on_imaginary_axis() {
        let d = DeltaPrimeDefect::new(3.0, 2.0).unwrap();
        let kappa = 1.7;
        let t = d.amplitudes(c(0.0, kappa)).unwrap().t;
        let direct = libm::log(d.transmission_at_infinity() / t.re);
        assert!(t.im.abs() < 1e-15);
        assert!((d.transmission_log_ratio(kappa).unwrap() - direct).abs() < 1e-14);
    }
}
