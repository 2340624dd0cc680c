use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{
    expi_scaled, BoundState, LatticeValue, ScatteringAmplitudes, ScatteringError,
    ScatteringModel, POLE_TOL,
};
use crate::numerics::{find_root_bracketed, RootSpec};

/// Removable singularities of the closed lattice form.
const REMOVABLE: [Complex64; 3] =
    [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
const REMOVABLE_WINDOW: f64 = 0.05;
const CIRCLE_RADIUS: f64 = 0.15;
const CIRCLE_NODES: usize = 64;

/// Pöschl–Teller well `−2/cosh²(x)` truncated to `|x| ≤ ε/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoschlTellerDefect {
    epsilon: f64,
    tau: f64,
    lambda: f64,
}

impl PoschlTellerDefect {
    pub fn new(epsilon: f64) -> Result<Self, ScatteringError> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(ScatteringError::InvalidParameter {
                name: "epsilon",
                reason: "must be finite and positive",
            });
        }
        let tau = libm::tanh(0.5 * epsilon);
        Ok(Self { epsilon, tau, lambda: 1.0 - tau * tau })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Λ + 2k(k − i·tanh(ε/2))`.
    fn p(&self, k: Complex64) -> Complex64 {
        Complex64::new(self.lambda, 0.0) + k * 2.0 * (k - Complex64::new(0.0, self.tau))
    }

    fn dp(&self, k: Complex64) -> Complex64 {
        k * 4.0 - Complex64::new(0.0, 2.0 * self.tau)
    }

    /// `Δ(k) = −e^{2iεk}Λ² + P(k)²`.
    pub fn delta(&self, k: Complex64) -> Complex64 {
        let p = self.p(k);
        -expi_scaled(k, 2.0 * self.epsilon, 0.0) * (self.lambda * self.lambda) + p * p
    }

    pub fn delta_derivative(&self, k: Complex64) -> Complex64 {
        let e = expi_scaled(k, 2.0 * self.epsilon, 0.0);
        -e * Complex64::new(0.0, 2.0 * self.epsilon * self.lambda * self.lambda)
            + self.p(k) * self.dp(k) * 2.0
    }

    /// Scaled numerator `Δ(k)e^{−ika} + Δ(−k)e^{ika}` and its derivative.
    fn numerator(&self, k: Complex64, a: f64, shift: f64) -> (Complex64, Complex64) {
        let l2 = self.lambda * self.lambda;
        let e = self.epsilon;
        let pp = self.p(k);
        let pm = self.p(-k);
        let dpp = self.dp(k);
        let dpm = -self.dp(-k);
        let em = expi_scaled(k, -a, shift);
        let ep = expi_scaled(k, a, shift);
        let e1 = expi_scaled(k, 2.0 * e - a, shift);
        let e2 = expi_scaled(k, a - 2.0 * e, shift);
        let i = Complex64::new(0.0, 1.0);
        let n = pp * pp * em - e1 * l2 + pm * pm * ep - e2 * l2;
        let dn = (pp * dpp * 2.0 - pp * pp * i * a) * em - e1 * (i * ((2.0 * e - a) * l2))
            + (pm * dpm * 2.0 + pm * pm * i * a) * ep
            - e2 * (i * ((a - 2.0 * e) * l2));
        (n, dn)
    }

    fn lattice_direct(&self, k: Complex64, a: f64, shift: f64) -> (Complex64, Complex64) {
        let (n, dn) = self.numerator(k, a, shift);
        let k2 = k * k;
        let q = k2 * (k2 + 1.0);
        let dq = k * (k2 * 4.0 + 2.0);
        let h = n / (q * 8.0);
        let dh = (dn - n * dq / q) / (q * 8.0);
        (h, dh)
    }

    fn lattice_circle(&self, k: Complex64, a: f64, centre: Complex64) -> (Complex64, Complex64) {
        let mut h = Complex64::new(0.0, 0.0);
        let mut dh = Complex64::new(0.0, 0.0);
        for j in 0..CIRCLE_NODES {
            let phi = 2.0 * PI * (j as f64 + 0.5) / CIRCLE_NODES as f64;
            let (s, c) = libm::sincos(phi);
            let offset = Complex64::new(c, s) * CIRCLE_RADIUS;
            let z = centre + offset;
            let (hz, _) = self.lattice_direct(z, a, 0.0);
            let w = offset / (z - k);
            h += hz * w;
            dh += hz * w / (z - k);
        }
        let n = CIRCLE_NODES as f64;
        (h / n, dh / n)
    }

    /// `Δ(iκ)/(κ(1 − κ²))`, real and free of the removable zeros.
    fn bound_state_function(&self, kappa: f64) -> f64 {
        let d = self.delta(Complex64::new(0.0, kappa)).re;
        d / (kappa * (1.0 - kappa * kappa))
    }

    fn bound_state_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let n = 4000;
        let hi = 2.0;
        let node = |i: usize| {
            let k = hi * i as f64 / n as f64;
            if (k - 1.0).abs() < 1e-9 {
                k + 1e-6
            } else {
                k
            }
        };
        let mut prev_k = 1e-6;
        let mut prev = self.bound_state_function(prev_k);
        for i in 1..=n {
            let k = node(i);
            let cur = self.bound_state_function(k);
            if prev.is_finite() && cur.is_finite() && (prev > 0.0) != (cur > 0.0) {
                let spec = RootSpec::new(prev_k, k, 1e-15);
                if let Ok(r) = find_root_bracketed(|x| self.bound_state_function(x), &spec) {
                    if (r - 1.0).abs() > 1e-6 {
                        out.push(r);
                    }
                }
            }
            prev_k = k;
            prev = cur;
        }
        out
    }
}

impl ScatteringModel for PoschlTellerDefect {
    fn amplitudes(&self, k: Complex64) -> Result<ScatteringAmplitudes, ScatteringError> {
        let d = self.delta(k);
        let scale = (1.0 + k.norm_sqr()) * (1.0 + k.norm_sqr());
        if d.norm() < POLE_TOL * scale {
            return Err(ScatteringError::PoleEvaluation { k });
        }
        let k2 = k * k;
        let t = k2 * (k2 + 1.0) * 4.0 / d;
        let ep = expi_scaled(k, self.epsilon, 0.0);
        let em = expi_scaled(k, -self.epsilon, 0.0);
        let r = (ep * self.p(-k) - em * self.p(k)) * self.lambda / d;
        Ok(ScatteringAmplitudes { k, t, r_left: r, r_right: r })
    }

    /// Zeros of `Δ(iκ)` other than the removable ones at `κ = 0, 1`.
    fn bound_states(&self) -> Vec<BoundState> {
        self.bound_state_values().into_iter().map(|kappa| BoundState { kappa }).collect()
    }

    fn support_width(&self) -> f64 {
        self.epsilon
    }

    fn transmission_at_infinity(&self) -> f64 {
        1.0
    }

    fn lattice(&self, k: Complex64, a: f64) -> Option<Result<LatticeValue, ScatteringError>> {
        for c in REMOVABLE {
            if (k - c).norm() < REMOVABLE_WINDOW {
                let (h, dh) = self.lattice_circle(k, a, c);
                return Some(Ok(LatticeValue { h, dh, log_scale: 0.0 }));
            }
        }
        let shift = k.im.abs() * a;
        let (h, dh) = self.lattice_direct(k, a, shift);
        Some(Ok(LatticeValue { h, dh, log_scale: shift }))
    }

    fn transmission_log_derivative(&self, k: Complex64) -> Result<Complex64, ScatteringError> {
        let d = self.delta(k);
        let k2 = k * k;
        let s = 1.0 + k2.norm();
        if d.norm() < POLE_TOL * s * s || k.norm() < POLE_TOL {
            return Err(ScatteringError::PoleEvaluation { k });
        }
        let kp = k2 + 1.0;
        if kp.norm() < POLE_TOL {
            return Err(ScatteringError::PoleEvaluation { k });
        }
        Ok(k.inv() * 2.0 + k * 2.0 / kp - self.delta_derivative(k) / d)
    }

    fn transmission_log_ratio(&self, kappa: f64) -> Result<f64, ScatteringError> {
        if !(kappa > 1.0) {
            return Err(ScatteringError::OutOfDomain { what: "kappa", value: kappa });
        }
        let d = self.delta(Complex64::new(0.0, kappa)).re;
        let num = 4.0 * kappa * kappa * (kappa * kappa - 1.0);
        let ratio = d / num;
        if !(ratio > 0.0) {
            return Err(ScatteringError::OutOfDomain { what: "kappa", value: kappa });
        }
        Ok(libm::log(ratio))
    }
}
