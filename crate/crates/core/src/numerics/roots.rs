//! Bracketed scalar root refinement (Brent's method).

use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootSpec {
    pub lo: f64,
    pub hi: f64,
    pub tol_abs: f64,
    pub max_iter: usize,
}

impl RootSpec {
    pub const fn new(lo: f64, hi: f64, tol_abs: f64) -> Self {
        Self { lo, hi, tol_abs, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootError {
    NoSignChange { lo: f64, hi: f64 },
    NonFinite { at: f64 },
    MaxIterations { best: f64 },
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoSignChange { lo, hi } => write!(f, "no sign change on [{lo}, {hi}]"),
            Self::NonFinite { at } => write!(f, "function not finite at {at}"),
            Self::MaxIterations { best } => write!(f, "iteration limit reached near {best}"),
        }
    }
}

impl core::error::Error for RootError {}

/// Root of `g` inside the bracket of `spec`.
pub fn find_root_bracketed<G: FnMut(f64) -> f64>(g: G, spec: &RootSpec) -> Result<f64, RootError> {
    brent(g, spec).map(|r| r.x)
}

/// Brent's method; every step keeps a sign-changing bracket, falling back
/// to bisection whenever interpolation does not shrink it fast enough.
pub fn brent<G: FnMut(f64) -> f64>(mut g: G, spec: &RootSpec) -> Result<Root, RootError> {
    let (mut a, mut b) = (spec.lo, spec.hi);
    let mut fa = g(a);
    let mut fb = g(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { at: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { at: b });
    }
    if fa == 0.0 {
        return Ok(Root { x: a, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, iterations: 0 });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(RootError::NoSignChange { lo: a, hi: b });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=spec.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * spec.tol_abs;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Root { x: b, iterations: iter });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            let min1 = 3.0 * m * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = g(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { at: b });
        }
    }
    Err(RootError::MaxIterations { best: b })
}
