//! Globally adaptive quadrature.
//!
//! Every segment is mapped to a bounded variable `u` by its [`Transform`];
//! panels in `u` are bisected worst-first until the summed error estimate
//! meets the tolerance. Ties are broken by creation order, so identical
//! inputs give bit-identical results.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::kronrod::gk21;

/// Integration interval; `hi` may be `f64::INFINITY` for tail transforms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Change of variable applied before quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    None,
    /// `x = edge ± s²` at the chosen endpoint; removes `1/√` and softens log singularities.
    SqrtEdge(Side),
    /// `x = lo − scale·ln u`; suited to `e^{−x/scale}` tails.
    ExpTail { scale: f64 },
    /// `x = lo + scale·(1 − u)/u`; suited to algebraic tails.
    RationalTail { scale: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub transform: Transform,
}

impl QuadratureSpec {
    pub const fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, max_panels: 2000, transform: Transform::None }
    }

    pub const fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub const fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadError::InvalidSpec("tolerances must be positive"));
        }
        if self.max_panels < 8 {
            return Err(QuadError::InvalidSpec("max_panels must be at least 8"));
        }
        Ok(())
    }
}

/// One piece of a composite integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub interval: Interval,
    pub transform: Transform,
}

impl Segment {
    pub const fn new(lo: f64, hi: f64, transform: Transform) -> Self {
        Self { interval: Interval { lo, hi }, transform }
    }

    pub const fn plain(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, Transform::None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuadError {
    InvalidSpec(&'static str),
    InvalidInterval { lo: f64, hi: f64 },
    NonFinite { at: f64 },
    PanelsExhausted { value: f64, err_estimate: f64, panels: usize },
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidSpec(msg) => write!(f, "invalid quadrature spec: {msg}"),
            Self::InvalidInterval { lo, hi } => write!(f, "invalid interval [{lo}, {hi}]"),
            Self::NonFinite { at } => write!(f, "integrand not finite near x = {at}"),
            Self::PanelsExhausted { value, err_estimate, panels } => write!(
                f,
                "panels exhausted after {panels} panels: partial value {value:e} +/- {err_estimate:e}"
            ),
        }
    }
}

impl core::error::Error for QuadError {}

#[derive(Clone, Copy)]
struct Map {
    lo: f64,
    hi: f64,
    transform: Transform,
}

impl Map {
    fn new(seg: &Segment) -> Result<(Self, f64, f64), QuadError> {
        let Interval { lo, hi } = seg.interval;
        let bad = || QuadError::InvalidInterval { lo, hi };
        if lo.is_nan() || hi.is_nan() || hi < lo || !lo.is_finite() {
            return Err(bad());
        }
        let map = Self { lo, hi, transform: seg.transform };
        let (u0, u1) = match seg.transform {
            Transform::None => {
                if !hi.is_finite() {
                    return Err(bad());
                }
                (lo, hi)
            }
            Transform::SqrtEdge(_) => {
                if !hi.is_finite() {
                    return Err(bad());
                }
                (0.0, libm::sqrt(hi - lo))
            }
            Transform::ExpTail { scale } => {
                if !(scale > 0.0) {
                    return Err(QuadError::InvalidSpec("tail scale must be positive"));
                }
                let umin = if hi.is_finite() { libm::exp(-(hi - lo) / scale) } else { 0.0 };
                (umin, 1.0)
            }
            Transform::RationalTail { scale } => {
                if !(scale > 0.0) {
                    return Err(QuadError::InvalidSpec("tail scale must be positive"));
                }
                let umin = if hi.is_finite() { scale / (hi - lo + scale) } else { 0.0 };
                (umin, 1.0)
            }
        };
        Ok((map, u0, u1))
    }

    #[inline]
    fn apply(&self, u: f64) -> (f64, f64) {
        match self.transform {
            Transform::None => (u, 1.0),
            Transform::SqrtEdge(Side::Lower) => (self.lo + u * u, 2.0 * u),
            Transform::SqrtEdge(Side::Upper) => (self.hi - u * u, 2.0 * u),
            Transform::ExpTail { scale } => (self.lo - scale * libm::log(u), scale / u),
            Transform::RationalTail { scale } => {
                (self.lo + scale * (1.0 - u) / u, scale / (u * u))
            }
        }
    }
}

struct Panel {
    seg: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    seq: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Adaptive integral of `f` over one interval.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    f: F,
    interval: Interval,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadError> {
    let seg = Segment { interval, transform: spec.transform };
    integrate_segments(f, &[seg], spec)
}

/// Adaptive integral over a union of segments under one global error budget.
///
/// The transform carried by each segment takes precedence over `spec.transform`.
pub fn integrate_segments<F: FnMut(f64) -> f64>(
    mut f: F,
    segments: &[Segment],
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadError> {
    spec.validate()?;
    let mut maps = Vec::with_capacity(segments.len());
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut evaluations = 0usize;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;

    let mut eval_panel = |maps: &Vec<Map>, s: usize, a: f64, b: f64, evals: &mut usize| {
        let m = maps[s];
        let mut g = |u: f64| {
            let (x, jac) = m.apply(u);
            let v = f(x);
            if jac == 0.0 && v.is_finite() {
                0.0
            } else {
                v * jac
            }
        };
        *evals += 21;
        let est = gk21(&mut g, a, b);
        if est.finite {
            Ok(est)
        } else {
            Err(QuadError::NonFinite { at: m.apply(0.5 * (a + b)).0 })
        }
    };

    for (s, seg) in segments.iter().enumerate() {
        let (map, u0, u1) = Map::new(seg)?;
        maps.push(map);
        if u1 <= u0 {
            continue;
        }
        let est = eval_panel(&maps, s, u0, u1, &mut evaluations)?;
        value += est.value;
        err += est.err;
        heap.push(Panel { seg: s, a: u0, b: u1, value: est.value, err: est.err, seq });
        seq += 1;
    }

    loop {
        let total = value + frozen_value;
        let total_err = err + frozen_err;
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(Quadrature {
                value: total,
                err_estimate: total_err,
                panels: heap.len(),
                evaluations,
            });
        }
        let panels = heap.len();
        let exhausted = QuadError::PanelsExhausted { value: total, err_estimate: total_err, panels };
        if panels >= spec.max_panels {
            return Err(exhausted);
        }
        let Some(worst) = heap.pop() else {
            return Err(exhausted);
        };
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if !(mid > worst.a && mid < worst.b)
            || width <= 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
        {
            value -= worst.value;
            err -= worst.err;
            frozen_value += worst.value;
            frozen_err += worst.err;
            if heap.is_empty() {
                return Err(QuadError::PanelsExhausted {
                    value: value + frozen_value,
                    err_estimate: err + frozen_err,
                    panels,
                });
            }
            continue;
        }
        let left = eval_panel(&maps, worst.seg, worst.a, mid, &mut evaluations)?;
        let right = eval_panel(&maps, worst.seg, mid, worst.b, &mut evaluations)?;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(Panel { seg: worst.seg, a: worst.a, b: mid, value: left.value, err: left.err, seq });
        heap.push(Panel {
            seg: worst.seg,
            a: mid,
            b: worst.b,
            value: right.value,
            err: right.err,
            seq: seq + 1,
        });
        seq += 2;
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-13, 1e-14)
    }

    #[test]
    fn bose_log_tail_integral() {
        let s = spec().with_transform(Transform::ExpTail { scale: 1.0 });
        let q = integrate_adaptive(
            |x| libm::log1p(-libm::exp(-x)),
            Interval::new(0.0, f64::INFINITY),
            &s,
        )
        .unwrap();
        assert!((q.value + PI * PI / 6.0).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn inverse_sqrt_with_edge_substitution() {
        let s = spec().with_transform(Transform::SqrtEdge(Side::Lower));
        let q = integrate_adaptive(|x| 1.0 / libm::sqrt(x), Interval::new(0.0, 1.0), &s).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
        let s = spec().with_transform(Transform::SqrtEdge(Side::Upper));
        let q = integrate_adaptive(|x| 1.0 / libm::sqrt(1.0 - x), Interval::new(0.0, 1.0), &s)
            .unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_is_exact() {
        let c = 1.7;
        let q = integrate_adaptive(|_| c, Interval::new(0.0, PI), &spec()).unwrap();
        assert!((q.value - PI * c).abs() < 1e-14);
        assert_eq!(q.panels, 1);
    }

    #[test]
    fn rational_tail() {
        let s = spec().with_transform(Transform::RationalTail { scale: 1.0 });
        let q = integrate_adaptive(|x| 1.0 / (1.0 + x * x), Interval::new(0.0, f64::INFINITY), &s)
            .unwrap();
        assert!((q.value - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn segments_share_budget() {
        let segs = [
            Segment::new(0.0, 0.5, Transform::SqrtEdge(Side::Lower)),
            Segment::new(0.5, 1.0, Transform::SqrtEdge(Side::Upper)),
        ];
        let q = integrate_segments(
            |x| 1.0 / libm::sqrt(x * (1.0 - x)),
            &segs,
            &spec(),
        )
        .unwrap();
        assert!((q.value - PI).abs() < 1e-12);
    }

    #[test]
    fn unreachable_tolerance_exhausts_panels() {
        let s = QuadratureSpec::new(1e-16, 1e-300).with_max_panels(50);
        let r = integrate_adaptive(|x| libm::log(x), Interval::new(0.0, 1.0), &s);
        match r {
            Err(QuadError::PanelsExhausted { value, .. }) => assert!((value + 1.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate_adaptive(|x| 1.0 / (x - 0.5), Interval::new(0.0, 1.0), &spec());
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| libm::sin(30.0 * x) * libm::exp(-x);
        let a = integrate_adaptive(f, Interval::new(0.0, 10.0), &spec()).unwrap();
        let b = integrate_adaptive(f, Interval::new(0.0, 10.0), &spec()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.err_estimate.to_bits(), b.err_estimate.to_bits());
    }

    #[test]
    fn error_estimates_are_conservative() {
        let cases: [(fn(f64) -> f64, f64, f64, f64); 4] = [
            (|x| libm::exp(x), 0.0, 1.0, core::f64::consts::E - 1.0),
            (|x| libm::sqrt(x), 0.0, 1.0, 2.0 / 3.0),
            (|x| 1.0 / (1.0 + 100.0 * x * x), -1.0, 1.0, 2.0 * libm::atan(10.0) / 10.0),
            (|x| libm::cos(50.0 * x), 0.0, 1.0, libm::sin(50.0) / 50.0),
        ];
        for (f, a, b, exact) in cases {
            let s = QuadratureSpec::new(1e-6, 1e-12);
            let q = integrate_adaptive(f, Interval::new(a, b), &s).unwrap();
            let actual = (q.value - exact).abs();
            assert!(actual <= 2.0 * q.err_estimate.max(f64::EPSILON), "{actual} vs {}", q.err_estimate);
        }
    }
}
