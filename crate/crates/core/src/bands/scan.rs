//! Level-crossing scan for `|h| = 1` on a real line.
//!
//! The line is cut into grid cells; each cell is split at interior critical
//! points of `h` so that `h` is monotone on every piece, and the crossings
//! of `h = ±1` are then refined on those pieces.

use alloc::vec::Vec;

use super::BandError;
use crate::numerics::{find_root_bracketed, RootSpec};

/// Scaled sample: the true value is `h·e^{log_scale}` and likewise for `dh`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Sample {
    pub h: f64,
    pub dh: f64,
    pub log_scale: f64,
}

impl Sample {
    /// Sign-preserving proxy for `|h_true| − 1`.
    pub fn excess(&self) -> f64 {
        self.h.abs() - libm::exp(-self.log_scale)
    }

    pub fn level(&self, sign: f64) -> f64 {
        self.h - sign * libm::exp(-self.log_scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum EventKind {
    /// `|h|` passes through 1.
    Crossing,
    /// `|h|` reaches 1 from inside the allowed set without leaving it.
    Touch,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Event {
    pub x: f64,
    pub kind: EventKind,
}

pub(crate) const TOUCH_TOL: f64 = 1e-9;

fn root_tol(x: f64) -> f64 {
    1e-13 * x.abs().max(1.0)
}

fn refine<F>(f: &F, lo: f64, hi: f64, pick: impl Fn(&Sample) -> f64) -> Result<f64, BandError>
where
    F: Fn(f64) -> Result<Sample, BandError>,
{
    let g = |x: f64| f(x).map(|s| pick(&s)).unwrap_or(f64::NAN);
    find_root_bracketed(g, &RootSpec::new(lo, hi, root_tol(hi))).map_err(BandError::Root)
}

fn crossings_on_monotone<F>(
    f: &F,
    (xa, sa): (f64, Sample),
    (xb, sb): (f64, Sample),
    out: &mut Vec<Event>,
) -> Result<(), BandError>
where
    F: Fn(f64) -> Result<Sample, BandError>,
{
    let mut found = Vec::new();
    for sign in [1.0, -1.0] {
        let ga = sign * sa.level(sign);
        let gb = sign * sb.level(sign);
        if (ga > 0.0) == (gb > 0.0) {
            continue;
        }
        let x = refine(f, xa, xb, |s| s.level(sign))?;
        found.push(x);
    }
    found.sort_by(f64::total_cmp);
    out.extend(found.into_iter().map(|x| Event { x, kind: EventKind::Crossing }));
    Ok(())
}

/// Scans `[lo, hi]` with cells of width `step` and returns events in order.
///
/// With `extend_open`, scanning continues past `hi` until the allowed set
/// closes, so the last band has a well-defined upper edge.
pub(crate) fn scan<F>(
    f: &F,
    lo: f64,
    hi: f64,
    step: f64,
    extend_open: bool,
) -> Result<(bool, Vec<Event>), BandError>
where
    F: Fn(f64) -> Result<Sample, BandError>,
{
    let mut events: Vec<Event> = Vec::new();
    let first = f(lo)?;
    let allowed_at_start = first.excess() <= 0.0;
    let mut x0 = lo;
    let mut s0 = first;
    let mut j = 0usize;
    let max_extra = 1 + (64.0 * (hi - lo).max(1.0) / step) as usize;
    let mut extra = 0usize;
    loop {
        j += 1;
        let x1 = lo + step * j as f64;
        if x1 > hi {
            let crossings = events.iter().filter(|e| e.kind == EventKind::Crossing).count();
            let open = allowed_at_start ^ (crossings % 2 == 1);
            let closed = events.last().is_some_and(|e| e.x >= hi);
            if !extend_open || !open || closed || extra > max_extra {
                break;
            }
            extra += 1;
        }
        let s1 = f(x1)?;
        scan_cell(f, (x0, s0), (x1, s1), &mut events)?;
        x0 = x1;
        s0 = s1;
    }
    Ok((allowed_at_start, events))
}

fn scan_cell<F>(
    f: &F,
    (xa, sa): (f64, Sample),
    (xb, sb): (f64, Sample),
    events: &mut Vec<Event>,
) -> Result<(), BandError>
where
    F: Fn(f64) -> Result<Sample, BandError>,
{
    let da = sa.dh;
    let db = sb.dh;
    if da != 0.0 && db != 0.0 && (da > 0.0) != (db > 0.0) {
        let c = refine(f, xa, xb, |s| s.dh)?;
        let sc = f(c)?;
        crossings_on_monotone(f, (xa, sa), (c, sc), events)?;
        let ex = sc.excess() * libm::exp(sc.log_scale);
        if ex <= 0.0 && ex > -TOUCH_TOL {
            events.push(Event { x: c, kind: EventKind::Touch });
        }
        crossings_on_monotone(f, (c, sc), (xb, sb), events)?;
    } else {
        let xm = 0.5 * (xa + xb);
        let sm = f(xm)?;
        let (ta, tm, tb) = (true_h(&sa), true_h(&sm), true_h(&sb));
        let slack = 1e-12 * (ta.abs() + tb.abs() + 1.0);
        if tm > ta.max(tb) + slack || tm < ta.min(tb) - slack {
            return Err(BandError::ScanResolutionExceeded { at: xm });
        }
        crossings_on_monotone(f, (xa, sa), (xb, sb), events)?;
    }
    Ok(())
}

fn true_h(s: &Sample) -> f64 {
    s.h * libm::exp(s.log_scale.min(700.0))
}

/// Allowed intervals assembled from the scan events.
pub(crate) fn intervals(lo: f64, allowed_at_start: bool, events: &[Event]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut allowed = allowed_at_start;
    let mut start = lo;
    for e in events {
        match e.kind {
            EventKind::Crossing => {
                if allowed {
                    if e.x > start {
                        out.push((start, e.x));
                    }
                } else {
                    start = e.x;
                }
                allowed = !allowed;
            }
            EventKind::Touch => {
                if allowed && e.x - start > root_tol(e.x) * 10.0 {
                    out.push((start, e.x));
                    start = e.x;
                }
            }
        }
    }
    if allowed {
        out.push((start, f64::INFINITY));
    }
    out
}
