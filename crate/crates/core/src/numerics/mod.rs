//! Shared numeric kernels.
//!
//! Adaptive Gauss–Kronrod quadrature with variable substitutions for
//! endpoint singularities and semi-infinite tails, bracketed root
//! refinement, and a few complex elementary functions with fixed
//! principal branches.

mod cplx;
mod kronrod;
mod quadrature;
mod roots;

pub use cplx::{clog1p, clog1p_neg_exp, expm1_neg};
pub use quadrature::{
    integrate_adaptive, integrate_segments, Interval, QuadError, Quadrature, QuadratureSpec,
    Segment, Side, Transform,
};
pub use roots::{brent, find_root_bracketed, Root, RootError, RootSpec};
