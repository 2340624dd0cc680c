//! Complex helpers with principal branches.

use num_complex::Complex64;

/// `ln(1 + z)` accurate for small `|z|`.
pub fn clog1p(z: Complex64) -> Complex64 {
    let re = 0.5 * libm::log1p(2.0 * z.re + z.norm_sqr());
    let im = libm::atan2(z.im, 1.0 + z.re);
    Complex64::new(re, im)
}

/// `e^{−z} − 1` accurate for small `|z|`.
pub fn expm1_neg(z: Complex64) -> Complex64 {
    let x = -z.re;
    let y = -z.im;
    let em1 = libm::expm1(x);
    let (s, c) = libm::sincos(y);
    let half = libm::sin(0.5 * y);
    let cm1 = -2.0 * half * half;
    Complex64::new(em1 * c + cm1, (em1 + 1.0) * s)
}

/// `ln(1 − e^{−z})`, principal branch.
pub fn clog1p_neg_exp(z: Complex64) -> Complex64 {
    if z.re > 0.7 {
        let w = (-z).exp();
        clog1p(-w)
    } else {
        (-expm1_neg(z)).ln()
    }
}
