//! Square roots continued analytically along straight segments.

use num_complex::Complex64;

use super::quad::gauss_legendre;
use crate::error::{Error, Result};

/// Pick the root of `radicand` nearest `prev`.
pub fn continue_sqrt(radicand: Complex64, prev: Complex64) -> Complex64 {
    let s = radicand.sqrt();
    if (s - prev).norm() <= (s + prev).norm() {
        s
    } else {
        -s
    }
}

/// Result of integrating along a segment while continuing a square root.
#[derive(Debug, Clone, Copy)]
pub struct ContinuedIntegral {
    pub value: Complex64,
    /// Continued root at the far endpoint.
    pub end_root: Complex64,
}

/// Integral of `h(z, s(z)) dz` along `z0 -> z1`, where `s` is the branch of
/// `sqrt(radicand)` continued from `s0` at `z0`. Panels are doubled until
/// two successive estimates agree to `tol`.
pub fn integrate_continued<R, H>(radicand: R, h: H, z0: Complex64, z1: Complex64, s0: Complex64, tol: f64) -> Result<ContinuedIntegral>
where
    R: Fn(Complex64) -> Complex64,
    H: Fn(Complex64, Complex64) -> Complex64,
{
    let (x, w) = gauss_legendre(20);
    let d = z1 - z0;
    let run = |panels: usize| -> (Complex64, Complex64) {
        let mut s = s0;
        let mut acc = Complex64::new(0.0, 0.0);
        let dh = 1.0 / panels as f64;
        for p in 0..panels {
            let a = p as f64 * dh;
            for (xi, wi) in x.iter().zip(&w) {
                let u = a + 0.5 * dh * (xi + 1.0);
                let z = z0 + d * u;
                s = continue_sqrt(radicand(z), s);
                acc += h(z, s) * (wi * 0.5 * dh);
            }
            s = continue_sqrt(radicand(z0 + d * (a + dh)), s);
        }
        (acc * d, s)
    };
    let mut panels = 4;
    let mut prev = run(panels);
    while panels < 1 << 14 {
        panels *= 2;
        let cur = run(panels);
        if (cur.0 - prev.0).norm() <= tol * (1.0 + cur.0.norm()) && (cur.1 - prev.1).norm() <= 1e-8 * (1.0 + cur.1.norm()) {
            return Ok(ContinuedIntegral { value: cur.0, end_root: cur.1 });
        }
        prev = cur;
    }
    Err(Error::NoConvergence { a: 0.0, b: 1.0, err: f64::NAN })
}

/// Root at `z1` obtained by continuing `s0` from `z0` along the segment.
pub fn continue_along<R: Fn(Complex64) -> Complex64>(radicand: R, z0: Complex64, z1: Complex64, s0: Complex64, steps: usize) -> Complex64 {
    let mut s = s0;
    for k in 1..=steps {
        s = continue_sqrt(radicand(z0 + (z1 - z0) * (k as f64 / steps as f64)), s);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sqrt_around_origin_changes_sign() {
        // half turn on each of two segments through the upper and lower half plane
        let r = |z: Complex64| z;
        let s = continue_along(r, c(1.0, 0.0), c(-1.0, 1e-9), c(1.0, 0.0), 4000);
        assert!((s - c(0.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn integral_of_inverse_root() {
        // d/dz 2 sqrt(z) = 1/sqrt(z)
        let r = integrate_continued(|z| z, |_, s| 1.0 / s, c(1.0, 0.0), c(4.0, 3.0), c(1.0, 0.0), 1e-13).unwrap();
        let expect = 2.0 * (c(4.0, 3.0).sqrt() - 1.0);
        assert!((r.value - expect).norm() < 1e-12);
        assert!((r.end_root - c(4.0, 3.0).sqrt()).norm() < 1e-12);
    }
}
