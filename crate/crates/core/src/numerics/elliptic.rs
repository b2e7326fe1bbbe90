//! Complete and incomplete elliptic integrals of the first kind and the
//! Jacobi functions sn, cn, dn for complex modulus.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Arithmetic-geometric mean with the "right" square root at every step
/// (the one closer to the arithmetic mean).
pub fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
    for _ in 0..200 {
        let an = 0.5 * (a + b);
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    0.5 * (a + b)
}

/// K(kappa) = int_0^1 dt / sqrt((1-t^2)(1-kappa^2 t^2)), branch equal to 1 at t = 0.
pub fn complete_elliptic_k(kappa: Complex64) -> Result<Complex64> {
    let kp2 = ONE - kappa * kappa;
    if kp2.norm() < 1e-14 {
        return Err(Error::BranchPoint(format!("modulus {kappa} at +-1")));
    }
    Ok(PI / (2.0 * agm(ONE, kp2.sqrt())))
}

/// Carlson's symmetric integral R_F(x, y, z) by duplication.
pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    let zeros = [x, y, z].iter().filter(|v| v.norm() == 0.0).count();
    if zeros > 1 {
        return Err(Error::BranchPoint("R_F with two vanishing arguments".into()));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..100 {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        let a = (x + y + z) / 3.0;
        let dx = (a - x) / a;
        let dy = (a - y) / a;
        let dz = (a - z) / a;
        let eps = dx.norm().max(dy.norm()).max(dz.norm());
        if eps < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let s = ONE - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0;
            return Ok(s / a.sqrt());
        }
    }
    Err(Error::Consistency("R_F duplication did not converge".into()))
}

/// F(phi, kappa) = int_0^{sin phi} dt / v(t), v(0) = 1, along the straight
/// segment (principal branches of the Carlson form).
pub fn incomplete_elliptic_f(phi: Complex64, kappa: Complex64) -> Result<Complex64> {
    let s = phi.sin();
    if s.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c2 = ONE - s * s;
    let d2 = ONE - kappa * kappa * s * s;
    if c2.norm() < 1e-15 || d2.norm() < 1e-15 {
        if c2.norm() < 1e-15 && d2.norm() > 1e-15 {
            return Ok(s * complete_elliptic_k(kappa)?);
        }
        return Err(Error::BranchPoint(format!("F at phi = {phi}")));
    }
    Ok(s * carlson_rf(c2, d2, ONE)?)
}

/// Jacobi theta functions with nome given through the lattice ratio tau.
struct Theta {
    tau: Complex64,
}

impl Theta {
    fn qpow(&self, e: f64) -> Complex64 {
        (I * PI * self.tau * e).exp()
    }
    fn all(&self, z: Complex64) -> [Complex64; 4] {
        let mut t1 = Complex64::new(0.0, 0.0);
        let mut t2 = Complex64::new(0.0, 0.0);
        let mut t3 = ONE;
        let mut t4 = ONE;
        for n in 0..60 {
            let nf = n as f64;
            let qh = self.qpow((nf + 0.5) * (nf + 0.5));
            let a = (2.0 * nf + 1.0) * z;
            let sg = if n % 2 == 0 { 1.0 } else { -1.0 };
            let d1 = 2.0 * sg * qh * a.sin();
            let d2 = 2.0 * qh * a.cos();
            t1 += d1;
            t2 += d2;
            let mut small = d1.norm() < 1e-18 * t1.norm().max(1e-300) && d2.norm() < 1e-18 * t2.norm();
            if n >= 1 {
                let qn = self.qpow(nf * nf);
                let b = 2.0 * qn * (2.0 * nf * z).cos();
                t3 += b;
                t4 += sg * b;
                small &= b.norm() < 1e-18 * t3.norm().min(t4.norm()).max(1e-300);
            }
            if n > 2 && small {
                break;
            }
        }
        [t1, t2, t3, t4]
    }
}

/// Jacobi elliptic functions for a fixed complex modulus.
#[derive(Debug, Clone)]
pub struct JacobiElliptic {
    kappa: Complex64,
    k: Complex64,
    kp: Complex64,
    /// Evaluate through the imaginary transformation when the direct nome is large.
    transformed: bool,
    tau: Complex64,
    th0: [Complex64; 4],
}

impl JacobiElliptic {
    pub fn new(kappa: Complex64) -> Result<Self> {
        let k = complete_elliptic_k(kappa)?;
        let kpm = (ONE - kappa * kappa).sqrt();
        let mut kp = complete_elliptic_k(kpm)?;
        if (I * kp / k).im < 0.0 {
            kp = -kp;
        }
        let tau_direct = I * kp / k;
        let tau_comp = I * k / kp;
        let transformed = tau_comp.im > tau_direct.im;
        let tau = if transformed { tau_comp } else { tau_direct };
        let th = Theta { tau };
        let th0 = th.all(Complex64::new(0.0, 0.0));
        let me = Self { kappa, k, kp, transformed, tau, th0 };
        Ok(me)
    }

    pub fn kappa(&self) -> Complex64 {
        self.kappa
    }
    /// Quarter period K.
    pub fn k(&self) -> Complex64 {
        self.k
    }
    /// Complementary quarter period K', signed so that Im(iK'/K) > 0.
    pub fn kp(&self) -> Complex64 {
        self.kp
    }

    /// (sn, cn, dn) from theta quotients, for the lattice stored in `self`.
    fn raw(&self, u: Complex64, kk: Complex64, kkp: Complex64) -> [Complex64; 3] {
        // reduce u modulo 2K and 2iK'
        let w1 = 2.0 * kk;
        let w2 = 2.0 * I * kkp;
        let det = w1.re * w2.im - w1.im * w2.re;
        let x = (u.re * w2.im - u.im * w2.re) / det;
        let y = (w1.re * u.im - w1.im * u.re) / det;
        let nx = x.round();
        let ny = y.round();
        let ur = u - w1 * nx - w2 * ny;
        let px = if (nx as i64).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let py = if (ny as i64).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let th = Theta { tau: self.tau };
        let z = PI * ur / (2.0 * kk);
        let [t1, t2, t3, t4] = th.all(z);
        let [_, a2, a3, a4] = self.th0;
        let sn = a3 / a2 * t1 / t4;
        let cn = a4 / a2 * t2 / t4;
        let dn = a4 / a3 * t3 / t4;
        [sn * px, cn * px * py, dn * py]
    }

    /// (sn u, cn u, dn u).
    pub fn sncndn(&self, u: Complex64) -> [Complex64; 3] {
        if !self.transformed {
            return self.raw(u, self.k, self.kp);
        }
        // complementary lattice: roles of K and K' exchanged
        let [s, c, d] = self.raw(I * u, self.kp, self.k);
        [-I * s / c, ONE / c, d / c]
    }

    pub fn sn(&self, u: Complex64) -> Complex64 {
        self.sncndn(u)[0]
    }
}

/// sn(u, kappa).
pub fn jacobi_sn(u: Complex64, kappa: Complex64) -> Result<Complex64> {
    Ok(JacobiElliptic::new(kappa)?.sn(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{integrate_interval, QuadratureConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn k_quad(kappa: Complex64) -> Complex64 {
        // t = sin(th) removes the endpoint singularity
        let cfg = QuadratureConfig::default();
        integrate_interval(
            |th| {
                let s = th.sin();
                ONE / (ONE - kappa * kappa * s * s).sqrt()
            },
            0.0,
            PI / 2.0,
            &cfg,
        )
        .unwrap()
    }

    #[test]
    fn k_at_zero() {
        assert!((complete_elliptic_k(c(0.0, 0.0)).unwrap() - PI / 2.0).norm() < 1e-15);
    }

    #[test]
    fn k_matches_quadrature() {
        for kap in [c(0.5, 0.0), c(0.3, 0.2), c(0.8, -0.4), c(0.1, 0.9)] {
            let a = complete_elliptic_k(kap).unwrap();
            let b = k_quad(kap);
            assert!((a - b).norm() < 1e-10 * b.norm(), "{kap}: {a} vs {b}");
        }
    }

    #[test]
    fn k_rejects_unit_modulus() {
        assert!(complete_elliptic_k(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn f_special_values() {
        let kap = c(0.5, 0.0);
        assert_eq!(incomplete_elliptic_f(c(0.0, 0.0), kap).unwrap(), c(0.0, 0.0));
        let kk = complete_elliptic_k(kap).unwrap();
        assert!((incomplete_elliptic_f(c(PI / 2.0, 0.0), kap).unwrap() - kk).norm() < 1e-13);
    }

    #[test]
    fn f_matches_path_quadrature() {
        let kap = c(0.5, 0.0);
        let phi = c(0.4, 0.1);
        let s = phi.sin();
        let cfg = QuadratureConfig::default();
        let q = integrate_interval(
            |u| {
                let t = s * u;
                s / ((ONE - t * t) * (ONE - kap * kap * t * t)).sqrt()
            },
            0.0,
            1.0,
            &cfg,
        )
        .unwrap();
        assert!((incomplete_elliptic_f(phi, kap).unwrap() - q).norm() < 1e-13);
    }

    #[test]
    fn sn_special_values() {
        for kap in [c(0.5, 0.0), c(0.3, 0.2), c(2.0, 1.0)] {
            let j = JacobiElliptic::new(kap).unwrap();
            assert!(j.sn(c(0.0, 0.0)).norm() < 1e-15);
            assert!((j.sn(j.k()) - 1.0).norm() < 1e-11, "{kap}: {}", j.sn(j.k()));
        }
    }

    #[test]
    fn sn_identities_and_periods() {
        for kap in [c(0.5, 0.0), c(0.3, 0.2), c(2.0, 1.0), c(0.05, -3.0)] {
            let j = JacobiElliptic::new(kap).unwrap();
            for u in [c(0.3, 0.1), c(-1.2, 0.7), c(2.5, -1.9)] {
                let [s, cc, d] = j.sncndn(u);
                assert!((s * s + cc * cc - 1.0).norm() < 1e-10);
                assert!((d * d + kap * kap * s * s - 1.0).norm() < 1e-10);
                let s4 = j.sn(u + 4.0 * j.k());
                let s2 = j.sn(u + 2.0 * I * j.kp());
                assert!((s - s4).norm() < 1e-9 * (1.0 + s.norm()));
                assert!((s - s2).norm() < 1e-9 * (1.0 + s.norm()));
            }
        }
    }

    #[test]
    fn sn_derivative_is_cn_dn() {
        let j = JacobiElliptic::new(c(0.7, 0.3)).unwrap();
        let u = c(0.4, 0.2);
        let h = 1e-5;
        let d = (j.sn(u + h) - j.sn(u - h)) / (2.0 * h);
        let [_, cn, dn] = j.sncndn(u);
        assert!((d - cn * dn).norm() < 1e-8);
    }
}
