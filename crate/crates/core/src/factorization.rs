//! Wiener-Hopf factors `X(eta) = e^{psi1} [cosh(w psi2) I + sinh(w psi2)/w Q]`
//! of the symmetric-form matrix `Gamma`, and their checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::linalg::Mat2;
use crate::numerics::quad::{integrate_interval, integrate_to_infinity};
use crate::spectral_matrix::HalfPlane;
use crate::surface::{JacobiSolution, SurfaceData};

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Debug, Clone)]
pub struct FactorData {
    pub surf: SurfaceData,
    pub jac: JacobiSolution,
    /// Radius beyond which `psi2` uses the large-argument form.
    pub r_switch: f64,
}

pub fn build_factors(surf: &SurfaceData, jac: &JacobiSolution) -> Result<FactorData> {
    let r_switch = 4.0 * surf.a[3].norm().max(surf.st.k0.norm());
    let fac = FactorData { surf: surf.clone(), jac: jac.clone(), r_switch };
    let ov = fac.overlap_residual()?;
    if ov > 1e-7 {
        return Err(Error::Consistency(format!("psi2 forms disagree by {ov:.2e} in the overlap band")));
    }
    Ok(fac)
}

impl FactorData {
    pub fn psi1(&self, eta: C) -> C {
        let j = &self.jac;
        let mut v = 0.5 * (((eta - j.sigma1) / (eta - j.sigma0)).ln() + ((eta + j.sigma1) / (eta + j.sigma0)).ln());
        if let Some(r) = j.rho0 {
            v += 0.5 * self.surf.kappa0 as f64 * ((eta - r) / (eta + r)).ln();
        }
        v
    }

    /// Path and loop terms of `psi2` for a kernel `g(t)`.
    fn path_terms<G: Fn(C) -> C + Copy>(&self, g: G) -> Result<C> {
        let s = &self.surf;
        let j = &self.jac;
        let mut v = s.segment_integral(j.sigma0, j.sigma1, g, 1.0)?.0;
        if let Some(r) = j.rho0 {
            v += s.kappa0 as f64 * s.segment_integral(c(0.0, 0.0), r, g, 1.0)?.0;
        }
        if j.m0 != 0 {
            v += j.m0 as f64 * s.loop_a_with(g)?;
        }
        if j.n0 != 0 {
            v += j.n0 as f64 * s.loop_b_with(g, s.dir_b)?;
        }
        Ok(v)
    }

    pub fn psi2_direct(&self, eta: C) -> Result<C> {
        let e2 = eta * eta;
        let kern = move |t: C| t / (t * t - e2);
        Ok(self.surf.epsilon_integral_reaching(|t| kern(c(t, 0.0)), eta.norm())? + self.path_terms(kern)?)
    }

    /// The same function written with the kernel `t^3/(t^2 - eta^2)`, the
    /// inversion condition taken as exact. Subtracting the numerical closure
    /// instead would add `closure/eta^2`, which `sqrt_f` amplifies to
    /// `closure * eta^2` in `X`.
    pub fn psi2_large(&self, eta: C) -> Result<C> {
        let e2 = eta * eta;
        let kern = move |t: C| t * t * t / (t * t - e2);
        let v = self.surf.epsilon_integral_reaching(|t| kern(c(t, 0.0)), eta.norm())? + self.path_terms(kern)?;
        Ok(v / e2)
    }

    /// `psi2` off the real axis.
    pub fn psi2(&self, eta: C) -> Result<C> {
        if eta.norm() > self.r_switch {
            self.psi2_large(eta)
        } else {
            self.psi2_direct(eta)
        }
    }

    /// `epsilon/sqrt_f` extended oddly to the whole real line.
    fn g_odd(&self, t: f64) -> C {
        if t == 0.0 {
            return c(0.0, 0.0);
        }
        self.surf.epsilon(t) / self.surf.sqrt_f(c(t.abs(), 0.0))
    }

    /// One-sided limit of `psi2` at a real point: the epsilon term becomes a
    /// principal value plus half the residue.
    pub fn psi2_boundary(&self, x: f64, side: HalfPlane) -> Result<C> {
        let gx = self.g_odd(x);
        let h = |t: f64| if t == x { c(0.0, 0.0) } else { (self.g_odd(t) - gx / (1.0 + (t - x) * (t - x))) / (t - x) };
        let q = &self.surf.quad;
        let (lo, hi) = if x < 0.0 { (x, 0.0) } else { (0.0, x) };
        let scale = self.surf.st.k0.norm();
        let mut pv = integrate_interval(h, lo, hi, q)?;
        pv += integrate_to_infinity(h, hi, scale, q)?;
        pv += integrate_to_infinity(|u| h(-u), -lo, scale, q)?;
        let sgn = match side {
            HalfPlane::Upper => 1.0,
            HalfPlane::Lower => -1.0,
        };
        let eps_term = (pv + gx * c(0.0, PI * sgn)) / c(0.0, 4.0 * PI);
        let e2 = c(x * x, 0.0);
        Ok(eps_term + self.path_terms(move |t: C| t / (t * t - e2))?)
    }

    fn assemble(&self, eta: C, psi2: C, inverse: bool) -> Mat2 {
        let w = self.surf.sqrt_f(eta);
        let z = w * psi2;
        let q = self.surf.st.q_at(eta);
        let s = if inverse { -1.0 } else { 1.0 };
        let e = (self.psi1(eta) * s).exp();
        (Mat2::identity() * z.cosh() + q * (z.sinh() * s / w)) * e
    }

    /// `X` off the real axis (the `+` factor above it, the `-` factor below).
    pub fn x(&self, eta: C) -> Result<Mat2> {
        Ok(self.assemble(eta, self.psi2(eta)?, false))
    }

    pub fn x_inv(&self, eta: C) -> Result<Mat2> {
        Ok(self.assemble(eta, self.psi2(eta)?, true))
    }

    pub fn x_boundary(&self, x: f64, side: HalfPlane) -> Result<Mat2> {
        Ok(self.assemble(c(x, 0.0), self.psi2_boundary(x, side)?, false))
    }

    pub fn x_boundary_inv(&self, x: f64, side: HalfPlane) -> Result<Mat2> {
        Ok(self.assemble(c(x, 0.0), self.psi2_boundary(x, side)?, true))
    }

    fn on_side(&self, eta: C, side: HalfPlane, inverse: bool) -> Result<Mat2> {
        let tiny = 1e-14 * (1.0 + eta.norm());
        let ok = match side {
            HalfPlane::Upper => eta.im > tiny,
            HalfPlane::Lower => eta.im < -tiny,
        };
        if eta.im.abs() <= tiny {
            let p = self.psi2_boundary(eta.re, side)?;
            return Ok(self.assemble(c(eta.re, 0.0), p, inverse));
        }
        if !ok {
            return Err(Error::Singular(format!("factor requested on the wrong side at {eta}")));
        }
        Ok(self.assemble(eta, self.psi2(eta)?, inverse))
    }

    pub fn x_plus(&self, eta: C) -> Result<Mat2> {
        self.on_side(eta, HalfPlane::Upper, false)
    }
    pub fn x_minus(&self, eta: C) -> Result<Mat2> {
        self.on_side(eta, HalfPlane::Lower, false)
    }
    pub fn x_plus_inv(&self, eta: C) -> Result<Mat2> {
        self.on_side(eta, HalfPlane::Upper, true)
    }
    pub fn x_minus_inv(&self, eta: C) -> Result<Mat2> {
        self.on_side(eta, HalfPlane::Lower, true)
    }

    /// Points where `X` or its inverse may be singular.
    pub fn exceptional_points(&self) -> Vec<C> {
        let j = &self.jac;
        let mut v = vec![j.sigma0, -j.sigma0, j.sigma1, -j.sigma1];
        if let Some(r) = j.rho0 {
            v.extend([r, -r]);
        }
        v
    }

    /// Largest disagreement of the two `psi2` forms on `3|k0| < |eta| < 6|k0|`.
    pub fn overlap_residual(&self) -> Result<f64> {
        let k = self.surf.st.k0.norm();
        let mut worst: f64 = 0.0;
        for j in 0..6 {
            let r = k * (3.2 + 0.5 * j as f64);
            let eta = C::from_polar(r, 0.3 + 0.4 * j as f64);
            let (a, b) = (self.psi2_direct(eta)?, self.psi2_large(eta)?);
            worst = worst.max((a - b).norm() / a.norm().max(1e-300));
        }
        Ok(worst)
    }

    pub fn evenness_residual(&self, pts: &[C]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &e in pts {
            let (a, b) = (self.psi2(e)?, self.psi2(-e)?);
            worst = worst.max((a - b).norm() / a.norm().max(1e-300));
        }
        Ok(worst)
    }

    /// `|psi1 + w psi2|` along a ray out to `1e6 |k0|`.
    pub fn exponent_at_infinity(&self) -> Result<Vec<(f64, f64)>> {
        let k = self.surf.st.k0.norm();
        let dir = C::from_polar(1.0, 0.7);
        (1..=6)
            .map(|p| {
                let r = k * 10f64.powi(p);
                let eta = dir * r;
                Ok((r, (self.psi1(eta) + self.surf.sqrt_f(eta) * self.psi2(eta)?).norm()))
            })
            .collect()
    }
}

/// Residuals of the splitting on a real grid.
#[derive(Debug, Clone, Copy, Default)]
pub struct FactorizationReport {
    /// `max |Gamma - X+ (X-)^{-1}|` relative.
    pub gamma: f64,
    /// Same for `G` with the scalar and polynomial factors restored.
    pub g_split: f64,
    /// `chi+/chi-` against the eigenvalue `lambda1`.
    pub scalar_jump: f64,
}

pub fn factorization_residual(fac: &FactorData, grid: &[f64]) -> Result<FactorizationReport> {
    let st = &fac.surf.st;
    let mut rep = FactorizationReport::default();
    for &x in grid {
        let e = c(x, 0.0);
        let xp = fac.x_boundary(x, HalfPlane::Upper)?;
        let xmi = fac.x_boundary_inv(x, HalfPlane::Lower)?;
        let prod = xp * xmi;
        rep.gamma = rep.gamma.max(st.eval_gamma(e)?.rel_dist(&prod));
        let rp = st.split_rho(e, HalfPlane::Upper);
        let rm = st.split_rho(e, HalfPlane::Lower);
        let g = st.g1_at(e) * prod * (st.delta_star * rp / (rm * st.delta0.eval(e)));
        rep.g_split = rep.g_split.max(st.eval_g(e)?.rel_dist(&g));
        let w = fac.surf.sqrt_f(e);
        let chi = |side| -> Result<C> { Ok((fac.psi1(e) + w * fac.psi2_boundary(x, side)?).exp()) };
        let ratio = chi(HalfPlane::Upper)? / chi(HalfPlane::Lower)?;
        let (b, cc) = st.b_c(e);
        let lam = (b + cc * w) / st.sqrt_delta(e);
        rep.scalar_jump = rep.scalar_jump.max((ratio - lam).norm() / lam.norm());
    }
    Ok(rep)
}

/// Boundary values recovered from `x +- i delta` by Richardson extrapolation
/// compared with the one-sided formula.
pub fn approach_residual(fac: &FactorData, xs: &[f64]) -> Result<f64> {
    let k = fac.surf.st.k0.norm();
    let ds = [1e-4 * k, 5e-5 * k, 2.5e-5 * k];
    let mut worst: f64 = 0.0;
    for &x in xs {
        for (side, s) in [(HalfPlane::Upper, 1.0), (HalfPlane::Lower, -1.0)] {
            let v: Vec<C> = ds.iter().map(|d| fac.psi2(c(x, s * d))).collect::<Result<_>>()?;
            // error expansion in powers of delta, ratio 2
            let r1 = [2.0 * v[1] - v[0], 2.0 * v[2] - v[1]];
            let lim = (4.0 * r1[1] - r1[0]) / 3.0;
            let exact = fac.psi2_boundary(x, side)?;
            worst = worst.max((lim - exact).norm() / exact.norm().max(1e-300));
        }
    }
    Ok(worst)
}

/// `[X-(-eta)]^{-1} G1(eta) X+(eta)` against `((eta-rho0)/(eta+rho0))^kappa0 G1(eta)`.
pub fn kernel_identity_residual(fac: &FactorData, pts: &[C]) -> Result<f64> {
    let st = &fac.surf.st;
    let mut worst: f64 = 0.0;
    for &e in pts {
        let lhs = fac.x_inv(-e)? * st.g1_at(e) * fac.x(e)?;
        let mut s = c(1.0, 0.0);
        if let Some(r) = fac.jac.rho0 {
            s = ((e - r) / (e + r)).powi(fac.surf.kappa0);
        }
        worst = worst.max(lhs.rel_dist(&(st.g1_at(e) * s)));
    }
    Ok(worst)
}

/// Random upper half-plane points with `|eta|` comparable to `|k0|`.
pub fn upper_points(fac: &FactorData, n: usize, seed: u64) -> Vec<C> {
    let k = fac.surf.st.k0.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let avoid = fac.exceptional_points();
    let mut v = Vec::with_capacity(n);
    while v.len() < n {
        let e = c(rng.random_range(-2.0..2.0), rng.random_range(0.1..2.0)) * k;
        if avoid.iter().chain(fac.surf.a.iter()).all(|p| (e - p).norm() > 0.1 * k) {
            v.push(e);
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    Pole,
    Regular,
}

/// Local behaviour of `X` and `X^{-1}` at an exceptional point.
#[derive(Debug, Clone)]
pub struct ExceptionalPoint {
    pub at: C,
    pub x: Singularity,
    pub x_inv: Singularity,
    /// Fitted growth exponents of `|X|` and `|X^{-1}|`.
    pub slopes: (f64, f64),
    /// `det((eta - at) X) / |(eta - at) X|^2` nearest the point; small when
    /// the leading coefficient has rank one.
    pub rank_defect: f64,
    /// `Y = (I + Q/w)/2` at the point, with `w` the value of `sqrt(f)` on
    /// the sheet of the point (the fixed branch for `rho0`).
    pub y: Mat2,
}

fn classify(slope: f64) -> Result<Singularity> {
    if (-1.5..=-0.5).contains(&slope) {
        Ok(Singularity::Pole)
    } else if slope > -0.25 {
        Ok(Singularity::Regular)
    } else {
        Err(Error::Consistency(format!("ambiguous growth exponent {slope:.3}")))
    }
}

pub fn exceptional_behavior(fac: &FactorData) -> Result<Vec<ExceptionalPoint>> {
    let s = &fac.surf;
    let j = &fac.jac;
    let k = s.st.k0.norm();
    let mut pts = vec![(j.sigma0, j.xi0), (-j.sigma0, j.xi0), (j.sigma1, j.xi1), (-j.sigma1, j.xi1)];
    if let Some(r) = j.rho0 {
        pts.push((r, s.sqrt_f(r)));
        pts.push((-r, s.sqrt_f(r)));
    }
    let seg = j.sigma1 - j.sigma0;
    let dir = c(0.0, 1.0) * seg / seg.norm();
    let mut out = Vec::new();
    for (at, w) in pts {
        let ds: Vec<f64> = (0..5).map(|p| 1e-3 * k * 0.5f64.powi(p)).collect();
        let mut lx = Vec::new();
        let mut li = Vec::new();
        let mut rank_defect = 0.0;
        for &d in &ds {
            let e = at + dir * d;
            let m = fac.x(e)?;
            lx.push(m.max_abs().ln());
            li.push(fac.x_inv(e)?.max_abs().ln());
            let sm = m * c(d, 0.0);
            rank_defect = sm.det().norm() / sm.max_abs().powi(2).max(1e-300);
        }
        let slope = |v: &[f64]| {
            let n = v.len() as f64;
            let xs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = v.iter().sum::<f64>() / n;
            let num: f64 = xs.iter().zip(v).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            num / den
        };
        let (sx, si) = (slope(&lx), slope(&li));
        let y = (Mat2::identity() + s.st.q_at(at) * (1.0 / w)) * c(0.5, 0.0);
        out.push(ExceptionalPoint { at, x: classify(sx)?, x_inv: classify(si)?, slopes: (sx, si), rank_defect, y });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use crate::problem::build_problem;
    use crate::spectral_matrix::build_structural;
    use crate::surface::{build_surface, jacobi_inversion, Seeds, SurfaceConfig};

    fn fac(label: &str) -> FactorData {
        let p = build_problem(&preset(label).unwrap().raw(PI / 3.0, c(1.0, 0.0), c(0.0, 0.0))).unwrap();
        let st = build_structural(&p).unwrap();
        let s = build_surface(&st, &SurfaceConfig::default()).unwrap();
        let j = jacobi_inversion(&s, &[p.eta0, p.eta_hat0], &Seeds::default()).unwrap();
        build_factors(&s, &j).unwrap()
    }

    #[test]
    fn inverse_and_evenness() {
        let f = fac("2a");
        for e in upper_points(&f, 10, 3) {
            let m = f.x(e).unwrap() * f.x_inv(e).unwrap();
            assert!(m.rel_dist(&Mat2::identity()) < 1e-10);
        }
        assert!(f.evenness_residual(&upper_points(&f, 5, 4)).unwrap() < 1e-10);
    }

    #[test]
    fn splitting_fig2a() {
        let f = fac("2a");
        let k = f.surf.st.k0.norm();
        let grid: Vec<f64> = (0..40).map(|j| k * (-5.0 + 10.0 * (j as f64 + 0.5) / 40.0)).collect();
        let r = factorization_residual(&f, &grid).unwrap();
        assert!(r.gamma < 1e-6 && r.g_split < 1e-6 && r.scalar_jump < 1e-7, "{r:?}");
        assert!(kernel_identity_residual(&f, &upper_points(&f, 10, 9)).unwrap() < 1e-7);
    }

    #[test]
    fn rank_one_leading_terms() {
        let f = fac("2a");
        for p in exceptional_behavior(&f).unwrap() {
            assert!(p.y.det().norm() < 1e-10 * p.y.max_abs().powi(2).max(1.0));
            assert!(p.x == Singularity::Pole || p.x_inv == Singularity::Pole, "{p:?}");
        }
    }
}
