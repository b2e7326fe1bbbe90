//! Polynomials and matrices attached to the coefficient `G(eta)` of the
//! vector Riemann-Hilbert problem.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::roots::{poly_roots, root_residual};
use crate::numerics::Mat2;
use crate::problem::WedgeProblem;

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Complex polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|v| v.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(c(0.0, 0.0));
        }
        Poly { coeffs }
    }
    pub fn constant(v: C) -> Self {
        Poly::new(vec![v])
    }
    pub fn x() -> Self {
        Poly::new(vec![c(0.0, 0.0), c(1.0, 0.0)])
    }
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn eval(&self, z: C) -> C {
        self.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a)
    }
    pub fn deriv(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(c(0.0, 0.0));
        }
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect())
    }
    pub fn scale(&self, s: C) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * s).collect())
    }
    /// `p(-x)`.
    pub fn reflect(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().map(|(k, a)| if k % 2 == 1 { -a } else { *a }).collect())
    }
    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(c(1.0, 0.0)), |acc, _| &acc * self)
    }
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
    pub fn roots(&self) -> Result<Vec<C>> {
        poly_roots(&self.coeffs)
    }
    /// Coefficient-wise distance relative to the larger polynomial.
    pub fn rel_diff(&self, o: &Poly) -> f64 {
        let d = self - o;
        d.max_coeff() / self.max_coeff().max(o.max_coeff()).max(1e-300)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeffs.get(k).copied().unwrap_or_default() + o.coeffs.get(k).copied().unwrap_or_default()).collect())
    }
}
impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}
impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(c(-1.0, 0.0))
    }
}
impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = vec![c(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        &self + &o
    }
}
impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        &self - &o
    }
}
impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}
impl Mul<C> for Poly {
    type Output = Poly;
    fn mul(self, s: C) -> Poly {
        self.scale(s)
    }
}

fn k(v: C) -> Poly {
    Poly::constant(v)
}

/// Half-plane of a root, decided outside a thin band around the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

/// Location of the two zeros of `delta0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Both zeros in the lower half-plane; `kappa = 1`.
    I,
    /// One zero in each half-plane; `kappa = 0`.
    II,
    /// Both zeros in the upper half-plane; `kappa = -1`.
    III,
}

impl CaseTag {
    pub fn kappa(self) -> i32 {
        match self {
            CaseTag::I => 1,
            CaseTag::II => 0,
            CaseTag::III => -1,
        }
    }
    pub fn label(self) -> &'static str {
        match self {
            CaseTag::I => "i",
            CaseTag::II => "ii",
            CaseTag::III => "iii",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StructuralData {
    pub k0: C,
    pub cb: f64,
    pub sb: f64,
    pub g1p: C,
    pub g4p: C,
    pub g1m: C,
    pub g4m: C,
    pub delta0: Poly,
    pub delta0_hat: Poly,
    /// `det G1`, by polynomial arithmetic.
    pub d1: Poly,
    /// `d1` from its closed-form even coefficients.
    pub d1_closed: Poly,
    pub l: Poly,
    pub m: Poly,
    pub n: Poly,
    pub r: Poly,
    /// Characteristic polynomial from the closed-form `h0..h4`.
    pub f: Poly,
    /// `l^2 + m n`.
    pub f_brute: Poly,
    /// Coefficients `h0..h4` of `f` in the variable `eta^2`.
    pub h: [C; 5],
    pub g1: [[Poly; 2]; 2],
    pub delta_star: C,
    pub gamma_hat: C,
    pub tau_roots: Vec<(C, HalfPlane)>,
    /// The zeros of `delta0` reflected into the upper half-plane.
    pub taus: [C; 2],
    pub t_roots: [C; 2],
    pub case_tag: CaseTag,
    pub kappa: i32,
    pub f_residual: f64,
    pub d1_residual: f64,
}

fn hcoef(p: &WedgeProblem) -> [C; 5] {
    let (g1p, g4p, g1m, g4m) = (p.g1p, p.g4p, p.g1m, p.g4m);
    let cb = p.cos_beta();
    let sb = p.sin_beta();
    let k0 = p.k0;
    let c2b = (2.0 * p.beta).cos();
    let k2 = k0 * k0;
    let u1 = g1p * g1p - k2;
    let u2 = g4p * g4p - k2;
    let u3 = g1m * g4m + k2 * cb * cb;
    let u4p = g1p * g1p + g4p * g4p;
    let u4m = g1m * g1m + g4m * g4m;
    let h0 = -4.0 * u1 * u2 * u3 * u3;
    let h4 = c(-4.0 * sb.powi(8), 0.0);
    let h1 = 4.0 * (g1m - g4m).powi(2) * u1 * u2 + (g1p - g4p).powi(2) * (2.0 * g1m * g4m - 3.0 * k2 + k2 * c2b).powi(2) * cb * cb
        - 2.0 * u3 * (u2 * ((g1m * g4m - g1p * g1p) * (c2b + 3.0) + 2.0 * k2 * sb.powi(4)) + u1 * ((g1m * g4m - g4p * g4p) * (c2b + 3.0) + 2.0 * k2 * sb.powi(4)));
    let h2 = 4.0 * u4p * u4m + 8.0 * (g1m * g4m * u4p + g1p * g4p * u4m) * cb * cb + 8.0 * g1m * g1p * g4m * g4p * cb * cb * (c2b - 3.0)
        - ((g1m * g4m).powi(2) + (g1p * g4p).powi(2)) * (c2b + 3.0).powi(2)
        + 2.0
            * k2
            * sb
            * sb
            * (-u4p * (3.0 * c2b + 1.0) + 2.0 * cb * cb * (-2.0 * g1p * g4p * (c2b - 3.0) + g1m * g4m * (c2b + 3.0)) - 4.0 * u4m - 2.0 * k2 * sb * sb * (1.0 + cb.powi(4)));
    let h3 = 4.0 * sb.powi(4) * (u4m - u4p + 2.0 * (g1m * g4m - g1p * g4p) * cb * cb + 2.0 * k2 * sb.powi(4));
    [h0, h1, h2, h3, h4]
}

/// The quartic `m(eta)`; `n` follows by swapping the face-1 and face-4
/// parameters and negating.
fn m_poly(k0: C, beta: f64, _g1p: C, g4p: C, g1m: C, g4m: C) -> Poly {
    let x = Poly::x();
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x4 = &x2 * &x2;
    let k2 = k0 * k0;
    let c2b = (2.0 * beta).cos();
    let c4b = (4.0 * beta).cos();
    let dg = g1m - g4m;
    let w = g4p * g4p - k2;
    let mut p = x4.scale(c(-0.75, 0.0));
    p = p + x3.scale(dg);
    p = p + x.scale(2.0 * dg * w);
    p = p + k(w * (2.0 * g1m * g4m + k2));
    p = p + x2.scale(0.75 * (4.0 * g1m * g4m - 4.0 * g4p * g4p + k2));
    p = p - (&x2 * &(&x2 - &k(k2))).scale(c(0.25 * c4b, 0.0));
    let brace = x4.clone() - x3.scale(dg) + x2.scale(g1m * g4m - g4p * g4p - k2) + k(k2 * w);
    p + brace.scale(c(c2b, 0.0))
}

fn l_poly(p: &WedgeProblem) -> Poly {
    let x = Poly::x();
    let x2 = &x * &x;
    let cb = p.cos_beta();
    let c2b = (2.0 * p.beta).cos();
    let k2 = p.k0 * p.k0;
    let d = p.g1p - p.g4p;
    let inner = x2.scale(d) - x.scale(2.0 * (p.g1m - p.g4m) * (p.g1p + p.g4p)) + k(d * (2.0 * p.g1m * p.g4m - 3.0 * k2)) - (&x2 - &k(k2)).scale(d * c2b);
    x.scale(c(cb, 0.0)) * inner
}

fn r_poly(p: &WedgeProblem) -> Poly {
    let x = Poly::x();
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let k2 = p.k0 * p.k0;
    let c2b = (2.0 * p.beta).cos();
    let c4b = (4.0 * p.beta).cos();
    let (g1m, g4m) = (p.g1m, p.g4m);
    let first = x2.scale(c(c2b - 1.0, 0.0)) + k(2.0 * (p.g1p * p.g4p + k2));
    let e = &x2 - &k(k2);
    let second = x4.scale(c(3.0, 0.0)) - x2.scale(8.0 * (g1m * g1m + g1m * g4m + g4m * g4m) - 2.0 * k2) + k(8.0 * g1m * g1m * g4m * g4m + 8.0 * g1m * g4m * k2 + 3.0 * k2 * k2)
        - (&e * &(&x2 + &k(2.0 * g1m * g4m + k2))).scale(c(4.0 * c2b, 0.0))
        + (&e * &e).scale(c(c4b, 0.0));
    (first * second).scale(c(0.0, 1.0 / 16.0) * (p.g1p + p.g4p))
}

fn g1_polys(p: &WedgeProblem) -> [[Poly; 2]; 2] {
    let x = Poly::x();
    let x2 = &x * &x;
    let cb = p.cos_beta();
    let sb = p.sin_beta();
    let k2 = p.k0 * p.k0;
    let g = p.g1p + p.g4p;
    let base = k(k2 * cb * cb + p.g1m * p.g4m) - x2.scale(c(sb * sb, 0.0));
    let lin = x.scale(p.g1m - p.g4m);
    let i = c(0.0, 1.0);
    let g11 = (&base - &lin).scale(-i * g);
    let g22 = (&base + &lin).scale(-i * g);
    let g12 = x.scale(-2.0 * i * cb * (p.g1m * p.g4m - p.g4p * p.g4p - k2 * sb * sb));
    let g21 = x.scale(2.0 * i * cb * (p.g1m * p.g4m - p.g1p * p.g1p - k2 * sb * sb));
    [[g11, g12], [g21, g22]]
}

fn d1_closed(p: &WedgeProblem) -> Poly {
    let cb = p.cos_beta();
    let sb = p.sin_beta();
    let k2 = p.k0 * p.k0;
    let c2b = (2.0 * p.beta).cos();
    let (g1p, g4p, g1m, g4m) = (p.g1p, p.g4p, p.g1m, p.g4m);
    let g2 = (g1p + g4p).powi(2);
    let a0 = -g2 * (g1m * g4m + k2 * cb * cb).powi(2);
    let a2 = -g2 * sb.powi(4);
    let brace = -4.0 * (g1m * g4m).powi(2) - (2.0 * g1p * g4p - k2).powi(2)
        + 2.0 * g1m * g4m * ((g1p - g4p).powi(2) + 2.0 * k2)
        + 2.0 * k2 * (g1p * g1p - 2.0 * g1m * g4m + g4p * g4p + k2) * c2b
        - k2 * k2 * c2b * c2b;
    let a1 = g2 * (g1m * g1m + g4m * g4m - 2.0 * k2 * cb.powi(4)) + brace * cb * cb;
    Poly::new(vec![a0, c(0.0, 0.0), a1, c(0.0, 0.0), a2])
}

/// `delta0(eta) = (eta^2 - k0^2) cos^2 beta - (eta - g1m)(eta - g4m)`.
pub fn delta0_poly(k0: C, cb: f64, g1m: C, g4m: C) -> Poly {
    Poly::new(vec![-k0 * k0 * cb * cb - g1m * g4m, g1m + g4m, c(cb * cb - 1.0, 0.0)])
}

/// Classify the zeros of `delta0` by half-plane.
pub fn classify_case(delta0: &Poly, k0: C) -> Result<(CaseTag, Vec<(C, HalfPlane)>)> {
    let roots = delta0.roots()?;
    if roots.len() != 2 {
        return Err(Error::Degenerate(format!("delta0 has {} zeros, expected 2", roots.len())));
    }
    let band = 1e-9 * k0.norm();
    let mut out = Vec::new();
    for z in roots {
        if z.im.abs() <= band {
            return Err(Error::Degenerate(format!("zero {z} of delta0 lies on the real axis")));
        }
        out.push((z, if z.im > 0.0 { HalfPlane::Upper } else { HalfPlane::Lower }));
    }
    let up = out.iter().filter(|r| r.1 == HalfPlane::Upper).count();
    let tag = match up {
        0 => CaseTag::I,
        1 => CaseTag::II,
        _ => CaseTag::III,
    };
    Ok((tag, out))
}

/// Principal root of `eta^2 - k0^2`; `Re zeta >= 0`, `zeta(0) = -i k0`.
pub fn zeta(k0: C, eta: C) -> C {
    (eta * eta - k0 * k0).sqrt()
}

pub fn build_structural(p: &WedgeProblem) -> Result<StructuralData> {
    let cb = p.cos_beta();
    let sb = p.sin_beta();
    let delta0 = delta0_poly(p.k0, cb, p.g1m, p.g4m);
    let delta0_hat = delta0_poly(p.k0, -cb, p.g1p, p.g4p);
    let g1 = g1_polys(p);
    let d1 = &(&g1[0][0] * &g1[1][1]) - &(&g1[0][1] * &g1[1][0]);
    let d1c = d1_closed(p);
    let l = l_poly(p);
    let m = m_poly(p.k0, p.beta, p.g1p, p.g4p, p.g1m, p.g4m);
    let n = -&m_poly(p.k0, p.beta, p.g4p, p.g1p, p.g4m, p.g1m);
    let r = r_poly(p);
    let h = hcoef(p);
    let mut fc = vec![c(0.0, 0.0); 9];
    for (j, hj) in h.iter().enumerate() {
        fc[2 * j] = *hj;
    }
    let f = Poly::new(fc);
    let f_brute = &(&l * &l) + &(&m * &n);
    let f_residual = f.rel_diff(&f_brute);
    let d1_residual = d1.rel_diff(&d1c);
    if f_residual > 1e-10 {
        return Err(Error::Consistency(format!("f = l^2 + m n violated: relative coefficient residual {f_residual:e}")));
    }
    let (case_tag, tau_roots) = classify_case(&delta0, p.k0)?;
    let taus = [0, 1].map(|j| {
        let z = tau_roots[j].0;
        if z.im > 0.0 {
            z
        } else {
            -z
        }
    });
    let mut t: Vec<C> = d1.roots()?.into_iter().filter(|z| z.im > 0.0).collect();
    if t.len() != 2 {
        return Err(Error::Degenerate(format!("d1 has {} zeros in the upper half-plane, expected 2", t.len())));
    }
    t.sort_by(|a, b| a.im.total_cmp(&b.im));
    for z in &t {
        if root_residual(&d1.coeffs, *z) > 1e-10 {
            return Err(Error::Consistency(format!("inaccurate zero {z} of d1")));
        }
    }
    Ok(StructuralData {
        k0: p.k0,
        cb,
        sb,
        g1p: p.g1p,
        g4p: p.g4p,
        g1m: p.g1m,
        g4m: p.g4m,
        delta0,
        delta0_hat,
        d1,
        d1_closed: d1c,
        l,
        m,
        n,
        r,
        f,
        f_brute,
        h,
        g1,
        delta_star: -c(0.0, 1.0) / (p.g1p + p.g4p),
        gamma_hat: p.g1m * p.g4m + p.g1p * p.g4p - p.k0 * p.k0 * sb * sb,
        tau_roots,
        taus,
        t_roots: [t[0], t[1]],
        case_tag,
        kappa: case_tag.kappa(),
        f_residual,
        d1_residual,
    })
}

impl StructuralData {
    pub fn zeta(&self, eta: C) -> C {
        zeta(self.k0, eta)
    }

    pub fn g1_at(&self, eta: C) -> Mat2 {
        let g = &self.g1;
        Mat2::new(g[0][0].eval(eta), g[0][1].eval(eta), g[1][0].eval(eta), g[1][1].eval(eta))
    }

    /// The polynomial matrix `Q = [[l, m], [n, -l]]`.
    pub fn q_at(&self, eta: C) -> Mat2 {
        let l = self.l.eval(eta);
        Mat2::new(l, self.m.eval(eta), self.n.eval(eta), -l)
    }

    pub fn delta1(&self, eta: C, zeta: C) -> C {
        let i = c(0.0, 1.0);
        (self.g1p + i * zeta) * (self.g4p + i * zeta) + eta * eta * self.cb * self.cb
    }

    fn a_b(&self, eta: C, zeta: C) -> (Mat2, Mat2) {
        let i = c(0.0, 1.0);
        let cb = self.cb;
        let (dp1, dp4) = (self.g1p + i * zeta, self.g4p + i * zeta);
        let (dp2, dp3) = (eta * cb, eta * cb);
        let (dq2, dq3) = (-eta * cb, -eta * cb);
        let dm1 = (self.g1m + eta) / (2.0 * eta);
        let dm4 = (self.g4m + eta) / (2.0 * eta);
        let dm2 = i * zeta * cb / (2.0 * eta);
        let dm3 = dm2;
        let a = Mat2::new(dp1 * (1.0 - dm1) - dm2 * dp3, -dp2 * (1.0 - dm1) - dm2 * dp4, dp3 * (1.0 - dm4) + dm3 * dp1, dp4 * (1.0 - dm4) - dm3 * dp2);
        let b = Mat2::new(dm1 * dp1 + dm2 * dq3, -dm1 * dq2 + dm2 * dp4, -dm3 * dp1 + dm4 * dq3, dm3 * dq2 + dm4 * dp4);
        (a, b)
    }

    /// `G = -A^{-1} B` on an explicit branch of `zeta`.
    pub fn eval_g_zeta(&self, eta: C, zeta: C) -> Result<Mat2> {
        if eta.norm() == 0.0 {
            return Err(Error::Singular("G is not defined at eta = 0".into()));
        }
        let (a, b) = self.a_b(eta, zeta);
        Ok(-(a.inverse().map_err(|_| Error::Singular(format!("det A vanishes at eta = {eta}")))? * b))
    }

    pub fn eval_g(&self, eta: C) -> Result<Mat2> {
        self.eval_g_zeta(eta, self.zeta(eta))
    }

    pub fn delta(&self, eta: C) -> C {
        self.delta0.eval(eta) * self.delta0.eval(-eta) / (self.delta_star * self.delta_star * self.d1.eval(eta))
    }

    /// Factor of `sqrt(Delta)` analytic in the upper (`Upper`) or lower
    /// half-plane, tending to 1 at infinity.
    pub fn split_rho(&self, eta: C, half: HalfPlane) -> C {
        let (t, tau) = (self.t_roots, self.taus);
        match half {
            HalfPlane::Upper => ((eta + tau[0]) / (eta + t[0])).sqrt() * ((eta + tau[1]) / (eta + t[1])).sqrt(),
            HalfPlane::Lower => 1.0 / (((eta - tau[0]) / (eta - t[0])).sqrt() * ((eta - tau[1]) / (eta - t[1])).sqrt()),
        }
    }

    /// The branch `sqrt(Delta) = rho+ / rho-` used throughout.
    pub fn sqrt_delta(&self, eta: C) -> C {
        self.split_rho(eta, HalfPlane::Upper) / self.split_rho(eta, HalfPlane::Lower)
    }

    /// `(b, c)` of the decomposition `Gamma = (b I + c Q) / sqrt(Delta)`.
    pub fn b_c(&self, eta: C) -> (C, C) {
        let z = self.zeta(eta);
        let d1 = self.d1.eval(eta);
        let den = self.delta_star * self.delta1(eta, z);
        let b = z / den * (1.0 + self.r.eval(eta) / (z * d1));
        let cc = c(0.0, 1.0) * self.gamma_hat * eta * self.cb / (den * d1);
        (b, cc)
    }

    pub fn eval_gamma(&self, eta: C) -> Result<Mat2> {
        let d1 = self.d1.eval(eta);
        let dl1 = self.delta1(eta, self.zeta(eta));
        let sd = self.sqrt_delta(eta);
        let tiny = 1e-14 * (1.0 + self.k0.norm()).powi(8);
        if d1.norm() < tiny || dl1.norm() < 1e-14 || sd.norm() < 1e-14 || !sd.re.is_finite() {
            return Err(Error::Singular(format!("Gamma undefined at eta = {eta}")));
        }
        let (b, cc) = self.b_c(eta);
        Ok((Mat2::identity() * b + self.q_at(eta) * cc) * (1.0 / sd))
    }

    /// `lambda1 / lambda2` for a given value `w` of `sqrt(f)`.
    pub fn eigen_ratio(&self, t: C, w: C) -> C {
        let z = self.zeta(t);
        let base = z * self.d1.eval(t) + self.r.eval(t);
        let x = c(0.0, 1.0) * self.gamma_hat * t * self.cb * w;
        (base + x) / (base - x)
    }

    /// Residuals of every structural identity at the given points.
    pub fn identity_report(&self, pts: &[C]) -> Result<IdentityReport> {
        let mut rep = IdentityReport { f_coeffs: self.f_residual, d1_coeffs: self.d1_residual, ..Default::default() };
        for &x in pts {
            let g = self.eval_g(x)?;
            let dg = self.delta0.eval(-x) / self.delta0.eval(x);
            rep.det_g = rep.det_g.max((g.det() - dg).norm() / dg.norm().max(1e-300));
            let gam = self.eval_gamma(x)?;
            rep.det_gamma = rep.det_gamma.max((gam.det() - 1.0).norm());
            let w = self.f.eval(x).sqrt();
            let (b, cc) = self.b_c(x);
            let sd = self.sqrt_delta(x);
            let (l1, l2) = ((b + cc * w) / sd, (b - cc * w) / sd);
            rep.lambda_product = rep.lambda_product.max((l1 * l2 - 1.0).norm());
            let ev = gam.trace() * 0.5;
            rep.eigenvalues = rep.eigenvalues.max((ev - (l1 + l2) * 0.5).norm() / ev.norm().max(1.0));
            let rec = self.g1_at(x) * gam * (self.delta_star * sd / self.delta0.eval(x));
            rep.reconstruction = rep.reconstruction.max(rec.rel_dist(&g));
            let gg = self.g1_at(x) * self.g1_at(-x);
            let d = self.d1.eval(x);
            rep.g1_product = rep.g1_product.max(gg.rel_dist(&Mat2::diag(d, d)));
            let del = self.delta(x);
            rep.delta_even = rep.delta_even.max((del - self.delta(-x)).norm() / del.norm());
            rep.rho_split = rep.rho_split.max((sd * sd - del).norm() / del.norm());
        }
        Ok(rep)
    }
}

/// Worst residual of each structural identity over a point set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityReport {
    pub det_g: f64,
    pub det_gamma: f64,
    pub lambda_product: f64,
    pub eigenvalues: f64,
    pub reconstruction: f64,
    pub g1_product: f64,
    pub f_coeffs: f64,
    pub d1_coeffs: f64,
    pub delta_even: f64,
    pub rho_split: f64,
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        [self.det_g, self.det_gamma, self.lambda_product, self.eigenvalues, self.reconstruction, self.g1_product, self.f_coeffs, self.d1_coeffs, self.delta_even, self.rho_split]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Real sample grid avoiding the origin: `n` points on `[-L, L]`.
pub fn real_grid(k0: C, n: usize, half_width: f64) -> Vec<C> {
    let l = half_width * k0.norm();
    (0..n).map(|j| c(-l + 2.0 * l * (j as f64 + 0.5) / n as f64, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_problem, Boundary, Gammas, RawProblem, Wavenumber};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn prob(beta: f64, g: [C; 4]) -> WedgeProblem {
        build_problem(&RawProblem {
            wavenumber: Wavenumber::K0(c(1.0, 0.1)),
            beta,
            theta0: 1.0,
            boundary: Boundary::Gammas(Gammas { g1p: g[0], g4p: g[1], g1m: g[2], g4m: g[3] }),
            i1: c(1.0, 0.0),
            i2: c(0.0, 0.0),
        })
        .unwrap()
    }

    fn fig2a() -> WedgeProblem {
        prob(FRAC_PI_4, [c(1.0, -1.0), c(1.0, 2.0), c(1.0, -2.0), c(1.0, -3.0)])
    }

    #[test]
    fn poly_arithmetic() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0)]);
        let q = &p * &p;
        assert_eq!(q.coeffs, vec![c(1.0, 0.0), c(4.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(q.reflect().eval(c(1.0, 0.0)), c(1.0, 0.0));
        assert_eq!(q.deriv().coeffs, vec![c(4.0, 0.0), c(8.0, 0.0)]);
    }

    #[test]
    fn leading_h_coefficient() {
        let s = build_structural(&fig2a()).unwrap();
        assert!((s.h[4] - c(-0.25, 0.0)).norm() < 1e-14);
        assert!(s.f_residual < 1e-12, "{}", s.f_residual);
    }

    #[test]
    fn d1_closed_form_matches_determinant() {
        let s = build_structural(&fig2a()).unwrap();
        assert!(s.d1_residual < 1e-12, "{}", s.d1_residual);
    }

    #[test]
    fn identities_fig2a() {
        let s = build_structural(&fig2a()).unwrap();
        let rep = s.identity_report(&real_grid(s.k0, 100, 5.0)).unwrap();
        assert!(rep.worst() < 1e-9, "{rep:?}");
        assert!(s.t_roots.iter().all(|t| t.im > 0.0));
    }

    #[test]
    fn normal_incidence_reduces() {
        let p = prob(FRAC_PI_2, [c(1.0, -1.0), c(1.0, 2.0), c(1.0, -2.0), c(1.0, -3.0)]);
        let s = build_structural(&p).unwrap();
        assert!(s.l.max_coeff() < 1e-14);
        let x = c(0.7, 0.0);
        let g = s.eval_g(x).unwrap();
        let e1 = (p.g1m + x) / (p.g1m - x);
        let e4 = (p.g4m + x) / (p.g4m - x);
        assert!(g.rel_dist(&Mat2::diag(e1, e4)) < 1e-13);
    }

    #[test]
    fn g_tends_to_minus_identity() {
        let s = build_structural(&fig2a()).unwrap();
        let g = s.eval_g(c(1e6 * s.k0.norm(), 0.0)).unwrap();
        assert!((g - Mat2::identity() * c(-1.0, 0.0)).max_abs() < 1e-4);
    }

    #[test]
    fn rho_at_infinity() {
        let s = build_structural(&fig2a()).unwrap();
        let big = s.k0 * 1e6;
        assert!((s.split_rho(big, HalfPlane::Upper) - 1.0).norm() < 1e-4);
        assert!((s.split_rho(big, HalfPlane::Lower) - 1.0).norm() < 1e-4);
    }

    #[test]
    fn case_classification_at_normal_incidence() {
        let k0 = c(1.0, 0.1);
        let (t, _) = classify_case(&delta0_poly(k0, 0.0, c(1.0, -1.0), c(1.0, -1.0)), k0).unwrap();
        assert_eq!(t, CaseTag::I);
        let (t, _) = classify_case(&delta0_poly(k0, 0.0, c(1.0, 1.0), c(1.0, -1.0)), k0).unwrap();
        assert_eq!(t, CaseTag::II);
        let (t, _) = classify_case(&delta0_poly(k0, 0.0, c(1.0, 1.0), c(2.0, 1.0)), k0).unwrap();
        assert_eq!(t, CaseTag::III);
    }

    #[test]
    fn b_tends_to_one() {
        let s = build_structural(&fig2a()).unwrap();
        let (b, _) = s.b_c(c(1e5, 0.0));
        assert!((b - 1.0).norm() < 1e-3, "{b}");
    }
}
