//! Sommerfeld spectra `S1`, `S2`: the functions `F` built from the RHP
//! solution, the residue constants at the geometric-optics poles, strip
//! formulas along the imaginary axis, diffraction coefficients and the far
//! field.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::linalg::{vec2_norm, vec2_sub, Mat2, Vec2};
use crate::numerics::quad::{circle_residue, gauss_legendre};
use crate::problem::{ReflectionSet, WedgeProblem};
use crate::rhp_solver::RhpSolution;
use crate::spectral_matrix::StructuralData;

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

const I: C = c(0.0, 1.0);

fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: Vec2, s: C) -> Vec2 {
    [a[0] * s, a[1] * s]
}

/// Residues of `F-` and `F+` at the geometric-optics poles.
#[derive(Debug, Clone, Copy)]
pub struct ResidueConstants {
    pub lambda_plus: Vec2,
    pub lambda_minus: Vec2,
    pub m_plus: Vec2,
    pub m_minus: Vec2,
    /// `G(eta0)^{-1}` with `zeta = -i eta_hat0`.
    pub mu: Mat2,
    /// The same on the other sheet, `zeta = +i eta_hat0`.
    pub mu_opposite: Mat2,
}

fn pq(p: &WedgeProblem, cb: f64, mu: &Mat2, sign: f64) -> [C; 4] {
    let (e0, eh) = (p.eta0, p.eta_hat0);
    let m = &mu.0;
    let a1 = p.g1p + sign * eh;
    let a4 = p.g4p + sign * eh;
    let d = 2.0 * eh;
    [
        (a1 * (1.0 - m[0][0]) - e0 * m[1][0] * cb) / d,
        (a1 * m[0][1] + e0 * (1.0 + m[1][1]) * cb) / d,
        (a4 * (1.0 - m[1][1]) + e0 * m[0][1] * cb) / d,
        (a4 * m[1][0] - e0 * (1.0 + m[0][0]) * cb) / d,
    ]
}

/// Constants from `C = r+ + i` and `G(eta0)` alone.
pub fn residue_constants(p: &WedgeProblem, st: &StructuralData, cvec: Vec2) -> Result<ResidueConstants> {
    let mu = st.eval_g_zeta(p.eta0, -I * p.eta_hat0)?.inverse()?;
    let mu_opposite = st.eval_g_zeta(p.eta0, I * p.eta_hat0)?.inverse()?;
    let [p1, q1, p2, q2] = pq(p, st.cb, &mu, 1.0);
    let [p1m, q1m, p2m, q2m] = pq(p, st.cb, &mu_opposite, -1.0);
    let [c1, c2] = cvec;
    let m = &mu.0;
    Ok(ResidueConstants {
        lambda_plus: cvec,
        lambda_minus: [p1 * c1 - q1 * c2, -q2 * c1 + p2 * c2],
        m_plus: [-m[0][0] * c1 - m[0][1] * c2, -m[1][0] * c1 - m[1][1] * c2],
        m_minus: [-p1m * c1 + q1m * c2, q2m * c1 - p2m * c2],
        mu,
        mu_opposite,
    })
}

/// `C = r+ + i` for a problem and its reflection set.
pub fn go_constants(p: &WedgeProblem, refl: &ReflectionSet) -> Vec2 {
    [refl.r1p + p.i1, refl.r2p + p.i2]
}

/// Residuals of `Lambda- = r- + i`, `M- = r+ + R+`, `M+ = r- + R-`, in the
/// order `[L1-, L2-, M1-, M2-, M1+, M2+]`, relative to `|i| + |r|`.
pub fn identity_residuals(p: &WedgeProblem, refl: &ReflectionSet, rc: &ResidueConstants) -> [f64; 6] {
    let s = p.i1.norm() + p.i2.norm() + refl.r1p.norm() + refl.r2p.norm();
    let s = if s == 0.0 { 1.0 } else { s };
    [
        (rc.lambda_minus[0] - refl.r1m - p.i1).norm() / s,
        (rc.lambda_minus[1] - refl.r2m - p.i2).norm() / s,
        (rc.m_minus[0] - refl.r1p - refl.R1p).norm() / s,
        (rc.m_minus[1] - refl.r2p - refl.R2p).norm() / s,
        (rc.m_plus[0] - refl.r1m - refl.R1m).norm() / s,
        (rc.m_plus[1] - refl.r2m - refl.R2m).norm() / s,
    ]
}

/// Anything able to supply `Phi+` at any point off its poles.
pub trait PhiSource: Sync {
    fn phi_plus_any(&self, eta: C) -> Result<Vec2>;
}

impl PhiSource for RhpSolution {
    fn phi_plus_any(&self, eta: C) -> Result<Vec2> {
        RhpSolution::phi_plus_any(self, eta)
    }
}

/// Panel layout of the imaginary-axis quadrature `y = L t/(1 - t^2)`.
#[derive(Debug, Clone, Copy)]
pub struct AxisQuadrature {
    pub panels: usize,
    pub order: usize,
    pub length: f64,
    /// Nodes beyond `|y| = y_max` are dropped; the paired integrands decay
    /// like `e^{-|y|}`.
    pub y_max: f64,
}

impl Default for AxisQuadrature {
    fn default() -> Self {
        AxisQuadrature { panels: 24, order: 16, length: 2.0, y_max: 36.0 }
    }
}

impl AxisQuadrature {
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(self.order);
        let h = 2.0 / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.order);
        for p in 0..self.panels {
            let a = -1.0 + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                let t = a + 0.5 * h * (xi + 1.0);
                let y = self.length * t / (1.0 - t * t);
                let dy = self.length * (1.0 + t * t) / (1.0 - t * t).powi(2);
                if y.abs() > self.y_max {
                    continue;
                }
                out.push((y, wi * 0.5 * h * dy));
            }
        }
        out
    }
}

/// Shifts `a` of the strip integrals `int F(sigma + a) K(sigma - s) dsigma`.
const SHIFTS: [f64; 5] = [-PI, -FRAC_PI_2, 0.0, FRAC_PI_2, PI];
const M_PI: usize = 0;
const M_HALF: usize = 1;
const ZERO: usize = 2;
const P_HALF: usize = 3;
const P_PI: usize = 4;

/// Candidate truncations of the axis integrals, tried in order.
const Y_MAX_LADDER: [f64; 4] = [9.0, 18.0, 36.0, 72.0];
const TAIL_TOL: f64 = 1e-12;

type NodeValues = Vec<(Vec2, Vec2)>;

/// Which strip formula is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strip {
    /// Written for `(-pi, -pi/2)`, analytic on `(-pi, 0)`.
    FarLeft,
    /// Written for `(-pi/2, 0)`, analytic on `(-pi/2, pi/2)`.
    Left,
    /// `(0, pi/2)`.
    Base,
    /// Written for `(pi/2, pi)`, analytic on `(0, pi)`.
    Right,
    /// Written for `(pi, 3 pi/2)`, analytic on `(pi/2, 3 pi/2)`.
    FarRight,
}

pub const STRIPS: [Strip; 5] = [Strip::FarLeft, Strip::Left, Strip::Base, Strip::Right, Strip::FarRight];

/// One integrand term: `weight * F(sigma + shift) * K(sigma - s)`.
#[derive(Debug, Clone, Copy)]
struct Term {
    shift: usize,
    minus: bool,
    weight: f64,
    cot: bool,
}

const fn term(shift: usize, minus: bool, weight: f64, cot: bool) -> Term {
    Term { shift, minus, weight, cot }
}

impl Strip {
    /// Range of `Re s` on which the formula is analytic.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Strip::FarLeft => (-PI, 0.0),
            Strip::Left => (-FRAC_PI_2, FRAC_PI_2),
            Strip::Base => (0.0, FRAC_PI_2),
            Strip::Right => (0.0, PI),
            Strip::FarRight => (FRAC_PI_2, 1.5 * PI),
        }
    }

    fn terms(self) -> [Term; 2] {
        match self {
            Strip::Base => [term(ZERO, true, 1.0, true), term(ZERO, false, 1.0, false)],
            Strip::Right => [term(ZERO, true, 1.0, true), term(P_HALF, false, -1.0, true)],
            Strip::FarRight => [term(P_HALF, true, -1.0, false), term(P_PI, false, 1.0, false)],
            Strip::Left => [term(M_HALF, true, -1.0, false), term(ZERO, false, 1.0, false)],
            Strip::FarLeft => [term(M_PI, true, 1.0, true), term(M_HALF, false, -1.0, true)],
        }
    }

    /// Sample point well inside the written strip.
    fn centre(self) -> f64 {
        match self {
            Strip::FarLeft => -0.75 * PI,
            Strip::Left => -0.25 * PI,
            Strip::Base => 0.25 * PI,
            Strip::Right => 0.75 * PI,
            Strip::FarRight => 1.25 * PI,
        }
    }
}

/// The strip formula for `Re s`; on an interior boundary the neighbour whose
/// domain contains it.
pub fn strip_of(s: C) -> Result<Strip> {
    let x = s.re;
    let near = |e: f64| (x - e).abs() < 1e-6;
    if near(-PI) || near(1.5 * PI) || !(-PI..=1.5 * PI).contains(&x) {
        return Err(Error::Validation(vec![format!("Re s = {x} outside (-pi, 3pi/2)")]));
    }
    Ok(if near(-FRAC_PI_2) {
        Strip::FarLeft
    } else if near(0.0) {
        Strip::Left
    } else if near(FRAC_PI_2) {
        Strip::Right
    } else if near(PI) {
        Strip::FarRight
    } else if x < -FRAC_PI_2 {
        Strip::FarLeft
    } else if x < 0.0 {
        Strip::Left
    } else if x < FRAC_PI_2 {
        Strip::Base
    } else if x < PI {
        Strip::Right
    } else {
        Strip::FarRight
    })
}

fn cot(z: C) -> C {
    1.0 / z.tan()
}

pub struct Spectra<'a, P: PhiSource> {
    pub phi: &'a P,
    pub problem: WedgeProblem,
    pub st: StructuralData,
    pub rc: ResidueConstants,
    pub axis: AxisQuadrature,
    /// Largest `|integrand|` at `+-i y_max` over the strips, the tail estimate.
    pub tail: f64,
    nodes: Vec<(f64, f64)>,
    cache: [OnceLock<std::result::Result<NodeValues, String>>; 5],
}

impl<'a, P: PhiSource> Spectra<'a, P> {
    /// Builds the evaluators. `axis.y_max` is replaced by the first entry of
    /// 9, 18, 36, 72 whose tail estimate is below `1e-12`, or 72.
    pub fn new(phi: &'a P, problem: &WedgeProblem, st: &StructuralData, rc: ResidueConstants, axis: AxisQuadrature) -> Result<Self> {
        let mut sp = Spectra { phi, problem: *problem, st: st.clone(), rc, axis, tail: f64::INFINITY, nodes: Vec::new(), cache: Default::default() };
        for y in Y_MAX_LADDER {
            sp.tail = sp.tail_estimate(y)?;
            sp.axis.y_max = y;
            if sp.tail < TAIL_TOL {
                break;
            }
        }
        sp.nodes = sp.axis.nodes();
        Ok(sp)
    }

    /// With a fixed truncation, skipping the search.
    pub fn with_fixed_axis(phi: &'a P, problem: &WedgeProblem, st: &StructuralData, rc: ResidueConstants, axis: AxisQuadrature) -> Result<Self> {
        let mut sp = Spectra { phi, problem: *problem, st: st.clone(), rc, axis, tail: 0.0, nodes: axis.nodes(), cache: Default::default() };
        sp.tail = sp.tail_estimate(axis.y_max)?;
        Ok(sp)
    }

    fn tail_estimate(&self, y: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for strip in STRIPS {
            let s = c(strip.centre(), 0.0);
            for sg in [-y, y] {
                let sig = c(0.0, sg);
                let mut acc = [c(0.0, 0.0); 2];
                for t in strip.terms() {
                    let z = sig + SHIFTS[t.shift];
                    let f = if t.minus { self.f_minus(z)? } else { self.f_plus(z)? };
                    let k = if t.cot { cot(sig - s) } else { (sig - s).tan() };
                    acc = add(acc, scale(f, k * t.weight));
                }
                worst = worst.max(vec2_norm(acc) / (2.0 * PI));
            }
        }
        Ok(worst)
    }

    /// `(a, b)` continuing `(Phi+, Phi-)` at `eta = k0 sin s`,
    /// `zeta = -i k0 cos s`. The curves `Im eta(s) = 0` through `s = n pi`
    /// split the plane into regions `R_n` around `pi/2 + n pi`. On the curve
    /// through 0 `zeta(s)` is the boundary branch, on those through `+-pi` it
    /// is the opposite one, so crossing them brings in `G(eta, -zeta)`.
    fn phi_pair(&self, s: C) -> Result<(Vec2, Vec2)> {
        let k0 = self.problem.k0;
        let eta = k0 * s.sin();
        let zeta = -I * k0 * s.cos();
        let phase = -(k0.re * s.im.tanh()).atan2(k0.im);
        let n = ((s.re - phase) / PI).floor() as i64;
        let g = |z: C| self.st.eval_g_zeta(eta, z);
        match n {
            0 => {
                let a = self.phi.phi_plus_any(eta)?;
                Ok((a, g(zeta)?.inverse()?.mul_vec(a)))
            }
            -1 => {
                let b = self.phi.phi_plus_any(-eta)?;
                Ok((g(zeta)?.mul_vec(b), b))
            }
            1 => {
                let a = g(-zeta)?.mul_vec(self.phi.phi_plus_any(-eta)?);
                Ok((a, g(zeta)?.inverse()?.mul_vec(a)))
            }
            -2 => {
                let b = g(-zeta)?.inverse()?.mul_vec(self.phi.phi_plus_any(eta)?);
                Ok((g(zeta)?.mul_vec(b), b))
            }
            _ => Err(Error::Validation(vec![format!("spectral argument {s} outside the continued range")])),
        }
    }

    /// `F1-`, `F2-` at `s`.
    pub fn f_minus(&self, s: C) -> Result<Vec2> {
        let p = &self.problem;
        let k0 = p.k0;
        let cb = self.st.cb;
        let (a, b) = self.phi_pair(s)?;
        let kc = k0 * s.cos();
        let ks = k0 * cb * s.sin();
        Ok([-0.5 * I * (p.g1p + kc) * (a[0] - b[0]) + 0.5 * I * ks * (a[1] + b[1]), -0.5 * I * (p.g4p + kc) * (a[1] - b[1]) - 0.5 * I * ks * (a[0] + b[0])])
    }

    /// `F1+`, `F2+` at `s`.
    pub fn f_plus(&self, s: C) -> Result<Vec2> {
        let k0 = self.problem.k0;
        let (a, _) = self.phi_pair(c(FRAC_PI_2, 0.0) - s)?;
        Ok(scale(a, I * k0 * s.sin()))
    }

    fn node_values(&self, shift: usize) -> Result<&NodeValues> {
        let v = self.cache[shift].get_or_init(|| {
            let a = SHIFTS[shift];
            self.nodes
                .iter()
                .map(|&(y, _)| {
                    let z = c(a, y);
                    Ok((self.f_minus(z)?, self.f_plus(z)?))
                })
                .collect::<Result<NodeValues>>()
                .map_err(|e| e.to_string())
        });
        v.as_ref().map_err(|e| Error::Consistency(format!("spectral integrand: {e}")))
    }

    /// `-(1/2 pi i) int_{-i inf}^{i inf} sum_terms w F(sigma + a) K(sigma - s) dsigma`.
    fn axis_integral(&self, s: C, terms: &[Term]) -> Result<Vec2> {
        let vals: Vec<&NodeValues> = terms.iter().map(|t| self.node_values(t.shift)).collect::<Result<_>>()?;
        let mut acc = [c(0.0, 0.0); 2];
        for (n, &(y, w)) in self.nodes.iter().enumerate() {
            let arg = c(0.0, y) - s;
            for (t, v) in terms.iter().zip(&vals) {
                let (fm, fp) = v[n];
                let f = if t.minus { fm } else { fp };
                let k = if t.cot { cot(arg) } else { arg.tan() };
                acc = add(acc, scale(f, k * (t.weight * w)));
            }
        }
        Ok(scale(acc, c(-1.0 / (2.0 * PI), 0.0)))
    }

    fn inc(&self) -> Vec2 {
        [self.problem.i1, self.problem.i2]
    }

    /// Coefficients `(a, b)` of `a cot(s - theta0) - b cot(s + theta0)`.
    fn pole_coefficients(&self, strip: Strip) -> (Vec2, Vec2) {
        let i = self.inc();
        let rc = &self.rc;
        match strip {
            Strip::Base => (i, i),
            Strip::Right => (i, vec2_sub(i, rc.lambda_plus)),
            Strip::FarRight => (add(vec2_sub(i, rc.lambda_minus), rc.m_plus), vec2_sub(i, rc.lambda_plus)),
            Strip::Left => (i, vec2_sub(i, rc.lambda_minus)),
            Strip::FarLeft => (add(vec2_sub(i, rc.lambda_plus), rc.m_minus), vec2_sub(i, rc.lambda_minus)),
        }
    }

    /// `S` by the formula of `strip`, anywhere in its domain of analyticity.
    /// Surface-wave terms are not included.
    pub fn s_formula(&self, strip: Strip, s: C) -> Result<Vec2> {
        let (lo, hi) = strip.domain();
        if s.re <= lo + 1e-6 || s.re >= hi - 1e-6 {
            return Err(Error::Validation(vec![format!("Re s = {} outside the domain of the {strip:?} formula", s.re)]));
        }
        let ints = self.axis_integral(s, &strip.terms())?;
        let (a, b) = self.pole_coefficients(strip);
        let th = self.problem.theta0;
        let (c1, c2) = (cot(s - th), cot(s + th));
        Ok(add(ints, [a[0] * c1 - b[0] * c2, a[1] * c1 - b[1] * c2]))
    }

    /// `S` on `-pi < Re s < 3 pi/2`.
    pub fn s_strip(&self, s: C) -> Result<Vec2> {
        self.s_formula(strip_of(s)?, s)
    }

    /// `S` continued from the base strip through `S(s) - S(-s) = F-(s)` and
    /// `S(pi/2 + s) - S(pi/2 - s) = F+(s)`.
    pub fn s_continued(&self, s: C) -> Result<Vec2> {
        match strip_of(s)? {
            Strip::Base => self.s_formula(Strip::Base, s),
            Strip::Right | Strip::FarRight => Ok(add(self.s_continued(PI - s)?, self.f_plus(s - FRAC_PI_2)?)),
            Strip::Left | Strip::FarLeft => Ok(vec2_sub(self.s_continued(-s)?, self.f_minus(-s)?)),
        }
    }

    /// `D(theta)` from the continued strips at `theta - pi` and `theta + pi`.
    pub fn diffraction(&self, theta: f64) -> Result<Vec2> {
        let v = vec2_sub(self.s_strip(c(theta - PI, 0.0))?, self.s_strip(c(theta + PI, 0.0))?);
        Ok(scale(v, C::from_polar(1.0 / (2.0 * PI).sqrt(), -PI / 4.0)))
    }

    /// `D(theta)` through the functional equations, using only `F`:
    /// `S(theta - pi) - S(theta + pi) = F+(pi/2 - theta) - F-(pi - theta) + F-(theta) - F+(theta + pi/2)`.
    pub fn diffraction_functional(&self, theta: f64) -> Result<Vec2> {
        let t = c(theta, 0.0);
        let v = add(vec2_sub(self.f_plus(c(FRAC_PI_2, 0.0) - t)?, self.f_minus(c(PI, 0.0) - t)?), vec2_sub(self.f_minus(t)?, self.f_plus(t + FRAC_PI_2)?));
        Ok(scale(v, C::from_polar(1.0 / (2.0 * PI).sqrt(), -PI / 4.0)))
    }

    /// Residue of the base-strip `S` at `theta0`.
    pub fn residue_at_theta0(&self) -> Result<Vec2> {
        residue(|s| self.s_formula(Strip::Base, s), c(self.problem.theta0, 0.0), 1e-3)
    }

    /// Residues of `F` at the geometric-optics poles against the constants,
    /// largest deviation relative to the largest constant.
    pub fn f_residue_residual(&self) -> Result<f64> {
        let th = self.problem.theta0;
        let rc = &self.rc;
        let checks: [(bool, f64, Vec2); 4] =
            [(true, th, rc.lambda_minus), (true, PI - th, rc.m_minus), (false, FRAC_PI_2 - th, rc.lambda_plus), (false, FRAC_PI_2 + th, rc.m_plus)];
        let scale_ref = checks.iter().map(|c| vec2_norm(c.2)).fold(0.0, f64::max).max(1e-300);
        let mut worst: f64 = 0.0;
        for (minus, at, want) in checks {
            let got = residue(|s| if minus { self.f_minus(s) } else { self.f_plus(s) }, c(at, 0.0), 1e-3)?;
            worst = worst.max(vec2_norm(vec2_sub(got, want)) / scale_ref);
        }
        Ok(worst)
    }

    /// Strip formulas against each other inside the overlaps of their
    /// domains, against the functional-equation continuation, and the two
    /// routes to `D`.
    pub fn strip_report(&self, thetas: &[f64]) -> Result<StripReport> {
        let mut rep = StripReport::default();
        let pairs =
            [(Strip::Base, Strip::Right, 0.25 * PI), (Strip::Base, Strip::Left, 0.25 * PI), (Strip::Right, Strip::FarRight, 0.75 * PI), (Strip::Left, Strip::FarLeft, -0.25 * PI)];
        for (k, (a, b, x)) in pairs.into_iter().enumerate() {
            for dx in [-0.2, 0.0, 0.2] {
                for y in [-0.15, 0.1] {
                    let s = c(x + dx, y);
                    let u = self.s_formula(a, s)?;
                    let v = self.s_formula(b, s)?;
                    rep.overlap[k] = rep.overlap[k].max(vec2_norm(vec2_sub(u, v)) / vec2_norm(u).max(1e-300));
                }
            }
        }
        for strip in STRIPS {
            for y in [-0.2, 0.15] {
                let s = c(strip.centre() + 0.1, y);
                let u = self.s_formula(strip, s)?;
                let v = self.s_continued(s)?;
                rep.functional = rep.functional.max(vec2_norm(vec2_sub(u, v)) / vec2_norm(v).max(1e-300));
            }
        }
        let inc = vec2_norm([self.problem.i1, self.problem.i2]);
        for &t in thetas {
            let a = self.diffraction(t)?;
            let b = self.diffraction_functional(t)?;
            rep.d_routes = rep.d_routes.max(vec2_norm(vec2_sub(a, b)) / vec2_norm(b).max(inc).max(1e-300));
        }
        rep.tail = self.tail;
        Ok(rep)
    }
}

fn residue<F: Fn(C) -> Result<Vec2>>(f: F, at: C, r: f64) -> Result<Vec2> {
    let mut err = None;
    let v = circle_residue(
        |s| match f(s) {
            Ok(v) => RVec(v),
            Err(e) => {
                err.get_or_insert(e);
                RVec([c(0.0, 0.0); 2])
            }
        },
        at,
        r,
        32,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v.0),
    }
}

/// `Vec2` with the arithmetic `circle_residue` needs.
#[derive(Clone, Copy)]
struct RVec(Vec2);

impl std::ops::Add for RVec {
    type Output = RVec;
    fn add(self, o: RVec) -> RVec {
        RVec(add(self.0, o.0))
    }
}

impl std::ops::Mul<C> for RVec {
    type Output = RVec;
    fn mul(self, s: C) -> RVec {
        RVec(scale(self.0, s))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StripReport {
    /// Base/right, base/left, right/far right, left/far left.
    pub overlap: [f64; 4],
    /// Every strip formula against the functional-equation continuation.
    pub functional: f64,
    /// `D` by strips against `D` by functional equations, relative to the
    /// larger of `|D|` and the incident amplitude.
    pub d_routes: f64,
    /// Tail estimate of the truncated axis integrals.
    pub tail: f64,
}

/// One row of the diffraction table.
#[derive(Debug, Clone, Copy)]
pub struct DiffractionSample {
    pub theta: f64,
    pub d: Vec2,
    /// Within `1e-4` of a shadow boundary.
    pub flagged: bool,
}

/// Shadow-boundary angles inside `(0, pi/2)`.
pub fn shadow_boundaries(p: &WedgeProblem) -> Vec<f64> {
    vec![p.theta0]
}

pub fn diffraction_table<P: PhiSource>(sp: &Spectra<P>, thetas: &[f64]) -> Result<Vec<DiffractionSample>> {
    let sb = shadow_boundaries(&sp.problem);
    thetas
        .iter()
        .map(|&t| {
            let flagged = sb.iter().any(|b| (t - b).abs() < 1e-4);
            let d = match sp.diffraction(t) {
                Ok(d) => d,
                Err(_) if flagged => [c(f64::NAN, f64::NAN); 2],
                Err(e) => return Err(e),
            };
            Ok(DiffractionSample { theta: t, d, flagged })
        })
        .collect()
}

/// `omega(theta; a, b)`.
pub fn window(theta: f64, a: f64, b: f64) -> f64 {
    if a < theta && theta < b {
        1.0
    } else {
        0.0
    }
}

/// Amplitudes of the incident and the four reflected waves as recovered
/// from the spectra.
#[derive(Debug, Clone, Copy)]
pub struct GoTable {
    pub incident: Vec2,
    pub r_plus: Vec2,
    pub r_minus: Vec2,
    pub big_r_plus: Vec2,
    pub big_r_minus: Vec2,
}

pub fn go_table(p: &WedgeProblem, rc: &ResidueConstants) -> GoTable {
    let i = [p.i1, p.i2];
    let neg = |v: Vec2| [-v[0], -v[1]];
    GoTable {
        incident: i,
        r_plus: add(neg(i), rc.lambda_plus),
        r_minus: add(neg(i), rc.lambda_minus),
        big_r_plus: vec2_sub(add(i, rc.m_minus), rc.lambda_plus),
        big_r_minus: vec2_sub(add(i, rc.m_plus), rc.lambda_minus),
    }
}

/// Largest entrywise difference between the recovered amplitudes and the
/// reflection coefficients.
pub fn go_table_residual(t: &GoTable, refl: &ReflectionSet) -> f64 {
    let pairs = [(t.r_plus, [refl.r1p, refl.r2p]), (t.r_minus, [refl.r1m, refl.r2m]), (t.big_r_plus, [refl.R1p, refl.R2p]), (t.big_r_minus, [refl.R1m, refl.R2m])];
    let s = vec2_norm(t.incident).max(1e-300);
    pairs.iter().map(|(a, b)| vec2_norm(vec2_sub(*a, *b)) / s).fold(0.0, f64::max)
}

/// Distance, relative to `|k0|`, from the zeros of `delta0` and their
/// reflections to the spectral images of the axis paths. The images are the
/// lines `eta = i k0 t` and the rays `eta = +-k0 t`, `t >= 1`. The poles of
/// the continued `Phi` that carry the surface waves sit at these zeros; the
/// paths are not indented, so a small clearance spoils the quadrature.
pub fn path_pole_clearance(st: &StructuralData) -> f64 {
    let k0 = st.k0;
    let mut worst = f64::INFINITY;
    for &(r, _) in &st.tau_roots {
        for z in [r, -r] {
            let u = z / k0;
            let line = u.re.abs();
            let ray = if u.re.abs() >= 1.0 { u.im.abs() } else { (u - c(u.re.signum(), 0.0)).norm() };
            worst = worst.min(line).min(ray);
        }
    }
    worst
}

/// `k0 rho` at or above this marks a far-field sample as asymptotic.
pub const ASYMPTOTIC_KRHO: f64 = 20.0;

#[derive(Debug, Clone, Copy)]
pub struct FarFieldValue {
    pub field: Vec2,
    /// `|k0| rho >= ASYMPTOTIC_KRHO`.
    pub asymptotic: bool,
}

/// Far field `(E_z, Z H_z)` at `(rho, theta)`: geometric-optics waves with
/// their windows plus the diffracted wave. The surface waves are not included.
pub fn far_field<P: PhiSource>(sp: &Spectra<P>, rho: f64, theta: f64) -> Result<FarFieldValue> {
    let p = &sp.problem;
    let t = go_table(p, &sp.rc);
    let k0 = p.k0;
    let th0 = p.theta0;
    let e = |sign: f64, ang: f64| (I * k0 * rho * ang.cos() * sign).exp();
    let mut out = scale(t.incident, e(-1.0, theta - th0));
    out = add(out, scale(t.r_plus, e(1.0, theta + th0)));
    out = add(out, scale(t.r_minus, e(-1.0, theta + th0)));
    out = add(out, scale(t.big_r_plus, e(1.0, theta - th0) * window(theta, 0.0, th0)));
    out = add(out, scale(t.big_r_minus, e(1.0, theta - th0) * window(theta, th0, FRAC_PI_2)));
    let d = sp.diffraction(theta)?;
    let kr = k0 * rho;
    Ok(FarFieldValue { field: add(out, scale(d, (I * kr).exp() / kr.sqrt())), asymptotic: kr.norm() >= ASYMPTOTIC_KRHO })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use crate::problem::{build_problem, reflection_coefficients};
    use crate::spectral_matrix::build_structural;

    #[test]
    fn identities_fig2a() {
        for label in ["2a", "2b", "3c", "3d"] {
            let p = build_problem(&preset(label).unwrap().raw(PI / 3.0, c(1.0, 0.0), c(0.3, 0.0))).unwrap();
            let refl = reflection_coefficients(&p).unwrap();
            let st = build_structural(&p).unwrap();
            let rc = residue_constants(&p, &st, go_constants(&p, &refl)).unwrap();
            let r = identity_residuals(&p, &refl, &rc);
            assert!(r.iter().all(|&x| x < 1e-10), "{label}: {r:?}");
            assert!(go_table_residual(&go_table(&p, &rc), &refl) < 1e-10);
        }
    }
}
