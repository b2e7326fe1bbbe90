//! Normal incidence, `beta = pi/2`. The matrix problem splits into two
//! scalar problems with rational coefficients. This module holds the closed
//! forms and a diagonal solver that runs the same ansatz, symmetry,
//! compatibility and residue steps as the general solver, one component at a
//! time.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::linalg::{nullspace, vec2_norm, vec2_sub, Vec2};
use crate::problem::{ReflectionSet, WedgeProblem};
use crate::rhp_solver::compatibility_points;
use crate::spectra::{PhiSource, ResidueConstants};
use crate::spectral_matrix::zeta;

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

const I: C = c(0.0, 1.0);

fn require_normal(p: &WedgeProblem) -> Result<()> {
    if !p.is_normal_incidence() {
        return Err(Error::Validation(vec![format!("normal incidence requires beta = pi/2, got {}", p.beta)]));
    }
    Ok(())
}

fn nonzero(v: C, what: &str) -> Result<C> {
    if v.norm() < 1e-13 {
        return Err(Error::Singular(format!("resonant denominator {what}")));
    }
    Ok(v)
}

/// The closed-form solution.
#[derive(Debug, Clone)]
pub struct NormalOracle {
    /// `gamma_{j-}`: `(g1m, g4m)`.
    pub gm: Vec2,
    /// `gamma_{j+}`: `(g1p, g4p)`.
    pub gp: Vec2,
    pub eta0: C,
    pub eta_hat0: C,
    pub inc: Vec2,
    /// Amplitudes `D_j` of `Phi`.
    pub d: Vec2,
    pub mu: Vec2,
    pub lambda_plus: Vec2,
    pub lambda_minus: Vec2,
    pub m_plus: Vec2,
    pub m_minus: Vec2,
    pub r_plus: Vec2,
    pub r_minus: Vec2,
    /// `R+ = R-`.
    pub big_r: Vec2,
}

pub fn build_oracle(p: &WedgeProblem) -> Result<NormalOracle> {
    require_normal(p)?;
    let gm = [p.g1m, p.g4m];
    let gp = [p.g1p, p.g4p];
    let (e0, eh) = (p.eta0, p.eta_hat0);
    let inc = [p.i1, p.i2];
    let mut o = NormalOracle {
        gm,
        gp,
        eta0: e0,
        eta_hat0: eh,
        inc,
        d: [C::default(); 2],
        mu: [C::default(); 2],
        lambda_plus: [C::default(); 2],
        lambda_minus: [C::default(); 2],
        m_plus: [C::default(); 2],
        m_minus: [C::default(); 2],
        r_plus: [C::default(); 2],
        r_minus: [C::default(); 2],
        big_r: [C::default(); 2],
    };
    for j in 0..2 {
        let a = nonzero(e0 + gm[j], "eta0 + gamma_-")?;
        let b = nonzero(eh + gp[j], "eta_hat0 + gamma_+")?;
        let i = inc[j];
        o.d[j] = 4.0 * I * e0 * eh * i / (a * b);
        o.mu[j] = (gm[j] - e0) / a;
        o.lambda_minus[j] = 2.0 * e0 * i / a;
        o.lambda_plus[j] = 2.0 * eh * i / b;
        o.m_minus[j] = 2.0 * e0 * (eh - gp[j]) * i / (a * b);
        o.m_plus[j] = 2.0 * eh * (e0 - gm[j]) * i / (a * b);
        o.r_plus[j] = (eh - gp[j]) / b * i;
        o.r_minus[j] = (e0 - gm[j]) / a * i;
        o.big_r[j] = (eh - gp[j]) * (e0 - gm[j]) / (a * b) * i;
    }
    Ok(o)
}

impl NormalOracle {
    pub fn phi_plus(&self, eta: C) -> Vec2 {
        let q = eta * eta - self.eta0 * self.eta0;
        [self.d[0] * (self.gm[0] + eta) / q, self.d[1] * (self.gm[1] + eta) / q]
    }

    pub fn phi_minus(&self, eta: C) -> Vec2 {
        let q = eta * eta - self.eta0 * self.eta0;
        [self.d[0] * (self.gm[0] - eta) / q, self.d[1] * (self.gm[1] - eta) / q]
    }

    pub fn phi_hat_plus(&self, eta: C) -> Vec2 {
        let q = eta * eta - self.eta_hat0 * self.eta_hat0;
        [self.d[0] * (self.gp[0] + eta) / q, self.d[1] * (self.gp[1] + eta) / q]
    }

    pub fn phi_hat_minus(&self, eta: C) -> Vec2 {
        let q = eta * eta - self.eta_hat0 * self.eta_hat0;
        [self.d[0] * (self.gp[0] - eta) / q, self.d[1] * (self.gp[1] - eta) / q]
    }

    /// Scalar boundary conditions of both problems on a real grid, relative.
    pub fn boundary_residual(&self, grid: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in grid {
            let e = c(x, 0.0);
            let (pp, pm, hp, hm) = (self.phi_plus(e), self.phi_minus(e), self.phi_hat_plus(e), self.phi_hat_minus(e));
            for j in 0..2 {
                let g = (self.gm[j] + e) / (self.gm[j] - e);
                let gh = (self.gp[j] + e) / (self.gp[j] - e);
                let s = pp[j].norm().max(hp[j].norm()).max(1e-300);
                worst = worst.max((pp[j] - g * pm[j]).norm() / s).max((hp[j] - gh * hm[j]).norm() / s);
            }
        }
        worst
    }

    /// `Lambda- = r- + i`, `M- = r+ + R+`, `M+ = r- + R-` in closed form.
    pub fn identity_residual(&self) -> f64 {
        let s = vec2_norm(self.inc).max(1e-300);
        (0..2)
            .map(|j| {
                let a = (self.lambda_minus[j] - self.r_minus[j] - self.inc[j]).norm();
                let b = (self.m_minus[j] - self.r_plus[j] - self.big_r[j]).norm();
                let c = (self.m_plus[j] - self.r_minus[j] - self.big_r[j]).norm();
                a.max(b).max(c) / s
            })
            .fold(0.0, f64::max)
    }
}

impl PhiSource for NormalOracle {
    fn phi_plus_any(&self, eta: C) -> Result<Vec2> {
        Ok(self.phi_plus(eta))
    }
}

/// Scalar factors of `(g + eta)/(g - eta)`: `X+` analytic and nonzero above
/// the real axis, `X-` below, and the degree of the polynomial numerator.
#[derive(Debug, Clone, Copy)]
struct ScalarFactor {
    g: C,
    upper: bool,
}

impl ScalarFactor {
    fn new(g: C) -> Result<Self> {
        if g.im == 0.0 {
            return Err(Error::Degenerate(format!("gamma = {g} on the real axis")));
        }
        Ok(ScalarFactor { g, upper: g.im > 0.0 })
    }

    fn x_plus(&self, e: C) -> C {
        if self.upper {
            self.g + e
        } else {
            1.0 / (self.g - e)
        }
    }

    fn x_minus(&self, e: C) -> C {
        if self.upper {
            self.g - e
        } else {
            1.0 / (self.g + e)
        }
    }

    fn degree(&self) -> usize {
        if self.upper {
            0
        } else {
            2
        }
    }
}

/// One scalar problem: `Phi+- = X+- Q(eta)/(eta^2 - e0^2)` with `Q` spanned
/// by `basis` (columns of monomial coefficients).
#[derive(Debug, Clone)]
pub struct ScalarSide {
    fac: ScalarFactor,
    e0: C,
    pub basis: DMatrix<C>,
}

impl ScalarSide {
    fn build(g: C, e0: C) -> Result<Self> {
        let fac = ScalarFactor::new(g)?;
        let n = fac.degree() + 1;
        let pts: Vec<C> = (0..n + 3).map(|k| C::from_polar(2.0 * (1.0 + e0.norm()), 0.3 + 0.7 * k as f64)).collect();
        let mut a = DMatrix::zeros(pts.len(), n);
        for (r, &e) in pts.iter().enumerate() {
            let q = e * e - e0 * e0;
            for k in 0..n {
                // Phi+(e) - Phi-(-e)
                a[(r, k)] = (fac.x_plus(e) * e.powi(k as i32) - fac.x_minus(-e) * (-e).powi(k as i32)) / q;
            }
        }
        let (basis, _) = nullspace(&a, 1e-10);
        Ok(ScalarSide { fac, e0, basis })
    }

    pub fn nullity(&self) -> usize {
        self.basis.ncols()
    }

    fn poly(&self, e: C, coef: &[C]) -> C {
        coef.iter().rev().fold(C::default(), |acc, &q| acc * e + q)
    }

    fn plus_row(&self, e: C) -> Vec<C> {
        self.row(e, self.fac.x_plus(e))
    }

    fn minus_row(&self, e: C) -> Vec<C> {
        self.row(e, self.fac.x_minus(e))
    }

    fn row(&self, e: C, x: C) -> Vec<C> {
        let q = e * e - self.e0 * self.e0;
        (0..self.basis.ncols())
            .map(|col| {
                let coef: Vec<C> = self.basis.column(col).iter().copied().collect();
                x * self.poly(e, &coef) / q
            })
            .collect()
    }
}

/// One component of the diagonal solution.
#[derive(Debug, Clone)]
pub struct DiagonalComponent {
    pub rhp1: ScalarSide,
    pub rhp2: ScalarSide,
    pub compat_nullity: usize,
    /// Weights on the two bases after compatibility and the residue fix.
    pub w1: Vec<C>,
    pub w2: Vec<C>,
}

impl DiagonalComponent {
    fn eval(side: &ScalarSide, w: &[C], row: Vec<C>) -> C {
        let _ = side;
        row.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    pub fn phi_plus(&self, e: C) -> C {
        Self::eval(&self.rhp1, &self.w1, self.rhp1.plus_row(e))
    }

    pub fn phi_minus(&self, e: C) -> C {
        Self::eval(&self.rhp1, &self.w1, self.rhp1.minus_row(e))
    }

    pub fn phi_hat_plus(&self, e: C) -> C {
        Self::eval(&self.rhp2, &self.w2, self.rhp2.plus_row(e))
    }

    pub fn phi_hat_minus(&self, e: C) -> C {
        Self::eval(&self.rhp2, &self.w2, self.rhp2.minus_row(e))
    }
}

/// The diagonal solution of both problems.
#[derive(Debug, Clone)]
pub struct DiagonalSolution {
    pub problem: WedgeProblem,
    pub comps: [DiagonalComponent; 2],
    /// `C = r+ + i`.
    pub c: Vec2,
}

/// Solve both scalar problems per component. `sample_shift` moves the
/// compatibility sample points as in the general solver.
pub fn solve_diagonal(p: &WedgeProblem, refl: &ReflectionSet, sample_shift: C) -> Result<DiagonalSolution> {
    require_normal(p)?;
    let cvec = [refl.r1p + p.i1, refl.r2p + p.i2];
    let gm = [p.g1m, p.g4m];
    let gp = [p.g1p, p.g4p];
    let mut comps = Vec::with_capacity(2);
    for j in 0..2 {
        let rhp1 = ScalarSide::build(gm[j], p.eta0)?;
        let rhp2 = ScalarSide::build(gp[j], p.eta_hat0)?;
        let (n1, n2) = (rhp1.nullity(), rhp2.nullity());
        let pts = compatibility_points(p.k0, (n1 + n2).saturating_sub(1).max(1), sample_shift);
        let mut a = DMatrix::zeros(pts.len(), n1 + n2);
        for (r, &x) in pts.iter().enumerate() {
            let eh = I * zeta(p.k0, x);
            if eh.im <= 0.0 {
                return Err(Error::Singular(format!("i zeta({x}) is not in the upper half-plane")));
            }
            let (pp, pm) = (rhp1.plus_row(x), rhp1.minus_row(x));
            for k in 0..n1 {
                a[(r, k)] = -(gp[j] + eh) / (2.0 * x) * (pp[k] - pm[k]);
            }
            for (k, v) in rhp2.plus_row(eh).into_iter().enumerate() {
                a[(r, n1 + k)] = -v;
            }
        }
        let (ns, _) = nullspace(&a, 1e-9);
        if ns.ncols() != 1 {
            return Err(Error::Consistency(format!("component {}: compatibility leaves {} free constants instead of 1", j + 1, ns.ncols())));
        }
        // residue of Phi+ at eta0 equals i C
        let e0 = p.eta0;
        let h = 1e-3 * e0.norm();
        let res: C = (0..32)
            .map(|k| {
                let d = C::from_polar(h, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 32.0);
                let row = rhp1.plus_row(e0 + d);
                let v: C = row.iter().zip(ns.column(0).iter().take(n1)).map(|(a, b)| a * b).sum();
                v * d / 32.0
            })
            .sum();
        let scale = if cvec[j].norm() == 0.0 { C::default() } else { I * cvec[j] / nonzero(res, "residue of the compatible solution")? };
        let w1 = (0..n1).map(|k| ns[(k, 0)] * scale).collect();
        let w2 = (0..n2).map(|k| ns[(n1 + k, 0)] * scale).collect();
        comps.push(DiagonalComponent { rhp1, rhp2, compat_nullity: ns.ncols(), w1, w2 });
    }
    let comps: [DiagonalComponent; 2] = comps.try_into().map_err(|_| Error::Consistency("component count".into()))?;
    Ok(DiagonalSolution { problem: *p, comps, c: cvec })
}

impl DiagonalSolution {
    pub fn phi_plus(&self, e: C) -> Vec2 {
        [self.comps[0].phi_plus(e), self.comps[1].phi_plus(e)]
    }

    pub fn phi_minus(&self, e: C) -> Vec2 {
        [self.comps[0].phi_minus(e), self.comps[1].phi_minus(e)]
    }

    pub fn phi_hat_plus(&self, e: C) -> Vec2 {
        [self.comps[0].phi_hat_plus(e), self.comps[1].phi_hat_plus(e)]
    }

    pub fn phi_hat_minus(&self, e: C) -> Vec2 {
        [self.comps[0].phi_hat_minus(e), self.comps[1].phi_hat_minus(e)]
    }

    /// Nullities of the two problems before compatibility, summed over the
    /// components, and the number of constants left after it.
    pub fn nullities(&self) -> (usize, usize, usize) {
        let n1 = self.comps.iter().map(|c| c.rhp1.nullity()).sum();
        let n2 = self.comps.iter().map(|c| c.rhp2.nullity()).sum();
        let after = self.comps.iter().map(|c| c.compat_nullity).sum();
        (n1, n2, after)
    }

    /// `D_j` read off `Phi+ (eta^2 - eta0^2)/(gamma_{j-} + eta)` at a
    /// generic point.
    pub fn amplitudes(&self) -> Vec2 {
        let p = &self.problem;
        let e = p.k0 * c(0.41, 0.73);
        let v = self.phi_plus(e);
        let q = e * e - p.eta0 * p.eta0;
        [v[0] * q / (p.g1m + e), v[1] * q / (p.g4m + e)]
    }
}

impl PhiSource for DiagonalSolution {
    fn phi_plus_any(&self, eta: C) -> Result<Vec2> {
        Ok(self.phi_plus(eta))
    }
}

/// Residuals of the diagonal pipeline against the closed forms.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleReport {
    pub phi: f64,
    pub phi_hat: f64,
    pub amplitudes: f64,
    pub lambda_m: f64,
    pub mu: f64,
    pub reflections: f64,
    /// `D` from the two sources, scaled by the incident amplitude.
    pub diffraction: f64,
    /// `|D|` itself. The closed-form field is pure geometrical optics, so
    /// this should vanish.
    pub diffraction_magnitude: f64,
    /// The closed forms against their own boundary conditions.
    pub oracle_boundary: f64,
    pub oracle_identities: f64,
}

impl OracleReport {
    pub fn worst(&self) -> f64 {
        [self.phi, self.phi_hat, self.amplitudes, self.lambda_m, self.mu, self.reflections, self.diffraction, self.diffraction_magnitude].into_iter().fold(0.0, f64::max)
    }
}

fn rel(a: Vec2, b: Vec2) -> f64 {
    vec2_norm(vec2_sub(a, b)) / vec2_norm(b).max(1e-300)
}

/// Compare the pipeline outputs with the closed forms. `d_pipeline` and
/// `d_oracle` are diffraction coefficients on the same angles.
pub fn oracle_compare(oracle: &NormalOracle, sol: &DiagonalSolution, rc: &ResidueConstants, refl: &ReflectionSet, d_pipeline: &[Vec2], d_oracle: &[Vec2]) -> OracleReport {
    let p = &sol.problem;
    let k = p.k0.norm();
    let upper: Vec<C> = (0..12).map(|j| C::from_polar(k * (0.3 + 0.4 * j as f64), 0.2 + 0.22 * j as f64)).collect();
    let mut r = OracleReport::default();
    for &e in &upper {
        r.phi = r.phi.max(rel(sol.phi_plus(e), oracle.phi_plus(e))).max(rel(sol.phi_minus(-e), oracle.phi_minus(-e)));
        r.phi_hat = r.phi_hat.max(rel(sol.phi_hat_plus(e), oracle.phi_hat_plus(e))).max(rel(sol.phi_hat_minus(-e), oracle.phi_hat_minus(-e)));
    }
    r.amplitudes = rel(sol.amplitudes(), oracle.d);
    let s = vec2_norm(oracle.inc).max(1e-300);
    r.lambda_m = [(rc.lambda_plus, oracle.lambda_plus), (rc.lambda_minus, oracle.lambda_minus), (rc.m_plus, oracle.m_plus), (rc.m_minus, oracle.m_minus)]
        .iter()
        .map(|(a, b)| vec2_norm(vec2_sub(*a, *b)) / s)
        .fold(0.0, f64::max);
    let m = &rc.mu.0;
    r.mu = (m[0][1].norm() + m[1][0].norm()).max((m[0][0] - oracle.mu[0]).norm()).max((m[1][1] - oracle.mu[1]).norm());
    let pairs = [([refl.r1p, refl.r2p], oracle.r_plus), ([refl.r1m, refl.r2m], oracle.r_minus), ([refl.R1p, refl.R2p], oracle.big_r), ([refl.R1m, refl.R2m], oracle.big_r)];
    r.reflections = pairs.iter().map(|(a, b)| vec2_norm(vec2_sub(*a, *b)) / s).fold(0.0, f64::max);
    r.diffraction = d_pipeline.iter().zip(d_oracle).map(|(a, b)| vec2_norm(vec2_sub(*a, *b)) / s).fold(0.0, f64::max);
    r.diffraction_magnitude = d_pipeline.iter().map(|a| vec2_norm(*a) / s).fold(0.0, f64::max);
    let grid: Vec<f64> = (0..40).map(|j| k * (-5.0 + 10.0 * (j as f64 + 0.5) / 40.0)).collect();
    r.oracle_boundary = oracle.boundary_residual(&grid);
    r.oracle_identities = oracle.identity_residual();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_problem, reflection_coefficients, Boundary, Gammas, RawProblem, Wavenumber};
    use std::f64::consts::PI;

    fn normal(g: [C; 4]) -> WedgeProblem {
        build_problem(&RawProblem {
            wavenumber: Wavenumber::K0(c(1.0, 0.1)),
            beta: PI / 2.0,
            theta0: PI / 3.0,
            boundary: Boundary::Gammas(Gammas { g1p: g[0], g4p: g[1], g1m: g[2], g4m: g[3] }),
            i1: c(1.0, 0.0),
            i2: c(0.3, 0.0),
        })
        .unwrap()
    }

    #[test]
    fn single_component_substitution() {
        // gamma_{1-} = eta0, i = (1, 0): D1 = 2 i eta_hat0/(eta_hat0 + gamma_{1+})
        let p0 = normal([c(1.0, -1.0), c(1.0, 2.0), c(1.0, -2.0), c(1.0, -3.0)]);
        let p = normal([c(1.0, -1.0), c(1.0, 2.0), p0.eta0, c(1.0, -3.0)]).with_incidence(c(1.0, 0.0), c(0.0, 0.0));
        let o = build_oracle(&p).unwrap();
        let want = 2.0 * I * p.eta_hat0 / (p.eta_hat0 + p.g1p);
        assert!((o.d[0] - want).norm() < 1e-14);
    }

    #[test]
    fn diagonal_matches_closed_form_in_all_cases() {
        // both zeros below, split, both above
        for g in
            [[c(1.0, -1.0), c(0.5, -2.0), c(1.0, -2.0), c(1.0, -3.0)], [c(1.0, 1.0), c(0.5, 2.0), c(1.0, -2.0), c(1.0, -3.0)], [c(1.0, 1.0), c(0.5, 2.0), c(1.0, 2.0), c(0.7, 3.0)]]
        {
            let p = normal(g);
            let refl = reflection_coefficients(&p).unwrap();
            let o = build_oracle(&p).unwrap();
            let sol = solve_diagonal(&p, &refl, C::default()).unwrap();
            assert_eq!(sol.nullities().2, 2);
            let e = c(0.3, 0.8);
            assert!(rel(sol.phi_plus(e), o.phi_plus(e)) < 1e-10, "{g:?}");
            assert!(rel(sol.phi_hat_plus(e), o.phi_hat_plus(e)) < 1e-10, "{g:?}");
            assert!(o.boundary_residual(&[-2.0, -0.5, 0.1, 1.3]) < 1e-12);
            assert!(o.identity_residual() < 1e-12);
        }
    }
}
