//! The two vector Riemann-Hilbert problems: rational ansatz through the
//! factors, symmetry and pole-removal conditions, the compatibility system
//! coupling the problems, and the residue conditions at `eta0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factorization::{build_factors, FactorData};
use crate::numerics::linalg::{nullspace, solve, vec2_norm, vec2_sub, Mat2, Vec2};
use crate::numerics::quad::circle_residue;
use crate::problem::{ReflectionSet, WedgeProblem};
use crate::spectral_matrix::{build_structural, CaseTag, HalfPlane, StructuralData};
use crate::surface::{build_surface, jacobi_inversion, Seeds, SurfaceConfig};

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub surface: SurfaceConfig,
    pub seeds: Seeds,
    /// Relative singular-value threshold for the symmetry and removal systems.
    pub nullspace_tol: f64,
    /// Threshold for the compatibility system.
    pub compat_tol: f64,
    /// Shift of the compatibility sample points, in units of `k0`.
    pub sample_shift: C,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { surface: SurfaceConfig::default(), seeds: Seeds::default(), nullspace_tol: 1e-9, compat_tol: 1e-8, sample_shift: c(0.0, 0.0) }
    }
}

/// One of the two problems with its factors and the solution space left by
/// the symmetry and removal conditions.
#[derive(Debug, Clone)]
pub struct RhpSide {
    pub problem: WedgeProblem,
    pub fac: FactorData,
    pub case: CaseTag,
    /// Degree of `P1`, `P2`.
    pub degree: usize,
    /// Zeros of `delta0` in the upper and lower half-planes.
    pub up: Vec<C>,
    pub lo: Vec<C>,
    pub nu: C,
    sym_sign: f64,
    pub sym_nullity: usize,
    /// Columns: coefficient vectors `(P1, P2)` satisfying all conditions.
    pub basis: DMatrix<C>,
    pub removal_rows: usize,
}

impl RhpSide {
    pub fn build(p: &WedgeProblem, cfg: &SolverConfig) -> Result<RhpSide> {
        let st = build_structural(p)?;
        let surf = build_surface(&st, &cfg.surface)?;
        let jac = jacobi_inversion(&surf, &[p.eta0, -p.eta0, p.eta_hat0], &cfg.seeds)?;
        let fac = build_factors(&surf, &jac)?;
        Self::from_factors(p, fac, cfg)
    }

    pub fn from_factors(p: &WedgeProblem, fac: FactorData, cfg: &SolverConfig) -> Result<RhpSide> {
        let st = &fac.surf.st;
        let case = st.case_tag;
        let k0 = fac.surf.kappa0;
        let up = st.tau_roots.iter().filter(|r| r.1 == HalfPlane::Upper).map(|r| r.0).collect();
        let lo = st.tau_roots.iter().filter(|r| r.1 == HalfPlane::Lower).map(|r| r.0).collect();
        let degree = match case {
            CaseTag::I => 5,
            CaseTag::II => 4,
            CaseTag::III => 3,
        } + k0.unsigned_abs() as usize;
        let sym_sign = if k0 % 2 == 0 { 1.0 } else { -1.0 } * if case == CaseTag::II { -1.0 } else { 1.0 };
        let mut side =
            RhpSide { problem: *p, nu: -st.delta_star / (st.sb * st.sb), fac, case, degree, up, lo, sym_sign, sym_nullity: 0, basis: DMatrix::zeros(0, 0), removal_rows: 0 };
        let sym = side.symmetry_rows();
        let (ns, _) = nullspace(&sym, cfg.nullspace_tol);
        side.sym_nullity = ns.ncols();
        let rem = side.removal_rows_matrix();
        side.removal_rows = rem.nrows();
        let a = &rem * &ns;
        let (nr, _) = nullspace(&a, cfg.nullspace_tol);
        side.basis = &ns * nr;
        Ok(side)
    }

    pub fn st(&self) -> &StructuralData {
        &self.fac.surf.st
    }

    pub fn nullity(&self) -> usize {
        self.basis.ncols()
    }

    /// Expected solution count `kappa + 3`.
    pub fn expected_nullity(&self) -> usize {
        (self.case.kappa() + 3) as usize
    }

    fn ncoef(&self) -> usize {
        2 * (self.degree + 1)
    }

    /// The `2 x 2(N+1)` map from coefficients to `(P1(e), P2(e))`.
    pub fn pmat(&self, e: C) -> DMatrix<C> {
        let n = self.degree + 1;
        let mut m = DMatrix::zeros(2, 2 * n);
        let mut p = c(1.0, 0.0);
        for j in 0..n {
            m[(0, j)] = p;
            m[(1, n + j)] = p;
            p *= e;
        }
        m
    }

    fn mat2_dm(m: &Mat2) -> DMatrix<C> {
        DMatrix::from_row_slice(2, 2, &[m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]])
    }

    fn symmetry_at(&self, e: C) -> DMatrix<C> {
        let st = self.st();
        let t = st.t_roots;
        let lhs = self.pmat(-e) * (st.sb * st.sb * (e - t[0]) * (e - t[1]));
        lhs + Self::mat2_dm(&st.g1_at(e)) * self.pmat(e) * (st.delta_star * self.sym_sign)
    }

    fn symmetry_rows(&self) -> DMatrix<C> {
        let n = 2 * self.degree + 8;
        let mut rows = DMatrix::zeros(2 * n, self.ncoef());
        for k in 0..n {
            let e = C::from_polar(2.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.3) / n as f64);
            rows.view_mut((2 * k, 0), (2, self.ncoef())).copy_from(&self.symmetry_at(e));
        }
        rows
    }

    /// `(w + l(r)) P1(r) + m(r) P2(r)` for each exceptional point `(r, w)`.
    fn removal_rows_matrix(&self) -> DMatrix<C> {
        let st = self.st();
        let j = &self.fac.jac;
        let mut pts = vec![(j.sigma1, -j.xi1), (j.sigma0, j.xi0)];
        if let Some(r) = j.rho0 {
            match self.fac.surf.kappa0 {
                1 => pts.push((-r, -self.fac.surf.sqrt_f(r))),
                -1 => pts.push((r, self.fac.surf.sqrt_f(r))),
                _ => {}
            }
        }
        let mut rows = DMatrix::zeros(pts.len(), self.ncoef());
        for (i, (r, w)) in pts.into_iter().enumerate() {
            let pm = self.pmat(r);
            let row = pm.row(0) * (w + st.l.eval(r)) + pm.row(1) * st.m.eval(r);
            rows.row_mut(i).copy_from(&row);
        }
        rows
    }

    fn denominator(&self, e: C) -> C {
        let j = &self.fac.jac;
        let mut d = (e * e - j.sigma1 * j.sigma1) * (e * e - self.problem.eta0 * self.problem.eta0);
        if let Some(r) = j.rho0 {
            d *= (e - self.fac.surf.kappa0 as f64 * r).powi(self.fac.surf.kappa0.abs());
        }
        d
    }

    /// `pre * G1 X` of the `+` representation, acting on `P/den`.
    fn plus_operator(&self, e: C) -> Result<Mat2> {
        let st = self.st();
        let t = st.t_roots;
        let mut den = (e - t[0]) * (e - t[1]);
        for z in &self.lo {
            den *= e - z;
        }
        let pre = self.nu * st.split_rho(e, HalfPlane::Upper) / den;
        Ok(st.g1_at(e) * self.fac.x_plus(e)? * pre)
    }

    fn minus_operator(&self, e: C) -> Result<Mat2> {
        let st = self.st();
        let t = st.t_roots;
        let mut num = c(1.0, 0.0);
        for z in &self.up {
            num *= e - z;
        }
        let pre = num * st.split_rho(e, HalfPlane::Lower) / ((e - t[0]) * (e - t[1]));
        Ok(self.fac.x_minus(e)? * pre)
    }

    fn apply(&self, op: Mat2, e: C, coef: &DMatrix<C>) -> DMatrix<C> {
        Self::mat2_dm(&op) * self.pmat(e) * coef / self.denominator(e)
    }

    /// `Phi+` for each column of `coef`, as a `2 x ncols` matrix.
    pub fn phi_plus_cols(&self, e: C, coef: &DMatrix<C>) -> Result<DMatrix<C>> {
        Ok(self.apply(self.plus_operator(e)?, e, coef))
    }

    pub fn phi_minus_cols(&self, e: C, coef: &DMatrix<C>) -> Result<DMatrix<C>> {
        Ok(self.apply(self.minus_operator(e)?, e, coef))
    }

    /// Polynomial symmetry identity for the coefficient vector `a`:
    /// largest coefficient of `sb^2 (e-t1)(e-t2) P(-e) + s delta* G1(e) P(e)`
    /// relative to the largest coefficient of its terms.
    pub fn symmetry_polynomial_residual(&self, a: &DVector<C>) -> f64 {
        use crate::spectral_matrix::Poly;
        let st = self.st();
        let n = self.degree + 1;
        let p1 = Poly::new(a.rows(0, n).iter().copied().collect());
        let p2 = Poly::new(a.rows(n, n).iter().copied().collect());
        let t = st.t_roots;
        let w = Poly::new(vec![t[0] * t[1], -(t[0] + t[1]), c(1.0, 0.0)]).scale(c(st.sb * st.sb, 0.0));
        let g = &st.g1;
        let s = c(st.delta_star.re, st.delta_star.im) * self.sym_sign;
        let q1a = &w * &p1.reflect();
        let q1b = (&(&g[0][0] * &p1) + &(&g[0][1] * &p2)).scale(s);
        let q2a = &w * &p2.reflect();
        let q2b = (&(&g[1][0] * &p1) + &(&g[1][1] * &p2)).scale(s);
        let scale = q1a.max_coeff().max(q1b.max_coeff()).max(q2a.max_coeff()).max(q2b.max_coeff()).max(1e-300);
        ((&q1a + &q1b).max_coeff()).max((&q2a + &q2b).max_coeff()) / scale
    }
}

/// The bracket `2 g1m g4m + k^2 cos^2(beta) - t1 t2 sin^2(beta)` under the
/// `k` and the `k0` reading.
pub fn anchor_bracket(p: &WedgeProblem, st: &StructuralData) -> (C, C) {
    let t = st.t_roots;
    let base = 2.0 * p.g1m * p.g4m - t[0] * t[1] * st.sb * st.sb;
    (base + p.k * p.k * st.cb * st.cb, base + p.k0 * p.k0 * st.cb * st.cb)
}

/// Full solution of the coupled problems.
#[derive(Debug, Clone)]
pub struct RhpSolution {
    pub rhp1: RhpSide,
    pub rhp2: RhpSide,
    pub coef1: DMatrix<C>,
    pub coef2: DMatrix<C>,
    /// `C = r+ + i`.
    pub c: Vec2,
    pub compat_nullity: usize,
    pub compat_points: Vec<C>,
    /// Coefficient space of both problems left by the compatibility system.
    pub compat_basis: DMatrix<C>,
}

fn compat_lhs(side: &RhpSide, x: C, coef: &DMatrix<C>) -> Result<(DMatrix<C>, C)> {
    let st = side.st();
    let p = &side.problem;
    let pp = side.phi_plus_cols(x, coef)?;
    let ginv = RhpSide::mat2_dm(&st.eval_g(x)?.inverse()?);
    let pm = ginv * &pp;
    let eh = c(0.0, 1.0) * st.zeta(x);
    let gp = [p.g1p, p.g4p];
    let mut out = DMatrix::zeros(2, coef.ncols());
    for jj in 0..2 {
        let sgn = if jj == 0 { -1.0 } else { 1.0 };
        for col in 0..coef.ncols() {
            out[(jj, col)] = -(gp[jj] + eh) / (2.0 * x) * (pp[(jj, col)] - pm[(jj, col)]) - sgn * (st.cb / 2.0) * (pp[(1 - jj, col)] + pm[(1 - jj, col)]);
        }
    }
    Ok((out, eh))
}

/// Residual of the compatibility relation at the given points for the final
/// coefficient vectors.
pub fn compatibility_residual(sol: &RhpSolution, pts: &[C]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in pts {
        let (l, eh) = compat_lhs(&sol.rhp1, x, &sol.coef1)?;
        let r = sol.rhp2.phi_plus_cols(eh, &sol.coef2)?;
        let scale = l.norm().max(r.norm()).max(1e-300);
        worst = worst.max((l - r).norm() / scale);
    }
    Ok(worst)
}

pub fn compatibility_points(k0: C, n: usize, shift: C) -> Vec<C> {
    (1..=n).map(|j| k0 * (c(0.37 + 0.61 * j as f64, 0.23) + shift)).collect()
}

fn compat_matrix(rhp1: &RhpSide, rhp2: &RhpSide, pts: &[C]) -> Result<DMatrix<C>> {
    let (n1, n2) = (rhp1.nullity(), rhp2.nullity());
    let mut a = DMatrix::zeros(2 * pts.len(), n1 + n2);
    for (k, &x) in pts.iter().enumerate() {
        let (l, eh) = compat_lhs(rhp1, x, &rhp1.basis)?;
        if eh.im <= 0.0 {
            return Err(Error::Singular(format!("i zeta({x}) is not in the upper half-plane")));
        }
        let r = rhp2.phi_plus_cols(eh, &rhp2.basis)?;
        a.view_mut((2 * k, 0), (2, n1)).copy_from(&l);
        a.view_mut((2 * k, n1), (2, n2)).copy_from(&(-r));
    }
    Ok(a)
}

/// Solve both problems and the coupling conditions for incidence `p`.
pub fn solve_rhp(p: &WedgeProblem, refl: &ReflectionSet, cfg: &SolverConfig) -> Result<RhpSolution> {
    let rhp1 = RhpSide::build(p, cfg)?;
    let rhp2 = RhpSide::build(&p.hat(), cfg)?;
    solve_coupled(rhp1, rhp2, refl, cfg)
}

pub fn solve_coupled(rhp1: RhpSide, rhp2: RhpSide, refl: &ReflectionSet, cfg: &SolverConfig) -> Result<RhpSolution> {
    let p = &rhp1.problem;
    let (n1, n2) = (rhp1.nullity(), rhp2.nullity());
    if n1 + n2 < 2 {
        return Err(Error::Consistency(format!("solution spaces have dimensions {n1} and {n2}")));
    }
    let npts = (n1 + n2).saturating_sub(2).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds.seed ^ 0xc0);
    let mut shift = cfg.sample_shift;
    let mut found = None;
    for _ in 0..6 {
        let pts = compatibility_points(p.k0, npts, shift);
        match compat_matrix(&rhp1, &rhp2, &pts) {
            Ok(a) => {
                let (ns, _) = nullspace(&a, cfg.compat_tol);
                if ns.ncols() == 2 {
                    found = Some((ns, pts));
                    break;
                }
                found = found.or(Some((ns, pts)));
            }
            Err(Error::Singular(_)) => {}
            Err(e) => return Err(e),
        }
        shift += c(rng.random_range(-0.05..0.05), rng.random_range(-0.03..0.03));
    }
    let (ns, pts) = found.ok_or_else(|| Error::Singular("compatibility samples all singular".into()))?;
    if ns.ncols() != 2 {
        return Err(Error::Consistency(format!("compatibility leaves {} free constants instead of 2", ns.ncols())));
    }
    let cvec = [refl.r1p + p.i1, refl.r2p + p.i2];
    let n1m = ns.rows(0, n1).into_owned();
    let e0 = p.eta0;
    let op = rhp1.plus_operator(e0)?;
    let j = &rhp1.fac.jac;
    let mut den = (e0 * e0 - j.sigma1 * j.sigma1) * 2.0 * e0;
    if let Some(r) = j.rho0 {
        den *= (e0 - rhp1.fac.surf.kappa0 as f64 * r).powi(rhp1.fac.surf.kappa0.abs());
    }
    let resmat = RhpSide::mat2_dm(&op) * rhp1.pmat(e0) * &rhp1.basis * &n1m / den;
    let rhs = DMatrix::from_column_slice(2, 1, &[c(0.0, 1.0) * cvec[0], c(0.0, 1.0) * cvec[1]]);
    let w = if cvec[0].norm() + cvec[1].norm() == 0.0 { DMatrix::zeros(2, 1) } else { solve(&resmat, &rhs)? };
    let coef1 = &rhp1.basis * &n1m * &w;
    let coef2 = &rhp2.basis * ns.rows(n1, n2) * &w;
    Ok(RhpSolution { compat_nullity: ns.ncols(), compat_points: pts, compat_basis: ns, rhp1, rhp2, coef1, coef2, c: cvec })
}

fn col(m: &DMatrix<C>) -> Vec2 {
    [m[(0, 0)], m[(1, 0)]]
}

impl RhpSolution {
    pub fn phi_plus(&self, e: C) -> Result<Vec2> {
        Ok(col(&self.rhp1.phi_plus_cols(e, &self.coef1)?))
    }
    pub fn phi_minus(&self, e: C) -> Result<Vec2> {
        Ok(col(&self.rhp1.phi_minus_cols(e, &self.coef1)?))
    }
    pub fn phi_hat_plus(&self, e: C) -> Result<Vec2> {
        Ok(col(&self.rhp2.phi_plus_cols(e, &self.coef2)?))
    }
    pub fn phi_hat_minus(&self, e: C) -> Result<Vec2> {
        Ok(col(&self.rhp2.phi_minus_cols(e, &self.coef2)?))
    }

    /// `Phi+` anywhere off its poles: directly above the axis, through the
    /// symmetry `Phi+(eta) = Phi-(-eta)` below it.
    pub fn phi_plus_any(&self, e: C) -> Result<Vec2> {
        if e.im >= 0.0 {
            self.phi_plus(e)
        } else {
            self.phi_minus(-e)
        }
    }
}

/// Residual checks of a solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct RhpReport {
    /// `|Phi+ - G Phi-|` relative on the real grid.
    pub boundary: f64,
    pub boundary_hat: f64,
    /// `|Phi+(eta) - Phi-(-eta)|` relative at random points.
    pub symmetry: f64,
    /// `|Phi(10^3 |k0| e^{i pi/3})| / |Phi(|k0|)|`.
    pub decay: f64,
    /// Residue of `Phi+` at `eta0` against `i C`.
    pub residue: f64,
    /// Residue of `Phi-` at `-eta0` against minus that of `Phi+` at `eta0`.
    pub residue_pair: f64,
    /// Compatibility relation at held-out points.
    pub held_out: f64,
    /// Polynomial symmetry identity of the assembled coefficients.
    pub sym_poly: f64,
    /// Growth of `|Phi|` approaching the removed singularities.
    pub removal: f64,
}

pub fn rhp_report(sol: &RhpSolution, grid: &[f64], seed: u64) -> Result<RhpReport> {
    let p = &sol.rhp1.problem;
    let k = p.k0.norm();
    let mut rep = RhpReport::default();
    for (side, coef, out) in [(&sol.rhp1, &sol.coef1, &mut rep.boundary), (&sol.rhp2, &sol.coef2, &mut rep.boundary_hat)] {
        let mut worst: f64 = 0.0;
        for &x in grid {
            let e = c(x, 0.0);
            let pp = col(&side.phi_plus_cols(e, coef)?);
            let pm = col(&side.phi_minus_cols(e, coef)?);
            let g = side.st().eval_g(e)?;
            let d = vec2_sub(pp, g.mul_vec(pm));
            worst = worst.max(vec2_norm(d) / vec2_norm(pp).max(1e-300));
        }
        *out = worst;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let e = c(rng.random_range(-3.0..3.0), rng.random_range(0.05..3.0)) * k;
        if (e - p.eta0).norm() < 0.05 * k {
            continue;
        }
        let a = sol.phi_plus(e)?;
        let b = sol.phi_minus(-e)?;
        rep.symmetry = rep.symmetry.max(vec2_norm(vec2_sub(a, b)) / vec2_norm(a).max(1e-300));
    }
    let far = C::from_polar(1e3 * k, std::f64::consts::FRAC_PI_3);
    let near_p = vec2_norm(sol.phi_plus(c(k, 0.0))?).max(1e-300);
    let near_m = vec2_norm(sol.phi_minus(c(k, 0.0))?).max(1e-300);
    rep.decay = (vec2_norm(sol.phi_plus(far)?) / near_p).max(vec2_norm(sol.phi_minus(far.conj())?) / near_m);
    let r = 1e-3 * k;
    let res_p: DMatrix<C> = circle_residue(|e| sol.rhp1.phi_plus_cols(e, &sol.coef1).unwrap_or_else(|_| DMatrix::zeros(2, 1)), p.eta0, r, 64);
    let target = [c(0.0, 1.0) * sol.c[0], c(0.0, 1.0) * sol.c[1]];
    let scale = vec2_norm(target).max(1e-300);
    rep.residue = vec2_norm(vec2_sub(col(&res_p), target)) / scale;
    let res_m: DMatrix<C> = circle_residue(|e| sol.rhp1.phi_minus_cols(e, &sol.coef1).unwrap_or_else(|_| DMatrix::zeros(2, 1)), -p.eta0, r, 64);
    rep.residue_pair = vec2_norm([res_m[(0, 0)] + res_p[(0, 0)], res_m[(1, 0)] + res_p[(1, 0)]]) / scale;
    let held: Vec<C> = (0..10).map(|j| p.k0 * c(0.21 + 0.47 * j as f64, 0.17 + 0.05 * (j % 3) as f64)).collect();
    rep.held_out = compatibility_residual(sol, &held)?;
    rep.sym_poly = sol.rhp1.symmetry_polynomial_residual(&DVector::from_column_slice(sol.coef1.as_slice()));
    rep.removal = removal_growth(sol)?;
    Ok(rep)
}

/// Ratio `|Phi(z + d2)| / |Phi(z + d1)|` for `d2 = 1e-2 d1` at each removed
/// singular point, largest over points; close to 1 when the singularity is
/// removable and about 100 for a surviving simple pole.
pub fn removal_growth(sol: &RhpSolution) -> Result<f64> {
    let side = &sol.rhp1;
    let j = &side.fac.jac;
    let k = side.problem.k0.norm();
    let mut pts = vec![j.sigma0, -j.sigma0, j.sigma1, -j.sigma1];
    if let Some(r) = j.rho0 {
        pts.extend([r, -r]);
    }
    pts.extend(side.st().t_roots);
    let mut worst: f64 = 0.0;
    for z in pts {
        if z.im.abs() < 1e-2 * k {
            continue;
        }
        let eval = |e: C| -> Result<f64> {
            let v = if z.im > 0.0 { sol.phi_plus(e)? } else { sol.phi_minus(e)? };
            Ok(vec2_norm(v))
        };
        let d1 = c(0.0, 1.0) * 1e-3 * k * z.im.signum();
        let (a, b) = (eval(z + d1)?, eval(z + d1 * 1e-2)?);
        worst = worst.max(b / a.max(1e-300));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use crate::problem::{build_problem, reflection_coefficients};
    use std::f64::consts::PI;

    #[test]
    fn fig2a_counts_and_residuals() {
        let p = build_problem(&preset("2a").unwrap().raw(PI / 3.0, c(1.0, 0.0), c(0.3, 0.0))).unwrap();
        let refl = reflection_coefficients(&p).unwrap();
        let sol = solve_rhp(&p, &refl, &SolverConfig::default()).unwrap();
        assert_eq!(sol.rhp1.nullity(), sol.rhp1.expected_nullity());
        assert_eq!(sol.rhp2.nullity(), sol.rhp2.expected_nullity());
        assert_eq!(sol.compat_nullity, 2);
        let k = p.k0.norm();
        let grid: Vec<f64> = (0..40).map(|j| k * (-5.0 + 10.0 * (j as f64 + 0.5) / 40.0)).collect();
        let r = rhp_report(&sol, &grid, 5).unwrap();
        assert!(r.boundary < 1e-6 && r.boundary_hat < 1e-6, "{r:?}");
        assert!(r.symmetry < 1e-9 && r.decay < 1e-2, "{r:?}");
        assert!(r.residue < 1e-6 && r.residue_pair < 1e-6 && r.held_out < 1e-6, "{r:?}");
        assert!(r.sym_poly < 1e-9 && r.removal < 2.0, "{r:?}");
    }
}
