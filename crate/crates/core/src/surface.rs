//! The two-sheeted surface `w^2 = f(eta)`: branch points, the fixed branch
//! of `sqrt(f)`, the eigenvalue-ratio logarithm, the index, the elliptic
//! reduction of the loop integrals and the Jacobi inversion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::branch::integrate_continued;
use crate::numerics::elliptic::{complete_elliptic_k, JacobiElliptic};
use crate::numerics::phase::unwrap_adaptive;
use crate::numerics::quad::{integrate_interval, integrate_segment, integrate_to_infinity, QuadratureConfig};
use crate::numerics::roots::poly_roots;
use crate::spectral_matrix::StructuralData;

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `(e - a) sqrt((e - b)/(e - a))`: a root of `(e-a)(e-b)` cut along `[a, b]`.
fn s_factor(e: C, a: C, b: C) -> C {
    (e - a) * ((e - b) / (e - a)).sqrt()
}

/// Parameter in (0, 1) at which `p0 -> p1` crosses the segment `q0 -> q1`.
pub fn segment_crossing(p0: C, p1: C, q0: C, q1: C) -> Option<f64> {
    let d = p1 - p0;
    let e = q1 - q0;
    let den = (d.conj() * e).im;
    if den.abs() < 1e-300 {
        return None;
    }
    let w = q0 - p0;
    let s = (w.conj() * e).im / den;
    let u = (w.conj() * d).im / den;
    (s > 0.0 && s < 1.0 && (0.0..=1.0).contains(&u)).then_some(s)
}

/// Sampled continuous logarithm of `lambda1/lambda2` on the positive axis.
#[derive(Debug, Clone)]
pub struct EpsilonTable {
    t: Vec<f64>,
    phase: Vec<f64>,
}

impl EpsilonTable {
    fn reference(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.phase[0];
        }
        if t >= self.t[n - 1] {
            return self.phase[n - 1];
        }
        let j = self.t.partition_point(|&x| x < t);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let w = (t - t0) / (t1 - t0);
        self.phase[j - 1] * (1.0 - w) + self.phase[j] * w
    }
    pub fn len(&self) -> usize {
        self.t.len()
    }
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Homographic reduction of the loop integrals to complete elliptic integrals.
#[derive(Debug, Clone)]
pub struct EllipticReduction {
    /// Sign chosen for the square root defining `kappa_star`.
    pub sign: i8,
    pub kappa_star: C,
    pub mu_star: C,
    pub kappa: C,
    pub mu: C,
    coef: [C; 4],
    /// `h` as measured; `h_signed` is the sign for which `loop_b = -2 h K`.
    pub h_num: C,
    pub h_signed: C,
    /// Lattice shift `j` in `loop_a = h (i K' + 2 j K)`; the principal `K'`
    /// need not be the quarter period reached by continuation.
    pub shift_a: i64,
    /// Distance of the fitted shift from an integer.
    pub shift_defect: f64,
    pub k: C,
    pub kp: C,
    pub jac: JacobiElliptic,
    /// `|u(a1^2) - 1| + |u(a4^2) + 1|`.
    pub forward_residual: f64,
    /// Constancy of `h` across two probe points.
    pub h_residual: f64,
    /// Residual of the closed form for `kappa_star^2`.
    pub kstar_residual: f64,
}

impl EllipticReduction {
    /// `t*(tau)`.
    pub fn tstar(&self, tau: C) -> C {
        let [a, b, cc, d] = self.coef;
        (a * tau + b) / (cc * tau + d)
    }
    pub fn dtstar(&self, tau: C) -> C {
        let [a, b, cc, d] = self.coef;
        (a * d - b * cc) / (cc * tau + d).powi(2)
    }
    /// Inverse map `u(T)`.
    pub fn u(&self, t: C) -> C {
        let [a, b, cc, d] = self.coef;
        (d * t - b) / (-cc * t + a)
    }
    pub fn vsq(&self, tau: C) -> C {
        (1.0 - tau * tau) * (1.0 - self.kappa * self.kappa * tau * tau)
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceData {
    pub st: StructuralData,
    /// Branch points with positive imaginary part, ascending.
    pub a: [C; 4],
    pub eps: EpsilonTable,
    /// Unrounded winding number of `lambda1/lambda2` on `(0, inf)`.
    pub winding: f64,
    pub kappa0: i32,
    pub ell: EllipticReduction,
    pub loop_a: C,
    pub loop_b: C,
    /// Direction of the two rays forming the b-loop.
    pub dir_b: C,
    pub quad: QuadratureConfig,
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceConfig {
    pub quad: QuadratureConfig,
    /// Initial samples of the index grid before adaptive refinement.
    pub eps_samples: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self { quad: QuadratureConfig::default(), eps_samples: 4000 }
    }
}

fn branch_points(st: &StructuralData) -> Result<[C; 4]> {
    let r = poly_roots(&st.h)?;
    if r.len() != 4 {
        return Err(Error::Degenerate(format!("f has {} distinct squared branch points", r.len())));
    }
    let mut a: Vec<C> = r
        .iter()
        .map(|z| {
            let s = z.sqrt();
            if s.im < 0.0 {
                -s
            } else {
                s
            }
        })
        .collect();
    a.sort_by(|x, y| x.im.total_cmp(&y.im));
    let scale = st.k0.norm();
    for (i, x) in a.iter().enumerate() {
        if x.im.abs() < 1e-9 * scale {
            return Err(Error::Degenerate(format!("branch point {x} is real")));
        }
        for y in &a[i + 1..] {
            if (x - y).norm() < 1e-9 * scale {
                return Err(Error::Degenerate(format!("repeated branch point {x}")));
            }
        }
    }
    Ok([a[0], a[1], a[2], a[3]])
}

pub fn build_surface(st: &StructuralData, cfg: &SurfaceConfig) -> Result<SurfaceData> {
    cfg.quad.validate()?;
    let a = branch_points(st)?;
    let ell_placeholder = elliptic_reduction_for(st, &a, 1)?;
    let mut surf = SurfaceData {
        st: st.clone(),
        a,
        eps: EpsilonTable { t: vec![0.0, 1.0], phase: vec![0.0, 0.0] },
        winding: 0.0,
        kappa0: 0,
        ell: ell_placeholder,
        loop_a: c(0.0, 0.0),
        loop_b: c(0.0, 0.0),
        dir_b: c(0.0, 1.0),
        quad: cfg.quad,
    };
    let (eps, winding) = compute_epsilon(&surf, cfg.eps_samples)?;
    let k0 = winding.round();
    if (winding - k0).abs() > 1e-3 {
        return Err(Error::Phase(format!("winding {winding} is not an integer")));
    }
    surf.eps = eps;
    surf.winding = winding;
    surf.kappa0 = k0 as i32;
    surf.loop_a = surf.loop_a_with(|t| t)?;
    surf.dir_b = surf.ray_direction()?;
    surf.loop_b = surf.loop_b_with(|t| t, surf.dir_b)?;
    surf.ell = elliptic_reduction(&surf)?;
    Ok(surf)
}

/// Sample `lambda1/lambda2` from large `t` down to 0 and unwrap.
fn compute_epsilon(surf: &SurfaceData, samples: usize) -> Result<(EpsilonTable, f64)> {
    let l = 2.0 * surf.st.k0.norm();
    let umap = |u: f64| l * u / (1.0 - u);
    let n = samples.max(16);
    let lo = 1e-9;
    let hi = 1.0 - 1e-9;
    let grid: Vec<f64> = (0..=n).map(|j| hi - (hi - lo) * j as f64 / n as f64).collect();
    let s = unwrap_adaptive(|u| surf.ratio(umap(u)), &grid, 40)?;
    let mut t: Vec<f64> = s.t.iter().map(|&u| umap(u)).collect();
    let mut phase = s.phase;
    // the first sample sits at t ~ 1e9 |k0| where the ratio is 1 to within rounding
    let shift = 2.0 * PI * (phase[0] / (2.0 * PI)).round();
    phase.iter_mut().for_each(|p| *p -= shift);
    t.reverse();
    phase.reverse();
    let winding = -phase[0] / (2.0 * PI);
    Ok((EpsilonTable { t, phase }, winding))
}

fn elliptic_reduction_for(st: &StructuralData, a: &[C; 4], sign: i8) -> Result<EllipticReduction> {
    let a2 = a.map(|x| x * x);
    let ks2 = (a2[1] - a2[0]) * (a2[2] - a2[3]) / ((a2[1] - a2[3]) * (a2[2] - a2[0]));
    let ks = ks2.sqrt() * sign as f64;
    let ms = (a2[1] - a2[3]) * ks / (a2[1] - a2[0]);
    let kappa = (1.0 + ks) / (1.0 - ks);
    let mu = (1.0 + ms) / (1.0 - ms);
    let coef = [a2[3] + ms * a2[0], -a2[3] + ms * a2[0], 1.0 + ms, -(1.0 - ms)];
    let jac = JacobiElliptic::new(kappa)?;
    let k = jac.k();
    let kp = complete_elliptic_k((1.0 - kappa * kappa).sqrt())?;
    let mut red = EllipticReduction {
        sign,
        kappa_star: ks,
        mu_star: ms,
        kappa,
        mu,
        coef,
        h_num: c(1.0, 0.0),
        h_signed: c(1.0, 0.0),
        shift_a: 0,
        shift_defect: 0.0,
        k,
        kp,
        jac,
        forward_residual: 0.0,
        h_residual: 0.0,
        kstar_residual: 0.0,
    };
    let fstar = |t: C| st.h.iter().rev().fold(c(0.0, 0.0), |acc, &x| acc * t + x);
    let probe = |red: &EllipticReduction, tau: C| {
        let v = red.vsq(tau).sqrt();
        (red.dtstar(tau) * v, fstar(red.tstar(tau)))
    };
    let (num, fs) = probe(&red, c(0.3, 0.2));
    red.h_num = num / fs.sqrt();
    let (num2, fs2) = probe(&red, c(-0.1, 0.5));
    red.h_residual = (num2 * num2 / fs2 / (red.h_num * red.h_num) - 1.0).norm();
    red.forward_residual = (red.u(a2[0]) - 1.0).norm() + (red.u(a2[3]) + 1.0).norm();
    red.kstar_residual = (ks * ks - ks2).norm() / ks2.norm();
    Ok(red)
}

/// Reduction with the sign of `h` fixed by the b-loop and the lattice
/// shift of the a-loop measured.
pub fn elliptic_reduction(surf: &SurfaceData) -> Result<EllipticReduction> {
    let mut best: Option<(f64, EllipticReduction)> = None;
    for sign in [1i8, -1] {
        let mut red = elliptic_reduction_for(&surf.st, &surf.a, sign)?;
        if red.forward_residual > 1e-8 {
            continue;
        }
        for h in [red.h_num, -red.h_num] {
            let err = (surf.loop_b + 2.0 * h * red.k).norm() / surf.loop_b.norm();
            if best.as_ref().is_none_or(|b| err < b.0) {
                red.h_signed = h;
                let x = (surf.loop_a / h - c(0.0, 1.0) * red.kp) / (2.0 * red.k);
                red.shift_a = x.re.round() as i64;
                red.shift_defect = (x - red.shift_a as f64).norm();
                best = Some((err, red.clone()));
            }
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::Degenerate("homographic map fails its forward check for both signs".into()))
}

impl SurfaceData {
    /// Fixed branch of `sqrt(f)`: cuts along `[a1, a2]`, `[a3, a4]` and
    /// their reflections, `~ 2 i sin^4(beta) eta^4` at infinity.
    pub fn sqrt_f(&self, e: C) -> C {
        let a = &self.a;
        c(0.0, 2.0 * self.st.sb.powi(4)) * s_factor(e, a[0], a[1]) * s_factor(e, a[2], a[3]) * s_factor(e, -a[0], -a[1]) * s_factor(e, -a[2], -a[3])
    }

    pub fn f(&self, e: C) -> C {
        self.st.f.eval(e)
    }

    pub fn cuts(&self) -> [(C, C); 4] {
        let a = &self.a;
        [(a[0], a[1]), (a[2], a[3]), (-a[0], -a[1]), (-a[2], -a[3])]
    }

    /// Sorted crossing parameters of the segment `p0 -> p1` with the cuts.
    pub fn crossings(&self, p0: C, p1: C) -> Vec<f64> {
        let mut v: Vec<f64> = self.cuts().iter().filter_map(|q| segment_crossing(p0, p1, q.0, q.1)).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `lambda1 / lambda2` at real `t` on the fixed branch.
    pub fn ratio(&self, t: f64) -> C {
        let tc = c(t, 0.0);
        self.st.eigen_ratio(tc, self.sqrt_f(tc))
    }

    /// `epsilon(t) = log(lambda1/lambda2)` continued from `epsilon(inf) = 0`;
    /// odd in `t`.
    pub fn epsilon(&self, t: f64) -> C {
        if t == 0.0 {
            return c(0.0, 0.0);
        }
        if t < 0.0 {
            return -self.epsilon(-t);
        }
        let v = self.ratio(t).ln();
        let r = self.eps.reference(t);
        let n = ((r - v.im) / (2.0 * PI)).round();
        v + c(0.0, 2.0 * PI * n)
    }

    /// Integral of `g(z)/xi(z) dz` along `z0 -> z1`, with `xi` the
    /// continuation of `sign0 * sqrt_f(z0)`; returns the integral and `xi(z1)`.
    pub fn segment_integral<G: Fn(C) -> C>(&self, z0: C, z1: C, g: G, sign0: f64) -> Result<(C, C)> {
        let cr = self.crossings(z0, z1);
        let mut br = vec![0.0];
        br.extend(cr.iter().copied());
        br.push(1.0);
        let mut total = c(0.0, 0.0);
        for (k, w) in br.windows(2).enumerate() {
            let sg = sign0 * if k % 2 == 1 { -1.0 } else { 1.0 };
            let (p, q) = (z0 + (z1 - z0) * w[0], z0 + (z1 - z0) * w[1]);
            total += integrate_segment(|z| g(z) / (self.sqrt_f(z) * sg), p, q, &self.quad)?;
        }
        let sg = sign0 * if cr.len() % 2 == 1 { -1.0 } else { 1.0 };
        Ok((total, self.sqrt_f(z1) * sg))
    }

    /// Twice the integral of `g(t) dt / w` along one bank of `[a1, a2]`.
    pub fn loop_a_with<G: Fn(C) -> C>(&self, g: G) -> Result<C> {
        let a = &self.a;
        let half = (a[1] - a[0]) / 2.0;
        let pre = c(0.0, 1.0) * c(0.0, 2.0 * self.st.sb.powi(4));
        let v = integrate_interval(
            |th| {
                let t = a[0] + half * (1.0 - th.cos());
                let o = s_factor(t, a[2], a[3]) * s_factor(t, -a[0], -a[1]) * s_factor(t, -a[2], -a[3]);
                g(t) / (pre * o)
            },
            0.0,
            PI,
            &self.quad,
        )?;
        Ok(2.0 * v)
    }

    fn ray_with<G: Fn(C) -> C>(&self, g: &G, a: C, d: C) -> Result<C> {
        integrate_interval(
            |x| {
                if x >= 1.0 {
                    return c(0.0, 0.0);
                }
                let s = x / (1.0 - x);
                let t = a + d * s * s;
                g(t) / self.sqrt_f(t) * d * (2.0 * x / (1.0 - x).powi(3))
            },
            0.0,
            1.0,
            &self.quad,
        )
    }

    /// The b-loop through infinity: rays from `a2` and `a3` in direction `d`.
    pub fn loop_b_with<G: Fn(C) -> C>(&self, g: G, d: C) -> Result<C> {
        Ok(2.0 * (self.ray_with(&g, self.a[1], d)? - self.ray_with(&g, self.a[2], d)?))
    }

    /// A ray direction along which neither ray meets a cut.
    pub fn ray_direction(&self) -> Result<C> {
        self.ray_directions().into_iter().next().ok_or_else(|| Error::Degenerate("no cut-free ray direction for the b-loop".into()))
    }

    pub fn ray_directions(&self) -> Vec<C> {
        self.direction_grid().into_iter().filter(|&d| self.ray_clear(d)).collect()
    }

    fn direction_grid(&self) -> Vec<C> {
        (0..60).map(|j| C::from_polar(1.0, 0.05 + (PI - 0.1) * j as f64 / 59.0)).collect()
    }

    fn ray_clear(&self, d: C) -> bool {
        let far = 100.0 * (self.a[3].norm() + self.st.k0.norm());
        self.crossings(self.a[1], self.a[1] + d * far).is_empty() && self.crossings(self.a[2], self.a[2] + d * far).is_empty()
    }

    /// The cut-free direction farthest from `dir_b` that can be reached
    /// from it without the rays sweeping over a branch point.
    pub fn alternate_ray_direction(&self) -> C {
        let grid = self.direction_grid();
        let Some(i0) = grid.iter().position(|&d| (d - self.dir_b).norm() < 1e-12) else {
            return self.dir_b;
        };
        // rotating a ray over the cut attached to its start flips its sheet
        let attached = [self.a[0] - self.a[1], self.a[3] - self.a[2]];
        let step_ok = |d0: C, d1: C| self.ray_clear(d1) && attached.iter().all(|q| (q.conj() * d0).im.signum() == (q.conj() * d1).im.signum());
        let mut hi = i0;
        while hi + 1 < grid.len() && step_ok(grid[hi], grid[hi + 1]) {
            hi += 1;
        }
        let mut lo = i0;
        while lo > 0 && step_ok(grid[lo], grid[lo - 1]) {
            lo -= 1;
        }
        if hi - i0 >= i0 - lo {
            grid[hi]
        } else {
            grid[lo]
        }
    }

    /// `(1/2 pi i) int_0^inf epsilon(t) g(t) / sqrt_f(t) dt`.
    pub fn epsilon_integral<G: Fn(f64) -> C>(&self, g: G) -> Result<C> {
        self.epsilon_integral_reaching(g, 0.0)
    }

    /// As `epsilon_integral`, for a `g` varying on the scale `reach` (a
    /// kernel with poles at `+-eta` has `reach = |eta|`). The tail is cut
    /// geometrically past `reach` so the adaptive rule cannot step over it.
    pub fn epsilon_integral_reaching<G: Fn(f64) -> C>(&self, g: G, reach: f64) -> Result<C> {
        let split = 2.0 * self.st.k0.norm();
        let h = |t: f64| if t == 0.0 { c(0.0, 0.0) } else { self.epsilon(t) * g(t) / self.sqrt_f(c(t, 0.0)) };
        let mut total = integrate_interval(h, 0.0, split, &self.quad)?;
        let mut a = split;
        while a < 8.0 * reach {
            total += integrate_interval(h, a, 4.0 * a, &self.quad)?;
            a *= 4.0;
        }
        total += integrate_to_infinity(h, a, a, &self.quad)?;
        Ok(total / c(0.0, 2.0 * PI))
    }

    /// Points the reference points must avoid.
    pub fn excluded_points(&self) -> Vec<C> {
        let mut v: Vec<C> = self.a.iter().flat_map(|&z| [z, -z]).collect();
        v.extend(self.st.t_roots.iter().flat_map(|&z| [z, -z]));
        v.extend(self.st.tau_roots.iter().flat_map(|r| [r.0, -r.0]));
        v.push(c(0.0, 0.0));
        v
    }
}

/// Solution of the Jacobi inversion problem.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    pub rho0: Option<C>,
    pub sigma0: C,
    pub xi0: C,
    /// Argument of `sn` producing `sigma1`.
    pub d_hat: C,
    pub tau1: C,
    pub sigma1: C,
    pub xi1: C,
    /// 1 if `xi1` is the fixed branch at `sigma1`, 2 otherwise.
    pub sheet: u8,
    pub m0: i64,
    pub n0: i64,
    pub mn_raw: (f64, f64),
    /// Sum of all terms of the inversion condition.
    pub closure: C,
    /// Weighted `epsilon` integral plus the `[0, rho0]` term.
    pub t_integral: C,
    pub segment_integral: C,
}

/// Reference points chosen for an inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seeds {
    pub rho0: Option<C>,
    pub sigma0: Option<C>,
    pub seed: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { rho0: None, sigma0: None, seed: 0x5eed }
    }
}

fn far_from(z: C, pts: &[C], tol: f64) -> bool {
    pts.iter().all(|p| (z - p).norm() > tol)
}

/// Inversion with seeded retries of the reference points.
pub fn jacobi_inversion(surf: &SurfaceData, extra_excluded: &[C], seeds: &Seeds) -> Result<JacobiSolution> {
    let k0n = surf.st.k0.norm();
    let mut excl = surf.excluded_points();
    excl.extend_from_slice(extra_excluded);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.seed);
    let tol = 1e-3 * k0n;
    let valid_rho = |r: C| r.im > 0.0 && far_from(r, &excl, tol) && surf.crossings(c(0.0, 0.0), r).is_empty();
    let valid_sigma = |s: C| s.im > 0.0 && far_from(s, &excl, tol);
    let mut last_err = None;
    for attempt in 0..12 {
        let jitter = |rng: &mut ChaCha8Rng, z: C| {
            if attempt == 0 {
                z
            } else {
                z + c(rng.random_range(-0.3..0.3), rng.random_range(-0.2..0.3)) * k0n
            }
        };
        let rho0 = if surf.kappa0 != 0 {
            let base = seeds.rho0.unwrap_or(surf.a[0] / 2.0 + c(0.0, k0n));
            let r = jitter(&mut rng, base);
            if valid_rho(r) {
                Some(r)
            } else {
                // nearest admissible points of a grid over the upper half-plane
                let mut grid: Vec<C> = (0..61).flat_map(|i| (1..41).map(move |j| c(-3.0 + 0.1 * i as f64, 0.075 * j as f64) * k0n)).filter(|&z| valid_rho(z)).collect();
                if grid.is_empty() {
                    return Err(Error::Degenerate("no admissible rho0".into()));
                }
                grid.sort_by(|x, y| (x - base).norm().total_cmp(&(y - base).norm()));
                let pick = if attempt == 0 { 0 } else { rng.random_range(0..grid.len().min(20)) };
                Some(grid[pick])
            }
        } else {
            None
        };
        let base = seeds.sigma0.unwrap_or(c(0.4, 0.6) * k0n);
        let mut s0 = jitter(&mut rng, base);
        let mut tries = 0;
        while !valid_sigma(s0) && tries < 200 {
            s0 = base + c(rng.random_range(-0.3..0.3), rng.random_range(-0.2..0.3)) * k0n;
            tries += 1;
        }
        match invert_once(surf, rho0, s0) {
            Ok(j) => return Ok(j),
            Err(e) => {
                if seeds.sigma0.is_some() && (seeds.rho0.is_some() || surf.kappa0 == 0) {
                    return Err(e);
                }
                last_err = Some(e)
            }
        }
    }
    Err(last_err.unwrap_or(Error::Inversion { candidates: vec![] }))
}

/// `int_0^tau dtau / v` with `v` continued from `v(0) = 1`, adjusted to end
/// on the root `v_end`.
fn w_integral(red: &EllipticReduction, tau: C, v_end: C) -> Result<C> {
    let r = integrate_continued(|z| red.vsq(z), |_, s| 1.0 / s, c(0.0, 0.0), tau, c(1.0, 0.0), 1e-13)?;
    let scale = v_end.norm().max(1e-300);
    if (r.end_root - v_end).norm() < 1e-6 * scale {
        Ok(r.value)
    } else if (r.end_root + v_end).norm() < 1e-6 * scale {
        Ok(2.0 * red.k - r.value)
    } else {
        Err(Error::Consistency(format!("elliptic root continuation ends at {} instead of +-{v_end}", r.end_root)))
    }
}

pub fn invert_once(surf: &SurfaceData, rho0: Option<C>, sigma0: C) -> Result<JacobiSolution> {
    let red = &surf.ell;
    let h = red.h_signed;
    let mut t_int = surf.epsilon_integral(|t| c(t, 0.0))?;
    if let Some(r) = rho0 {
        let (ir, _) = surf.segment_integral(c(0.0, 0.0), r, |t| t, 1.0)?;
        t_int += surf.kappa0 as f64 * ir;
    }
    let xi0 = surf.sqrt_f(sigma0);
    let tau0 = red.u(sigma0 * sigma0);
    let v0 = h * xi0 / red.dtstar(tau0);
    let w0 = w_integral(red, tau0, v0)?;
    let d = w0 - 2.0 * t_int / h;
    let [sn, cn, dn] = red.jac.sncndn(d);
    let tau1 = sn;
    let s1sq = red.tstar(tau1);
    let xi1 = cn * dn * red.dtstar(tau1) / h;
    let mut candidates = Vec::new();
    let m = [[surf.loop_a.re, surf.loop_b.re], [surf.loop_a.im, surf.loop_b.im]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    for sgn in [1.0, -1.0] {
        let s1 = s1sq.sqrt() * sgn;
        if s1.im.abs() < 1e-12 * surf.st.k0.norm() {
            continue;
        }
        let (ic, xend) = surf.segment_integral(sigma0, s1, |t| t, 1.0)?;
        if (xend / xi1 - 1.0).norm() >= 1e-6 {
            continue;
        }
        let rhs = -(t_int + ic);
        let mr = (rhs.re * m[1][1] - m[0][1] * rhs.im) / det;
        let nr = (m[0][0] * rhs.im - m[1][0] * rhs.re) / det;
        candidates.push((mr, nr));
        if (mr - mr.round()).abs() > 1e-6 || (nr - nr.round()).abs() > 1e-6 {
            continue;
        }
        let (m0, n0) = (mr.round() as i64, nr.round() as i64);
        let closure = t_int + ic + surf.loop_a * m0 as f64 + surf.loop_b * n0 as f64;
        let sheet = if (xi1 / surf.sqrt_f(s1) - 1.0).norm() < 1e-6 { 1 } else { 2 };
        return Ok(JacobiSolution { rho0, sigma0, xi0, d_hat: d, tau1, sigma1: s1, xi1, sheet, m0, n0, mn_raw: (mr, nr), closure, t_integral: t_int, segment_integral: ic });
    }
    Err(Error::Inversion { candidates })
}

/// Independent re-evaluation of the inversion condition and of the loop
/// formulas by different quadrature paths.
#[derive(Debug, Clone, Copy)]
pub struct ClosureReport {
    /// Inversion condition summed from independently recomputed terms.
    pub closure: f64,
    pub integer_defect: f64,
    /// `|loop_a - h (i K' + 2 j K)| / |loop_a|` with the fitted shift `j`.
    pub loop_a_formula: f64,
    /// `|loop_b + 2 h K| / |loop_b|`.
    pub loop_b_formula: f64,
    /// Loop a as a closed contour around its cut versus the bank integral.
    pub loop_a_contour: f64,
    /// Loop b with a second ray direction.
    pub loop_b_direction: f64,
}

fn polygon_integral<G: Fn(C) -> C>(surf: &SurfaceData, verts: &[C], g: &G) -> Result<C> {
    let mut s = surf.sqrt_f(verts[0]);
    let mut total = c(0.0, 0.0);
    for k in 0..verts.len() {
        let (z0, z1) = (verts[k], verts[(k + 1) % verts.len()]);
        let r = integrate_continued(|z| surf.f(z), |z, w| g(z) / w, z0, z1, s, 1e-12)?;
        total += r.value;
        s = r.end_root;
    }
    Ok(total)
}

pub fn closure_report(surf: &SurfaceData, jac: &JacobiSolution) -> Result<ClosureReport> {
    let a = &surf.a;
    // epsilon term with a different split of the half line
    let split = 3.5 * surf.st.k0.norm();
    let h = |t: f64| if t == 0.0 { c(0.0, 0.0) } else { surf.epsilon(t) * t / surf.sqrt_f(c(t, 0.0)) };
    let mut q = surf.quad;
    q.rel_tol = 1e-11;
    let mut t_int = (integrate_interval(h, 0.0, split, &q)? + integrate_to_infinity(h, split, 0.5 * split, &q)?) / c(0.0, 2.0 * PI);
    // path terms by root continuation instead of cut bookkeeping
    if let Some(r) = jac.rho0 {
        let ir = integrate_continued(|z| surf.f(z), |z, w| z / w, c(0.0, 0.0), r, surf.sqrt_f(c(0.0, 0.0)), 1e-12)?;
        t_int += surf.kappa0 as f64 * ir.value;
    }
    let ic = integrate_continued(|z| surf.f(z), |z, w| z / w, jac.sigma0, jac.sigma1, jac.xi0, 1e-12)?;
    // loop a as a closed stadium around its cut
    let along = a[1] - a[0];
    let dir = along / along.norm();
    let others = [a[2], a[3], -a[0], -a[1], -a[2], -a[3]];
    let dist = |z: C| {
        let s = ((z - a[0]) / along).re.clamp(0.0, 1.0);
        (z - a[0] - along * s).norm()
    };
    let delta = 0.3 * others.iter().map(|&z| dist(z)).fold(f64::INFINITY, f64::min);
    let mut verts = Vec::new();
    for k in 0..48 {
        let th = -PI / 2.0 + PI * k as f64 / 48.0;
        verts.push(a[1] + dir * C::from_polar(delta, th));
    }
    for k in 0..48 {
        let th = PI / 2.0 + PI * k as f64 / 48.0;
        verts.push(a[0] + dir * C::from_polar(delta, th));
    }
    let la_c = polygon_integral(surf, &verts, &|t| t)?;
    let loop_a_contour = (la_c.norm() - surf.loop_a.norm()).abs() / surf.loop_a.norm();
    let d2 = surf.alternate_ray_direction();
    let lb2 = surf.loop_b_with(|t| t, d2)?;
    let loop_b_direction = (lb2 - surf.loop_b).norm() / surf.loop_b.norm();
    let closure = t_int + ic.value + la_c * (jac.m0 as f64) * (surf.loop_a / la_c).re.signum() + lb2 * jac.n0 as f64;
    let hs = surf.ell.h_signed;
    Ok(ClosureReport {
        closure: closure.norm(),
        integer_defect: (jac.mn_raw.0 - jac.m0 as f64).abs().max((jac.mn_raw.1 - jac.n0 as f64).abs()),
        loop_a_formula: (surf.loop_a - hs * (c(0.0, 1.0) * surf.ell.kp + 2.0 * surf.ell.shift_a as f64 * surf.ell.k)).norm() / surf.loop_a.norm(),
        loop_b_formula: (surf.loop_b + 2.0 * hs * surf.ell.k).norm() / surf.loop_b.norm(),
        loop_a_contour,
        loop_b_direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_problem, Boundary, Gammas, RawProblem, Wavenumber};
    use crate::spectral_matrix::build_structural;
    use std::f64::consts::FRAC_PI_4;

    fn fig2a() -> StructuralData {
        let p = build_problem(&RawProblem {
            wavenumber: Wavenumber::K0(c(1.0, 0.1)),
            beta: FRAC_PI_4,
            theta0: PI / 3.0,
            boundary: Boundary::Gammas(Gammas { g1p: c(1.0, -1.0), g4p: c(1.0, 2.0), g1m: c(1.0, -2.0), g4m: c(1.0, -3.0) }),
            i1: c(1.0, 0.0),
            i2: c(0.0, 0.0),
        })
        .unwrap();
        build_structural(&p).unwrap()
    }

    #[test]
    fn sqrt_f_branch() {
        let st = fig2a();
        let s = build_surface(&st, &SurfaceConfig::default()).unwrap();
        for k in 0..100 {
            let x = c(-5.0 + 0.1 * k as f64 + 0.013, 0.0);
            let w = s.sqrt_f(x);
            assert!((w * w - s.f(x)).norm() < 1e-10 * s.f(x).norm());
            assert!((w - s.sqrt_f(-x)).norm() < 1e-12 * w.norm());
        }
        let big = c(1e4, 0.0);
        let r = s.sqrt_f(big) / (c(0.0, 2.0 * st.sb.powi(4)) * 1e16);
        assert!((r - 1.0).norm() < 1e-3);
    }

    #[test]
    fn index_and_reduction_fig2a() {
        let s = build_surface(&fig2a(), &SurfaceConfig::default()).unwrap();
        assert_eq!(s.kappa0, 0);
        assert!(s.ell.forward_residual < 1e-10);
        assert!(s.ell.h_residual < 1e-10);
        assert!((s.epsilon(1.3) + s.epsilon(-1.3)).norm() < 1e-14);
    }

    #[test]
    fn inversion_fig2a() {
        let s = build_surface(&fig2a(), &SurfaceConfig::default()).unwrap();
        let j = jacobi_inversion(&s, &[], &Seeds::default()).unwrap();
        assert!(j.closure.norm() < 1e-8, "{:?}", j.closure);
        let rep = closure_report(&s, &j).unwrap();
        assert!(rep.closure < 1e-6, "{rep:?}");
        assert!(rep.loop_a_formula < 1e-6 && rep.loop_b_formula < 1e-6, "{rep:?}");
        assert!(rep.loop_a_contour < 1e-7 && rep.loop_b_direction < 1e-8, "{rep:?}");
    }

    #[test]
    fn crossing_detection() {
        assert_eq!(segment_crossing(c(0.0, 0.0), c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0)), Some(0.5));
        assert_eq!(segment_crossing(c(0.0, 0.0), c(2.0, 0.0), c(3.0, -1.0), c(3.0, 1.0)), None);
    }
}
