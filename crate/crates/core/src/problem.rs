//! Physical inputs, derived spectral scalars and geometric-optics
//! reflection coefficients.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type C = Complex64;

/// Impedance parameters as they appear in the boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gammas {
    pub g1p: C,
    pub g4p: C,
    pub g1m: C,
    pub g4m: C,
}

/// Surface impedances of the two faces (`+` vertical, `-` horizontal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impedances {
    pub eta_rr_p: C,
    pub eta_zz_p: C,
    pub eta_rr_m: C,
    pub eta_zz_m: C,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavenumber {
    /// Free-space wavenumber `k`; `k0 = k sin(beta)`.
    K(C),
    /// Transverse wavenumber `k0` given directly.
    K0(C),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Gammas(Gammas),
    Impedances(Impedances),
}

/// Unvalidated parameter record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawProblem {
    pub wavenumber: Wavenumber,
    pub beta: f64,
    pub theta0: f64,
    pub boundary: Boundary,
    pub i1: C,
    pub i2: C,
}

/// How the impedance parameters were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GammasGiven,
    FromImpedances,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeProblem {
    pub k: C,
    pub k0: C,
    pub beta: f64,
    pub theta0: f64,
    pub g1p: C,
    pub g4p: C,
    pub g1m: C,
    pub g4m: C,
    pub i1: C,
    pub i2: C,
    pub eta0: C,
    pub eta_hat0: C,
    pub provenance: Provenance,
}

/// `gamma1 = k sin^2(beta) / eta_rr`, `gamma4 = k sin^2(beta) eta_zz`.
pub fn gammas_from_impedances(k: C, beta: f64, z: &Impedances) -> Gammas {
    let s2 = beta.sin().powi(2);
    Gammas { g1p: k * s2 / z.eta_rr_p, g4p: k * s2 * z.eta_zz_p, g1m: k * s2 / z.eta_rr_m, g4m: k * s2 * z.eta_zz_m }
}

pub fn impedances_from_gammas(k: C, beta: f64, g: &Gammas) -> Impedances {
    let s2 = beta.sin().powi(2);
    Impedances { eta_rr_p: k * s2 / g.g1p, eta_zz_p: g.g4p / (k * s2), eta_rr_m: k * s2 / g.g1m, eta_zz_m: g.g4m / (k * s2) }
}

fn finite(z: C) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn build_problem(raw: &RawProblem) -> Result<WedgeProblem> {
    let mut bad = Vec::new();
    let beta = raw.beta;
    if !(beta > 0.0 && beta < std::f64::consts::PI) {
        bad.push(format!("beta = {beta} must lie in (0, pi)"));
    }
    if !(raw.theta0 > 0.0 && raw.theta0 < FRAC_PI_2) {
        bad.push(format!("theta0 = {} must lie in (0, pi/2)", raw.theta0));
    }
    let sb = beta.sin();
    let (k, k0) = match raw.wavenumber {
        Wavenumber::K(k) => (k, k * sb),
        Wavenumber::K0(k0) => (k0 / sb, k0),
    };
    if !finite(k) || !(k.im > 0.0) {
        bad.push(format!("wavenumber k = {k} must have Im k > 0"));
    }
    let (g, provenance) = match raw.boundary {
        Boundary::Gammas(g) => (g, Provenance::GammasGiven),
        Boundary::Impedances(z) => {
            for (name, v) in [("eta_rr+", z.eta_rr_p), ("eta_rr-", z.eta_rr_m)] {
                if v.norm() == 0.0 {
                    bad.push(format!("impedance {name} must be nonzero"));
                }
            }
            (gammas_from_impedances(k, beta, &z), Provenance::FromImpedances)
        }
    };
    for (name, v) in [("gamma1+", g.g1p), ("gamma4+", g.g4p), ("gamma1-", g.g1m), ("gamma4-", g.g4m), ("i1", raw.i1), ("i2", raw.i2)] {
        if !finite(v) {
            bad.push(format!("{name} is not finite"));
        }
    }
    if (g.g1p + g.g4p).norm() <= 1e-14 * (1.0 + g.g1p.norm()) {
        bad.push("gamma1+ + gamma4+ must be nonzero".into());
    }
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }
    Ok(WedgeProblem {
        k,
        k0,
        beta,
        theta0: raw.theta0,
        g1p: g.g1p,
        g4p: g.g4p,
        g1m: g.g1m,
        g4m: g.g4m,
        i1: raw.i1,
        i2: raw.i2,
        eta0: k0 * raw.theta0.sin(),
        eta_hat0: k0 * raw.theta0.cos(),
        provenance,
    })
}

impl WedgeProblem {
    pub fn cos_beta(&self) -> f64 {
        self.beta.cos()
    }
    pub fn sin_beta(&self) -> f64 {
        self.beta.sin()
    }
    pub fn gammas(&self) -> Gammas {
        Gammas { g1p: self.g1p, g4p: self.g4p, g1m: self.g1m, g4m: self.g4m }
    }
    /// Exact normal incidence, where the two polarizations decouple.
    pub fn is_normal_incidence(&self) -> bool {
        self.cos_beta().abs() < 1e-14
    }
    /// Companion problem with the roles of the two faces exchanged:
    /// `gamma+ <-> gamma-`, `beta -> pi - beta`, `theta0 -> pi/2 - theta0`.
    pub fn hat(&self) -> WedgeProblem {
        let theta0 = FRAC_PI_2 - self.theta0;
        WedgeProblem {
            beta: std::f64::consts::PI - self.beta,
            theta0,
            g1p: self.g1m,
            g4p: self.g4m,
            g1m: self.g1p,
            g4m: self.g4p,
            eta0: self.eta_hat0,
            eta_hat0: self.eta0,
            ..*self
        }
    }
    pub fn with_incidence(&self, i1: C, i2: C) -> WedgeProblem {
        WedgeProblem { i1, i2, ..*self }
    }
    pub fn with_beta(&self, beta: f64) -> Result<WedgeProblem> {
        let raw = RawProblem { wavenumber: Wavenumber::K0(self.k0), beta, theta0: self.theta0, boundary: Boundary::Gammas(self.gammas()), i1: self.i1, i2: self.i2 };
        build_problem(&raw)
    }
}

/// Amplitudes of the four reflected plane waves and their intermediates.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionSet {
    pub r1p: C,
    pub r2p: C,
    pub r1m: C,
    pub r2m: C,
    pub R1p: C,
    pub R2p: C,
    pub R1m: C,
    pub R2m: C,
    pub K1p: C,
    pub K1m: C,
    pub K2: C,
    pub K1hat_p: C,
    pub K1hat_m: C,
    pub K2hat: C,
    pub Delta0: C,
    pub Delta0_hat: C,
}

pub fn reflection_coefficients(p: &WedgeProblem) -> Result<ReflectionSet> {
    let (e0, eh) = (p.eta0, p.eta_hat0);
    let cb = p.cos_beta();
    let d0 = (eh + p.g1p) * (eh + p.g4p) + e0 * e0 * cb * cb;
    let dh = (e0 + p.g1m) * (e0 + p.g4m) + eh * eh * cb * cb;
    let scale = (1.0 + p.k0.norm() + p.g1p.norm() + p.g4p.norm() + p.g1m.norm() + p.g4m.norm()).powi(2);
    if d0.norm() < 1e-13 * scale {
        return Err(Error::Singular("Delta0 vanishes".into()));
    }
    if dh.norm() < 1e-13 * scale {
        return Err(Error::Singular("Delta0_hat vanishes".into()));
    }
    let k1p = ((eh + p.g1p) * (eh - p.g4p) - e0 * e0 * cb * cb) / d0;
    let k1m = ((eh - p.g1p) * (eh + p.g4p) - e0 * e0 * cb * cb) / d0;
    let k2 = 2.0 * e0 * eh * cb / d0;
    let kh1p = ((e0 + p.g1m) * (e0 - p.g4m) - eh * eh * cb * cb) / dh;
    let kh1m = ((e0 - p.g1m) * (e0 + p.g4m) - eh * eh * cb * cb) / dh;
    let kh2 = 2.0 * e0 * eh * cb / dh;
    let (i1, i2) = (p.i1, p.i2);
    let r1p = k1m * i1 + k2 * i2;
    let r2p = -k2 * i1 + k1p * i2;
    let r1m = kh1m * i1 - kh2 * i2;
    let r2m = kh2 * i1 + kh1p * i2;
    Ok(ReflectionSet {
        r1p,
        r2p,
        r1m,
        r2m,
        R1p: kh1m * r1p + kh2 * r2p,
        R2p: -kh2 * r1p + kh1p * r2p,
        R1m: k1m * r1m - k2 * r2m,
        R2m: k2 * r1m + k1p * r2m,
        K1p: k1p,
        K1m: k1m,
        K2: k2,
        K1hat_p: kh1p,
        K1hat_m: kh1m,
        K2hat: kh2,
        Delta0: d0,
        Delta0_hat: dh,
    })
}

/// A plane wave `(a1, a2) exp(i (px x + py y))`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub amp: [C; 2],
    pub px: C,
    pub py: C,
}

impl PlaneWave {
    fn eval(&self, x: f64, y: f64) -> ([C; 2], [C; 2], [C; 2]) {
        let e = (C::i() * (self.px * x + self.py * y)).exp();
        let v = [self.amp[0] * e, self.amp[1] * e];
        let dx = [C::i() * self.px * v[0], C::i() * self.px * v[1]];
        let dy = [C::i() * self.py * v[0], C::i() * self.py * v[1]];
        (v, dx, dy)
    }
}

/// Incident and reflected waves: `[incident, r+, r-, R+, R-]`.
pub fn plane_waves(p: &WedgeProblem, r: &ReflectionSet) -> [PlaneWave; 5] {
    let (e0, eh) = (p.eta0, p.eta_hat0);
    [
        PlaneWave { amp: [p.i1, p.i2], px: -eh, py: -e0 },
        PlaneWave { amp: [r.r1p, r.r2p], px: eh, py: -e0 },
        PlaneWave { amp: [r.r1m, r.r2m], px: -eh, py: e0 },
        PlaneWave { amp: [r.R1p, r.R2p], px: eh, py: e0 },
        PlaneWave { amp: [r.R1m, r.R2m], px: eh, py: e0 },
    ]
}

fn sum_waves(ws: &[PlaneWave], x: f64, y: f64) -> ([C; 2], [C; 2], [C; 2], f64) {
    let mut v = [C::new(0.0, 0.0); 2];
    let mut dx = v;
    let mut dy = v;
    let mut scale = 0.0_f64;
    for w in ws {
        let (a, b, c) = w.eval(x, y);
        for j in 0..2 {
            v[j] += a[j];
            dx[j] += b[j];
            dy[j] += c[j];
            scale = scale.max(a[j].norm()).max(b[j].norm()).max(c[j].norm());
        }
    }
    (v, dx, dy, scale)
}

/// Relative residual of the impedance boundary conditions on the vertical
/// face (`x = 0`).
fn vertical_face(p: &WedgeProblem, ws: &[PlaneWave], y: f64) -> f64 {
    let cb = p.cos_beta();
    let i = C::i();
    let (v, dx, dy, s) = sum_waves(ws, 0.0, y);
    let b1 = i * dx[0] + i * cb * dy[1] - p.g1p * v[0];
    let b2 = i * cb * dy[0] - i * dx[1] + p.g4p * v[1];
    let g = 1.0 + p.g1p.norm().max(p.g4p.norm());
    b1.norm().max(b2.norm()) / (s * g).max(1e-300)
}

/// Same on the horizontal face (`y = 0`).
fn horizontal_face(p: &WedgeProblem, ws: &[PlaneWave], x: f64) -> f64 {
    let cb = p.cos_beta();
    let i = C::i();
    let (v, dx, dy, s) = sum_waves(ws, x, 0.0);
    let b1 = -i * dy[0] + i * cb * dx[1] + p.g1m * v[0];
    let b2 = i * cb * dx[0] + i * dy[1] - p.g4m * v[1];
    let g = 1.0 + p.g1m.norm().max(p.g4m.norm());
    b1.norm().max(b2.norm()) / (s * g).max(1e-300)
}

/// Substitute the plane waves into the four boundary conditions at
/// `n` seeded random points per face; returns the worst relative residual.
/// Each face sees two independent wave pairs (one per reflection order).
pub fn boundary_residual(p: &WedgeProblem, r: &ReflectionSet, n: usize, seed: u64) -> f64 {
    let w = plane_waves(p, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / p.k0.norm();
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let y: f64 = rng.random_range(0.0..5.0) * scale;
        let x: f64 = rng.random_range(0.0..5.0) * scale;
        worst = worst.max(vertical_face(p, &[w[0], w[1]], y)).max(vertical_face(p, &[w[2], w[4]], y)).max(horizontal_face(p, &[w[0], w[2]], x)).max(horizontal_face(
            p,
            &[w[1], w[3]],
            x,
        ));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn fig2a(theta0: f64) -> RawProblem {
        RawProblem {
            wavenumber: Wavenumber::K0(c(1.0, 0.1)),
            beta: FRAC_PI_4,
            theta0,
            boundary: Boundary::Gammas(Gammas { g1p: c(1.0, -1.0), g4p: c(1.0, 2.0), g1m: c(1.0, -2.0), g4m: c(1.0, -3.0) }),
            i1: c(1.0, 0.0),
            i2: c(0.0, 0.0),
        }
    }

    #[test]
    fn normal_incidence_scalars() {
        let mut raw = fig2a(FRAC_PI_4);
        raw.beta = FRAC_PI_2;
        raw.wavenumber = Wavenumber::K(c(1.0, 0.1));
        let p = build_problem(&raw).unwrap();
        assert!((p.k0 - c(1.0, 0.1)).norm() < 1e-15);
        let e = c(1.0, 0.1) / 2f64.sqrt();
        assert!((p.eta0 - e).norm() < 1e-15 && (p.eta_hat0 - e).norm() < 1e-15);
    }

    #[test]
    fn reference_inputs_accepted() {
        let p = build_problem(&fig2a(PI / 3.0)).unwrap();
        assert_eq!(p.k0, c(1.0, 0.1));
        assert_eq!(p.provenance, Provenance::GammasGiven);
    }

    #[test]
    fn unit_impedance() {
        let mut raw = fig2a(0.5);
        raw.beta = FRAC_PI_2;
        raw.wavenumber = Wavenumber::K(c(2.0, 0.3));
        let one = c(1.0, 0.0);
        raw.boundary = Boundary::Impedances(Impedances { eta_rr_p: one, eta_zz_p: one, eta_rr_m: one, eta_zz_m: one });
        let p = build_problem(&raw).unwrap();
        assert!((p.g1p - c(2.0, 0.3)).norm() < 1e-15 && (p.g4p - c(2.0, 0.3)).norm() < 1e-15);
        assert_eq!(p.provenance, Provenance::FromImpedances);
    }

    #[test]
    fn impedance_roundtrip() {
        let k = c(1.3, 0.2);
        let g = Gammas { g1p: c(1.0, -1.0), g4p: c(1.0, 2.0), g1m: c(1.0, -2.0), g4m: c(1.0, -3.0) };
        let z = impedances_from_gammas(k, 0.7, &g);
        let h = gammas_from_impedances(k, 0.7, &z);
        assert!((h.g1p - g.g1p).norm() < 1e-15 && (h.g4m - g.g4m).norm() < 1e-15);
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut raw = fig2a(2.0);
        raw.beta = 4.0;
        raw.wavenumber = Wavenumber::K(c(1.0, -0.1));
        match build_problem(&raw) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normal_incidence_reflection() {
        let mut raw = fig2a(0.6);
        raw.beta = FRAC_PI_2;
        raw.i2 = c(0.4, -0.2);
        let p = build_problem(&raw).unwrap();
        let r = reflection_coefficients(&p).unwrap();
        let eh = p.eta_hat0;
        assert!((r.r1p - (eh - p.g1p) / (eh + p.g1p) * p.i1).norm() < 1e-14);
        assert!((r.r2p - (eh - p.g4p) / (eh + p.g4p) * p.i2).norm() < 1e-14);
        assert!(r.K2.norm() < 1e-15 && r.K2hat.norm() < 1e-15);
    }

    #[test]
    fn matched_vertical_face() {
        let mut raw = fig2a(0.6);
        raw.beta = FRAC_PI_2;
        let k0 = c(1.0, 0.1);
        raw.boundary = Boundary::Gammas(Gammas { g1p: k0 * 0.6f64.cos(), g4p: c(1.0, 2.0), g1m: c(1.0, -2.0), g4m: c(1.0, -3.0) });
        let p = build_problem(&raw).unwrap();
        assert!(reflection_coefficients(&p).unwrap().r1p.norm() < 1e-15);
    }

    #[test]
    fn boundary_oracle_oblique() {
        let mut raw = fig2a(PI / 3.0);
        for (i1, i2) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)), (c(0.3, 0.2), c(-1.0, 0.5))] {
            raw.i1 = i1;
            raw.i2 = i2;
            let p = build_problem(&raw).unwrap();
            let r = reflection_coefficients(&p).unwrap();
            assert!(boundary_residual(&p, &r, 20, 7) < 1e-12);
        }
    }

    #[test]
    fn hat_is_an_involution() {
        let p = build_problem(&fig2a(0.4)).unwrap();
        let q = p.hat().hat();
        assert!((q.theta0 - p.theta0).abs() < 1e-15 && (q.beta - p.beta).abs() < 1e-15);
        assert_eq!(q.g1p, p.g1p);
        assert!((p.hat().eta0 - p.eta_hat0).norm() < 1e-15);
    }
}
