//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands on
//! real intervals, straight segments, rays and polygonal loops.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances for every adaptive integration in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Radius past which an infinite ray is integrated through the
    /// compactifying map instead of directly.
    pub truncation_radius: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-15, truncation_radius: 20.0, max_subdivisions: 4000 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.rel_tol > 0.0) {
            bad.push("numerics.rel_tol must be > 0".to_string());
        }
        if !(self.abs_tol > 0.0) {
            bad.push("numerics.abs_tol must be > 0".to_string());
        }
        if !(self.truncation_radius > 0.0) {
            bad.push("numerics.truncation_radius must be > 0".to_string());
        }
        if self.max_subdivisions == 0 {
            bad.push("numerics.max_subdivisions must be positive".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += s * WGK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    let k = rk * h;
    let g = rg * h;
    (k, (k - g).norm())
}

struct Piece {
    a: f64,
    b: f64,
    val: Complex64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integrate a complex-valued function of a real variable over `[a, b]`.
pub fn integrate_interval<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut n = 1;
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            let w = heap.peek().unwrap();
            return Err(Error::NoConvergence { a: w.a, b: w.b, err: f64::INFINITY });
        }
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.norm()) {
            return Ok(total);
        }
        if n >= cfg.max_subdivisions {
            let w = heap.peek().unwrap();
            return Err(Error::NoConvergence { a: w.a, b: w.b, err: w.err });
        }
        let w = heap.pop().unwrap();
        let m = 0.5 * (w.a + w.b);
        if m <= w.a || m >= w.b {
            // interval exhausted at machine resolution
            return Ok(total);
        }
        let (v1, e1) = gk15(&mut f, w.a, m);
        let (v2, e2) = gk15(&mut f, m, w.b);
        total += v1 + v2 - w.val;
        err += e1 + e2 - w.err;
        heap.push(Piece { a: w.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: w.b, val: v2, err: e2 });
        n += 1;
        if n % 64 == 0 {
            // refresh the running sums against accumulated rounding
            total = heap.iter().map(|p| p.val).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
}

/// Integrate `f(x)` over `[a, inf)` through the map `x = a + s u/(1-u)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, scale: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    integrate_interval(
        |u| {
            if u >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w = 1.0 - u;
            f(a + scale * u / w) * (scale / (w * w))
        },
        0.0,
        1.0,
        cfg,
    )
}

/// Integral of `f(z) dz` along the straight segment `z0 -> z1`.
pub fn integrate_segment<F: FnMut(Complex64) -> Complex64>(mut f: F, z0: Complex64, z1: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let d = z1 - z0;
    integrate_interval(|u| f(z0 + d * u), 0.0, 1.0, cfg).map(|v| v * d)
}

/// Integral of `f(z) dz` along the ray `z0 + d t`, `t >= 0`, with `|d| = 1`.
pub fn integrate_ray<F: FnMut(Complex64) -> Complex64>(mut f: F, z0: Complex64, dir: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let d = dir / dir.norm();
    let r = cfg.truncation_radius;
    let near = integrate_interval(|t| f(z0 + d * t), 0.0, r, cfg)?;
    let far = integrate_to_infinity(|t| f(z0 + d * t), r, r, cfg)?;
    Ok((near + far) * d)
}

/// Geometric role of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Starts at `samples[0]` and runs to infinity through `samples[1]`.
    RealRay,
    ImaginaryAxisSegment,
    Segment,
    /// Closed polygon through the samples.
    Loop,
}

/// Piecewise straight integration path in the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPath {
    samples: Vec<Complex64>,
    kind: PathKind,
}

impl ComplexPath {
    pub fn new(samples: Vec<Complex64>, kind: PathKind) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation(vec!["a path needs at least two samples".into()]));
        }
        if samples.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(vec!["consecutive path samples must differ".into()]));
        }
        if kind == PathKind::ImaginaryAxisSegment && samples.iter().any(|z| z.re != 0.0) {
            return Err(Error::Validation(vec!["imaginary-axis path has a sample off the axis".into()]));
        }
        Ok(Self { samples, kind })
    }

    pub fn segment(z0: Complex64, z1: Complex64) -> Result<Self> {
        Self::new(vec![z0, z1], PathKind::Segment)
    }

    pub fn ray(start: Complex64, through: Complex64) -> Result<Self> {
        Self::new(vec![start, through], PathKind::RealRay)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// Same path traversed backwards. Rays cannot be reversed.
    pub fn reversed(&self) -> Result<Self> {
        if self.kind == PathKind::RealRay {
            return Err(Error::Validation(vec!["an infinite ray has no reverse".into()]));
        }
        let mut s = self.samples.clone();
        s.reverse();
        Ok(Self { samples: s, kind: self.kind })
    }
}

/// Integral of `f(z) dz` along `path`.
pub fn integrate_path<F: FnMut(Complex64) -> Complex64>(mut f: F, path: &ComplexPath, cfg: &QuadratureConfig) -> Result<Complex64> {
    let s = path.samples();
    match path.kind() {
        PathKind::RealRay => integrate_ray(&mut f, s[0], s[1] - s[0], cfg),
        PathKind::Segment | PathKind::ImaginaryAxisSegment => {
            let mut acc = Complex64::new(0.0, 0.0);
            for w in s.windows(2) {
                acc += integrate_segment(&mut f, w[0], w[1], cfg)?;
            }
            Ok(acc)
        }
        PathKind::Loop => {
            let mut acc = Complex64::new(0.0, 0.0);
            for w in s.windows(2) {
                acc += integrate_segment(&mut f, w[0], w[1], cfg)?;
            }
            acc += integrate_segment(&mut f, *s.last().unwrap(), s[0], cfg)?;
            Ok(acc)
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            return (vec![0.0], vec![2.0]);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Mean of `f` over a circle of radius `r` about `z0`, times `r e^{i phi}`:
/// the residue of a function with an isolated simple pole at `z0`.
pub fn circle_residue<T, F>(mut f: F, z0: Complex64, r: f64, n: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<Complex64, Output = T> + Clone,
    F: FnMut(Complex64) -> T,
{
    let mut acc: Option<T> = None;
    for k in 0..n {
        let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
        let e = Complex64::from_polar(r, phi);
        let v = f(z0 + e) * (e / n as f64);
        acc = Some(match acc {
            None => v,
            Some(a) => a + v,
        });
    }
    acc.expect("at least one node")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_ray() {
        let cfg = QuadratureConfig::default();
        let p = ComplexPath::ray(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = integrate_path(|t| (-t).exp(), &p, &cfg).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn lorentzian_ray() {
        let cfg = QuadratureConfig::default();
        let p = ComplexPath::ray(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = integrate_path(|t| 1.0 / (1.0 + t * t), &p, &cfg).unwrap();
        assert!((v - PI / 2.0).norm() < 1e-12);
    }

    #[test]
    fn rational_cube_ray() {
        // antiderivative of t^3/(1+t^2)^3 is -(1+2t^2)/(4(1+t^2)^2), so the integral is 1/4
        let cfg = QuadratureConfig::default();
        let p = ComplexPath::ray(c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        let v = integrate_path(|t| t * t * t / (1.0 + t * t).powi(3), &p, &cfg).unwrap();
        assert!((v - 0.25).norm() < 1e-12);
    }

    #[test]
    fn loop_encloses_pole() {
        let cfg = QuadratureConfig::default();
        let sq = vec![c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)];
        let p = ComplexPath::new(sq, PathKind::Loop).unwrap();
        let v = integrate_path(|z| 1.0 / z, &p, &cfg).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-11);
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(ComplexPath::new(vec![c(0.0, 0.0)], PathKind::Segment).is_err());
        assert!(ComplexPath::new(vec![c(0.0, 1.0), c(0.0, 1.0)], PathKind::Segment).is_err());
    }

    #[test]
    fn legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn residue_on_circle() {
        let r: Complex64 = circle_residue(|z| (z * z + 3.0) / (z - 0.5), c(0.5, 0.0), 1e-3, 32);
        assert!((r - 3.25).norm() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig { max_subdivisions: 5, ..Default::default() };
        let r = integrate_interval(|x| c((1.0 / x).sin() / x, 0.0), 1e-4, 1.0, &cfg);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
