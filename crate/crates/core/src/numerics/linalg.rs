//! Small dense complex linear algebra: fixed 2x2 matrices and SVD-based
//! null spaces of rectangular systems.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Vec2 = [Complex64; 2];

/// 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }
    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }
    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }
    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }
    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        let scale = self.max_abs();
        if d.norm() <= 1e-300 || d.norm() < 1e-15 * scale * scale {
            return Err(Error::Singular(format!("2x2 determinant {d}")));
        }
        let m = &self.0;
        Ok(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }
    pub fn scale(&self, s: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }
    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }
    /// Entrywise max-norm distance relative to the larger operand.
    pub fn rel_dist(&self, o: &Mat2) -> f64 {
        let d = (*self - *o).max_abs();
        d / self.max_abs().max(o.max_abs()).max(1e-300)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}
impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}
impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}
impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut r = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}
impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex64) -> Mat2 {
        self.scale(s)
    }
}

pub fn vec2_norm(v: Vec2) -> f64 {
    v[0].norm().max(v[1].norm())
}

pub fn vec2_sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Right null space of `a`: columns spanning `{x : a x = 0}` selected by
/// singular values below `rel_tol * s_max`. Also returns the singular values
/// in descending order.
pub fn nullspace(a: &DMatrix<Complex64>, rel_tol: f64) -> (DMatrix<Complex64>, Vec<f64>) {
    let (m, n) = a.shape();
    // pad with zero rows so the thin SVD exposes every right singular vector
    let rows = m.max(n);
    let mut p = DMatrix::<Complex64>::zeros(rows, n);
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return (DMatrix::identity(n, n), vec![0.0; n]);
    }
    p.view_mut((0, 0), (m, n)).copy_from(&(a / Complex64::new(scale, 0.0)));
    let svd = p.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let null_idx: Vec<usize> = idx.iter().copied().filter(|&i| svd.singular_values[i] <= rel_tol * smax).collect();
    let mut basis = DMatrix::<Complex64>::zeros(n, null_idx.len());
    for (c, &i) in null_idx.iter().enumerate() {
        for r in 0..n {
            basis[(r, c)] = vt[(i, r)].conj();
        }
    }
    (basis, sv.iter().map(|s| s * scale).collect())
}

/// Solve a square complex system by LU.
pub fn solve(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    a.clone().lu().solve(b).ok_or_else(|| Error::Linear("singular square system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Mat2::new(c(1.0, 2.0), c(0.5, -1.0), c(-2.0, 0.1), c(3.0, 0.0));
        let p = m * m.inverse().unwrap();
        assert!(p.rel_dist(&Mat2::identity()) < 1e-15);
    }

    #[test]
    fn singular_inverse_errors() {
        let m = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(m.inverse().is_err());
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 4, &[c(1.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let (ns, _) = nullspace(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        let r = &a * &ns;
        assert!(r.iter().all(|v| v.norm() < 1e-13));
    }
}
