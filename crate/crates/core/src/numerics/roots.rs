//! Polynomial roots by Aberth-Ehrlich simultaneous iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Horner evaluation of `p` (ascending coefficients) and its derivative.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the polynomial with ascending coefficients `coeffs`, with
/// multiplicity. Degree-0 input yields an empty list.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Validation(vec!["non-finite polynomial coefficient".into()]));
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    // Cauchy-type radius for the initial circle
    let rad = monic[..n].iter().map(|v| v.norm()).fold(0.0_f64, f64::max).powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(rad, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4)).collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-16 {
            break;
        }
    }
    // Newton polish on the original polynomial
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&c, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() < 1e-17 * (1.0 + r.norm()) {
                break;
            }
            *r -= step;
        }
    }
    Ok(z)
}

/// Normalized back-substitution residual `|p(r)| / (max|c| (1+|r|)^deg)`.
pub fn root_residual(coeffs: &[Complex64], r: Complex64) -> f64 {
    let deg = coeffs.len().saturating_sub(1) as i32;
    let cmax = coeffs.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    horner(coeffs, r).0.norm() / (cmax * (1.0 + r.norm()).powi(deg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn has(roots: &[Complex64], z: Complex64) -> bool {
        roots.iter().any(|r| (r - z).norm() < 1e-12)
    }

    #[test]
    fn unit_imaginary_pair() {
        let r = poly_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(has(&r, c(0.0, 1.0)) && has(&r, c(0.0, -1.0)));
    }

    #[test]
    fn wavenumber_pair() {
        let k0 = c(1.0, 0.1);
        let r = poly_roots(&[-k0 * k0, c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(has(&r, k0) && has(&r, -k0));
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(poly_roots(&[c(3.0, 0.0)]).unwrap().is_empty());
    }

    #[test]
    fn octic_residuals() {
        let cs: Vec<Complex64> = (0..9).map(|k| c(1.0 + k as f64 * 0.3, (k as f64).sin())).collect();
        for r in poly_roots(&cs).unwrap() {
            assert!(root_residual(&cs, r) < 1e-13);
        }
    }
}
