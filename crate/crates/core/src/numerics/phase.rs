//! Continuous argument along sampled paths.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Continuous argument of an ordered sample list. The first value is the
/// principal argument; consecutive jumps must stay below pi.
pub fn unwrap_phase(values: &[Complex64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev: Option<f64> = None;
    for (i, v) in values.iter().enumerate() {
        if v.norm() == 0.0 {
            return Err(Error::Phase(format!("zero sample at index {i}")));
        }
        let a = v.arg();
        let cur = match prev {
            None => a,
            Some(p) => {
                let d = a - p;
                let n = (d / (2.0 * PI)).round();
                let x = a - 2.0 * PI * n;
                if (x - p).abs() >= PI {
                    return Err(Error::Phase(format!("jump of pi or more at index {i}")));
                }
                x
            }
        };
        out.push(cur);
        prev = Some(cur);
    }
    Ok(out)
}

/// Sampled continuous argument of `f` on a parameter grid, bisecting every
/// interval whose argument jump is pi/2 or more. The grid itself must
/// resolve the winding to less than half a turn per interval.
#[derive(Debug, Clone)]
pub struct UnwrappedSamples {
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
    pub phase: Vec<f64>,
}

pub fn unwrap_adaptive<F: FnMut(f64) -> Complex64>(mut f: F, grid: &[f64], max_depth: usize) -> Result<UnwrappedSamples> {
    if grid.len() < 2 {
        return Err(Error::Phase("need at least two grid points".into()));
    }
    let mut t = Vec::with_capacity(grid.len());
    let mut vals = Vec::with_capacity(grid.len());
    let mut ph = Vec::with_capacity(grid.len());
    let push = |tt: f64, v: Complex64, prev: Option<f64>, t: &mut Vec<f64>, vals: &mut Vec<Complex64>, ph: &mut Vec<f64>| -> Result<f64> {
        if v.norm() == 0.0 || !v.re.is_finite() {
            return Err(Error::Phase(format!("zero or non-finite sample at t = {tt}")));
        }
        let a = v.arg();
        let x = match prev {
            None => a,
            Some(p) => a - 2.0 * PI * ((a - p) / (2.0 * PI)).round(),
        };
        t.push(tt);
        vals.push(v);
        ph.push(x);
        Ok(x)
    };
    let v0 = f(grid[0]);
    let mut last = push(grid[0], v0, None, &mut t, &mut vals, &mut ph)?;
    for w in grid.windows(2) {
        // depth-first refinement of [w0, w1]
        let mut stack = vec![(w[0], w[1], 0usize)];
        let mut left_phase = last;
        while let Some((a, b, depth)) = stack.pop() {
            let vb = f(b);
            if vb.norm() == 0.0 {
                return Err(Error::Phase(format!("zero sample at t = {b}")));
            }
            let ab = vb.arg();
            let xb = ab - 2.0 * PI * ((ab - left_phase) / (2.0 * PI)).round();
            // the midpoint guards against a whole number of turns hiding inside the interval
            let vm = f(0.5 * (a + b));
            let am = vm.arg();
            let xm = am - 2.0 * PI * ((am - left_phase) / (2.0 * PI)).round();
            let xb2 = ab - 2.0 * PI * ((ab - xm) / (2.0 * PI)).round();
            let ok = (xb - left_phase).abs() < PI / 2.0 && (xm - left_phase).abs() < PI / 2.0 && (xb2 - xm).abs() < PI / 2.0 && (xb2 - xb).abs() < 1e-9;
            if !ok {
                if depth >= max_depth {
                    return Err(Error::Phase(format!("jump {} near t = {b} after refinement", xb - left_phase)));
                }
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
                continue;
            }
            left_phase = push(b, vb, Some(left_phase), &mut t, &mut vals, &mut ph)?;
        }
        last = left_phase;
    }
    Ok(UnwrappedSamples { t, values: vals, phase: ph })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence() {
        let v = vec![Complex64::new(1.0, 0.0); 3];
        assert_eq!(unwrap_phase(&v).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_turns() {
        let v: Vec<Complex64> = (0..=126).map(|k| Complex64::from_polar(1.0, 0.1 * k as f64)).collect();
        let p = unwrap_phase(&v).unwrap();
        assert!((p.last().unwrap() - 12.6).abs() < 1e-12);
        assert!(*p.last().unwrap() > 4.0 * PI);
    }

    #[test]
    fn zero_sample_is_error() {
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(unwrap_phase(&v).is_err());
    }

    #[test]
    fn adaptive_refines_fast_winding() {
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
        let s = unwrap_adaptive(|t| Complex64::from_polar(1.0, 20.0 * t), &grid, 20).unwrap();
        assert!((s.phase.last().unwrap() - 20.0).abs() < 1e-12, "{:?}", s.phase);
        for w in s.phase.windows(2) {
            assert!((w[1] - w[0]).abs() < PI / 2.0);
        }
    }
}
