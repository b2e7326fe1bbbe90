//! Eight reference parameter sets with `k0 = 1 + 0.1i`, `beta = pi/4`, and
//! the index each is expected to have.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::problem::{Boundary, Gammas, RawProblem, Wavenumber};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub label: &'static str,
    /// `(g1p, g4p, g1m, g4m)`.
    pub gammas: [(f64, f64); 4],
    pub expected_kappa0: i32,
}

pub const PRESETS: [Preset; 8] = [
    Preset { label: "2a", gammas: [(1.0, -1.0), (1.0, 2.0), (1.0, -2.0), (1.0, -3.0)], expected_kappa0: 0 },
    Preset { label: "2b", gammas: [(2.0, 1.0), (1.0, 2.0), (1.0, -1.0), (1.0, -2.0)], expected_kappa0: 0 },
    Preset { label: "2c", gammas: [(-1.0, 1.0), (-1.0, 2.0), (-1.0, -0.1), (-1.0, -0.2)], expected_kappa0: 1 },
    Preset { label: "2d", gammas: [(1.0, 1.0), (1.0, -1.0), (1.0, -0.3), (1.0, -1.0)], expected_kappa0: -1 },
    Preset { label: "3a", gammas: [(1.5, 0.5), (1.0, 1.0), (1.0, -0.5), (1.0, 1.0)], expected_kappa0: 0 },
    Preset { label: "3b", gammas: [(1.0, 1.0), (1.0, -1.0), (1.0, -1.0), (1.0, 1.0)], expected_kappa0: 1 },
    Preset { label: "3c", gammas: [(1.0, 3.0), (1.0, 4.0), (1.0, 1.0), (1.0, 2.0)], expected_kappa0: 0 },
    Preset { label: "3d", gammas: [(1.0, 0.5), (1.0, 1.0), (2.0, 0.5), (1.0, 2.0)], expected_kappa0: -1 },
];

impl Preset {
    pub fn raw(&self, theta0: f64, i1: Complex64, i2: Complex64) -> RawProblem {
        let g = self.gammas.map(|(re, im)| Complex64::new(re, im));
        RawProblem {
            wavenumber: Wavenumber::K0(Complex64::new(1.0, 0.1)),
            beta: FRAC_PI_4,
            theta0,
            boundary: Boundary::Gammas(Gammas { g1p: g[0], g4p: g[1], g1m: g[2], g4m: g[3] }),
            i1,
            i2,
        }
    }
}

pub fn preset(label: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.label == label)
}
