use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use wedge_diffraction::cli::{parse_config, ThetaGrid};
use wedge_diffraction::numerics::elliptic::{incomplete_elliptic_f, jacobi_sn};
use wedge_diffraction::numerics::linalg::Mat2;
use wedge_diffraction::numerics::quad::{integrate_segment, QuadratureConfig};
use wedge_diffraction::oracle_normal::build_oracle;
use wedge_diffraction::problem::{build_problem, Boundary, Gammas, RawProblem, Wavenumber};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn complex(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

/// Impedance parameter bounded away from the real axis.
fn gamma() -> impl Strategy<Value = C> {
    (0.2f64..2.0, 0.2f64..3.0, any::<bool>()).prop_map(|(re, im, up)| c(re, if up { im } else { -im }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sn_inverts_f(x in -1.2f64..1.2, y in -0.7f64..0.7, kr in 0.05f64..0.85, ki in -0.3f64..0.3) {
        let (phi, kappa) = (c(x, y), c(kr, ki));
        let u = incomplete_elliptic_f(phi, kappa).unwrap();
        let s = jacobi_sn(u, kappa).unwrap();
        prop_assert!((s - phi.sin()).norm() < 1e-8 * phi.sin().norm().max(1.0));
    }

    #[test]
    fn segment_integrals_add(a in complex(2.0), b in complex(2.0), m in complex(2.0)) {
        prop_assume!((a - b).norm() > 0.1 && (a - m).norm() > 0.1 && (m - b).norm() > 0.1);
        // entire integrand: the triangle closes exactly
        let f = |z: C| (z * c(0.4, -0.9)).exp() * (z * z).cos();
        let cfg = QuadratureConfig::default();
        let whole = integrate_segment(f, a, b, &cfg).unwrap();
        let parts = integrate_segment(f, a, m, &cfg).unwrap() + integrate_segment(f, m, b, &cfg).unwrap();
        prop_assert!((whole - parts).norm() < 1e-10 * whole.norm().max(1.0));
    }

    #[test]
    fn mat2_inverse(a in complex(3.0), b in complex(3.0), cc in complex(3.0), d in complex(3.0)) {
        let m = Mat2::new(a, b, cc, d);
        prop_assume!(m.det().norm() > 1e-2 * m.max_abs() * m.max_abs());
        let p = m * m.inverse().unwrap();
        prop_assert!(p.rel_dist(&Mat2::identity()) < 1e-10);
    }

    #[test]
    fn swapped_problem_is_an_involution(theta0 in 0.1f64..1.4, beta in 0.3f64..2.8, g in prop::array::uniform4(gamma())) {
        let p = build_problem(&RawProblem {
            wavenumber: Wavenumber::K0(c(1.0, 0.1)),
            beta,
            theta0,
            boundary: Boundary::Gammas(Gammas { g1p: g[0], g4p: g[1], g1m: g[2], g4m: g[3] }),
            i1: c(1.0, 0.0),
            i2: c(0.0, 1.0),
        }).unwrap();
        let q = p.hat().hat();
        prop_assert!((q.theta0 - p.theta0).abs() < 1e-14);
        prop_assert!((q.eta0 - p.eta0).norm() < 1e-14);
        prop_assert_eq!(q.g4m, p.g4m);
    }

    #[test]
    fn normal_oracle_satisfies_its_problems(theta0 in 0.1f64..1.4, g in prop::array::uniform4(gamma())) {
        let p = build_problem(&RawProblem {
            wavenumber: Wavenumber::K0(c(1.0, 0.1)),
            beta: FRAC_PI_2,
            theta0,
            boundary: Boundary::Gammas(Gammas { g1p: g[0], g4p: g[1], g1m: g[2], g4m: g[3] }),
            i1: c(1.0, 0.0),
            i2: c(0.3, -0.2),
        }).unwrap();
        let o = build_oracle(&p).unwrap();
        let grid: Vec<f64> = (0..40).map(|j| -5.0 + 10.0 * (j as f64 + 0.5) / 40.0).collect();
        prop_assert!(o.boundary_residual(&grid) < 1e-12);
        prop_assert!(o.identity_residual() < 1e-12);
    }

    #[test]
    fn theta_grid_endpoints(start in 0.01f64..0.7, len in 0.05f64..0.8, count in 2usize..50) {
        let g = ThetaGrid { start, stop: start + len, count };
        let pts = g.points();
        prop_assert_eq!(pts.len(), count);
        prop_assert_eq!(pts[0], start);
        prop_assert!((pts[count - 1] - (start + len)).abs() < 1e-15);
        prop_assert!(pts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn config_rejects_grids_outside_the_sector(stop in prop_oneof![-1.0f64..0.0, FRAC_PI_2..PI]) {
        let text = format!(r#"
problem.k0.re = 1.0
problem.k0.im = 0.1
problem.beta = 0.7
problem.theta0 = 1.0
problem.gamma.g1p.re = 1.0
problem.gamma.g1p.im = -1.0
problem.gamma.g4p.re = 1.0
problem.gamma.g4p.im = 2.0
problem.gamma.g1m.re = 1.0
problem.gamma.g1m.im = -2.0
problem.gamma.g4m.re = 1.0
problem.gamma.g4m.im = -3.0
problem.i1.re = 1.0
problem.i1.im = 0.0
problem.i2.re = 0.0
problem.i2.im = 0.0
theta_grid.start = 0.1
theta_grid.stop = {stop:?}
theta_grid.count = 4
"#);
        prop_assert!(parse_config(&text).is_err());
    }
}
