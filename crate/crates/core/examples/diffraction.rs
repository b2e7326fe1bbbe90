//! Spectra and diffraction coefficients for the reference sets: residue
//! checks, strip formulas against the functional equations, and a few
//! values of `D`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use wedge_diffraction::presets::PRESETS;
use wedge_diffraction::problem::{build_problem, reflection_coefficients};
use wedge_diffraction::rhp_solver::{solve_rhp, SolverConfig};
use wedge_diffraction::spectra::{go_constants, identity_residuals, path_pole_clearance, residue_constants, AxisQuadrature, Spectra};

fn main() -> wedge_diffraction::Result<()> {
    let cfg = SolverConfig::default();
    let panels: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(24);
    for ps in &PRESETS {
        let t = Instant::now();
        let p = build_problem(&ps.raw(PI / 3.0, Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.0)))?;
        let refl = reflection_coefficients(&p)?;
        let sol = match solve_rhp(&p, &refl, &cfg) {
            Ok(s) => s,
            Err(e) => {
                println!("{}: {e}", ps.label);
                continue;
            }
        };
        let st = sol.rhp1.st().clone();
        let rc = residue_constants(&p, &st, go_constants(&p, &refl))?;
        let ids = identity_residuals(&p, &refl, &rc);
        let sp = Spectra::new(&sol, &p, &st, rc, AxisQuadrature { panels, ..Default::default() })?;
        let fres = sp.f_residue_residual()?;
        let sres = sp.residue_at_theta0()?;
        let thetas = [0.2, 0.7, 1.3];
        let rep = sp.strip_report(&thetas)?;
        let d = sp.diffraction(0.7)?;
        println!(
            "{}: clearance {:.2} ids {:.1e} Fres {:.1e} Sres {:.1e} overlap {:.1e} functional {:.1e} droutes {:.1e} tail {:.1e} (y_max {}) D(0.7) = ({:.5}, {:.5}) [{:.2?}]",
            ps.label,
            path_pole_clearance(&st),
            ids.iter().cloned().fold(0.0, f64::max),
            fres,
            ((sres[0] - p.i1).norm() + (sres[1] - p.i2).norm()),
            rep.overlap.iter().cloned().fold(0.0, f64::max),
            rep.functional,
            rep.d_routes,
            rep.tail,
            sp.axis.y_max,
            d[0],
            d[1],
            t.elapsed()
        );
    }
    Ok(())
}
