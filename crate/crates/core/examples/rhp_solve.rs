//! Solve the coupled problems for each reference set and print the
//! constant counts and residual checks.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use wedge_diffraction::presets::PRESETS;
use wedge_diffraction::problem::{build_problem, reflection_coefficients};
use wedge_diffraction::rhp_solver::{anchor_bracket, rhp_report, solve_coupled, RhpSide, SolverConfig};

fn main() -> wedge_diffraction::Result<()> {
    let cfg = SolverConfig::default();
    for ps in &PRESETS {
        let t = Instant::now();
        let p = build_problem(&ps.raw(PI / 3.0, Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.0)))?;
        let refl = reflection_coefficients(&p)?;
        let r1 = RhpSide::build(&p, &cfg)?;
        let (ak, ak0) = anchor_bracket(&p, r1.st());
        print!(
            "{}: case {} kappa0 {:+} sym {} nullity {} (expect {}) anchor |k| {:.2e} |k0| {:.2e}",
            ps.label,
            r1.case.label(),
            r1.fac.surf.kappa0,
            r1.sym_nullity,
            r1.nullity(),
            r1.expected_nullity(),
            ak.norm(),
            ak0.norm()
        );
        let r2 = match RhpSide::build(&p.hat(), &cfg) {
            Ok(r) => r,
            Err(e) => {
                println!(" | swapped problem: {e}");
                continue;
            }
        };
        print!(" | ^ case {} kappa0 {:+} nullity {} (expect {})", r2.case.label(), r2.fac.surf.kappa0, r2.nullity(), r2.expected_nullity());
        match solve_coupled(r1, r2, &refl, &cfg) {
            Ok(sol) => {
                let k = p.k0.norm();
                let grid: Vec<f64> = (0..40).map(|j| k * (-5.0 + 10.0 * (j as f64 + 0.5) / 40.0)).collect();
                let r = rhp_report(&sol, &grid, 5)?;
                println!(
                    " | compat {} bnd {:.1e}/{:.1e} sym {:.1e} decay {:.1e} res {:.1e}/{:.1e} held {:.1e} poly {:.1e} removal {:.2} [{:.2?}]",
                    sol.compat_nullity,
                    r.boundary,
                    r.boundary_hat,
                    r.symmetry,
                    r.decay,
                    r.residue,
                    r.residue_pair,
                    r.held_out,
                    r.sym_poly,
                    r.removal,
                    t.elapsed()
                );
            }
            Err(e) => println!(" | {e}"),
        }
    }
    Ok(())
}
