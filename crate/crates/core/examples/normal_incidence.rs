//! Normal incidence: the diagonal pipeline against the closed forms,
//! including the diffraction coefficient driven by each.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use num_complex::Complex64;
use wedge_diffraction::oracle_normal::{build_oracle, oracle_compare, solve_diagonal};
use wedge_diffraction::presets::PRESETS;
use wedge_diffraction::problem::{build_problem, reflection_coefficients, RawProblem};
use wedge_diffraction::spectra::{go_constants, residue_constants, AxisQuadrature, Spectra};
use wedge_diffraction::spectral_matrix::build_structural;

fn main() -> wedge_diffraction::Result<()> {
    let thetas: Vec<f64> = (0..10).map(|j| 0.1 + 1.35 * j as f64 / 9.0).collect();
    for ps in &PRESETS {
        let t = Instant::now();
        let raw = RawProblem { beta: FRAC_PI_2, ..ps.raw(PI / 3.0, Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.0)) };
        let p = build_problem(&raw)?;
        let refl = reflection_coefficients(&p)?;
        let oracle = build_oracle(&p)?;
        let sol = match solve_diagonal(&p, &refl, Complex64::new(0.0, 0.0)) {
            Ok(s) => s,
            Err(e) => {
                println!("{}: {e}", ps.label);
                continue;
            }
        };
        let st = build_structural(&p)?;
        let rc = residue_constants(&p, &st, go_constants(&p, &refl))?;
        let sp = Spectra::new(&sol, &p, &st, rc, AxisQuadrature::default())?;
        let so = Spectra::with_fixed_axis(&oracle, &p, &st, rc, sp.axis)?;
        let mut dp = Vec::new();
        let mut dn = Vec::new();
        for &th in &thetas {
            dp.push(sp.diffraction(th)?);
            dn.push(so.diffraction(th)?);
        }
        let r = oracle_compare(&oracle, &sol, &rc, &refl, &dp, &dn);
        println!(
            "{}: nullities {:?} phi {:.1e} phi_hat {:.1e} D_j {:.1e} lambda/M {:.1e} mu {:.1e} refl {:.1e} diffraction {:.1e} |D| {:.1e} | oracle bc {:.1e} ids {:.1e} [{:.2?}]",
            ps.label,
            sol.nullities(),
            r.phi,
            r.phi_hat,
            r.amplitudes,
            r.lambda_m,
            r.mu,
            r.reflections,
            r.diffraction,
            r.diffraction_magnitude,
            r.oracle_boundary,
            r.oracle_identities,
            t.elapsed()
        );
    }
    Ok(())
}
