//! Index, branch points and inversion data for the eight reference sets.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use wedge_diffraction::presets::PRESETS;
use wedge_diffraction::problem::build_problem;
use wedge_diffraction::spectral_matrix::build_structural;
use wedge_diffraction::surface::{build_surface, closure_report, jacobi_inversion, Seeds, SurfaceConfig};

fn main() -> wedge_diffraction::Result<()> {
    for ps in &PRESETS {
        let t = Instant::now();
        let p = build_problem(&ps.raw(PI / 3.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)))?;
        let st = build_structural(&p)?;
        let s = build_surface(&st, &SurfaceConfig::default())?;
        print!("{}: case {} kappa0 {:+} (expected {:+}) winding {:.6}", ps.label, st.case_tag.label(), s.kappa0, ps.expected_kappa0, s.winding);
        match jacobi_inversion(&s, &[p.eta0, p.eta_hat0], &Seeds::default()) {
            Ok(j) => {
                let rep = closure_report(&s, &j)?;
                println!(
                    " m0 {} n0 {} sheet {} closure {:.1e} indep {:.1e} La {:.1e} (j {}) Lb {:.1e} contour {:.1e} dir {:.1e} [{:.2?}]",
                    j.m0,
                    j.n0,
                    j.sheet,
                    j.closure.norm(),
                    rep.closure,
                    rep.loop_a_formula,
                    s.ell.shift_a,
                    rep.loop_b_formula,
                    rep.loop_a_contour,
                    rep.loop_b_direction,
                    t.elapsed()
                );
            }
            Err(e) => println!(" inversion failed: {e}"),
        }
    }
    Ok(())
}
