//! Factorization checks for every reference set: splitting residual on a
//! real grid, kernel identity, overlap of the two psi2 forms, approach
//! limits and local behaviour at the exceptional points.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use wedge_diffraction::factorization::{approach_residual, build_factors, exceptional_behavior, factorization_residual, kernel_identity_residual, upper_points};
use wedge_diffraction::presets::PRESETS;
use wedge_diffraction::problem::build_problem;
use wedge_diffraction::spectral_matrix::build_structural;
use wedge_diffraction::surface::{build_surface, jacobi_inversion, Seeds, SurfaceConfig};

fn main() -> wedge_diffraction::Result<()> {
    for ps in &PRESETS {
        let t = Instant::now();
        let p = build_problem(&ps.raw(PI / 3.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)))?;
        for (tag, q) in [("", p), ("^", p.hat())] {
            let st = build_structural(&q)?;
            let s = match build_surface(&st, &SurfaceConfig::default()) {
                Ok(s) => s,
                Err(e) => {
                    println!("{}{tag}: {e}", ps.label);
                    continue;
                }
            };
            let j = jacobi_inversion(&s, &[q.eta0, q.eta_hat0], &Seeds::default())?;
            let f = build_factors(&s, &j)?;
            let k = st.k0.norm();
            let grid: Vec<f64> = (0..40).map(|i| k * (-5.0 + 10.0 * (i as f64 + 0.5) / 40.0)).collect();
            let r = factorization_residual(&f, &grid)?;
            let ker = kernel_identity_residual(&f, &upper_points(&f, 10, 1))?;
            let ov = f.overlap_residual()?;
            let ap = approach_residual(&f, &[0.37 * k, -1.3 * k])?;
            let ex = exceptional_behavior(&f).map(|v| v.iter().map(|e| format!("{:?}/{:?}", e.x, e.x_inv)).collect::<Vec<_>>().join(",")).unwrap_or_else(|e| e.to_string());
            let inf = f.exponent_at_infinity()?;
            println!(
                "{}{tag}: k0 {:+} gamma {:.1e} G {:.1e} jump {:.1e} kernel {:.1e} overlap {:.1e} approach {:.1e} inf {:.2}..{:.2} [{}] {:.2?}",
                ps.label,
                s.kappa0,
                r.gamma,
                r.g_split,
                r.scalar_jump,
                ker,
                ov,
                ap,
                inf[0].1,
                inf[5].1,
                ex,
                t.elapsed()
            );
        }
    }
    Ok(())
}
