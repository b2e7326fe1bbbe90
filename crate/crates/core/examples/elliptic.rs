//! Elliptic substrate: `K`, `F` and `sn` for a few complex moduli, with the
//! round trip `sn(F(phi)) = sin(phi)` and the quarter period `sn(K) = 1`.

use num_complex::Complex64;
use wedge_diffraction::numerics::elliptic::{complete_elliptic_k, incomplete_elliptic_f, JacobiElliptic};

fn main() -> wedge_diffraction::Result<()> {
    for kappa in [Complex64::new(0.3, 0.0), Complex64::new(0.6, 0.4), Complex64::new(0.9, -0.2)] {
        let k = complete_elliptic_k(kappa)?;
        let je = JacobiElliptic::new(kappa)?;
        let phi = Complex64::new(0.7, 0.3);
        let u = incomplete_elliptic_f(phi, kappa)?;
        println!(
            "kappa {kappa:.2}: K = {k:.12} K' = {:.12} |sn(K) - 1| = {:.1e} |sn(F(phi)) - sin(phi)| = {:.1e}",
            je.kp(),
            (je.sn(k) - 1.0).norm(),
            (je.sn(u) - phi.sin()).norm()
        );
    }
    Ok(())
}
