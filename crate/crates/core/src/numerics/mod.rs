//! Numerical building blocks: quadrature, elliptic functions, roots,
//! phase unwrapping and small linear algebra.

pub mod branch;
pub mod elliptic;
pub mod linalg;
pub mod phase;
pub mod quad;
pub mod roots;

pub use elliptic::{complete_elliptic_k, incomplete_elliptic_f, jacobi_sn, JacobiElliptic};
pub use linalg::{nullspace, Mat2, Vec2};
pub use phase::unwrap_phase;
pub use quad::{integrate_path, ComplexPath, PathKind, QuadratureConfig};
pub use roots::poly_roots;
