pub mod jet;
pub mod laurent;
pub mod linalg;
pub mod quad;

pub use jet::{jet_len, Jet, JetSpace, Scalar};
pub use laurent::{LaurentWindow, DEFAULT_SAMPLES};
pub use linalg::{det_generic, det_lu, invert, kernel_basis, CMatrix, KernelInfo};
pub use quad::{contour_integrate, Contour, QuadSettings};

pub use num_complex::Complex64 as C64;

/// Shorthand for a real complex number.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
