//! Special functions: the convex profile `v`, the standard cap pair and the
//! fractional integrals `K_α`.

mod cap;
mod frac;
mod vprofile;

pub use crate::special::riesz_constant;
pub use cap::{build_standard_cap, cap_identity_error, phi_circ, phi_circ_hat, StandardCap};
pub use frac::{frac_integral, frac_integral_on, frac_laplacian_shell, FarField};
pub use vprofile::{big_v_at, VProfile};
