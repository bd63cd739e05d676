//! Boundary renormalisation on the cube `(-1,1)^3`.
//!
//! The crate computes the divergent boundary constants of the parabolic
//! Anderson model and of dynamic Φ⁴₃, builds Robin/Neumann/Dirichlet heat
//! kernels by the method of images, and runs renormalised lattice
//! approximations of both equations.
//!
//! ```
//! use boundary_renorm::renorm;
//!
//! let i0 = renorm::pam_profile_i0(1.0);
//! assert!((i0 * 8.0 * std::f64::consts::PI - 1.0).abs() < 1e-6);
//! ```

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod noise;
pub mod norms;
pub mod quad;
pub mod renorm;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/boundary-constants.md")]
    mod boundary_constants {}
    #[doc = include_str!("../../../book/src/bulk-constants.md")]
    mod bulk_constants {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
