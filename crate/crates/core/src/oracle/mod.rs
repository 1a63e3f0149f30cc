//! Analytic and semi-analytic comparators used to validate and seed the
//! FDTD results.

mod bessel;
mod cylinder;
mod slab;
mod wgm;

pub use bessel::{bessel_j, bessel_j_prime, bessel_j_prime_zero, bessel_j_zero};
pub use cylinder::{pec_cylinder_modes, CavityModeType};
pub use slab::{slab_dispersion_residual, slab_neff, SlabLayer, SlabMode, SlabStack};
pub use wgm::{airy_zero, analytic_fsr, device_stack, family_resonances, fundamental_neff, wgm_resonances, wgm_resonances_bent};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("stack needs at least three layers with positive inner thicknesses")]
    InvalidStack,
    #[error("no guided mode at λ = {lambda} μm")]
    NoGuidedMode { lambda: f64 },
    #[error("no resonance for m = {m} in the search window")]
    NoRoot { m: u32 },
    #[error("invalid mode indices: {0}")]
    InvalidIndex(String),
    #[error("argument must be positive: {0}")]
    NonPositive(&'static str),
    #[error(transparent)]
    Material(#[from] crate::device::DeviceError),
}
