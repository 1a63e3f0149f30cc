//! Simulation and analysis toolkit for whispering-gallery-mode microdisks
//! formed by a high-index guiding layer on a diamond substrate.
//!
//! The crate is organised bottom-up:
//!
//! * [`device`] – geometry, materials and rasterisation onto the (r, z) grid.
//! * [`fdtd`] – body-of-revolution FDTD engine with `e^{imφ}` azimuthal dependence.
//! * [`analysis`] – harmonic inversion, mode classification, mode volume,
//!   FSR tables, Q budgets and the sidewall-roughness estimate.
//! * [`oracle`] – analytic cross-checks (slab effective index, WGM positions,
//!   PEC cavity eigenfrequencies).
//! * [`cqed`] – cavity-QED parameter chain (κ, F_ZPL, g, β).
//! * [`spectra`] – photoluminescence synthesis, pixelised Voigt response,
//!   peak detection, line fitting and family assignment.
//! * [`pipeline`] – glue that turns a geometry and an azimuthal number into a
//!   [`analysis::ResonantMode`].
//!
//! Units: lengths in μm, frequencies in THz, rates in GHz with the ν = ω/2π
//! convention. Inside the engine time is measured in μm/c.

pub mod analysis;
pub mod cqed;
pub mod device;
pub mod fdtd;
pub mod oracle;
pub mod pipeline;
pub mod spectra;
pub mod units;

pub use analysis::{Polarization, ResonantMode};
pub use device::{DeviceGeometry, IndexMap, MaterialKind, MaterialModel};
