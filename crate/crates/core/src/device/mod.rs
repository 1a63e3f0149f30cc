//! Device description: disk/pedestal geometry, optical materials and the
//! rasterised axisymmetric permittivity map consumed by the FDTD engine.

mod geometry;
mod material;
mod raster;

pub use geometry::{build_geometry, DeviceGeometry};
pub use material::{group_index, refractive_index, DispersionTable, Interpolation, MaterialKind, MaterialModel, MaterialSet};
pub use raster::{rasterize, GridSpec, IndexMap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("{field} {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown geometry parameter `{0}`")]
    UnknownParameter(String),
    #[error("missing geometry parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("wavelength {lambda} μm outside dispersion table domain [{min}, {max}] μm")]
    OutOfDomain { lambda: f64, min: f64, max: f64 },
    #[error("wavelength {lambda} μm too close to the table edge for the difference stencil")]
    StencilOutOfDomain { lambda: f64 },
    #[error("dispersion table: {0}")]
    Table(String),
    #[error("grid too coarse: spacing {spacing} μm exceeds λ/(15·n_max) = {limit} μm")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("inner radius r_min = {r_min} μm must be below the disk radius {radius} μm")]
    InnerRadius { r_min: f64, radius: f64 },
    #[error("{region} margin {margin} μm cannot contain the {pml} μm absorbing layer")]
    PmlDoesNotFit { region: &'static str, margin: f64, pml: f64 },
}
