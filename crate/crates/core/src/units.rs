//! Physical constants and unit conversions.

/// Speed of light in μm·THz (equivalently μm/ps).
pub const C_UM_THZ: f64 = 299.792_458;

/// Frequency (THz) of a vacuum wavelength given in μm.
pub fn wavelength_to_thz(lambda_um: f64) -> f64 {
    C_UM_THZ / lambda_um
}

/// Vacuum wavelength (μm) of a frequency given in THz.
pub fn thz_to_wavelength(nu_thz: f64) -> f64 {
    C_UM_THZ / nu_thz
}

/// Engine time unit (μm/c) expressed in femtoseconds.
pub const FS_PER_TIME_UNIT: f64 = 1.0e3 / C_UM_THZ;

/// Convert a frequency in THz into engine units (cycles per μm/c).
pub fn thz_to_engine(nu_thz: f64) -> f64 {
    nu_thz / C_UM_THZ
}

/// Convert an engine frequency (cycles per μm/c) into THz.
pub fn engine_to_thz(nu: f64) -> f64 {
    nu * C_UM_THZ
}
