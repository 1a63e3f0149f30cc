//! Photoluminescence spectra: synthesis with a pixelised Voigt instrument
//! response, peak detection, line fitting and mode-family assignment.
//!
//! Wavelengths in this module are in nm.

mod faddeeva;
mod families;
mod fit;
mod io;
mod peaks;
mod response;
mod synth;

pub use faddeeva::faddeeva;
pub use families::{assign_families, FamilyAssignment, FamilyDispersion, FamilyOptions};
pub use fit::{fit_resonance, voigt_fwhm, FitOptions, LineFit};
pub use io::{read_spectrum_csv, write_spectrum_csv};
pub use peaks::{detect_peaks, PeakCandidate, PeakSearch};
pub use response::{apply_instrument_response, pixel_line, voigt};
pub use synth::{
    raman_line_nm, synthesize_lines, synthesize_spectrum, BackgroundSpec, FringeSpec, NoiseSpec, SpectralLine, SynthesisSpec,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("line at {center:.4} nm lies outside the pixel range [{lo:.4}, {hi:.4}] nm")]
    OutsideRange { center: f64, lo: f64, hi: f64 },
    #[error("fit window [{lo:.4}, {hi:.4}] nm holds {pixels} pixels; at least 8 are needed")]
    DegenerateWindow { lo: f64, hi: f64, pixels: usize },
    #[error("fit did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("spectrum arrays must have equal length and strictly increasing wavelength")]
    Malformed,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Gaussian system response sampled by a linear pixel array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentResponse {
    pub gaussian_fwhm: f64,
    pub pitch: f64,
    pub pixels: usize,
    /// Centre of the first pixel.
    pub start: f64,
}

impl InstrumentResponse {
    /// 0.025 nm resolution at 0.012 nm pitch, roughly two pixels per FWHM.
    pub const DEFAULT_FWHM: f64 = 0.025;
    pub const DEFAULT_PITCH: f64 = 0.012;

    /// Default resolution covering [lo, hi] nm.
    pub fn covering(lo: f64, hi: f64) -> Self {
        let pixels = ((hi - lo) / Self::DEFAULT_PITCH).ceil() as usize + 1;
        Self { gaussian_fwhm: Self::DEFAULT_FWHM, pitch: Self::DEFAULT_PITCH, pixels, start: lo }
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        if !(self.gaussian_fwhm > 0.0) {
            return Err(SpectraError::NonPositive("Gaussian FWHM"));
        }
        if !(self.pitch > 0.0) {
            return Err(SpectraError::NonPositive("pixel pitch"));
        }
        if self.pixels == 0 {
            return Err(SpectraError::NonPositive("pixel count"));
        }
        Ok(())
    }

    pub fn center(&self, i: usize) -> f64 {
        self.start + i as f64 * self.pitch
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        (0..self.pixels).map(|i| self.center(i)).collect()
    }

    /// Outer edges of the pixel array.
    pub fn range(&self) -> (f64, f64) {
        (self.start - 0.5 * self.pitch, self.center(self.pixels - 1) + 0.5 * self.pitch)
    }

    pub fn sigma(&self) -> f64 {
        fwhm_to_sigma(self.gaussian_fwhm)
    }
}

pub(crate) fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub wavelength: Vec<f64>,
    pub intensity: Vec<f64>,
    #[serde(default)]
    pub metadata: String,
}

impl Spectrum {
    pub fn new(wavelength: Vec<f64>, intensity: Vec<f64>) -> Result<Self, SpectraError> {
        if wavelength.len() != intensity.len() || wavelength.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpectraError::Malformed);
        }
        Ok(Self { wavelength, intensity, metadata: String::new() })
    }

    pub fn len(&self) -> usize {
        self.wavelength.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelength.is_empty()
    }

    /// Index range of samples inside [lo, hi].
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.wavelength.partition_point(|&l| l < lo);
        let b = self.wavelength.partition_point(|&l| l <= hi);
        a..b.max(a)
    }

    /// Mean sample spacing.
    pub fn pitch(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        (self.wavelength[self.len() - 1] - self.wavelength[0]) / (self.len() - 1) as f64
    }
}
