//! Post-processing of engine output into resonant-mode records.

mod classify;
mod fsr;
mod harmonic;
mod qbudget;
mod roughness;
mod volume;

pub use classify::{classify_mode, Classification, HYBRID_RATIO};
pub use fsr::{fsr_dispersion, FsrPoint};
pub use harmonic::{harmonic_inversion, harmonic_inversion_with, InversionOptions, RESIDUAL_THRESHOLD};
pub use qbudget::{q_budget, q_budget_table, QRad};
pub use roughness::{edge_field_fraction, estimate_q_roughness, ROUGHNESS_PREFACTOR};
pub use volume::{mode_volume_and_eta, VolumeResult};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("series too short for harmonic inversion ({samples} usable samples)")]
    TooShort { samples: usize },
    #[error("frequency band [{lo}, {hi}] THz is empty or beyond the Nyquist limit")]
    InvalidBand { lo: f64, hi: f64 },
    #[error("no diamond cells in the index map; η is undefined")]
    NoDiamond,
    #[error("profile grid does not match the index map")]
    GridMismatch,
    #[error("profile has no field")]
    EmptyProfile,
    #[error("family {family} needs at least two modes with consecutive m (gap after m = {after})")]
    Gap { family: String, after: u32 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    /// Dominantly radial electric field.
    TE,
    /// Dominantly vertical electric field.
    TM,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        })
    }
}

impl std::str::FromStr for Polarization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::TE),
            "TM" => Ok(Polarization::TM),
            _ => Err(format!("unknown polarization {s:?}")),
        }
    }
}

/// One damped complex exponential recovered from a time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicComponent {
    pub frequency: f64,
    pub q: f64,
    /// Complex amplitude at the first sample of the series.
    pub amplitude: Complex64,
    /// Relative RMS residual of the whole fit.
    pub residual: f64,
}

impl HarmonicComponent {
    pub fn wavelength(&self) -> f64 {
        crate::units::thz_to_wavelength(self.frequency)
    }

    pub fn is_reliable(&self) -> bool {
        self.residual <= RESIDUAL_THRESHOLD
    }
}

/// Sidewall roughness statistics (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughnessSpec {
    pub sigma_nm: f64,
    pub correlation_nm: f64,
}

/// One whispering-gallery mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantMode {
    pub m: u32,
    pub polarization: Polarization,
    pub radial_order: usize,
    /// Vacuum wavelength (μm).
    pub lambda: f64,
    pub q_rad: f64,
    pub q_i: Option<f64>,
    /// Traveling-wave mode volume in units of (λ/n_GaP)³.
    pub v_bar: f64,
    pub eta: f64,
    /// Location (r, z) of the maximum of n²|E|².
    pub r_o: (f64, f64),
    pub standing_wave: bool,
    /// Standing-wave counterparts of `v_bar` and `eta`.
    pub v_bar_standing: f64,
    pub eta_standing: f64,
    /// Set when neither E_r nor E_z clearly dominates.
    pub hybrid: bool,
    /// |E|² at the disk sidewall relative to |E(r_o)|².
    #[serde(default)]
    pub edge_fraction: Option<f64>,
}

impl ResonantMode {
    pub fn q_total(&self) -> f64 {
        match self.q_i {
            Some(qi) => q_budget(self.q_rad, qi).unwrap_or(self.q_rad),
            None => self.q_rad,
        }
    }

    /// V̄ under the active convention.
    pub fn v_reported(&self) -> f64 {
        if self.standing_wave {
            self.v_bar_standing
        } else {
            self.v_bar
        }
    }

    /// η under the active convention.
    pub fn eta_reported(&self) -> f64 {
        if self.standing_wave {
            self.eta_standing
        } else {
            self.eta
        }
    }

    pub fn family(&self) -> String {
        format!("{}{}", self.polarization, self.radial_order)
    }
}
