//! Body-of-revolution FDTD.
//!
//! Fields are assumed to vary as `e^{imφ}`; the azimuthal derivative becomes an
//! algebraic `m/r` coupling and the problem reduces to a Yee lattice on the
//! (r, z) half-plane. Positions of the six components (i ↔ r, j ↔ z):
//!
//! | component | r        | z        | array shape      |
//! |-----------|----------|----------|------------------|
//! | E_r       | i + ½    | j        | nr × (nz + 1)    |
//! | E_φ       | i        | j        | (nr + 1) × (nz + 1) |
//! | E_z       | i        | j + ½    | (nr + 1) × nz    |
//! | H_r       | i        | j + ½    | (nr + 1) × nz    |
//! | H_φ       | i + ½    | j + ½    | nr × nz          |
//! | H_z       | i + ½    | j        | nr × (nz + 1)    |
//!
//! The stored E_φ, H_r and H_z are the physical components divided by `i`.
//! With that substitution the update operator is real for fixed m, so real and
//! imaginary parts evolve independently and conjugating the source conjugates
//! the fields.
//!
//! Units: c = ε₀ = μ₀ = 1, lengths in μm, time in μm/c.

mod engine;
mod export;
mod pml;
mod run;

pub use engine::{stability_limit, FieldValue, Simulation};
pub use export::{read_profile_binary, write_profile_binary, write_profile_csv, write_time_series_csv};
pub use run::{accumulate_profile, dft_bandwidth, dft_stride, init_simulation, normalize, run_ringdown, step};

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{IndexMap, MaterialKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdtdError {
    #[error("unstable time step: Courant factor {courant} exceeds the limit {limit:.4} for m = {m}")]
    UnstableCourant { courant: f64, limit: f64, m: u32 },
    #[error("{what} at (r = {r}, z = {z}) lies inside the absorbing layer or outside the grid")]
    Placement { what: &'static str, r: f64, z: f64 },
    #[error("non-finite field detected at step {step}")]
    Instability { step: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    Er,
    Ephi,
    Ez,
    Hr,
    Hphi,
    Hz,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::Er => "Er",
            Component::Ephi => "Ephi",
            Component::Ez => "Ez",
            Component::Hr => "Hr",
            Component::Hphi => "Hphi",
            Component::Hz => "Hz",
        }
    }
}

/// Convolutional PML applied at outer r and at both z faces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmlSpec {
    /// Thickness in cells; 0 closes the box with perfect conductors.
    pub cells: usize,
    pub grading_order: f64,
    pub reflection: f64,
    /// Complex-frequency-shift α at the inner PML face (1/time units).
    #[serde(default = "default_cfs_alpha")]
    pub cfs_alpha: f64,
}

fn default_cfs_alpha() -> f64 {
    0.2
}

impl Default for PmlSpec {
    fn default() -> Self {
        Self { cells: 12, grading_order: 3.0, reflection: 1e-6, cfs_alpha: default_cfs_alpha() }
    }
}

impl PmlSpec {
    pub fn closed() -> Self {
        Self { cells: 0, ..Self::default() }
    }
}

/// Gaussian-enveloped point dipole current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub r: f64,
    pub z: f64,
    pub orientation: Component,
    pub center_thz: f64,
    /// Spectral standard deviation of the pulse (THz).
    pub width_thz: f64,
    pub amplitude: Complex64,
    /// Time (μm/c) after which the current is switched off; default 10 pulse widths.
    pub turn_off: Option<f64>,
}

impl SourceSpec {
    pub fn new(r: f64, z: f64, orientation: Component, center_thz: f64, width_thz: f64) -> Self {
        Self { r, z, orientation, center_thz, width_thz, amplitude: Complex64::new(1.0, 0.0), turn_off: None }
    }

    /// Envelope time constant τ (μm/c).
    pub fn tau(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * crate::units::thz_to_engine(self.width_thz))
    }

    pub fn peak_time(&self) -> f64 {
        5.0 * self.tau()
    }

    pub fn turn_off_time(&self) -> f64 {
        self.turn_off.unwrap_or(10.0 * self.tau())
    }

    /// Real waveform: sine carrier under a Gaussian envelope (zero mean).
    pub fn waveform(&self, t: f64) -> f64 {
        if t > self.turn_off_time() {
            return 0.0;
        }
        let tau = self.tau();
        let s = t - self.peak_time();
        let nu = crate::units::thz_to_engine(self.center_thz);
        (-0.5 * (s / tau).powi(2)).exp() * (2.0 * std::f64::consts::PI * nu * s).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub r: f64,
    pub z: f64,
    pub component: Component,
}

/// Everything needed to run one body-of-revolution simulation.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub m: u32,
    pub index_map: Arc<IndexMap>,
    pub pml: PmlSpec,
    pub source: SourceSpec,
    pub probes: Vec<Probe>,
    /// c·Δt / min(Δr, Δz) before the m/r safeguard.
    pub courant: f64,
    pub total_steps: usize,
    /// Check for non-finite fields every this many steps.
    pub nan_check_interval: Option<usize>,
}

pub const DEFAULT_COURANT: f64 = 0.5;

impl SimConfig {
    pub fn new(m: u32, index_map: Arc<IndexMap>, source: SourceSpec) -> Self {
        Self {
            m,
            index_map,
            pml: PmlSpec::default(),
            source,
            probes: Vec::new(),
            courant: DEFAULT_COURANT,
            total_steps: 1 << 14,
            nan_check_interval: if cfg!(debug_assertions) { Some(256) } else { Some(4096) },
        }
    }

    /// Courant factor after the `max(1, mΔr/r_min)⁻¹` reduction.
    pub fn effective_courant(&self) -> f64 {
        let map = &self.index_map;
        let r_in = if map.r0 > 0.0 { map.r0 } else { 0.5 * map.dr };
        let stiff = (self.m as f64 * map.dr / r_in).max(1.0);
        self.courant / stiff
    }

    pub fn dt(&self) -> f64 {
        self.effective_courant() * self.index_map.dr.min(self.index_map.dz)
    }
}

/// Uniformly sampled complex probe record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub probe: usize,
    pub component: Component,
    pub r: f64,
    pub z: f64,
    /// Time of the first sample (μm/c).
    pub t_start: f64,
    /// Sample interval (μm/c).
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }
}

/// Field normalisation convention attached to a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Peak |E| scaled to one, traveling-wave `e^{imφ}` field.
    TravelingWave,
}

/// Complex E-field of one mode at the cell centres of an [`IndexMap`] grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub lambda: f64,
    pub m: u32,
    pub nr: usize,
    pub nz: usize,
    pub dr: f64,
    pub dz: f64,
    pub r0: f64,
    pub z0: f64,
    pub er: Vec<Complex64>,
    pub ephi: Vec<Complex64>,
    pub ez: Vec<Complex64>,
    pub material: Vec<MaterialKind>,
    /// Cells belonging to the absorbing layer (excluded from integrals).
    pub pml_cells: usize,
    pub normalization: Normalization,
    /// Largest |E| of the raw DFT amplitude (field × time) before scaling;
    /// zero when not known, e.g. after reading an exported profile.
    #[serde(default)]
    pub dft_peak: f64,
}

impl ModeProfile {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    pub fn r_center(&self, i: usize) -> f64 {
        self.r0 + (i as f64 + 0.5) * self.dr
    }

    pub fn z_center(&self, j: usize) -> f64 {
        self.z0 + (j as f64 + 0.5) * self.dz
    }

    pub fn intensity(&self, k: usize) -> f64 {
        self.er[k].norm_sqr() + self.ephi[k].norm_sqr() + self.ez[k].norm_sqr()
    }

    /// True for cells outside the absorbing layer.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let p = self.pml_cells;
        i + p < self.nr && j >= p && j + p < self.nz
    }

    pub fn matches_grid(&self, map: &IndexMap) -> bool {
        self.nr == map.nr
            && self.nz == map.nz
            && (self.dr - map.dr).abs() < 1e-12
            && (self.dz - map.dz).abs() < 1e-12
            && (self.r0 - map.r0).abs() < 1e-12
            && (self.z0 - map.z0).abs() < 1e-12
    }

    pub fn norm(&self) -> f64 {
        (0..self.nr * self.nz).map(|k| self.intensity(k)).sum::<f64>().sqrt()
    }
}
