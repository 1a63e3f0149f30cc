//! From a device and an azimuthal number to a [`ResonantMode`].
//!
//! 1. The curvature-corrected effective-index oracle predicts where the
//!    requested family sits and fixes the search window.
//! 2. A broadband ring-down run plus harmonic inversion yields λ and Q_rad.
//! 3. A narrowband run at the recovered frequency accumulates the field
//!    profile, from which V̄, η, the sidewall fraction and the family label
//!    follow.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    classify_mode, edge_field_fraction, harmonic_inversion, mode_volume_and_eta, AnalysisError, Classification, HarmonicComponent,
    Polarization, ResonantMode,
};
use crate::device::{rasterize, DeviceError, DeviceGeometry, GridSpec, IndexMap, MaterialSet};
use crate::fdtd::{
    accumulate_profile, dft_bandwidth, run_ringdown, Component, FdtdError, ModeProfile, PmlSpec, Probe, SimConfig, SourceSpec,
    DEFAULT_COURANT,
};
use crate::oracle::{family_resonances, OracleError};
use crate::units;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Fdtd(#[from] FdtdError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no resonance found in [{lo:.4}, {hi:.4}] μm")]
    NoResonance { lo: f64, hi: f64 },
}

/// Parameters of one mode search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSearch {
    pub m: u32,
    pub polarization: Polarization,
    /// Radial order used for the oracle prediction.
    #[serde(default)]
    pub radial_order: usize,
    /// Wavelength window (μm); `None` centres one on the oracle prediction.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    /// Width of the automatic window (μm).
    #[serde(default = "default_window_width")]
    pub window_width: f64,
    /// Steps recorded after the broadband source switches off.
    #[serde(default = "default_ringdown_steps")]
    pub ringdown_steps: usize,
    /// Steps of DFT accumulation in the profile run; 0 skips the profile.
    #[serde(default = "default_profile_steps")]
    pub profile_steps: usize,
    /// Spectral width of the profile-run pulse relative to the resonance frequency.
    #[serde(default = "default_profile_bandwidth")]
    pub profile_bandwidth: f64,
    #[serde(default = "default_courant")]
    pub courant: f64,
    #[serde(default)]
    pub q_i: Option<f64>,
    #[serde(default)]
    pub standing_wave: bool,
}

fn default_window_width() -> f64 {
    0.04
}
fn default_ringdown_steps() -> usize {
    1 << 14
}
fn default_profile_steps() -> usize {
    1 << 13
}
fn default_profile_bandwidth() -> f64 {
    0.01
}
fn default_courant() -> f64 {
    DEFAULT_COURANT
}

impl ModeSearch {
    pub fn new(m: u32, polarization: Polarization) -> Self {
        Self {
            m,
            polarization,
            radial_order: 0,
            window: None,
            window_width: default_window_width(),
            ringdown_steps: default_ringdown_steps(),
            profile_steps: default_profile_steps(),
            profile_bandwidth: default_profile_bandwidth(),
            courant: default_courant(),
            q_i: None,
            standing_wave: false,
        }
    }
}

/// Everything produced by one search.
#[derive(Debug, Clone)]
pub struct ModeResult {
    pub mode: ResonantMode,
    /// Harmonic components of the broadband run inside the window.
    pub components: Vec<HarmonicComponent>,
    pub profile: Option<ModeProfile>,
    pub classification: Option<Classification>,
    pub index_map: Arc<IndexMap>,
    pub oracle_lambda: Option<f64>,
}

/// Oracle estimate of the resonance wavelength of (family, m).
pub fn predict_wavelength(geometry: &DeviceGeometry, materials: &MaterialSet, search: &ModeSearch) -> Option<f64> {
    let (lo, hi) = materials.domain();
    let window = (lo.max(0.3), hi.min(2.0));
    family_resonances(geometry, materials, search.polarization, search.radial_order, search.m..=search.m, window)
        .ok()
        .and_then(|v| v.first().map(|r| r.1))
}

fn source_for(geometry: &DeviceGeometry, polarization: Polarization, nu: f64, width: f64) -> SourceSpec {
    let orientation = match polarization {
        Polarization::TE => Component::Er,
        Polarization::TM => Component::Ez,
    };
    SourceSpec::new(geometry.radius() - 0.1, 0.5 * geometry.thickness, orientation, nu, width)
}

fn probes_for(geometry: &DeviceGeometry) -> Vec<Probe> {
    let z = 0.5 * geometry.thickness;
    let r = geometry.radius();
    let mut probes = Vec::new();
    for dr in [0.07, 0.16, 0.3] {
        for component in [Component::Er, Component::Ez, Component::Ephi] {
            probes.push(Probe { r: r - dr, z, component });
        }
    }
    probes
}

/// Rasterises the device for a search centred on `lambda`.
pub fn build_map(geometry: &DeviceGeometry, materials: &MaterialSet, grid: &GridSpec, lambda: f64) -> Result<Arc<IndexMap>, PipelineError> {
    Ok(Arc::new(rasterize(geometry, materials, grid, lambda)?))
}

pub fn find_mode(geometry: &DeviceGeometry, materials: &MaterialSet, grid: &GridSpec, search: &ModeSearch) -> Result<ModeResult, PipelineError> {
    let oracle_lambda = predict_wavelength(geometry, materials, search);
    let (lo, hi) = match (search.window, oracle_lambda) {
        (Some(w), _) => w,
        (None, Some(l)) => (l - 0.5 * search.window_width, l + 0.5 * search.window_width),
        (None, None) => return Err(OracleError::NoRoot { m: search.m }.into()),
    };
    let centre = 0.5 * (lo + hi);
    let map = build_map(geometry, materials, grid, centre)?;
    let mut pml = PmlSpec::default();
    pml.cells = grid.pml_cells;

    // broadband ring-down
    let (nu_lo, nu_hi) = (units::wavelength_to_thz(hi), units::wavelength_to_thz(lo));
    let nu_c = 0.5 * (nu_lo + nu_hi);
    let half = 0.5 * (nu_hi - nu_lo);
    let mut config = SimConfig::new(search.m, map.clone(), source_for(geometry, search.polarization, nu_c, 0.5 * half));
    config.pml = pml;
    config.courant = search.courant;
    config.probes = probes_for(geometry);
    let off = (config.source.turn_off_time() / config.dt()).ceil() as usize;
    config.total_steps = off + search.ringdown_steps;
    let series = run_ringdown(&config)?;

    let mut best: Option<(f64, Vec<HarmonicComponent>)> = None;
    for s in &series {
        let comps = match harmonic_inversion(s, (nu_lo, nu_hi)) {
            Ok(c) => c,
            Err(AnalysisError::TooShort { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let strongest = comps.iter().filter(|c| c.q.is_finite() && c.q > 20.0).map(|c| c.amplitude.norm()).fold(0.0, f64::max);
        if best.as_ref().map_or(true, |b| strongest > b.0) {
            best = Some((strongest, comps));
        }
    }
    let components = best.map(|b| b.1).unwrap_or_default();
    let Some(main) = components.iter().filter(|c| c.q.is_finite() && c.q > 20.0).max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm())).copied()
    else {
        return Err(PipelineError::NoResonance { lo, hi });
    };

    let mut mode = ResonantMode {
        m: search.m,
        polarization: search.polarization,
        radial_order: search.radial_order,
        lambda: main.wavelength(),
        q_rad: main.q,
        q_i: search.q_i,
        v_bar: f64::NAN,
        eta: f64::NAN,
        r_o: (f64::NAN, f64::NAN),
        standing_wave: search.standing_wave,
        v_bar_standing: f64::NAN,
        eta_standing: f64::NAN,
        hybrid: false,
        edge_fraction: None,
    };

    let mut profile = None;
    let mut classification = None;
    if search.profile_steps > 0 {
        let mut pconfig = SimConfig::new(
            search.m,
            map.clone(),
            source_for(geometry, search.polarization, main.frequency, search.profile_bandwidth * main.frequency),
        );
        pconfig.pml = pml;
        pconfig.courant = search.courant;
        let off = (pconfig.source.turn_off_time() / pconfig.dt()).ceil() as usize;
        pconfig.total_steps = off + search.profile_steps;
        let bandwidth = dft_bandwidth(&pconfig);
        if components.iter().any(|c| c.frequency != main.frequency && (c.frequency - main.frequency).abs() < bandwidth) {
            log::warn!("m = {}: another resonance lies within the {bandwidth:.2} THz DFT bandwidth; profile may be mixed", search.m);
        }
        let p = accumulate_profile(&pconfig, main.frequency)?;
        let vol = mode_volume_and_eta(&p, &map)?;
        let class = classify_mode(&p)?;
        mode.v_bar = vol.v_bar;
        mode.eta = vol.eta;
        mode.v_bar_standing = vol.v_bar_standing;
        mode.eta_standing = vol.eta_standing;
        mode.r_o = vol.r_o;
        mode.polarization = class.polarization;
        mode.radial_order = class.radial_order;
        mode.hybrid = class.hybrid;
        mode.edge_fraction = edge_field_fraction(&p, &map);
        classification = Some(class);
        profile = Some(p);
    }

    Ok(ModeResult { mode, components, profile, classification, index_map: map, oracle_lambda })
}
