//! Flat, serialisable result rows.

use serde::{Deserialize, Serialize};
use wgmsim::analysis::{Polarization, ResonantMode};
use wgmsim::pipeline::ModeResult;

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// One simulated mode. Quantities that need a field profile are empty when
/// the profile run was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub key: String,
    pub etch_depth_um: f64,
    pub family: String,
    pub polarization: Polarization,
    pub radial_order: usize,
    pub m: u32,
    pub lambda_nm: f64,
    pub q_rad: f64,
    pub q_i: Option<f64>,
    pub q_total: f64,
    pub v_bar: Option<f64>,
    pub eta: Option<f64>,
    pub v_bar_standing: Option<f64>,
    pub eta_standing: Option<f64>,
    pub standing_wave: bool,
    pub hybrid: bool,
    pub edge_fraction: Option<f64>,
    pub oracle_lambda_nm: Option<f64>,
}

impl ModeRecord {
    pub fn new(key: String, etch_depth: f64, r: &ModeResult) -> Self {
        let m = &r.mode;
        Self {
            key,
            etch_depth_um: etch_depth,
            family: m.family(),
            polarization: m.polarization,
            radial_order: m.radial_order,
            m: m.m,
            lambda_nm: m.lambda * 1e3,
            q_rad: m.q_rad,
            q_i: m.q_i,
            q_total: m.q_total(),
            v_bar: finite(m.v_bar),
            eta: finite(m.eta),
            v_bar_standing: finite(m.v_bar_standing),
            eta_standing: finite(m.eta_standing),
            standing_wave: m.standing_wave,
            hybrid: m.hybrid,
            edge_fraction: m.edge_fraction,
            oracle_lambda_nm: r.oracle_lambda.map(|l| l * 1e3),
        }
    }

    pub fn mode(&self) -> ResonantMode {
        ResonantMode {
            m: self.m,
            polarization: self.polarization,
            radial_order: self.radial_order,
            lambda: self.lambda_nm * 1e-3,
            q_rad: self.q_rad,
            q_i: self.q_i,
            v_bar: self.v_bar.unwrap_or(f64::NAN),
            eta: self.eta.unwrap_or(f64::NAN),
            r_o: (f64::NAN, f64::NAN),
            standing_wave: self.standing_wave,
            v_bar_standing: self.v_bar_standing.unwrap_or(f64::NAN),
            eta_standing: self.eta_standing.unwrap_or(f64::NAN),
            hybrid: self.hybrid,
            edge_fraction: self.edge_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrRow {
    pub etch_depth_um: f64,
    pub family: String,
    /// Lower azimuthal number of the pair.
    pub m: u32,
    pub lambda_mid_nm: f64,
    pub fsr_nm: f64,
}

/// Key that sorts by etch depth, family and azimuthal number.
pub fn mode_key(etch_depth: f64, family: &str, m: u32) -> String {
    format!("h{:05.0}nm-{family}-m{m:04}", etch_depth * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_sort_numerically() {
        let mut keys = vec![mode_key(0.6, "TE0", 9), mode_key(0.0, "TE0", 60), mode_key(0.6, "TE0", 10), mode_key(0.3, "TM0", 1)];
        keys.sort();
        assert_eq!(keys, [mode_key(0.0, "TE0", 60), mode_key(0.3, "TM0", 1), mode_key(0.6, "TE0", 9), mode_key(0.6, "TE0", 10)]);
        assert_eq!(mode_key(0.6, "TE0", 56), "h00600nm-TE0-m0056");
    }
}
