use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Polarization};
use crate::device::MaterialKind;
use crate::fdtd::ModeProfile;

/// Below this dominant/subdominant energy ratio the mode is flagged hybrid.
pub const HYBRID_RATIO: f64 = 1.2;

/// Fraction of the peak below which the radial cut is ignored when counting
/// sign changes.
const CUT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub polarization: Polarization,
    pub radial_order: usize,
    pub hybrid: bool,
    /// ∫|E_dominant|² / ∫|E_other|² over the guiding layer.
    pub energy_ratio: f64,
}

pub fn classify_mode(profile: &ModeProfile) -> Result<Classification, AnalysisError> {
    let cells = profile.nr * profile.nz;
    if profile.er.len() != cells || profile.ez.len() != cells || profile.material.len() != cells {
        return Err(AnalysisError::GridMismatch);
    }
    let guiding_present = profile.material.iter().any(|&m| m == MaterialKind::GuidingLayer);
    let mut wr = 0.0;
    let mut wz = 0.0;
    for i in 0..profile.nr {
        let r = profile.r_center(i);
        for j in 0..profile.nz {
            let k = profile.idx(i, j);
            if !profile.is_interior(i, j) || (guiding_present && profile.material[k] != MaterialKind::GuidingLayer) {
                continue;
            }
            wr += r * profile.er[k].norm_sqr();
            wz += r * profile.ez[k].norm_sqr();
        }
    }
    if wr == 0.0 && wz == 0.0 {
        return Err(AnalysisError::EmptyProfile);
    }
    let polarization = if wr > wz { Polarization::TE } else { Polarization::TM };
    let energy_ratio = if wr > wz { wr / wz } else { wz / wr };
    let dominant = match polarization {
        Polarization::TE => &profile.er,
        Polarization::TM => &profile.ez,
    };

    let (mut best, mut peak) = (0usize, -1.0);
    for i in 0..profile.nr {
        for j in 0..profile.nz {
            let k = profile.idx(i, j);
            if profile.is_interior(i, j) && profile.intensity(k) > peak {
                peak = profile.intensity(k);
                best = k;
            }
        }
    }
    let j0 = best % profile.nz;
    let reference = {
        let v = (0..profile.nr).map(|i| dominant[profile.idx(i, j0)]).max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        if v.norm() > 0.0 {
            v.conj() / v.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    let cut: Vec<f64> = (0..profile.nr).filter(|&i| profile.is_interior(i, j0)).map(|i| (dominant[profile.idx(i, j0)] * reference).re).collect();
    Ok(Classification { polarization, radial_order: sign_changes(&cut), hybrid: energy_ratio < HYBRID_RATIO, energy_ratio })
}

/// Sign changes of a 3-point moving average, ignoring samples below the floor.
fn sign_changes(cut: &[f64]) -> usize {
    if cut.len() < 3 {
        return 0;
    }
    let smooth: Vec<f64> = (0..cut.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(cut.len() - 1);
            cut[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let peak = smooth.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = CUT_FLOOR * peak;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in &smooth {
        if v.abs() < floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}
