use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::device::{IndexMap, MaterialKind};
use crate::fdtd::ModeProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    /// Traveling-wave volume in units of (λ/n_GaP)³.
    pub v_bar: f64,
    pub eta: f64,
    /// (r, z) of the maximum of n²|E|².
    pub r_o: (f64, f64),
    /// |E(r_o)|², the normalisation of the volume integral.
    pub peak_intensity: f64,
    /// Volume of the cos(mφ) standing wave built from the ±m pair.
    pub v_bar_standing: f64,
    /// η of the standing wave, maximised over φ.
    pub eta_standing: f64,
}

/// V̄ = (λ/n_GaP)⁻³ ∫ n²|E|² dV / (n²|E|²)(r_o) and
/// η = max over diamond cells of |E| divided by |E(r_o)|.
///
/// Cells inside the absorbing layer are excluded.
///
/// In the standing wave formed from ±m, E_r and E_z vary as cos(mφ) while E_φ
/// varies as sin(mφ), so the local peak over φ is max(|E_r|² + |E_z|², |E_φ|²)
/// and the azimuthal average of the energy is half of that peak-normalised
/// traveling-wave value.
pub fn mode_volume_and_eta(profile: &ModeProfile, map: &IndexMap) -> Result<VolumeResult, AnalysisError> {
    if !profile.matches_grid(map) {
        return Err(AnalysisError::GridMismatch);
    }
    let mut total = 0.0;
    let mut best = (0usize, 0usize, -1.0);
    let mut any_diamond = false;
    let standing = |k: usize| (profile.er[k].norm_sqr() + profile.ez[k].norm_sqr()).max(profile.ephi[k].norm_sqr());
    let mut best_standing = (0.0, 0.0);
    let mut diamond_standing: f64 = 0.0;
    for i in 0..map.nr {
        let w = map.cell_volume(i);
        for j in 0..map.nz {
            if !profile.is_interior(i, j) {
                continue;
            }
            let k = map.idx(i, j);
            let u = map.eps[k] * profile.intensity(k);
            total += u * w;
            if u > best.2 {
                best = (i, j, u);
            }
            let us = map.eps[k] * standing(k);
            if us > best_standing.0 {
                best_standing = (us, standing(k));
            }
            if map.material[k] == MaterialKind::Diamond {
                any_diamond = true;
                diamond_standing = diamond_standing.max(standing(k));
            }
        }
    }
    if !any_diamond {
        return Err(AnalysisError::NoDiamond);
    }
    if !(best.2 > 0.0) {
        return Err(AnalysisError::EmptyProfile);
    }
    let (i0, j0, u0) = best;
    let k0 = map.idx(i0, j0);
    let e0 = profile.intensity(k0);
    let unit = (profile.lambda / map.guiding_index).powi(3);
    let mut eta_sq: f64 = 0.0;
    for i in 0..map.nr {
        for j in 0..map.nz {
            let k = map.idx(i, j);
            if profile.is_interior(i, j) && map.material[k] == MaterialKind::Diamond {
                eta_sq = eta_sq.max(profile.intensity(k));
            }
        }
    }
    Ok(VolumeResult {
        v_bar: total / u0 / unit,
        eta: (eta_sq / e0).sqrt(),
        r_o: (map.r_center(i0), map.z_center(j0)),
        peak_intensity: e0,
        v_bar_standing: 0.5 * total / best_standing.0 / unit,
        eta_standing: (diamond_standing / best_standing.1).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::fdtd::Normalization;

    fn profile_for(map: &IndexMap, f: impl Fn(usize, usize) -> f64) -> ModeProfile {
        let n = map.nr * map.nz;
        let mut p = ModeProfile {
            lambda: 0.65,
            m: 10,
            nr: map.nr,
            nz: map.nz,
            dr: map.dr,
            dz: map.dz,
            r0: map.r0,
            z0: map.z0,
            er: vec![Complex64::default(); n],
            ephi: vec![Complex64::default(); n],
            ez: vec![Complex64::default(); n],
            material: map.material.clone(),
            pml_cells: 0,
            normalization: Normalization::TravelingWave,
            dft_peak: 0.0,
        };
        for i in 0..map.nr {
            for j in 0..map.nz {
                p.ez[map.idx(i, j)] = Complex64::new(f(i, j), 0.0);
            }
        }
        p
    }

    #[test]
    fn box_field_of_unit_volume() {
        // Guiding annulus whose volume is exactly (λ/n)³; diamond below with no field.
        let n = 3.25;
        let lambda: f64 = 0.65;
        let unit = (lambda / n).powi(3);
        let (dr, dz) = (0.01, 0.01);
        let (r0, nr) = (1.0, 40);
        let mut map = IndexMap::uniform(nr, 20, dr, dz, r0, -0.1, MaterialKind::Diamond, 2.42);
        // annulus r ∈ [1.0, 1.4], height H chosen so that the volume is unit
        let area = std::f64::consts::PI * (1.4f64.powi(2) - 1.0);
        let cells_high = 10;
        map.dz = unit / area / cells_high as f64;
        map.z0 = -(map.dz * 10.0);
        for i in 0..nr {
            for j in 10..20 {
                let k = map.idx(i, j);
                map.material[k] = MaterialKind::GuidingLayer;
                map.eps[k] = n * n;
            }
        }
        let mut p = profile_for(&map, |_, j| if j >= 10 { 1.0 } else { 0.0 });
        p.lambda = lambda;
        p.dz = map.dz;
        p.z0 = map.z0;
        let v = mode_volume_and_eta(&p, &map).unwrap();
        assert!((v.v_bar - 1.0).abs() < 1e-12, "{}", v.v_bar);
        assert_eq!(v.eta, 0.0);
        // pure E_z: standing wave halves the volume and keeps η
        assert!((v.v_bar_standing - 0.5).abs() < 1e-12);
        assert_eq!(v.eta_standing, 0.0);
    }

    #[test]
    fn missing_diamond_is_an_error() {
        let map = IndexMap::uniform(10, 10, 0.01, 0.01, 1.0, 0.0, MaterialKind::GuidingLayer, 3.25);
        let p = profile_for(&map, |_, _| 1.0);
        assert_eq!(mode_volume_and_eta(&p, &map), Err(AnalysisError::NoDiamond));
    }

    #[test]
    fn eta_is_an_amplitude_ratio() {
        let mut map = IndexMap::uniform(10, 10, 0.01, 0.01, 1.0, 0.0, MaterialKind::GuidingLayer, 3.25);
        for j in 0..5 {
            for i in 0..10 {
                let k = map.idx(i, j);
                map.material[k] = MaterialKind::Diamond;
                map.eps[k] = 2.42 * 2.42;
            }
        }
        let p = profile_for(&map, |_, j| if j < 5 { 0.25 } else { 1.0 });
        let v = mode_volume_and_eta(&p, &map).unwrap();
        assert!((v.eta - 0.25).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_detected() {
        let map = IndexMap::uniform(10, 10, 0.01, 0.01, 1.0, 0.0, MaterialKind::Diamond, 2.42);
        let mut p = profile_for(&map, |_, _| 1.0);
        p.dr = 0.02;
        assert_eq!(mode_volume_and_eta(&p, &map), Err(AnalysisError::GridMismatch));
    }
}
