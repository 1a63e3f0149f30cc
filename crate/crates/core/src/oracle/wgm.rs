//! Whispering-gallery resonance positions from a slab effective index.

use std::ops::RangeInclusive;

use super::{slab_neff, OracleError, SlabLayer, SlabStack};
use crate::analysis::Polarization;
use crate::device::{DeviceGeometry, MaterialSet};

/// Magnitudes of the first zeros of Ai(−x).
const AIRY_ZEROS: [f64; 6] = [2.338_107_41, 4.087_949_44, 5.520_559_83, 6.786_708_09, 7.944_133_59, 9.022_650_85];

/// |a_{p+1}|, the (p+1)-th zero of the Airy function (p = radial order).
pub fn airy_zero(p: usize) -> f64 {
    if let Some(&a) = AIRY_ZEROS.get(p) {
        return a;
    }
    let t = 3.0 * std::f64::consts::PI * (4.0 * (p + 1) as f64 - 1.0) / 8.0;
    t.powf(2.0 / 3.0) * (1.0 + 5.0 / (48.0 * t * t))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if !fm.is_finite() {
            return None;
        }
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Solves m·λ = 2πR·n_eff(λ) for each m inside `window` (μm).
pub fn wgm_resonances(
    radius: f64,
    n_eff: impl Fn(f64) -> f64,
    m_range: RangeInclusive<u32>,
    window: (f64, f64),
) -> Result<Vec<(u32, f64)>, OracleError> {
    if !(radius > 0.0) {
        return Err(OracleError::NonPositive("radius"));
    }
    let two_pi_r = 2.0 * std::f64::consts::PI * radius;
    m_range
        .map(|m| {
            bisect(window.0, window.1, |l| two_pi_r * n_eff(l) / l - m as f64)
                .map(|l| (m, l))
                .ok_or(OracleError::NoRoot { m })
        })
        .collect()
}

/// Resonances including the leading curvature corrections of a dielectric
/// cylinder:
/// `n_eff·k·R = m + a_p (m/2)^{1/3} − P/√(n_eff² − 1)`, with P = 1/n_eff when
/// E is radial (TE here) and P = n_eff when E is vertical (TM).
pub fn wgm_resonances_bent(
    radius: f64,
    n_eff: impl Fn(f64) -> f64,
    m_range: RangeInclusive<u32>,
    window: (f64, f64),
    polarization: Polarization,
    radial_order: usize,
) -> Result<Vec<(u32, f64)>, OracleError> {
    if !(radius > 0.0) {
        return Err(OracleError::NonPositive("radius"));
    }
    let a = airy_zero(radial_order);
    m_range
        .map(|m| {
            let mf = m as f64;
            let f = |l: f64| {
                let n = n_eff(l);
                let p = match polarization {
                    Polarization::TE => 1.0 / n,
                    Polarization::TM => n,
                };
                n * 2.0 * std::f64::consts::PI * radius / l - (mf + a * (mf / 2.0).cbrt() - p / (n * n - 1.0).sqrt())
            };
            bisect(window.0, window.1, f).map(|l| (m, l)).ok_or(OracleError::NoRoot { m })
        })
        .collect()
}

/// FSR = λ²/(2πR·n_g), returned in nm.
pub fn analytic_fsr(lambda: f64, radius: f64, n_g: f64) -> Result<f64, OracleError> {
    if !(lambda > 0.0) {
        return Err(OracleError::NonPositive("wavelength"));
    }
    if !(radius > 0.0) {
        return Err(OracleError::NonPositive("radius"));
    }
    if !(n_g > 0.0) {
        return Err(OracleError::NonPositive("group index"));
    }
    Ok(lambda * lambda / (2.0 * std::f64::consts::PI * radius * n_g) * 1e3)
}

/// Vertical slab through the disk rim: air / (diamond pedestal of height h) /
/// guiding layer / air, or a semi-infinite diamond substrate when h = 0.
pub fn device_stack(geometry: &DeviceGeometry, materials: &MaterialSet, polarization: Polarization) -> SlabStack {
    let mut layers = Vec::with_capacity(4);
    if geometry.etch_depth > 0.0 {
        layers.push(SlabLayer { material: materials.vacuum.clone(), thickness: None });
        layers.push(SlabLayer { material: materials.diamond.clone(), thickness: Some(geometry.etch_depth) });
    } else {
        layers.push(SlabLayer { material: materials.diamond.clone(), thickness: None });
    }
    layers.push(SlabLayer { material: materials.guiding.clone(), thickness: Some(geometry.thickness) });
    layers.push(SlabLayer { material: materials.vacuum.clone(), thickness: None });
    SlabStack { layers, polarization }
}

/// Fundamental slab effective index of the device cross-section (NaN when cut off).
pub fn fundamental_neff(geometry: &DeviceGeometry, materials: &MaterialSet, polarization: Polarization, lambda: f64) -> f64 {
    slab_neff(&device_stack(geometry, materials, polarization), lambda)
        .ok()
        .and_then(|m| m.first().map(|m| m.n_eff))
        .unwrap_or(f64::NAN)
}

/// Curvature-corrected resonance estimates for a (polarization, radial order) family.
pub fn family_resonances(
    geometry: &DeviceGeometry,
    materials: &MaterialSet,
    polarization: Polarization,
    radial_order: usize,
    m_range: RangeInclusive<u32>,
    window: (f64, f64),
) -> Result<Vec<(u32, f64)>, OracleError> {
    let stack = device_stack(geometry, materials, polarization);
    let n = |l: f64| slab_neff(&stack, l).ok().and_then(|m| m.first().map(|m| m.n_eff)).unwrap_or(f64::NAN);
    wgm_resonances_bent(geometry.radius(), n, m_range, window, polarization, radial_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_index_closed_form() {
        let r = wgm_resonances(3.25, |_| 2.589, 83..=83, (0.5, 0.8)).unwrap();
        let expected = 2.0 * std::f64::consts::PI * 3.25 * 2.589 / 83.0;
        assert!((r[0].1 - expected).abs() < 1e-12);
        assert!((r[0].1 - 0.637).abs() < 5e-4);
    }

    #[test]
    fn doubling_m_halves_wavelength() {
        let a = wgm_resonances(3.0, |_| 2.6, 40..=40, (0.3, 2.0)).unwrap()[0].1;
        let b = wgm_resonances(3.0, |_| 2.6, 80..=80, (0.3, 2.0)).unwrap()[0].1;
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window_has_no_root() {
        let e = wgm_resonances(3.25, |_| 2.589, 83..=83, (0.9, 1.0)).unwrap_err();
        assert_eq!(e, OracleError::NoRoot { m: 83 });
    }

    #[test]
    fn fsr_formula() {
        let f = analytic_fsr(0.637, 3.25, 2.589).unwrap();
        let direct = 0.637f64.powi(2) / (2.0 * std::f64::consts::PI * 3.25 * 2.589) * 1000.0;
        assert!((f - direct).abs() < 1e-12);
        assert!((f - 7.68).abs() < 0.01);
        assert!((analytic_fsr(0.637, 3.25, 2.0 * 2.589).unwrap() - f / 2.0).abs() < 1e-12);
        assert!((analytic_fsr(1.274, 3.25, 2.589).unwrap() - 4.0 * f).abs() < 1e-9);
        assert!(analytic_fsr(0.637, 0.0, 2.5).is_err());
    }

    #[test]
    fn airy_zeros_continue_smoothly() {
        assert!((airy_zero(6) - 10.040_174_34).abs() < 1e-4);
        assert!(airy_zero(7) > airy_zero(6));
    }

    #[test]
    fn curvature_lowers_wavelength_for_fixed_m() {
        let straight = wgm_resonances(3.25, |_| 2.9, 90..=90, (0.4, 0.9)).unwrap()[0].1;
        let bent = wgm_resonances_bent(3.25, |_| 2.9, 90..=90, (0.4, 0.9), Polarization::TM, 0).unwrap()[0].1;
        assert!(bent < straight);
    }
}
