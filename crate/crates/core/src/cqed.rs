//! Cavity-QED parameter chain for an NV⁻ centre coupled to a disk mode.
//!
//! All rates are ordinary frequencies in GHz (ω/2π). The Purcell factor uses
//! the normalised mode quantities of [`ResonantMode`]:
//!
//! F_ZPL = 3/(4π²) · (n_max/n_emit) · Q η² / V̄
//!
//! and the coupling follows the convention F_ZPL = 2 g²/(κ γ_ZPL), which keeps
//! (g, κ, γ, γ_ZPL) and F_ZPL mutually consistent. The textbook convention
//! would have a factor 4; see [`coupling_g`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ResonantMode;
use crate::units::C_UM_THZ;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CqedError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} is missing or not finite")]
    Missing(&'static str),
    #[error("emitter requires 0 < γ_ZPL < γ (got γ = {gamma}, γ_ZPL = {gamma_zpl})")]
    InvalidEmitter { gamma: f64, gamma_zpl: f64 },
}

/// Spontaneous-emission properties of the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterModel {
    /// Total spontaneous emission rate (GHz).
    pub gamma: f64,
    /// Zero-phonon-line emission rate (GHz).
    pub gamma_zpl: f64,
    /// ZPL wavelength (μm).
    pub lambda_zpl: f64,
    /// Depth below the diamond surface (μm); informational.
    #[serde(default)]
    pub depth: f64,
}

impl EmitterModel {
    /// NV⁻ preset: γ = 13 MHz, γ_ZPL = 0.4 MHz, ZPL at 637 nm.
    pub fn nv_minus() -> Self {
        Self { gamma: 0.013, gamma_zpl: 0.0004, lambda_zpl: 0.637, depth: 0.0 }
    }

    pub fn validate(&self) -> Result<(), CqedError> {
        if !(self.gamma_zpl > 0.0 && self.gamma_zpl < self.gamma) {
            return Err(CqedError::InvalidEmitter { gamma: self.gamma, gamma_zpl: self.gamma_zpl });
        }
        if !(self.lambda_zpl > 0.0) {
            return Err(CqedError::NonPositive("λ_ZPL"));
        }
        Ok(())
    }

    /// Fraction of emission into the ZPL without a cavity.
    pub fn branching_ratio(&self) -> f64 {
        self.gamma_zpl / self.gamma
    }
}

impl Default for EmitterModel {
    fn default() -> Self {
        Self::nv_minus()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqedParams {
    /// Single-photon coupling (GHz).
    pub g_zpl: f64,
    /// Cavity field decay rate (GHz).
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_zpl: f64,
    pub f_zpl: f64,
    pub beta: f64,
}

/// κ = (c/λ)/(2Q) in GHz.
pub fn kappa(lambda_um: f64, q: f64) -> Result<f64, CqedError> {
    if !(lambda_um > 0.0) {
        return Err(CqedError::NonPositive("λ"));
    }
    if !(q > 0.0) {
        return Err(CqedError::NonPositive("Q"));
    }
    Ok(C_UM_THZ / lambda_um * 1e3 / (2.0 * q))
}

/// Purcell enhancement of the ZPL from normalised mode quantities.
pub fn purcell_factor(q: f64, v_bar: f64, eta: f64, n_emit: f64, n_max_loc: f64) -> Result<f64, CqedError> {
    if !q.is_finite() {
        return Err(CqedError::Missing("Q"));
    }
    if !(v_bar.is_finite() && v_bar > 0.0) {
        return Err(CqedError::Missing("V̄"));
    }
    if !eta.is_finite() {
        return Err(CqedError::Missing("η"));
    }
    if !(q > 0.0) {
        return Err(CqedError::NonPositive("Q"));
    }
    if !(n_emit > 0.0 && n_max_loc > 0.0) {
        return Err(CqedError::NonPositive("refractive index"));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(3.0 / (4.0 * pi2) * (n_max_loc / n_emit) * q * eta * eta / v_bar)
}

/// [`purcell_factor`] for a simulated mode, using Q_total and the
/// traveling-wave V̄ and η.
pub fn purcell_zpl(mode: &ResonantMode, emitter: &EmitterModel, n_emit: f64, n_max_loc: f64) -> Result<f64, CqedError> {
    emitter.validate()?;
    purcell_factor(mode.q_total(), mode.v_bar, mode.eta, n_emit, n_max_loc)
}

/// g = √(F κ γ_ZPL / 2).
///
/// With this convention g = 0.30 GHz, κ = 26 GHz and γ_ZPL = 0.4 MHz give back
/// F ≈ 17; the usual 4g²/(κγ) form would not.
pub fn coupling_g(f_zpl: f64, kappa: f64, gamma_zpl: f64) -> Result<f64, CqedError> {
    if f_zpl < 0.0 {
        return Err(CqedError::NonPositive("F_ZPL"));
    }
    if !(kappa > 0.0) {
        return Err(CqedError::NonPositive("κ"));
    }
    if gamma_zpl < 0.0 {
        return Err(CqedError::NonPositive("γ_ZPL"));
    }
    Ok((f_zpl * kappa * gamma_zpl / 2.0).sqrt())
}

/// Inverse of [`coupling_g`].
pub fn purcell_from_coupling(g: f64, kappa: f64, gamma_zpl: f64) -> f64 {
    2.0 * g * g / (kappa * gamma_zpl)
}

/// Fraction of the total emission routed into the cavity mode.
pub fn beta(f_zpl: f64, emitter: &EmitterModel) -> Result<f64, CqedError> {
    emitter.validate()?;
    if f_zpl < 0.0 {
        return Err(CqedError::NonPositive("F_ZPL"));
    }
    if f_zpl.is_infinite() {
        return Ok(1.0);
    }
    let enhanced = f_zpl * emitter.gamma_zpl;
    Ok(enhanced / (emitter.gamma - emitter.gamma_zpl + enhanced))
}

/// Full chain for one mode and emitter.
pub fn cqed_params(mode: &ResonantMode, emitter: &EmitterModel, n_emit: f64, n_max_loc: f64) -> Result<CqedParams, CqedError> {
    let f = purcell_zpl(mode, emitter, n_emit, n_max_loc)?;
    let k = kappa(mode.lambda, mode.q_total())?;
    Ok(CqedParams {
        g_zpl: coupling_g(f, k, emitter.gamma_zpl)?,
        kappa: k,
        gamma: emitter.gamma,
        gamma_zpl: emitter.gamma_zpl,
        f_zpl: f,
        beta: beta(f, emitter)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const N_GAP: f64 = 3.25;
    const N_DIA: f64 = 2.42;

    #[test]
    fn kappa_values() {
        assert!((kappa(0.637, 9000.0).unwrap() - 26.146).abs() < 1e-3);
        assert!((kappa(0.637, 2.5e4).unwrap() - 9.413).abs() < 1e-3);
        assert!(kappa(0.637, 1e15).unwrap() < 1e-9);
        assert!(kappa(0.637, 0.0).is_err());
    }

    #[test]
    fn purcell_reference_numbers() {
        let f = purcell_factor(9000.0, 18.0, 0.57, N_DIA, N_GAP).unwrap();
        assert!((f - 16.58).abs() < 0.01, "{f}");
        let f = purcell_factor(2.5e4, 18.0, 0.57, N_DIA, N_GAP).unwrap();
        assert!((f - 46.05).abs() < 0.01, "{f}");
        assert_eq!(purcell_factor(9000.0, 18.0, 0.0, N_DIA, N_GAP).unwrap(), 0.0);
        assert!(purcell_factor(9000.0, f64::NAN, 0.5, N_DIA, N_GAP).is_err());
    }

    #[test]
    fn coupling_and_beta() {
        let g = coupling_g(16.6, 26.1, 0.0004).unwrap();
        assert!((g - 0.2943).abs() < 1e-3, "{g}");
        assert!((coupling_g(66.4, 26.1, 0.0004).unwrap() / g - 2.0).abs() < 1e-12);
        assert_eq!(coupling_g(16.6, 26.1, 0.0).unwrap(), 0.0);

        let nv = EmitterModel::nv_minus();
        let b = beta(16.6, &nv).unwrap();
        assert!((b - 0.345).abs() < 1e-3, "{b}");
        assert!((beta(1.0, &nv).unwrap() - 0.0004 / 0.013).abs() < 1e-15);
        assert_eq!(beta(0.0, &nv).unwrap(), 0.0);
        assert!(beta(1e12, &nv).unwrap() > 0.999_999);
    }

    #[test]
    fn bad_emitter_rejected() {
        let e = EmitterModel { gamma: 0.001, gamma_zpl: 0.002, lambda_zpl: 0.637, depth: 0.0 };
        assert!(matches!(beta(1.0, &e), Err(CqedError::InvalidEmitter { .. })));
    }

    proptest! {
        #[test]
        fn purcell_linear_in_q(q1 in 1.0f64..1e7, q2 in 1.0f64..1e7, v in 1.0f64..100.0, eta in 0.0f64..1.0) {
            let f1 = purcell_factor(q1, v, eta, N_DIA, N_GAP).unwrap();
            let f2 = purcell_factor(q2, v, eta, N_DIA, N_GAP).unwrap();
            if eta > 1e-3 {
                prop_assert!((f1 / f2 - q1 / q2).abs() <= 1e-12 * (q1 / q2));
            }
        }

        #[test]
        fn purcell_quadratic_in_eta(eta in 0.01f64..1.0) {
            let f1 = purcell_factor(9000.0, 18.0, eta, N_DIA, N_GAP).unwrap();
            let f2 = purcell_factor(9000.0, 18.0, 0.5 * eta, N_DIA, N_GAP).unwrap();
            prop_assert!((f1 / f2 - 4.0).abs() < 1e-12);
        }

        #[test]
        fn beta_increasing(f in 0.0f64..1e4, df in 1e-3f64..10.0) {
            let nv = EmitterModel::nv_minus();
            let a = beta(f, &nv).unwrap();
            let b = beta(f + df, &nv).unwrap();
            prop_assert!(b > a && b < 1.0);
        }

        #[test]
        fn g_round_trip(f in 0.1f64..1e3, k in 0.1f64..100.0) {
            let g = coupling_g(f, k, 0.0004).unwrap();
            let back = purcell_from_coupling(g, k, 0.0004);
            prop_assert!((back / f - 1.0).abs() < 1e-12);
        }
    }
}
