use serde::{Deserialize, Serialize};

use super::{bessel_j_prime_zero, bessel_j_zero, OracleError};
use crate::units::C_UM_THZ;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CavityModeType {
    TM,
    TE,
}

/// Eigenfrequency (THz) of a closed perfectly conducting cylinder of radius
/// `a` and height `l`: ν = (c/2π)·√((χ/a)² + (pπ/L)²).
pub fn pec_cylinder_modes(a: f64, l: f64, (m, n, p): (u32, usize, usize), kind: CavityModeType) -> Result<f64, OracleError> {
    if !(a > 0.0) {
        return Err(OracleError::NonPositive("radius"));
    }
    if !(l > 0.0) {
        return Err(OracleError::NonPositive("height"));
    }
    if n == 0 {
        return Err(OracleError::InvalidIndex("radial index n starts at 1".into()));
    }
    let chi = match kind {
        CavityModeType::TM => bessel_j_zero(m, n),
        CavityModeType::TE if p == 0 => return Err(OracleError::InvalidIndex("TE modes need p ≥ 1".into())),
        CavityModeType::TE => bessel_j_prime_zero(m, n),
    };
    let kz = p as f64 * std::f64::consts::PI / l;
    Ok(C_UM_THZ / (2.0 * std::f64::consts::PI) * ((chi / a).powi(2) + kz * kz).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tm010() {
        let nu = pec_cylinder_modes(1.0, 0.5, (0, 1, 0), CavityModeType::TM).unwrap();
        let direct = 2.404_825_557_7 * C_UM_THZ / (2.0 * std::f64::consts::PI);
        assert!((nu - direct).abs() < 1e-6);
        assert!((nu - 114.8).abs() < 0.1);
        let half = pec_cylinder_modes(2.0, 0.5, (0, 1, 0), CavityModeType::TM).unwrap();
        assert!((half - nu / 2.0).abs() < 1e-9);
    }

    #[test]
    fn te_requires_axial_variation() {
        assert!(matches!(pec_cylinder_modes(1.0, 1.0, (1, 1, 0), CavityModeType::TE), Err(OracleError::InvalidIndex(_))));
        assert!(pec_cylinder_modes(1.0, 1.0, (1, 1, 1), CavityModeType::TE).is_ok());
    }
}
