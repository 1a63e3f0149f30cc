use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, ResonantMode};

/// One row of an FSR dispersion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrPoint {
    pub family: String,
    /// Lower azimuthal number of the pair.
    pub m: u32,
    pub lambda_mid: f64,
    pub fsr_nm: f64,
}

/// FSR(λ_mid) = λ_m − λ_{m+1} for each consecutive pair of every family.
pub fn fsr_dispersion(modes: &[ResonantMode]) -> Result<Vec<FsrPoint>, AnalysisError> {
    let mut families: BTreeMap<String, Vec<&ResonantMode>> = BTreeMap::new();
    for m in modes {
        families.entry(m.family()).or_default().push(m);
    }
    let mut out = Vec::new();
    for (family, mut list) in families {
        list.sort_by_key(|m| m.m);
        if list.len() < 2 {
            return Err(AnalysisError::Gap { family, after: list[0].m });
        }
        for pair in list.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.m != a.m + 1 {
                return Err(AnalysisError::Gap { family, after: a.m });
            }
            out.push(FsrPoint {
                family: family.clone(),
                m: a.m,
                lambda_mid: 0.5 * (a.lambda + b.lambda),
                fsr_nm: (a.lambda - b.lambda) * 1e3,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Polarization;
    use crate::oracle::analytic_fsr;

    fn mode(m: u32, lambda: f64) -> ResonantMode {
        ResonantMode {
            m,
            polarization: Polarization::TM,
            radial_order: 0,
            lambda,
            q_rad: 1e5,
            q_i: None,
            v_bar: 40.0,
            eta: 0.5,
            r_o: (3.0, 0.1),
            standing_wave: false,
            v_bar_standing: 20.0,
            eta_standing: 0.5,
            hybrid: false,
            edge_fraction: None,
        }
    }

    #[test]
    fn pair_matches_analytic_fsr() {
        let t = fsr_dispersion(&[mode(83, 0.6400), mode(82, 0.6477)]).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].fsr_nm - 7.7).abs() < 1e-9);
        assert!((t[0].lambda_mid - 0.64385).abs() < 1e-12);
        // group index implied by the pair, fed back into the closed form
        let radius = 3.25;
        let ng = t[0].lambda_mid.powi(2) / (2.0 * std::f64::consts::PI * radius * t[0].fsr_nm * 1e-3);
        assert!((analytic_fsr(t[0].lambda_mid, radius, ng).unwrap() - t[0].fsr_nm).abs() < 1e-9);
    }

    #[test]
    fn single_mode_family_is_a_gap() {
        assert!(matches!(fsr_dispersion(&[mode(83, 0.64)]), Err(AnalysisError::Gap { .. })));
        assert!(matches!(fsr_dispersion(&[mode(83, 0.64), mode(85, 0.63)]), Err(AnalysisError::Gap { after: 83, .. })));
    }
}
