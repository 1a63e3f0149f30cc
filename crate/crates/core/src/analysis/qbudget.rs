use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Radiation-limited Q, either a single value or tabulated against λ (μm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QRad {
    Value(f64),
    Table(Vec<(f64, f64)>),
}

/// 1/Q = 1/Q_rad + 1/Q_i.
pub fn q_budget(q_rad: f64, q_i: f64) -> Result<f64, AnalysisError> {
    if !(q_rad > 0.0) {
        return Err(AnalysisError::NonPositive("Q_rad"));
    }
    if !(q_i > 0.0) {
        return Err(AnalysisError::NonPositive("Q_i"));
    }
    Ok(1.0 / (1.0 / q_rad + 1.0 / q_i))
}

pub fn q_budget_table(q_rad: &QRad, q_i: f64) -> Result<QRad, AnalysisError> {
    match q_rad {
        QRad::Value(q) => Ok(QRad::Value(q_budget(*q, q_i)?)),
        QRad::Table(rows) => rows.iter().map(|&(l, q)| Ok((l, q_budget(q, q_i)?))).collect::<Result<_, _>>().map(QRad::Table),
    }
}

impl QRad {
    /// First wavelength (log-interpolated) where a λ-ascending table drops to `level`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let QRad::Table(rows) = self else {
            return None;
        };
        let mut rows = rows.clone();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in rows.windows(2) {
            let ((l0, q0), (l1, q1)) = (w[0], w[1]);
            if q0 >= level && q1 < level {
                let t = (q0.ln() - level.ln()) / (q0.ln() - q1.ln());
                return Some(l0 + t * (l1 - l0));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn harmonic_sum() {
        assert!((q_budget(1e6, 9000.0).unwrap() - 8919.7).abs() < 0.1);
        assert_eq!(q_budget(9000.0, 9000.0).unwrap(), 4500.0);
        assert!(q_budget(0.0, 9000.0).is_err());
        assert!(q_budget(1e4, -1.0).is_err());
    }

    #[test]
    fn crossing_is_log_interpolated() {
        let t = QRad::Table(vec![(0.60, 1e5), (0.70, 1e3)]);
        assert!((t.crossing(1e4).unwrap() - 0.65).abs() < 1e-12);
        assert!(QRad::Table(vec![(0.6, 1e5), (0.7, 5e4)]).crossing(1e4).is_none());
    }

    proptest! {
        #[test]
        fn total_never_exceeds_inputs(a in 1.0f64..1e8, b in 1.0f64..1e8) {
            let q = q_budget(a, b).unwrap();
            prop_assert!(q <= a.min(b) * (1.0 + 1e-12));
        }
    }
}
