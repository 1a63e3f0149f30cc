use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DeviceError;

/// Axisymmetric guiding-layer disk sitting on an etched diamond pedestal.
///
/// The diamond top surface under the disk is the plane z = 0; the disk spans
/// z ∈ [0, t] and the pedestal z ∈ [−h, 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceGeometry {
    /// Disk diameter d (μm).
    pub disk_diameter: f64,
    /// Guiding-layer thickness t (μm).
    pub thickness: f64,
    /// Depth h of the diamond etch around the disk (μm).
    pub etch_depth: f64,
    /// Radial recess of the pedestal sidewall relative to the disk edge (μm).
    #[serde(default)]
    pub pedestal_undercut: f64,
    /// Diamond kept below the pedestal base inside the simulation box (μm).
    #[serde(default = "default_substrate_extent")]
    pub substrate_extent: f64,
}

fn default_substrate_extent() -> f64 {
    1.0
}

impl DeviceGeometry {
    pub fn new(disk_diameter: f64, thickness: f64, etch_depth: f64) -> Result<Self, DeviceError> {
        Self {
            disk_diameter,
            thickness,
            etch_depth,
            pedestal_undercut: 0.0,
            substrate_extent: default_substrate_extent(),
        }
        .validated()
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.disk_diameter
    }

    pub fn pedestal_radius(&self) -> f64 {
        self.radius() - self.pedestal_undercut
    }

    /// Checks every invariant and returns the geometry unchanged.
    pub fn validated(self) -> Result<Self, DeviceError> {
        fn positive(field: &'static str, v: f64) -> Result<(), DeviceError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(DeviceError::InvalidField { field, reason: "must be positive".into() })
            }
        }
        fn non_negative(field: &'static str, v: f64) -> Result<(), DeviceError> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(DeviceError::InvalidField { field, reason: "must be non-negative".into() })
            }
        }
        positive("d", self.disk_diameter)?;
        positive("t", self.thickness)?;
        non_negative("h", self.etch_depth)?;
        non_negative("pedestal_undercut", self.pedestal_undercut)?;
        positive("substrate_extent", self.substrate_extent)?;
        if self.pedestal_undercut >= self.radius() {
            return Err(DeviceError::InvalidField {
                field: "pedestal_undercut",
                reason: format!("must be smaller than d/2 = {}", self.radius()),
            });
        }
        Ok(self)
    }
}

/// Builds a geometry from loose key/value parameters.
///
/// Accepted keys: `d`/`disk_diameter`, `t`/`thickness`, `h`/`etch_depth`,
/// `pedestal_undercut`, `substrate_extent`.
pub fn build_geometry(raw: &BTreeMap<String, f64>) -> Result<DeviceGeometry, DeviceError> {
    let mut d = None;
    let mut t = None;
    let mut h = None;
    let mut undercut = 0.0;
    let mut substrate = default_substrate_extent();
    for (key, &value) in raw {
        match key.as_str() {
            "d" | "disk_diameter" => d = Some(value),
            "t" | "thickness" => t = Some(value),
            "h" | "etch_depth" => h = Some(value),
            "pedestal_undercut" => undercut = value,
            "substrate_extent" => substrate = value,
            other => return Err(DeviceError::UnknownParameter(other.to_string())),
        }
    }
    DeviceGeometry {
        disk_diameter: d.ok_or(DeviceError::MissingParameter("d"))?,
        thickness: t.ok_or(DeviceError::MissingParameter("t"))?,
        etch_depth: h.unwrap_or(0.0),
        pedestal_undercut: undercut,
        substrate_extent: substrate,
    }
    .validated()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn reference_devices_are_valid() {
        let cvd = build_geometry(&raw(&[("d", 4.5), ("t", 0.13), ("h", 0.6)])).unwrap();
        assert_eq!(cvd.radius(), 2.25);
        let hpht = build_geometry(&raw(&[("d", 6.5), ("t", 0.25), ("h", 0.6)])).unwrap();
        assert_eq!(hpht.etch_depth, 0.6);
    }

    #[test]
    fn negative_diameter_is_rejected() {
        let err = build_geometry(&raw(&[("d", -1.0), ("t", 0.13), ("h", 0.0)])).unwrap_err();
        assert_eq!(err.to_string(), "d must be positive");
    }

    #[test]
    fn undercut_beyond_radius_is_rejected() {
        let err = build_geometry(&raw(&[("d", 4.5), ("t", 0.13), ("pedestal_undercut", 2.25)])).unwrap_err();
        assert!(matches!(err, DeviceError::InvalidField { field: "pedestal_undercut", .. }));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = build_geometry(&raw(&[("d", 4.5), ("t", 0.13), ("radius", 1.0)])).unwrap_err();
        assert_eq!(err, DeviceError::UnknownParameter("radius".into()));
    }

    #[test]
    fn validation_is_idempotent() {
        let g = DeviceGeometry::new(4.5, 0.13, 0.6).unwrap();
        assert_eq!(g.validated().unwrap(), g);
    }
}
