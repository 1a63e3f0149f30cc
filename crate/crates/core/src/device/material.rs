use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DeviceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaterialKind {
    GuidingLayer,
    Diamond,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    #[default]
    CubicSpline,
}

/// Tabulated n(λ) samples with a natural cubic spline (or linear) interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    wavelengths: Vec<f64>,
    indices: Vec<f64>,
    /// Second derivatives of the natural spline at the knots.
    moments: Vec<f64>,
}

impl DispersionTable {
    pub fn new(wavelengths: Vec<f64>, indices: Vec<f64>) -> Result<Self, DeviceError> {
        if wavelengths.len() != indices.len() {
            return Err(DeviceError::Table("column lengths differ".into()));
        }
        if wavelengths.len() < 2 {
            return Err(DeviceError::Table("need at least two samples".into()));
        }
        if wavelengths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DeviceError::Table("wavelengths must be strictly increasing".into()));
        }
        if indices.iter().any(|&n| !(n >= 1.0)) {
            return Err(DeviceError::Table("indices must be ≥ 1".into()));
        }
        let moments = natural_spline_moments(&wavelengths, &indices);
        Ok(Self { wavelengths, indices, moments })
    }

    /// Reads a two-column `λ_μm, n` CSV; `#` comments and a header row are skipped.
    pub fn from_csv(path: &Path) -> Result<Self, DeviceError> {
        let text = std::fs::read_to_string(path).map_err(|e| DeviceError::Table(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self, DeviceError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut lam = Vec::new();
        let mut n = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| DeviceError::Table(e.to_string()))?;
            if record.len() < 2 {
                return Err(DeviceError::Table(format!("row {}: expected two columns", row + 1)));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    lam.push(a);
                    n.push(b);
                }
                _ if row == 0 => continue,
                _ => return Err(DeviceError::Table(format!("row {}: not numeric", row + 1))),
            }
        }
        Self::new(lam, n)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.wavelengths[0], *self.wavelengths.last().unwrap())
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn indices(&self) -> &[f64] {
        &self.indices
    }

    /// Spline second derivatives at the knots (zero at both ends).
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    fn segment(&self, lambda: f64) -> usize {
        let k = self.wavelengths.partition_point(|&x| x <= lambda);
        k.clamp(1, self.wavelengths.len() - 1) - 1
    }

    fn eval(&self, lambda: f64, rule: Interpolation) -> f64 {
        let k = self.segment(lambda);
        let (x0, x1) = (self.wavelengths[k], self.wavelengths[k + 1]);
        let (y0, y1) = (self.indices[k], self.indices[k + 1]);
        let h = x1 - x0;
        let a = (x1 - lambda) / h;
        let b = (lambda - x0) / h;
        match rule {
            Interpolation::Linear => a * y0 + b * y1,
            Interpolation::CubicSpline => {
                let (m0, m1) = (self.moments[k], self.moments[k + 1]);
                a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
            }
        }
    }
}

fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior knots.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0;
        let b = 2.0 * (h0 + h1);
        let c = h1;
        let d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

/// Optical material: constant reference index with optional tabulated dispersion.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub kind: MaterialKind,
    pub reference_index: f64,
    pub dispersion: Option<DispersionTable>,
    pub interpolation: Interpolation,
}

impl MaterialModel {
    pub fn constant(kind: MaterialKind, index: f64) -> Self {
        Self { kind, reference_index: index, dispersion: None, interpolation: Interpolation::default() }
    }

    pub fn with_table(mut self, table: DispersionTable, interpolation: Interpolation) -> Self {
        self.dispersion = Some(table);
        self.interpolation = interpolation;
        self
    }

    /// Guiding layer (GaP) with the constant 3.25 index.
    pub fn gallium_phosphide() -> Self {
        Self::constant(MaterialKind::GuidingLayer, 3.25)
    }

    pub fn diamond() -> Self {
        Self::constant(MaterialKind::Diamond, 2.42)
    }

    pub fn vacuum() -> Self {
        Self::constant(MaterialKind::Vacuum, 1.0)
    }

    pub fn index(&self, lambda: f64) -> Result<f64, DeviceError> {
        refractive_index(self, lambda)
    }

    pub fn group_index(&self, lambda: f64) -> Result<f64, DeviceError> {
        group_index(self, lambda)
    }
}

/// The three materials of the hybrid device.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSet {
    pub guiding: MaterialModel,
    pub diamond: MaterialModel,
    pub vacuum: MaterialModel,
}

impl Default for MaterialSet {
    fn default() -> Self {
        Self {
            guiding: MaterialModel::gallium_phosphide(),
            diamond: MaterialModel::diamond(),
            vacuum: MaterialModel::vacuum(),
        }
    }
}

impl MaterialSet {
    pub fn get(&self, kind: MaterialKind) -> &MaterialModel {
        match kind {
            MaterialKind::GuidingLayer => &self.guiding,
            MaterialKind::Diamond => &self.diamond,
            MaterialKind::Vacuum => &self.vacuum,
        }
    }

    /// Wavelength range (μm) on which every tabulated material is defined.
    pub fn domain(&self) -> (f64, f64) {
        [&self.guiding, &self.diamond, &self.vacuum]
            .iter()
            .filter_map(|m| m.dispersion.as_ref().map(DispersionTable::domain))
            .fold((0.0, f64::INFINITY), |(lo, hi), (a, b)| (lo.max(a), hi.min(b)))
    }
}

pub fn refractive_index(material: &MaterialModel, lambda: f64) -> Result<f64, DeviceError> {
    match &material.dispersion {
        None => Ok(material.reference_index),
        Some(table) => {
            let (lo, hi) = table.domain();
            if !(lambda >= lo && lambda <= hi) {
                return Err(DeviceError::OutOfDomain { lambda, min: lo, max: hi });
            }
            Ok(table.eval(lambda, material.interpolation))
        }
    }
}

/// Step of the centred difference used for dn/dλ (μm).
pub const GROUP_INDEX_STEP: f64 = 1.0e-3;

/// n_g = n − λ·dn/dλ from a centred difference of the interpolant.
pub fn group_index(material: &MaterialModel, lambda: f64) -> Result<f64, DeviceError> {
    let n = refractive_index(material, lambda)?;
    let Some(table) = &material.dispersion else {
        return Ok(n);
    };
    let (lo, hi) = table.domain();
    let h = GROUP_INDEX_STEP;
    if lambda - h < lo || lambda + h > hi {
        return Err(DeviceError::StencilOutOfDomain { lambda });
    }
    let dn = (table.eval(lambda + h, material.interpolation) - table.eval(lambda - h, material.interpolation)) / (2.0 * h);
    Ok(n - lambda * dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_table() -> MaterialModel {
        let lam: Vec<f64> = (0..9).map(|i| 0.55 + 0.05 * i as f64).collect();
        let n: Vec<f64> = lam.iter().map(|l| 3.5 - 0.4 * (l - 0.55)).collect();
        MaterialModel::gallium_phosphide().with_table(DispersionTable::new(lam, n).unwrap(), Interpolation::Linear)
    }

    #[test]
    fn constant_indices() {
        assert_eq!(refractive_index(&MaterialModel::diamond(), 0.637).unwrap(), 2.42);
        assert_eq!(refractive_index(&MaterialModel::gallium_phosphide(), 1.3).unwrap(), 3.25);
        assert_eq!(group_index(&MaterialModel::gallium_phosphide(), 0.7).unwrap(), 3.25);
    }

    #[test]
    fn below_table_is_out_of_domain() {
        let err = refractive_index(&linear_table(), 0.5).unwrap_err();
        assert!(matches!(err, DeviceError::OutOfDomain { .. }));
    }

    #[test]
    fn linear_table_group_index() {
        let m = linear_table();
        for &lam in &[0.6, 0.637, 0.71, 0.8] {
            let n = m.index(lam).unwrap();
            let ng = m.group_index(lam).unwrap();
            assert!((ng - (n + 0.4 * lam)).abs() < 1e-9, "λ={lam}: {ng}");
        }
    }

    #[test]
    fn stencil_at_edge_is_rejected() {
        assert!(matches!(group_index(&linear_table(), 0.5502), Err(DeviceError::StencilOutOfDomain { .. })));
    }

    #[test]
    fn set_domain_intersects_tables() {
        let mut set = MaterialSet::default();
        assert_eq!(set.domain(), (0.0, f64::INFINITY));
        let t = DispersionTable::new(vec![0.5, 0.7, 0.9], vec![3.4, 3.3, 3.2]).unwrap();
        set.guiding = set.guiding.with_table(t, Interpolation::Linear);
        let t = DispersionTable::new(vec![0.6, 1.0], vec![2.42, 2.41]).unwrap();
        set.diamond = set.diamond.with_table(t, Interpolation::Linear);
        assert_eq!(set.domain(), (0.6, 0.9));
    }

    #[test]
    fn csv_with_header_and_comments() {
        let t = DispersionTable::parse_csv("# GaP\nlambda_um,n\n0.6,3.3\n0.7,3.2\n0.8,3.15\n").unwrap();
        assert_eq!(t.domain(), (0.6, 0.8));
        assert!(DispersionTable::parse_csv("0.7,3.2\n0.6,3.3\n").is_err());
    }

    #[test]
    fn spline_reproduces_knots() {
        let t = DispersionTable::new(vec![0.5, 0.6, 0.75, 0.9], vec![3.4, 3.3, 3.22, 3.18]).unwrap();
        let m = MaterialModel::gallium_phosphide().with_table(t, Interpolation::CubicSpline);
        for (l, n) in [(0.5, 3.4), (0.6, 3.3), (0.75, 3.22), (0.9, 3.18)] {
            assert!((m.index(l).unwrap() - n).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn spline_is_continuous(l in 0.5f64..0.9) {
            let t = DispersionTable::new(vec![0.5, 0.6, 0.75, 0.9], vec![3.4, 3.3, 3.22, 3.18]).unwrap();
            let m = MaterialModel::gallium_phosphide().with_table(t, Interpolation::CubicSpline);
            let a = m.index(l).unwrap();
            let b = m.index((l + 1e-9).min(0.9)).unwrap();
            prop_assert!((a - b).abs() < 1e-7);
        }
    }
}
