use serde::{Deserialize, Serialize};

use super::{DeviceError, DeviceGeometry, MaterialKind, MaterialSet};

/// Discretisation of the (r, z) half-plane around the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dr: f64,
    pub dz: f64,
    /// Inner radius of the annular domain; `None` selects d/4.
    #[serde(default)]
    pub r_min: Option<f64>,
    /// Vacuum kept beyond the disk edge, absorbing layer included (μm).
    #[serde(default = "default_margin")]
    pub air_side: f64,
    /// Vacuum kept above the disk, absorbing layer included (μm).
    #[serde(default = "default_margin")]
    pub air_top: f64,
    /// Absorbing-layer thickness in cells, needed to validate the margins.
    #[serde(default = "default_pml_cells")]
    pub pml_cells: usize,
    /// Average n² over cells cut by a material boundary.
    #[serde(default = "default_true")]
    pub subpixel: bool,
}

fn default_margin() -> f64 {
    0.6
}
fn default_pml_cells() -> usize {
    12
}
fn default_true() -> bool {
    true
}

impl GridSpec {
    pub fn uniform(spacing: f64) -> Self {
        Self {
            dr: spacing,
            dz: spacing,
            r_min: None,
            air_side: default_margin(),
            air_top: default_margin(),
            pml_cells: default_pml_cells(),
            subpixel: true,
        }
    }
}

/// Cell-centred n²(r, z) on an annulus r ∈ [r0, r0 + nr·dr], z ∈ [z0, z0 + nz·dz].
///
/// Storage is row-major in r: cell (i, j) lives at `i * nz + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMap {
    pub nr: usize,
    pub nz: usize,
    pub dr: f64,
    pub dz: f64,
    /// Inner radius r_min of the annulus (may be 0 for axis-including domains).
    pub r0: f64,
    pub z0: f64,
    pub eps: Vec<f64>,
    pub material: Vec<MaterialKind>,
    /// Index of the guiding layer used for the map (normalises mode volumes).
    pub guiding_index: f64,
    pub diamond_index: f64,
    /// Radius of the disk sidewall, when the map came from a device.
    pub disk_radius: Option<f64>,
    /// Disk occupies z ∈ [0, disk_thickness] when the map came from a device.
    pub disk_thickness: Option<f64>,
}

impl IndexMap {
    /// Homogeneous map, used for engine validation.
    pub fn uniform(nr: usize, nz: usize, dr: f64, dz: f64, r0: f64, z0: f64, material: MaterialKind, index: f64) -> Self {
        Self {
            nr,
            nz,
            dr,
            dz,
            r0,
            z0,
            eps: vec![index * index; nr * nz],
            material: vec![material; nr * nz],
            guiding_index: if material == MaterialKind::GuidingLayer { index } else { 3.25 },
            diamond_index: if material == MaterialKind::Diamond { index } else { 2.42 },
            disk_radius: None,
            disk_thickness: None,
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    pub fn r_center(&self, i: usize) -> f64 {
        self.r0 + (i as f64 + 0.5) * self.dr
    }

    pub fn z_center(&self, j: usize) -> f64 {
        self.z0 + (j as f64 + 0.5) * self.dz
    }

    pub fn r_max(&self) -> f64 {
        self.r0 + self.nr as f64 * self.dr
    }

    pub fn z_max(&self) -> f64 {
        self.z0 + self.nz as f64 * self.dz
    }

    pub fn max_index(&self) -> f64 {
        self.eps.iter().cloned().fold(1.0, f64::max).sqrt()
    }

    /// Nearest cell to a physical point, if inside the map.
    pub fn cell_at(&self, r: f64, z: f64) -> Option<(usize, usize)> {
        let fi = ((r - self.r0) / self.dr).floor();
        let fj = ((z - self.z0) / self.dz).floor();
        if fi < 0.0 || fj < 0.0 || fi as usize >= self.nr || fj as usize >= self.nz {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Volume (μm³) of the body of revolution swept by one cell.
    pub fn cell_volume(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.r_center(i) * self.dr * self.dz
    }
}

fn material_at(g: &DeviceGeometry, r: f64, z: f64) -> MaterialKind {
    if z >= 0.0 && z <= g.thickness && r <= g.radius() {
        MaterialKind::GuidingLayer
    } else if z < -g.etch_depth || (z < 0.0 && r <= g.pedestal_radius()) {
        MaterialKind::Diamond
    } else {
        MaterialKind::Vacuum
    }
}

const SUBSAMPLES: usize = 8;

/// Discretises the device onto a grid whose lines pass through the disk edge
/// r = d/2 and the diamond surface z = 0.
pub fn rasterize(geometry: &DeviceGeometry, materials: &MaterialSet, grid: &GridSpec, lambda_ref: f64) -> Result<IndexMap, DeviceError> {
    let g = geometry.validated()?;
    let n_guiding = materials.guiding.index(lambda_ref)?;
    let n_diamond = materials.diamond.index(lambda_ref)?;
    let n_vacuum = materials.vacuum.index(lambda_ref)?;
    let n_max = n_guiding.max(n_diamond).max(n_vacuum);
    let limit = lambda_ref / (15.0 * n_max);
    let spacing = grid.dr.max(grid.dz);
    if !(grid.dr > 0.0 && grid.dz > 0.0) || spacing > limit * (1.0 + 1e-9) {
        return Err(DeviceError::GridTooCoarse { spacing, limit });
    }
    let radius = g.radius();
    let r_min_req = grid.r_min.unwrap_or(0.25 * g.disk_diameter);
    if !(r_min_req >= 0.0 && r_min_req < radius) {
        return Err(DeviceError::InnerRadius { r_min: r_min_req, radius });
    }
    let pml_r = grid.pml_cells as f64 * grid.dr;
    let pml_z = grid.pml_cells as f64 * grid.dz;
    let margin_cells = 4.0;
    if grid.air_side < pml_r + margin_cells * grid.dr {
        return Err(DeviceError::PmlDoesNotFit { region: "side", margin: grid.air_side, pml: pml_r });
    }
    if grid.air_top < pml_z + margin_cells * grid.dz {
        return Err(DeviceError::PmlDoesNotFit { region: "top", margin: grid.air_top, pml: pml_z });
    }
    if g.substrate_extent < pml_z + margin_cells * grid.dz {
        return Err(DeviceError::PmlDoesNotFit { region: "substrate", margin: g.substrate_extent, pml: pml_z });
    }

    let inner_cells = ((radius - r_min_req) / grid.dr).round().max(1.0) as usize;
    let r0 = (radius - inner_cells as f64 * grid.dr).max(0.0);
    let nr = inner_cells + (grid.air_side / grid.dr).round() as usize;
    let below = ((g.etch_depth + g.substrate_extent) / grid.dz).round() as usize;
    let z0 = -(below as f64) * grid.dz;
    let nz = below + ((g.thickness + grid.air_top) / grid.dz).round() as usize;

    let eps_of = |kind: MaterialKind| match kind {
        MaterialKind::GuidingLayer => n_guiding * n_guiding,
        MaterialKind::Diamond => n_diamond * n_diamond,
        MaterialKind::Vacuum => n_vacuum * n_vacuum,
    };

    let mut eps = Vec::with_capacity(nr * nz);
    let mut material = Vec::with_capacity(nr * nz);
    for i in 0..nr {
        let rc = r0 + (i as f64 + 0.5) * grid.dr;
        for j in 0..nz {
            let zc = z0 + (j as f64 + 0.5) * grid.dz;
            let centre = material_at(&g, rc, zc);
            material.push(centre);
            if !grid.subpixel {
                eps.push(eps_of(centre));
                continue;
            }
            let mut acc = 0.0;
            for a in 0..SUBSAMPLES {
                let r = r0 + (i as f64 + (a as f64 + 0.5) / SUBSAMPLES as f64) * grid.dr;
                for b in 0..SUBSAMPLES {
                    let z = z0 + (j as f64 + (b as f64 + 0.5) / SUBSAMPLES as f64) * grid.dz;
                    acc += eps_of(material_at(&g, r, z));
                }
            }
            eps.push(acc / (SUBSAMPLES * SUBSAMPLES) as f64);
        }
    }

    Ok(IndexMap {
        nr,
        nz,
        dr: grid.dr,
        dz: grid.dz,
        r0,
        z0,
        eps,
        material,
        guiding_index: n_guiding,
        diamond_index: n_diamond,
        disk_radius: Some(radius),
        disk_thickness: Some(g.thickness),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cvd() -> DeviceGeometry {
        DeviceGeometry::new(4.5, 0.13, 0.6).unwrap()
    }

    #[test]
    fn three_materials_present() {
        let map = rasterize(&cvd(), &MaterialSet::default(), &GridSpec::uniform(0.01), 0.637).unwrap();
        let mut seen: Vec<f64> = map.eps.iter().map(|e| (e * 1e6).round() / 1e6).collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seen.dedup();
        for v in [1.0, 2.42f64.powi(2), 3.25f64.powi(2)] {
            assert!(seen.iter().any(|s| (s - v).abs() < 1e-6), "missing {v}");
        }
        assert!(map.eps.iter().all(|&e| e >= 1.0));
        // disk edge and diamond surface are grid lines
        let edge = (map.disk_radius.unwrap() - map.r0) / map.dr;
        assert!((edge - edge.round()).abs() < 1e-9);
        assert!((map.z0 / map.dz - (map.z0 / map.dz).round()).abs() < 1e-9);
    }

    #[test]
    fn flat_surface_without_etch() {
        let g = DeviceGeometry::new(4.5, 0.13, 0.0).unwrap();
        let map = rasterize(&g, &MaterialSet::default(), &GridSpec::uniform(0.01), 0.637).unwrap();
        for i in 0..map.nr {
            for j in 0..map.nz {
                let z = map.z_center(j);
                let k = map.idx(i, j);
                if z < 0.0 {
                    assert_eq!(map.material[k], MaterialKind::Diamond);
                } else if z > 0.13 || map.r_center(i) > 2.25 {
                    assert_eq!(map.material[k], MaterialKind::Vacuum);
                }
            }
        }
    }

    #[test]
    fn uniform_map_is_constant() {
        let map = IndexMap::uniform(10, 12, 0.1, 0.1, 0.0, 0.0, MaterialKind::Vacuum, 1.0);
        assert!(map.eps.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let err = rasterize(&cvd(), &MaterialSet::default(), &GridSpec::uniform(0.02), 0.637).unwrap_err();
        assert!(matches!(err, DeviceError::GridTooCoarse { .. }));
    }

    #[test]
    fn inner_radius_must_be_inside_disk() {
        let mut grid = GridSpec::uniform(0.01);
        grid.r_min = Some(2.3);
        assert!(matches!(rasterize(&cvd(), &MaterialSet::default(), &grid, 0.637), Err(DeviceError::InnerRadius { .. })));
    }

    #[test]
    fn pml_must_fit_in_substrate() {
        let mut g = cvd();
        g.substrate_extent = 0.05;
        assert!(matches!(
            rasterize(&g, &MaterialSet::default(), &GridSpec::uniform(0.01), 0.637),
            Err(DeviceError::PmlDoesNotFit { region: "substrate", .. })
        ));
    }

    #[test]
    fn disk_volume_converges() {
        // thickness deliberately off-grid so subpixel fractions matter
        let g = DeviceGeometry::new(4.5, 0.137, 0.3).unwrap();
        let mut errors = Vec::new();
        for &h in &[0.012, 0.006, 0.003] {
            let map = rasterize(&g, &MaterialSet::default(), &GridSpec::uniform(h), 0.637).unwrap();
            let (n_g2, n_d2) = (3.25f64.powi(2), 2.42f64.powi(2));
            let mut vol = 0.0;
            for i in 0..map.nr {
                for j in 0..map.nz {
                    let e = map.eps[map.idx(i, j)];
                    let z = map.z_center(j);
                    // fraction of guiding material in the cell, whichever its neighbour is
                    let frac = if z > -map.dz && z < g.thickness + map.dz && e > 1.0 + 1e-12 {
                        let other = if z < map.dz { n_d2 } else { 1.0 };
                        ((e - other) / (n_g2 - other)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    vol += frac * map.cell_volume(i);
                }
            }
            let exact = PI * (g.radius().powi(2) - map.r0.powi(2)) * g.thickness;
            errors.push((vol - exact).abs() / exact);
        }
        assert!(errors[2] < errors[0] && errors[2] < 1e-3, "{errors:?}");
    }
}
