use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_complex::Complex64;

use super::pml::{self, AxisPml};
use super::{Component, FdtdError, SimConfig, SourceSpec};
use crate::device::IndexMap;

/// Scalar type carried by the field arrays.
///
/// The update operator is real, so runs driven by a real source amplitude use
/// `f64` and complex sources use [`Complex64`].
pub trait FieldValue:
    Copy + Default + Send + Sync + 'static + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign + SubAssign
{
    fn from_complex(c: Complex64) -> Self;
    fn to_complex(self) -> Complex64;
    fn norm_sqr(self) -> f64;
    fn finite(self) -> bool;
    /// Re(self · conj(other)).
    fn dot_re(self, other: Self) -> f64;
}

impl FieldValue for f64 {
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn dot_re(self, other: Self) -> f64 {
        self * other
    }
}

impl FieldValue for Complex64 {
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn dot_re(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
}

/// Largest stable Courant factor c·Δt/min(Δr, Δz) for azimuthal number `m`.
///
/// Frozen-coefficient von Neumann bound: the m/r coupling adds (m/r)² to the
/// spectral radius 4/Δr² + 4/Δz² of the discrete curl-curl operator, evaluated
/// at the smallest radius where the coupling acts.
pub fn stability_limit(map: &IndexMap, m: u32) -> f64 {
    let r_in = map.r0 + 0.5 * map.dr;
    let k = m as f64 / (2.0 * r_in);
    let dt_max = 1.0 / (1.0 / (map.dr * map.dr) + 1.0 / (map.dz * map.dz) + k * k).sqrt();
    dt_max / map.dr.min(map.dz)
}

/// Position offsets (in cells) and array shape of each component.
fn layout(c: Component, nr: usize, nz: usize) -> (f64, f64, usize, usize) {
    match c {
        Component::Er => (0.5, 0.0, nr, nz + 1),
        Component::Ephi => (0.0, 0.0, nr + 1, nz + 1),
        Component::Ez => (0.0, 0.5, nr + 1, nz),
        Component::Hr => (0.0, 0.5, nr + 1, nz),
        Component::Hphi => (0.5, 0.5, nr, nz),
        Component::Hz => (0.5, 0.0, nr, nz + 1),
    }
}

/// Mutable state of one run: the six field arrays, PML memory and coefficients.
#[derive(Debug, Clone)]
pub struct Simulation<T: FieldValue> {
    pub(crate) nr: usize,
    pub(crate) nz: usize,
    pub(crate) dr: f64,
    pub(crate) dz: f64,
    pub(crate) r0: f64,
    pub(crate) z0: f64,
    pub(crate) dt: f64,
    m: f64,
    axis: bool,
    pml_cells: usize,
    r_int: Vec<f64>,
    r_half: Vec<f64>,
    m_r_int: Vec<f64>,
    m_r_half: Vec<f64>,
    pub(crate) er: Vec<T>,
    pub(crate) ep: Vec<T>,
    pub(crate) ez: Vec<T>,
    hr: Vec<T>,
    hp: Vec<T>,
    hz: Vec<T>,
    cer: Vec<f64>,
    cep: Vec<f64>,
    cez: Vec<f64>,
    zpml: AxisPml,
    rpml: AxisPml,
    psi_hr_z: Vec<T>,
    psi_hp_z: Vec<T>,
    psi_hp_r: Vec<T>,
    psi_hz_r: Vec<T>,
    psi_er_z: Vec<T>,
    psi_ep_z: Vec<T>,
    psi_ep_r: Vec<T>,
    psi_ez_r: Vec<T>,
    // Inside the radial layer every 1/r becomes 1/r̃ with r̃ = r + ∫σ dr/(iω).
    // Each metric term X/r is corrected by −Y/r, Y ← e^{−gΔt}Y + (1 − e^{−gΔt})X, g = ∫σ dr / r.
    metric_int: Vec<f64>,
    metric_half: Vec<f64>,
    y_hr: Vec<T>,
    y_hz: Vec<T>,
    y_er: Vec<T>,
    y_ez: Vec<T>,
    source: SourceSpec,
    source_at: (Component, usize),
    source_amp: T,
    step: usize,
    nan_check: Option<usize>,
}

impl<T: FieldValue> Simulation<T> {
    pub fn new(config: &SimConfig) -> Result<Self, FdtdError> {
        let map = &*config.index_map;
        let (nr, nz) = (map.nr, map.nz);
        if nr < 2 || nz < 2 || map.eps.len() != nr * nz {
            return Err(FdtdError::Config("index map dimensions inconsistent".into()));
        }
        if !(config.courant > 0.0) {
            return Err(FdtdError::Config("Courant factor must be positive".into()));
        }
        let limit = stability_limit(map, config.m);
        let courant = config.effective_courant();
        if courant > limit {
            return Err(FdtdError::UnstableCourant { courant, limit, m: config.m });
        }
        if 2 * config.pml.cells + 2 >= nr.min(nz) {
            return Err(FdtdError::Config("absorbing layer thicker than the grid".into()));
        }
        let dt = config.dt();
        let (dr, dz) = (map.dr, map.dz);
        let m = config.m as f64;
        let r_int: Vec<f64> = (0..=nr).map(|i| map.r0 + i as f64 * dr).collect();
        let r_half: Vec<f64> = (0..nr).map(|i| map.r0 + (i as f64 + 0.5) * dr).collect();
        let m_r_int = r_int.iter().map(|&r| if r > 0.0 { m / r } else { 0.0 }).collect();
        let m_r_half = r_half.iter().map(|&r| m / r).collect();

        let cell = |i: isize, j: isize| -> Option<f64> {
            if i < 0 || j < 0 || i as usize >= nr || j as usize >= nz {
                None
            } else {
                Some(map.eps[i as usize * nz + j as usize])
            }
        };
        let average = |cells: &[(isize, isize)]| -> f64 {
            let (sum, count) = cells.iter().filter_map(|&(i, j)| cell(i, j)).fold((0.0, 0usize), |(s, c), e| (s + e, c + 1));
            if count == 0 {
                1.0
            } else {
                sum / count as f64
            }
        };
        let mut cer = vec![0.0; nr * (nz + 1)];
        for i in 0..nr {
            for j in 0..=nz {
                let (ii, jj) = (i as isize, j as isize);
                cer[i * (nz + 1) + j] = dt / average(&[(ii, jj - 1), (ii, jj)]);
            }
        }
        let mut cep = vec![0.0; (nr + 1) * (nz + 1)];
        for i in 0..=nr {
            for j in 0..=nz {
                let (ii, jj) = (i as isize, j as isize);
                cep[i * (nz + 1) + j] = dt / average(&[(ii - 1, jj - 1), (ii, jj - 1), (ii - 1, jj), (ii, jj)]);
            }
        }
        let mut cez = vec![0.0; (nr + 1) * nz];
        for i in 0..=nr {
            for j in 0..nz {
                let (ii, jj) = (i as isize, j as isize);
                cez[i * nz + j] = dt / average(&[(ii - 1, jj), (ii, jj)]);
            }
        }

        let zpml = pml::axis(&config.pml, nz, dz, dt, true, true);
        let rpml = pml::axis(&config.pml, nr, dr, dt, false, true);
        let metric_int = rpml.integer.iter().map(|p| (-p.integrated / r_int[p.index].max(0.5 * dr) * dt).exp()).collect();
        let metric_half = rpml.half.iter().map(|p| (-p.integrated / r_half[p.index] * dt).exp()).collect();

        let mut sim = Self {
            nr,
            nz,
            dr,
            dz,
            r0: map.r0,
            z0: map.z0,
            dt,
            m,
            axis: map.r0 == 0.0,
            pml_cells: config.pml.cells,
            r_int,
            r_half,
            m_r_int,
            m_r_half,
            er: vec![T::default(); nr * (nz + 1)],
            ep: vec![T::default(); (nr + 1) * (nz + 1)],
            ez: vec![T::default(); (nr + 1) * nz],
            hr: vec![T::default(); (nr + 1) * nz],
            hp: vec![T::default(); nr * nz],
            hz: vec![T::default(); nr * (nz + 1)],
            cer,
            cep,
            cez,
            zpml,
            rpml,
            psi_hr_z: vec![T::default(); (nr + 1) * nz],
            psi_hp_z: vec![T::default(); nr * nz],
            psi_hp_r: vec![T::default(); nr * nz],
            psi_hz_r: vec![T::default(); nr * (nz + 1)],
            psi_er_z: vec![T::default(); nr * (nz + 1)],
            psi_ep_z: vec![T::default(); (nr + 1) * (nz + 1)],
            psi_ep_r: vec![T::default(); (nr + 1) * (nz + 1)],
            psi_ez_r: vec![T::default(); (nr + 1) * nz],
            metric_int,
            metric_half,
            y_hr: vec![T::default(); (nr + 1) * nz],
            y_hz: vec![T::default(); nr * (nz + 1)],
            y_er: vec![T::default(); nr * (nz + 1)],
            y_ez: vec![T::default(); (nr + 1) * nz],
            source: config.source,
            source_at: (config.source.orientation, 0),
            source_amp: T::from_complex(config.source.amplitude),
            step: 0,
            nan_check: config.nan_check_interval,
        };
        let src = &config.source;
        if !matches!(src.orientation, Component::Er | Component::Ephi | Component::Ez) {
            return Err(FdtdError::Config("source must be an electric dipole".into()));
        }
        let (i, j) = sim.locate(src.orientation, src.r, src.z).ok_or(FdtdError::Placement { what: "source", r: src.r, z: src.z })?;
        sim.source_at = (src.orientation, sim.flat(src.orientation, i, j));
        for p in &config.probes {
            sim.locate(p.component, p.r, p.z).ok_or(FdtdError::Placement { what: "probe", r: p.r, z: p.z })?;
        }
        Ok(sim)
    }

    /// Lattice indices of the `component` sample nearest to (r, z), provided it
    /// lies outside the absorbing layer and off the conducting walls.
    pub fn locate(&self, component: Component, r: f64, z: f64) -> Option<(usize, usize)> {
        let (or, oz, sr, sz) = layout(component, self.nr, self.nz);
        let fi = ((r - self.r0) / self.dr - or).round();
        let fj = ((z - self.z0) / self.dz - oz).round();
        if fi < 0.0 || fj < 0.0 || fi as usize >= sr || fj as usize >= sz {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        let (pi, pj) = (i as f64 + or, j as f64 + oz);
        let p = self.pml_cells as f64;
        if pi > self.nr as f64 - p || pj < p || pj > self.nz as f64 - p {
            return None;
        }
        let on_wall = match component {
            Component::Er => j == 0 || j == self.nz,
            Component::Ephi => i == 0 || i == self.nr || j == 0 || j == self.nz,
            Component::Ez => (i == 0 && !(self.axis && self.m == 0.0)) || i == self.nr,
            _ => false,
        };
        if on_wall {
            return None;
        }
        Some((i, j))
    }

    pub fn flat(&self, component: Component, i: usize, j: usize) -> usize {
        let (_, _, _, sz) = layout(component, self.nr, self.nz);
        i * sz + j
    }

    pub fn field(&self, component: Component) -> &[T] {
        match component {
            Component::Er => &self.er,
            Component::Ephi => &self.ep,
            Component::Ez => &self.ez,
            Component::Hr => &self.hr,
            Component::Hphi => &self.hp,
            Component::Hz => &self.hz,
        }
    }

    pub fn field_mut(&mut self, component: Component) -> &mut [T] {
        match component {
            Component::Er => &mut self.er,
            Component::Ephi => &mut self.ep,
            Component::Ez => &mut self.ez,
            Component::Hr => &mut self.hr,
            Component::Hphi => &mut self.hp,
            Component::Hz => &mut self.hz,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Time at which the E-field currently stored is defined.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    /// Advances H by half a step and E by a full step.
    pub fn step(&mut self) -> Result<(), FdtdError> {
        self.update_h();
        self.update_e();
        self.step += 1;
        if let Some(every) = self.nan_check {
            if every > 0 && self.step % every == 0 && !self.all_finite() {
                return Err(FdtdError::Instability { step: self.step });
            }
        }
        Ok(())
    }

    /// One step that also returns the leapfrog invariant
    /// W = Σ w ε|Eⁿ|² + Σ w Re(H^{n−½}·H^{n+½}*), exactly conserved without
    /// losses or sources.
    pub fn step_measured(&mut self) -> Result<f64, FdtdError> {
        let old = (self.hr.clone(), self.hp.clone(), self.hz.clone());
        let e_part = self.electric_energy();
        self.update_h();
        let h_part = self.weighted_dot(Component::Hr, &old.0, &self.hr)
            + self.weighted_dot(Component::Hphi, &old.1, &self.hp)
            + self.weighted_dot(Component::Hz, &old.2, &self.hz);
        self.update_e();
        self.step += 1;
        if !self.all_finite() {
            return Err(FdtdError::Instability { step: self.step });
        }
        Ok(0.5 * (e_part + h_part))
    }

    /// Discrete field energy ½Σ w (ε|E|² + |H|²), with H at the half step.
    pub fn energy(&self) -> f64 {
        let h = self.weighted_dot(Component::Hr, &self.hr, &self.hr)
            + self.weighted_dot(Component::Hphi, &self.hp, &self.hp)
            + self.weighted_dot(Component::Hz, &self.hz, &self.hz);
        0.5 * (self.electric_energy() + h)
    }

    fn weight(&self, component: Component, i: usize) -> f64 {
        let r = match component {
            Component::Er | Component::Hphi | Component::Hz => self.r_half[i],
            Component::Ez if i == 0 && self.axis => self.dr / 8.0,
            _ => self.r_int[i],
        };
        r * self.dr * self.dz
    }

    fn weighted_dot(&self, component: Component, a: &[T], b: &[T]) -> f64 {
        let (_, _, sr, sz) = layout(component, self.nr, self.nz);
        let mut total = 0.0;
        for i in 0..sr {
            let w = self.weight(component, i);
            let s: f64 = a[i * sz..(i + 1) * sz].iter().zip(&b[i * sz..(i + 1) * sz]).map(|(x, y)| x.dot_re(*y)).sum();
            total += w * s;
        }
        total
    }

    fn electric_energy(&self) -> f64 {
        let mut total = 0.0;
        for (component, field, coef) in [
            (Component::Er, &self.er, &self.cer),
            (Component::Ephi, &self.ep, &self.cep),
            (Component::Ez, &self.ez, &self.cez),
        ] {
            let (_, _, sr, sz) = layout(component, self.nr, self.nz);
            for i in 0..sr {
                let w = self.weight(component, i);
                let s: f64 = (i * sz..(i + 1) * sz).map(|k| field[k].norm_sqr() * self.dt / coef[k]).sum();
                total += w * s;
            }
        }
        total
    }

    pub fn all_finite(&self) -> bool {
        [&self.er, &self.ep, &self.ez, &self.hr, &self.hp, &self.hz].iter().all(|f| f.iter().all(|v| v.finite()))
    }

    fn update_h(&mut self) {
        let (nr, nz) = (self.nr, self.nz);
        let nz1 = nz + 1;
        let dt = self.dt;
        let dtdz = dt / self.dz;
        let dtdr = dt / self.dr;
        let Self { er, ep, ez, hr, hp, hz, r_int, r_half, m_r_int, m_r_half, .. } = self;

        // H_r(i, j+½), i ∈ 1..nr
        for i in 1..nr {
            let mr = dt * m_r_int[i];
            let hr_row = &mut hr[i * nz..(i + 1) * nz];
            let ez_row = &ez[i * nz..(i + 1) * nz];
            let ep_row = &ep[i * nz1..(i + 1) * nz1];
            for j in 0..nz {
                hr_row[j] += (ep_row[j + 1] - ep_row[j]) * dtdz - ez_row[j] * mr;
            }
        }
        // H_φ(i+½, j+½)
        for i in 0..nr {
            let hp_row = &mut hp[i * nz..(i + 1) * nz];
            let ez0 = &ez[i * nz..(i + 1) * nz];
            let ez1 = &ez[(i + 1) * nz..(i + 2) * nz];
            let er_row = &er[i * nz1..(i + 1) * nz1];
            for j in 0..nz {
                hp_row[j] += (ez1[j] - ez0[j]) * dtdr - (er_row[j + 1] - er_row[j]) * dtdz;
            }
        }
        // H_z(i+½, j), j ∈ 1..nz
        for i in 0..nr {
            let mr = dt * m_r_half[i];
            let a1 = dtdr * r_int[i + 1] / r_half[i];
            let a0 = dtdr * r_int[i] / r_half[i];
            let hz_row = &mut hz[i * nz1..(i + 1) * nz1];
            let ep0 = &ep[i * nz1..(i + 1) * nz1];
            let ep1 = &ep[(i + 1) * nz1..(i + 2) * nz1];
            let er_row = &er[i * nz1..(i + 1) * nz1];
            for j in 1..nz {
                hz_row[j] += er_row[j] * mr - (ep1[j] * a1 - ep0[j] * a0);
            }
        }

        // absorbing layers
        let idz = 1.0 / self.dz;
        let idr = 1.0 / self.dr;
        for p in &self.zpml.half {
            let j = p.index;
            for i in 1..nr {
                let d = (ep[i * nz1 + j + 1] - ep[i * nz1 + j]) * idz;
                let k = i * nz + j;
                let psi = self.psi_hr_z[k] * p.b + d * p.a;
                self.psi_hr_z[k] = psi;
                hr[k] += psi * dt;
            }
            for i in 0..nr {
                let d = (er[i * nz1 + j + 1] - er[i * nz1 + j]) * idz;
                let k = i * nz + j;
                let psi = self.psi_hp_z[k] * p.b + d * p.a;
                self.psi_hp_z[k] = psi;
                hp[k] -= psi * dt;
            }
        }
        let m = self.m;
        for (p, &bm) in self.rpml.half.iter().zip(&self.metric_half) {
            let i = p.index;
            for j in 0..nz {
                let d = (ez[(i + 1) * nz + j] - ez[i * nz + j]) * idr;
                let k = i * nz + j;
                let psi = self.psi_hp_r[k] * p.b + d * p.a;
                self.psi_hp_r[k] = psi;
                hp[k] += psi * dt;
            }
            let scale = dt / r_half[i];
            for j in 1..nz {
                let d = (ep[(i + 1) * nz1 + j] - ep[i * nz1 + j]) * idr;
                let k = i * nz1 + j;
                let psi = self.psi_hz_r[k] * p.b + d * p.a;
                self.psi_hz_r[k] = psi;
                let x = er[k] * m - (ep[(i + 1) * nz1 + j] + ep[i * nz1 + j]) * 0.5;
                let y = self.y_hz[k] * bm + x * (1.0 - bm);
                self.y_hz[k] = y;
                hz[k] -= psi * dt + y * scale;
            }
        }
        if m != 0.0 {
            for (p, &bm) in self.rpml.integer.iter().zip(&self.metric_int) {
                let i = p.index;
                if i == 0 || i == nr {
                    continue;
                }
                let scale = dt / r_int[i];
                for j in 0..nz {
                    let k = i * nz + j;
                    let y = self.y_hr[k] * bm + ez[k] * (m * (1.0 - bm));
                    self.y_hr[k] = y;
                    hr[k] += y * scale;
                }
            }
        }
    }

    fn update_e(&mut self) {
        let (nr, nz) = (self.nr, self.nz);
        let nz1 = nz + 1;
        let idz = 1.0 / self.dz;
        let idr = 1.0 / self.dr;
        let t_half = (self.step as f64 + 0.5) * self.dt;
        let Self { er, ep, ez, hr, hp, hz, cer, cep, cez, r_int, r_half, m_r_int, m_r_half, .. } = self;

        // E_r(i+½, j), j ∈ 1..nz
        for i in 0..nr {
            let mr = m_r_half[i];
            let er_row = &mut er[i * nz1..(i + 1) * nz1];
            let c_row = &cer[i * nz1..(i + 1) * nz1];
            let hz_row = &hz[i * nz1..(i + 1) * nz1];
            let hp_row = &hp[i * nz..(i + 1) * nz];
            for j in 1..nz {
                er_row[j] -= (hz_row[j] * mr + (hp_row[j] - hp_row[j - 1]) * idz) * c_row[j];
            }
        }
        // E_φ(i, j), i ∈ 1..nr, j ∈ 1..nz
        for i in 1..nr {
            let ep_row = &mut ep[i * nz1..(i + 1) * nz1];
            let c_row = &cep[i * nz1..(i + 1) * nz1];
            let hr_row = &hr[i * nz..(i + 1) * nz];
            let hz1 = &hz[i * nz1..(i + 1) * nz1];
            let hz0 = &hz[(i - 1) * nz1..i * nz1];
            for j in 1..nz {
                ep_row[j] += ((hr_row[j] - hr_row[j - 1]) * idz - (hz1[j] - hz0[j]) * idr) * c_row[j];
            }
        }
        // E_z(i, j+½), i ∈ 1..nr
        for i in 1..nr {
            let mr = m_r_int[i];
            let a1 = idr * r_half[i] / r_int[i];
            let a0 = idr * r_half[i - 1] / r_int[i];
            let ez_row = &mut ez[i * nz..(i + 1) * nz];
            let c_row = &cez[i * nz..(i + 1) * nz];
            let hp1 = &hp[i * nz..(i + 1) * nz];
            let hp0 = &hp[(i - 1) * nz..i * nz];
            let hr_row = &hr[i * nz..(i + 1) * nz];
            for j in 0..nz {
                ez_row[j] += (hp1[j] * a1 - hp0[j] * a0 + hr_row[j] * mr) * c_row[j];
            }
        }
        // on-axis E_z from the flux of H_φ through a disk of radius Δr/2
        if self.axis && self.m == 0.0 {
            for j in 0..nz {
                ez[j] += hp[j] * (4.0 * idr * cez[j]);
            }
        }

        for p in &self.zpml.integer {
            let j = p.index;
            if j == 0 || j == nz {
                continue;
            }
            for i in 0..nr {
                let d = (hp[i * nz + j] - hp[i * nz + j - 1]) * idz;
                let k = i * nz1 + j;
                let psi = self.psi_er_z[k] * p.b + d * p.a;
                self.psi_er_z[k] = psi;
                er[k] -= psi * cer[k];
            }
            for i in 1..nr {
                let d = (hr[i * nz + j] - hr[i * nz + j - 1]) * idz;
                let k = i * nz1 + j;
                let psi = self.psi_ep_z[k] * p.b + d * p.a;
                self.psi_ep_z[k] = psi;
                ep[k] += psi * cep[k];
            }
        }
        let m = self.m;
        for (p, &bm) in self.rpml.integer.iter().zip(&self.metric_int) {
            let i = p.index;
            if i == 0 || i == nr {
                continue;
            }
            for j in 1..nz {
                let d = (hz[i * nz1 + j] - hz[(i - 1) * nz1 + j]) * idr;
                let k = i * nz1 + j;
                let psi = self.psi_ep_r[k] * p.b + d * p.a;
                self.psi_ep_r[k] = psi;
                ep[k] -= psi * cep[k];
            }
            let inv_r = 1.0 / r_int[i];
            for j in 0..nz {
                let d = (hp[i * nz + j] - hp[(i - 1) * nz + j]) * idr;
                let k = i * nz + j;
                let psi = self.psi_ez_r[k] * p.b + d * p.a;
                self.psi_ez_r[k] = psi;
                let x = (hp[i * nz + j] + hp[(i - 1) * nz + j]) * 0.5 + hr[k] * m;
                let y = self.y_ez[k] * bm + x * (1.0 - bm);
                self.y_ez[k] = y;
                ez[k] += (psi - y * inv_r) * cez[k];
            }
        }
        if m != 0.0 {
            for (p, &bm) in self.rpml.half.iter().zip(&self.metric_half) {
                let i = p.index;
                let inv_r = 1.0 / r_half[i];
                for j in 1..nz {
                    let k = i * nz1 + j;
                    let y = self.y_er[k] * bm + hz[k] * (m * (1.0 - bm));
                    self.y_er[k] = y;
                    er[k] += y * (inv_r * cer[k]);
                }
            }
        }

        let g = self.source.waveform(t_half);
        if g != 0.0 {
            let (component, k) = self.source_at;
            let amp = self.source_amp * g;
            match component {
                Component::Er => er[k] -= amp * cer[k],
                Component::Ephi => ep[k] -= amp * cep[k],
                Component::Ez => ez[k] -= amp * cez[k],
                _ => unreachable!("validated at construction"),
            }
        }
    }

    /// Value of `component` at the lattice point nearest (r, z).
    pub fn sample(&self, component: Component, r: f64, z: f64) -> Option<T> {
        let (i, j) = self.locate(component, r, z)?;
        Some(self.field(component)[self.flat(component, i, j)])
    }
}
