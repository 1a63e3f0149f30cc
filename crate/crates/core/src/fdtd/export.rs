//! Profile and time-series file formats.
//!
//! Binary profile layout (little endian):
//! `WGMPROF1`, u32 nr, u32 nz, u32 m, u32 pml_cells, f64 dr, dz, r0, z0, λ,
//! then E_r, E_φ, E_z as (re, im) f64 pairs in row-major (r outer) order,
//! then one material byte per cell.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{ModeProfile, Normalization, TimeSeries};
use crate::device::MaterialKind;
use crate::units::FS_PER_TIME_UNIT;

const MAGIC: &[u8; 8] = b"WGMPROF1";

fn material_code(kind: MaterialKind) -> u8 {
    match kind {
        MaterialKind::GuidingLayer => 0,
        MaterialKind::Diamond => 1,
        MaterialKind::Vacuum => 2,
    }
}

pub fn write_profile_binary(path: &Path, profile: &ModeProfile) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    for v in [profile.nr as u32, profile.nz as u32, profile.m, profile.pml_cells as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [profile.dr, profile.dz, profile.r0, profile.z0, profile.lambda] {
        w.write_all(&v.to_le_bytes())?;
    }
    for field in [&profile.er, &profile.ephi, &profile.ez] {
        for c in field {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    let codes: Vec<u8> = profile.material.iter().map(|&k| material_code(k)).collect();
    w.write_all(&codes)?;
    w.flush()
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn read_profile_binary(path: &Path) -> io::Result<ModeProfile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a mode profile file"));
    }
    let mut u = [0u32; 4];
    for v in &mut u {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *v = u32::from_le_bytes(b);
    }
    let mut f = [0f64; 5];
    let read_f64 = |r: &mut BufReader<File>| -> io::Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    for v in &mut f {
        *v = read_f64(&mut r)?;
    }
    let (nr, nz) = (u[0] as usize, u[1] as usize);
    let cells = nr.checked_mul(nz).ok_or_else(|| bad("dimensions overflow"))?;
    let mut fields = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut field = Vec::with_capacity(cells);
        for _ in 0..cells {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            field.push(Complex64::new(re, im));
        }
        fields.push(field);
    }
    let mut codes = vec![0u8; cells];
    r.read_exact(&mut codes)?;
    let material = codes
        .into_iter()
        .map(|c| match c {
            0 => Ok(MaterialKind::GuidingLayer),
            1 => Ok(MaterialKind::Diamond),
            2 => Ok(MaterialKind::Vacuum),
            _ => Err(bad("unknown material code")),
        })
        .collect::<io::Result<Vec<_>>>()?;
    let ez = fields.pop().unwrap();
    let ephi = fields.pop().unwrap();
    let er = fields.pop().unwrap();
    Ok(ModeProfile {
        lambda: f[4],
        m: u[2],
        nr,
        nz,
        dr: f[0],
        dz: f[1],
        r0: f[2],
        z0: f[3],
        er,
        ephi,
        ez,
        material,
        pml_cells: u[3] as usize,
        normalization: Normalization::TravelingWave,
        dft_peak: 0.0,
    })
}

/// One row per cell: r, z, material and the real/imaginary parts of each component.
pub fn write_profile_csv(path: &Path, profile: &ModeProfile) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r_um", "z_um", "material", "er_re", "er_im", "ephi_re", "ephi_im", "ez_re", "ez_im"])?;
    for i in 0..profile.nr {
        for j in 0..profile.nz {
            let k = profile.idx(i, j);
            let mat = match profile.material[k] {
                MaterialKind::GuidingLayer => "guiding-layer",
                MaterialKind::Diamond => "diamond",
                MaterialKind::Vacuum => "vacuum",
            };
            let row = [
                profile.r_center(i).to_string(),
                profile.z_center(j).to_string(),
                mat.to_string(),
                profile.er[k].re.to_string(),
                profile.er[k].im.to_string(),
                profile.ephi[k].re.to_string(),
                profile.ephi[k].im.to_string(),
                profile.ez[k].re.to_string(),
                profile.ez[k].im.to_string(),
            ];
            w.write_record(&row)?;
        }
    }
    w.flush()
}

/// Columns `t_fs, re, im`.
pub fn write_time_series_csv(path: &Path, series: &TimeSeries) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_fs", "re", "im"])?;
    for (k, s) in series.samples.iter().enumerate() {
        let t = series.time(k) * FS_PER_TIME_UNIT;
        w.write_record([t.to_string(), s.re.to_string(), s.im.to_string()])?;
    }
    w.flush()
}
