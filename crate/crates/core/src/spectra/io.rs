use std::path::Path;

use super::{SpectraError, Spectrum};

/// Two-column CSV (`lambda_nm,intensity`) with a header row.
pub fn write_spectrum_csv(spectrum: &Spectrum, path: &Path) -> Result<(), SpectraError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lambda_nm", "intensity"])?;
    for (l, y) in spectrum.wavelength.iter().zip(&spectrum.intensity) {
        w.write_record([format!("{l:.6}"), format!("{y:.9e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a two-column CSV; a non-numeric first row is treated as a header.
pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum, SpectraError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_path(path)?;
    let (mut wl, mut y) = (Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(SpectraError::Malformed);
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                wl.push(a);
                y.push(b);
            }
            _ if row == 0 => continue,
            _ => return Err(SpectraError::Malformed),
        }
    }
    let mut s = Spectrum::new(wl, y)?;
    s.metadata = path.display().to_string();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = Spectrum::new(vec![636.0, 636.012, 636.024], vec![1.0, 2.5, 0.25]).unwrap();
        write_spectrum_csv(&s, &path).unwrap();
        let back = read_spectrum_csv(&path).unwrap();
        assert_eq!(back.wavelength, s.wavelength);
        assert_eq!(back.intensity, s.intensity);
    }

    #[test]
    fn unsorted_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "636.1,1\n636.0,2\n").unwrap();
        assert!(matches!(read_spectrum_csv(&path), Err(SpectraError::Malformed)));
    }
}
