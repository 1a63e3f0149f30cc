//! Whole-pipeline runs on real device geometries.

use std::sync::OnceLock;

use wgmsim::analysis::Polarization;
use wgmsim::device::{DeviceError, DeviceGeometry, DispersionTable, GridSpec, Interpolation, MaterialSet};
use wgmsim::oracle::analytic_fsr;
use wgmsim::pipeline::{find_mode, predict_wavelength, ModeResult, ModeSearch, PipelineError};

fn run(d: f64, t: f64, h: f64, m: u32, pol: Polarization, profile: bool, spacing: f64) -> ModeResult {
    let g = DeviceGeometry::new(d, t, h).unwrap();
    let mut s = ModeSearch::new(m, pol);
    if !profile {
        s.profile_steps = 0;
    }
    find_mode(&g, &MaterialSet::default(), &GridSpec::uniform(spacing), &s).unwrap()
}

fn te0_56() -> &'static ModeResult {
    static CELL: OnceLock<ModeResult> = OnceLock::new();
    CELL.get_or_init(|| run(4.5, 0.13, 0.6, 56, Polarization::TE, true, 0.01))
}

fn within(a: f64, b: f64, rel: f64) -> bool {
    (a / b - 1.0).abs() <= rel
}

#[test]
fn te0_56_rings_near_the_zpl() {
    let r = te0_56();
    assert!(within(r.mode.lambda, 0.637, 0.02), "λ = {}", r.mode.lambda);
    let c = r.classification.unwrap();
    assert_eq!((c.polarization, c.radial_order, c.hybrid), (Polarization::TE, 0, false));
    assert!(within(r.mode.lambda, r.oracle_lambda.unwrap(), 0.02), "oracle {:?}", r.oracle_lambda);
}

#[test]
fn fsr_matches_effective_index_estimate() {
    let a = te0_56();
    let b = run(4.5, 0.13, 0.6, 57, Polarization::TE, false, 0.01);
    let fdtd = (a.mode.lambda - b.mode.lambda) * 1e3;
    // group index implied by the oracle's own neighbouring resonances
    let (la, lb) = (a.oracle_lambda.unwrap(), b.oracle_lambda.unwrap());
    let mid = 0.5 * (la + lb);
    let radius = 2.25;
    let n_g = mid * mid / (2.0 * std::f64::consts::PI * radius * (la - lb));
    let analytic = analytic_fsr(0.5 * (a.mode.lambda + b.mode.lambda), radius, n_g).unwrap();
    assert!(within(fdtd, analytic, 0.05), "FDTD {fdtd} nm vs {analytic} nm");
}

#[test]
fn tm_modes_of_thick_device() {
    let tm = run(6.5, 0.25, 0.6, 89, Polarization::TM, true, 0.01);
    let c = tm.classification.unwrap();
    assert_eq!((c.polarization, c.radial_order, c.hybrid), (Polarization::TM, 0, false), "{c:?}");
    assert!(within(tm.mode.lambda, tm.oracle_lambda.unwrap(), 0.02));
    let p = tm.profile.as_ref().unwrap();
    let energy = |f: &[num_complex::Complex64]| f.iter().map(|v| v.norm_sqr()).sum::<f64>();
    assert!(energy(&p.ez) > 4.0 * energy(&p.er));

    // TM fields reach further into the diamond and are more tightly confined
    let te = run(6.5, 0.25, 0.6, 90, Polarization::TE, true, 0.01);
    assert!(within(te.mode.lambda, tm.mode.lambda, 0.01));
    assert!(tm.mode.eta > te.mode.eta, "η TM {} vs TE {}", tm.mode.eta, te.mode.eta);
    assert!(tm.mode.v_bar < te.mode.v_bar, "V TM {} vs TE {}", tm.mode.v_bar, te.mode.v_bar);
}

#[test]
fn etching_never_lowers_q() {
    let q: Vec<f64> = [0.0, 0.3, 0.6].iter().map(|&h| run(4.5, 0.13, h, 50, Polarization::TE, false, 0.01).mode.q_rad).collect();
    assert!(q.windows(2).all(|w| w[1] >= w[0]), "{q:?}");
}

#[test]
fn small_disk_grid_convergence() {
    let coarse = run(2.0, 0.25, 0.0, 24, Polarization::TE, false, 0.0125);
    let fine = run(2.0, 0.25, 0.0, 24, Polarization::TE, false, 0.00625);
    assert!(within(coarse.mode.lambda, fine.mode.lambda, 0.005));
    assert!(within(coarse.mode.q_rad, fine.mode.q_rad, 0.25));
}

#[test]
fn coarse_grid_is_refused_before_stepping() {
    let g = DeviceGeometry::new(2.0, 0.25, 0.0).unwrap();
    let s = ModeSearch::new(24, Polarization::TE);
    let err = find_mode(&g, &MaterialSet::default(), &GridSpec::uniform(0.025), &s).unwrap_err();
    assert!(matches!(err, PipelineError::Device(DeviceError::GridTooCoarse { .. })), "{err}");
}

#[test]
fn oracle_prediction_stays_inside_table_domain() {
    let g = DeviceGeometry::new(4.5, 0.25, 0.6).unwrap();
    let table = DispersionTable::new(vec![0.55, 0.65, 0.75, 0.85], vec![3.438, 3.286, 3.204, 3.156]).unwrap();
    let mut materials = MaterialSet::default();
    materials.guiding = materials.guiding.with_table(table, Interpolation::CubicSpline);
    let lambda = predict_wavelength(&g, &materials, &ModeSearch::new(60, Polarization::TE)).expect("root inside the table");
    assert!((0.55..0.85).contains(&lambda), "{lambda}");
}
