//! Acceptance criteria 1–10.
//!
//! Runs without the libtest harness so that every criterion is evaluated and
//! reported in order, one PASS/FAIL line each, before the exit status is set.
//! Positional arguments select criteria by number (`-- 4 9`).

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use wgmsim::analysis::{estimate_q_roughness, harmonic_inversion, Polarization, RoughnessSpec};
use wgmsim::cqed::{beta, coupling_g, kappa, purcell_factor, EmitterModel};
use wgmsim::device::{DeviceGeometry, GridSpec, MaterialSet};
use wgmsim::fdtd::{run_ringdown, Component, PmlSpec, Probe, SimConfig, SourceSpec};
use wgmsim::oracle::{family_resonances, fundamental_neff, pec_cylinder_modes, CavityModeType};
use wgmsim::pipeline::{find_mode, ModeResult, ModeSearch};
use wgmsim::spectra::{
    assign_families, detect_peaks, fit_resonance, synthesize_lines, BackgroundSpec, FamilyDispersion, FamilyOptions, FitOptions,
    InstrumentResponse, NoiseSpec, PeakSearch, SpectralLine, SynthesisSpec,
};
use wgmsim::units::thz_to_wavelength;
use wgmsim::{IndexMap, MaterialKind};

const N_GAP: f64 = 3.25;
const N_DIAMOND: f64 = 2.42;
const GRID: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn simulate(d: f64, t: f64, h: f64, m: u32, pol: Polarization, profile: bool) -> ModeResult {
    let geometry = DeviceGeometry::new(d, t, h).unwrap();
    let mut search = ModeSearch::new(m, pol);
    search.standing_wave = true;
    if !profile {
        search.profile_steps = 0;
    }
    find_mode(&geometry, &MaterialSet::default(), &GridSpec::uniform(GRID), &search).unwrap()
}

fn te0_56() -> &'static ModeResult {
    static CELL: OnceLock<ModeResult> = OnceLock::new();
    CELL.get_or_init(|| simulate(4.5, 0.13, 0.6, 56, Polarization::TE, true))
}

fn criterion_1() -> Outcome {
    let k = kappa(0.637, 9000.0).unwrap();
    outcome(within(k, 26.0, 0.01) && (k - 26.1).abs() < 0.05, format!("κ = {k:.3} GHz"))
}

fn criterion_2() -> Outcome {
    let low = purcell_factor(9000.0, 18.0, 0.57, N_DIAMOND, N_GAP).unwrap();
    let high = purcell_factor(2.5e4, 18.0, 0.57, N_DIAMOND, N_GAP).unwrap();
    let ratio = high / low;
    let exact = (ratio - 25.0 / 9.0).abs() <= 4.0 * f64::EPSILON * ratio;
    let pass = (15.0..=19.0).contains(&low) && (43.0..=51.0).contains(&high) && exact;
    outcome(pass, format!("F = {low:.2} at Q = 9000, {high:.2} at Q = 2.5e4, ratio − 25/9 = {:.1e}", ratio - 25.0 / 9.0))
}

fn criterion_3() -> Outcome {
    let b = beta(16.6, &EmitterModel::nv_minus()).unwrap();
    let g = coupling_g(16.6, 26.1, 0.0004).unwrap();
    outcome((0.32..=0.37).contains(&b) && (0.27..=0.33).contains(&g), format!("β = {b:.3}, g = {g:.4} GHz"))
}

fn criterion_4() -> Outcome {
    let te = &te0_56().mode;
    let tm = &simulate(6.5, 0.25, 0.6, 89, Polarization::TM, true).mode;
    let ok = |v: f64, eta: f64, target: (f64, f64)| within(v, target.0, 0.2) && within(eta, target.1, 0.2);
    let pass = ok(te.v_reported(), te.eta_reported(), (18.0, 0.57)) && ok(tm.v_reported(), tm.eta_reported(), (43.0, 0.48));
    outcome(
        pass,
        format!(
            "TE0^56 λ = {:.1} nm V̄ = {:.2} η = {:.3}; TM0^89 λ = {:.1} nm V̄ = {:.2} η = {:.3}",
            te.lambda * 1e3,
            te.v_reported(),
            te.eta_reported(),
            tm.lambda * 1e3,
            tm.v_reported(),
            tm.eta_reported()
        ),
    )
}

fn criterion_5() -> Outcome {
    let geometry = DeviceGeometry::new(6.5, 0.25, 0.6).unwrap();
    let materials = MaterialSet::default();
    let lambda = 0.637;
    let curved: Vec<(u32, f64)> =
        (60..=120).filter_map(|m| family_resonances(&geometry, &materials, Polarization::TM, 0, m..=m, (0.55, 0.75)).ok()).flatten().collect();
    let &(m, at) = curved.iter().min_by(|a, b| (a.1 - lambda).abs().total_cmp(&(b.1 - lambda).abs())).unwrap();
    let n_eff = fundamental_neff(&geometry, &materials, Polarization::TM, lambda);
    let simple = 2.0 * std::f64::consts::PI * geometry.radius() * n_eff / lambda;
    outcome(
        m.abs_diff(83) <= 1,
        format!("curvature-corrected m = {m} (λ = {:.1} nm); 2πR·n_eff/λ = {simple:.1} with n_eff = {n_eff:.3}; expected 83 ± 1", at * 1e3),
    )
}

/// Q at `lambda` by log-linear interpolation between the two closest bracketing modes.
fn q_at(points: &[(f64, f64)], lambda: f64) -> Option<f64> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let i = p.iter().position(|q| q.0 >= lambda).filter(|&i| i > 0)?;
    let (a, b) = (p[i - 1], p[i]);
    let t = (lambda - a.0) / (b.0 - a.0);
    Some((a.1.ln() + t * (b.1.ln() - a.1.ln())).exp())
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn criterion_6() -> Outcome {
    let unetched: Vec<(f64, f64)> = (46..=60)
        .step_by(2)
        .map(|m| {
            let r = simulate(4.5, 0.13, 0.0, m, Polarization::TE, false);
            (r.mode.lambda, r.mode.q_rad)
        })
        .collect();
    let etched: Vec<(f64, f64)> = [50, 51]
        .iter()
        .map(|&m| {
            let r = simulate(4.5, 0.13, 0.6, m, Polarization::TE, false);
            (r.mode.lambda, r.mode.q_rad)
        })
        .collect();
    let cutoff: Vec<_> = unetched.iter().filter(|p| p.0 >= 0.62).collect();
    let x: Vec<f64> = cutoff.iter().map(|p| p.0).collect();
    let y: Vec<f64> = cutoff.iter().map(|p| p.1.ln()).collect();
    let r2 = r_squared(&x, &y);
    let (before, after) = (q_at(&unetched, 0.70), q_at(&etched, 0.70));
    let ratio = match (before, after) {
        (Some(a), Some(b)) => b / a,
        _ => f64::NAN,
    };
    let fmt = |v: &[(f64, f64)]| v.iter().map(|(l, q)| format!("{:.1}:{q:.3e}", l * 1e3)).collect::<Vec<_>>().join(" ");
    outcome(
        r2 > 0.95 && ratio >= 10.0,
        format!(
            "R² = {r2:.4} over {} modes, Q(700 nm) h=0 {:.3e}, h=0.6 {:.3e}, ratio {ratio:.3e}; h=0 [{}] h=0.6 [{}]",
            x.len(),
            before.unwrap_or(f64::NAN),
            after.unwrap_or(f64::NAN),
            fmt(&unetched),
            fmt(&etched)
        ),
    )
}

/// Closed vacuum cylinder of radius 1 μm and length 0.5 μm; Ez source off axis.
fn tm010(cells: usize) -> f64 {
    let h = 1.0 / cells as f64;
    let map = Arc::new(IndexMap::uniform(cells, cells / 2, h, h, 0.0, 0.0, MaterialKind::Vacuum, 1.0));
    let mut cfg = SimConfig::new(0, map, SourceSpec::new(0.3, 0.25, Component::Ez, 115.0, 30.0));
    cfg.pml = PmlSpec::closed();
    cfg.probes.push(Probe { r: 0.2, z: 0.13, component: Component::Ez });
    cfg.total_steps = (cfg.source.turn_off_time() / cfg.dt()).ceil() as usize + 4096;
    let series = run_ringdown(&cfg).unwrap();
    let comps = harmonic_inversion(&series[0], (80.0, 150.0)).unwrap();
    comps.iter().filter(|c| c.is_reliable()).max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm())).unwrap().frequency
}

fn criterion_7() -> Outcome {
    let exact = pec_cylinder_modes(1.0, 0.5, (0, 1, 0), CavityModeType::TM).unwrap();
    let cells_per_lambda = thz_to_wavelength(exact) * 8.0;
    let f: Vec<f64> = [8, 16, 32].iter().map(|&c| tm010(c)).collect();
    let err: Vec<f64> = f.iter().map(|v| (v - exact).abs() / exact).collect();
    let orders: Vec<f64> = err.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    outcome(
        err[0] < 0.01 && orders.iter().all(|&p| p >= 1.7),
        format!(
            "exact {exact:.3} THz, relative errors at a/8 ({cells_per_lambda:.1} cells/λ), a/16, a/32: {:.2e} {:.2e} {:.2e}, orders {orders:.2?}",
            err[0], err[1], err[2]
        ),
    )
}

fn criterion_8() -> Outcome {
    let response = InstrumentResponse::covering(635.0, 639.0);
    let spec = SynthesisSpec { offset: 0.05, noise: Some(NoiseSpec { gain: 0.0, read_sigma: 0.02 }), ..Default::default() };
    let opts = FitOptions::default();
    let (mut limited, mut min_bound) = (0, f64::INFINITY);
    let mut worst = 0.0f64;
    let mut q4 = Vec::new();
    for seed in 0..100 {
        let sharp = SpectralLine::with_height(637.0, 637.0 / 1e5, 1.0, &response);
        let s = synthesize_lines(&[sharp], &spec, &response, seed).unwrap();
        let fit = fit_resonance(&s, (636.6, 637.4), &response, &opts).unwrap();
        limited += fit.resolution_limited as usize;
        min_bound = min_bound.min(fit.q_lower_bound);

        let broad = SpectralLine::with_height(637.0, 637.0 / 1e4, 1.0, &response);
        let s = synthesize_lines(&[broad], &spec, &response, 10_000 + seed).unwrap();
        let fit = fit_resonance(&s, (636.6, 637.4), &response, &opts).unwrap();
        worst = worst.max((fit.q / 1e4 - 1.0).abs());
        q4.push(fit.q);
    }
    let mean = q4.iter().sum::<f64>() / q4.len() as f64;
    outcome(
        limited == 100 && min_bound >= 2.5e4 && worst <= 0.1,
        format!("Q = 1e5: {limited}/100 resolution-limited, smallest bound {min_bound:.3e}; Q = 1e4: mean {mean:.4e}, worst deviation {:.1}%", worst * 100.0),
    )
}

fn criterion_9() -> Outcome {
    let r = te0_56();
    let geometry = DeviceGeometry::new(4.5, 0.13, 0.6).unwrap();
    let q = |sigma: f64| estimate_q_roughness(&RoughnessSpec { sigma_nm: sigma, correlation_nm: 80.0 }, &r.mode, &geometry).unwrap();
    let anchor = q(3.0);
    let factor = anchor / 1.7e4;
    let scaling = [1.0, 1.5, 6.0].iter().map(|&s| q(s) * s * s / (anchor * 9.0) - 1.0).fold(0.0f64, |a, d| a.max(d.abs()));
    outcome(
        (0.5..=2.0).contains(&factor) && scaling < 1e-12,
        format!("Q_ss(3 nm, 80 nm) = {anchor:.3e} ({factor:.2}× anchor), σ⁻² scaling deviation {scaling:.1e}"),
    )
}

struct Family {
    name: &'static str,
    lines: Vec<f64>,
    dispersion: FamilyDispersion,
}

/// The four highest-Q families of the thick device from the effective-index oracle (nm).
fn oracle_families(window: (f64, f64)) -> Vec<Family> {
    let geometry = DeviceGeometry::new(6.5, 0.25, 0.6).unwrap();
    let materials = MaterialSet::default();
    [("TE0", Polarization::TE, 0), ("TM0", Polarization::TM, 0), ("TE1", Polarization::TE, 1), ("TM1", Polarization::TM, 1)]
        .into_iter()
        .map(|(name, pol, p)| {
            let all: Vec<f64> = (40..=140)
                .filter_map(|m| family_resonances(&geometry, &materials, pol, p, m..=m, (0.55, 0.75)).ok())
                .flatten()
                .map(|(_, l)| l * 1e3)
                .collect();
            let mut sorted = all.clone();
            sorted.sort_by(f64::total_cmp);
            let points = sorted.windows(2).map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0])).collect();
            let lines = sorted.into_iter().filter(|l| (window.0..=window.1).contains(l)).collect();
            Family { name, lines, dispersion: FamilyDispersion { name: name.into(), radial_order: p, points } }
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let window = (625.0, 675.0);
    let families = oracle_families(window);
    let tables: Vec<FamilyDispersion> = families.iter().map(|f| f.dispersion.clone()).collect();
    let response = InstrumentResponse::covering(window.0 - 2.0, window.1 + 2.0);
    let spec = SynthesisSpec {
        background: Some(BackgroundSpec { zpl_height: 0.3, ..BackgroundSpec::default() }),
        noise: Some(NoiseSpec { gain: 0.0, read_sigma: 0.02 }),
        ..Default::default()
    };
    // (Q, height) per family; higher radial orders are lossier and dimmer
    let style = [(1.2e4, 1.0), (1.0e4, 0.9), (6.0e3, 0.7), (5.0e3, 0.6)];
    let lines: Vec<(usize, SpectralLine)> = families
        .iter()
        .enumerate()
        .flat_map(|(k, f)| f.lines.iter().map(move |&c| (k, SpectralLine::with_height(c, c / style[k].0, style[k].1, &response))))
        .collect();
    let plain: Vec<SpectralLine> = lines.iter().map(|l| l.1).collect();

    let (mut correct, mut total) = (0usize, 0usize);
    let mut worst = 1.0f64;
    for seed in 0..100 {
        let s = synthesize_lines(&plain, &spec, &response, seed).unwrap();
        let peaks: Vec<f64> = detect_peaks(&s, &PeakSearch::default()).iter().map(|p| p.center).collect();
        let labels = assign_families(&peaks, &tables, &FamilyOptions::default());
        let mut hit = 0;
        for (k, line) in &lines {
            let nearest = labels.iter().min_by(|a, b| (a.lambda - line.center).abs().total_cmp(&(b.lambda - line.center).abs()));
            if nearest.is_some_and(|a| (a.lambda - line.center).abs() < 0.05 && a.family.as_deref() == Some(families[*k].name)) {
                hit += 1;
            }
        }
        correct += hit;
        total += lines.len();
        worst = worst.min(hit as f64 / lines.len() as f64);
    }
    let rate = correct as f64 / total as f64;
    let counts: Vec<String> = families.iter().map(|f| format!("{} {}", f.name, f.lines.len())).collect();
    outcome(rate >= 0.95, format!("{:.2}% correct over 100 seeds (worst seed {:.1}%), lines: {}", rate * 100.0, worst * 100.0, counts.join(", ")))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "cavity decay rate", criterion_1),
    (2, "Purcell chain", criterion_2),
    (3, "β and g", criterion_3),
    (4, "mode volume and overlap", criterion_4),
    (5, "azimuthal number anchor", criterion_5),
    (6, "etch-depth Q behaviour", criterion_6),
    (7, "PEC cavity convergence", criterion_7),
    (8, "resolution-limited fit", criterion_8),
    (9, "roughness anchor", criterion_9),
    (10, "family assignment", criterion_10),
];

fn main() {
    // panics are reported on the criterion line instead
    std::panic::set_hook(Box::new(|_| {}));
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut out = std::io::stdout();
    let mut failed = Vec::new();
    for (n, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {n:>2} {verdict}  {name}: {} [{:.1} s]", result.detail, start.elapsed().as_secs_f64()).unwrap();
        out.flush().unwrap();
        if !result.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        writeln!(out, "acceptance: failed criteria {failed:?}").unwrap();
        std::process::exit(1);
    }
    writeln!(out, "acceptance: all selected criteria pass").unwrap();
}
