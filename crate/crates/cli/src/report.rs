//! Plot-ready CSV bundle from earlier simulate and sweep runs.

use serde::Serialize;
use wgmsim::analysis::q_budget;
use wgmsim::cqed::cqed_params;

use crate::config::{Job, JobKind};
use crate::jobs::{fsr_rows, CqedRow};
use crate::manifest::{csv_bytes, read_jsonl, Manifest, OutDir};
use crate::records::ModeRecord;
use crate::CliError;

pub const MODES: &str = "modes.jsonl";

/// Plot order of the families; anything else follows alphabetically.
const FAMILY_ORDER: [&str; 4] = ["TE0", "TM0", "TE1", "TM1"];

fn family_rank(f: &str) -> (usize, String) {
    (FAMILY_ORDER.iter().position(|&x| x == f).unwrap_or(FAMILY_ORDER.len()), f.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct QRow {
    etch_depth_um: f64,
    family: String,
    m: u32,
    lambda_nm: f64,
    q_rad: f64,
    q_i: f64,
    q_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct CutoffRow {
    etch_depth_um: f64,
    family: String,
    /// Wavelength where Q_rad falls to Q_i, so Q_total = Q_i/2.
    cutoff_nm: Option<f64>,
    /// `inside`, or which side of the simulated range the cutoff lies on.
    bracket: &'static str,
}

/// Radiation cutoff per (etch depth, family), log-interpolated in Q_rad.
/// Expects rows grouped and sorted by wavelength.
fn cutoffs(rows: &[QRow]) -> Vec<CutoffRow> {
    let mut out = Vec::new();
    for group in rows.chunk_by(|a, b| a.etch_depth_um == b.etch_depth_um && a.family == b.family) {
        let first = &group[0];
        let above = |r: &QRow| r.q_rad > r.q_i;
        let crossing = group.windows(2).find(|w| above(&w[0]) != above(&w[1]));
        let (cutoff_nm, bracket) = match crossing {
            Some(w) => {
                let (y0, y1, t) = (w[0].q_rad.ln(), w[1].q_rad.ln(), first.q_i.ln());
                (Some(w[0].lambda_nm + (t - y0) / (y1 - y0) * (w[1].lambda_nm - w[0].lambda_nm)), "inside")
            }
            None if group.iter().all(above) => (None, "above_range"),
            None => (None, "below_range"),
        };
        out.push(CutoffRow { etch_depth_um: first.etch_depth_um, family: first.family.clone(), cutoff_nm, bracket });
    }
    out
}

pub fn report(job: &Job, out: &mut OutDir, manifest: Manifest) -> Result<Manifest, CliError> {
    let cfg = job.spec.report.as_ref().expect("validated");
    let mut records: Vec<ModeRecord> = Vec::new();
    for dir in &cfg.inputs {
        let upstream = Manifest::read(dir)?;
        if !matches!(upstream.kind, JobKind::Simulate | JobKind::Sweep) {
            return Err(CliError::MissingResults(format!("{}: a {} run holds no mode results", dir.display(), upstream.kind.name())));
        }
        records.extend(read_jsonl::<ModeRecord>(&dir.join(MODES))?);
    }
    if records.is_empty() {
        return Err(CliError::MissingResults("the input runs contain no successful mode results".into()));
    }
    records.sort_by(|a, b| {
        a.etch_depth_um
            .total_cmp(&b.etch_depth_um)
            .then_with(|| family_rank(&a.family).cmp(&family_rank(&b.family)))
            .then(a.m.cmp(&b.m))
            .then(a.v_bar.is_none().cmp(&b.v_bar.is_none()))
    });
    // the same mode from several runs: keep one, preferring a profiled result
    records.dedup_by(|later, kept| later.key == kept.key);

    let mut fsr = fsr_rows(&records);
    fsr.sort_by(|a, b| {
        family_rank(&a.family)
            .cmp(&family_rank(&b.family))
            .then(a.etch_depth_um.total_cmp(&b.etch_depth_um))
            .then(a.lambda_mid_nm.total_cmp(&b.lambda_mid_nm))
    });
    out.write("fsr_by_family.csv", &csv_bytes(&fsr)?)?;

    let mut q_rows = records
        .iter()
        .map(|r| {
            Ok(QRow {
                etch_depth_um: r.etch_depth_um,
                family: r.family.clone(),
                m: r.m,
                lambda_nm: r.lambda_nm,
                q_rad: r.q_rad,
                q_i: cfg.q_i,
                q_total: q_budget(r.q_rad, cfg.q_i).map_err(|e| CliError::MissingResults(format!("{}: {e}", r.key)))?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    q_rows.sort_by(|a, b| {
        a.etch_depth_um.total_cmp(&b.etch_depth_um).then_with(|| family_rank(&a.family).cmp(&family_rank(&b.family))).then(a.lambda_nm.total_cmp(&b.lambda_nm))
    });
    out.write("q_vs_lambda.csv", &csv_bytes(&q_rows)?)?;
    out.write("cutoff.csv", &csv_bytes(&cutoffs(&q_rows))?)?;
    out.write("mode_table.csv", &csv_bytes(&records)?)?;

    let cqed: Vec<CqedRow> = records
        .iter()
        .filter(|r| r.v_bar.is_some() && r.eta.is_some())
        .filter_map(|r| {
            let mode = wgmsim::ResonantMode { q_i: Some(cfg.q_i), ..r.mode() };
            let p = cqed_params(&mode, &cfg.emitter, cfg.n_emit, cfg.n_max_loc).ok()?;
            Some(CqedRow {
                name: r.key.clone(),
                lambda_um: mode.lambda,
                q_total: mode.q_total(),
                v_bar: mode.v_reported(),
                eta: mode.eta_reported(),
                f_zpl: p.f_zpl,
                kappa_ghz: p.kappa,
                g_ghz: p.g_zpl,
                beta: p.beta,
            })
        })
        .collect();
    out.write("cqed_summary.csv", &csv_bytes(&cqed)?)?;
    Ok(manifest)
}
