//! File formats: CSV tables, JSON documents, SVG plots and markdown reports.
//! Numbers are written with fixed formatting so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use liouville_core::dynamics::HistoryPoint;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::harness::{envelope_weight, EnvelopeReport, RunOutcome, RunRecord, RunStatus};

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(LabError::io(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    fs::write(path, text).map_err(LabError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Writes a CSV with a header row; every cell is preformatted.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(LabError::io(path))?;
    Ok(())
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".to_string(), num)
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Blowup => "blowup",
        RunStatus::Global => "global",
        RunStatus::LeftCone => "left-cone",
        RunStatus::Failed => "failed",
    }
}

pub fn write_history(path: &Path, history: &[HistoryPoint]) -> Result<()> {
    let rows: Vec<Vec<String>> = history.iter().map(|h| vec![num(h.t), num(h.sup_norm), num(h.dt)]).collect();
    write_csv(path, &["t", "sup_norm", "dt"], &rows)
}

pub fn read_history(path: &Path) -> Result<Vec<HistoryPoint>> {
    if !path.exists() {
        return Err(LabError::MissingTrace(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| LabError::Numerical(format!("{}: malformed row", path.display())))
        };
        out.push(HistoryPoint { t: field(0)?, sup_norm: field(1)?, dt: field(2)? });
    }
    Ok(out)
}

fn summary_rows(runs: &[RunRecord]) -> Vec<Vec<String>> {
    runs.iter()
        .map(|r| {
            vec![
                r.id.clone(),
                r.seed.to_string(),
                status_name(r.status).to_string(),
                opt(r.t_blowup),
                r.beta_fit.map_or_else(String::new, num),
                r.samples.to_string(),
                num(r.final_time),
                num(r.final_sup),
                r.note.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

pub const SUMMARY_HEADER: [&str; 9] =
    ["id", "seed", "status", "t_blowup", "beta_fit", "samples", "final_time", "final_sup", "note"];

/// `runs/<id>/trace.csv`, `summary.csv`, `envelope.json`, `envelope.svg`, `report.md`.
pub fn write_campaign(dir: &Path, report: &EnvelopeReport, outcomes: &[RunOutcome]) -> Result<()> {
    create_dir(dir)?;
    for o in outcomes {
        write_history(&trace_path(dir, &o.record.id), &o.history)?;
    }
    write_json(&dir.join("envelope.json"), report)?;
    render_report(dir, report, outcomes)
}

pub fn trace_path(dir: &Path, id: &str) -> PathBuf {
    dir.join("runs").join(id).join("trace.csv")
}

/// Rewrites `summary.csv`, `envelope.svg` and `report.md` from the data in
/// memory.
pub fn render_report(dir: &Path, report: &EnvelopeReport, outcomes: &[RunOutcome]) -> Result<()> {
    write_csv(&dir.join("summary.csv"), &SUMMARY_HEADER, &summary_rows(&report.runs))?;
    write_text(&dir.join("envelope.svg"), &envelope_svg(report, outcomes))?;
    write_text(&dir.join("report.md"), &report_markdown(report))
}

/// Reloads a campaign directory (`envelope.json` plus every trace) and
/// regenerates the report files.
pub fn regenerate(dir: &Path) -> Result<EnvelopeReport> {
    let path = dir.join("envelope.json");
    let text = fs::read_to_string(&path).map_err(LabError::io(&path))?;
    let report: EnvelopeReport = serde_json::from_str(&text)?;
    let outcomes = report
        .runs
        .iter()
        .map(|r| Ok(RunOutcome { record: r.clone(), history: read_history(&trace_path(dir, &r.id))? }))
        .collect::<Result<Vec<_>>>()?;
    render_report(dir, &report, &outcomes)?;
    Ok(report)
}

pub fn report_markdown(report: &EnvelopeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Envelope campaign\n");
    let _ = writeln!(s, "Bound: `sup|U(t)| <= C~ + C (t^-b + (T - t)^-b)` with b = {:.6}.\n", report.beta);
    let _ = writeln!(s, "| quantity | value |\n|---|---|");
    let _ = writeln!(s, "| C~ | {} |", num(report.c_tilde));
    let _ = writeln!(s, "| C | {} |", num(report.c));
    let _ = writeln!(s, "| C~ forced to 0 | {} |", report.c_tilde_forced);
    let _ = writeln!(s, "| samples | {} |", report.samples);
    let _ = writeln!(s, "| violations | {} |", report.violations);
    let _ = writeln!(s, "\n## Runs\n");
    let _ = writeln!(s, "| id | seed | status | T | fitted rate |\n|---|---|---|---|---|");
    for r in &report.runs {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            r.id,
            r.seed,
            status_name(r.status),
            opt(r.t_blowup),
            r.beta_fit.map_or_else(|| "-".to_string(), |b| format!("{b:.4}"))
        );
    }
    let failed: Vec<&RunRecord> = report.failures().collect();
    let _ = writeln!(s, "\n## Failures\n");
    if failed.is_empty() {
        let _ = writeln!(s, "none");
    }
    for r in failed {
        let _ = writeln!(s, "- {}: {}", r.id, r.note.as_deref().unwrap_or(""));
    }
    let excluded: Vec<&RunRecord> = report.excluded().collect();
    let _ = writeln!(s, "\n## Excluded (left the cone)\n");
    if excluded.is_empty() {
        let _ = writeln!(s, "none");
    }
    for r in excluded {
        let _ = writeln!(s, "- {}", r.id);
    }
    s
}

/// `log10 sup|U|` against `t/T` for every usable run, with each run's envelope dashed.
pub fn envelope_svg(report: &EnvelopeReport, outcomes: &[RunOutcome]) -> String {
    let (w, h, pad) = (640.0, 420.0, 40.0);
    let mut lines = Vec::new();
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for o in outcomes {
        if !matches!(o.record.status, RunStatus::Blowup | RunStatus::Global) || o.history.is_empty() {
            continue;
        }
        let horizon = o.record.t_blowup.unwrap_or(o.history.last().map_or(1.0, |p| p.t));
        let mut data = Vec::new();
        let mut env = Vec::new();
        for p in o.history.iter().filter(|p| p.t > 0.0 && p.t < horizon && p.sup_norm > 0.0) {
            let x = p.t / horizon;
            let y = p.sup_norm.log10();
            let e = (report.c_tilde + report.c * envelope_weight(p.t, o.record.t_blowup, report.beta)).log10();
            ymin = ymin.min(y);
            ymax = ymax.max(y).max(e.min(y + 2.0));
            data.push((x, y));
            env.push((x, e));
        }
        lines.push((data, env));
    }
    if !ymin.is_finite() {
        ymin = 0.0;
        ymax = 1.0;
    }
    if ymax - ymin < 1e-9 {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| pad + x * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y.clamp(ymin, ymax) - ymin) / (ymax - ymin) * (h - 2.0 * pad);
    let path = |pts: &[(f64, f64)]| {
        pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect::<Vec<_>>().join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{pad},{pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">t / T</text>"#, w / 2.0, h - 10.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="12">log10 sup|U|  [{ymin:.2}, {ymax:.2}]</text>"#, pad - 12.0);
    for (data, env) in &lines {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1"/>"#, path(data));
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-width="0.6" stroke-dasharray="3 2"/>"#,
            path(env)
        );
    }
    s.push_str("</svg>\n");
    s
}
