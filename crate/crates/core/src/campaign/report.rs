//! Markdown summary of an analyzed campaign.

use super::analyze::{AnalysisSummary, OutcomeKind, ANALYSIS_DIR};
use super::run::write_atomic;
use crate::analysis::nishimori::dual_temperature_error;
use crate::analysis::{dual_temperature, Method};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const REPORT_FILE: &str = "report.md";

fn fmt_outcome(o: &OutcomeKind) -> String {
    match o {
        OutcomeKind::Transition { estimate } => format!("{:.4} ± {:.4}", estimate.tc, estimate.error),
        OutcomeKind::NoTransition => "no transition".into(),
        OutcomeKind::Inconclusive { reason } => format!("inconclusive ({reason})"),
    }
}

pub fn render(summary: &AnalysisSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Campaign `{}`\n", summary.campaign);
    let _ = writeln!(s, "Model: {}\n", summary.model.name());
    let _ = writeln!(s, "## Samples\n");
    let _ = writeln!(s, "| p | L | samples | equilibrated |");
    let _ = writeln!(s, "|---|---|---|---|");
    for g in &summary.groups {
        let _ = writeln!(
            s,
            "| {:.4} | {} | {} | {:.0}% |",
            g.p,
            g.linear_size,
            g.samples,
            100.0 * g.equilibrated_fraction
        );
    }
    if summary.missing_records > 0 {
        let _ = writeln!(s, "\n{} planned records are missing.", summary.missing_records);
    }

    let _ = writeln!(s, "\n## Critical temperatures\n");
    let mut header = String::from("| p |");
    let mut rule = String::from("|---|");
    for m in &summary.methods {
        let _ = write!(header, " {} |", m.name());
        rule.push_str("---|");
    }
    let _ = writeln!(s, "{header}\n{rule}");
    let mut ps: Vec<f64> = summary.outcomes.iter().map(|o| o.p).collect();
    ps.dedup();
    for p in ps {
        let _ = write!(s, "| {p:.4} |");
        for &m in &summary.methods {
            let cell = summary.outcome(p, m).map(fmt_outcome).unwrap_or_default();
            let _ = write!(s, " {cell} |");
        }
        s.push('\n');
    }

    if matches!(summary.model, ModelKind::FourBodyVertex | ModelKind::SixBodyEdge) {
        let heat = summary.estimates(Method::HeatPeakFss);
        if let Some(e) = heat.iter().find(|e| e.p == 0.0) {
            if let (Ok(d), Ok(de)) = (dual_temperature(e.tc), dual_temperature_error(e.tc, e.error)) {
                let _ = writeln!(s, "\nDual of the clean heat-peak estimate: {d:.4} ± {de:.4}");
            }
        }
    }

    if let Some(scan) = &summary.fixed_temperature_scan {
        let _ = writeln!(s, "\n## Scan at T = {}\n", scan.temperature);
        let _ = writeln!(s, "| p | a |");
        let _ = writeln!(s, "|---|---|");
        for (p, a) in &scan.slopes {
            let _ = writeln!(s, "| {p:.4} | {:.4} ± {:.4} |", a.value, a.error);
        }
        match (&scan.bracket, &scan.crossing) {
            (Some((lo, hi)), Some(c)) => {
                let _ = writeln!(s, "\nThreshold bracket [{lo}, {hi}], crossing {:.4} ± {:.4}", c.value, c.error);
            }
            (Some((lo, hi)), None) => {
                let _ = writeln!(s, "\nThreshold bracket [{lo}, {hi}]");
            }
            _ => {
                let _ = writeln!(s, "\nNo value of p shows a significant area law (a > 2σ); the threshold is not bracketed.");
            }
        }
    }

    if let Some(d) = &summary.phase_diagram {
        if let Some((lo, hi)) = d.p_c_bracket {
            let _ = writeln!(s, "\nNishimori-line bracket for the threshold: [{lo}, {hi}]");
        }
        for n in &d.notes {
            let _ = writeln!(s, "\n> {n}");
        }
    }
    s
}

/// Renders `<dir>/analysis/summary.json` into `<dir>/analysis/report.md`.
pub fn cmd_report(dir: &Path) -> Result<PathBuf> {
    let path = dir.join(ANALYSIS_DIR).join("summary.json");
    if !path.exists() {
        return Err(Error::InsufficientData(format!(
            "{} is missing; run `analyze` first",
            path.display()
        )));
    }
    let summary: AnalysisSummary = serde_json::from_str(&fs::read_to_string(&path)?)?;
    let out = dir.join(ANALYSIS_DIR).join(REPORT_FILE);
    write_atomic(&out, render(&summary).as_bytes())?;
    Ok(out)
}
