//! Serialized forms of a [`SuiteReport`].

use std::fmt::Write as _;

use super::suite::{Record, SuiteReport, Variant};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "pretty" => Ok(Format::Text),
            _ => Err(Error::Config(format!("unknown format `{s}` (json, csv or text)"))),
        }
    }
}

pub fn render(report: &SuiteReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
        Format::Text => Ok(to_text(report)),
    }
}

pub fn to_json(report: &SuiteReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";")
}

/// One row per record; skipped and failed cells keep their reason.
pub fn to_csv(report: &SuiteReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "example",
        "identity",
        "status",
        "point_index",
        "seed",
        "point",
        "lhs",
        "rhs_printed",
        "rhs_corrected",
        "abs_residual_printed",
        "rel_residual_printed",
        "abs_residual_corrected",
        "rel_residual_corrected",
        "verdict",
        "reason",
    ])
    .map_err(io)?;
    for (ex, er) in &report.examples {
        for (label, ir) in &er.identities {
            if ir.records.is_empty() {
                if let Some(reason) = &ir.summary.skip_reason {
                    w.write_record([ex, label, "skipped", "", "", "", "", "", "", "", "", "", "", "", reason])
                        .map_err(io)?;
                }
            }
            for r in &ir.records {
                let row: Vec<String> = match r {
                    Record::Evaluated(res) => vec![
                        ex.clone(),
                        label.clone(),
                        "evaluated".into(),
                        res.point_index.to_string(),
                        res.seed.to_string(),
                        join(&res.point),
                        format!("{:?}", res.lhs),
                        format!("{:?}", res.rhs_printed),
                        res.rhs_corrected.map(|v| format!("{v:?}")).unwrap_or_default(),
                        format!("{:e}", res.abs_residual_printed),
                        format!("{:e}", res.rel_residual_printed),
                        opt(res.abs_residual_corrected),
                        opt(res.rel_residual_corrected),
                        res.verdict.as_str().into(),
                        String::new(),
                    ],
                    Record::Skipped {
                        point_index,
                        point,
                        reason,
                    } => {
                        let mut row = vec![
                            ex.clone(),
                            label.clone(),
                            "skipped".into(),
                            point_index.to_string(),
                            String::new(),
                            join(point),
                        ];
                        row.extend(std::iter::repeat_n(String::new(), 8));
                        row.push(reason.clone());
                        row
                    }
                    Record::Failed {
                        point_index,
                        point,
                        error,
                    } => {
                        let mut row = vec![
                            ex.clone(),
                            label.clone(),
                            "failed".into(),
                            point_index.to_string(),
                            String::new(),
                            join(point),
                        ];
                        row.extend(std::iter::repeat_n(String::new(), 8));
                        row.push(error.clone());
                        row
                    }
                };
                w.write_record(&row).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2e}")).unwrap_or_else(|| "-".into())
}

/// One line per identity and example, then the cross-example verdicts.
pub fn to_text(report: &SuiteReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(
        out,
        "points {}  seed {}  tolerance {:e}",
        c.points, c.seed, c.tolerance
    );
    for (ex, er) in &report.examples {
        let _ = writeln!(out, "\n{ex}  (dim {} -> {}, {})", er.dim_total, er.dim_base, er.source);
        for (label, ir) in &er.identities {
            let s = &ir.summary;
            let verdict = if s.evaluated == 0 {
                format!("skipped: {}", s.skip_reason.as_deref().unwrap_or("no points"))
            } else if !s.passed() {
                format!(
                    "FAIL ({} both_fail, {} errors)",
                    s.both_fail, s.failed
                )
            } else {
                let variant = match s.variant {
                    Some(Variant::AsPrinted) => s.variant_labels.0.clone(),
                    Some(Variant::Corrected) => s.variant_labels.1.clone(),
                    _ => "mixed".into(),
                };
                let mut v = format!("pass  holds: {variant}");
                if s.skipped > 0 {
                    let _ = write!(v, "  ({} skipped: {})", s.skipped, s.skip_reason.as_deref().unwrap_or(""));
                }
                v
            };
            let _ = writeln!(
                out,
                "  {:<34} max rel {:>9} (printed {:>9}, corrected {:>9})  {}",
                label,
                sci(s.max_rel_best),
                sci(s.max_rel_printed),
                sci(s.max_rel_corrected),
                verdict
            );
        }
    }
    let _ = writeln!(out, "\nrelations across all examples");
    for (label, r) in &report.relations {
        let v = r.variant.map(Variant::as_str).unwrap_or("not evaluated");
        let _ = writeln!(
            out,
            "  {:<34} {:<14} examples {}  max rel {}",
            label,
            v,
            r.examples_evaluated,
            sci(r.max_rel_best)
        );
    }
    if report.corrections_required.is_empty() {
        let _ = writeln!(out, "\nno printed relation needed correction");
    } else {
        let _ = writeln!(out, "\nprinted relations that needed correction:");
        for l in &report.corrections_required {
            let _ = writeln!(out, "  {l}");
        }
    }
    if !report.claim_checks.is_empty() {
        let _ = writeln!(out, "\nclaim checks (reported, not asserted)");
        for cc in &report.claim_checks {
            let holds = match cc.holds {
                Some(true) => "holds",
                Some(false) => "fails",
                None => "n/a",
            };
            let _ = writeln!(
                out,
                "  {:<20} {:<52} {:<6} max rel {}  {}",
                cc.example,
                cc.claim,
                holds,
                sci(cc.max_rel_residual),
                cc.detail
            );
        }
    }
    let _ = writeln!(
        out,
        "\n{}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    out
}
