//! Text, CSV and JSON renderings of pipeline results. Each format renders
//! the same report object.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnose::{ComparisonTable, DiagnosisReport, Fraction, TrendReport};
use crate::error::{Error, Result};
use crate::gas_model::{CoarseFault, Diagnosis, Method, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown output format `{other}`"))),
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn csv_out(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Left-aligned columns separated by two spaces.
fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                s.push_str(cell);
            } else {
                s.push_str(&format!("{cell:<w$}  "));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

fn label(c: Option<CoarseFault>) -> String {
    c.map(|c| c.label().to_string()).unwrap_or_default()
}

/// Short cell: coarse label, fine class number, and flags (`*` ambiguous
/// table hit, `?` low-confidence network output).
fn cell(d: &Diagnosis) -> String {
    match d.result {
        Verdict::NoDecision => "ND".to_string(),
        Verdict::Fault(f) => {
            let mut s = format!("{} [{}]", d.coarse.label(), f.index());
            if d.ambiguous {
                s.push('*');
            }
            if d.low_confidence {
                s.push('?');
            }
            s
        }
    }
}

const LEGEND: &str = "[n] fine class number, ND no decision, * tied table rows, ? low confidence\n";

pub fn render_reports(reports: &[DiagnosisReport], format: Format) -> String {
    match format {
        Format::Json => json(reports),
        Format::Csv => {
            let mut rows = Vec::new();
            for r in reports {
                for d in &r.diagnoses {
                    rows.push(vec![
                        r.sample_id.clone(),
                        r.rogers_codes.to_string(),
                        r.iec_codes.to_string(),
                        r.iec_variant.to_string(),
                        d.method.token().to_string(),
                        d.coarse.label().to_string(),
                        d.fault().map(|f| f.index().to_string()).unwrap_or_default(),
                        d.fault().map(|f| f.description().to_string()).unwrap_or_default(),
                        format!("{}", d.confidence),
                        d.low_confidence.to_string(),
                        d.ambiguous.to_string(),
                        label(r.actual),
                        r.clamped.iter().map(|g| g.column()).collect::<Vec<_>>().join(" "),
                    ]);
                }
            }
            csv_out(
                &[
                    "id",
                    "rogers_codes",
                    "iec_codes",
                    "iec_table",
                    "method",
                    "coarse",
                    "class",
                    "description",
                    "confidence",
                    "low_confidence",
                    "ambiguous",
                    "actual",
                    "clamped",
                ],
                rows,
            )
        }
        Format::Text => {
            let mut methods: Vec<Method> = Vec::new();
            for r in reports {
                for d in &r.diagnoses {
                    if !methods.contains(&d.method) {
                        methods.push(d.method);
                    }
                }
            }
            let mut header = vec!["sample".to_string(), "Rogers codes".to_string(), "IEC codes".to_string()];
            header.extend(methods.iter().map(|m| m.to_string()));
            header.push("actual".to_string());
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let mut row = vec![r.sample_id.clone(), r.rogers_codes.to_string(), r.iec_codes.to_string()];
                    row.extend(methods.iter().map(|&m| r.get(m).map(cell).unwrap_or_default()));
                    row.push(label(r.actual));
                    row
                })
                .collect();
            let mut out = aligned(&header, &rows);
            if let Some(r) = reports.first() {
                if methods.contains(&Method::IecTable) {
                    out.push_str(&format!("IEC table: {}\n", r.iec_variant));
                }
            }
            for r in reports {
                if !r.clamped.is_empty() {
                    let gases: Vec<&str> = r.clamped.iter().map(|g| g.formula()).collect();
                    out.push_str(&format!(
                        "note: {} raised to the detection floor: {}\n",
                        r.sample_id,
                        gases.join(", ")
                    ));
                }
            }
            if !reports.is_empty() {
                out.push_str(LEGEND);
            }
            out
        }
    }
}

/// Ratios, codes and table verdicts for a single sample.
pub fn render_codes(report: &DiagnosisReport, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let rr = report.rogers_ratios.as_array();
            let ir = report.iec_ratios.as_array();
            let names = ["CH4/H2", "C2H6/CH4", "C2H4/C2H6", "C2H2/C2H4"];
            let iec_names = ["C2H2/C2H4", "CH4/H2", "C2H4/C2H6"];
            let mut rows = Vec::new();
            for (i, (n, v)) in names.iter().zip(rr).enumerate() {
                rows.push(vec!["rogers".to_string(), n.to_string(), format!("{v}"), report.rogers_codes.codes()[i].to_string()]);
            }
            for (i, (n, v)) in iec_names.iter().zip(ir).enumerate() {
                rows.push(vec!["iec".to_string(), n.to_string(), format!("{v}"), report.iec_codes.codes()[i].to_string()]);
            }
            let mut out = csv_out(&["scheme", "ratio", "value", "code"], rows);
            let verdicts = report
                .diagnoses
                .iter()
                .map(|d| {
                    vec![
                        d.method.token().to_string(),
                        d.coarse.label().to_string(),
                        d.fault().map(|f| f.description().to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            out.push('\n');
            out.push_str(&csv_out(&["method", "coarse", "description"], verdicts));
            out
        }
        Format::Text => {
            let mut out = String::new();
            let rr = report.rogers_ratios;
            out.push_str(&format!(
                "Rogers ratios    CH4/H2 {:.4}  C2H6/CH4 {:.4}  C2H4/C2H6 {:.4}  C2H2/C2H4 {:.4}\n",
                rr.methane_hydrogen, rr.ethane_methane, rr.ethylene_ethane, rr.acetylene_ethylene
            ));
            out.push_str(&format!("Rogers codes     {}\n", report.rogers_codes));
            let ir = report.iec_ratios;
            out.push_str(&format!(
                "IEC ratios       C2H2/C2H4 {:.4}  CH4/H2 {:.4}  C2H4/C2H6 {:.4}\n",
                ir.acetylene_ethylene, ir.methane_hydrogen, ir.ethylene_ethane
            ));
            out.push_str(&format!("IEC codes        {}\n", report.iec_codes));
            for d in &report.diagnoses {
                let name = match d.method {
                    Method::IecTable => format!("IEC ({})", report.iec_variant),
                    m => m.to_string(),
                };
                let verdict = match d.fault() {
                    None => "No decision".to_string(),
                    Some(f) => format!("{} ({})", d.coarse.label(), f.description()),
                };
                let tie = if d.ambiguous { ", tied rows" } else { "" };
                out.push_str(&format!("{name:<17}{verdict}{tie}\n"));
            }
            if !report.clamped.is_empty() {
                let gases: Vec<&str> = report.clamped.iter().map(|g| g.formula()).collect();
                out.push_str(&format!("note: raised to the detection floor: {}\n", gases.join(", ")));
            }
            out
        }
    }
}

fn opt_fraction(f: Option<Fraction>) -> String {
    f.map(|f| f.to_string()).unwrap_or_else(|| "-".to_string())
}

fn opt_percent(v: Option<f64>) -> String {
    v.map(|v| format!("{:.0}%", v * 100.0)).unwrap_or_else(|| "-".to_string())
}

pub fn render_comparison(table: &ComparisonTable, format: Format) -> String {
    match format {
        Format::Json => json(table),
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &table.rows {
                let mut row = vec!["row".to_string(), r.sample_id.clone(), label(r.actual)];
                row.extend(Method::ALL.iter().map(|&m| r.get(m).coarse.label().to_string()));
                row.push(r.annotation.clone().unwrap_or_default());
                rows.push(row);
            }
            let metric = |name: &str, f: &dyn Fn(&crate::diagnose::MethodScore) -> String| {
                let mut row = vec![name.to_string(), String::new(), String::new()];
                row.extend(Method::ALL.iter().map(|&m| f(table.score(m))));
                row.push(String::new());
                row
            };
            let frac = |f: Option<Fraction>| f.map(|f| format!("{}/{}", f.correct, f.total)).unwrap_or_default();
            rows.push(metric("accuracy", &|s| frac(s.accuracy)));
            rows.push(metric("reference_agreement", &|s| frac(s.reference_agreement)));
            rows.push(metric("reference_accuracy", &|s| frac(s.reference_accuracy)));
            rows.push(metric("claimed_accuracy", &|s| {
                s.claimed_accuracy.map(|v| format!("{v}")).unwrap_or_default()
            }));
            for d in &table.discrepancies {
                let mut row = vec!["discrepancy".to_string()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(d.clone());
                rows.push(row);
            }
            csv_out(
                &["record", "sample", "actual", "iec", "rogers", "ann_iec", "ann_rogers", "note"],
                rows,
            )
        }
        Format::Text => {
            let mut header = vec!["sample".to_string(), "actual".to_string()];
            header.extend(Method::ALL.iter().map(|m| m.to_string()));
            header.push("note".to_string());
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.sample_id.clone(), label(r.actual)];
                    row.extend(Method::ALL.iter().map(|&m| r.get(m).coarse.label().to_string()));
                    row.push(r.annotation.clone().unwrap_or_default());
                    row
                })
                .collect();
            let mut out = format!("IEC table: {}\n\n", table.iec_variant);
            out.push_str(&aligned(&header, &rows));
            out.push('\n');
            let header: Vec<String> = ["method", "accuracy", "agreement", "published column", "claim"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<String>> = table
                .scores
                .iter()
                .map(|s| {
                    vec![
                        s.method.to_string(),
                        opt_fraction(s.accuracy),
                        opt_fraction(s.reference_agreement),
                        opt_fraction(s.reference_accuracy),
                        opt_percent(s.claimed_accuracy),
                    ]
                })
                .collect();
            out.push_str(&aligned(&header, &rows));
            if !table.discrepancies.is_empty() {
                out.push_str("\ndiscrepancies:\n");
                for d in &table.discrepancies {
                    out.push_str(&format!("  {d}\n"));
                }
            }
            out
        }
    }
}

pub fn render_trends(reports: &[TrendReport], format: Format) -> String {
    match format {
        Format::Json => json(reports),
        Format::Csv => {
            let mut rows = Vec::new();
            for r in reports {
                for t in &r.gases {
                    for (i, p) in t.points.iter().enumerate() {
                        rows.push(vec![
                            r.id.clone(),
                            t.gas.column().to_string(),
                            p.date.to_string(),
                            format!("{}", p.value.ppm),
                            p.value.below_detection.to_string(),
                            if i == 0 { String::new() } else { format!("{}", t.deltas[i - 1]) },
                        ]);
                    }
                }
            }
            csv_out(&["id", "gas", "date", "ppm", "below_detection", "change"], rows)
        }
        Format::Text => {
            let mut out = String::new();
            for (k, r) in reports.iter().enumerate() {
                if k > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("{}\n", r.id));
                let mut header = vec!["gas".to_string()];
                header.extend(r.dates.iter().map(|d| d.to_string()));
                header.push("change".to_string());
                let rows: Vec<Vec<String>> = r
                    .gases
                    .iter()
                    .map(|t| {
                        let mut row = vec![t.gas.formula().to_string()];
                        row.extend(t.points.iter().map(|p| p.value.to_string()));
                        row.push(t.deltas.iter().map(|d| format!("{d:+}")).collect::<Vec<_>>().join(" "));
                        row
                    })
                    .collect();
                out.push_str(&aligned(&header, &rows));
            }
            out
        }
    }
}
