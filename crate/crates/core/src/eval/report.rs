use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::corpus::Split;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    MarkdownTable,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown_table" | "markdown" | "md" => Ok(ReportFormat::MarkdownTable),
            other => Err(Error::Config(format!(
                "unknown report format {other:?} (expected json, csv or markdown_table)"
            ))),
        }
    }
}

fn split_header(split: Split) -> &'static str {
    match split {
        Split::Train => "Train Acc.%",
        Split::Val => "Val. Acc.%",
        Split::Test => "Test Acc.%",
    }
}

/// One row per report, one accuracy column per split present.
pub fn markdown_table(reports: &[EvalReport]) -> String {
    let mut splits: Vec<Split> = reports.iter().map(|r| r.split).collect();
    splits.sort();
    splits.dedup();

    let mut out = String::from("| Model |");
    for s in &splits {
        let _ = write!(out, " {} |", split_header(*s));
    }
    out.push_str("\n|:--|");
    for _ in &splits {
        out.push_str(":--:|");
    }
    out.push('\n');
    for r in reports {
        let _ = write!(out, "| {} |", r.model);
        for s in &splits {
            match r.accuracy {
                Some(a) if *s == r.split => {
                    let _ = write!(out, " {:.2} |", a * 100.0);
                }
                _ => out.push_str("  |"),
            }
        }
        out.push('\n');
    }
    out
}

fn io_other(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

fn csv_string(report: &EvalReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::InvalidInput(format!("csv encoding: {e}"));
    w.write_record([
        "qid",
        "predicted",
        "correct_index",
        "is_correct",
        "selected_indices",
        "gold_covered",
    ])
    .map_err(wrap)?;
    for item in &report.per_item {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            item.qid.clone(),
            item.predicted.to_string(),
            opt(item.correct_index.map(|c| c.to_string())),
            opt(item.is_correct.map(|c| c.to_string())),
            item.selected_indices
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" "),
            opt(item.gold_covered.map(|c| c.to_string())),
        ])
        .map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv encoding: {e}")))
}

/// Writes `report` to `path`. JSON is lossless; CSV holds one row per item;
/// the markdown table has a single row for this report.
pub fn emit_report(report: &EvalReport, format: ReportFormat, path: &Path) -> Result<()> {
    let bytes = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| io_other(path, e))?;
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Csv => csv_string(report)?,
        ReportFormat::MarkdownTable => markdown_table(std::slice::from_ref(report)).into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Submission-style prediction line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub qid: String,
    pub predicted_index: usize,
}

pub fn write_predictions(report: &EvalReport, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in &report.per_item {
        let line = Prediction {
            qid: item.qid.clone(),
            predicted_index: item.predicted,
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| io_other(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
