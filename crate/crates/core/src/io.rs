//! File formats: signal and curve CSVs, report tables, JSON sidecars and models.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting::ModelFile;
use crate::metrics::to_db;
use crate::pipeline::ReportRow;
use crate::sweep::SweepCurve;

pub const SIGNAL_HEADER: &str = "index,value";
pub const CURVE_HEADER: &str = "sigma_g,s_o_linear,s_o_db";
pub const REPORT_HEADER: &str =
    "bw,noise_variance,s_i,sigma_opt_pred,sigma_opt_emp,so_max_pred,so_max_emp";
pub const CURVE_SI_PREFIX: &str = "# s_i_linear=";
/// Written in place of predictions the model could not make.
pub const MISSING: &str = "NA";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_sample(v: f64) -> String {
    format!("{v:.16e}")
}

/// `<stem>.json` next to a data file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn render_signal_csv(samples: &[f64]) -> String {
    let mut out = String::with_capacity(samples.len() * 28);
    out.push_str(SIGNAL_HEADER);
    out.push('\n');
    for (i, v) in samples.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", format_sample(*v));
    }
    out
}

pub fn write_signal_csv(path: impl AsRef<Path>, samples: &[f64]) -> Result<()> {
    write_file(path.as_ref(), &render_signal_csv(samples))
}

pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::format("signal CSV", path, e))?;
    if headers.iter().collect::<Vec<_>>() != ["index", "value"] {
        return Err(Error::format(
            "signal CSV",
            path,
            format!("expected header `{SIGNAL_HEADER}`"),
        ));
    }
    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format("signal CSV", path, e))?;
        let index: usize = record[0]
            .trim()
            .parse()
            .map_err(|e| Error::format("signal CSV", path, format!("row {row}: {e}")))?;
        if index != row {
            return Err(Error::format(
                "signal CSV",
                path,
                format!("row {row} has index {index}"),
            ));
        }
        let value: f64 = record[1]
            .trim()
            .parse()
            .map_err(|e| Error::format("signal CSV", path, format!("row {row}: {e}")))?;
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Error::format("signal CSV", path, "no samples"));
    }
    Ok(samples)
}

pub fn render_curve_csv(curve: &SweepCurve) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CURVE_SI_PREFIX}{}", curve.s_i_linear);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{}",
            p.sigma_g,
            p.s_o_linear,
            to_db(p.s_o_linear)
        );
    }
    out
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &SweepCurve) -> Result<()> {
    write_file(path.as_ref(), &render_curve_csv(curve))
}

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |x| x.to_string())
}

pub fn render_report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.bw,
            r.sigma_n_sq,
            r.s_i,
            optional(r.sigma_opt_pred),
            r.sigma_opt_emp,
            optional(r.s_o_max_pred),
            r.s_o_max_emp
        );
    }
    out
}

pub fn write_report_csv(path: impl AsRef<Path>, rows: &[ReportRow]) -> Result<()> {
    write_file(path.as_ref(), &render_report_csv(rows))
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: &dyn std::fmt::Display| Error::format("report CSV", path, e);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(&e))?;
        if record.len() != 7 {
            return Err(bad(&format!("expected 7 columns, got {}", record.len())));
        }
        let num = |i: usize| record[i].parse::<f64>().map_err(|e| bad(&e));
        let opt = |i: usize| {
            if &record[i] == MISSING {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        rows.push(ReportRow {
            bw: num(0)?,
            sigma_n_sq: num(1)?,
            s_i: num(2)?,
            sigma_opt_pred: opt(3)?,
            sigma_opt_emp: num(4)?,
            s_o_max_pred: opt(5)?,
            s_o_max_emp: num(6)?,
        });
    }
    Ok(rows)
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_file(path.as_ref(), &to_json_string(value))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>, what: &'static str) -> Result<T> {
    let path = path.as_ref();
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| Error::format(what, path, e))
}

pub fn write_model(path: impl AsRef<Path>, model: &ModelFile) -> Result<()> {
    write_json(path, model)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    read_json(path, "model JSON")
}
