//! JSON and CSV artifacts: operator matrices, column tables and check reports.
//!
//! Every JSON document has the shape
//! `{"schema": "prolate-calculus/v1", "kind": ..., "params": {"c", "N"}, "data": ...}`.
//! Operators store `data` as a row-major list of `[re, im]` pairs; tables as a
//! list of `{"name", "values"}` columns; reports as `{"suite", "pass", "checks"}`.
//! Floats are written in shortest round-trip form and read back exactly.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::OperatorMatrix;

pub const SCHEMA: &str = "prolate-calculus/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Operator,
    Table,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown format '{other}', expected json or csv"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub c: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<D> {
    pub schema: String,
    pub kind: Kind,
    pub params: Params,
    pub data: D,
}

impl<D> Document<D> {
    fn new(kind: Kind, params: Params, data: D) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            kind,
            params,
            data,
        }
    }

    fn check(&self, kind: Kind) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema '{}'",
                self.schema
            )));
        }
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "expected a {kind:?} document, found {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// A named column of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new() -> Self {
        Self {
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push(Column {
            name: name.to_string(),
            values,
        });
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    fn validate(&self) -> Result<()> {
        let rows = self.rows();
        if self.columns.iter().any(|c| c.values.len() != rows) {
            return Err(Error::InvalidArgument(
                "table columns differ in length".into(),
            ));
        }
        Ok(())
    }
}

impl Default for Table {
    fn default() -> Self {
        Self::new()
    }
}

/// One check of a verification suite. Passes when `measured ≤ tolerance`;
/// a non-finite measurement fails and is written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }

    /// Strict form: passes when `measured < bound`.
    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: bound,
            pass: measured < bound,
        }
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Outcome of a suite. The wall time is kept for the console summary only,
/// so that JSON output is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    #[serde(skip)]
    pub params: Option<Params>,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub wall_time: std::time::Duration,
}

impl VerificationReport {
    pub fn new(suite: &str, params: Params) -> Self {
        Self {
            suite: suite.to_string(),
            params: Some(params),
            pass: true,
            checks: Vec::new(),
            wall_time: std::time::Duration::ZERO,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Human-readable lines for the console.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: {:.3e} (tol {:.1e})\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            ));
        }
        out.push_str(&format!(
            "{} {}: {}/{} checks passed in {:.2?}\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len(),
            self.wall_time
        ));
        out
    }
}

fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_csv_float(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("not a number in CSV: '{s}'")))
}

pub fn operator_to_json(m: &OperatorMatrix, params: Params) -> Result<String> {
    let data: Vec<[f64; 2]> = m.entries().iter().map(|z| [z.re, z.im]).collect();
    to_json(&Document::new(Kind::Operator, params, data))
}

pub fn operator_from_json(text: &str) -> Result<(OperatorMatrix, Params)> {
    let doc: Document<Vec<[f64; 2]>> = serde_json::from_str(text)?;
    doc.check(Kind::Operator)?;
    let dim = (doc.data.len() as f64).sqrt().round() as usize;
    let entries = doc
        .data
        .iter()
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    Ok((OperatorMatrix::from_entries(dim, entries)?, doc.params))
}

/// CSV with columns `row, col, re, im`.
pub fn operator_to_csv(m: &OperatorMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "col", "re", "im"])?;
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            w.write_record([
                i.to_string(),
                j.to_string(),
                csv_float(z.re),
                csv_float(z.im),
            ])?;
        }
    }
    finish_csv(w)
}

pub fn operator_from_csv(text: &str) -> Result<OperatorMatrix> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::InvalidArgument(
                "operator CSV rows need 4 fields".into(),
            ));
        }
        let i: usize = rec[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad row index '{}'", &rec[0])))?;
        let j: usize = rec[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad column index '{}'", &rec[1])))?;
        cells.push((
            i,
            j,
            Complex64::new(parse_csv_float(&rec[2])?, parse_csv_float(&rec[3])?),
        ));
    }
    let dim = (cells.len() as f64).sqrt().round() as usize;
    let mut m = OperatorMatrix::zeros(dim);
    if dim * dim != cells.len() {
        return Err(Error::InvalidArgument("operator CSV is not square".into()));
    }
    for (i, j, z) in cells {
        if i >= dim || j >= dim {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: dim,
            });
        }
        m.set(i, j, z);
    }
    Ok(m)
}

pub fn table_to_json(t: &Table, params: Params) -> Result<String> {
    t.validate()?;
    to_json(&Document::new(Kind::Table, params, &t.columns))
}

pub fn table_from_json(text: &str) -> Result<(Table, Params)> {
    let doc: Document<Vec<Column>> = serde_json::from_str(text)?;
    doc.check(Kind::Table)?;
    let t = Table { columns: doc.data };
    t.validate()?;
    Ok((t, doc.params))
}

pub fn table_to_csv(t: &Table) -> Result<String> {
    t.validate()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(t.columns.iter().map(|c| c.name.as_str()))?;
    for row in 0..t.rows() {
        w.write_record(t.columns.iter().map(|c| csv_float(c.values[row])))?;
    }
    finish_csv(w)
}

pub fn table_from_csv(text: &str) -> Result<Table> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut t = Table::new();
    for name in r.headers()? {
        t.push(name, Vec::new());
    }
    for rec in r.records() {
        let rec = rec?;
        for (col, field) in t.columns.iter_mut().zip(rec.iter()) {
            col.values.push(parse_csv_float(field)?);
        }
    }
    t.validate()?;
    Ok(t)
}

pub fn report_to_json(report: &VerificationReport, params: Params) -> Result<String> {
    to_json(&Document::new(Kind::Report, params, report))
}

pub fn report_from_json(text: &str) -> Result<(VerificationReport, Params)> {
    let doc: Document<VerificationReport> = serde_json::from_str(text)?;
    doc.check(Kind::Report)?;
    let mut report = doc.data;
    report.params = Some(doc.params);
    Ok((report, doc.params))
}

/// CSV with columns `name, measured, tolerance, pass`.
pub fn report_to_csv(report: &VerificationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "measured", "tolerance", "pass"])?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            csv_float(c.measured),
            csv_float(c.tolerance),
            c.pass.to_string(),
        ])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> Params {
        Params { c: 1.5, n: 3 }
    }

    #[test]
    fn operator_json_round_trip_is_exact() {
        let entries = vec![
            Complex64::new(0.1, -1.0 / 3.0),
            Complex64::new(std::f64::consts::PI, 0.0),
            Complex64::new(-1e-300, 5e-324),
            Complex64::new(1.0000000000000002, 2.0),
        ];
        let m = OperatorMatrix::from_entries(2, entries).unwrap();
        let text = operator_to_json(&m, params()).unwrap();
        assert!(text.contains("\"schema\": \"prolate-calculus/v1\""));
        assert!(text.contains("\"kind\": \"operator\""));
        let (back, p) = operator_from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(p, params());
        assert!(table_from_json(&text).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let m = OperatorMatrix::from_entries(
            2,
            vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(-7.25e-17, 1.0 / 3.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(1e200, -1e-200),
            ],
        )
        .unwrap();
        assert_eq!(operator_from_csv(&operator_to_csv(&m).unwrap()).unwrap(), m);

        let mut t = Table::new();
        t.push("n", vec![0.0, 1.0]);
        t.push("chi", vec![0.31942, 2.593084 / 7.0]);
        let text = table_to_csv(&t).unwrap();
        assert!(text.starts_with("n,chi\n"));
        assert_eq!(table_from_csv(&text).unwrap(), t);
    }

    #[test]
    fn report_excludes_wall_time() {
        let mut r = VerificationReport::new("demo", params());
        r.push(Check::at_most("small", 1e-9, 1e-8));
        r.push(Check::at_most("nan", f64::NAN, 1.0));
        assert!(!r.passed() && !r.pass);
        r.wall_time = std::time::Duration::from_secs(3);
        let a = report_to_json(&r, params()).unwrap();
        r.wall_time = std::time::Duration::from_millis(1);
        assert_eq!(a, report_to_json(&r, params()).unwrap());
        assert!(a.contains("\"measured\": null"));
        let (back, _) = report_from_json(&a).unwrap();
        assert_eq!(back.checks[0], r.checks[0]);
        assert!(back.checks[1].measured.is_nan());
        assert!(report_to_csv(&r).unwrap().contains("small,"));
    }

    #[test]
    fn ragged_table_rejected() {
        let mut t = Table::new();
        t.push("a", vec![1.0]);
        t.push("b", vec![]);
        assert!(table_to_json(&t, params()).is_err());
    }

    proptest! {
        #[test]
        fn table_json_round_trip(values in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..40)) {
            let mut t = Table::new();
            t.push("v", values.clone());
            t.push("w", values.iter().map(|v| -v).collect());
            let (back, _) = table_from_json(&table_to_json(&t, params()).unwrap()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
