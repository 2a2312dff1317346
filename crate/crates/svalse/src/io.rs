//! CSV tables: snapshots, truth, tracks, per-step metrics and summaries.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! and writing it again reproduces it byte for byte.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};
use num_complex::Complex64;

use svalse_core::metrics::GospaBreakdown;
use svalse_core::{Snapshot, TrackRecord};

use crate::error::{CliError, Result};
use crate::simkit::TruthEntry;

pub const TRUTH_HEADER: [&str; 5] = ["t", "source_id", "doa_deg", "amp_re", "amp_im"];
pub const TRACK_HEADER: [&str; 8] = ["run", "t", "component_id", "doa_deg", "pa_rad", "kappa", "w_re", "w_im"];
pub const METRICS_HEADER: [&str; 11] = [
    "run",
    "method",
    "snr_db",
    "t",
    "gospa_total",
    "gospa_dist",
    "gospa_miss",
    "gospa_false",
    "rmse",
    "n_true",
    "n_est",
];
pub const SUMMARY_HEADER: [&str; 9] =
    ["method", "snr_db", "n_rows", "gospa_total", "gospa_dist", "gospa_miss", "gospa_false", "rmse", "n_rmse"];

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Svalse,
    Valse,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Svalse => "svalse",
            Method::Valse => "valse",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "svalse" => Ok(Method::Svalse),
            "valse" => Ok(Method::Valse),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackRow {
    pub run: usize,
    pub record: TrackRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub run: usize,
    pub method: Method,
    pub snr_db: f64,
    pub t: usize,
    pub gospa: GospaBreakdown,
    pub rmse: Option<f64>,
    pub n_true: usize,
    pub n_est: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub snr_db: f64,
    pub n_rows: usize,
    pub gospa: GospaBreakdown,
    pub rmse: Option<f64>,
    /// Rows that had an RMSE value.
    pub n_rmse: usize,
}

fn write_rows<W: Write>(out: W, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = WriterBuilder::new().from_writer(out);
    let data = |e: csv::Error| CliError::data(format!("csv write: {e}"));
    w.write_record(header).map_err(data)?;
    for row in rows {
        w.write_record(&row).map_err(data)?;
    }
    w.flush().map_err(|e| CliError::data(format!("csv write: {e}")))
}

fn strings(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

/// Header plus data rows with their 1-based line numbers.
struct Table {
    header: Vec<String>,
    rows: Vec<(u64, StringRecord)>,
}

fn read_table<R: Read>(input: R, source: &str) -> Result<Table> {
    let mut rdr = ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| CliError::data(format!("{source}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if header.iter().all(|h| h.is_empty()) {
        return Err(CliError::data(format!("{source}: empty file")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => CliError::data(format!(
                "{source}: line {}: expected {expected_len} fields, found {len}",
                pos.as_ref().map_or(0, |p| p.line())
            )),
            _ => CliError::data(format!("{source}: {e}")),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(Table { header, rows })
}

fn expect_header(table: &Table, want: &[&str], source: &str) -> Result<()> {
    if table.header != want {
        return Err(CliError::data(format!(
            "{source}: header mismatch: expected `{}`, found `{}`",
            want.join(","),
            table.header.join(",")
        )));
    }
    Ok(())
}

fn cell<T: FromStr>(rec: &StringRecord, col: usize, header: &[String], line: u64, source: &str) -> Result<T> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse().map_err(|_| {
        CliError::data(format!("{source}: line {line}, column `{}`: cannot parse {raw:?}", header[col]))
    })
}

fn opt_cell(rec: &StringRecord, col: usize, header: &[String], line: u64, source: &str) -> Result<Option<f64>> {
    if rec.get(col) == Some("") {
        Ok(None)
    } else {
        cell(rec, col, header, line, source).map(Some)
    }
}

pub fn snapshot_header(m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 0..m {
        h.push(format!("re_{i}"));
        h.push(format!("im_{i}"));
    }
    h
}

pub fn write_snapshots<W: Write>(out: W, snapshots: &[Snapshot]) -> Result<()> {
    let m = snapshots.first().map_or(0, |s| s.y.len());
    if snapshots.iter().any(|s| s.y.len() != m) {
        return Err(CliError::data("snapshots have different sensor counts"));
    }
    let rows = snapshots.iter().map(|s| {
        let mut row = vec![s.t.to_string()];
        for v in &s.y {
            row.push(fmt_f64(v.re));
            row.push(fmt_f64(v.im));
        }
        row
    });
    write_rows(out, &snapshot_header(m), rows)
}

/// Strict snapshot parser: exact header, no ragged rows, numeric cells and
/// strictly increasing `t >= 1`.
pub fn read_snapshots<R: Read>(input: R, source: &str) -> Result<Vec<Snapshot>> {
    let table = read_table(input, source)?;
    let n = table.header.len();
    if n < 3 || n % 2 == 0 {
        return Err(CliError::data(format!("{source}: header must be t followed by re_i,im_i pairs")));
    }
    let m = (n - 1) / 2;
    let want = snapshot_header(m);
    if table.header != want {
        return Err(CliError::data(format!(
            "{source}: header mismatch: expected `{}`, found `{}`",
            want.join(","),
            table.header.join(",")
        )));
    }
    if table.rows.is_empty() {
        return Err(CliError::data(format!("{source}: no snapshot rows")));
    }
    let mut out: Vec<Snapshot> = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let t: usize = cell(rec, 0, &table.header, *line, source)?;
        if t == 0 {
            return Err(CliError::data(format!("{source}: line {line}: time steps start at 1")));
        }
        if let Some(prev) = out.last() {
            if t <= prev.t {
                return Err(CliError::data(format!("{source}: line {line}: t = {t} does not increase")));
            }
        }
        let mut y = Vec::with_capacity(m);
        for i in 0..m {
            let re: f64 = cell(rec, 1 + 2 * i, &table.header, *line, source)?;
            let im: f64 = cell(rec, 2 + 2 * i, &table.header, *line, source)?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(CliError::data(format!("{source}: line {line}: non-finite sample")));
            }
            y.push(Complex64::new(re, im));
        }
        out.push(Snapshot::new(t, y)?);
    }
    Ok(out)
}

pub fn parse_snapshots(path: &Path) -> Result<Vec<Snapshot>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_snapshots(f, &path.display().to_string())
}

pub fn write_truth<W: Write>(out: W, entries: &[TruthEntry]) -> Result<()> {
    let rows = entries.iter().map(|e| {
        vec![e.t.to_string(), e.source_id.to_string(), fmt_f64(e.doa_deg), fmt_f64(e.amp.re), fmt_f64(e.amp.im)]
    });
    write_rows(out, &strings(&TRUTH_HEADER), rows)
}

pub fn read_truth<R: Read>(input: R, source: &str) -> Result<Vec<TruthEntry>> {
    let table = read_table(input, source)?;
    expect_header(&table, &TRUTH_HEADER, source)?;
    let h = &table.header;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            Ok(TruthEntry {
                t: cell(rec, 0, h, *line, source)?,
                source_id: cell(rec, 1, h, *line, source)?,
                doa_deg: cell(rec, 2, h, *line, source)?,
                amp: Complex64::new(cell(rec, 3, h, *line, source)?, cell(rec, 4, h, *line, source)?),
            })
        })
        .collect()
}

pub fn write_tracks<W: Write>(out: W, rows: &[TrackRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        let k = &r.record;
        vec![
            r.run.to_string(),
            k.t.to_string(),
            k.component_id.to_string(),
            fmt_f64(k.doa_deg),
            fmt_f64(k.pa_rad),
            fmt_f64(k.kappa),
            fmt_f64(k.weight.re),
            fmt_f64(k.weight.im),
        ]
    });
    write_rows(out, &strings(&TRACK_HEADER), rows)
}

pub fn read_tracks<R: Read>(input: R, source: &str) -> Result<Vec<TrackRow>> {
    let table = read_table(input, source)?;
    expect_header(&table, &TRACK_HEADER, source)?;
    let h = &table.header;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let c = |col| cell::<f64>(rec, col, h, *line, source);
            Ok(TrackRow {
                run: cell(rec, 0, h, *line, source)?,
                record: TrackRecord {
                    t: cell(rec, 1, h, *line, source)?,
                    component_id: cell(rec, 2, h, *line, source)?,
                    doa_deg: c(3)?,
                    pa_rad: c(4)?,
                    kappa: c(5)?,
                    weight: Complex64::new(c(6)?, c(7)?),
                    active: true,
                },
            })
        })
        .collect()
}

pub fn write_metrics<W: Write>(out: W, rows: &[MetricRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.run.to_string(),
            r.method.to_string(),
            fmt_f64(r.snr_db),
            r.t.to_string(),
            fmt_f64(r.gospa.total),
            fmt_f64(r.gospa.dist),
            fmt_f64(r.gospa.miss),
            fmt_f64(r.gospa.false_),
            fmt_opt(r.rmse),
            r.n_true.to_string(),
            r.n_est.to_string(),
        ]
    });
    write_rows(out, &strings(&METRICS_HEADER), rows)
}

pub fn read_metrics<R: Read>(input: R, source: &str) -> Result<Vec<MetricRow>> {
    let table = read_table(input, source)?;
    expect_header(&table, &METRICS_HEADER, source)?;
    let h = &table.header;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let c = |col| cell::<f64>(rec, col, h, *line, source);
            Ok(MetricRow {
                run: cell(rec, 0, h, *line, source)?,
                method: cell(rec, 1, h, *line, source)?,
                snr_db: c(2)?,
                t: cell(rec, 3, h, *line, source)?,
                gospa: GospaBreakdown { total: c(4)?, dist: c(5)?, miss: c(6)?, false_: c(7)? },
                rmse: opt_cell(rec, 8, h, *line, source)?,
                n_true: cell(rec, 9, h, *line, source)?,
                n_est: cell(rec, 10, h, *line, source)?,
            })
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.method.to_string(),
            fmt_f64(r.snr_db),
            r.n_rows.to_string(),
            fmt_f64(r.gospa.total),
            fmt_f64(r.gospa.dist),
            fmt_f64(r.gospa.miss),
            fmt_f64(r.gospa.false_),
            fmt_opt(r.rmse),
            r.n_rmse.to_string(),
        ]
    });
    write_rows(out, &strings(&SUMMARY_HEADER), rows)
}

pub fn read_summary<R: Read>(input: R, source: &str) -> Result<Vec<SummaryRow>> {
    let table = read_table(input, source)?;
    expect_header(&table, &SUMMARY_HEADER, source)?;
    let h = &table.header;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let c = |col| cell::<f64>(rec, col, h, *line, source);
            Ok(SummaryRow {
                method: cell(rec, 0, h, *line, source)?,
                snr_db: c(1)?,
                n_rows: cell(rec, 2, h, *line, source)?,
                gospa: GospaBreakdown { total: c(3)?, dist: c(4)?, miss: c(5)?, false_: c(6)? },
                rmse: opt_cell(rec, 7, h, *line, source)?,
                n_rmse: cell(rec, 8, h, *line, source)?,
            })
        })
        .collect()
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))
}
