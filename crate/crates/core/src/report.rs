//! CSV report: `filename,label,<metrics...>[,tp,tn,fp,fn]`, one row per record.
//!
//! Reals are written with at most six decimals (trailing zeros dropped),
//! NaN as `nan`, `.` as decimal separator and `\n` line endings, so the same
//! records always produce the same bytes.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluator::MetricRecord;
use crate::metric::Metric;
use crate::overlap::ConfusionCounts;

const COUNT_COLUMNS: [&str; 4] = ["tp", "tn", "fp", "fn"];

/// Column layout of a report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub metrics: Vec<Metric>,
    pub counts: bool,
}

impl CsvSchema {
    pub fn new(metrics: Vec<Metric>, counts: bool) -> Self {
        Self { metrics, counts }
    }

    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["filename".to_string(), "label".to_string()];
        cols.extend(self.metrics.iter().map(|m| m.name().to_string()));
        if self.counts {
            cols.extend(COUNT_COLUMNS.iter().map(|c| c.to_string()));
        }
        cols
    }

    /// Parses a header row back into a schema.
    pub fn from_header(header: &[String]) -> Result<Self> {
        let mismatch = || Error::SchemaMismatch {
            expected: vec!["filename".into(), "label".into(), "<metrics>".into()],
            found: header.to_vec(),
        };
        let (fixed, rest) = header.split_at_checked(2).ok_or_else(mismatch)?;
        if fixed != ["filename", "label"] {
            return Err(mismatch());
        }
        let (metric_cols, counts) = match rest.len().checked_sub(4) {
            Some(n) if rest[n..] == COUNT_COLUMNS => (&rest[..n], true),
            _ => (rest, false),
        };
        let metrics = metric_cols.iter().map(|c| c.parse()).collect::<Result<Vec<Metric>>>()?;
        Ok(Self { metrics, counts })
    }

    fn matches(&self, record: &MetricRecord) -> bool {
        record.metrics().eq(self.metrics.iter().copied()) && record.counts.is_some() == self.counts
    }
}

/// Formats a real for the report.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn row(record: &MetricRecord) -> Vec<String> {
    let mut cells = vec![record.filename.clone(), record.label.to_string()];
    cells.extend(record.values.iter().map(|(_, v)| format_real(*v)));
    if let Some(c) = record.counts {
        cells.extend([c.tp, c.tn, c.fp, c.fn_].map(|n| n.to_string()));
    }
    cells
}

fn existing_header(path: &Path) -> Result<Option<Vec<String>>> {
    match std::fs::metadata(path) {
        Ok(m) if m.len() > 0 => {}
        _ => return Ok(None),
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(BufReader::new(File::open(path)?));
    let mut first = csv::StringRecord::new();
    reader.read_record(&mut first)?;
    Ok(Some(first.iter().map(str::to_string).collect()))
}

/// Writes `records` to `path` and returns the number of data rows written.
///
/// With `append`, rows go after the existing content and the header is only
/// written if the file is missing or empty; an existing header must equal
/// the schema's. Without `append` the file is replaced.
pub fn write_csv(records: &[MetricRecord], schema: &CsvSchema, path: impl AsRef<Path>, append: bool) -> Result<usize> {
    let path = path.as_ref();
    let header = schema.header();
    if let Some(bad) = records.iter().find(|r| !schema.matches(r)) {
        let mut found = vec!["filename".to_string(), "label".to_string()];
        found.extend(bad.metrics().map(|m| m.name().to_string()));
        return Err(Error::SchemaMismatch {
            expected: header,
            found,
        });
    }

    let write_header = if append {
        match existing_header(path)? {
            Some(found) if found != header => {
                return Err(Error::SchemaMismatch {
                    expected: header,
                    found,
                })
            }
            Some(_) => false,
            None => true,
        }
    } else {
        true
    };

    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(BufWriter::new(file));
    if write_header {
        writer.write_record(&header)?;
    }
    for record in records {
        writer.write_record(row(record))?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(records.len())
}

/// Reads a report back into records. `distance_transforms` is not stored and reads as 0.
pub fn read_csv(path: impl AsRef<Path>) -> Result<(CsvSchema, Vec<MetricRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let schema = CsvSchema::from_header(&header)?;
    let bad_cell = |cell: &str| Error::InvalidRequest(format!("unparseable CSV cell {cell:?}"));

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let label = row[1].parse().map_err(|_| bad_cell(&row[1]))?;
        let values = schema
            .metrics
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let cell = &row[2 + i];
                parse_real(cell).map(|v| (m, v)).ok_or_else(|| bad_cell(cell))
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = if schema.counts {
            let base = 2 + schema.metrics.len();
            let n = |k: usize| row[base + k].parse::<u64>().map_err(|_| bad_cell(&row[base + k]));
            Some(ConfusionCounts {
                tp: n(0)?,
                tn: n(1)?,
                fp: n(2)?,
                fn_: n(3)?,
            })
        } else {
            None
        };
        records.push(MetricRecord {
            filename: row[0].to_string(),
            label,
            values,
            counts,
            distance_transforms: 0,
        });
    }
    Ok((schema, records))
}
