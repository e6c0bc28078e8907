//! Transaction CSV input and feature CSV output.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime};
use txmotif_core::{FeatureRow, FeatureSchema, InputSchema, Timestamp, Transaction};

use crate::error::{CliError, Result};

/// How the timestamp column is parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeFormat {
    /// Integer epoch seconds only.
    #[default]
    Epoch,
    /// Epoch seconds, RFC 3339, or `YYYY-MM-DD HH:MM[:SS]` / `YYYY/MM/DD HH:MM`
    /// read as UTC.
    Iso,
}

const NAIVE_FORMATS: [&str; 5] = ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y/%m/%d %H:%M", "%Y/%m/%d %H:%M:%S"];

pub fn parse_timestamp(s: &str, format: TimeFormat) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(t) = s.parse::<i64>() {
        return Some(t);
    }
    if format == TimeFormat::Epoch {
        return None;
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    NAIVE_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.and_utc().timestamp())
}

/// Column positions of each input role.
#[derive(Debug, Clone)]
struct Layout {
    edge_id: usize,
    source: usize,
    target: usize,
    timestamp: usize,
    attributes: Vec<usize>,
}

/// Reads transactions in batches.
pub struct TransactionReader {
    path: PathBuf,
    reader: csv::Reader<Box<dyn Read + Send>>,
    layout: Layout,
    format: TimeFormat,
    record: csv::StringRecord,
    line: u64,
}

impl TransactionReader {
    /// Opens `path` (`-` reads stdin) and checks the header against `schema`.
    pub fn open(path: &Path, schema: &InputSchema, format: TimeFormat) -> Result<Self> {
        let input: Box<dyn Read + Send> = if path == Path::new("-") {
            Box::new(BufReader::new(io::stdin()))
        } else {
            Box::new(BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?))
        };
        Self::from_reader(input, path, schema, format)
    }

    pub fn from_reader(input: Box<dyn Read + Send>, path: &Path, schema: &InputSchema, format: TimeFormat) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| CliError::Data(format!("{}: missing column {name:?}", path.display())))
        };
        let layout = Layout {
            edge_id: find(&schema.edge_id)?,
            source: find(&schema.source)?,
            target: find(&schema.target)?,
            timestamp: find(&schema.timestamp)?,
            attributes: schema.attributes.iter().map(|a| find(a)).collect::<Result<_>>()?,
        };
        Ok(TransactionReader { path: path.to_path_buf(), reader, layout, format, record: csv::StringRecord::new(), line: 1 })
    }

    /// Up to `n` transactions; empty at end of input.
    pub fn next_batch(&mut self, n: usize) -> Result<Vec<Transaction>> {
        let mut batch = Vec::with_capacity(n.min(1 << 16));
        while batch.len() < n {
            if !self.reader.read_record(&mut self.record).map_err(|e| csv_error(&self.path, e))? {
                break;
            }
            self.line += 1;
            batch.push(self.parse_record()?);
        }
        Ok(batch)
    }

    /// Every remaining transaction.
    pub fn read_all(&mut self) -> Result<Vec<Transaction>> {
        self.next_batch(usize::MAX)
    }

    fn parse_record(&self) -> Result<Transaction> {
        let r = &self.record;
        let l = &self.layout;
        let field = |i: usize| r.get(i).unwrap_or("").trim();
        let bad = |what: &str, value: &str| {
            CliError::Data(format!("{} line {}: invalid {what} {value:?}", self.path.display(), self.line))
        };
        let edge_id = field(l.edge_id).parse::<u64>().map_err(|_| bad("edge id", field(l.edge_id)))?;
        let timestamp =
            parse_timestamp(field(l.timestamp), self.format).ok_or_else(|| bad("timestamp", field(l.timestamp)))?;
        let attributes = l
            .attributes
            .iter()
            .map(|&i| field(i).parse::<f64>().map_err(|_| bad("attribute", field(i))))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Transaction::new(edge_id, field(l.source), field(l.target), timestamp, attributes))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!("checked is_io_error"),
        }
    } else {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

/// Writes feature rows under the schema header.
pub struct FeatureWriter {
    path: PathBuf,
    writer: csv::Writer<Box<dyn Write + Send>>,
    cells: Vec<String>,
}

impl FeatureWriter {
    /// Creates `path` (`-` writes stdout) and writes the header.
    pub fn create(path: &Path, schema: &FeatureSchema) -> Result<Self> {
        let out: Box<dyn Write + Send> = if path == Path::new("-") {
            Box::new(BufWriter::new(io::stdout()))
        } else {
            Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
        };
        let mut writer = csv::WriterBuilder::new().from_writer(out);
        writer.write_record(schema.names()).map_err(|e| csv_error(path, e))?;
        Ok(FeatureWriter { path: path.to_path_buf(), writer, cells: Vec::new() })
    }

    pub fn write_rows(&mut self, rows: &[FeatureRow]) -> Result<()> {
        for row in rows {
            self.cells.clear();
            self.cells.extend(row.values.iter().map(|v| v.to_string()));
            self.writer.write_record(&self.cells).map_err(|e| csv_error(&self.path, e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Writes raw transactions, as produced by the generator.
pub fn write_transactions(path: &Path, schema: &InputSchema, rows: &[Transaction]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec![schema.edge_id.as_str(), schema.source.as_str(), schema.target.as_str(), schema.timestamp.as_str()];
    header.extend(schema.attributes.iter().map(String::as_str));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let mut cells = Vec::new();
    for t in rows {
        cells.clear();
        cells.push(t.edge_id.to_string());
        cells.push(t.source.clone());
        cells.push(t.target.clone());
        cells.push(t.timestamp.to_string());
        cells.extend(t.attributes.iter().map(|a| a.to_string()));
        w.write_record(&cells).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reader(text: &'static str) -> Result<TransactionReader> {
        TransactionReader::from_reader(Box::new(text.as_bytes()), Path::new("mem"), &InputSchema::default(), TimeFormat::Iso)
    }

    #[test]
    fn reads_in_batches() {
        let mut r = reader("EdgeID,SourceAccountId,DestAccountId,Timestamp,Amount\n1,a,b,10,5.5\n2,b,c,11,1\n3,c,a,12,2\n")
            .unwrap();
        assert_eq!(r.next_batch(2).unwrap().len(), 2);
        let last = r.next_batch(2).unwrap();
        assert_eq!(last, vec![Transaction::new(3, "c", "a", 12, vec![2.0])]);
        assert!(r.next_batch(2).unwrap().is_empty());
    }

    #[test]
    fn column_order_is_free() {
        let mut r = reader("Amount,Timestamp,DestAccountId,SourceAccountId,EdgeID,Extra\n7,100,b,a,9,x\n").unwrap();
        assert_eq!(r.read_all().unwrap(), vec![Transaction::new(9, "a", "b", 100, vec![7.0])]);
    }

    #[test]
    fn missing_column_is_data_error() {
        assert!(matches!(reader("EdgeID,SourceAccountId,Timestamp,Amount\n"), Err(CliError::Data(_))));
    }

    #[test]
    fn bad_values_report_line() {
        let mut r = reader("EdgeID,SourceAccountId,DestAccountId,Timestamp,Amount\n1,a,b,10,abc\n").unwrap();
        let err = r.read_all().unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn iso_timestamps() {
        assert_eq!(parse_timestamp("2022-09-01 00:00:10", TimeFormat::Iso), Some(1_661_990_410));
        assert_eq!(parse_timestamp("2022/09/01 00:01", TimeFormat::Iso), Some(1_661_990_460));
        assert_eq!(parse_timestamp("2022-09-01T02:00:10+02:00", TimeFormat::Iso), Some(1_661_990_410));
        assert_eq!(parse_timestamp("2022-09-01 00:00:10", TimeFormat::Epoch), None);
        assert_eq!(parse_timestamp(" 42 ", TimeFormat::Epoch), Some(42));
    }
}
