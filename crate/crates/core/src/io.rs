//! CSV readers and writers for signals and datasets.
//!
//! Formats are plain and deterministic: floats print in shortest
//! round-trip form, rows end with `\n`, and readers reject anything that
//! does not parse back exactly as a finite number.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::SyntheticDataset;
use crate::error::{Error, Result};
use crate::signal::TemporalSignal;

/// One single-batch signal as `channel,t0,t1,...` rows, one per channel.
pub fn signal_to_csv(x: &TemporalSignal) -> Result<String> {
    if x.batch() != 1 {
        return Err(Error::usage(format!(
            "signal CSV holds one sequence, got batch {}",
            x.batch()
        )));
    }
    let mut out = String::from("channel");
    for t in 0..x.len() {
        write!(out, ",t{t}").expect("string write");
    }
    out.push('\n');
    for c in 0..x.channels() {
        write!(out, "{c}").expect("string write");
        for &v in x.row(0, c) {
            write!(out, ",{v}").expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_signal_csv(path: &Path, x: &TemporalSignal) -> Result<()> {
    fs::write(path, signal_to_csv(x)?)?;
    Ok(())
}

pub fn signal_from_csv(text: &str) -> Result<TemporalSignal> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format("signal CSV is empty"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"channel") {
        return Err(Error::format("signal CSV header must start with 'channel'"));
    }
    for (i, c) in cols[1..].iter().enumerate() {
        if *c != format!("t{i}") {
            return Err(Error::format(format!("expected column 't{i}', found '{c}'")));
        }
    }
    let t_len = cols.len() - 1;
    if t_len == 0 {
        return Err(Error::format("signal CSV needs at least one time column"));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let ch: usize = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::format(format!("row {}: bad channel index", line_no + 2)))?;
        if ch != rows.len() {
            return Err(Error::format(format!(
                "row {}: channels must appear in order, expected {}, found {ch}",
                line_no + 2,
                rows.len()
            )));
        }
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::format(format!("row {}: bad number '{f}'", line_no + 2)))
                    .and_then(|v| {
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(Error::format(format!("row {}: non-finite value", line_no + 2)))
                        }
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != t_len {
            return Err(Error::format(format!(
                "row {}: expected {t_len} values, found {}",
                line_no + 2,
                values.len()
            )));
        }
        rows.push(values);
    }
    TemporalSignal::from_rows(&rows)
}

pub fn read_signal_csv(path: &Path) -> Result<TemporalSignal> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    signal_from_csv(&text)
}

/// Dataset export: one row per `(sample, channel)` with the label repeated,
/// columns `sample_id,channel,label,t0,...`.
pub fn dataset_to_csv(ds: &SyntheticDataset) -> String {
    let t_len = ds.samples.first().map(|s| s.signal.len()).unwrap_or(0);
    let mut out = String::from("sample_id,channel,label");
    for t in 0..t_len {
        write!(out, ",t{t}").expect("string write");
    }
    out.push('\n');
    for (i, sample) in ds.samples.iter().enumerate() {
        for c in 0..sample.signal.channels() {
            write!(out, "{i},{c},{}", sample.label).expect("string write");
            for &v in sample.signal.row(0, c) {
                write!(out, ",{v}").expect("string write");
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_dataset_csv(path: &Path, ds: &SyntheticDataset) -> Result<()> {
    fs::write(path, dataset_to_csv(ds))?;
    Ok(())
}
