//! `timestamp,meter_id,value` CSV files. An empty value is a missing sample.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::DateTime;

use super::TimeSeries;
use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["timestamp", "meter_id", "value"];

/// Step assumed for single-row meters, where it cannot be inferred.
const DEFAULT_STEP: i64 = 3600;

pub fn write_csv<W: Write>(out: W, meters: &BTreeMap<String, TimeSeries>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for (id, s) in meters {
        for (k, v) in s.samples().iter().enumerate() {
            let value = v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([s.timestamp(k).to_string().as_str(), id, &value])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_string(meters: &BTreeMap<String, TimeSeries>) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, meters)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_csv_str(text: &str) -> Result<BTreeMap<String, TimeSeries>> {
    read_csv(text.as_bytes())
}

pub fn read_csv_path(path: &Path) -> Result<BTreeMap<String, TimeSeries>> {
    let f = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(f)
}

/// Parses meter readings, grouping rows by `meter_id`.
///
/// Rows of one meter must be in ascending, evenly spaced timestamp order.
pub fn read_csv<R: Read>(input: R) -> Result<BTreeMap<String, TimeSeries>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse(format!(
            "expected header `timestamp,meter_id,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows: BTreeMap<String, Vec<(i64, Option<f64>)>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("line {line}: expected 3 fields")));
        }
        let ts = parse_timestamp(&rec[0])
            .ok_or_else(|| Error::Parse(format!("line {line}: bad timestamp `{}`", &rec[0])))?;
        let value = match &rec[2] {
            "" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line}: bad value `{v}`")))?,
            ),
        };
        rows.entry(rec[1].to_string()).or_default().push((ts, value));
    }

    rows.into_iter()
        .map(|(id, readings)| {
            let start = readings[0].0;
            let step = if readings.len() > 1 {
                readings[1].0 - start
            } else {
                DEFAULT_STEP
            };
            for (k, (ts, _)) in readings.iter().enumerate() {
                if *ts != start + k as i64 * step {
                    return Err(Error::Parse(format!(
                        "meter {id}: timestamp {ts} breaks the uniform step {step}"
                    )));
                }
            }
            let s = TimeSeries::new(start, step, readings.into_iter().map(|(_, v)| v).collect())
                .map_err(|e| Error::Parse(format!("meter {id}: {e}")))?;
            Ok((id, s))
        })
        .collect()
}

fn parse_timestamp(field: &str) -> Option<i64> {
    if let Ok(secs) = field.parse::<i64>() {
        return Some(secs);
    }
    DateTime::parse_from_rfc3339(field)
        .ok()
        .map(|dt| dt.timestamp())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
