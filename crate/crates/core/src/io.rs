//! CSV file formats: long-form curve samples (`series_id,time,value`),
//! responses (`series_id,response`), single series (`time,value`), density
//! curves (`y,density`), cross-validation tables and rate-study tables.
//! Readers report the offending line on malformed input.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::bandwidth::{CvRow, HkCandidate};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::estimator::DensityCurveEstimate;
use crate::sample::{validate_sample, FunctionalSample};
use crate::simulate::RateStudyReport;

fn data_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::CsvData {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::FileFormat {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

fn open_reader(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<File>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format_err(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(format_err(
            path,
            format!(
                "expected header '{}', got '{}'",
                expected_header.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(reader)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_field(path: &Path, record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let line = record_line(record);
    let raw = record
        .get(idx)
        .ok_or_else(|| data_err(path, line, format!("missing {name} field")))?;
    raw.parse::<f64>().map_err(|_| {
        data_err(
            path,
            line,
            format!("cannot parse {name} '{raw}' as a number"),
        )
    })
}

/// Reads a long-form curve file plus a response file into a sample. Rows
/// must be grouped by series (sorted input satisfies this) with ascending
/// times; every series needs exactly one response.
pub fn read_sample(curves_path: &Path, responses_path: &Path) -> Result<FunctionalSample<f64>> {
    let mut reader = open_reader(curves_path, &["series_id", "time", "value"])?;

    let mut ids: Vec<String> = Vec::new();
    let mut series: Vec<(Vec<f64>, Vec<f64>, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| format_err(curves_path, e.to_string()))?;
        let line = record_line(&record);
        if record.len() != 3 {
            return Err(data_err(
                curves_path,
                line,
                format!("expected 3 fields, got {}", record.len()),
            ));
        }
        let id = record.get(0).unwrap().to_string();
        let time = parse_field(curves_path, &record, 1, "time")?;
        let value = parse_field(curves_path, &record, 2, "value")?;
        match ids.last() {
            Some(last) if *last == id => {}
            _ => {
                if ids.contains(&id) {
                    return Err(data_err(
                        curves_path,
                        line,
                        format!(
                            "series '{id}' reappears; rows must be sorted by (series_id, time)"
                        ),
                    ));
                }
                ids.push(id.clone());
                series.push((Vec::new(), Vec::new(), line));
            }
        }
        let current = series.last_mut().unwrap();
        if let Some(&prev) = current.0.last() {
            if time <= prev {
                return Err(data_err(
                    curves_path,
                    line,
                    format!("time {time} not increasing within series '{id}'"),
                ));
            }
        }
        current.0.push(time);
        current.1.push(value);
    }
    if ids.is_empty() {
        return Err(format_err(curves_path, "no data rows"));
    }

    let mut responses_by_id: Vec<(String, f64)> = Vec::new();
    let mut resp_reader = open_reader(responses_path, &["series_id", "response"])?;
    for record in resp_reader.records() {
        let record = record.map_err(|e| format_err(responses_path, e.to_string()))?;
        let line = record_line(&record);
        let id = record
            .get(0)
            .ok_or_else(|| data_err(responses_path, line, "missing series_id"))?
            .to_string();
        let response = parse_field(responses_path, &record, 1, "response")?;
        if responses_by_id.iter().any(|(other, _)| *other == id) {
            return Err(data_err(
                responses_path,
                line,
                format!("duplicate response for series '{id}'"),
            ));
        }
        responses_by_id.push((id, response));
    }

    let mut responses = Vec::with_capacity(ids.len());
    for id in &ids {
        match responses_by_id.iter().find(|(other, _)| other == id) {
            Some((_, r)) => responses.push(*r),
            None => {
                return Err(format_err(
                    responses_path,
                    format!("missing response for series '{id}'"),
                ))
            }
        }
    }
    if responses_by_id.len() != ids.len() {
        let extra = responses_by_id
            .iter()
            .find(|(id, _)| !ids.contains(id))
            .map(|(id, _)| id.clone())
            .unwrap_or_default();
        return Err(format_err(
            responses_path,
            format!("response for unknown series '{extra}'"),
        ));
    }

    let curves: Vec<Curve<f64>> = series
        .iter()
        .map(|(t, v, _)| Curve::new_unchecked(t.clone(), v.clone()))
        .collect();
    let sample = FunctionalSample::new_unchecked(curves, responses);
    if let Some(violation) = validate_sample(&sample).into_iter().next() {
        return Err(format_err(curves_path, violation.to_string()));
    }
    Ok(sample)
}

/// Reads a single series (`time,value`) as one curve; times must be
/// strictly increasing.
pub fn read_series(path: &Path) -> Result<Curve<f64>> {
    let mut reader = open_reader(path, &["time", "value"])?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let line = record_line(&record);
        let time = parse_field(path, &record, 0, "time")?;
        let value = parse_field(path, &record, 1, "value")?;
        if let Some(&prev) = times.last() {
            if time <= prev {
                return Err(data_err(path, line, format!("time {time} not increasing")));
            }
        }
        times.push(time);
        values.push(value);
    }
    Curve::new(times, values).map_err(|e| format_err(path, e.to_string()))
}

/// Writes a whole sample in the long-form curve format plus responses.
/// Series ids are zero-padded so the rows sort by `(series_id, time)`.
pub fn write_sample(
    curves_path: &Path,
    responses_path: &Path,
    sample: &FunctionalSample<f64>,
) -> Result<()> {
    let width = sample.n().to_string().len();
    let mut w = File::create(curves_path)?;
    writeln!(w, "series_id,time,value")?;
    for (i, curve) in sample.curves().iter().enumerate() {
        for (t, v) in curve.times().iter().zip(curve.values()) {
            writeln!(w, "s{i:0width$},{t},{v}")?;
        }
    }
    let mut w = File::create(responses_path)?;
    writeln!(w, "series_id,response")?;
    for (i, y) in sample.responses().iter().enumerate() {
        writeln!(w, "s{i:0width$},{y}")?;
    }
    Ok(())
}

/// Writes a density curve as `y,density` rows.
pub fn write_density_csv(path: &Path, estimate: &DensityCurveEstimate<f64>) -> Result<()> {
    let mut w = File::create(path)?;
    writeln!(w, "y,density")?;
    for (y, d) in estimate.y_grid.iter().zip(&estimate.density) {
        writeln!(w, "{y},{d}")?;
    }
    Ok(())
}

/// Writes the cross-validation table; the `h_k` column carries the fixed
/// bandwidth or the nearest-neighbour rank, disambiguated by `hk_kind`.
pub fn write_cv_csv(path: &Path, table: &[CvRow<f64>]) -> Result<()> {
    let mut w = File::create(path)?;
    writeln!(w, "h_k,h_h,score,excluded_folds,hk_kind")?;
    for row in table {
        let (kind, hk) = match row.hk {
            HkCandidate::Fixed(h) => ("fixed", h.to_string()),
            HkCandidate::KnnRank(k) => ("knn", k.to_string()),
        };
        let score = row.score.map(|s| s.to_string()).unwrap_or_default();
        writeln!(w, "{hk},{},{score},{},{kind}", row.hh, row.excluded_folds)?;
    }
    Ok(())
}

/// Writes the per-replication rate-study table
/// (`n,replication,abs_error,excluded`); excluded rows have an empty error.
pub fn write_rate_csv(path: &Path, report: &RateStudyReport<f64>) -> Result<()> {
    let mut w = File::create(path)?;
    writeln!(w, "n,replication,abs_error,excluded")?;
    for row in &report.rows {
        let err = row.abs_error.map(|e| e.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{err},{}", row.n, row.replication, row.excluded)?;
    }
    Ok(())
}
