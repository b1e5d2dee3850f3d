//! Trace CSV v1: the on-disk sample format.
//!
//! ```text
//! # echo-lab trace v1
//! # command = simulate --model mims ...
//! # version = 0.1.0
//! # seed = 7
//! # y_unit = intensity
//! # delay_seconds = 2e-7
//! t_seconds,value,sigma
//! 1.0000000000000000e-7,9.9731...e-1,2.9919...e-2
//! ```
//!
//! `#` lines are comments; recognized keys (`y_unit`, `delay_seconds`, and
//! free-form provenance) round-trip through [`TimeSeries`] annotations. The
//! sigma column is present only when every point carries one. Numbers are
//! serialized with 17 significant digits in scientific notation with a `.`
//! decimal separator, so values survive a write/read cycle bit-exactly.

use crate::error::{Error, Result};
use crate::series::{SamplePoint, TimeSeries, ValueUnit};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

pub const MAGIC: &str = "# echo-lab trace v1";

/// Keys that map to [`TimeSeries`] annotations rather than provenance.
const META_KEYS: &[&str] = &["delay_seconds", "model", "schedule", "seed", "sweep"];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a series as trace CSV v1. `provenance` lines (key, value) go in
/// the header; the command line, seed and version belong there.
pub fn write_trace<W: Write>(
    out: &mut W,
    series: &TimeSeries,
    provenance: &[(String, String)],
) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    for (k, v) in provenance {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "# y_unit = {}", series.y_unit().tag())?;
    for (k, v) in series.meta() {
        writeln!(out, "# {k} = {v}")?;
    }
    let with_sigma = series.sigmas().is_some();
    if with_sigma {
        writeln!(out, "t_seconds,value,sigma")?;
    } else {
        writeln!(out, "t_seconds,value")?;
    }
    for p in series.points() {
        match (with_sigma, p.sigma) {
            (true, Some(s)) => writeln!(out, "{},{},{}", fmt(p.t), fmt(p.y), fmt(s))?,
            _ => writeln!(out, "{},{}", fmt(p.t), fmt(p.y))?,
        }
    }
    Ok(())
}

pub fn write_trace_file(
    path: &Path,
    series: &TimeSeries,
    provenance: &[(String, String)],
) -> Result<()> {
    let mut buf = Vec::new();
    write_trace(&mut buf, series, provenance)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Parse trace CSV v1. Recognized `#` keys become series annotations;
/// malformed rows report their 1-based line number.
pub fn read_trace<R: Read>(input: R) -> Result<TimeSeries> {
    let reader = BufReader::new(input);
    let mut y_unit = ValueUnit::Intensity;
    let mut meta: Vec<(String, String)> = Vec::new();
    let mut points: Vec<SamplePoint> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                let (k, v) = (k.trim(), v.trim());
                if k == "y_unit" {
                    y_unit = ValueUnit::parse(v).map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                } else if META_KEYS.contains(&k) {
                    meta.push((k.to_string(), v.to_string()));
                }
            }
            continue;
        }
        if trimmed.starts_with("t_seconds") {
            continue; // column header
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 or 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("cannot parse {what} `{s}`"),
            })
        };
        let t = parse(fields[0], "time")?;
        let y = parse(fields[1], "value")?;
        let sigma = if fields.len() == 3 {
            Some(parse(fields[2], "sigma")?)
        } else {
            None
        };
        points.push(SamplePoint { t, y, sigma });
    }

    if points.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no data rows".to_string(),
        });
    }
    let mut series = TimeSeries::new(points, y_unit)?;
    for (k, v) in meta {
        series.set_meta(&k, v);
    }
    Ok(series)
}

pub fn read_trace_file(path: &Path) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    read_trace(file)
}
