//! Path and drift-curve CSV files.

use std::path::Path;

use lldrift_core::{DriftEstimate, ObservedPath, StableParams};

use crate::report::{format_opt, format_real};
use crate::Error;

pub const PATH_HEADER: [&str; 3] = ["i", "t", "x"];
pub const CURVE_HEADER: [&str; 6] = ["x", "estimate", "method", "h", "degenerate", "denominator"];

/// One row `i,t,x` per observation.
pub fn write_path(path: &Path, p: &ObservedPath) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    w.write_record(PATH_HEADER).map_err(|e| Error::io(path, e))?;
    for (i, x) in p.x.iter().enumerate() {
        w.write_record([i.to_string(), format_real(p.time(i)), format_real(*x)])
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a path file. Δ is taken from the time column, which must be
/// equispaced (relative tolerance 1e-9).
pub fn read_path(path: &Path, noise: StableParams, model_name: &str) -> Result<ObservedPath, Error> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let header = r.headers().map_err(|e| Error::io(path, e))?.clone();
    if header.iter().ne(PATH_HEADER) {
        return Err(Error::Format(format!("{}: expected header `i,t,x`", path.display())));
    }
    let mut t = Vec::new();
    let mut x = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::io(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let parse = |s: &str| -> Result<f64, Error> {
            s.parse()
                .map_err(|_| Error::Format(format!("{}:{line}: `{s}` is not a number", path.display())))
        };
        t.push(parse(&row[1])?);
        x.push(parse(&row[2])?);
    }
    if t.len() < 2 {
        return Err(Error::Format(format!(
            "{}: need at least two observations",
            path.display()
        )));
    }
    let delta = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    for (i, w) in t.windows(2).enumerate() {
        if ((w[1] - w[0]) - delta).abs() > 1e-9 * delta.abs().max(1.0) {
            return Err(Error::Format(format!(
                "{}: observation times are not equispaced at row {}",
                path.display(),
                i + 1
            )));
        }
    }
    Ok(ObservedPath::from_observations(x, delta, noise, model_name)?)
}

/// `x,estimate,method,h,degenerate,denominator`; degenerate rows leave the
/// estimate empty.
pub fn write_curve(path: &Path, rows: &[DriftEstimate]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    w.write_record(CURVE_HEADER).map_err(|e| Error::io(path, e))?;
    for d in rows {
        w.write_record([
            format_real(d.x),
            format_opt(d.estimate),
            d.method.name().to_string(),
            format_real(d.h),
            d.degenerate.to_string(),
            format_real(d.denominator),
        ])
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
