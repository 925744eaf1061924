//! Instances fitted to closing-price series.
//!
//! Each series is rescaled to `[0, 10]`, fitted with a piecewise-constant
//! least-squares model, and every segment level becomes the mean of a
//! shifted Pareto arm. The epochs of the instance are cut at the union of the
//! per-arm breakpoints.

use std::path::Path;

use super::distributions::make_shifted_pareto;
use super::instance::InstanceSpec;
use super::segmentation::fit_piecewise_constant;
use crate::error::{Error, Result};
use crate::estimators::HeavyTailParams;

/// Target range of the rescaled prices.
pub const PRICE_RANGE: (f64, f64) = (0.0, 10.0);

/// Reads one numeric column from a delimited file with a header row.
pub fn load_price_csv(path: &Path, column: &str, delimiter: u8) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path)?;
    read_price_column(file, column, delimiter)
}

pub fn read_price_column<R: std::io::Read>(reader: R, column: &str, delimiter: u8) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = rec.get(idx).unwrap_or("").trim();
        let value: f64 = cell.parse().map_err(|_| Error::Parse {
            line,
            message: format!("{column:?} cell {cell:?} is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse { line, message: format!("{column:?} cell {cell:?} is not finite") });
        }
        out.push(value);
    }
    Ok(out)
}

/// Affine map of `series` onto `[lo, hi]`; a constant series maps to `lo`.
pub fn rescale(series: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let (min, max) = crate::estimators::min_max(series);
    if !(max > min) {
        return vec![lo; series.len()];
    }
    series.iter().map(|x| lo + (x - min) / (max - min) * (hi - lo)).collect()
}

/// Piecewise-stationary Pareto instance from price series of equal length.
pub fn instance_from_prices(
    series: &[Vec<f64>],
    segment_counts: &[usize],
    ht: HeavyTailParams,
    pareto_shape: f64,
) -> Result<InstanceSpec> {
    if series.is_empty() {
        return Err(Error::EmptyInput);
    }
    if series.len() != segment_counts.len() {
        return Err(Error::InvalidParameter(format!(
            "{} series but {} segment counts",
            series.len(),
            segment_counts.len()
        )));
    }
    let horizon = series[0].len();
    if let Some(i) = series.iter().position(|s| s.len() != horizon) {
        return Err(Error::InvalidParameter(format!("series {i} has a different length")));
    }
    let mut fits = Vec::with_capacity(series.len());
    for (s, &c) in series.iter().zip(segment_counts) {
        let scaled = rescale(s, PRICE_RANGE.0, PRICE_RANGE.1);
        fits.push(fit_piecewise_constant(&scaled, c)?);
    }
    let mut cuts: Vec<usize> = fits.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
    cuts.sort_unstable();
    cuts.dedup();
    // epoch j starts at element `starts[j]` (0-based)
    let starts: Vec<usize> = std::iter::once(0).chain(cuts.iter().copied()).collect();
    let mut arms = Vec::with_capacity(starts.len());
    for &start in &starts {
        let mut row = Vec::with_capacity(fits.len());
        for f in &fits {
            let seg = f.breakpoints.partition_point(|&b| b <= start);
            row.push(make_shifted_pareto(f.levels[seg], &ht, pareto_shape)?);
        }
        arms.push(row);
    }
    let breakpoints = cuts.iter().map(|&c| c as u64).collect();
    InstanceSpec::new(series.len(), horizon as u64, breakpoints, arms, ht)
}
