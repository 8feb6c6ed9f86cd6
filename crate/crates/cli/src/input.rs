//! Two-column `x,y` input files on a uniform grid.

use std::path::Path;

use regdiff::{Grid64, SampledFunction64};

use crate::CliError;

/// Relative tolerance on the spacing of consecutive `x` values.
pub const SPACING_TOL: f64 = 1e-8;

/// Reads `x,y` rows. A first row that does not parse as two numbers is taken as
/// a header.
pub fn read_samples(path: &Path) -> Result<SampledFunction64, CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(io)?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(io)?;
        let parsed = parse_pair(&record);
        match parsed {
            Some((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            None if row == 0 => continue,
            None => {
                let line = record.position().map_or(row as u64 + 1, |p| p.line());
                return Err(CliError::Usage(format!(
                    "{}: line {line}: expected two numeric columns x,y",
                    path.display()
                )));
            }
        }
    }
    let grid = uniform_grid(&xs).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(i) = ys.iter().position(|y| !y.is_finite()) {
        return Err(CliError::Usage(format!("{}: non-finite y at data row {}", path.display(), i + 1)));
    }
    SampledFunction64::new(grid, ys).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_pair(record: &csv::StringRecord) -> Option<(f64, f64)> {
    if record.len() < 2 {
        return None;
    }
    let x = record.get(0)?.parse().ok()?;
    let y = record.get(1)?.parse().ok()?;
    Some((x, y))
}

/// Checks that `xs` is strictly increasing with constant spacing.
pub fn uniform_grid(xs: &[f64]) -> Result<Grid64, String> {
    let n = xs.len();
    if n < 3 {
        return Err(format!("need at least 3 samples, got {n}"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err("non-finite x value".into());
    }
    let (a, b) = (xs[0], xs[n - 1]);
    let h = (b - a) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err("x values must be strictly increasing".into());
    }
    for (i, w) in xs.windows(2).enumerate() {
        let dx = w[1] - w[0];
        if !(dx > 0.0) {
            return Err(format!("x values must be strictly increasing (rows {} and {})", i + 1, i + 2));
        }
        if (dx - h).abs() > SPACING_TOL * h {
            return Err(format!(
                "x values are not uniformly spaced (spacing {dx:e} between rows {} and {}, expected {h:e}); \
                 resample the data onto a uniform grid, e.g. by linear interpolation, before differentiating",
                i + 1,
                i + 2
            ));
        }
    }
    Grid64::uniform(a, b, n).map_err(|e| e.to_string())
}
