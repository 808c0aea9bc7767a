//! Readers for survival data, constraint matrices, grids and study configs.

use std::fs;
use std::path::Path;

use addhaz_core::cone::full_constraint_cone;
use addhaz_core::{ConstraintCone, Dataset, SimConfig, SubjectRecord};

use crate::error::{CliError, Result};

/// Column selection for [`load_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Columns {
    pub time: String,
    pub status: String,
    /// Covariate columns in order; empty selects every other column.
    pub covariates: Vec<String>,
}

impl Default for Columns {
    fn default() -> Self {
        Columns { time: "time".into(), status: "status".into(), covariates: Vec::new() }
    }
}

fn find_column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Config(format!("{}: no column named `{name}`", path.display())))
}

/// Reads a CSV file with a header row. Covariates are returned on their raw
/// scale and rows keep their file order.
pub fn load_dataset(path: &Path, columns: &Columns) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::parse(path, e))?.clone();
    let time_idx = find_column(&headers, &columns.time, path)?;
    let status_idx = find_column(&headers, &columns.status, path)?;
    let cov: Vec<(usize, String)> = if columns.covariates.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != time_idx && i != status_idx)
            .map(|(i, h)| (i, h.to_string()))
            .collect()
    } else {
        columns
            .covariates
            .iter()
            .map(|c| find_column(&headers, c, path).map(|i| (i, c.clone())))
            .collect::<Result<_>>()?
    };

    let mut records = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let line = n + 2;
        let row = row.map_err(|e| CliError::parse(path, e))?;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = row.get(idx).unwrap_or("");
            let message = if raw.is_empty() { "empty cell".to_string() } else { format!("cannot parse `{raw}` as a number") };
            raw.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| CliError::Cell { path: path.into(), row: line, column: name.into(), message })
        };
        let time = cell(time_idx, &columns.time)?;
        let event = match cell(status_idx, &columns.status)? {
            0.0 => false,
            1.0 => true,
            s => {
                return Err(CliError::Cell {
                    path: path.into(),
                    row: line,
                    column: columns.status.clone(),
                    message: format!("status must be 0 or 1, got {s}"),
                })
            }
        };
        let covariates = cov.iter().map(|(i, name)| cell(*i, name)).collect::<Result<Vec<_>>>()?;
        records.push(SubjectRecord::new(time, event, covariates));
    }
    let names = cov.into_iter().map(|(_, n)| n).collect();
    Ok(Dataset::new(records, names)?)
}

/// Constraint matrix from a CSV of rows with `p + 1` entries, or the keyword
/// `full` for the unit-cube vertex cone. A non-numeric first line is taken
/// as a header and skipped.
pub fn load_cone(spec: &str, p: usize) -> Result<ConstraintCone> {
    if spec == "full" {
        return Ok(full_constraint_cone(p)?);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if n == 0 => continue,
            Err(e) => {
                return Err(CliError::Cell { path: path.into(), row: n + 1, column: String::new(), message: e.to_string() })
            }
        }
    }
    if let Some(row) = rows.iter().find(|r| r.len() != p + 1) {
        return Err(CliError::Config(format!(
            "{}: constraint rows need {} entries (intercept plus {p} covariates), found {}",
            path.display(),
            p + 1,
            row.len()
        )));
    }
    Ok(ConstraintCone::new(rows)?)
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("invalid {what} `{s}`")))
}

/// Comma-separated numbers.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|v| parse_number(v, "number")).collect()
}

/// `start:stop:step` (inclusive of `stop` up to rounding), a comma list, or
/// a single time.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) =
                (parse_number(start, "grid start")?, parse_number(stop, "grid stop")?, parse_number(step, "grid step")?);
            if step.is_nan() || step <= 0.0 || stop.is_nan() || stop < start {
                return Err(CliError::Config(format!("grid `{s}` needs step > 0 and stop >= start")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [_] => parse_vector(s)?,
        _ => return Err(CliError::Config(format!("grid `{s}` is not start:stop:step"))),
    };
    if grid.is_empty() {
        return Err(CliError::Config("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Config(format!("grid `{s}` is not sorted")));
    }
    Ok(grid)
}

/// Applies `key = value` lines to `cfg`. Blank lines and `#` comments are
/// ignored; list values are comma-separated.
pub fn apply_config_text(cfg: &mut SimConfig, text: &str, origin: &Path) -> Result<()> {
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| CliError::Config(format!("{} line {}: {m}", origin.display(), n + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{key}` needs a nonnegative integer")));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("`{key}` needs a number")));
        match key {
            "n" => cfg.n = int(value)? as usize,
            "reps" => cfg.reps = int(value)? as usize,
            "seed" | "master_seed" => cfg.master_seed = int(value)?,
            "censor_low" => cfg.censor_low = num(value)?,
            "censor_high" => cfg.censor_high = num(value)?,
            "beta_slopes" | "beta" => cfg.beta_slopes = parse_vector(value).map_err(|e| bad(e.to_string()))?,
            "target_x" => cfg.target_x = parse_vector(value).map_err(|e| bad(e.to_string()))?,
            "checkpoints" => cfg.checkpoints = parse_vector(value).map_err(|e| bad(e.to_string()))?,
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }
    Ok(())
}

pub fn load_sim_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = SimConfig::default();
    apply_config_text(&mut cfg, &text, path)?;
    Ok(cfg)
}
