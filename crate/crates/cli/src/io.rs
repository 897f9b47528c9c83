//! File formats: `groups.csv`, `labels.csv`, `params.json` and JSON output.
//!
//! All text is UTF-8 with LF line endings. Nodes and hub labels are 1-based
//! in files; label 0 is the null component.

use std::fs;
use std::path::Path;

use hubnet_core::{GroupedData, LabelAssignment, Params, Variant};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn write_groups(path: &Path, data: &GroupedData) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;
    let header: Vec<String> = (1..=data.n()).map(|j| format!("node_{j}")).collect();
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for row in data.rows() {
        w.write_record(row.iter().map(|g| if *g == 1 { "1" } else { "0" }))
            .map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a group matrix. Errors name the 1-based data row.
pub fn read_groups(path: &Path) -> CliResult<GroupedData> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;
    let header = r.headers().map_err(|e| CliError::io(path, e))?.clone();
    let n = header.len();
    for (j, name) in header.iter().enumerate() {
        if name.trim() != format!("node_{}", j + 1) {
            return Err(CliError::invalid(format!(
                "{}: header column {} is {name:?}, expected \"node_{}\"",
                path.display(),
                j + 1,
                j + 1
            )));
        }
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let row_no = i + 1;
        let record = record
            .map_err(|e| CliError::invalid(format!("{}: row {row_no}: {e}", path.display())))?;
        if record.len() != n {
            return Err(CliError::invalid(format!(
                "{}: row {row_no} has {} entries, expected {n}",
                path.display(),
                record.len()
            )));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, v)| match v.trim() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(CliError::invalid(format!(
                    "{}: row {row_no}, node_{}: {other:?} is not 0 or 1",
                    path.display(),
                    j + 1
                ))),
            })
            .collect::<CliResult<Vec<u8>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::invalid(format!("{}: no groups", path.display())));
    }
    Ok(GroupedData::from_rows(n, &rows)?)
}

pub fn write_labels(path: &Path, labels: &LabelAssignment) -> CliResult<()> {
    let mut out = String::from("z\n");
    for z in labels.external() {
        out.push_str(&z.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn read_labels(path: &Path, variant: Variant, n_leaders: usize) -> CliResult<LabelAssignment> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let header = r.headers().map_err(|e| CliError::io(path, e))?;
    if header.len() != 1 || header[0].trim() != "z" {
        return Err(CliError::invalid(format!(
            "{}: expected a single column \"z\"",
            path.display()
        )));
    }
    let mut labels = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record
            .map_err(|e| CliError::invalid(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        let z = record[0].trim().parse::<i64>().map_err(|_| {
            CliError::invalid(format!(
                "{}: row {}: {:?} is not an integer",
                path.display(),
                i + 1,
                &record[0]
            ))
        })?;
        labels.push(z);
    }
    LabelAssignment::from_external(variant, n_leaders, &labels)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// On-disk parameter set. Row 0 of `A` is `pi` for the null variant.
#[derive(Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub variant: Variant,
    #[serde(rename = "n_L")]
    pub n_leaders: usize,
    pub n: usize,
    pub rho: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
}

impl ParamsFile {
    pub fn from_params(p: &Params) -> Self {
        Self {
            variant: p.variant(),
            n_leaders: p.n_leaders(),
            n: p.n(),
            rho: p.rho().to_vec(),
            a: matrix_rows(p.a()),
        }
    }

    pub fn into_params(self) -> CliResult<Params> {
        let k = self.variant.components(self.n_leaders);
        if self.a.len() != k || self.rho.len() != k {
            return Err(CliError::invalid(format!(
                "a {} model with n_L = {} needs {k} rows of A and {k} entries of rho, got {} and {}",
                self.variant,
                self.n_leaders,
                self.a.len(),
                self.rho.len()
            )));
        }
        if let Some(i) = self.a.iter().position(|r| r.len() != self.n) {
            return Err(CliError::invalid(format!(
                "row {i} of A has {} entries, expected n = {}",
                self.a[i].len(),
                self.n
            )));
        }
        let a = Array2::from_shape_vec((k, self.n), self.a.into_iter().flatten().collect())
            .map_err(|e| CliError::invalid(e.to_string()))?;
        Ok(Params::new(self.variant, self.rho, a)?)
    }
}

pub fn matrix_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn read_params(path: &Path) -> CliResult<Params> {
    let file: ParamsFile = read_json(path)?;
    file.into_params().map_err(|e| CliError {
        message: format!("{}: {}", path.display(), e.message),
        ..e
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    fs::write(path, to_json(value)).map_err(|e| CliError::io(path, e))
}
