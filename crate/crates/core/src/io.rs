//! File formats: headerless CSV matrices and JSON model and tree specs.
//!
//! Model JSON: `{"p": 3, "G0": [[..], ..], "basis": [[[..], ..], ..]}` with
//! row-major dense matrices. Tree JSON: `{"parent": [..], "leaves": [..]}`
//! with `-1` marking the root.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::covmodel::{LinearCovarianceModel, TreeSpec};
use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::Parse(format!("row {} has {} fields, expected {first}", i + 1, row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }
    Ok(rows)
}

/// A `p × p` symmetric matrix, one row per line.
pub fn parse_matrix_csv(text: &str) -> Result<SymmetricMatrix> {
    SymmetricMatrix::from_rows(&parse_rows(text)?)
}

pub fn read_matrix_csv(path: &Path) -> Result<SymmetricMatrix> {
    parse_matrix_csv(&std::fs::read_to_string(path)?)
}

pub fn matrix_to_csv(m: &SymmetricMatrix) -> String {
    m.rows()
        .iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// Observations as an `n × p` matrix, one observation per line.
pub fn parse_data_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows = parse_rows(text)?;
    let p = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), p, rows.into_iter().flatten()))
}

pub fn read_data_csv(path: &Path) -> Result<DMatrix<f64>> {
    parse_data_csv(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    p: usize,
    #[serde(rename = "G0")]
    g0: Vec<Vec<f64>>,
    basis: Vec<Vec<Vec<f64>>>,
}

fn square(rows: &[Vec<f64>], p: usize) -> Result<SymmetricMatrix> {
    let m = SymmetricMatrix::from_rows(rows)?;
    if m.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: m.dim() });
    }
    Ok(m)
}

pub fn parse_model_json(text: &str) -> Result<LinearCovarianceModel> {
    let spec: ModelJson = serde_json::from_str(text)?;
    // an empty G0 stands for the zero matrix
    let g0 = if spec.g0.is_empty() { SymmetricMatrix::zeros(spec.p) } else { square(&spec.g0, spec.p)? };
    let basis = spec.basis.iter().map(|g| square(g, spec.p)).collect::<Result<Vec<_>>>()?;
    LinearCovarianceModel::new(g0, basis)
}

pub fn read_model_json(path: &Path) -> Result<LinearCovarianceModel> {
    parse_model_json(&std::fs::read_to_string(path)?)
}

pub fn model_to_json(model: &LinearCovarianceModel) -> String {
    let spec = ModelJson {
        p: model.dim(),
        g0: model.g0().rows(),
        basis: model.basis().iter().map(SymmetricMatrix::rows).collect(),
    };
    serde_json::to_string_pretty(&spec).expect("plain numeric data serializes")
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeJson {
    parent: Vec<i64>,
    leaves: Vec<usize>,
}

pub fn parse_tree_json(text: &str) -> Result<TreeSpec> {
    let spec: TreeJson = serde_json::from_str(text)?;
    let parent = spec
        .parent
        .iter()
        .map(|&q| match q {
            -1 => Ok(None),
            q if q >= 0 => Ok(Some(q as usize)),
            q => Err(Error::InvalidTree(format!("parent index {q} is negative"))),
        })
        .collect::<Result<Vec<_>>>()?;
    TreeSpec::new(parent, spec.leaves)
}

pub fn read_tree_json(path: &Path) -> Result<TreeSpec> {
    parse_tree_json(&std::fs::read_to_string(path)?)
}
