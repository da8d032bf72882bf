//! CSV ingestion for joint tables, covariance matrices and sample files.
//!
//! Joint pmf files are rectangular numeric CSV (rows = X atoms, columns = Y
//! atoms). A first row containing any non-numeric cell is a header of Y
//! labels. A first column is read as X labels when some data row starts with
//! a non-numeric cell, or when the header's first cell is empty.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::joint::DiscreteJoint;
use crate::sample::{Column, SampleTable};

fn records<R: Read>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn is_number(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

fn parse_cell(s: &str, row: usize, col: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("row {row}, column {col}: {s:?} is not a number")))
}

fn numeric_block(rows: &[Vec<String>], skip_col: usize, row_offset: usize) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let width = rows[0].len();
    if width <= skip_col {
        return Err(Error::EmptyMatrix);
    }
    let mut data = Vec::with_capacity(rows.len() * (width - skip_col));
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::RaggedMatrix {
                row: r + row_offset,
                found: row.len(),
                expected: width,
            });
        }
        for (c, cell) in row.iter().enumerate().skip(skip_col) {
            data.push(parse_cell(cell, r + row_offset, c)?);
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), width - skip_col, &data))
}

pub fn read_joint<R: Read>(reader: R) -> Result<DiscreteJoint> {
    let rows = records(reader)?;
    if rows.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let has_header = rows[0].iter().any(|c| !is_number(c));
    let (header, data) = if has_header {
        (Some(&rows[0]), &rows[1..])
    } else {
        (None, &rows[..])
    };
    let has_label_col = data.iter().any(|r| r.first().is_some_and(|c| !is_number(c)))
        || header.is_some_and(|h| h.first().is_some_and(|c| c.is_empty()));
    let skip = usize::from(has_label_col);
    let probs = numeric_block(data, skip, usize::from(has_header))?;
    let labels_x = has_label_col.then(|| data.iter().map(|r| r[0].clone()).collect::<Vec<_>>());
    let labels_y = match header {
        Some(h) => {
            if h.len() != probs.ncols() + skip {
                return Err(Error::Parse(format!(
                    "header has {} cells, data rows have {}",
                    h.len(),
                    probs.ncols() + skip
                )));
            }
            Some(h[skip..].to_vec())
        }
        None => None,
    };
    DiscreteJoint::new(probs)?.with_labels(labels_x, labels_y)
}

pub fn read_joint_path(path: impl AsRef<Path>) -> Result<DiscreteJoint> {
    read_joint(File::open(path)?)
}

/// Square numeric matrix; a non-numeric first row is skipped as a header.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let rows = records(reader)?;
    if rows.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let has_header = rows[0].iter().any(|c| !is_number(c));
    let data = if has_header { &rows[1..] } else { &rows[..] };
    numeric_block(data, 0, usize::from(has_header))
}

pub fn read_matrix_path(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_matrix(File::open(path)?)
}

/// Columns of a sample file, each typed numeric if every cell parses.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    pub names: Vec<String>,
    pub columns: Vec<Column>,
}

impl SampleFrame {
    /// Column index by header name, falling back to a 0-based index.
    pub fn resolve(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.names.iter().position(|n| n == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.columns.len() => Ok(i),
            _ => Err(Error::InvalidArgument(format!("no column named {key:?}"))),
        }
    }

    pub fn select(&self, x: &str, ys: &[&str]) -> Result<SampleTable> {
        let xi = self.resolve(x)?;
        let ys = ys
            .iter()
            .map(|k| self.resolve(k).map(|i| self.columns[i].clone()))
            .collect::<Result<Vec<_>>>()?;
        SampleTable::new(self.columns[xi].clone(), ys)
    }
}

pub fn read_samples<R: Read>(reader: R, has_header: bool) -> Result<SampleFrame> {
    let rows = records(reader)?;
    let (names, data) = match (has_header, rows.split_first()) {
        (true, Some((h, rest))) => (h.clone(), rest),
        (false, Some((first, _))) => ((0..first.len()).map(|i| i.to_string()).collect(), &rows[..]),
        (_, None) => return Err(Error::TooFewSamples(0)),
    };
    let width = names.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::with_capacity(data.len()); width];
    for (r, row) in data.iter().enumerate() {
        if row.len() != width {
            return Err(Error::RaggedMatrix {
                row: r + usize::from(has_header),
                found: row.len(),
                expected: width,
            });
        }
        for (c, cell) in row.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Parse(format!("missing value at row {r}, column {c}")));
            }
            cells[c].push(cell.clone());
        }
    }
    let columns = cells
        .into_iter()
        .map(|col| {
            let parsed: Option<Vec<f64>> = col.iter().map(|s| s.parse::<f64>().ok()).collect();
            match parsed {
                Some(v) => Column::Numeric(v),
                None => Column::Categorical(col),
            }
        })
        .collect();
    Ok(SampleFrame { names, columns })
}

pub fn read_samples_path(path: impl AsRef<Path>, has_header: bool) -> Result<SampleFrame> {
    read_samples(File::open(path)?, has_header)
}
