use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Named numeric columns over identified rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMatrix {
    pub row_ids: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major values.
    pub values: Vec<Vec<f64>>,
    pub standardized: bool,
}

impl FeatureMatrix {
    pub fn new(row_ids: Vec<String>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c) {
                return Err(Error::param(format!("duplicate column `{c}`")));
            }
        }
        if row_ids.len() != values.len() {
            return Err(Error::param("row id count differs from row count"));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::param(format!("row {i} has {} values, expected {}", row.len(), columns.len())));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::param(format!("non-finite value in row {i}, column `{}`", columns[j])));
            }
        }
        Ok(FeatureMatrix {
            row_ids,
            columns,
            values,
            standardized: false,
        })
    }

    /// Reads a CSV whose first column is the row id and whose remaining
    /// columns are numeric features.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
        let headers = rdr.headers()?.clone();
        let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            ids.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line_no: i + 2,
                        reason: format!("`{s}` is not a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        Self::new(ids, columns, values)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.row_ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))
    }

    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Keeps the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<FeatureMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n).ok_or_else(|| Error::UnknownFeature {
                    name: n.to_string(),
                    available: self.columns.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            row_ids: self.row_ids.clone(),
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            values: self.values.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            standardized: false,
        })
    }

    /// Column means and sample standard deviations.
    pub fn column_moments(&self) -> Vec<(f64, f64)> {
        let n = self.n_rows() as f64;
        (0..self.n_cols())
            .map(|j| {
                let col = self.column(j);
                let m = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
                (m, var.sqrt())
            })
            .collect()
    }

    /// z-scores every column with the sample standard deviation.
    pub fn standardize(&self) -> Result<FeatureMatrix> {
        if self.n_rows() < 2 {
            return Err(Error::Precondition("standardizing needs at least 2 rows".into()));
        }
        let moments = self.column_moments();
        for (j, &(_, sd)) in moments.iter().enumerate() {
            if !(sd > 0.0) {
                return Err(Error::ConstantColumn(self.columns[j].clone()));
            }
        }
        Ok(FeatureMatrix {
            row_ids: self.row_ids.clone(),
            columns: self.columns.clone(),
            values: self
                .values
                .iter()
                .map(|r| r.iter().zip(&moments).map(|(x, (m, sd))| (x - m) / sd).collect())
                .collect(),
            standardized: true,
        })
    }
}
