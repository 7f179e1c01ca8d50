use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaResult {
    pub columns: Vec<String>,
    /// One unit-length loading vector per component.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Component scores, one row per input row.
    pub projections: Vec<Vec<f64>>,
}

/// Principal components of the z-scored columns (the eigenvectors of the
/// correlation matrix), largest eigenvalue first. Each component is signed
/// so that its largest-magnitude loading is positive.
pub fn pca(m: &FeatureMatrix, n_components: usize) -> Result<PcaResult> {
    if m.n_rows() < 2 {
        return Err(Error::Precondition("PCA needs at least 2 rows".into()));
    }
    let p = m.n_cols();
    if n_components == 0 || n_components > p {
        return Err(Error::param(format!("n_components = {n_components} outside [1, {p}]")));
    }
    let z = m.standardize()?;
    let n = z.n_rows();
    let x = DMatrix::from_fn(n, p, |i, j| z.values[i][j]);
    let cov = (x.transpose() * &x) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();

    let mut components = Vec::with_capacity(n_components);
    let mut eigenvalues = Vec::with_capacity(n_components);
    for &c in order.iter().take(n_components) {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let lead = (0..p)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .expect("p >= 1");
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        eigenvalues.push(eig.eigenvalues[c].max(0.0));
    }
    let projections = z
        .values
        .iter()
        .map(|row| {
            components
                .iter()
                .map(|c| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult {
        columns: m.columns.clone(),
        explained_variance_ratio: eigenvalues.iter().map(|v| v / total).collect(),
        components,
        eigenvalues,
        projections,
    })
}
