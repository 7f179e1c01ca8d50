use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Relative residual norm below which a design column counts as a linear
/// combination of the ones before it.
const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    /// `intercept`, the input columns, then `name^2` for each squared term.
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub df: usize,
}

impl OlsFit {
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.coefficients[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticOptimum {
    pub x: f64,
    pub is_maximum: bool,
}

/// Vertex of the fitted parabola in `column`, holding the other terms fixed.
/// `None` when the column has no squared term or its coefficient is zero.
pub fn quadratic_optimum(fit: &OlsFit, column: &str) -> Option<QuadraticOptimum> {
    let b1 = fit.coefficient(column)?;
    let b2 = fit.coefficient(&format!("{column}^2"))?;
    if b2 == 0.0 {
        return None;
    }
    Some(QuadraticOptimum {
        x: -b1 / (2.0 * b2),
        is_maximum: b2 < 0.0,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inverse of an upper-triangular matrix by back substitution.
fn invert_upper(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = r.len();
    let mut inv = vec![vec![0.0; p]; p];
    for col in 0..p {
        for i in (0..=col).rev() {
            let e = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (i + 1..=col).map(|k| r[i][k] * inv[k][col]).sum();
            inv[i][col] = (e - s) / r[i][i];
        }
    }
    inv
}

/// Least squares with an intercept, solved through a modified Gram-Schmidt
/// QR of the design. Columns named in `quadratic_terms` also get a squared
/// copy. p-values are two-sided t-tests on `n − p` degrees of freedom.
pub fn ols(y: &[f64], x: &FeatureMatrix, quadratic_terms: &[&str]) -> Result<OlsFit> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(Error::param(format!("response has {} values, design has {n} rows", y.len())));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut terms = vec!["intercept".to_string()];
    let mut cols = vec![vec![1.0; n]];
    for j in 0..x.n_cols() {
        terms.push(x.columns[j].clone());
        cols.push(x.column(j));
    }
    for name in quadratic_terms {
        let j = x.column_index(name).ok_or_else(|| Error::UnknownFeature {
            name: name.to_string(),
            available: x.columns.clone(),
        })?;
        terms.push(format!("{name}^2"));
        cols.push(x.column(j).iter().map(|v| v * v).collect());
    }
    let p = cols.len();
    if n <= p {
        return Err(Error::Precondition(format!(
            "regression needs more rows than terms: {n} rows, {p} terms"
        )));
    }

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut r = vec![vec![0.0; p]; p];
    for (j, col) in cols.iter().enumerate() {
        let norm0 = dot(col, col).sqrt();
        let mut v = col.clone();
        for (i, qi) in q.iter().enumerate() {
            r[i][j] = dot(qi, &v);
            v.iter_mut().zip(qi).for_each(|(a, b)| *a -= r[i][j] * b);
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= COLLINEAR_TOL * norm0.max(1.0) {
            // col = Σ r[i][j] q_i, and q = X_prev R_prev⁻¹, so the weights
            // on the earlier columns are R_prev⁻¹ r[..j][j].
            let head: Vec<Vec<f64>> = r[..j].iter().map(|row| row[..j].to_vec()).collect();
            let inv = invert_upper(&head);
            let depends_on = (0..j)
                .filter(|&a| (a..j).map(|b| inv[a][b] * r[b][j]).sum::<f64>().abs() > 1e-8)
                .map(|a| terms[a].clone())
                .collect();
            return Err(Error::Singular {
                column: terms[j].clone(),
                depends_on,
            });
        }
        r[j][j] = norm;
        q.push(v.into_iter().map(|a| a / norm).collect());
    }

    let qty: Vec<f64> = q.iter().map(|qi| dot(qi, y)).collect();
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| r[i][k] * beta[k]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }
    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    let ssr = dot(&residuals, &residuals);
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst == 0.0 {
        return Err(Error::Precondition("response is constant".into()));
    }
    let df = n - p;
    let sigma2 = ssr / df as f64;
    let rinv = invert_upper(&r);
    let std_errors: Vec<f64> = (0..p)
        .map(|i| (sigma2 * rinv[i].iter().map(|v| v * v).sum::<f64>()).sqrt())
        .collect();
    let t_values: Vec<f64> = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| if *se > 0.0 { b / se } else { f64::INFINITY.copysign(*b) })
        .collect();
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    let p_values = t_values
        .iter()
        .map(|t| if t.is_finite() { (2.0 * dist.sf(t.abs())).min(1.0) } else { 0.0 })
        .collect();
    Ok(OlsFit {
        terms,
        coefficients: beta,
        std_errors,
        t_values,
        p_values,
        r_squared: 1.0 - ssr / sst,
        residuals,
        df,
    })
}
