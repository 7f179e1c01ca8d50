use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Product-moment correlation with a two-sided t-test on `n − 2` degrees of
/// freedom.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Correlation> {
    if a.len() != b.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 3 {
        return Err(Error::Precondition(format!("correlation needs at least 3 points, got {n}")));
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Precondition("correlation undefined for a zero-variance input".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { r, p_value, n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub columns: Vec<String>,
    pub r: Vec<Vec<f64>>,
    pub p_values: Vec<Vec<f64>>,
}

pub fn correlation_matrix(m: &FeatureMatrix) -> Result<CorrelationMatrix> {
    let p = m.n_cols();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| m.column(j)).collect();
    for (j, c) in cols.iter().enumerate() {
        if c.iter().all(|v| *v == c[0]) {
            return Err(Error::ConstantColumn(m.columns[j].clone()));
        }
    }
    let mut r = vec![vec![1.0; p]; p];
    let mut pv = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            let c = pearson(&cols[i], &cols[j])?;
            r[i][j] = c.r;
            r[j][i] = c.r;
            pv[i][j] = c.p_value;
            pv[j][i] = c.p_value;
        }
    }
    Ok(CorrelationMatrix {
        columns: m.columns.clone(),
        r,
        p_values: pv,
    })
}

/// Chance-corrected agreement `(p_o − p_e) / (1 − p_e)`. When both raters
/// use one and the same label throughout, `p_e = 1` and kappa is defined
/// as 1.
pub fn cohens_kappa<L: Ord + Clone>(a: &[L], b: &[L]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Precondition("kappa needs at least one rating".into()));
    }
    let n = a.len() as f64;
    let mut ma: BTreeMap<&L, f64> = BTreeMap::new();
    let mut mb: BTreeMap<&L, f64> = BTreeMap::new();
    let mut agree = 0.0;
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
        if x == y {
            agree += 1.0;
        }
    }
    let p_o = agree / n;
    let p_e: f64 = ma
        .iter()
        .map(|(l, ca)| ca / n * mb.get(l).copied().unwrap_or(0.0) / n)
        .sum();
    if p_e >= 1.0 {
        return if p_o == 1.0 {
            Ok(1.0)
        } else {
            Err(Error::Precondition("kappa undefined: chance agreement is 1".into()))
        };
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
    pub cramers_v: f64,
}

/// Cross-tabulates two labelings with a chi-square independence test and
/// Cramér's V. Labels are ordered by `Ord`.
pub fn contingency<R, C>(rows: &[R], cols: &[C]) -> Result<ContingencyTable>
where
    R: Ord + Clone + ToString,
    C: Ord + Clone + ToString,
{
    if rows.len() != cols.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", rows.len(), cols.len())));
    }
    if rows.is_empty() {
        return Err(Error::Precondition("contingency table needs at least one observation".into()));
    }
    let rl: Vec<R> = rows.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let cl: Vec<C> = cols.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut counts = vec![vec![0usize; cl.len()]; rl.len()];
    for (r, c) in rows.iter().zip(cols) {
        let i = rl.binary_search(r).expect("label present");
        let j = cl.binary_search(c).expect("label present");
        counts[i][j] += 1;
    }
    let n = rows.len() as f64;
    let row_tot: Vec<f64> = counts.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let col_tot: Vec<f64> = (0..cl.len())
        .map(|j| counts.iter().map(|r| r[j]).sum::<usize>() as f64)
        .collect();
    let mut chi = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = row_tot[i] * col_tot[j] / n;
            chi += (o as f64 - e).powi(2) / e;
        }
    }
    let df = (rl.len() - 1) * (cl.len() - 1);
    let min_dim = rl.len().min(cl.len());
    let (p_value, cramers_v) = if df == 0 {
        (1.0, 0.0)
    } else {
        let dist = ChiSquared::new(df as f64).expect("df >= 1");
        (dist.sf(chi), (chi / (n * (min_dim - 1) as f64)).sqrt())
    };
    Ok(ContingencyTable {
        row_labels: rl.iter().map(ToString::to_string).collect(),
        col_labels: cl.iter().map(ToString::to_string).collect(),
        counts,
        chi_square: chi,
        df,
        p_value,
        cramers_v,
    })
}
