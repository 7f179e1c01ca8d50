//! Multivariate statistics over per-song (or per-artist) feature tables.

mod correlation;
mod folds;
mod kmeans;
mod matrix;
mod ols;
mod pca;

pub use correlation::{cohens_kappa, contingency, correlation_matrix, pearson, ContingencyTable, Correlation, CorrelationMatrix};
pub use folds::{temporal_folds, temporal_folds_by_key, FoldAssignment, FoldStratum, StratumMerge};
pub use kmeans::{elbow, kmeans, kmeans_elbow, lloyd, ClusterResult, KMeansFit, MAX_ITERATIONS, N_INIT, REL_TOLERANCE};
pub use matrix::FeatureMatrix;
pub use ols::{ols, quadratic_optimum, OlsFit, QuadraticOptimum};
pub use pca::{pca, PcaResult};
