//! Feature-ranking stability and predictive-performance toolkit for binary
//! case-control data.
//!
//! Six rankers (Pearson and ReliefF filters, SVM- and MLP-guided forward
//! selection wrappers, linear SVM-RFE and random-forest impurity importance)
//! are run over repeated subsamples. Their outcomes are compared with
//! average-pairwise Spearman, Jaccard and Kuncheva stability, projected to
//! 2D with stress-majorization MDS, and aggregated into median rankings
//! whose top-k subsets are scored by cross-validated ROC-AUC under five
//! classifiers.

pub mod classifiers;
pub mod error;
pub mod ingest;
pub mod mds;
pub mod model;
mod params;
pub mod pipeline;
pub mod rankers;
pub mod seed;
pub mod stability;
mod svg;

pub use error::{Error, Result};
pub use model::{aggregate_median, to_top_k, Dataset, Matrix, RankingEnsemble, RankingVector, TopKMask};
pub use params::Hyperparameters;
