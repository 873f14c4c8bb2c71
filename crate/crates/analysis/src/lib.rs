//! Representation analysis over activation dumps: pooling and difference
//! vectors, clustering, PCA, cosine structure, LDA probes, ablation shares,
//! layer-wise decoding trajectories and checkpoint trends.

pub mod ablation;
pub mod adf;
pub mod cluster;
pub mod pipeline;
pub mod probe;
pub mod trend;
pub mod vectors;

use thiserror::Error;
use tgforge_core::TransformId;

pub use ablation::{ablation_contributions, layer_trajectory, Contributions, Trajectory};
pub use adf::{read_dump, write_dump, Component, Dump, DumpHeader, Pooling};
pub use cluster::{adjusted_rand_index, cosine_matrix, kmeans, pca, separability, KMeans, Pca};
pub use probe::{lda_direction, probe_heatmap, Heatmap, ProbeModel, DEFAULT_RIDGE};
pub use trend::{checkpoint_trend, TrendPoint, TrendReport};
pub use vectors::{diff_and_distance, mean_pool, DiffVector};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty input")]
    EmptyInput,
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("cannot keep {dims} components of width-{width} data")]
    DimsTooLarge { dims: usize, width: usize },
    #[error("zero vector in cosine input")]
    ZeroVector,
    #[error("separability needs at least two labels")]
    SingleLabel,
    #[error("within-class scatter is singular")]
    DegenerateScatter,
    #[error("no probe for {transform} at layer {layer}")]
    MissingProbe { layer: usize, transform: TransformId },
    #[error("trend needs at least 3 checkpoints, got {0}")]
    TooFewCheckpoints(usize),
    #[error("out of range: {0}")]
    Range(String),
    #[error("dump line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
