use serde::Serialize;
use tgforge_core::TransformId;

use crate::AnalysisError;

/// Elementwise mean of equal-width vectors.
pub fn mean_pool(vectors: &[Vec<f64>]) -> Result<Vec<f64>, AnalysisError> {
    let first = vectors.first().ok_or(AnalysisError::EmptyInput)?;
    let mut sum = vec![0.0; first.len()];
    for v in vectors {
        if v.len() != sum.len() {
            return Err(AnalysisError::WidthMismatch(sum.len(), v.len()));
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffVector {
    pub base_id: String,
    pub transformed_id: String,
    pub transform: TransformId,
    pub delta: Vec<f64>,
    pub l2: f64,
}

/// `transformed - base` and its Euclidean norm.
pub fn diff_and_distance(base: &[f64], transformed: &[f64]) -> Result<(Vec<f64>, f64), AnalysisError> {
    if base.len() != transformed.len() {
        return Err(AnalysisError::WidthMismatch(base.len(), transformed.len()));
    }
    let delta: Vec<f64> = transformed.iter().zip(base).map(|(t, b)| t - b).collect();
    let norm = l2(&delta);
    Ok((delta, norm))
}
