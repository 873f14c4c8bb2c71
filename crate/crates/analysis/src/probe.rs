use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use tgforge_core::TransformId;

use crate::vectors::{dot, mean_pool};
use crate::AnalysisError;

pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeModel {
    pub layer: usize,
    pub transform: TransformId,
    pub direction: Vec<f64>,
    pub mu_pos: Vec<f64>,
    pub mu_neg: Vec<f64>,
    pub ridge: f64,
}

impl ProbeModel {
    pub fn project(&self, x: &[f64]) -> f64 {
        dot(x, &self.direction)
    }

    /// Decision threshold: the projection of the midpoint of the class means.
    pub fn threshold(&self) -> f64 {
        let mid: Vec<f64> = self.mu_pos.iter().zip(&self.mu_neg).map(|(a, b)| (a + b) / 2.0).collect();
        self.project(&mid)
    }

    pub fn classify(&self, x: &[f64]) -> bool {
        self.project(x) > self.threshold()
    }
}

fn scatter(points: &[Vec<f64>], mu: &[f64], acc: &mut DMatrix<f64>) {
    for p in points {
        let c = DVector::from_iterator(mu.len(), p.iter().zip(mu).map(|(x, m)| x - m));
        acc.ger(1.0, &c, &c, 1.0);
    }
}

/// Fisher direction `(S_W + λ·tr(S_W)/d·I)⁻¹ (μ_pos − μ_neg)`, where `S_W`
/// is the sum of the two classes' scatter matrices.
pub fn lda_direction(
    pos: &[Vec<f64>],
    neg: &[Vec<f64>],
    ridge: f64,
    layer: usize,
    transform: TransformId,
) -> Result<ProbeModel, AnalysisError> {
    for side in [pos, neg] {
        if side.len() < 2 {
            return Err(AnalysisError::TooFewPoints { needed: 2, got: side.len() });
        }
    }
    let mu_pos = mean_pool(pos)?;
    let mu_neg = mean_pool(neg)?;
    if mu_pos.len() != mu_neg.len() {
        return Err(AnalysisError::WidthMismatch(mu_pos.len(), mu_neg.len()));
    }
    let d = mu_pos.len();
    let mut sw = DMatrix::zeros(d, d);
    scatter(pos, &mu_pos, &mut sw);
    scatter(neg, &mu_neg, &mut sw);
    let shift = ridge * sw.trace() / d as f64;
    for i in 0..d {
        sw[(i, i)] += shift;
    }
    let chol = sw.cholesky().ok_or(AnalysisError::DegenerateScatter)?;
    let delta = DVector::from_iterator(d, mu_pos.iter().zip(&mu_neg).map(|(a, b)| a - b));
    let v = chol.solve(&delta);
    if v.iter().any(|x| !x.is_finite()) || v.norm() == 0.0 {
        return Err(AnalysisError::DegenerateScatter);
    }
    Ok(ProbeModel {
        layer,
        transform,
        direction: v.iter().copied().collect(),
        mu_pos,
        mu_neg,
        ridge,
    })
}

/// `grid[row][layer]`: mean projection of row-transform embeddings at a
/// layer onto the probe trained for that layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heatmap {
    pub probe: TransformId,
    pub layers: Vec<usize>,
    pub rows: Vec<TransformId>,
    pub grid: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("transform");
        for l in &self.layers {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
        for (t, row) in self.rows.iter().zip(&self.grid) {
            out.push(t.letter());
            for cell in row {
                match cell {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the heatmap for one probe transform. `embeddings` is keyed by
/// `(layer, transform)`; `probes` by layer.
pub fn probe_heatmap(
    probe: TransformId,
    embeddings: &BTreeMap<(usize, TransformId), Vec<Vec<f64>>>,
    probes: &BTreeMap<usize, ProbeModel>,
) -> Result<Heatmap, AnalysisError> {
    let mut layers: Vec<usize> = embeddings.keys().map(|(l, _)| *l).collect();
    layers.dedup();
    if let Some(&l) = layers.iter().find(|l| !probes.contains_key(l)) {
        return Err(AnalysisError::MissingProbe { layer: l, transform: probe });
    }
    let rows = TransformId::ALL.to_vec();
    let grid = rows
        .iter()
        .map(|&t| {
            layers
                .iter()
                .map(|l| {
                    let pts = embeddings.get(&(*l, t)).filter(|p| !p.is_empty())?;
                    let m = &probes[l];
                    Some(pts.iter().map(|x| m.project(x)).sum::<f64>() / pts.len() as f64)
                })
                .collect()
        })
        .collect();
    Ok(Heatmap { probe, layers, rows, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const T: TransformId = TransformId::NpPassive1;

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt())
    }

    #[test]
    fn hand_computed_direction() {
        let pos = vec![vec![1.0, 0.0], vec![3.0, 0.0]];
        let neg = vec![vec![0.0, 1.0], vec![0.0, 3.0]];
        let m = lda_direction(&pos, &neg, 0.0, 0, T).unwrap();
        assert!((m.direction[0] - 1.0).abs() < 1e-12 && (m.direction[1] + 1.0).abs() < 1e-12);
        assert!(cos(&m.direction, &[1.0, -1.0]) >= 0.999);
        assert!(pos.iter().all(|p| m.classify(p)) && neg.iter().all(|p| !m.classify(p)));
    }

    #[test]
    fn degenerate_scatter() {
        let same = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(lda_direction(&same, &same, 0.0, 0, T), Err(AnalysisError::DegenerateScatter)));
        assert!(matches!(
            lda_direction(&same[..1], &same, 0.0, 0, T),
            Err(AnalysisError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn heatmap_linearity() {
        let pos = vec![vec![1.0, 0.0], vec![3.0, 0.0]];
        let neg = vec![vec![0.0, 1.0], vec![0.0, 3.0]];
        let m = lda_direction(&pos, &neg, 0.0, 0, T).unwrap();
        let mut emb = BTreeMap::new();
        emb.insert((0, TransformId::NpPassive1), vec![vec![2.0, 0.0]]);
        emb.insert((0, TransformId::NpPassive2), vec![vec![0.0, 2.0]]);
        let mut probes = BTreeMap::from([(0, m.clone())]);
        let h = probe_heatmap(T, &emb, &probes).unwrap();
        let a = h.grid[0][0].unwrap();
        let b = h.grid[1][0].unwrap();
        assert!(a > b);
        assert_eq!(h.grid[2][0], None);
        probes.get_mut(&0).unwrap().direction.iter_mut().for_each(|x| *x = -*x);
        let neg_h = probe_heatmap(T, &emb, &probes).unwrap();
        assert_eq!(neg_h.grid[0][0], Some(-a));
        assert!(matches!(
            probe_heatmap(T, &emb, &BTreeMap::new()),
            Err(AnalysisError::MissingProbe { .. })
        ));
    }

    proptest! {
        #[test]
        fn projections_are_scale_invariant(
            pos in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 4..8),
            neg in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 4..8),
            c in 0.01f64..100.0,
        ) {
            let a = lda_direction(&pos, &neg, DEFAULT_RIDGE, 0, T);
            prop_assume!(a.is_ok());
            let a = a.unwrap();
            let scale = |v: &Vec<Vec<f64>>| v.iter().map(|p| p.iter().map(|x| x * c).collect()).collect::<Vec<Vec<f64>>>();
            let b = lda_direction(&scale(&pos), &scale(&neg), DEFAULT_RIDGE, 0, T).unwrap();
            for p in pos.iter().chain(&neg) {
                let pa = a.project(p);
                let pb = b.project(&p.iter().map(|x| x * c).collect::<Vec<_>>());
                prop_assert!((pa - pb).abs() <= 1e-8 * pa.abs().max(1e-12), "{} vs {}", pa, pb);
            }
        }
    }
}
