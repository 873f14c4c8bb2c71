use std::collections::BTreeMap;

use serde::Serialize;
use tgforge_core::TransformId;

use crate::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub step: u64,
    pub mean_l2: f64,
    pub per_transform: BTreeMap<TransformId, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub steps: Vec<u64>,
    pub mean_l2: Vec<f64>,
    /// `(m_i − m_{i−1}) / m_{i−1}` for each step after the first; `None`
    /// when the previous value is zero.
    pub relative_increase: Vec<Option<f64>>,
    /// Step with the largest positive relative increase.
    pub phase_transition: Option<u64>,
    /// Mean L2 never decreases.
    pub monotone: bool,
}

pub fn checkpoint_trend(series: &[TrendPoint]) -> Result<TrendReport, AnalysisError> {
    if series.len() < 3 {
        return Err(AnalysisError::TooFewCheckpoints(series.len()));
    }
    if let Some(w) = series.windows(2).find(|w| w[1].step <= w[0].step) {
        return Err(AnalysisError::Range(format!("steps not increasing at {}", w[1].step)));
    }
    let relative_increase: Vec<Option<f64>> = series
        .windows(2)
        .map(|w| (w[0].mean_l2 != 0.0).then(|| (w[1].mean_l2 - w[0].mean_l2) / w[0].mean_l2))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in relative_increase.iter().enumerate() {
        if let Some(r) = *r {
            if r > 0.0 && best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
    }
    Ok(TrendReport {
        steps: series.iter().map(|p| p.step).collect(),
        mean_l2: series.iter().map(|p| p.mean_l2).collect(),
        relative_increase,
        phase_transition: best.map(|(i, _)| series[i + 1].step),
        monotone: series.windows(2).all(|w| w[1].mean_l2 >= w[0].mean_l2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(points: &[(u64, f64)]) -> Vec<TrendPoint> {
        points
            .iter()
            .map(|&(step, mean_l2)| TrendPoint { step, mean_l2, per_transform: BTreeMap::new() })
            .collect()
    }

    #[test]
    fn doubling_step_is_flagged() {
        let r = checkpoint_trend(&series(&[(1, 1.0), (2, 1.1), (4, 2.2), (8, 2.3)])).unwrap();
        assert_eq!(r.phase_transition, Some(4));
        assert!(r.monotone);
    }

    #[test]
    fn flat_series_has_no_flag() {
        let r = checkpoint_trend(&series(&[(1, 1.0), (2, 1.0), (3, 1.0)])).unwrap();
        assert_eq!(r.phase_transition, None);
        assert!(r.monotone);
    }

    #[test]
    fn sixty_four_k_jump_series() {
        let steps = [1000, 2000, 4000, 8000, 16000, 32000, 64000, 128000, 143000];
        let values = [1.0, 1.05, 1.1, 1.16, 1.22, 1.3, 2.6, 2.75, 2.8];
        let pts: Vec<(u64, f64)> = steps.into_iter().zip(values).collect();
        assert_eq!(checkpoint_trend(&series(&pts)).unwrap().phase_transition, Some(64000));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            checkpoint_trend(&series(&[(1, 1.0), (2, 1.0)])),
            Err(AnalysisError::TooFewCheckpoints(2))
        ));
        assert!(matches!(
            checkpoint_trend(&series(&[(1, 1.0), (1, 1.0), (2, 1.0)])),
            Err(AnalysisError::Range(_))
        ));
    }
}
