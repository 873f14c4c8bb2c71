use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::adf::{AblationRecord, Component, LayerProbRecord};
use crate::AnalysisError;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("probabilities are finite")
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentEffect {
    pub component: Component,
    /// Mean Δp over the sentences that ablated this component.
    pub mean_delta: f64,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contributions {
    pub effects: Vec<ComponentEffect>,
    /// Sums of positive Δp, exact.
    pub mlp_positive: BigRational,
    pub attn_positive: BigRational,
    /// Sum of negative Δp (ablation raised the target probability), exact.
    pub negative_total: BigRational,
    pub mlp_share: BigRational,
    pub attn_share: BigRational,
    /// True when no record has positive Δp; shares are then 1/2 each.
    pub null_effect: bool,
    /// Share of positive Δp by layer; empty under a null effect.
    pub per_layer: BTreeMap<usize, BigRational>,
    pub n_layers: usize,
}

impl Contributions {
    /// Share of positive Δp from blocks in the last third of the stack:
    /// block `l` feeds residual stream `l + 1`, counted when
    /// `3(l + 1) > 2L`.
    pub fn last_third_share(&self) -> Option<BigRational> {
        if self.null_effect {
            return None;
        }
        let l = self.n_layers;
        Some(
            self.per_layer
                .iter()
                .filter(|(&layer, _)| 3 * (layer + 1) > 2 * l)
                .fold(BigRational::zero(), |acc, (_, s)| acc + s),
        )
    }

    pub fn top_k(&self, k: usize) -> Vec<&ComponentEffect> {
        let mut sorted: Vec<&ComponentEffect> = self.effects.iter().collect();
        sorted.sort_by(|a, b| b.mean_delta.total_cmp(&a.mean_delta).then(a.component.cmp(&b.component)));
        sorted.truncate(k);
        sorted
    }

    pub fn to_json(&self, top: usize) -> serde_json::Value {
        let ratio = |r: &BigRational| serde_json::json!({ "value": to_f64(r), "exact": r.to_string() });
        serde_json::json!({
            "mlp_share": ratio(&self.mlp_share),
            "attn_share": ratio(&self.attn_share),
            "mlp_positive_total": ratio(&self.mlp_positive),
            "attn_positive_total": ratio(&self.attn_positive),
            "negative_total": ratio(&self.negative_total),
            "null_effect": self.null_effect,
            "per_layer": self.per_layer.iter().map(|(l, s)| (l.to_string(), to_f64(s))).collect::<BTreeMap<_, _>>(),
            "last_third_share": self.last_third_share().as_ref().map(to_f64),
            "top_components": self.top_k(top).iter().map(|e| serde_json::json!({
                "component": e.component.to_string(),
                "mean_delta": e.mean_delta,
                "records": e.records,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Aggregates Δp = p_clean − p_ablated. Shares are taken over positive Δp
/// only, using exact rational sums of the stored binary values.
pub fn ablation_contributions(
    records: &[AblationRecord],
    n_layers: usize,
) -> Result<Contributions, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut mlp = BigRational::zero();
    let mut attn = BigRational::zero();
    let mut negative = BigRational::zero();
    let mut layer_sums: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut per_component: BTreeMap<Component, (f64, usize)> = BTreeMap::new();
    for r in records {
        let delta = exact(r.p_clean) - exact(r.p_ablated);
        let entry = per_component.entry(r.component).or_insert((0.0, 0));
        entry.0 += r.p_clean - r.p_ablated;
        entry.1 += 1;
        if delta > BigRational::zero() {
            *layer_sums.entry(r.component.layer()).or_insert_with(BigRational::zero) += &delta;
            if r.component.is_mlp() {
                mlp += delta;
            } else {
                attn += delta;
            }
        } else if delta < BigRational::zero() {
            negative += delta;
        }
    }
    let total = &mlp + &attn;
    let null_effect = total.is_zero();
    let (mlp_share, attn_share, per_layer) = if null_effect {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        (half.clone(), half, BTreeMap::new())
    } else {
        let m = &mlp / &total;
        let a = &attn / &total;
        let layers = layer_sums.into_iter().map(|(l, s)| (l, s / &total)).collect();
        (m, a, layers)
    };
    let effects = per_component
        .into_iter()
        .map(|(component, (sum, n))| ComponentEffect { component, mean_delta: sum / n as f64, records: n })
        .collect();
    Ok(Contributions {
        effects,
        mlp_positive: mlp,
        attn_positive: attn,
        negative_total: negative,
        mlp_share,
        attn_share,
        null_effect,
        per_layer,
        n_layers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Mean target probability at each layer `0..=L`.
    pub mean_curve: Vec<f64>,
    pub sentences: usize,
    pub total_gain: f64,
    /// Fraction of `total_gain` made by increments into layers `l` with
    /// `3l > 2L`; `None` when the gain is zero.
    pub last_third_fraction: Option<f64>,
    /// First layer whose mean probability reaches half the final value.
    pub half_layer: Option<usize>,
}

/// Mean layer-wise decoding curve and where its gain is concentrated.
pub fn layer_trajectory(records: &[LayerProbRecord]) -> Result<Trajectory, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut by_sentence: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in records {
        if !(0.0..=1.0).contains(&r.p_target) {
            return Err(AnalysisError::Range(format!("{}: p = {} at layer {}", r.sentence_id, r.p_target, r.layer)));
        }
        if by_sentence.entry(&r.sentence_id).or_default().insert(r.layer, r.p_target).is_some() {
            return Err(AnalysisError::Range(format!("{}: layer {} repeated", r.sentence_id, r.layer)));
        }
    }
    let top = by_sentence.values().next().map(|m| m.len()).unwrap_or(0);
    let mut sums = vec![0.0; top];
    for (sid, layers) in &by_sentence {
        let contiguous = layers.len() == top && layers.keys().enumerate().all(|(i, &l)| i == l);
        if !contiguous {
            return Err(AnalysisError::Range(format!("{sid}: layers are not 0..={}", top - 1)));
        }
        for (s, p) in sums.iter_mut().zip(layers.values()) {
            *s += p;
        }
    }
    let n = by_sentence.len();
    let mean_curve: Vec<f64> = sums.into_iter().map(|s| s / n as f64).collect();
    let l = mean_curve.len() - 1;
    let total_gain = mean_curve[l] - mean_curve[0];
    let first_late = 2 * l / 3 + 1;
    let last_third_fraction = (total_gain != 0.0 && l > 0)
        .then(|| (mean_curve[l] - mean_curve[first_late.min(l + 1) - 1]) / total_gain);
    let half_layer = (mean_curve[l] > 0.0)
        .then(|| mean_curve.iter().position(|&p| p >= mean_curve[l] / 2.0))
        .flatten();
    Ok(Trajectory { mean_curve, sentences: n, total_gain, last_third_fraction, half_layer })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(component: Component, p_clean: f64, p_ablated: f64) -> AblationRecord {
        AblationRecord { sentence_id: "s".into(), component, p_clean, p_ablated, target_token: 0 }
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn null_effect_sentinel() {
        let c = ablation_contributions(&[rec(Component::Mlp { layer: 0 }, 0.3, 0.3)], 1).unwrap();
        assert!(c.null_effect);
        assert_eq!(c.mlp_share, ratio(1, 2));
        assert_eq!(c.attn_share, ratio(1, 2));
        assert_eq!(c.last_third_share(), None);
    }

    #[test]
    fn single_mlp_takes_everything() {
        let c = ablation_contributions(&[rec(Component::Mlp { layer: 2 }, 0.5, 0.25)], 3).unwrap();
        assert_eq!(c.mlp_share, ratio(1, 1));
        assert_eq!(c.attn_share, ratio(0, 1));
        assert_eq!(c.last_third_share(), Some(ratio(1, 1)));
    }

    #[test]
    fn shares_sum_to_one_and_skip_negatives() {
        let recs = vec![
            rec(Component::Mlp { layer: 0 }, 0.5, 0.25),
            rec(Component::Attn { layer: 1, head: 0 }, 0.5, 0.375),
            rec(Component::Attn { layer: 1, head: 1 }, 0.5, 0.75),
        ];
        let c = ablation_contributions(&recs, 2).unwrap();
        assert_eq!(c.mlp_share, ratio(2, 3));
        assert_eq!(c.attn_share, ratio(1, 3));
        assert_eq!(&c.mlp_share + &c.attn_share, ratio(1, 1));
        assert_eq!(c.negative_total, ratio(-1, 4));
        assert_eq!(c.top_k(1)[0].component, Component::Mlp { layer: 0 });
        assert!(ablation_contributions(&[], 2).is_err());
    }

    fn curve(values: &[f64]) -> Vec<LayerProbRecord> {
        values
            .iter()
            .enumerate()
            .map(|(layer, &p)| LayerProbRecord { sentence_id: "s".into(), layer, p_target: p })
            .collect()
    }

    #[test]
    fn trajectory_examples() {
        let linear: Vec<f64> = (0..=32).map(|l| l as f64 / 32.0).collect();
        let t = layer_trajectory(&curve(&linear)).unwrap();
        assert!((t.last_third_fraction.unwrap() - 11.0 / 32.0).abs() < 1e-12);
        let step: Vec<f64> = (0..=32).map(|l| if l >= 24 { 1.0 } else { 0.0 }).collect();
        assert_eq!(layer_trajectory(&curve(&step)).unwrap().last_third_fraction, Some(1.0));
        let flat = layer_trajectory(&curve(&[0.2; 33])).unwrap();
        assert_eq!((flat.total_gain, flat.last_third_fraction), (0.0, None));
        assert!(matches!(layer_trajectory(&curve(&[0.1, 1.5])), Err(AnalysisError::Range(_))));
        let mut gap = curve(&[0.1, 0.2, 0.3]);
        gap.remove(1);
        assert!(matches!(layer_trajectory(&gap), Err(AnalysisError::Range(_))));
    }
}
