use serde::{Deserialize, Serialize};

use super::{default_ood, DatasetError, DatasetRecord, RuleSeq, Split};
use crate::rng::unit_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub ood_combinations: Vec<RuleSeq>,
    pub val_fraction: f64,
    pub with_intermediates: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { ood_combinations: default_ood(), val_fraction: 0.1, with_intermediates: true }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(format!("split.val_fraction must be in [0, 1), got {}", self.val_fraction));
        }
        if let Some(seq) = self.ood_combinations.iter().find(|s| s.0.len() != 2) {
            return Err(format!("split.ood_combinations: `{seq}` is not a pair"));
        }
        Ok(())
    }
}

/// Assigns every record a split. Records whose label sequence is an OOD
/// combination go to `Ood`; the rest are sent to `Val` by a hash of their id.
pub fn make_splits(
    mut records: Vec<DatasetRecord>,
    cfg: &SplitConfig,
) -> Result<Vec<DatasetRecord>, DatasetError> {
    assign_splits(records.iter_mut(), cfg)?;
    Ok(records)
}

/// In-place form of [`make_splits`].
pub fn assign_splits<'r>(
    records: impl Iterator<Item = &'r mut DatasetRecord>,
    cfg: &SplitConfig,
) -> Result<(), DatasetError> {
    let keys: Vec<String> = cfg.ood_combinations.iter().map(|s| s.to_string()).collect();
    let mut seen = vec![false; keys.len()];
    for rec in records {
        let key = rec.label_key();
        rec.split = match keys.iter().position(|k| *k == key) {
            Some(i) => {
                seen[i] = true;
                Split::Ood
            }
            None if unit_hash(&rec.id) < cfg.val_fraction => Split::Val,
            None => Split::Train,
        };
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(DatasetError::MissingOodPair(keys[i].clone())),
        None => Ok(()),
    }
}
