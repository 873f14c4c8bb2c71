use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{applicable, apply_rule, TransformId};
use crate::syntax::Clause;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompatError {
    #[error("no corpus clauses for {0}")]
    EmptyBucket(TransformId),
}

/// `ratio[r][c]`: fraction of `apply_rule(r, x)` outputs over the Ω_r corpus
/// for which rule `c` is applicable. Rows and columns are in letter order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityMatrix {
    pub ratio: [[f64; 10]; 10],
    pub samples: [usize; 10],
}

impl CompatibilityMatrix {
    pub fn get(&self, first: TransformId, then: TransformId) -> f64 {
        self.ratio[first.index()][then.index()]
    }

    /// 10×10 comma-separated table with letter headers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("first\\then");
        for t in TransformId::ALL {
            write!(out, ",{}", t.letter()).unwrap();
        }
        out.push('\n');
        for r in TransformId::ALL {
            out.push(r.letter());
            for c in TransformId::ALL {
                write!(out, ",{:.4}", self.get(r, c)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the matrix from per-rule corpora. Clauses outside their own rule's
/// domain are skipped; a bucket with no usable clause is an error.
pub fn build_compatibility_matrix(
    corpus: &BTreeMap<TransformId, Vec<Clause>>,
) -> Result<CompatibilityMatrix, CompatError> {
    let mut ratio = [[0.0; 10]; 10];
    let mut samples = [0usize; 10];
    for r in TransformId::ALL {
        let outputs: Vec<Clause> = corpus
            .get(&r)
            .map(|bucket| bucket.iter().filter_map(|c| apply_rule(r, c).ok()).collect())
            .unwrap_or_default();
        if outputs.is_empty() {
            return Err(CompatError::EmptyBucket(r));
        }
        samples[r.index()] = outputs.len();
        for c in TransformId::ALL {
            let hits = outputs.iter().filter(|o| applicable(c, o)).count();
            ratio[r.index()][c.index()] = hits as f64 / outputs.len() as f64;
        }
    }
    Ok(CompatibilityMatrix { ratio, samples })
}
