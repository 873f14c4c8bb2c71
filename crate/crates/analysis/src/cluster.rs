use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::vectors::{dot, l2, sq_dist};
use crate::AnalysisError;

const MAX_ITERS: usize = 300;
const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each Lloyd iteration.
    pub history: Vec<f64>,
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = d2.iter().rposition(|&d| d > 0.0).expect("positive total");
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            (0..points.len()).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Lloyd's algorithm from a seeded k-means++ start. Nearest-centroid ties
/// go to the lowest index; an emptied cluster keeps its previous centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeans, AnalysisError> {
    if k == 0 || points.len() < k {
        return Err(AnalysisError::TooFewPoints { needed: k.max(1), got: points.len() });
    }
    let width = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != width) {
        return Err(AnalysisError::WidthMismatch(width, p.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centroids);
            changed |= *a != c;
            *a = c;
        }
        let mut sums = vec![vec![0.0; width]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
        let inertia: f64 = assignments.iter().zip(points).map(|(&a, p)| sq_dist(p, &centroids[a])).sum();
        let converged = !changed || history.last().is_some_and(|&prev| (prev - inertia).abs() < TOLERANCE);
        history.push(inertia);
        if converged {
            break;
        }
    }
    let inertia = *history.last().expect("at least one iteration");
    Ok(KMeans { assignments, centroids, inertia, history })
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let pairs = |n: u64| (n * n.saturating_sub(1) / 2) as f64;
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let sum_a: f64 = rows.values().map(|&n| pairs(n)).sum();
    let sum_b: f64 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pca {
    /// One unit-length component per entry, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    pub projected: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Principal components from the eigen-decomposition of the covariance
/// matrix. Each component's largest-magnitude entry is made positive.
pub fn pca(points: &[Vec<f64>], dims: usize) -> Result<Pca, AnalysisError> {
    let n = points.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints { needed: 2, got: n });
    }
    let width = points[0].len();
    if dims > width {
        return Err(AnalysisError::DimsTooLarge { dims, width });
    }
    let mean = crate::vectors::mean_pool(points)?;
    let centered = DMatrix::from_fn(n, width, |i, j| points[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|&v| v.max(0.0)).sum();
    let mut components = Vec::with_capacity(dims);
    let mut explained_variance = Vec::with_capacity(dims);
    for &i in order.iter().take(dims) {
        let mut c: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let pivot = c.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(c);
        explained_variance.push(eig.eigenvalues[i].max(0.0));
    }
    let explained_ratio = explained_variance
        .iter()
        .map(|&v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    let projected = (0..n)
        .map(|i| {
            let row: Vec<f64> = centered.row(i).iter().copied().collect();
            components.iter().map(|c| dot(&row, c)).collect()
        })
        .collect();
    Ok(Pca { components, projected, explained_variance, explained_ratio, mean })
}

/// Mean pairwise cosine between groups. Off-diagonal entries average over
/// all cross pairs; the diagonal averages over distinct pairs within a group
/// and is 1.0 for a singleton.
pub fn cosine_matrix<K: Ord + Clone>(
    groups: &BTreeMap<K, Vec<Vec<f64>>>,
) -> Result<BTreeMap<(K, K), f64>, AnalysisError> {
    let mut sums: BTreeMap<K, (Vec<f64>, usize)> = BTreeMap::new();
    for (k, vs) in groups {
        let first = vs.first().ok_or(AnalysisError::EmptyInput)?;
        let mut s = vec![0.0; first.len()];
        for v in vs {
            let norm = l2(v);
            if norm == 0.0 {
                return Err(AnalysisError::ZeroVector);
            }
            if v.len() != s.len() {
                return Err(AnalysisError::WidthMismatch(s.len(), v.len()));
            }
            for (a, x) in s.iter_mut().zip(v) {
                *a += x / norm;
            }
        }
        sums.insert(k.clone(), (s, vs.len()));
    }
    let mut out = BTreeMap::new();
    for (a, (sa, na)) in &sums {
        for (b, (sb, nb)) in &sums {
            let value = if a == b {
                if *na == 1 {
                    1.0
                } else {
                    (dot(sa, sa) - *na as f64) / (na * (na - 1)) as f64
                }
            } else {
                dot(sa, sb) / (na * nb) as f64
            };
            out.insert((a.clone(), b.clone()), value);
        }
    }
    Ok(out)
}

/// Mean silhouette coefficient under Euclidean distance. Points whose
/// label is a singleton score 0.
pub fn separability<L: Ord + Clone>(points: &[Vec<f64>], labels: &[L]) -> Result<f64, AnalysisError> {
    assert_eq!(points.len(), labels.len(), "one label per point");
    let mut index: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        index.entry(l.clone()).or_default().push(i);
    }
    if index.len() < 2 {
        return Err(AnalysisError::SingleLabel);
    }
    let groups: Vec<(&L, &Vec<usize>)> = index.iter().collect();
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mut a = 0.0;
        let mut b = f64::INFINITY;
        let mut own_size = 0;
        for (l, members) in &groups {
            let sum: f64 = members.iter().filter(|&&j| j != i).map(|&j| sq_dist(p, &points[j]).sqrt()).sum();
            if *l == &labels[i] {
                own_size = members.len();
                if own_size > 1 {
                    a = sum / (own_size - 1) as f64;
                }
            } else {
                b = b.min(sum / members.len() as f64);
            }
        }
        if own_size > 1 {
            let denom = a.max(b);
            total += if denom > 0.0 { (b - a) / denom } else { 0.0 };
        }
    }
    Ok(total / points.len() as f64)
}
