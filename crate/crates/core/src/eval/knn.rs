//! Brute-force k-nearest-neighbour sign scoring.

use crate::edge::EdgeFeature;
use crate::error::{Error, Result};
use crate::graph::Sign;

/// Training points stored row-major for a linear Euclidean scan.
#[derive(Clone, Debug)]
pub struct KnnIndex {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<Sign>,
}

impl KnnIndex {
    pub fn new(dim: usize, points: Vec<f64>, labels: Vec<Sign>) -> Result<Self> {
        if dim == 0 || points.len() != dim * labels.len() {
            return Err(Error::DimMismatch(points.len(), dim * labels.len()));
        }
        if labels.is_empty() {
            return Err(Error::Eval("kNN needs at least one training point".into()));
        }
        Ok(KnnIndex { dim, points, labels })
    }

    pub fn from_features(train: &[EdgeFeature]) -> Result<Self> {
        let dim = train.first().map_or(0, |f| f.vector.len());
        let points = train.iter().flat_map(|f| f.vector.iter().copied()).collect();
        Self::new(dim, points, train.iter().map(|f| f.label).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Indices of the `k` nearest points, nearest first. Equal distances are
    /// ordered by index.
    pub fn neighbors(&self, query: &[f64], k: usize) -> Result<Vec<usize>> {
        if query.len() != self.dim {
            return Err(Error::DimMismatch(query.len(), self.dim));
        }
        if k == 0 || k > self.len() {
            return Err(Error::Eval(format!("k={k} with {} training points", self.len())));
        }
        // sorted ascending by (distance, index)
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let mut worst = f64::INFINITY;
        for (i, p) in self.points.chunks_exact(self.dim).enumerate() {
            let d = sq_dist(p, query);
            // an equal distance never displaces an earlier index
            if best.len() == k && d >= worst {
                continue;
            }
            let at = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(at, (d, i));
            if best.len() > k {
                best.pop();
            }
            if best.len() == k {
                worst = best[k - 1].0;
            }
        }
        Ok(best.into_iter().map(|(_, i)| i).collect())
    }

    /// Fraction of positive labels among the `k` nearest points.
    pub fn score(&self, query: &[f64], k: usize) -> Result<f64> {
        let nn = self.neighbors(query, k)?;
        Ok(self.positive_fraction(&nn))
    }

    /// Scores for several `k` from one scan.
    pub fn scores(&self, query: &[f64], ks: &[usize]) -> Result<Vec<f64>> {
        let kmax = ks.iter().copied().max().unwrap_or(1);
        let nn = self.neighbors(query, kmax)?;
        Ok(ks.iter().map(|&k| self.positive_fraction(&nn[..k])).collect())
    }

    fn positive_fraction(&self, nn: &[usize]) -> f64 {
        let pos = nn.iter().filter(|&&i| self.labels[i].is_positive()).count();
        pos as f64 / nn.len() as f64
    }
}

/// Squared Euclidean distance, four accumulators wide.
#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| (x - y) * (x - y)).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn knn_score(train: &[EdgeFeature], query: &EdgeFeature, k: usize) -> Result<f64> {
    KnnIndex::from_features(train)?.score(&query.vector, k)
}
