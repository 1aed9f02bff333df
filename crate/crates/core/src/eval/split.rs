//! Cross-validation folds, balanced downsampling and the cold-start subset.

use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId, SignedTopicGraph, TopicId};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train_edges: Vec<Edge>,
    pub test_edges: Vec<Edge>,
}

/// Seeded shuffle of the edge list cut into `n_folds` near-equal test blocks.
pub fn make_folds(g: &SignedTopicGraph, n_folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }
    let edges = g.edges();
    if edges.len() < n_folds {
        return Err(Error::Eval(format!(
            "{} edges cannot fill {n_folds} folds",
            edges.len()
        )));
    }
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(&mut rng::stream(seed, "folds", &[]));

    let base = edges.len() / n_folds;
    let extra = edges.len() % n_folds;
    let mut bounds = Vec::with_capacity(n_folds + 1);
    bounds.push(0);
    for f in 0..n_folds {
        bounds.push(bounds[f] + base + usize::from(f < extra));
    }

    Ok((0..n_folds)
        .map(|f| {
            let (lo, hi) = (bounds[f], bounds[f + 1]);
            let test_edges = order[lo..hi].iter().map(|&i| edges[i]).collect();
            let train_edges = order[..lo]
                .iter()
                .chain(&order[hi..])
                .map(|&i| edges[i])
                .collect();
            FoldSplit {
                fold_index: f,
                train_edges,
                test_edges,
            }
        })
        .collect())
}

/// Keep every minority-sign edge and an equal-sized random sample of the
/// majority sign. Relative input order is preserved.
pub fn balance_downsample(edges: &[Edge], seed: u64) -> Result<Vec<Edge>> {
    let pos: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].sign.is_positive()).collect();
    let neg: Vec<usize> = (0..edges.len()).filter(|&i| !edges[i].sign.is_positive()).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Eval("downsampling needs edges of both signs".into()));
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut keep = vec![false; edges.len()];
    for &i in &minority {
        keep[i] = true;
    }
    let mut r = rng::stream(seed, "downsample", &[]);
    for &i in majority.choose_multiple(&mut r, minority.len()) {
        keep[i] = true;
    }
    Ok(edges
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(e, _)| *e)
        .collect())
}

/// Test edges `(u1, u2, w, t)` with no training edge `(u1, ., ., t)` or no
/// training edge `(., u2, ., t)`.
pub fn coldstart_subset(train: &[Edge], test: &[Edge]) -> Vec<Edge> {
    coldstart_indices(train, test).into_iter().map(|i| test[i]).collect()
}

/// Positions in `test` of the edges [`coldstart_subset`] keeps.
pub fn coldstart_indices(train: &[Edge], test: &[Edge]) -> Vec<usize> {
    let sources: HashSet<(NodeId, TopicId)> = train.iter().map(|e| (e.source, e.topic)).collect();
    let targets: HashSet<(NodeId, TopicId)> = train.iter().map(|e| (e.target, e.topic)).collect();
    (0..test.len())
        .filter(|&i| {
            let e = &test[i];
            !sources.contains(&(e.source, e.topic)) || !targets.contains(&(e.target, e.topic))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign;

    fn edges(n: usize) -> SignedTopicGraph {
        let es = (0..n as u32)
            .map(|i| Edge::new(i, i + 1, if i % 3 == 0 { Sign::Neg } else { Sign::Pos }, 0))
            .collect();
        SignedTopicGraph::from_edges(n + 1, 1, es).unwrap()
    }

    #[test]
    fn folds_partition_edges() {
        let g = edges(100);
        let folds = make_folds(&g, 5, 11).unwrap();
        assert_eq!(folds.len(), 5);
        let mut all: Vec<Edge> = Vec::new();
        for f in &folds {
            assert_eq!(f.test_edges.len(), 20);
            assert_eq!(f.train_edges.len(), 80);
            let test: HashSet<_> = f.test_edges.iter().collect();
            assert!(f.train_edges.iter().all(|e| !test.contains(e)));
            all.extend(&f.test_edges);
        }
        all.sort();
        let mut want = g.edges().to_vec();
        want.sort();
        assert_eq!(all, want);
        assert_eq!(folds, make_folds(&g, 5, 11).unwrap());
        assert_ne!(folds, make_folds(&g, 5, 12).unwrap());
    }

    #[test]
    fn uneven_folds_differ_by_one() {
        let folds = make_folds(&edges(23), 5, 1).unwrap();
        let sizes: Vec<_> = folds.iter().map(|f| f.test_edges.len()).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        assert!(make_folds(&edges(3), 5, 1).is_err());
        assert!(make_folds(&edges(30), 1, 1).is_err());
    }

    #[test]
    fn downsample_counts() {
        let mut es: Vec<Edge> = (0..90).map(|i| Edge::new(i, i + 1, Sign::Pos, 0)).collect();
        es.extend((0..10).map(|i| Edge::new(i + 1, i, Sign::Neg, 0)));
        let b = balance_downsample(&es, 3).unwrap();
        assert_eq!(b.iter().filter(|e| e.sign.is_positive()).count(), 10);
        assert_eq!(b.iter().filter(|e| !e.sign.is_positive()).count(), 10);
        assert_eq!(b, balance_downsample(&es, 3).unwrap());

        let balanced = &es[80..];
        assert_eq!(balance_downsample(balanced, 9).unwrap(), balanced.to_vec());
        assert!(balance_downsample(&es[..90], 1).is_err());
    }

    #[test]
    fn coldstart_membership() {
        let a_b = Edge::new(0, 1, Sign::Pos, 0);
        let a_c_t1 = Edge::new(0, 2, Sign::Pos, 1);
        assert_eq!(coldstart_subset(&[a_b], &[a_c_t1]), vec![a_c_t1]);
        assert!(coldstart_subset(&[a_b], &[Edge::new(0, 1, Sign::Neg, 0)]).is_empty());
        // source engagement seen, target engagement unseen
        let a_c = Edge::new(0, 2, Sign::Neg, 0);
        assert_eq!(coldstart_subset(&[a_b], &[a_c]), vec![a_c]);
        assert_eq!(coldstart_subset(&[], &[a_b, a_c]), vec![a_b, a_c]);
        assert!(coldstart_subset(&[a_b], &[]).is_empty());
    }
}
