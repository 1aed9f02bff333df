//! Second-order biased random walks over topic subgraphs.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SignedTopicGraph, TopicId, TopicSubgraphView};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    /// Return parameter `p`.
    pub p: f64,
    /// In-out parameter `q`.
    pub q: f64,
    pub seed: u64,
    /// Walk on the symmetrized topic graph (both directions of every edge).
    pub symmetrize: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 10,
            walk_length: 40,
            p: 1.5,
            q: 0.5,
            seed: 0,
            symmetrize: true,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 {
            return Err(Error::Config("walks_per_node must be >= 1".into()));
        }
        if self.walk_length < 2 {
            return Err(Error::Config("walk_length must be >= 2".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) || !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::Config("p and q must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub topic: TopicId,
    pub nodes: Vec<NodeId>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Walks for every topic plus per-topic node occurrence counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCorpus {
    pub walks: Vec<Walk>,
    /// `freqs[topic][node]` = occurrences of `node` in walks of `topic`.
    pub freqs: Vec<Vec<u64>>,
    pub topic_totals: Vec<u64>,
    pub symmetrized: bool,
}

impl WalkCorpus {
    pub fn from_walks(walks: Vec<Walk>, n_nodes: usize, n_topics: usize, symmetrized: bool) -> Self {
        let mut freqs = vec![vec![0u64; n_nodes]; n_topics];
        let mut topic_totals = vec![0u64; n_topics];
        for w in &walks {
            let t = w.topic as usize;
            for &n in &w.nodes {
                freqs[t][n as usize] += 1;
            }
            topic_totals[t] += w.nodes.len() as u64;
        }
        WalkCorpus {
            walks,
            freqs,
            topic_totals,
            symmetrized,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// Fraction of the topic's corpus occurrences that are `node`.
    pub fn frequency(&self, topic: TopicId, node: NodeId) -> f64 {
        let total = self.topic_totals[topic as usize];
        if total == 0 {
            return 0.0;
        }
        self.freqs[topic as usize][node as usize] as f64 / total as f64
    }

    /// Diagnostic dump: `topic<TAB>n0 n1 n2 ...`, one walk per line.
    pub fn write_dump<W: Write>(&self, g: &SignedTopicGraph, mut w: W) -> Result<()> {
        for walk in &self.walks {
            write!(w, "{}\t", g.topic_name(walk.topic))?;
            for (i, &n) in walk.nodes.iter().enumerate() {
                if i > 0 {
                    w.write_all(b" ")?;
                }
                w.write_all(g.node_name(n).as_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Unnormalized transition weights out of `curr`, having arrived from `prev`.
///
/// `1/p` for returning to `prev`, `1` for neighbours that are also adjacent to
/// `prev`, `1/q` for the rest. Without a predecessor every weight is `1`.
pub fn transition_weights(
    view: &TopicSubgraphView,
    prev: Option<NodeId>,
    curr: NodeId,
    p: f64,
    q: f64,
) -> Result<Vec<(NodeId, f64)>> {
    let mut buf = Vec::new();
    fill_weights(view, prev, curr, p, q, &mut buf);
    if buf.is_empty() {
        return Err(Error::DeadEnd(curr));
    }
    Ok(view.neighbors(curr).iter().copied().zip(buf).collect())
}

fn fill_weights(
    view: &TopicSubgraphView,
    prev: Option<NodeId>,
    curr: NodeId,
    p: f64,
    q: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    let nbrs = view.neighbors(curr);
    match prev {
        None => out.extend(std::iter::repeat(1.0).take(nbrs.len())),
        Some(s) => {
            let (inv_p, inv_q) = (1.0 / p, 1.0 / q);
            out.extend(nbrs.iter().map(|&v| {
                if v == s {
                    inv_p
                } else if view.has_arc(s, v) {
                    1.0
                } else {
                    inv_q
                }
            }));
        }
    }
}

/// Cumulative-sum draw from unnormalized weights.
fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    // rounding can leave x marginally above the last bucket
    weights.len() - 1
}

/// Draw the next node after `(prev, curr)`; `None` at a dead end.
pub fn step<R: Rng + ?Sized>(
    view: &TopicSubgraphView,
    prev: Option<NodeId>,
    curr: NodeId,
    p: f64,
    q: f64,
    scratch: &mut Vec<f64>,
    rng: &mut R,
) -> Option<NodeId> {
    fill_weights(view, prev, curr, p, q, scratch);
    if scratch.is_empty() {
        return None;
    }
    Some(view.neighbors(curr)[draw_index(scratch, rng)])
}

pub fn sample_walk<R: Rng + ?Sized>(
    view: &TopicSubgraphView,
    start: NodeId,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Walk {
    let mut nodes = Vec::with_capacity(cfg.walk_length);
    nodes.push(start);
    let mut scratch = Vec::new();
    let mut prev = None;
    let mut curr = start;
    while nodes.len() < cfg.walk_length {
        match step(view, prev, curr, cfg.p, cfg.q, &mut scratch, rng) {
            Some(next) => {
                nodes.push(next);
                prev = Some(curr);
                curr = next;
            }
            None => break,
        }
    }
    Walk {
        topic: view.topic(),
        nodes,
    }
}

/// `walks_per_node` walks from every node of every topic subgraph.
///
/// Each walk draws from its own stream derived from `(topic, start, index)`,
/// and output is in canonical `(topic, start, index)` order, so the corpus is
/// identical whatever the size of the rayon pool it runs on.
pub fn generate_corpus(g: &SignedTopicGraph, cfg: &WalkConfig) -> Result<WalkCorpus> {
    cfg.validate()?;
    let views = g.topic_views(cfg.symmetrize);
    Ok(generate_corpus_from_views(g, &views, cfg))
}

pub fn generate_corpus_from_views(
    g: &SignedTopicGraph,
    views: &[TopicSubgraphView],
    cfg: &WalkConfig,
) -> WalkCorpus {
    let tasks: Vec<(TopicId, NodeId)> = views
        .iter()
        .flat_map(|v| v.nodes().iter().map(move |&n| (v.topic(), n)))
        .collect();
    let walks: Vec<Walk> = tasks
        .par_iter()
        .flat_map_iter(|&(t, n)| {
            let view = &views[t as usize];
            (0..cfg.walks_per_node).map(move |i| {
                let mut r = rng::stream(cfg.seed, "walk", &[t as u64, n as u64, i as u64]);
                sample_walk(view, n, cfg, &mut r)
            })
        })
        .collect();
    WalkCorpus::from_walks(walks, g.n_nodes(), g.n_topics(), cfg.symmetrize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Sign};
    use rand::SeedableRng;

    fn graph(n: usize, pairs: &[(u32, u32)]) -> SignedTopicGraph {
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge::new(a, b, Sign::Pos, 0))
            .collect();
        SignedTopicGraph::from_edges(n, 1, edges).unwrap()
    }

    #[test]
    fn weights_follow_return_and_inout_rule() {
        // curr=1, prev=0; neighbours of 1: {0, 2, 3}; 2 adjacent to 0, 3 not
        let g = graph(4, &[(0, 1), (1, 2), (1, 3), (0, 2)]);
        let v = g.topic_subgraph(0, true).unwrap();
        let w = transition_weights(&v, Some(0), 1, 1.5, 0.5).unwrap();
        assert_eq!(w.len(), 3);
        let get = |n| w.iter().find(|(x, _)| *x == n).unwrap().1;
        assert!((get(0) - 1.0 / 1.5).abs() < 1e-12);
        assert_eq!(get(2), 1.0);
        assert_eq!(get(3), 2.0);

        let uniform = transition_weights(&v, Some(0), 1, 1.0, 1.0).unwrap();
        assert!(uniform.iter().all(|&(_, w)| w == 1.0));
        let first = transition_weights(&v, None, 1, 1.5, 0.5).unwrap();
        assert!(first.iter().all(|&(_, w)| w == 1.0));
    }

    #[test]
    fn dead_end_is_an_error() {
        let g = graph(3, &[(0, 1)]);
        let v = g.topic_subgraph(0, true).unwrap();
        assert!(matches!(transition_weights(&v, None, 2, 1.0, 1.0), Err(Error::DeadEnd(2))));
    }

    #[test]
    fn forced_alternation_on_single_edge() {
        let g = graph(2, &[(0, 1)]);
        let v = g.topic_subgraph(0, true).unwrap();
        let cfg = WalkConfig {
            walk_length: 4,
            ..Default::default()
        };
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_walk(&v, 0, &cfg, &mut r).nodes, vec![0, 1, 0, 1]);
    }

    #[test]
    fn isolated_start_truncates() {
        let g = graph(3, &[(0, 1)]);
        let v = g.topic_subgraph(0, true).unwrap();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let w = sample_walk(&v, 2, &WalkConfig::default(), &mut r);
        assert_eq!(w.nodes, vec![2]);
    }

    #[test]
    fn directed_walk_stops_at_sink() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let v = g.topic_subgraph(0, false).unwrap();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let w = sample_walk(&v, 0, &WalkConfig::default(), &mut r);
        assert_eq!(w.nodes, vec![0, 1, 2]);
    }

    #[test]
    fn corpus_counts() {
        let edges = vec![
            Edge::new(0, 1, Sign::Pos, 0),
            Edge::new(1, 2, Sign::Neg, 0),
            Edge::new(3, 4, Sign::Pos, 1),
        ];
        let g = SignedTopicGraph::from_edges(5, 2, edges).unwrap();
        let cfg = WalkConfig {
            walks_per_node: 5,
            walk_length: 6,
            ..Default::default()
        };
        let c = generate_corpus(&g, &cfg).unwrap();
        assert_eq!(c.walks.len(), 25);
        let total: u64 = c.freqs.iter().flatten().sum();
        assert_eq!(total, c.walks.iter().map(|w| w.len() as u64).sum::<u64>());

        let empty = SignedTopicGraph::from_edges(0, 0, vec![]).unwrap();
        assert!(generate_corpus(&empty, &cfg).unwrap().is_empty());
    }

    #[test]
    fn invalid_config_rejected() {
        let g = graph(2, &[(0, 1)]);
        for cfg in [
            WalkConfig { walk_length: 1, ..Default::default() },
            WalkConfig { walks_per_node: 0, ..Default::default() },
            WalkConfig { p: 0.0, ..Default::default() },
            WalkConfig { q: -1.0, ..Default::default() },
        ] {
            assert!(generate_corpus(&g, &cfg).is_err());
        }
    }
}
