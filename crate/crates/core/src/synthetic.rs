//! Seeded generator of polarized signed topic graphs.
//!
//! Nodes fall into two opinion communities per topic group. Within a group,
//! edges inside a community are positive and edges across communities are
//! negative, before independent sign noise. With `intergroup_flip` each group
//! draws its own community split, so a node's camp depends on the topic.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId, Sign, SignedTopicGraph, TopicId};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_nodes: usize,
    pub n_topics: usize,
    /// `topic_groups[t]` is the group of topic `t`.
    pub topic_groups: Vec<usize>,
    pub edges_per_topic: usize,
    pub sign_noise: f64,
    pub intergroup_flip: bool,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Topics split into `n_groups` contiguous, near-equal blocks.
    pub fn new(n_nodes: usize, n_topics: usize, n_groups: usize, edges_per_topic: usize) -> Self {
        let n_groups = n_groups.max(1);
        let topic_groups = (0..n_topics).map(|t| t * n_groups / n_topics.max(1)).collect();
        SyntheticConfig {
            n_nodes,
            n_topics,
            topic_groups,
            edges_per_topic,
            sign_noise: 0.0,
            intergroup_flip: false,
            seed: 0,
        }
    }

    pub fn n_groups(&self) -> usize {
        self.topic_groups.iter().max().map_or(0, |g| g + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_nodes < 4 {
            return bad("synthetic graphs need at least 4 nodes".into());
        }
        if !(0.0..0.5).contains(&self.sign_noise) {
            return bad(format!("sign noise must be in [0, 0.5), got {}", self.sign_noise));
        }
        if self.topic_groups.len() != self.n_topics {
            return bad("every topic needs a group".into());
        }
        let k = self.n_groups();
        if (0..k).any(|grp| !self.topic_groups.contains(&grp)) {
            return bad("topic groups must be numbered 0..k without gaps".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticGraph {
    pub graph: SignedTopicGraph,
    /// `communities[group][node]` is 0 or 1.
    pub communities: Vec<Vec<u8>>,
    pub topic_groups: Vec<usize>,
}

impl SyntheticGraph {
    pub fn community(&self, node: NodeId, topic: TopicId) -> u8 {
        self.communities[self.topic_groups[topic as usize]][node as usize]
    }

    /// Sign the noiseless community rule assigns to `(u, v)` on `topic`.
    pub fn intended_sign(&self, u: NodeId, v: NodeId, topic: TopicId) -> Sign {
        if self.community(u, topic) == self.community(v, topic) {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    /// `node<TAB>topic_group<TAB>community` sidecar.
    pub fn write_ground_truth<W: Write>(&self, mut w: W) -> Result<()> {
        for (grp, labels) in self.communities.iter().enumerate() {
            for (n, c) in labels.iter().enumerate() {
                writeln!(w, "{}\t{}\t{}", self.graph.node_name(n as NodeId), grp, c)?;
            }
        }
        Ok(())
    }
}

/// Exactly half the nodes (rounded down) in community 1.
fn split_communities<R: Rng>(n: usize, rng: &mut R) -> Vec<u8> {
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
    labels.shuffle(rng);
    labels
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticGraph> {
    cfg.validate()?;
    let n_groups = cfg.n_groups();
    let mut comm_rng = rng::stream(cfg.seed, "synthetic-communities", &[]);
    let base = split_communities(cfg.n_nodes, &mut comm_rng);
    let communities: Vec<Vec<u8>> = (0..n_groups)
        .map(|grp| {
            if cfg.intergroup_flip && grp > 0 {
                split_communities(cfg.n_nodes, &mut comm_rng)
            } else {
                base.clone()
            }
        })
        .collect();

    let mut edges = Vec::with_capacity(cfg.n_topics * cfg.edges_per_topic);
    for t in 0..cfg.n_topics {
        let mut r = rng::stream(cfg.seed, "synthetic-edges", &[t as u64]);
        let labels = &communities[cfg.topic_groups[t]];
        for _ in 0..cfg.edges_per_topic {
            let u = r.gen_range(0..cfg.n_nodes);
            let v = loop {
                let v = r.gen_range(0..cfg.n_nodes);
                if v != u {
                    break v;
                }
            };
            let mut sign = if labels[u] == labels[v] { Sign::Pos } else { Sign::Neg };
            if r.gen::<f64>() < cfg.sign_noise {
                sign = sign.flip();
            }
            edges.push(Edge::new(u as NodeId, v as NodeId, sign, t as TopicId));
        }
    }
    let node_names = (0..cfg.n_nodes).map(|i| format!("u{i}")).collect();
    let topic_names = (0..cfg.n_topics).map(|t| format!("t{t}")).collect();
    Ok(SyntheticGraph {
        graph: SignedTopicGraph::with_names(node_names, topic_names, edges)?,
        communities,
        topic_groups: cfg.topic_groups.clone(),
    })
}
