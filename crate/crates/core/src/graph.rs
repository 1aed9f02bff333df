//! Signed, directed, topic-attributed multigraphs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Mul;

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type TopicId = u32;

/// Edge polarity: agreement (`Pos`) or disagreement (`Neg`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn from_sum(sum: i64) -> Sign {
        if sum > 0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Pos
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    /// Accepts `+`, `-`, `1`, `-1`, `+1`.
    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" | "1" | "+1" => Some(Sign::Pos),
            "-" | "-1" => Some(Sign::Neg),
            _ => None,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Pos => "+1",
            Sign::Neg => "-1",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub sign: Sign,
    pub topic: TopicId,
}

impl Edge {
    pub fn new(source: NodeId, target: NodeId, sign: Sign, topic: TopicId) -> Self {
        Edge {
            source,
            target,
            sign,
            topic,
        }
    }
}

/// Directed multigraph whose edges carry a sign and a topic.
///
/// Node and topic ids are dense indices into `node_names` / `topic_names`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTopicGraph {
    node_names: Vec<String>,
    topic_names: Vec<String>,
    edges: Vec<Edge>,
}

impl SignedTopicGraph {
    /// Build a graph from already-interned edges. Names default to the decimal ids.
    pub fn from_edges(n_nodes: usize, n_topics: usize, edges: Vec<Edge>) -> Result<Self> {
        let node_names = (0..n_nodes).map(|i| i.to_string()).collect();
        let topic_names = (0..n_topics).map(|i| i.to_string()).collect();
        Self::with_names(node_names, topic_names, edges)
    }

    pub fn with_names(
        node_names: Vec<String>,
        topic_names: Vec<String>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        for e in &edges {
            for n in [e.source, e.target] {
                if n as usize >= node_names.len() {
                    return Err(Error::UnknownNode(n));
                }
            }
            if e.topic as usize >= topic_names.len() {
                return Err(Error::UnknownTopic(e.topic));
            }
            if e.source == e.target {
                return Err(Error::SelfLoop {
                    line: 0,
                    node: node_names[e.source as usize].clone(),
                });
            }
        }
        Ok(SignedTopicGraph {
            node_names,
            topic_names,
            edges,
        })
    }

    /// Same node and topic tables, different edge list.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Self> {
        Self::with_names(self.node_names.clone(), self.topic_names.clone(), edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn n_topics(&self) -> usize {
        self.topic_names.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn topic_names(&self) -> &[String] {
        &self.topic_names
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id as usize]
    }

    pub fn topic_name(&self, id: TopicId) -> &str {
        &self.topic_names[id as usize]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as NodeId)
    }

    pub fn topic_id(&self, name: &str) -> Option<TopicId> {
        self.topic_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as TopicId)
    }

    /// Parse a tab-separated `source target sign topic` edge list.
    ///
    /// Lines starting with `#` and blank lines are skipped. Parallel edges are
    /// kept as-is; see [`SignedTopicGraph::aggregate_parallel_edges`].
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut nodes: HashMap<String, NodeId> = HashMap::new();
        let mut topics: HashMap<String, TopicId> = HashMap::new();
        let mut node_names = Vec::new();
        let mut topic_names = Vec::new();
        let mut edges = Vec::new();

        fn intern(map: &mut HashMap<String, u32>, names: &mut Vec<String>, key: &str) -> u32 {
            if let Some(&id) = map.get(key) {
                return id;
            }
            let id = names.len() as u32;
            names.push(key.to_owned());
            map.insert(key.to_owned(), id);
            id
        }

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected 4 tab-separated columns, found {}", cols.len()),
                });
            }
            let (src, dst, sign, topic) = (cols[0], cols[1], cols[2].trim(), cols[3]);
            if src.is_empty() || dst.is_empty() || topic.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "empty field".into(),
                });
            }
            let sign = Sign::parse(sign).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("sign must be +1 or -1, got `{sign}`"),
            })?;
            if src == dst {
                return Err(Error::SelfLoop {
                    line: lineno,
                    node: src.to_owned(),
                });
            }
            let s = intern(&mut nodes, &mut node_names, src);
            let t = intern(&mut nodes, &mut node_names, dst);
            let tp = intern(&mut topics, &mut topic_names, topic);
            edges.push(Edge::new(s, t, sign, tp));
        }

        Ok(SignedTopicGraph {
            node_names,
            topic_names,
            edges,
        })
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.edges {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                self.node_name(e.source),
                self.node_name(e.target),
                e.sign,
                self.topic_name(e.topic)
            )?;
        }
        Ok(())
    }

    /// Collapse parallel edges: one edge per `(source, target, topic)`, signed
    /// `+1` when the sum of the parallel signs is positive and `-1` otherwise.
    ///
    /// The result is sorted by `(source, target, topic)`.
    pub fn aggregate_parallel_edges(&self) -> SignedTopicGraph {
        let mut sums: BTreeMap<(NodeId, NodeId, TopicId), i64> = BTreeMap::new();
        for e in &self.edges {
            *sums.entry((e.source, e.target, e.topic)).or_default() += e.sign.value();
        }
        let edges = sums
            .into_iter()
            .map(|((s, t, tp), sum)| Edge::new(s, t, Sign::from_sum(sum), tp))
            .collect();
        SignedTopicGraph {
            node_names: self.node_names.clone(),
            topic_names: self.topic_names.clone(),
            edges,
        }
    }

    pub fn is_aggregated(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len());
        self.edges
            .iter()
            .all(|e| seen.insert((e.source, e.target, e.topic)))
    }

    pub fn topic_subgraph(&self, topic: TopicId, symmetrize: bool) -> Result<TopicSubgraphView> {
        if topic as usize >= self.n_topics() {
            return Err(Error::UnknownTopic(topic));
        }
        let edges: Vec<Edge> = self.edges.iter().filter(|e| e.topic == topic).copied().collect();
        Ok(TopicSubgraphView::build(topic, self.n_nodes(), &edges, symmetrize))
    }

    /// All topic views at once, indexed by topic id.
    pub fn topic_views(&self, symmetrize: bool) -> Vec<TopicSubgraphView> {
        let mut by_topic: Vec<Vec<Edge>> = vec![Vec::new(); self.n_topics()];
        for e in &self.edges {
            by_topic[e.topic as usize].push(*e);
        }
        by_topic
            .iter()
            .enumerate()
            .map(|(t, es)| TopicSubgraphView::build(t as TopicId, self.n_nodes(), es, symmetrize))
            .collect()
    }
}

/// Adjacency of one topic's subgraph in CSR form over the global node ids.
///
/// Neighbour lists are sorted by node id, so both adjacency and sign lookups
/// are a binary search.
#[derive(Clone, Debug)]
pub struct TopicSubgraphView {
    topic: TopicId,
    symmetrized: bool,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    signs: Vec<Sign>,
    nodes: Vec<NodeId>,
    n_edges: usize,
}

impl TopicSubgraphView {
    /// `edges` must all belong to `topic` and be aggregated.
    ///
    /// When symmetrizing, an unordered pair carried by edges in both directions
    /// gets the sum rule over both signs (ties become `-1`).
    fn build(topic: TopicId, n_nodes: usize, edges: &[Edge], symmetrize: bool) -> Self {
        let mut arcs: BTreeMap<(NodeId, NodeId), i64> = BTreeMap::new();
        let mut present = vec![false; n_nodes];
        for e in edges {
            debug_assert_eq!(e.topic, topic);
            present[e.source as usize] = true;
            present[e.target as usize] = true;
            *arcs.entry((e.source, e.target)).or_default() += e.sign.value();
            if symmetrize {
                *arcs.entry((e.target, e.source)).or_default() += e.sign.value();
            }
        }
        let mut offsets = vec![0usize; n_nodes + 1];
        for &(s, _) in arcs.keys() {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n_nodes {
            offsets[i + 1] += offsets[i];
        }
        // BTreeMap iteration is ordered by (source, target), which is CSR order.
        let mut neighbors = Vec::with_capacity(arcs.len());
        let mut signs = Vec::with_capacity(arcs.len());
        for ((_, t), sum) in arcs {
            neighbors.push(t);
            signs.push(Sign::from_sum(sum));
        }
        let nodes = (0..n_nodes as NodeId).filter(|&n| present[n as usize]).collect();
        TopicSubgraphView {
            topic,
            symmetrized: symmetrize,
            offsets,
            neighbors,
            signs,
            nodes,
            n_edges: edges.len(),
        }
    }

    pub fn topic(&self) -> TopicId {
        self.topic
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Nodes incident to at least one edge of this topic, ascending.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Number of underlying (directed, aggregated) topic edges.
    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_arcs(&self) -> usize {
        self.neighbors.len()
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        let n = n as usize;
        if n + 1 >= self.offsets.len() {
            return &[];
        }
        &self.neighbors[self.offsets[n]..self.offsets[n + 1]]
    }

    /// `(neighbour, sign)` pairs of `n`.
    pub fn signed_neighbors(&self, n: NodeId) -> impl Iterator<Item = (NodeId, Sign)> + '_ {
        let i = n as usize;
        let range = if i + 1 < self.offsets.len() {
            self.offsets[i]..self.offsets[i + 1]
        } else {
            0..0
        };
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.signs[range].iter().copied())
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.neighbors(n).len()
    }

    pub fn has_arc(&self, from: NodeId, to: NodeId) -> bool {
        self.neighbors(from).binary_search(&to).is_ok()
    }

    /// Sign of the arc `from -> to`, if present.
    pub fn sign(&self, from: NodeId, to: NodeId) -> Option<Sign> {
        let i = from as usize;
        if i + 1 >= self.offsets.len() {
            return None;
        }
        let lo = self.offsets[i];
        self.neighbors[lo..self.offsets[i + 1]]
            .binary_search(&to)
            .ok()
            .map(|k| self.signs[lo + k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<SignedTopicGraph> {
        SignedTopicGraph::load_edge_list(s.as_bytes())
    }

    #[test]
    fn single_line() {
        let g = load("a\tb\t+1\tT0").unwrap();
        assert_eq!(g.n_nodes(), 2);
        assert_eq!(g.n_topics(), 1);
        assert_eq!(g.edges(), &[Edge::new(0, 1, Sign::Pos, 0)]);
    }

    #[test]
    fn parallel_edges_retained() {
        let g = load("a\tb\t+1\tT0\na\tb\t-1\tT0").unwrap();
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        match load("a\ta\t+1\tT0") {
            Err(Error::SelfLoop { line, node }) => {
                assert_eq!(line, 1);
                assert_eq!(node, "a");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sign_spellings_and_comments() {
        let g = load("# header\na\tb\t+\tT\nb\tc\t-\tT\n\nc\ta\t1\tT\na\tc\t-1\tT\n").unwrap();
        let signs: Vec<Sign> = g.edges().iter().map(|e| e.sign).collect();
        assert_eq!(signs, vec![Sign::Pos, Sign::Neg, Sign::Pos, Sign::Neg]);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        match load("a\tb\t+1\tT\na\tb\t0\tT") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match load("# c\na\tb\t+1") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(load("a\tb\t2\tT").is_err());
    }

    fn aggregated_sign(signs: &[Sign]) -> Sign {
        let edges = signs.iter().map(|&s| Edge::new(0, 1, s, 0)).collect();
        let g = SignedTopicGraph::from_edges(2, 1, edges).unwrap();
        let agg = g.aggregate_parallel_edges();
        assert_eq!(agg.edges().len(), 1);
        agg.edges()[0].sign
    }

    #[test]
    fn aggregation_rule() {
        use Sign::*;
        assert_eq!(aggregated_sign(&[Pos, Pos, Neg]), Pos);
        assert_eq!(aggregated_sign(&[Pos, Neg]), Neg);
        assert_eq!(aggregated_sign(&[Neg]), Neg);
        assert_eq!(aggregated_sign(&[Pos]), Pos);
    }

    fn three_edge_graph() -> SignedTopicGraph {
        load("a\tb\t+1\tT0\nb\tc\t-1\tT0\na\tc\t+1\tT1").unwrap()
    }

    #[test]
    fn topic_filtering() {
        let g = three_edge_graph();
        let v0 = g.topic_subgraph(0, false).unwrap();
        assert_eq!(v0.nodes(), &[0, 1, 2]);
        assert_eq!(v0.n_edges(), 2);
        let v1 = g.topic_subgraph(1, false).unwrap();
        assert_eq!(v1.n_edges(), 1);
        assert_eq!(v1.sign(0, 2), Some(Sign::Pos));
        assert_eq!(v1.sign(2, 0), None);
        assert!(matches!(g.topic_subgraph(2, true), Err(Error::UnknownTopic(2))));
    }

    #[test]
    fn symmetrized_view() {
        let g = three_edge_graph();
        let v = g.topic_subgraph(0, true).unwrap();
        let nb: Vec<_> = v.signed_neighbors(1).collect();
        assert_eq!(nb, vec![(0, Sign::Pos), (2, Sign::Neg)]);
        assert_eq!(v.sign(2, 1), Some(Sign::Neg));
        assert_eq!(v.n_arcs(), 4);
    }

    #[test]
    fn conflicting_directions_merge_by_sum() {
        let g = load("a\tb\t+1\tT\nb\ta\t-1\tT").unwrap();
        let v = g.topic_subgraph(0, true).unwrap();
        assert_eq!(v.sign(0, 1), Some(Sign::Neg));
        assert_eq!(v.sign(1, 0), Some(Sign::Neg));
        assert_eq!(v.degree(0), 1);
        let d = g.topic_subgraph(0, false).unwrap();
        assert_eq!(d.sign(0, 1), Some(Sign::Pos));
        assert_eq!(d.sign(1, 0), Some(Sign::Neg));
    }

    #[test]
    fn round_trip() {
        let g = load("x\ty\t+1\tA\ny\tz\t-1\tB\nx\ty\t-1\tA\nz\tx\t+1\tA").unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = SignedTopicGraph::load_edge_list(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }
}
