//! Edge feature vectors built from node (and optionally topic) embeddings.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId, Sign, SignedTopicGraph, TopicId};
use crate::sgns::{combine_into, CombineMode};

/// Binary operator turning two node vectors into an edge vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeOp {
    Hadamard,
    L1,
    L2,
    Average,
    Concat,
}

impl EdgeOp {
    pub const ALL: [EdgeOp; 5] = [EdgeOp::Hadamard, EdgeOp::L1, EdgeOp::L2, EdgeOp::Average, EdgeOp::Concat];

    pub fn name(self) -> &'static str {
        match self {
            EdgeOp::Hadamard => "hadamard",
            EdgeOp::L1 => "l1",
            EdgeOp::L2 => "l2",
            EdgeOp::Average => "average",
            EdgeOp::Concat => "concat",
        }
    }

    pub fn output_dim(self, dim: usize) -> usize {
        if self == EdgeOp::Concat {
            2 * dim
        } else {
            dim
        }
    }

    /// Parse a single operator name or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<EdgeOp>> {
        if s == "all" {
            return Ok(EdgeOp::ALL.to_vec());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(EdgeOp::Hadamard),
            "l1" => Ok(EdgeOp::L1),
            "l2" => Ok(EdgeOp::L2),
            "average" | "avg" => Ok(EdgeOp::Average),
            "concat" | "concatenation" => Ok(EdgeOp::Concat),
            _ => Err(Error::Config(format!("unknown edge operator `{s}`"))),
        }
    }
}

pub fn phi(op: EdgeOp, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch(a.len(), b.len()));
    }
    let mut out = Vec::with_capacity(op.output_dim(a.len()));
    phi_into(op, a, b, &mut out);
    Ok(out)
}

/// Appends `phi(op, a, b)` to `out`. Lengths must match.
pub fn phi_into(op: EdgeOp, a: &[f64], b: &[f64], out: &mut Vec<f64>) {
    debug_assert_eq!(a.len(), b.len());
    let pairs = a.iter().zip(b);
    match op {
        EdgeOp::Hadamard => out.extend(pairs.map(|(x, y)| x * y)),
        EdgeOp::L1 => out.extend(pairs.map(|(x, y)| (x - y).abs())),
        EdgeOp::L2 => out.extend(pairs.map(|(x, y)| (x - y) * (x - y))),
        EdgeOp::Average => out.extend(pairs.map(|(x, y)| 0.5 * (x + y))),
        EdgeOp::Concat => {
            out.extend_from_slice(a);
            out.extend_from_slice(b);
        }
    }
}

/// Partial derivative of `phi(op, a, b)[k]` w.r.t. `b[i]` where it is non-zero:
/// returns `(k, d)` for the single output coordinate `b[i]` feeds.
///
/// `l1` uses the subgradient `0` at `a[i] == b[i]`.
pub fn phi_grad_second(op: EdgeOp, a: &[f64], b: &[f64], i: usize) -> (usize, f64) {
    match op {
        EdgeOp::Hadamard => (i, a[i]),
        EdgeOp::L1 => {
            let diff = b[i] - a[i];
            let d = if diff > 0.0 {
                1.0
            } else if diff < 0.0 {
                -1.0
            } else {
                0.0
            };
            (i, d)
        }
        EdgeOp::L2 => (i, 2.0 * (b[i] - a[i])),
        EdgeOp::Average => (i, 0.5),
        EdgeOp::Concat => (a.len() + i, 1.0),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFeature {
    pub vector: Vec<f64>,
    pub label: Sign,
    pub topic: TopicId,
    pub endpoints: (NodeId, NodeId),
}

/// `phi(W_u[src], sigma(W_t[topic], W_u[dst]))`; with `sigma = None` the
/// topic is not used at all. The topic only ever enters the target side.
pub fn edge_feature(
    store: &EmbeddingStore,
    edge: &Edge,
    sigma: Option<CombineMode>,
    op: EdgeOp,
) -> Result<EdgeFeature> {
    let mut vector = Vec::with_capacity(op.output_dim(store.dim()));
    let mut scratch = vec![0.0; store.dim()];
    write_edge_vector(store, edge, sigma, op, &mut scratch, &mut vector)?;
    Ok(EdgeFeature {
        vector,
        label: edge.sign,
        topic: edge.topic,
        endpoints: (edge.source, edge.target),
    })
}

/// Label-free feature construction; appends to `out`.
pub(crate) fn write_edge_vector(
    store: &EmbeddingStore,
    edge: &Edge,
    sigma: Option<CombineMode>,
    op: EdgeOp,
    scratch: &mut [f64],
    out: &mut Vec<f64>,
) -> Result<()> {
    store.check_node(edge.source)?;
    store.check_node(edge.target)?;
    let src = store.node(edge.source);
    let dst = store.node(edge.target);
    match sigma {
        None | Some(CombineMode::Mask) => phi_into(op, src, dst, out),
        Some(mode) => {
            store.check_topic(edge.topic)?;
            combine_into(mode, store.topic(edge.topic), dst, scratch);
            phi_into(op, src, scratch, out);
        }
    }
    Ok(())
}

/// Features for a batch of edges as one row-major matrix.
pub fn edge_matrix(
    store: &EmbeddingStore,
    edges: &[Edge],
    sigma: Option<CombineMode>,
    op: EdgeOp,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(edges.len() * op.output_dim(store.dim()));
    let mut scratch = vec![0.0; store.dim()];
    for e in edges {
        write_edge_vector(store, e, sigma, op, &mut scratch, &mut out)?;
    }
    Ok(out)
}

/// `src<TAB>dst<TAB>topic<TAB>label<TAB>v1,...,vd` per feature.
pub fn write_features<W: Write>(g: &SignedTopicGraph, features: &[EdgeFeature], mut w: W) -> Result<()> {
    for f in features {
        write!(
            w,
            "{}\t{}\t{}\t{}\t",
            g.node_name(f.endpoints.0),
            g.node_name(f.endpoints.1),
            g.topic_name(f.topic),
            f.label
        )?;
        for (i, x) in f.vector.iter().enumerate() {
            if i > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{x}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_table() {
        assert_eq!(phi(EdgeOp::Average, &[0.0, 2.0], &[2.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(phi(EdgeOp::L2, &[1.0, 3.0], &[1.0, 1.0]).unwrap(), vec![0.0, 4.0]);
        assert_eq!(phi(EdgeOp::Concat, &[1.0, 2.0], &[3.0, 4.0]).unwrap().len(), 4);
        assert!(matches!(phi(EdgeOp::L1, &[1.0], &[1.0, 2.0]), Err(Error::DimMismatch(1, 2))));
    }

    #[test]
    fn parse_ops() {
        assert_eq!(EdgeOp::parse_list("all").unwrap(), EdgeOp::ALL.to_vec());
        assert_eq!(EdgeOp::parse_list("l1,concat").unwrap(), vec![EdgeOp::L1, EdgeOp::Concat]);
        assert!(EdgeOp::parse_list("l3").is_err());
    }

    fn store() -> EmbeddingStore {
        // nodes a=0 [1,2], b=1 [3,4], c=2 [1,1], d=3 [0,0]; topic [1,1]
        EmbeddingStore::from_tables(
            2,
            vec![1.0, 2.0, 3.0, 4.0, 1.0, 1.0, 0.0, 0.0],
            vec![0.0; 16],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn feature_without_topic() {
        let s = store();
        let e = Edge::new(0, 1, Sign::Neg, 0);
        let f = edge_feature(&s, &e, None, EdgeOp::Hadamard).unwrap();
        assert_eq!(f.vector, vec![3.0, 8.0]);
        assert_eq!(f.label, Sign::Neg);
        for op in EdgeOp::ALL {
            assert_eq!(
                edge_feature(&s, &e, Some(CombineMode::Mask), op).unwrap().vector,
                edge_feature(&s, &e, None, op).unwrap().vector
            );
        }
    }

    #[test]
    fn topic_folded_into_target() {
        let s = store();
        let e = Edge::new(2, 3, Sign::Pos, 0);
        let f = edge_feature(&s, &e, Some(CombineMode::Addition), EdgeOp::L1).unwrap();
        assert_eq!(f.vector, vec![0.0, 0.0]);
        assert!(edge_feature(&s, &Edge::new(0, 9, Sign::Pos, 0), None, EdgeOp::L1).is_err());
        assert!(edge_feature(&s, &Edge::new(0, 1, Sign::Pos, 4), Some(CombineMode::Addition), EdgeOp::L1).is_err());
    }

    #[test]
    fn feature_dump_format() {
        let g = SignedTopicGraph::load_edge_list("a\tb\t-1\tT".as_bytes()).unwrap();
        let f = EdgeFeature {
            vector: vec![0.5, -1.0],
            label: Sign::Neg,
            topic: 0,
            endpoints: (0, 1),
        };
        let mut buf = Vec::new();
        write_features(&g, &[f], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\tb\tT\t-1\t0.5,-1\n");
    }
}
