//! Learned embedding tables and their text export.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedTopicGraph, TopicId};
use crate::rng;
use crate::sgns::CombineMode;

/// Row of the context table: `(node, sign)` packed as `2 * node + (sign == -1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextRow(pub u32);

impl ContextRow {
    pub fn new(node: NodeId, sign: Sign) -> Self {
        ContextRow(2 * node + u32::from(sign == Sign::Neg))
    }

    pub fn node(self) -> NodeId {
        self.0 / 2
    }

    pub fn sign(self) -> Sign {
        if self.0 % 2 == 0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Node table `W_u` (|V| x d), context table `W_c` (2|V| x d) and topic
/// table `W_t` (|T| x d), stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    nodes: Vec<f64>,
    contexts: Vec<f64>,
    topics: Vec<f64>,
}

impl EmbeddingStore {
    pub fn zeros(n_nodes: usize, n_topics: usize, dim: usize) -> Self {
        EmbeddingStore {
            dim,
            nodes: vec![0.0; n_nodes * dim],
            contexts: vec![0.0; 2 * n_nodes * dim],
            topics: vec![0.0; n_topics * dim],
        }
    }

    /// Node and topic rows uniform in `[-0.5/d, 0.5/d]`, contexts zero.
    ///
    /// The node and topic tables draw from separate streams, so the node
    /// initialization does not depend on how many topics there are.
    pub fn init(n_nodes: usize, n_topics: usize, dim: usize, seed: u64) -> Self {
        let mut s = Self::zeros(n_nodes, n_topics, dim);
        let bound = 0.5 / dim as f64;
        let mut r = rng::stream(seed, "init-nodes", &[]);
        s.nodes.iter_mut().for_each(|x| *x = r.gen_range(-bound..=bound));
        let mut r = rng::stream(seed, "init-topics", &[]);
        s.topics.iter_mut().for_each(|x| *x = r.gen_range(-bound..=bound));
        s
    }

    /// [`EmbeddingStore::init`], with topic rows centred on the identity of
    /// `sigma`: 1 for hadamard, 0 otherwise. A near-zero hadamard topic would
    /// scale every node vector to near zero and stall training.
    pub fn init_for(sigma: CombineMode, n_nodes: usize, n_topics: usize, dim: usize, seed: u64) -> Self {
        let mut s = Self::init(n_nodes, n_topics, dim, seed);
        if sigma == CombineMode::Hadamard {
            s.topics.iter_mut().for_each(|x| *x += 1.0);
        }
        s
    }

    pub fn from_tables(dim: usize, nodes: Vec<f64>, contexts: Vec<f64>, topics: Vec<f64>) -> Result<Self> {
        if dim == 0 || nodes.len() % dim != 0 || topics.len() % dim != 0 {
            return Err(Error::Config("table sizes must be multiples of dim".into()));
        }
        if contexts.len() != 2 * nodes.len() {
            return Err(Error::Config("context table must have 2 rows per node".into()));
        }
        Ok(EmbeddingStore {
            dim,
            nodes,
            contexts,
            topics,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn n_topics(&self) -> usize {
        self.topics.len() / self.dim
    }

    pub fn node(&self, n: NodeId) -> &[f64] {
        let d = self.dim;
        &self.nodes[n as usize * d..(n as usize + 1) * d]
    }

    pub fn node_mut(&mut self, n: NodeId) -> &mut [f64] {
        let d = self.dim;
        &mut self.nodes[n as usize * d..(n as usize + 1) * d]
    }

    pub fn context(&self, row: ContextRow) -> &[f64] {
        let d = self.dim;
        &self.contexts[row.index() * d..(row.index() + 1) * d]
    }

    pub fn context_mut(&mut self, row: ContextRow) -> &mut [f64] {
        let d = self.dim;
        &mut self.contexts[row.index() * d..(row.index() + 1) * d]
    }

    pub fn topic(&self, t: TopicId) -> &[f64] {
        let d = self.dim;
        &self.topics[t as usize * d..(t as usize + 1) * d]
    }

    pub fn topic_mut(&mut self, t: TopicId) -> &mut [f64] {
        let d = self.dim;
        &mut self.topics[t as usize * d..(t as usize + 1) * d]
    }

    pub fn node_table(&self) -> &[f64] {
        &self.nodes
    }

    pub fn context_table(&self) -> &[f64] {
        &self.contexts
    }

    pub fn topic_table(&self) -> &[f64] {
        &self.topics
    }

    /// Drop the topic table entirely (zero rows).
    pub fn without_topics(mut self) -> Self {
        self.topics.clear();
        self
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64]) {
        (&mut self.nodes, &mut self.contexts, &mut self.topics)
    }

    pub fn is_finite(&self) -> bool {
        self.nodes
            .iter()
            .chain(&self.contexts)
            .chain(&self.topics)
            .all(|x| x.is_finite())
    }

    pub fn check_node(&self, n: NodeId) -> Result<()> {
        if (n as usize) < self.n_nodes() {
            Ok(())
        } else {
            Err(Error::UnknownNode(n))
        }
    }

    pub fn check_topic(&self, t: TopicId) -> Result<()> {
        if (t as usize) < self.n_topics() {
            Ok(())
        } else {
            Err(Error::UnknownTopic(t))
        }
    }

    pub fn write_nodes<W: Write>(&self, g: &SignedTopicGraph, w: W) -> Result<()> {
        write_rows(w, self.dim, g.node_names().iter().map(String::as_str), &self.nodes)
    }

    pub fn write_contexts<W: Write>(&self, g: &SignedTopicGraph, w: W) -> Result<()> {
        let names: Vec<String> = g
            .node_names()
            .iter()
            .flat_map(|n| [format!("{n}__pos"), format!("{n}__neg")])
            .collect();
        write_rows(w, self.dim, names.iter().map(String::as_str), &self.contexts)
    }

    pub fn write_topics<W: Write>(&self, g: &SignedTopicGraph, w: W) -> Result<()> {
        write_rows(w, self.dim, g.topic_names().iter().map(String::as_str), &self.topics)
    }
}

/// `<count> <dim>` header, then `name v1 ... vd` per row.
///
/// Values use Rust's shortest round-trip formatting, so files are exact.
fn write_rows<'a, W: Write>(
    mut w: W,
    dim: usize,
    names: impl Iterator<Item = &'a str>,
    table: &[f64],
) -> Result<()> {
    let rows = table.len() / dim;
    writeln!(w, "{rows} {dim}")?;
    for (name, row) in names.zip(table.chunks_exact(dim)) {
        w.write_all(name.as_bytes())?;
        for x in row {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse a table written by the export functions into `(names, dim, rows)`.
pub fn read_rows(text: &str) -> Result<(Vec<String>, usize, Vec<f64>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let mut hdr = header.split_whitespace().map(str::parse::<usize>);
    let (count, dim) = match (hdr.next(), hdr.next()) {
        (Some(Ok(c)), Some(Ok(d))) => (c, d),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "header must be `<count> <dim>`".into(),
            })
        }
    };
    let mut names = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * dim);
    for (i, line) in lines.enumerate() {
        let mut parts = line.split(' ');
        names.push(parts.next().unwrap_or_default().to_owned());
        let before = values.len();
        for p in parts {
            values.push(p.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?);
        }
        if values.len() - before != dim {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {dim} values"),
            });
        }
    }
    if names.len() != count {
        return Err(Error::Parse {
            line: names.len() + 1,
            msg: format!("expected {count} rows, found {}", names.len()),
        });
    }
    Ok((names, dim, values))
}
