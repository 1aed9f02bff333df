//! Logistic-regression sign classifier over edge features, optionally with a
//! topic table learned jointly with the weights.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::edge::{phi_grad_second, phi_into, write_edge_vector, EdgeOp};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::graph::{Edge, Sign};
use crate::rng;
use crate::sgns::{combine_into, log_sigmoid, sigmoid, CombineMode};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            learning_rate: 0.05,
            epochs: 200,
            seed: 0,
        }
    }
}

/// Where the topic vector folded into the target endpoint comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopicMode {
    /// Topics ignored (same as `sigma = mask`).
    None,
    /// The store's topic table, not updated.
    Frozen(CombineMode),
    /// A fresh topic table optimized together with the classifier.
    Learned(CombineMode),
}

impl TopicMode {
    fn sigma(self) -> Option<CombineMode> {
        match self {
            TopicMode::None => None,
            TopicMode::Frozen(m) | TopicMode::Learned(m) => Some(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub phi: EdgeOp,
    pub topic_mode: TopicMode,
    /// Present only for [`TopicMode::Learned`]; `n_topics x dim`.
    pub topic_table: Option<Vec<f64>>,
}

impl LrModel {
    fn input(&self, store: &EmbeddingStore, edge: &Edge, scratch: &mut [f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        match (&self.topic_table, self.topic_mode) {
            (Some(table), TopicMode::Learned(mode)) => {
                store.check_node(edge.source)?;
                store.check_node(edge.target)?;
                let d = store.dim();
                let t = edge.topic as usize;
                if (t + 1) * d > table.len() {
                    return Err(Error::UnknownTopic(edge.topic));
                }
                combine_into(mode, &table[t * d..(t + 1) * d], store.node(edge.target), scratch);
                phi_into(self.phi, store.node(edge.source), scratch, out);
                Ok(())
            }
            _ => write_edge_vector(store, edge, self.topic_mode.sigma(), self.phi, scratch, out),
        }
    }

    /// Probability that `edge` is positive.
    pub fn predict(&self, store: &EmbeddingStore, edge: &Edge) -> Result<f64> {
        let mut scratch = vec![0.0; store.dim()];
        let mut x = Vec::new();
        self.input(store, edge, &mut scratch, &mut x)?;
        Ok(sigmoid(self.logit(&x)))
    }

    pub fn predict_all(&self, store: &EmbeddingStore, edges: &[Edge]) -> Result<Vec<f64>> {
        let mut scratch = vec![0.0; store.dim()];
        let mut x = Vec::new();
        edges
            .iter()
            .map(|e| {
                self.input(store, e, &mut scratch, &mut x)?;
                Ok(sigmoid(self.logit(&x)))
            })
            .collect()
    }

    fn logit(&self, x: &[f64]) -> f64 {
        self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Log loss of one edge and its gradients w.r.t. weights, bias and (in
    /// learned mode) the edge's topic row.
    pub fn loss_and_grads(&self, store: &EmbeddingStore, edge: &Edge) -> Result<LrGrads> {
        let d = store.dim();
        let mut scratch = vec![0.0; d];
        let mut x = Vec::new();
        self.input(store, edge, &mut scratch, &mut x)?;
        let z = self.logit(&x);
        let y = if edge.sign.is_positive() { 1.0 } else { 0.0 };
        let loss = -(y * log_sigmoid(z) + (1.0 - y) * log_sigmoid(-z));
        let g = sigmoid(z) - y;
        let weights = x.iter().map(|xi| g * xi).collect();
        let topic = match (&self.topic_table, self.topic_mode) {
            (Some(_), TopicMode::Learned(mode)) => {
                let mut gt = vec![0.0; d];
                self.topic_row_grad(mode, store, edge, &scratch, g, &mut gt);
                Some(gt)
            }
            _ => None,
        };
        Ok(LrGrads {
            loss,
            weights,
            bias: g,
            topic,
        })
    }

    /// d loss / d T[topic] given the combined target `s = sigma(T, dst)`.
    fn topic_row_grad(&self, mode: CombineMode, store: &EmbeddingStore, edge: &Edge, s: &[f64], g: f64, out: &mut [f64]) {
        let src = store.node(edge.source);
        let dst = store.node(edge.target);
        for (i, o) in out.iter_mut().enumerate() {
            let ds_dt = match mode {
                CombineMode::Mask => 0.0,
                CombineMode::Addition => 1.0,
                CombineMode::Hadamard => dst[i],
            };
            let (k, dx_ds) = phi_grad_second(self.phi, src, s, i);
            *o = g * self.weights[k] * dx_ds * ds_dt;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrGrads {
    pub loss: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub topic: Option<Vec<f64>>,
}

/// Fresh topic table for [`TopicMode::Learned`]: the identity element of the
/// combiner (0 for addition, 1 for hadamard) plus uniform noise of width 1/d.
pub fn init_topic_table(mode: CombineMode, n_topics: usize, dim: usize, seed: u64) -> Vec<f64> {
    let center = if mode == CombineMode::Hadamard { 1.0 } else { 0.0 };
    let bound = 0.5 / dim as f64;
    let mut r = rng::stream(seed, "lr-topics", &[]);
    (0..n_topics * dim)
        .map(|_| center + r.gen_range(-bound..=bound))
        .collect()
}

/// Plain per-sample SGD on the log loss, no regularization.
pub fn train_logistic(
    edges: &[Edge],
    store: &EmbeddingStore,
    phi: EdgeOp,
    topic_mode: TopicMode,
    cfg: &LrConfig,
) -> Result<LrModel> {
    if edges.is_empty() {
        return Err(Error::Eval("logistic regression needs training edges".into()));
    }
    let d = store.dim();
    let topic_table = match topic_mode {
        TopicMode::Learned(mode) => Some(init_topic_table(mode, store.n_topics(), d, cfg.seed)),
        _ => None,
    };
    let mut model = LrModel {
        weights: vec![0.0; phi.output_dim(d)],
        bias: 0.0,
        phi,
        topic_mode,
        topic_table,
    };

    let mut order: Vec<usize> = (0..edges.len()).collect();
    let mut shuffle = rng::stream(cfg.seed, "lr-shuffle", &[]);
    let lr = cfg.learning_rate;

    // fixed features can be computed once
    let fixed: Option<Vec<f64>> = if model.topic_table.is_none() {
        let mut out = Vec::with_capacity(edges.len() * model.weights.len());
        let mut scratch = vec![0.0; d];
        for e in edges {
            write_edge_vector(store, e, topic_mode.sigma(), phi, &mut scratch, &mut out)?;
        }
        Some(out)
    } else {
        None
    };

    let width = model.weights.len();
    let mut scratch = vec![0.0; d];
    let mut x = Vec::with_capacity(width);
    let mut gt = vec![0.0; d];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        for &i in &order {
            let edge = &edges[i];
            let xi: &[f64] = match &fixed {
                Some(all) => &all[i * width..(i + 1) * width],
                None => {
                    model.input(store, edge, &mut scratch, &mut x)?;
                    &x
                }
            };
            let y = if edge.sign == Sign::Pos { 1.0 } else { 0.0 };
            let g = sigmoid(model.logit(xi)) - y;
            if let TopicMode::Learned(mode) = topic_mode {
                model.topic_row_grad(mode, store, edge, &scratch, g, &mut gt);
            }
            for (w, xv) in model.weights.iter_mut().zip(xi) {
                *w -= lr * g * xv;
            }
            model.bias -= lr * g;
            if let Some(table) = model.topic_table.as_mut() {
                let t = edge.topic as usize;
                for (tv, gv) in table[t * d..(t + 1) * d].iter_mut().zip(&gt) {
                    *tv -= lr * gv;
                }
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_points_are_fit() {
        // node vectors on a line; hadamard feature is the product, sign = its sign
        let vals = [-2.0, -1.0, 1.0, 2.0];
        let store = EmbeddingStore::from_tables(1, vals.to_vec(), vec![0.0; 8], vec![0.0]).unwrap();
        let mut edges = Vec::new();
        for a in 0..4u32 {
            for b in 0..4u32 {
                if a != b {
                    let s = if vals[a as usize] * vals[b as usize] > 0.0 { Sign::Pos } else { Sign::Neg };
                    edges.push(Edge::new(a, b, s, 0));
                }
            }
        }
        let m = train_logistic(&edges, &store, EdgeOp::Hadamard, TopicMode::None, &LrConfig::default()).unwrap();
        let p = m.predict_all(&store, &edges).unwrap();
        let correct = edges
            .iter()
            .zip(&p)
            .filter(|(e, &p)| (p > 0.5) == e.sign.is_positive())
            .count();
        assert_eq!(correct, edges.len());
    }

    #[test]
    fn none_matches_mask() {
        let store = EmbeddingStore::init(5, 2, 4, 9);
        let edges: Vec<Edge> = (0..4u32)
            .map(|i| Edge::new(i, i + 1, if i % 2 == 0 { Sign::Pos } else { Sign::Neg }, i % 2))
            .collect();
        let cfg = LrConfig { epochs: 20, ..Default::default() };
        for op in EdgeOp::ALL {
            let a = train_logistic(&edges, &store, op, TopicMode::None, &cfg).unwrap();
            let b = train_logistic(&edges, &store, op, TopicMode::Frozen(CombineMode::Mask), &cfg).unwrap();
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.predict_all(&store, &edges).unwrap(), b.predict_all(&store, &edges).unwrap());
        }
    }

    #[test]
    fn learned_table_identity_init() {
        let t = init_topic_table(CombineMode::Hadamard, 2, 4, 1);
        assert!(t.iter().all(|x| (x - 1.0).abs() <= 0.125));
        let t = init_topic_table(CombineMode::Addition, 2, 4, 1);
        assert!(t.iter().all(|x| x.abs() <= 0.125));
    }
}
