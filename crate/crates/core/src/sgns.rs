//! Topic-aware skip-gram with negative sampling.
//!
//! A training pair is `(source u, topic t, context c = (node, sign))`. The
//! input representation is `h = sigma(W_t[t], W_u[u])` and the pair loss is
//!
//! ```text
//! -log s(W_c[c] . h) - sum_{c' in negatives} log s(-W_c[c'] . h)
//! ```
//!
//! with `s` the logistic function. Negatives are `(node, sign)` rows drawn
//! from the topic's own context vocabulary with unigram^0.75 weights.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::alias::AliasTable;
use crate::context::{pair_count, prefix_signs, step_signs, ContextConfig};
use crate::embedding::{ContextRow, EmbeddingStore};
use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedTopicGraph, TopicId};
use crate::rng;
use crate::walk::WalkCorpus;

/// How the topic vector is merged into the source node vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CombineMode {
    /// Topic ignored: `h = W_u`.
    Mask,
    /// `h = W_t + W_u`.
    Addition,
    /// `h = W_t * W_u` elementwise.
    Hadamard,
}

impl CombineMode {
    pub const ALL: [CombineMode; 3] = [CombineMode::Mask, CombineMode::Addition, CombineMode::Hadamard];

    pub fn name(self) -> &'static str {
        match self {
            CombineMode::Mask => "mask",
            CombineMode::Addition => "addition",
            CombineMode::Hadamard => "hadamard",
        }
    }

    pub fn uses_topic(self) -> bool {
        self != CombineMode::Mask
    }
}

impl fmt::Display for CombineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mask" => Ok(CombineMode::Mask),
            "addition" | "add" => Ok(CombineMode::Addition),
            "hadamard" | "had" => Ok(CombineMode::Hadamard),
            _ => Err(Error::Config(format!("unknown sigma mode `{s}`"))),
        }
    }
}

pub fn combine_sigma(mode: CombineMode, w_t: &[f64], w_u: &[f64]) -> Result<Vec<f64>> {
    if w_t.len() != w_u.len() {
        return Err(Error::DimMismatch(w_t.len(), w_u.len()));
    }
    let mut out = vec![0.0; w_u.len()];
    combine_into(mode, w_t, w_u, &mut out);
    Ok(out)
}

/// `w_t` may be empty under [`CombineMode::Mask`].
pub(crate) fn combine_into(mode: CombineMode, w_t: &[f64], w_u: &[f64], out: &mut [f64]) {
    match mode {
        CombineMode::Mask => out.copy_from_slice(w_u),
        CombineMode::Addition => {
            for ((o, t), u) in out.iter_mut().zip(w_t).zip(w_u) {
                *o = t + u;
            }
        }
        CombineMode::Hadamard => {
            for ((o, t), u) in out.iter_mut().zip(w_t).zip(w_u) {
                *o = t * u;
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(x))` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// `(sigmoid(x), log(sigmoid(x)))` from a single exponential.
#[inline]
pub(crate) fn sigmoid_and_log(x: f64) -> (f64, f64) {
    let e = (-x.abs()).exp();
    if x >= 0.0 {
        (1.0 / (1.0 + e), -e.ln_1p())
    } else {
        (e / (1.0 + e), x - e.ln_1p())
    }
}

/// Dot product with four independent accumulators so it vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Loss and exact gradients of one positive/negatives group w.r.t. `h`,
/// the positive row and each negative row.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGrads {
    pub loss: f64,
    pub h: Vec<f64>,
    pub pos: Vec<f64>,
    pub negs: Vec<Vec<f64>>,
}

pub fn pair_loss_and_grads(h: &[f64], w_pos: &[f64], negs: &[&[f64]]) -> PairGrads {
    let d = h.len();
    let mut grad_h = vec![0.0; d];
    let f = dot(w_pos, h);
    let mut loss = -log_sigmoid(f);
    // d/df [-log s(f)] = s(f) - 1
    let g = sigmoid(f) - 1.0;
    for (gh, c) in grad_h.iter_mut().zip(w_pos) {
        *gh += g * c;
    }
    let pos = h.iter().map(|x| g * x).collect();
    let negs = negs
        .iter()
        .map(|c| {
            let f = dot(c, h);
            loss -= log_sigmoid(-f);
            // d/df [-log s(-f)] = s(f)
            let g = sigmoid(f);
            for (gh, ci) in grad_h.iter_mut().zip(c.iter()) {
                *gh += g * ci;
            }
            h.iter().map(|x| g * x).collect()
        })
        .collect();
    PairGrads {
        loss,
        h: grad_h,
        pos,
        negs,
    }
}

/// Pair loss with gradients routed through `sigma` to the node and topic rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGrads {
    pub loss: f64,
    pub node: Vec<f64>,
    pub topic: Vec<f64>,
    pub pos: Vec<f64>,
    pub negs: Vec<Vec<f64>>,
}

pub fn sgns_loss_and_grads(
    mode: CombineMode,
    w_t: &[f64],
    w_u: &[f64],
    w_pos: &[f64],
    negs: &[&[f64]],
) -> Result<SgnsGrads> {
    let h = combine_sigma(mode, w_t, w_u)?;
    let pg = pair_loss_and_grads(&h, w_pos, negs);
    let (node, topic) = match mode {
        CombineMode::Mask => (pg.h.clone(), vec![0.0; w_t.len()]),
        CombineMode::Addition => (pg.h.clone(), pg.h.clone()),
        CombineMode::Hadamard => (
            pg.h.iter().zip(w_t).map(|(g, t)| g * t).collect(),
            pg.h.iter().zip(w_u).map(|(g, u)| g * u).collect(),
        ),
    };
    Ok(SgnsGrads {
        loss: pg.loss,
        node,
        topic,
        pos: pg.pos,
        negs: pg.negs,
    })
}

/// Probability that an occurrence with corpus frequency `freq` is dropped:
/// `max(0, 1 - sqrt(threshold / freq))`.
pub fn discard_probability(freq: f64, threshold: f64) -> f64 {
    if freq <= 0.0 {
        return 0.0;
    }
    (1.0 - (threshold / freq).sqrt()).max(0.0)
}

pub fn should_discard<R: Rng + ?Sized>(freq: f64, threshold: f64, rng: &mut R) -> bool {
    let p = discard_probability(freq, threshold);
    p > 0.0 && rng.gen::<f64>() < p
}

/// Draws before giving up on finding a negative different from the positive.
pub const MAX_NEGATIVE_RETRIES: usize = 64;

/// Per-topic unigram^0.75 noise over `(node, sign)` context rows.
#[derive(Clone, Debug)]
pub struct NoiseDistribution {
    topics: Vec<Option<(Vec<ContextRow>, AliasTable)>>,
}

impl NoiseDistribution {
    pub const POWER: f64 = 0.75;

    /// `counts[t]` lists `(row, occurrences)` for topic `t`.
    pub fn from_counts(counts: &[Vec<(ContextRow, u64)>]) -> Self {
        let topics = counts
            .iter()
            .map(|c| {
                let weights: Vec<f64> = c.iter().map(|&(_, n)| (n as f64).powf(Self::POWER)).collect();
                AliasTable::new(&weights).map(|t| (c.iter().map(|&(r, _)| r).collect(), t))
            })
            .collect();
        NoiseDistribution { topics }
    }

    /// Count contexts in the corpus exactly as training enumerates them.
    pub fn from_corpus(corpus: &WalkCorpus, prefixes: &[Vec<Sign>], n_topics: usize, window: usize) -> Self {
        let mut maps: Vec<HashMap<ContextRow, u64>> = vec![HashMap::new(); n_topics];
        for (walk, prefix) in corpus.walks.iter().zip(prefixes) {
            let n = walk.len();
            if n < 2 {
                continue;
            }
            let map = &mut maps[walk.topic as usize];
            for i in 0..n {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(n - 1);
                for j in lo..=hi {
                    if j != i {
                        *map.entry(ContextRow::new(walk.nodes[j], prefix[i] * prefix[j])).or_default() += 1;
                    }
                }
            }
        }
        let counts: Vec<Vec<(ContextRow, u64)>> = maps
            .into_iter()
            .map(|m| {
                let mut v: Vec<_> = m.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        Self::from_counts(&counts)
    }

    pub fn vocabulary(&self, topic: TopicId) -> &[ContextRow] {
        match self.topics.get(topic as usize) {
            Some(Some((rows, _))) => rows,
            _ => &[],
        }
    }

    pub fn probability(&self, topic: TopicId, row: ContextRow) -> f64 {
        match self.topics.get(topic as usize) {
            Some(Some((rows, table))) => rows
                .iter()
                .position(|&r| r == row)
                .map_or(0.0, |i| table.probability(i)),
            _ => 0.0,
        }
    }

    /// One draw that is not `positive`.
    pub fn sample_one<R: Rng + ?Sized>(
        &self,
        topic: TopicId,
        positive: ContextRow,
        rng: &mut R,
    ) -> Result<ContextRow> {
        let (rows, table) = match self.topics.get(topic as usize) {
            Some(Some(x)) => x,
            _ => return Err(Error::EmptyVocabulary(topic)),
        };
        for _ in 0..MAX_NEGATIVE_RETRIES {
            let r = rows[table.sample(rng)];
            if r != positive {
                return Ok(r);
            }
        }
        Err(Error::NegativeRetriesExhausted(MAX_NEGATIVE_RETRIES))
    }

    pub fn sample_negatives<R: Rng + ?Sized>(
        &self,
        topic: TopicId,
        count: usize,
        positive: ContextRow,
        rng: &mut R,
    ) -> Result<Vec<ContextRow>> {
        (0..count).map(|_| self.sample_one(topic, positive, rng)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainerConfig {
    pub dim: usize,
    pub sigma: CombineMode,
    pub negatives: usize,
    pub subsample: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// 1 = deterministic; more = unsynchronized (hogwild) parallel updates.
    pub threads: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            dim: 64,
            sigma: CombineMode::Addition,
            negatives: 20,
            subsample: 1e-5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
            threads: 1,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be >= 1");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample threshold must be in (0, 1]");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be >= 1");
        }
        Ok(())
    }
}

/// Smallest learning rate, as a fraction of the initial one.
pub const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    /// Mean pair loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Pairs that survived subsampling, per epoch.
    pub epoch_pairs: Vec<u64>,
}

/// Train a fresh store, see [`EmbeddingStore::init_for`].
pub fn train(
    corpus: &WalkCorpus,
    g: &SignedTopicGraph,
    ctx: &ContextConfig,
    cfg: &TrainerConfig,
) -> Result<EmbeddingStore> {
    let store = EmbeddingStore::init_for(cfg.sigma, g.n_nodes(), g.n_topics(), cfg.dim, cfg.seed);
    train_from(store, corpus, g, ctx, cfg).map(|(s, _)| s)
}

/// Continue training `store` on `corpus`.
///
/// Under [`CombineMode::Mask`] the topic table is never read, so it may be
/// empty (see [`EmbeddingStore::without_topics`]).
pub fn train_from(
    mut store: EmbeddingStore,
    corpus: &WalkCorpus,
    g: &SignedTopicGraph,
    ctx: &ContextConfig,
    cfg: &TrainerConfig,
) -> Result<(EmbeddingStore, TrainStats)> {
    cfg.validate()?;
    ctx.validate()?;
    if store.dim() != cfg.dim {
        return Err(Error::DimMismatch(store.dim(), cfg.dim));
    }
    if store.n_nodes() != g.n_nodes() {
        return Err(Error::Config("store and graph disagree on node count".into()));
    }
    if cfg.sigma.uses_topic() && store.n_topics() != g.n_topics() {
        return Err(Error::Config("store and graph disagree on topic count".into()));
    }

    let views = g.topic_views(corpus.symmetrized);
    let mut prefixes = Vec::with_capacity(corpus.walks.len());
    let mut buf = Vec::new();
    for w in &corpus.walks {
        let steps = step_signs(&views[w.topic as usize], w)?;
        prefix_signs(&steps, &mut buf);
        prefixes.push(buf.clone());
    }
    let noise = NoiseDistribution::from_corpus(corpus, &prefixes, g.n_topics(), ctx.window);

    let per_epoch: u64 = corpus
        .walks
        .iter()
        .map(|w| pair_count(w.len(), ctx.window) as u64)
        .sum();
    let total = (per_epoch * cfg.epochs as u64).max(1);

    let job = Job {
        corpus,
        prefixes: &prefixes,
        noise: &noise,
        window: ctx.window,
        cfg,
        total_pairs: total,
        scheduled: AtomicU64::new(0),
    };

    let mut stats = TrainStats::default();
    let mut order: Vec<usize> = (0..corpus.walks.len()).collect();
    let (nodes, contexts, topics) = store.tables_mut();
    let tables = Tables {
        nodes: nodes.as_mut_ptr(),
        contexts: contexts.as_mut_ptr(),
        topics: topics.as_mut_ptr(),
        dim: cfg.dim,
    };

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::stream(cfg.seed, "shuffle", &[epoch as u64]));
        let (loss, pairs) = if cfg.threads == 1 {
            let mut worker = Worker::new(cfg.dim, rng::stream(cfg.seed, "trainer", &[epoch as u64, 0]));
            // SAFETY: single worker, the tables are exclusively borrowed by
            // `store` for the whole loop.
            unsafe { worker.run(&job, tables, &order) };
            (worker.loss, worker.pairs)
        } else {
            let chunk = order.len().div_ceil(cfg.threads).max(1);
            let job = &job;
            std::thread::scope(|s| {
                let handles: Vec<_> = order
                    .chunks(chunk)
                    .enumerate()
                    .map(|(k, part)| {
                        s.spawn(move || {
                            let r = rng::stream(cfg.seed, "trainer", &[epoch as u64, k as u64]);
                            let mut worker = Worker::new(cfg.dim, r);
                            // SAFETY: hogwild. Workers race on shared rows by
                            // design; every access stays in bounds.
                            unsafe { worker.run(job, tables, part) };
                            (worker.loss, worker.pairs)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("trainer worker panicked"))
                    .fold((0.0, 0u64), |(l, p), (l2, p2)| (l + l2, p + p2))
            })
        };
        stats.epoch_losses.push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        stats.epoch_pairs.push(pairs);
    }
    Ok((store, stats))
}

struct Job<'a> {
    corpus: &'a WalkCorpus,
    prefixes: &'a [Vec<Sign>],
    noise: &'a NoiseDistribution,
    window: usize,
    cfg: &'a TrainerConfig,
    total_pairs: u64,
    scheduled: AtomicU64,
}

#[derive(Clone, Copy)]
struct Tables {
    nodes: *mut f64,
    contexts: *mut f64,
    topics: *mut f64,
    dim: usize,
}

// Shared across hogwild workers; see `train_from`.
unsafe impl Send for Tables {}
unsafe impl Sync for Tables {}

impl Tables {
    unsafe fn row<'a>(self, base: *mut f64, i: usize) -> &'a mut [f64] {
        std::slice::from_raw_parts_mut(base.add(i * self.dim), self.dim)
    }
}

struct Worker<R> {
    rng: R,
    h: Vec<f64>,
    grad_h: Vec<f64>,
    keep: Vec<bool>,
    negs: Vec<ContextRow>,
    loss: f64,
    pairs: u64,
}

impl<R: Rng> Worker<R> {
    fn new(dim: usize, rng: R) -> Self {
        Worker {
            rng,
            h: vec![0.0; dim],
            grad_h: vec![0.0; dim],
            keep: Vec::new(),
            negs: Vec::new(),
            loss: 0.0,
            pairs: 0,
        }
    }

    /// # Safety
    /// `tables` must point at live tables sized for the job's graph.
    unsafe fn run(&mut self, job: &Job<'_>, tables: Tables, order: &[usize]) {
        let cfg = job.cfg;
        for &wi in order {
            let walk = &job.corpus.walks[wi];
            let n = walk.len();
            let scheduled = pair_count(n, job.window) as u64;
            if scheduled == 0 {
                continue;
            }
            let done = job.scheduled.fetch_add(scheduled, Ordering::Relaxed);
            let lr = cfg.learning_rate
                * (1.0 - done as f64 / job.total_pairs as f64).max(MIN_LR_FRACTION);

            let topic = walk.topic;
            self.keep.clear();
            for &node in &walk.nodes {
                let f = job.corpus.frequency(topic, node);
                let drop = should_discard(f, cfg.subsample, &mut self.rng);
                self.keep.push(!drop);
            }
            let prefix = &job.prefixes[wi];
            for i in 0..n {
                if !self.keep[i] {
                    continue;
                }
                let lo = i.saturating_sub(job.window);
                let hi = (i + job.window).min(n - 1);
                for j in lo..=hi {
                    if j == i || !self.keep[j] {
                        continue;
                    }
                    let pos = ContextRow::new(walk.nodes[j], prefix[i] * prefix[j]);
                    self.negs.clear();
                    for _ in 0..cfg.negatives {
                        if let Ok(r) = job.noise.sample_one(topic, pos, &mut self.rng) {
                            self.negs.push(r);
                        }
                    }
                    self.loss += self.step(tables, cfg.sigma, walk.nodes[i], topic, pos, lr);
                    self.pairs += 1;
                }
            }
        }
    }

    /// One SGD step on a positive context and `self.negs`; returns the loss
    /// before the update.
    unsafe fn step(
        &mut self,
        tables: Tables,
        mode: CombineMode,
        source: NodeId,
        topic: TopicId,
        pos: ContextRow,
        lr: f64,
    ) -> f64 {
        let u = tables.row(tables.nodes, source as usize);
        let t: &mut [f64] = if mode.uses_topic() {
            tables.row(tables.topics, topic as usize)
        } else {
            &mut []
        };
        combine_into(mode, t, u, &mut self.h);
        self.grad_h.iter_mut().for_each(|g| *g = 0.0);

        let mut loss = 0.0;
        let targets = std::iter::once((pos, 1.0)).chain(self.negs.iter().map(|&r| (r, 0.0)));
        for (row, label) in targets {
            let c = tables.row(tables.contexts, row.index());
            let f = dot(c, &self.h);
            let (s, log_s) = sigmoid_and_log(f);
            // log s(-f) = log s(f) - f
            loss -= if label > 0.0 { log_s } else { log_s - f };
            let g = lr * (label - s);
            for ((gh, ci), hi) in self.grad_h.iter_mut().zip(c.iter_mut()).zip(&self.h) {
                *gh += g * *ci;
                *ci += g * hi;
            }
        }

        match mode {
            CombineMode::Mask => {
                for (ui, g) in u.iter_mut().zip(&self.grad_h) {
                    *ui += g;
                }
            }
            CombineMode::Addition => {
                for ((ui, ti), g) in u.iter_mut().zip(t.iter_mut()).zip(&self.grad_h) {
                    *ui += g;
                    *ti += g;
                }
            }
            CombineMode::Hadamard => {
                for ((ui, ti), g) in u.iter_mut().zip(t.iter_mut()).zip(&self.grad_h) {
                    let (u0, t0) = (*ui, *ti);
                    *ui += g * t0;
                    *ti += g * u0;
                }
            }
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sigma_modes() {
        use CombineMode::*;
        assert_eq!(combine_sigma(Mask, &[9.0, 9.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(combine_sigma(Addition, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![4.0, 6.0]);
        assert_eq!(combine_sigma(Hadamard, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert!(matches!(
            combine_sigma(Addition, &[1.0], &[1.0, 2.0]),
            Err(Error::DimMismatch(1, 2))
        ));
    }

    #[test]
    fn mode_names_parse() {
        for m in CombineMode::ALL {
            assert_eq!(m.name().parse::<CombineMode>().unwrap(), m);
        }
        assert!("sum".parse::<CombineMode>().is_err());
    }

    #[test]
    fn loss_at_zero_is_ln2() {
        let g = pair_loss_and_grads(&[0.0; 4], &[1.0; 4], &[]);
        assert!((g.loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn loss_saturates_without_nan() {
        let h = [1e3, 1e3];
        let g = pair_loss_and_grads(&h, &[1e3, 1e3], &[&[-1e3, -1e3]]);
        assert!(g.loss >= 0.0 && g.loss < 1e-300);
        assert!(g.h.iter().chain(&g.pos).all(|x| x.is_finite()));
        let g = pair_loss_and_grads(&h, &[-1e3, -1e3], &[&[1e3, 1e3]]);
        assert!(g.loss.is_finite() && g.loss > 1e6);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(1e4), 1.0);
        assert_eq!(sigmoid(-1e4), 0.0);
        assert!((log_sigmoid(-1e4) + 1e4).abs() < 1e-9);
        assert_eq!(log_sigmoid(1e4), 0.0);
    }

    #[test]
    fn discard_rule() {
        let t = 1e-5;
        assert_eq!(discard_probability(t, t), 0.0);
        assert_eq!(discard_probability(t / 2.0, t), 0.0);
        assert!((discard_probability(4.0 * t, t) - 0.5).abs() < 1e-12);
        assert!((discard_probability(t * 1e4, t) - 0.99).abs() < 1e-12);
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| !should_discard(t, t, &mut r)));
    }

    #[test]
    fn single_row_vocabulary_exhausts_retries() {
        let row = ContextRow::new(0, Sign::Pos);
        let noise = NoiseDistribution::from_counts(&[vec![(row, 5)]]);
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            noise.sample_negatives(0, 1, row, &mut r),
            Err(Error::NegativeRetriesExhausted(_))
        ));
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let noise = NoiseDistribution::from_counts(&[vec![]]);
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let row = ContextRow::new(0, Sign::Pos);
        assert!(matches!(
            noise.sample_negatives(0, 3, row, &mut r),
            Err(Error::EmptyVocabulary(0))
        ));
        assert!(matches!(
            noise.sample_negatives(5, 3, row, &mut r),
            Err(Error::EmptyVocabulary(5))
        ));
    }

    #[test]
    fn uniform_counts_give_uniform_noise() {
        let rows: Vec<_> = (0..4).map(|n| (ContextRow::new(n, Sign::Neg), 7)).collect();
        let noise = NoiseDistribution::from_counts(&[rows.clone()]);
        for (r, _) in rows {
            assert!((noise.probability(0, r) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainerConfig::default().validate().is_ok());
        for bad in [
            TrainerConfig { dim: 0, ..Default::default() },
            TrainerConfig { negatives: 0, ..Default::default() },
            TrainerConfig { subsample: 0.0, ..Default::default() },
            TrainerConfig { subsample: 1.5, ..Default::default() },
            TrainerConfig { epochs: 0, ..Default::default() },
            TrainerConfig { learning_rate: -1.0, ..Default::default() },
            TrainerConfig { threads: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn fused_step_matches_reference_gradients() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = 5;
        let lr = 0.01;
        for mode in CombineMode::ALL {
            let mut store = EmbeddingStore::init(4, 2, d, 1);
            for x in store.tables_mut().1.iter_mut() {
                *x = r.gen_range(-1.0..1.0);
            }
            for x in store.topic_mut(1) {
                *x += r.gen_range(-1.0..1.0);
            }
            let before = store.clone();
            let pos = ContextRow::new(2, Sign::Pos);
            let negs = [ContextRow::new(3, Sign::Neg), ContextRow::new(0, Sign::Pos)];
            let refs: Vec<&[f64]> = negs.iter().map(|&n| before.context(n)).collect();
            let expected = sgns_loss_and_grads(mode, before.topic(1), before.node(1), before.context(pos), &refs).unwrap();

            let (nodes, contexts, topics) = store.tables_mut();
            let tables = Tables {
                nodes: nodes.as_mut_ptr(),
                contexts: contexts.as_mut_ptr(),
                topics: topics.as_mut_ptr(),
                dim: d,
            };
            let mut w = Worker::new(d, rand_chacha::ChaCha8Rng::seed_from_u64(0));
            w.negs.extend_from_slice(&negs);
            // SAFETY: tables borrowed from `store` for this call only
            let loss = unsafe { w.step(tables, mode, 1, 1, pos, lr) };
            assert!((loss - expected.loss).abs() < 1e-12);

            let close = |after: &[f64], before: &[f64], grad: &[f64]| {
                for ((a, b), g) in after.iter().zip(before).zip(grad) {
                    assert!((a - (b - lr * g)).abs() < 1e-12, "{mode}");
                }
            };
            close(store.node(1), before.node(1), &expected.node);
            close(store.topic(1), before.topic(1), &expected.topic);
            close(store.context(pos), before.context(pos), &expected.pos);
            for (n, g) in negs.iter().zip(&expected.negs) {
                close(store.context(*n), before.context(*n), g);
            }
            assert_eq!(store.node(0), before.node(0));
        }
    }
}
