//! Link-sign prediction: cross-validated sweep over trainer combiners, edge
//! operators and classifiers, scored by AUC on the full test split and on the
//! cold-start subset.

mod auc;
mod knn;
mod logistic;
mod report;
mod split;

pub use auc::auc;
pub use knn::{knn_score, KnnIndex};
pub use logistic::{init_topic_table, train_logistic, LrConfig, LrGrads, LrModel, TopicMode};
pub use report::{AucRecord, EvalReport, FoldInfo, Split};
pub use split::{balance_downsample, coldstart_indices, coldstart_subset, make_folds, FoldSplit};

use rayon::prelude::*;

use crate::context::ContextConfig;
use crate::edge::{edge_matrix, EdgeOp};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::graph::{Edge, Sign, SignedTopicGraph};
use crate::rng::derive_seed;
use crate::sgns::{train, CombineMode, TrainerConfig};
use crate::walk::{generate_corpus, WalkConfig};

/// Which topic vector, if any, is folded into the target endpoint when
/// building evaluation features.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalTopics {
    /// Node embeddings only.
    Ignore,
    /// The trained topic table, combined with the trainer's own sigma.
    Trained,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub walk: WalkConfig,
    pub context: ContextConfig,
    pub phis: Vec<EdgeOp>,
    /// kNN neighbourhood sizes; empty disables kNN.
    pub knn_ks: Vec<usize>,
    /// Logistic regression on fixed features; `None` disables it.
    pub logistic: Option<LrConfig>,
    /// Also fit logistic regression with a topic table learned at
    /// classifier time (meaningful for topic-agnostic stores).
    pub logistic_learned_topics: bool,
    pub eval_topics: EvalTopics,
    pub coldstart_only: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 5,
            seed: 0,
            walk: WalkConfig::default(),
            context: ContextConfig::default(),
            phis: EdgeOp::ALL.to_vec(),
            knn_ks: vec![5, 10],
            logistic: Some(LrConfig::default()),
            logistic_learned_topics: false,
            eval_topics: EvalTopics::Trained,
            coldstart_only: false,
        }
    }
}

pub fn knn_name(k: usize) -> String {
    format!("knn{k}")
}

pub const LR_NAME: &str = "lr";
pub const LR_LEARNED_NAME: &str = "lr-learned";

/// Everything one fold needs to be scored.
struct FoldData<'a> {
    fold: usize,
    balanced: Vec<Edge>,
    test: &'a [Edge],
    /// Positions of the cold-start edges within `test`.
    coldstart: Vec<usize>,
}

/// Full sweep: per fold, train one store per trainer config on the fold's
/// training edges, then score every (classifier, operator) pair.
///
/// Folds run on the current rayon pool; each fold is deterministic on its own.
pub fn evaluate(g: &SignedTopicGraph, trainers: &[TrainerConfig], cfg: &EvalConfig) -> Result<EvalReport> {
    if trainers.is_empty() {
        return Err(Error::Config("no trainer configurations".into()));
    }
    for t in trainers {
        t.validate()?;
    }
    cfg.walk.validate()?;
    cfg.context.validate()?;
    if cfg.phis.is_empty() {
        return Err(Error::Config("no edge operators".into()));
    }
    if cfg.knn_ks.contains(&0) {
        return Err(Error::Config("kNN k must be >= 1".into()));
    }
    let g = if g.is_aggregated() { g.clone() } else { g.aggregate_parallel_edges() };
    let folds = make_folds(&g, cfg.folds, cfg.seed)?;

    let per_fold: Vec<Result<(Vec<AucRecord>, FoldInfo)>> = folds
        .par_iter()
        .map(|f| evaluate_fold(&g, f, trainers, cfg))
        .collect();
    let mut report = EvalReport::default();
    for r in per_fold {
        let (records, info) = r?;
        report.records.extend(records);
        report.folds.push(info);
    }
    Ok(report)
}

fn evaluate_fold(
    g: &SignedTopicGraph,
    fold: &FoldSplit,
    trainers: &[TrainerConfig],
    cfg: &EvalConfig,
) -> Result<(Vec<AucRecord>, FoldInfo)> {
    let f = fold.fold_index as u64;
    let train_g = g.with_edges(fold.train_edges.clone())?;
    let walk_cfg = WalkConfig {
        seed: derive_seed(cfg.seed, "walks", &[f]),
        ..cfg.walk
    };
    let corpus = generate_corpus(&train_g, &walk_cfg)?;
    let data = FoldData {
        fold: fold.fold_index,
        balanced: balance_downsample(&fold.train_edges, derive_seed(cfg.seed, "downsample", &[f]))?,
        test: &fold.test_edges,
        coldstart: coldstart_indices(&fold.train_edges, &fold.test_edges),
    };
    let info = FoldInfo {
        fold: fold.fold_index,
        n_train: fold.train_edges.len(),
        n_balanced: data.balanced.len(),
        n_test: fold.test_edges.len(),
        n_coldstart: data.coldstart.len(),
    };

    let mut records = Vec::new();
    for (ti, tcfg) in trainers.iter().enumerate() {
        let tcfg = TrainerConfig {
            seed: derive_seed(tcfg.seed, "fold-trainer", &[f, ti as u64]),
            ..*tcfg
        };
        let store = train(&corpus, &train_g, &cfg.context, &tcfg)?;
        score_store(&store, tcfg.sigma, &data, cfg, &mut records)?;
    }
    Ok((records, info))
}

fn labels(edges: &[Edge]) -> Vec<Sign> {
    edges.iter().map(|e| e.sign).collect()
}

fn score_store(
    store: &EmbeddingStore,
    sigma: CombineMode,
    data: &FoldData<'_>,
    cfg: &EvalConfig,
    out: &mut Vec<AucRecord>,
) -> Result<()> {
    let eval_sigma = match cfg.eval_topics {
        EvalTopics::Ignore => None,
        EvalTopics::Trained => Some(sigma),
    };
    let train_labels = labels(&data.balanced);
    // score only what some split needs; the cold-start split is a subset of the test fold
    let scored: Vec<Edge> = if cfg.coldstart_only {
        data.coldstart.iter().map(|&i| data.test[i]).collect()
    } else {
        data.test.to_vec()
    };
    let mut splits: Vec<(Split, Vec<usize>)> = Vec::new();
    if !cfg.coldstart_only {
        splits.push((Split::All, (0..scored.len()).collect()));
        splits.push((Split::ColdStart, data.coldstart.clone()));
    } else {
        splits.push((Split::ColdStart, (0..scored.len()).collect()));
    }

    let mut push = |classifier: &str, phi: EdgeOp, scores: &[f64]| -> Result<()> {
        for (split, idx) in &splits {
            let ls: Vec<Sign> = idx.iter().map(|&i| scored[i].sign).collect();
            let n_pos = ls.iter().filter(|s| s.is_positive()).count();
            if n_pos == 0 || n_pos == ls.len() {
                // AUC undefined on a one-class split
                continue;
            }
            let sub: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
            out.push(AucRecord {
                classifier: classifier.to_owned(),
                sigma,
                phi,
                fold: data.fold,
                split: *split,
                auc: auc(&sub, &ls)?,
                n: idx.len(),
            });
        }
        Ok(())
    };

    for &phi in &cfg.phis {
        if !cfg.knn_ks.is_empty() {
            let width = phi.output_dim(store.dim());
            let index = KnnIndex::new(width, edge_matrix(store, &data.balanced, eval_sigma, phi)?, train_labels.clone())?;
            let queries = edge_matrix(store, &scored, eval_sigma, phi)?;
            let per_query: Vec<Vec<f64>> = queries
                .par_chunks_exact(width)
                .map(|q| index.scores(q, &cfg.knn_ks))
                .collect::<Result<_>>()?;
            for (ki, &k) in cfg.knn_ks.iter().enumerate() {
                let scores: Vec<f64> = per_query.iter().map(|s| s[ki]).collect();
                push(&knn_name(k), phi, &scores)?;
            }
        }
        if let Some(lr) = &cfg.logistic {
            let mut modes = vec![(LR_NAME, eval_sigma.map_or(TopicMode::None, TopicMode::Frozen))];
            if cfg.logistic_learned_topics {
                let learned = if sigma.uses_topic() { sigma } else { CombineMode::Addition };
                modes.push((LR_LEARNED_NAME, TopicMode::Learned(learned)));
            }
            for (name, mode) in modes {
                let lr_cfg = LrConfig {
                    seed: derive_seed(lr.seed, "lr", &[data.fold as u64]),
                    ..*lr
                };
                let model = train_logistic(&data.balanced, store, phi, mode, &lr_cfg)?;
                push(name, phi, &model.predict_all(store, &scored)?)?;
            }
        }
    }
    Ok(())
}
