//! Joint user and topic embeddings for signed, topic-attributed interaction
//! graphs.
//!
//! The pipeline is:
//!
//! 1. [`graph`]: load a signed topic multigraph, aggregate parallel edges and
//!    cut it into per-topic views.
//! 2. [`walk`]: second-order (node2vec-style) random walks on every topic view.
//! 3. [`context`]: turn walks into `(node, sign)` contexts, where the sign of a
//!    context is the product of edge signs along the walk segment.
//! 4. [`sgns`]: topic-aware skip-gram with negative sampling that learns node,
//!    context and topic tables.
//! 5. [`edge`] and [`eval`]: edge features, kNN / logistic-regression sign
//!    classifiers, cross-validated AUC and the cold-start subset.
//!
//! [`synthetic`] generates polarized benchmark graphs with known communities.

pub mod alias;
pub mod context;
pub mod edge;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod rng;
pub mod sgns;
pub mod synthetic;
pub mod walk;

pub use context::{build_examples, inferred_sign, ContextConfig, TrainingExample};
pub use edge::{edge_feature, phi, EdgeFeature, EdgeOp};
pub use embedding::{ContextRow, EmbeddingStore};
pub use error::{Error, Result};
pub use graph::{Edge, NodeId, Sign, SignedTopicGraph, TopicId, TopicSubgraphView};
pub use sgns::{combine_sigma, train, CombineMode, TrainerConfig};
pub use synthetic::{SyntheticConfig, SyntheticGraph};
pub use walk::{generate_corpus, sample_walk, transition_weights, Walk, WalkConfig, WalkCorpus};
