//! Sign-informed skip-gram contexts.
//!
//! The sign attached to a context is the product of the edge signs along the
//! walk segment that joins it to the source position: a friend of a friend is
//! a friend, a friend of an enemy is an enemy, an enemy of an enemy is a
//! friend.

use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, TopicId, TopicSubgraphView};
use crate::walk::Walk;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContextConfig {
    pub window: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig { window: 5 }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingExample {
    pub source: NodeId,
    pub topic: TopicId,
    pub contexts: Vec<(NodeId, Sign)>,
}

/// Signs of the walk's steps: `steps[i]` is the sign of `nodes[i] -> nodes[i+1]`.
pub fn step_signs(view: &TopicSubgraphView, walk: &Walk) -> Result<Vec<Sign>> {
    walk.nodes
        .windows(2)
        .map(|w| view.sign(w[0], w[1]).ok_or(Error::MissingEdge(w[0], w[1])))
        .collect()
}

/// Prefix products of step signs: `out[i]` is the product over steps `0..i`.
///
/// The sign between positions `i` and `j` is then `out[i] * out[j]`.
pub fn prefix_signs(steps: &[Sign], out: &mut Vec<Sign>) {
    out.clear();
    out.reserve(steps.len() + 1);
    let mut acc = Sign::Pos;
    out.push(acc);
    for &s in steps {
        acc = acc * s;
        out.push(acc);
    }
}

/// Inferred sign between `walk.nodes[center]` and `walk.nodes[center + offset]`.
pub fn inferred_sign(
    view: &TopicSubgraphView,
    walk: &Walk,
    center: usize,
    offset: isize,
) -> Result<Sign> {
    let other = center as isize + offset;
    if offset == 0 || other < 0 || other as usize >= walk.len() || center >= walk.len() {
        return Err(Error::Config(format!(
            "offset {offset} from position {center} is outside a walk of length {}",
            walk.len()
        )));
    }
    let (lo, hi) = if offset > 0 {
        (center, other as usize)
    } else {
        (other as usize, center)
    };
    let mut sign = Sign::Pos;
    for m in lo + 1..=hi {
        let (a, b) = (walk.nodes[m - 1], walk.nodes[m]);
        sign = sign * view.sign(a, b).ok_or(Error::MissingEdge(a, b))?;
    }
    Ok(sign)
}

/// One example per walk position, with up to `window` contexts on each side.
///
/// Repeated nodes in a window are kept as separate contexts. Length-1 walks
/// yield nothing.
pub fn build_examples(
    view: &TopicSubgraphView,
    walk: &Walk,
    cfg: &ContextConfig,
) -> Result<Vec<TrainingExample>> {
    if walk.len() < 2 {
        return Ok(Vec::new());
    }
    let steps = step_signs(view, walk)?;
    let mut prefix = Vec::new();
    prefix_signs(&steps, &mut prefix);
    let n = walk.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window).min(n - 1);
            let contexts = (lo..=hi)
                .filter(|&j| j != i)
                .map(|j| (walk.nodes[j], prefix[i] * prefix[j]))
                .collect();
            TrainingExample {
                source: walk.nodes[i],
                topic: walk.topic,
                contexts,
            }
        })
        .collect())
}

/// Number of (source, context) pairs `build_examples` produces for a walk of
/// length `len`.
pub fn pair_count(len: usize, window: usize) -> usize {
    if len < 2 {
        return 0;
    }
    (0..len)
        .map(|i| i.min(window) + (len - 1 - i).min(window))
        .sum()
}
