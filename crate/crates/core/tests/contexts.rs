use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stance_core::context::pair_count;
use stance_core::{
    build_examples, generate_corpus, inferred_sign, ContextConfig, Edge, Sign, SignedTopicGraph, Walk, WalkConfig,
};

fn random_graph(r: &mut ChaCha8Rng) -> SignedTopicGraph {
    let n = r.gen_range(3..=50u32);
    let m = r.gen_range(n as usize..4 * n as usize);
    let edges = (0..m)
        .map(|_| {
            let s = r.gen_range(0..n);
            let t = (s + r.gen_range(1..n)) % n;
            Edge::new(s, t, if r.gen::<bool>() { Sign::Pos } else { Sign::Neg }, 0)
        })
        .collect();
    SignedTopicGraph::from_edges(n as usize, 1, edges).unwrap().aggregate_parallel_edges()
}

#[test]
fn window_signs_equal_segment_products() {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let mut checked_walks = 0;
    let mut checked_pairs = 0;
    while checked_walks < 1000 {
        let g = random_graph(&mut r);
        let view = g.topic_subgraph(0, true).unwrap();
        let cfg = WalkConfig { walks_per_node: 1, walk_length: r.gen_range(2..30), seed: r.gen(), ..Default::default() };
        let ctx = ContextConfig { window: r.gen_range(1..8) };
        for walk in generate_corpus(&g, &cfg).unwrap().walks.into_iter().take(1000 - checked_walks) {
            let examples = build_examples(&view, &walk, &ctx).unwrap();
            for (i, ex) in examples.iter().enumerate() {
                let lo = i.saturating_sub(ctx.window);
                let others = (lo..=(i + ctx.window).min(walk.len() - 1)).filter(|&j| j != i);
                for (j, &(node, sign)) in others.zip(&ex.contexts) {
                    assert_eq!(node, walk.nodes[j]);
                    // naive product over the segment, computed from edge signs directly
                    let (a, b) = (i.min(j), i.max(j));
                    let naive = (a..b).fold(Sign::Pos, |acc, m| acc * view.sign(walk.nodes[m], walk.nodes[m + 1]).unwrap());
                    assert_eq!(sign, naive);
                    assert_eq!(inferred_sign(&view, &walk, i, j as isize - i as isize).unwrap(), naive);
                    checked_pairs += 1;
                }
            }
            checked_walks += 1;
        }
    }
    assert!(checked_pairs > 10_000);
}

#[test]
fn balance_examples() {
    // + then - : friend of friend is a friend, enemy of friend is an enemy
    let g = SignedTopicGraph::from_edges(
        4,
        1,
        vec![Edge::new(0, 1, Sign::Pos, 0), Edge::new(1, 2, Sign::Neg, 0), Edge::new(2, 3, Sign::Neg, 0)],
    )
    .unwrap();
    let view = g.topic_subgraph(0, true).unwrap();
    let walk = Walk { topic: 0, nodes: vec![0, 1, 2, 3] };
    assert_eq!(inferred_sign(&view, &walk, 0, 1).unwrap(), Sign::Pos);
    assert_eq!(inferred_sign(&view, &walk, 0, 2).unwrap(), Sign::Neg);
    assert_eq!(inferred_sign(&view, &walk, 0, 3).unwrap(), Sign::Pos);
    assert_eq!(inferred_sign(&view, &walk, 3, -2).unwrap(), Sign::Pos);
    assert!(inferred_sign(&view, &walk, 0, 4).is_err());
    assert!(inferred_sign(&view, &walk, 1, 0).is_err());
}

proptest! {
    #[test]
    fn signs_are_symmetric_and_counts_match(seed in any::<u64>(), window in 1usize..7, len in 2usize..25) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut r);
        let view = g.topic_subgraph(0, true).unwrap();
        let cfg = WalkConfig { walks_per_node: 1, walk_length: len, seed, ..Default::default() };
        let ctx = ContextConfig { window };
        for walk in generate_corpus(&g, &cfg).unwrap().walks.iter().take(5) {
            let ex = build_examples(&view, walk, &ctx).unwrap();
            let total: usize = ex.iter().map(|e| e.contexts.len()).sum();
            prop_assert_eq!(total, pair_count(walk.len(), window));
            for i in 0..walk.len() {
                for j in 0..walk.len() {
                    if i != j {
                        let off = j as isize - i as isize;
                        prop_assert_eq!(
                            inferred_sign(&view, walk, i, off).unwrap(),
                            inferred_sign(&view, walk, j, -off).unwrap()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn short_walks_yield_nothing() {
    let g = SignedTopicGraph::from_edges(2, 1, vec![Edge::new(0, 1, Sign::Pos, 0)]).unwrap();
    let view = g.topic_subgraph(0, true).unwrap();
    let walk = Walk { topic: 0, nodes: vec![0] };
    assert!(build_examples(&view, &walk, &ContextConfig::default()).unwrap().is_empty());
    assert_eq!(pair_count(1, 5), 0);
    assert_eq!(pair_count(4, 1), 6);
    assert_eq!(pair_count(4, 10), 12);
}
