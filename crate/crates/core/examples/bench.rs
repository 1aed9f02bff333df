use std::time::Instant;
use stance_core::eval::{evaluate, EvalConfig, EvalTopics, Split};
use stance_core::*;

fn env<T: std::str::FromStr>(k: &str, d: T) -> T {
    std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(d)
}

fn main() {
    let flip = env("FLIP", 0u8) == 1;
    let noise = env("NOISE", 0.05f64);
    let syn = synthetic::generate(&SyntheticConfig {
        sign_noise: noise,
        intergroup_flip: flip,
        seed: env("SEED", 1u64),
        ..SyntheticConfig::new(1000, 20, 4, 2000)
    })
    .unwrap();
    let g = syn.graph.aggregate_parallel_edges();
    let walk = WalkConfig { walks_per_node: env("R", 5usize), walk_length: env("L", 20usize), seed: 1, ..Default::default() };
    let sigmas: Vec<CombineMode> = std::env::var("SIGMAS").unwrap_or("mask,addition".into()).split(',').map(|s| s.parse().unwrap()).collect();
    let trainers: Vec<TrainerConfig> = sigmas.iter().map(|&s| TrainerConfig {
        dim: env("DIM", 16usize), sigma: s, negatives: env("NEG", 5usize), subsample: env("SUB", 1e-3f64),
        epochs: env("EPOCHS", 1usize), learning_rate: env("LR", 0.025f64), seed: 3, threads: 1,
    }).collect();
    let cfg = EvalConfig {
        folds: env("FOLDS", 5usize), seed: env("SEED", 1u64), walk, context: ContextConfig { window: env("K", 5usize) },
        knn_ks: vec![10], phis: EdgeOp::parse_list(&std::env::var("PHIS").unwrap_or("all".into())).unwrap(), logistic: if env("LRC", 0u8) == 1 { Some(Default::default()) } else { None },
        eval_topics: if env("EVT", 1u8) == 1 { EvalTopics::Trained } else { EvalTopics::Ignore },
        ..Default::default()
    };
    let t = Instant::now();
    let r = evaluate(&g, &trainers, &cfg).unwrap();
    eprintln!("elapsed {:?} coldfrac {:.3}", t.elapsed(), r.coldstart_fraction());
    print!("{}", r.summary_table());
    for s in &sigmas {
        for split in [Split::All, Split::ColdStart] {
            eprintln!("{s} {split} best {:?}", r.best_over_phi("knn10", *s, split));
        }
    }
}
