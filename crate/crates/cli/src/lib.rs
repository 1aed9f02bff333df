//! `stance` command line: synthetic graph generation, embedding training and
//! the cross-validated link-sign evaluation sweep.
//!
//! Every flag may also be given in a `key=value` file passed with `--config`;
//! keys are the long flag names without dashes, and flags on the command line
//! win over the file.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use stance_core::eval::{evaluate, EvalConfig, EvalTopics, LrConfig};
use stance_core::sgns::{train_from, TrainStats};
use stance_core::synthetic::{generate, SyntheticConfig};
use stance_core::{
    generate_corpus, CombineMode, ContextConfig, EdgeOp, EmbeddingStore, SignedTopicGraph, TrainerConfig, WalkConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "stance", version, about = "Topic-aware signed graph embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic polarized signed topic graph.
    #[command(args_override_self = true)]
    Generate(GenerateArgs),
    /// Train node, context and topic embeddings on an edge list.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Cross-validated link-sign prediction sweep.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 1 makes every command deterministic.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    /// `key=value` file with default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GenerateArgs {
    /// Edge list to write; ground truth goes to `<out>.truth`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(4..))]
    pub nodes: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub topics: u64,
    /// Topic groups; topics are split into contiguous blocks.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub groups: u64,
    #[arg(long, default_value_t = 2000)]
    pub edges_per_topic: u64,
    /// Probability of flipping each edge sign, in [0, 0.5).
    #[arg(long, default_value_t = 0.05, value_parser = parse_noise)]
    pub noise: f64,
    /// Draw an independent community split for every topic group.
    #[arg(long, action = ArgAction::SetTrue)]
    pub flip: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub walks_per_node: u64,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(2..))]
    pub walk_length: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub window: u64,
    /// Return parameter.
    #[arg(long, default_value_t = 1.5, value_parser = parse_positive)]
    pub p: f64,
    /// In-out parameter.
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
    pub q: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub negatives: u64,
    /// Subsampling threshold in (0, 1].
    #[arg(long, default_value_t = 1e-5, value_parser = parse_unit)]
    pub subsample: f64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 0.025, value_parser = parse_positive)]
    pub lr: f64,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// Tab-separated `source target sign topic` edge list.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for nodes.emb, contexts.emb and topics.emb.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "addition", value_parser = parse_sigma)]
    pub sigma: CombineMode,
    /// Also write the walk corpus here.
    #[arg(long)]
    pub dump_walks: Option<PathBuf>,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV report path.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated combiners to compare, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_sigma_list)]
    pub sigma: SigmaList,
    /// Comma-separated edge operators, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_phi_list)]
    pub phi: PhiList,
    /// Comma-separated kNN neighbourhood sizes.
    #[arg(long, default_value = "5,10", value_parser = parse_k_list)]
    pub knn_k: KList,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    /// Score only the cold-start subset of each test fold.
    #[arg(long, action = ArgAction::SetTrue)]
    pub coldstart_only: bool,
    /// Skip the logistic-regression classifier.
    #[arg(long, action = ArgAction::SetTrue)]
    pub no_lr: bool,
    /// Also fit logistic regression with a topic table learned at classifier time.
    #[arg(long, action = ArgAction::SetTrue)]
    pub lr_learned_topics: bool,
    /// Build evaluation features from node embeddings only.
    #[arg(long, action = ArgAction::SetTrue)]
    pub ignore_topics: bool,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaList(pub Vec<CombineMode>);
#[derive(Clone, Debug, PartialEq)]
pub struct PhiList(pub Vec<EdgeOp>);
#[derive(Clone, Debug, PartialEq)]
pub struct KList(pub Vec<usize>);

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x <= 1.0 => Ok(x),
        _ => Err(format!("expected a number in (0, 1], got `{s}`")),
    }
}

fn parse_noise(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..0.5).contains(&x) => Ok(x),
        _ => Err(format!("expected a number in [0, 0.5), got `{s}`")),
    }
}

fn parse_sigma(s: &str) -> Result<CombineMode, String> {
    s.parse().map_err(|e: stance_core::Error| e.to_string())
}

fn parse_sigma_list(s: &str) -> Result<SigmaList, String> {
    if s == "all" {
        return Ok(SigmaList(CombineMode::ALL.to_vec()));
    }
    s.split(',').map(|p| parse_sigma(p.trim())).collect::<Result<_, _>>().map(SigmaList)
}

fn parse_phi_list(s: &str) -> Result<PhiList, String> {
    EdgeOp::parse_list(s).map(PhiList).map_err(|e| e.to_string())
}

fn parse_k_list(s: &str) -> Result<KList, String> {
    s.split(',')
        .map(|p| match p.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(format!("expected positive integers, got `{p}`")),
        })
        .collect::<Result<_, _>>()
        .map(KList)
}

impl WalkArgs {
    fn config(&self, seed: u64) -> WalkConfig {
        WalkConfig {
            walks_per_node: self.walks_per_node as usize,
            walk_length: self.walk_length as usize,
            p: self.p,
            q: self.q,
            seed,
            symmetrize: true,
        }
    }

    fn context(&self) -> ContextConfig {
        ContextConfig {
            window: self.window as usize,
        }
    }
}

impl ModelArgs {
    fn config(&self, sigma: CombineMode, seed: u64, threads: usize) -> TrainerConfig {
        TrainerConfig {
            dim: self.dim as usize,
            sigma,
            negatives: self.negatives as usize,
            subsample: self.subsample,
            epochs: self.epochs as usize,
            learning_rate: self.lr,
            seed,
            threads,
        }
    }
}

/// Splice `--config` file entries in front of the explicit flags so the
/// explicit ones override them.
fn expand_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, clap::Error> {
    let mut path = None;
    let mut it = args.iter().skip(2);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = it.next().map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let usage = |msg: String| Cli::command().error(clap::error::ErrorKind::InvalidValue, msg);
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;

    let sub_name = args[1].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let mut spliced = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        if key == "config" {
            return Err(usage(format!("{}:{}: nested config files are not supported", path.display(), i + 1)));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| usage(format!("{}:{}: unknown key `{key}` for {sub_name}", path.display(), i + 1)))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" | "1" | "yes" => spliced.push(OsString::from(format!("--{key}"))),
                "false" | "0" | "no" => {}
                _ => return Err(usage(format!("{}:{}: `{key}` expects true or false", path.display(), i + 1))),
            }
        } else {
            spliced.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(spliced);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

/// Parse arguments (including the program name) with config-file expansion.
pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = expand_config(args.into_iter().map(Into::into).collect())?;
    let matches = Cli::command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Run the CLI and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

/// Semantically invalid settings that slip past flag parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn check(r: stance_core::Result<()>) -> Result<()> {
    r.map_err(|e| UsageError(e.to_string()).into())
}

pub fn run(cli: &Cli) -> Result<()> {
    let threads = match &cli.command {
        Command::Generate(a) => a.common.threads,
        Command::Train(a) => a.common.threads,
        Command::Eval(a) => a.common.threads,
    } as usize;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn load_graph(path: &Path) -> Result<SignedTopicGraph> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    SignedTopicGraph::load_edge_list(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn truth_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        sign_noise: a.noise,
        intergroup_flip: a.flip,
        seed: a.common.seed,
        ..SyntheticConfig::new(a.nodes as usize, a.topics as usize, a.groups as usize, a.edges_per_topic as usize)
    };
    if a.groups > a.topics {
        return Err(UsageError("groups cannot exceed topics".into()).into());
    }
    check(cfg.validate())?;
    let syn = generate(&cfg)?;
    let mut w = create(&a.out)?;
    syn.graph.write_edge_list(&mut w)?;
    w.flush()?;
    let truth = truth_path(&a.out);
    let mut w = create(&truth)?;
    syn.write_ground_truth(&mut w)?;
    w.flush()?;
    println!(
        "wrote {} edges over {} nodes and {} topics to {}",
        syn.graph.edges().len(),
        syn.graph.n_nodes(),
        syn.graph.n_topics(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let seed = a.common.seed;
    let walk = a.walk.config(seed);
    let ctx = a.walk.context();
    let tcfg = a.model.config(a.sigma, seed, a.common.threads as usize);
    check(walk.validate())?;
    check(tcfg.validate())?;

    let g = load_graph(&a.input)?.aggregate_parallel_edges();
    let corpus = generate_corpus(&g, &walk)?;
    if let Some(path) = &a.dump_walks {
        let mut w = create(path)?;
        corpus.write_dump(&g, &mut w)?;
        w.flush()?;
    }
    let init = EmbeddingStore::init_for(tcfg.sigma, g.n_nodes(), g.n_topics(), tcfg.dim, tcfg.seed);
    let (store, stats): (EmbeddingStore, TrainStats) = train_from(init, &corpus, &g, &ctx, &tcfg)?;
    for (e, (loss, pairs)) in stats.epoch_losses.iter().zip(&stats.epoch_pairs).enumerate() {
        println!("epoch {}\tmean loss {:.6}\tpairs {}", e + 1, loss, pairs);
    }

    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut w = create(&a.out.join("nodes.emb"))?;
    store.write_nodes(&g, &mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("contexts.emb"))?;
    store.write_contexts(&g, &mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("topics.emb"))?;
    store.write_topics(&g, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let seed = a.common.seed;
    // trainers run single-threaded inside folds so reports do not depend on --threads
    let trainers: Vec<TrainerConfig> = a.sigma.0.iter().map(|&s| a.model.config(s, seed, 1)).collect();
    let cfg = EvalConfig {
        folds: a.folds as usize,
        seed,
        walk: a.walk.config(seed),
        context: a.walk.context(),
        phis: a.phi.0.clone(),
        knn_ks: a.knn_k.0.clone(),
        logistic: (!a.no_lr).then(|| LrConfig {
            seed,
            ..LrConfig::default()
        }),
        logistic_learned_topics: a.lr_learned_topics && !a.no_lr,
        eval_topics: if a.ignore_topics { EvalTopics::Ignore } else { EvalTopics::Trained },
        coldstart_only: a.coldstart_only,
    };
    check(cfg.walk.validate())?;
    for t in &trainers {
        check(t.validate())?;
    }

    let g = load_graph(&a.input)?;
    let report = evaluate(&g, &trainers, &cfg)?;
    let mut w = create(&a.out)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    print!("{}", report.summary_table());
    Ok(())
}
