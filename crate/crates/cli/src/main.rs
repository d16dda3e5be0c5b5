//! `smtm`: preprocess documents, train seed-guided multi-label topic models,
//! predict, evaluate, inspect topics, and generate synthetic corpora.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use smtm_cli::ops::{self, Variant};
use smtm_cli::CliError;
use smtm_core::synth::SynthSpec;

#[derive(Parser)]
#[command(
    name = "smtm",
    version,
    about = "Seed-guided multi-label topic modeling"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tokenize and filter raw documents into a corpus bundle
    Preprocess(PreprocessArgs),
    /// Run sampling chains and write one checkpoint per run
    Train(TrainArgs),
    /// Write per-run label predictions from checkpoints
    Predict(PredictArgs),
    /// Score checkpoint predictions against gold labels
    Eval(EvalArgs),
    /// Print the strongest words of each category-topic
    Topics(TopicsArgs),
    /// Generate a synthetic labeled corpus with planted seed words
    Synth(SynthArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input documents, one JSON object per line: id, text, optional labels
    input: PathBuf,
    /// Corpus bundle to write
    #[arg(short, long, required_unless_present = "stats_only")]
    output: Option<PathBuf>,
    /// Drop words appearing in fewer documents than this
    #[arg(long, default_value_t = 5)]
    min_df: usize,
    /// Drop tokens shorter than this many characters
    #[arg(long, default_value_t = 3)]
    min_len: usize,
    /// Stopword file, one word per line (default: built-in English list)
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Keep original character case instead of lowercasing
    #[arg(long)]
    keep_case: bool,
    /// Print the corpus summary without writing a bundle
    #[arg(long)]
    stats_only: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus bundle from `preprocess`
    #[arg(long)]
    corpus: PathBuf,
    /// Seed file: one `name: word word ...` line per category
    #[arg(long)]
    seeds: PathBuf,
    /// Directory for checkpoints and convergence telemetry
    #[arg(short, long)]
    out: PathBuf,
    /// Sampling sweeps per run
    #[arg(long, default_value_t = 100)]
    iterations: u32,
    /// Independent chains
    #[arg(long, default_value_t = 10)]
    runs: u32,
    /// Base RNG seed; run r draws from stream r
    #[arg(long, default_value_t = 42)]
    rng_seed: u64,
    /// Category-promotion weight for documents missing a category's seeds
    #[arg(long, default_value_t = 0.3)]
    mu: f64,
    /// Background/category switch prior
    #[arg(long, default_value_t = 1.0)]
    pi: f64,
    /// Selector prior, selected side
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Selector prior, deselected side
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Background word smoothing
    #[arg(long, default_value_t = 0.01)]
    beta0: f64,
    /// Category word smoothing
    #[arg(long, default_value_t = 0.01)]
    beta1: f64,
    /// Selected-category smoothing [default: 50 / C from the seed file]
    #[arg(long)]
    gamma0: Option<f64>,
    /// Deselected-category smoothing
    #[arg(long, default_value_t = 1e-7)]
    gamma1: f64,
    /// Word-promotion relevance floor
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Model variant to train
    #[arg(long, value_enum, default_value_t = Variant::Full)]
    variant: Variant,
    /// Labels per category for top-K classification (no-sparsity only)
    #[arg(long)]
    top_k: Option<usize>,
    /// Word-vector text file (embedding variant only)
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Chains sampled concurrently [default: SMTM_JOBS or all cores]
    #[arg(long)]
    jobs: Option<usize>,
    /// key=value file of the options above; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the strongest word-promotion entries per category to this TSV
    #[arg(long)]
    dump_word_promotion: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Corpus bundle the checkpoints were trained on
    #[arg(long)]
    corpus: PathBuf,
    /// Seed file used for training
    #[arg(long)]
    seeds: PathBuf,
    /// Directory holding run-*.json checkpoints
    #[arg(long)]
    runs_dir: PathBuf,
    /// Output directory [default: the runs directory]
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Word-vector text file, for embedding-variant checkpoints
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Corpus bundle with gold labels
    #[arg(long)]
    corpus: PathBuf,
    /// Seed file used for training
    #[arg(long)]
    seeds: PathBuf,
    /// Directory holding run-*.json checkpoints
    #[arg(long)]
    runs_dir: PathBuf,
    /// Write per-run per-category metrics to this CSV
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Word-vector text file, for embedding-variant checkpoints
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct TopicsArgs {
    /// Corpus bundle the checkpoint was trained on
    #[arg(long)]
    corpus: PathBuf,
    /// Seed file used for training
    #[arg(long)]
    seeds: PathBuf,
    /// Checkpoint to inspect
    #[arg(long)]
    checkpoint: PathBuf,
    /// Words to print per category
    #[arg(short, long, default_value_t = 10)]
    n: usize,
    /// Word-vector text file, for embedding-variant checkpoints
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for corpus.jsonl and seeds.txt
    #[arg(short, long)]
    out: PathBuf,
    /// Documents to generate
    #[arg(long, default_value_t = 200)]
    docs: usize,
    /// Categories
    #[arg(long, default_value_t = 3)]
    categories: usize,
    /// Vocabulary size
    #[arg(long, default_value_t = 60)]
    vocab: usize,
    /// Tokens per document
    #[arg(long, default_value_t = 50)]
    doc_len: usize,
    /// Seed words per category
    #[arg(long, default_value_t = 3)]
    seeds_per_category: usize,
    /// Fraction of tokens drawn from the background topic
    #[arg(long, default_value_t = 0.4)]
    background: f64,
    /// Probability a document carries two labels
    #[arg(long, default_value_t = 0.3)]
    two_label_prob: f64,
    /// Dirichlet concentration of the word distributions
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    /// Extra weight on each category's seed words
    #[arg(long, default_value_t = 3.0)]
    seed_boost: f64,
    /// Fraction of category words shared with a neighbor category
    #[arg(long, default_value_t = 0.0)]
    overlap: f64,
    /// Fraction of category mass spread over generic words
    #[arg(long, default_value_t = 0.0)]
    generic: f64,
    /// Skew of the background distribution (0 = flat)
    #[arg(long, default_value_t = 0.0)]
    zipf: f64,
    /// Topical fragments per document
    #[arg(long, default_value_t = 1)]
    fragments: usize,
    /// Probability a category token repeats the previous one
    #[arg(long, default_value_t = 0.0)]
    burst: f64,
    /// Mean off-category word intrusions per document
    #[arg(long, default_value_t = 0.0)]
    intrusions: f64,
    /// Copies of each intruded word
    #[arg(long, default_value_t = 3)]
    intrusion_reps: usize,
    /// Fraction of seed-like distractor words in the background
    #[arg(long, default_value_t = 0.0)]
    distractor: f64,
    /// Fraction of documents carrying group-private jargon words
    #[arg(long, default_value_t = 0.0)]
    jargon: f64,
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    rng_seed: u64,
}

/// Config keys that may also be set by flags, paired with the clap arg
/// id that marks the flag as explicitly given.
const CONFIG_KEYS: &[(&str, &str)] = &[
    ("iterations", "iterations"),
    ("runs", "runs"),
    ("rng-seed", "rng_seed"),
    ("mu", "mu"),
    ("pi", "pi"),
    ("p", "p"),
    ("q", "q"),
    ("beta0", "beta0"),
    ("beta1", "beta1"),
    ("gamma0", "gamma0"),
    ("gamma1", "gamma1"),
    ("epsilon", "epsilon"),
    ("variant", "variant"),
    ("top-k", "top_k"),
    ("jobs", "jobs"),
];

fn explicit_keys(m: &ArgMatches) -> BTreeSet<String> {
    CONFIG_KEYS
        .iter()
        .filter(|(_, id)| m.value_source(id) == Some(ValueSource::CommandLine))
        .map(|(key, _)| (*key).to_owned())
        .collect()
}

fn run_train(args: TrainArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let explicit = explicit_keys(matches);
    let mut o = ops::TrainOpts {
        corpus: args.corpus,
        seeds: args.seeds,
        out: args.out,
        iterations: args.iterations,
        runs: args.runs,
        rng_seed: args.rng_seed,
        mu: args.mu,
        pi: args.pi,
        p: args.p,
        q: args.q,
        beta0: args.beta0,
        beta1: args.beta1,
        gamma0: args.gamma0,
        gamma1: args.gamma1,
        epsilon: args.epsilon,
        variant: args.variant,
        top_k: args.top_k,
        embeddings: args.embeddings,
        jobs: args.jobs,
        dump_word_promotion: args.dump_word_promotion,
    };
    if let Some(cfg) = &args.config {
        let text = std::fs::read_to_string(cfg).map_err(|e| smtm_cli::io_err(cfg, e))?;
        ops::apply_config(&mut o, &text, &explicit)?;
    }
    if o.variant == Variant::NoCategoryPromotion && explicit.contains("mu") {
        return Err(CliError::usage(
            "--variant no-category-promotion fixes mu at 1; drop --mu",
        ));
    }
    if o.jobs.is_none() {
        o.jobs = jobs_from_env()?;
    }
    ops::cmd_train(&o)
}

fn jobs_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("SMTM_JOBS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::usage(format!("SMTM_JOBS: expected an integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cmd: Cmd, matches: &ArgMatches) -> Result<(), CliError> {
    match cmd {
        Cmd::Preprocess(a) => ops::cmd_preprocess(&ops::PreprocessOpts {
            input: a.input,
            output: a.output,
            min_df: a.min_df,
            min_token_len: a.min_len,
            stopwords: a.stopwords,
            keep_case: a.keep_case,
            stats_only: a.stats_only,
        }),
        Cmd::Train(a) => {
            let sub = matches.subcommand_matches("train").expect("train matched");
            run_train(a, sub)
        }
        Cmd::Predict(a) => ops::cmd_predict(&ops::PredictOpts {
            score: ops::ScoreOpts {
                corpus: a.corpus,
                seeds: a.seeds,
                runs_dir: a.runs_dir,
                embeddings: a.embeddings,
            },
            out: a.out,
        }),
        Cmd::Eval(a) => ops::cmd_eval(&ops::EvalOpts {
            score: ops::ScoreOpts {
                corpus: a.corpus,
                seeds: a.seeds,
                runs_dir: a.runs_dir,
                embeddings: a.embeddings,
            },
            csv_out: a.csv_out,
        }),
        Cmd::Topics(a) => ops::cmd_topics(&ops::TopicsOpts {
            corpus: a.corpus,
            seeds: a.seeds,
            checkpoint: a.checkpoint,
            n: a.n,
            embeddings: a.embeddings,
        }),
        Cmd::Synth(a) => ops::cmd_synth(&ops::SynthOpts {
            out: a.out,
            spec: SynthSpec {
                docs: a.docs,
                categories: a.categories,
                vocab_size: a.vocab,
                doc_len: a.doc_len,
                seeds_per_category: a.seeds_per_category,
                background_fraction: a.background,
                two_label_prob: a.two_label_prob,
                concentration: a.concentration,
                seed_boost: a.seed_boost,
                overlap: a.overlap,
                generic: a.generic,
                zipf: a.zipf,
                fragments: a.fragments,
                burst: a.burst,
                intrusions: a.intrusions,
                intrusion_reps: a.intrusion_reps,
                distractor: a.distractor,
                jargon: a.jargon,
            },
            rng_seed: a.rng_seed,
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli.cmd, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
