//! Command implementations. Each takes a plain options struct so tests can
//! drive it without a process boundary; the binary is a thin flag parser on
//! top.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use smtm_core::classify::{assigned_labels, category_scores, topk_labels};
use smtm_core::corpus::{corpus_stats, preprocess, Corpus, PreprocessOptions, SeedConfig};
use smtm_core::eval::{evaluate, mean_std, CategoryEval, EvalReport};
use smtm_core::model::{estimate, top_words, Hyperparams, ModelState, WordPromotionMode};
use smtm_core::sampler::{build_tables, run_chain_with, IterationStats, SamplerFault};
use smtm_core::synth::{generate, SynthSpec};
use smtm_core::Mat;

use crate::{formats, io_err, CliError};

pub struct PreprocessOpts {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub min_df: usize,
    pub min_token_len: usize,
    pub stopwords: Option<PathBuf>,
    pub keep_case: bool,
    pub stats_only: bool,
}

pub fn cmd_preprocess(o: &PreprocessOpts) -> Result<(), CliError> {
    if !o.stats_only && o.output.is_none() {
        return Err(CliError::usage(
            "an output path is required unless --stats-only is given",
        ));
    }
    if o.min_df < 1 || o.min_token_len < 1 {
        return Err(CliError::usage("--min-df and --min-len must be at least 1"));
    }
    let raw = formats::read_jsonl(&o.input)?;
    let opts = PreprocessOptions {
        lowercase: !o.keep_case,
        min_token_len: o.min_token_len,
        min_df: o.min_df,
        stopwords: formats::load_stopwords(o.stopwords.as_deref())?,
    };
    let corpus = preprocess(&raw, &opts).map_err(|e| CliError::Data(e.to_string()))?;
    print_stats(&corpus);
    if let (false, Some(out)) = (o.stats_only, &o.output) {
        formats::save_corpus(out, &corpus)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn print_stats(corpus: &Corpus) {
    let s = corpus_stats(corpus);
    println!("documents    {}", s.docs);
    println!("vocabulary   {}", s.vocab_size);
    println!("total tokens {}", s.total_tokens);
    println!("avg doc len  {:.2}", s.avg_doc_len);
    if let Some(card) = s.label_cardinality {
        println!("cardinality  {:.2}", card);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Variant {
    /// Sparsity, category promotion, and co-occurrence word promotion.
    Full,
    /// Selectors fixed on; classification by top-K ranking instead.
    NoSparsity,
    /// Category promotion off (mu = 1).
    NoCategoryPromotion,
    /// Word promotion off (all-ones table).
    NoWordPromotion,
    /// Word promotion from embedding cosine instead of co-occurrence.
    Embedding,
}

pub struct TrainOpts {
    pub corpus: PathBuf,
    pub seeds: PathBuf,
    pub out: PathBuf,
    pub iterations: u32,
    pub runs: u32,
    pub rng_seed: u64,
    pub mu: f64,
    pub pi: f64,
    pub p: f64,
    pub q: f64,
    pub beta0: f64,
    pub beta1: f64,
    /// None: 50 / C once the seed file is read.
    pub gamma0: Option<f64>,
    pub gamma1: f64,
    pub epsilon: f64,
    pub variant: Variant,
    pub top_k: Option<usize>,
    pub embeddings: Option<PathBuf>,
    /// None: automatic (all cores).
    pub jobs: Option<usize>,
    pub dump_word_promotion: Option<PathBuf>,
}

/// Flags layered onto the reference defaults, then the variant's overrides.
pub fn resolve_hyper(o: &TrainOpts, num_categories: usize) -> Result<Hyperparams, CliError> {
    let mut h = Hyperparams::defaults(num_categories);
    h.mu = o.mu;
    h.pi = o.pi;
    h.p = o.p;
    h.q = o.q;
    h.beta0 = o.beta0;
    h.beta1 = o.beta1;
    if let Some(g0) = o.gamma0 {
        h.gamma0 = g0;
    }
    h.gamma1 = o.gamma1;
    h.epsilon = o.epsilon;
    h.iterations = o.iterations;
    h.runs = o.runs;
    match o.variant {
        Variant::Full => {}
        Variant::NoSparsity => {
            h.sparsity = false;
            h.top_k = Some(
                o.top_k
                    .ok_or_else(|| CliError::usage("--variant no-sparsity requires --top-k"))?,
            );
        }
        Variant::NoCategoryPromotion => h.mu = 1.0,
        Variant::NoWordPromotion => h.word_promotion = WordPromotionMode::Off,
        Variant::Embedding => h.word_promotion = WordPromotionMode::Embedding,
    }
    if o.variant != Variant::NoSparsity && o.top_k.is_some() {
        return Err(CliError::usage(
            "--top-k applies only to --variant no-sparsity",
        ));
    }
    h.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(h)
}

/// key=value lines (flag spellings; `#` comments). Keys in `explicit` were
/// given on the command line and win over the file.
pub fn apply_config(
    o: &mut TrainOpts,
    text: &str,
    explicit: &BTreeSet<String>,
) -> Result<(), CliError> {
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("config line {}: expected key=value", no + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if explicit.contains(key) {
            continue;
        }
        let bad = |what: &str| CliError::usage(format!("config line {}: {key}: {what}", no + 1));
        match key {
            "iterations" => o.iterations = value.parse().map_err(|_| bad("expected an integer"))?,
            "runs" => o.runs = value.parse().map_err(|_| bad("expected an integer"))?,
            "rng-seed" => o.rng_seed = value.parse().map_err(|_| bad("expected an integer"))?,
            "mu" => o.mu = value.parse().map_err(|_| bad("expected a number"))?,
            "pi" => o.pi = value.parse().map_err(|_| bad("expected a number"))?,
            "p" => o.p = value.parse().map_err(|_| bad("expected a number"))?,
            "q" => o.q = value.parse().map_err(|_| bad("expected a number"))?,
            "beta0" => o.beta0 = value.parse().map_err(|_| bad("expected a number"))?,
            "beta1" => o.beta1 = value.parse().map_err(|_| bad("expected a number"))?,
            "gamma0" => o.gamma0 = Some(value.parse().map_err(|_| bad("expected a number"))?),
            "gamma1" => o.gamma1 = value.parse().map_err(|_| bad("expected a number"))?,
            "epsilon" => o.epsilon = value.parse().map_err(|_| bad("expected a number"))?,
            "top-k" => o.top_k = Some(value.parse().map_err(|_| bad("expected an integer"))?),
            "jobs" => o.jobs = Some(value.parse().map_err(|_| bad("expected an integer"))?),
            "variant" => {
                o.variant = <Variant as clap::ValueEnum>::from_str(value, true)
                    .map_err(|_| bad("unknown variant"))?;
            }
            _ => {
                return Err(CliError::usage(format!(
                    "config line {}: unknown key '{key}'",
                    no + 1
                )))
            }
        }
    }
    Ok(())
}

pub fn cmd_train(o: &TrainOpts) -> Result<(), CliError> {
    let corpus = formats::load_corpus(&o.corpus)?;
    let seed_text = formats::load_seed_text(&o.seeds)?;
    let seeds = SeedConfig::parse(&seed_text, &corpus)
        .map_err(|e| CliError::Data(format!("{}: {e}", o.seeds.display())))?;
    let hyper = resolve_hyper(o, seeds.num_categories())?;
    let vectors = match (&o.embeddings, hyper.word_promotion) {
        (Some(p), WordPromotionMode::Embedding) => Some(formats::load_vectors(p)?),
        (Some(_), _) => {
            return Err(CliError::usage(
                "--embeddings is only meaningful with --variant embedding",
            ))
        }
        (None, WordPromotionMode::Embedding) => {
            return Err(CliError::usage("--variant embedding requires --embeddings"))
        }
        (None, _) => None,
    };
    // One table build serves every chain; the chains never mutate them.
    let (presence, promos) = build_tables(&corpus, &seeds, &hyper, vectors.as_ref())?;
    fs::create_dir_all(&o.out).map_err(|e| io_err(&o.out, e))?;
    if let Some(dump) = &o.dump_word_promotion {
        let tsv = formats::word_promotion_tsv(&corpus, seeds.names(), &promos.word, 50);
        fs::write(dump, tsv).map_err(|e| io_err(dump, e))?;
        println!("wrote {}", dump.display());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(o.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let results: Result<Vec<(ModelState, Vec<IterationStats>)>, SamplerFault> =
        pool.install(|| {
            (0..o.runs)
                .into_par_iter()
                .map(|run| {
                    let mut trace = Vec::with_capacity(hyper.iterations as usize);
                    let mut obs = |_: &ModelState, s: &IterationStats| trace.push(*s);
                    let state = run_chain_with(
                        &corpus,
                        &presence,
                        &promos,
                        &hyper,
                        o.rng_seed,
                        u64::from(run),
                        Some(&mut obs),
                    )?;
                    Ok((state, trace))
                })
                .collect()
        });
    let results = results.map_err(|f| CliError::Internal(f.to_string()))?;
    let hash = formats::corpus_hash(&corpus);
    let mut traces = Vec::with_capacity(results.len());
    for (run, (state, trace)) in results.into_iter().enumerate() {
        let path = formats::checkpoint_path(&o.out, run as u32);
        let ck = formats::Checkpoint::new(
            hash.clone(),
            run as u32,
            o.rng_seed,
            seeds.names().to_vec(),
            hyper,
            &state,
        );
        formats::save_checkpoint(&path, &ck)?;
        println!(
            "run {run:02}: n1/n0 {:.3}, mean selected {:.2} -> {}",
            state.counts.n1 / state.counts.n0,
            state.mean_selected(),
            path.display()
        );
        traces.push(trace);
    }
    let conv = o.out.join("convergence.csv");
    fs::write(&conv, formats::convergence_csv(&traces)).map_err(|e| io_err(&conv, e))?;
    println!("wrote {}", conv.display());
    Ok(())
}

pub struct ScoreOpts {
    pub corpus: PathBuf,
    pub seeds: PathBuf,
    pub runs_dir: PathBuf,
    pub embeddings: Option<PathBuf>,
}

struct RunOutput {
    run: u32,
    assigned: Vec<Vec<u16>>,
    scores: Mat,
}

/// Load the corpus and every checkpoint in the runs directory, verify they
/// belong together, and classify each run's final state.
fn scored_runs(o: &ScoreOpts) -> Result<(Corpus, SeedConfig, Vec<RunOutput>), CliError> {
    let corpus = formats::load_corpus(&o.corpus)?;
    let seed_text = formats::load_seed_text(&o.seeds)?;
    let seeds = SeedConfig::parse(&seed_text, &corpus)
        .map_err(|e| CliError::Data(format!("{}: {e}", o.seeds.display())))?;
    let hash = formats::corpus_hash(&corpus);
    let vectors = match &o.embeddings {
        Some(p) => Some(formats::load_vectors(p)?),
        None => None,
    };
    let mut outs = Vec::new();
    for path in formats::find_checkpoints(&o.runs_dir)? {
        let ck = formats::load_checkpoint(&path)?;
        if ck.corpus_hash != hash {
            return Err(CliError::usage(format!(
                "{}: checkpoint was trained on a different corpus",
                path.display()
            )));
        }
        if ck.category_names.as_slice() != seeds.names() {
            return Err(CliError::usage(format!(
                "{}: checkpoint categories disagree with the seed file",
                path.display()
            )));
        }
        if ck.hyper.word_promotion == WordPromotionMode::Embedding && vectors.is_none() {
            return Err(CliError::usage(format!(
                "{}: trained with embedding word promotion; pass --embeddings",
                path.display()
            )));
        }
        let (_, promos) = build_tables(&corpus, &seeds, &ck.hyper, vectors.as_ref())?;
        let state = formats::restore_state(&corpus, &promos, &ck)?;
        let est = estimate(&state, &ck.hyper);
        let scores = category_scores(&est, &corpus);
        let assigned = if ck.hyper.sparsity {
            assigned_labels(&state, &scores)
        } else {
            let k = ck.hyper.top_k.ok_or_else(|| {
                CliError::Data(format!(
                    "{}: dense-variant checkpoint lacks a top-k value",
                    path.display()
                ))
            })?;
            topk_labels(&scores, k)
        };
        outs.push(RunOutput {
            run: ck.run,
            assigned,
            scores,
        });
    }
    Ok((corpus, seeds, outs))
}

pub struct PredictOpts {
    pub score: ScoreOpts,
    /// Default: the runs directory.
    pub out: Option<PathBuf>,
}

pub fn cmd_predict(o: &PredictOpts) -> Result<(), CliError> {
    let (corpus, seeds, outs) = scored_runs(&o.score)?;
    let dir = o.out.clone().unwrap_or_else(|| o.score.runs_dir.clone());
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    for r in &outs {
        let path = formats::predictions_path(&dir, r.run);
        let tsv = formats::predictions_tsv(&corpus, seeds.names(), &r.assigned, &r.scores);
        fs::write(&path, tsv).map_err(|e| io_err(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Gold label sets resolved against the seed categories. Label names outside
/// the category set are ignored: evaluation is restricted to the categories
/// under study. A corpus with no labels at all cannot be evaluated.
pub fn gold_sets(corpus: &Corpus, seeds: &SeedConfig) -> Result<Vec<Vec<u16>>, CliError> {
    let mut any = false;
    let mut gold = Vec::with_capacity(corpus.docs());
    for d in 0..corpus.docs() {
        let mut set: Vec<u16> = Vec::new();
        if let Some(labels) = corpus.doc_labels(d) {
            any = true;
            for name in labels {
                match seeds.category_index(name) {
                    Some(c) => set.push(c as u16),
                    None => log::debug!("gold label '{name}' is not a category; ignored"),
                }
            }
            set.sort_unstable();
            set.dedup();
        }
        gold.push(set);
    }
    if !any {
        return Err(CliError::Data(
            "corpus carries no gold labels; nothing to evaluate against".to_owned(),
        ));
    }
    Ok(gold)
}

pub struct EvalOpts {
    pub score: ScoreOpts,
    pub csv_out: Option<PathBuf>,
}

pub fn cmd_eval(o: &EvalOpts) -> Result<(), CliError> {
    let (corpus, seeds, outs) = scored_runs(&o.score)?;
    let gold = gold_sets(&corpus, &seeds)?;
    let mut reports: Vec<(u32, EvalReport)> = Vec::with_capacity(outs.len());
    println!("run  macro_f1  macro_auc");
    for r in &outs {
        let report = evaluate(&r.assigned, &r.scores, &gold, seeds.names())
            .map_err(|e| CliError::Data(e.to_string()))?;
        println!(
            "{:02}   {:.6}  {:.6}",
            r.run, report.macro_f1, report.macro_auc
        );
        reports.push((r.run, report));
    }
    let f1s: Vec<f64> = reports.iter().map(|(_, r)| r.macro_f1).collect();
    let aucs: Vec<f64> = reports.iter().map(|(_, r)| r.macro_auc).collect();
    let (f1_mean, f1_std) = mean_std(&f1s);
    let (auc_mean, auc_std) = mean_std(&aucs);
    println!("macro_f1   mean {f1_mean:.6}  std {f1_std:.6}");
    println!("macro_auc  mean {auc_mean:.6}  std {auc_std:.6}");
    println!("aggregated over {} runs", reports.len());
    if let Some(csv) = &o.csv_out {
        fs::write(csv, eval_csv(&reports)).map_err(|e| io_err(csv, e))?;
        println!("wrote {}", csv.display());
    }
    Ok(())
}

fn csv_field(name: &str) -> String {
    if name.contains(',') || name.contains('"') {
        format!("\"{}\"", name.replace('"', "\"\""))
    } else {
        name.to_owned()
    }
}

/// Per-run per-category metrics, weakest F1 first within each run (ties by
/// name). Undefined AUC prints as NA.
fn eval_csv(reports: &[(u32, EvalReport)]) -> String {
    let mut out = String::from("run,category,tp,fp,fn,f1,auc\n");
    for (run, report) in reports {
        let mut rows: Vec<&CategoryEval> = report.per_category.iter().collect();
        rows.sort_by(|a, b| {
            a.f1.partial_cmp(&b.f1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.name.cmp(&b.name))
        });
        for r in rows {
            let auc = match r.auc {
                Some(a) => format!("{a:.6}"),
                None => "NA".to_owned(),
            };
            out.push_str(&format!(
                "{run},{},{},{},{},{:.6},{auc}\n",
                csv_field(&r.name),
                r.tp,
                r.fp,
                r.fn_,
                r.f1
            ));
        }
    }
    out
}

pub struct TopicsOpts {
    pub corpus: PathBuf,
    pub seeds: PathBuf,
    pub checkpoint: PathBuf,
    pub n: usize,
    pub embeddings: Option<PathBuf>,
}

pub fn cmd_topics(o: &TopicsOpts) -> Result<(), CliError> {
    let corpus = formats::load_corpus(&o.corpus)?;
    let seed_text = formats::load_seed_text(&o.seeds)?;
    let seeds = SeedConfig::parse(&seed_text, &corpus)
        .map_err(|e| CliError::Data(format!("{}: {e}", o.seeds.display())))?;
    let ck = formats::load_checkpoint(&o.checkpoint)?;
    if ck.corpus_hash != formats::corpus_hash(&corpus) {
        return Err(CliError::usage(format!(
            "{}: checkpoint was trained on a different corpus",
            o.checkpoint.display()
        )));
    }
    if ck.category_names.as_slice() != seeds.names() {
        return Err(CliError::usage(format!(
            "{}: checkpoint categories disagree with the seed file",
            o.checkpoint.display()
        )));
    }
    let vectors = match &o.embeddings {
        Some(p) => Some(formats::load_vectors(p)?),
        None => {
            if ck.hyper.word_promotion == WordPromotionMode::Embedding {
                return Err(CliError::usage(format!(
                    "{}: trained with embedding word promotion; pass --embeddings",
                    o.checkpoint.display()
                )));
            }
            None
        }
    };
    let (_, promos) = build_tables(&corpus, &seeds, &ck.hyper, vectors.as_ref())?;
    let state = formats::restore_state(&corpus, &promos, &ck)?;
    let est = estimate(&state, &ck.hyper);
    for c in 0..seeds.num_categories() {
        if c > 0 {
            println!();
        }
        println!("# {}", seeds.name(c));
        for (word, prob) in top_words(&est, &corpus, c, o.n) {
            let id = corpus
                .word_id(&word)
                .expect("top word comes from the vocabulary");
            let mark = if seeds.is_seed(c, id) { "*" } else { "" };
            println!("{word}{mark}\t{prob:.6}");
        }
    }
    Ok(())
}

pub struct SynthOpts {
    pub out: PathBuf,
    pub spec: SynthSpec,
    pub rng_seed: u64,
}

pub fn cmd_synth(o: &SynthOpts) -> Result<(), CliError> {
    let data = generate(&o.spec, o.rng_seed).map_err(|e| CliError::usage(e.to_string()))?;
    fs::create_dir_all(&o.out).map_err(|e| io_err(&o.out, e))?;
    let corpus_path = o.out.join("corpus.jsonl");
    let seeds_path = o.out.join("seeds.txt");
    formats::write_jsonl(&corpus_path, &data.documents)?;
    fs::write(&seeds_path, &data.seed_text).map_err(|e| io_err(&seeds_path, e))?;
    println!(
        "planted {} documents over {} categories, vocabulary {}",
        o.spec.docs, o.spec.categories, o.spec.vocab_size
    );
    println!("wrote {}", corpus_path.display());
    println!("wrote {}", seeds_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train_opts() -> TrainOpts {
        TrainOpts {
            corpus: PathBuf::from("c"),
            seeds: PathBuf::from("s"),
            out: PathBuf::from("o"),
            iterations: 100,
            runs: 10,
            rng_seed: 42,
            mu: 0.3,
            pi: 1.0,
            p: 1.0,
            q: 1.0,
            beta0: 0.01,
            beta1: 0.01,
            gamma0: None,
            gamma1: 1e-7,
            epsilon: 0.01,
            variant: Variant::Full,
            top_k: None,
            embeddings: None,
            jobs: None,
            dump_word_promotion: None,
        }
    }

    fn tiny_corpus() -> Corpus {
        Corpus::from_parts(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["apple".into(), "urn".into(), "coat".into()],
            vec![vec![0, 1], vec![2], vec![0, 2]],
            vec![
                Some(vec!["fruit".into(), "junk".into()]),
                Some(vec![]),
                None,
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn hyper_resolution_follows_the_variant() {
        let mut o = train_opts();
        let h = resolve_hyper(&o, 4).unwrap();
        assert_eq!(h.gamma0, 12.5, "unset gamma0 scales with categories");
        assert!(h.sparsity);
        assert_eq!(h.word_promotion, WordPromotionMode::DocumentFrequency);

        o.gamma0 = Some(3.0);
        assert_eq!(resolve_hyper(&o, 4).unwrap().gamma0, 3.0);

        o = train_opts();
        o.variant = Variant::NoCategoryPromotion;
        assert_eq!(resolve_hyper(&o, 4).unwrap().mu, 1.0);

        o = train_opts();
        o.variant = Variant::NoWordPromotion;
        assert_eq!(
            resolve_hyper(&o, 4).unwrap().word_promotion,
            WordPromotionMode::Off
        );

        o = train_opts();
        o.variant = Variant::NoSparsity;
        assert!(resolve_hyper(&o, 4).is_err(), "top-k is mandatory");
        o.top_k = Some(7);
        let h = resolve_hyper(&o, 4).unwrap();
        assert!(!h.sparsity);
        assert_eq!(h.top_k, Some(7));

        o = train_opts();
        o.top_k = Some(7);
        assert!(resolve_hyper(&o, 4).is_err(), "top-k outside no-sparsity");

        o = train_opts();
        o.beta0 = -1.0;
        let err = resolve_hyper(&o, 4).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn config_fills_only_what_flags_left_alone() {
        let mut o = train_opts();
        let explicit: BTreeSet<String> = ["mu".to_owned()].into();
        let text =
            "# comment\n\nmu = 0.9\niterations=7\nvariant = no-sparsity\ntop-k=12\nrng-seed=5\n";
        apply_config(&mut o, text, &explicit).unwrap();
        assert_eq!(o.mu, 0.3, "explicit flag wins");
        assert_eq!(o.iterations, 7);
        assert_eq!(o.variant, Variant::NoSparsity);
        assert_eq!(o.top_k, Some(12));
        assert_eq!(o.rng_seed, 5);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let none = BTreeSet::new();
        let mut o = train_opts();
        let err = apply_config(&mut o, "nonsense=1\n", &none).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        let err = apply_config(&mut o, "mu=fast\n", &none).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = apply_config(&mut o, "just a line\n", &none).unwrap_err();
        assert!(err.to_string().contains("key=value"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn gold_labels_resolve_through_the_seed_config() {
        let corpus = tiny_corpus();
        let seeds = SeedConfig::parse("fruit: apple\nkitchen: urn coat\n", &corpus).unwrap();
        let gold = gold_sets(&corpus, &seeds).unwrap();
        assert_eq!(gold[0], vec![0], "unknown name 'junk' is dropped");
        assert_eq!(gold[1], Vec::<u16>::new());
        assert_eq!(gold[2], Vec::<u16>::new(), "unlabeled doc scores empty");
    }

    #[test]
    fn fully_unlabeled_corpora_cannot_be_evaluated() {
        let corpus = Corpus::from_parts(
            vec!["a".into()],
            vec!["apple".into()],
            vec![vec![0]],
            vec![None],
            true,
        )
        .unwrap();
        let seeds = SeedConfig::parse("fruit: apple\n", &corpus).unwrap();
        let err = gold_sets(&corpus, &seeds).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn metric_csv_sorts_weakest_category_first() {
        let report = EvalReport {
            per_category: vec![
                CategoryEval {
                    name: "strong".into(),
                    tp: 9,
                    fp: 0,
                    fn_: 1,
                    f1: 0.9473,
                    auc: Some(1.0),
                },
                CategoryEval {
                    name: "weak, odd".into(),
                    tp: 1,
                    fp: 5,
                    fn_: 5,
                    f1: 0.1666,
                    auc: None,
                },
            ],
            macro_f1: 0.557,
            macro_auc: 1.0,
            auc_categories: 1,
        };
        let csv = eval_csv(&[(3, report)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "run,category,tp,fp,fn,f1,auc");
        assert_eq!(lines[1], "3,\"weak, odd\",1,5,5,0.166600,NA");
        assert_eq!(lines[2], "3,strong,9,0,1,0.947300,1.000000");
    }

    #[test]
    fn csv_fields_quote_commas() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
