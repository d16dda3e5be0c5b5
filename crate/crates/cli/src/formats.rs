//! On-disk formats: JSON-lines documents, stopword and embedding files, the
//! corpus bundle, run checkpoints, and the TSV/CSV outputs.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use smtm_core::corpus::{Corpus, RawDocument};
use smtm_core::model::{compute_counts, Counts, Hyperparams, ModelState};
use smtm_core::promotion::{PromotionTables, WordVectors};
use smtm_core::sampler::IterationStats;
use smtm_core::Mat;

use crate::{io_err, CliError};

/// Shipped default; `--stopwords` overrides it with a file.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../../data/stopwords/english.txt");

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// One JSON record per line: id, text, optional gold labels. Blank lines are
/// skipped.
pub fn read_jsonl(path: &Path) -> Result<Vec<RawDocument>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut docs = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonDoc = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), no + 1)))?;
        docs.push(RawDocument {
            id: rec.id,
            text: rec.text,
            labels: rec.labels,
        });
    }
    Ok(docs)
}

pub fn write_jsonl(path: &Path, docs: &[RawDocument]) -> Result<(), CliError> {
    let mut out = String::new();
    for doc in docs {
        let rec = JsonDoc {
            id: doc.id.clone(),
            text: doc.text.clone(),
            labels: doc.labels.clone(),
        };
        out.push_str(
            &serde_json::to_string(&rec)
                .map_err(|e| CliError::Internal(format!("document '{}': {e}", doc.id)))?,
        );
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// One word per line; blanks and `#` comment lines are skipped.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

pub fn load_stopwords(path: Option<&Path>) -> Result<BTreeSet<String>, CliError> {
    match path {
        Some(p) => Ok(parse_stopwords(
            &fs::read_to_string(p).map_err(|e| io_err(p, e))?,
        )),
        None => Ok(parse_stopwords(DEFAULT_STOPWORDS)),
    }
}

pub fn load_seed_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Embedding text layout: an optional `count dim` header line, then one word
/// followed by its whitespace-separated components per line. All vectors must
/// share one dimension.
pub fn parse_vectors(text: &str) -> Result<WordVectors, String> {
    let mut vectors = WordVectors::new();
    let mut dim: Option<usize> = None;
    for (no, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if no == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok()) {
            continue;
        }
        if fields.len() < 2 {
            return Err(format!(
                "line {}: expected a word and its components",
                no + 1
            ));
        }
        let mut v = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            v.push(
                f.parse::<f64>()
                    .map_err(|_| format!("line {}: bad vector component '{f}'", no + 1))?,
            );
        }
        let expect = *dim.get_or_insert(v.len());
        if v.len() != expect {
            return Err(format!(
                "line {}: dimension {} disagrees with {expect}",
                no + 1,
                v.len()
            ));
        }
        vectors.insert(fields[0].to_owned(), v);
    }
    if vectors.is_empty() {
        return Err("no vectors found".to_owned());
    }
    Ok(vectors)
}

pub fn load_vectors(path: &Path) -> Result<WordVectors, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_vectors(&text).map_err(|msg| CliError::Data(format!("{}: {msg}", path.display())))
}

const BUNDLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CorpusBundle {
    version: u32,
    hash: String,
    lowercased: bool,
    doc_ids: Vec<String>,
    vocab: Vec<String>,
    documents: Vec<Vec<u32>>,
    labels: Vec<Option<Vec<String>>>,
}

/// Content identity over the token streams, vocabulary, and document ids.
/// Labels are evaluation-only and deliberately excluded: relabeling a corpus
/// does not invalidate checkpoints trained on it.
pub fn corpus_hash(corpus: &Corpus) -> String {
    let mut h = Sha256::new();
    h.update(b"smtm-corpus-v1");
    h.update((corpus.docs() as u64).to_le_bytes());
    for d in 0..corpus.docs() {
        let toks = corpus.doc_tokens(d);
        h.update((toks.len() as u64).to_le_bytes());
        for &w in toks {
            h.update(w.to_le_bytes());
        }
    }
    h.update((corpus.vocab_size() as u64).to_le_bytes());
    for w in corpus.words() {
        h.update((w.len() as u64).to_le_bytes());
        h.update(w.as_bytes());
    }
    for d in 0..corpus.docs() {
        let id = corpus.doc_id(d);
        h.update((id.len() as u64).to_le_bytes());
        h.update(id.as_bytes());
    }
    let digest = h.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<(), CliError> {
    let bundle = CorpusBundle {
        version: BUNDLE_VERSION,
        hash: corpus_hash(corpus),
        lowercased: corpus.lowercased(),
        doc_ids: corpus.doc_ids_vec().to_vec(),
        vocab: corpus.words().to_vec(),
        documents: corpus.document_vec(),
        labels: corpus.labels_vec().to_vec(),
    };
    write_json(path, &bundle)
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    let bundle: CorpusBundle = read_json(path)?;
    if bundle.version != BUNDLE_VERSION {
        return Err(CliError::Data(format!(
            "{}: unsupported corpus bundle version {}",
            path.display(),
            bundle.version
        )));
    }
    let corpus = Corpus::from_parts(
        bundle.doc_ids,
        bundle.vocab,
        bundle.documents,
        bundle.labels,
        bundle.lowercased,
    )
    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let hash = corpus_hash(&corpus);
    if hash != bundle.hash {
        return Err(CliError::Data(format!(
            "{}: content hash mismatch (stored {}, computed {hash})",
            path.display(),
            bundle.hash
        )));
    }
    Ok(corpus)
}

const CHECKPOINT_VERSION: u32 = 1;

/// Final state of one chain: assignments, selectors, and the exact
/// hyperparameters it ran with. Counts are not stored; they are recomputed
/// from the assignments through the promotion tables on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Identity of the training corpus; scoring against any other corpus is
    /// refused.
    pub corpus_hash: String,
    pub run: u32,
    pub rng_seed: u64,
    pub category_names: Vec<String>,
    pub hyper: Hyperparams,
    /// D x C selector matrix, row-major.
    pub alpha: Vec<u8>,
    /// Flat per-token assignment, document-major: 0 background, c+1 category.
    pub assign: Vec<u32>,
}

impl Checkpoint {
    pub fn new(
        corpus_hash: String,
        run: u32,
        rng_seed: u64,
        category_names: Vec<String>,
        hyper: Hyperparams,
        state: &ModelState,
    ) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            corpus_hash,
            run,
            rng_seed,
            category_names,
            hyper,
            alpha: state.alpha.clone(),
            assign: state.assign.clone(),
        }
    }
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<(), CliError> {
    write_json(path, ck)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CliError> {
    let ck: Checkpoint = read_json(path)?;
    if ck.version != CHECKPOINT_VERSION {
        return Err(CliError::Data(format!(
            "{}: unsupported checkpoint version {}",
            path.display(),
            ck.version
        )));
    }
    Ok(ck)
}

pub fn checkpoint_path(dir: &Path, run: u32) -> PathBuf {
    dir.join(format!("run-{run:02}.json"))
}

/// All run-*.json checkpoints in a directory, name order.
pub fn find_checkpoints(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("run-") && name.ends_with(".json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::usage(format!(
            "{}: no run-*.json checkpoints found",
            dir.display()
        )));
    }
    Ok(paths)
}

/// Rebuild the sampler state a checkpoint describes. Counts come from a
/// fresh recount of the stored assignments, so the result is drift-free.
pub fn restore_state(
    corpus: &Corpus,
    promos: &PromotionTables,
    ck: &Checkpoint,
) -> Result<ModelState, CliError> {
    let docs = corpus.docs();
    let cats = ck.category_names.len();
    if ck.assign.len() != corpus.total_tokens() {
        return Err(CliError::Data(format!(
            "checkpoint stores {} token assignments but the corpus has {}",
            ck.assign.len(),
            corpus.total_tokens()
        )));
    }
    if ck.alpha.len() != docs * cats {
        return Err(CliError::Data(format!(
            "checkpoint selector matrix has {} entries, expected {} x {}",
            ck.alpha.len(),
            docs,
            cats
        )));
    }
    if let Some(&a) = ck.assign.iter().find(|&&a| a as usize > cats) {
        return Err(CliError::Data(format!(
            "checkpoint assignment {a} exceeds the {cats} categories"
        )));
    }
    if ck.alpha.iter().any(|&b| b > 1) {
        return Err(CliError::Data(
            "checkpoint selector entries must be 0 or 1".to_owned(),
        ));
    }
    let alpha_count: Vec<u32> = (0..docs)
        .map(|d| {
            ck.alpha[d * cats..(d + 1) * cats]
                .iter()
                .map(|&b| u32::from(b))
                .sum()
        })
        .collect();
    let mut state = ModelState {
        num_docs: docs,
        num_categories: cats,
        vocab_size: corpus.vocab_size(),
        assign: ck.assign.clone(),
        alpha: ck.alpha.clone(),
        alpha_count,
        counts: Counts::zeros(docs, cats, corpus.vocab_size()),
    };
    state.counts = compute_counts(corpus, &state, promos);
    Ok(state)
}

/// Header, then one row per document: id, semicolon-joined assigned category
/// names, and the score columns in category order.
pub fn predictions_tsv(
    corpus: &Corpus,
    names: &[String],
    assigned: &[Vec<u16>],
    scores: &Mat,
) -> String {
    let mut out = String::from("doc_id\tassigned");
    for n in names {
        out.push('\t');
        out.push_str(n);
    }
    out.push('\n');
    debug_assert_eq!(assigned.len(), corpus.docs());
    for (d, doc_assigned) in assigned.iter().enumerate() {
        out.push_str(corpus.doc_id(d));
        out.push('\t');
        let mut cats = doc_assigned.clone();
        cats.sort_unstable();
        for (i, &c) in cats.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(&names[c as usize]);
        }
        for c in 0..scores.cols() {
            out.push_str(&format!("\t{:.10}", scores.get(d, c)));
        }
        out.push('\n');
    }
    out
}

pub fn predictions_path(dir: &Path, run: u32) -> PathBuf {
    dir.join(format!("predictions-run-{run:02}.tsv"))
}

/// Per-iteration telemetry of every run in one table.
pub fn convergence_csv(runs: &[Vec<IterationStats>]) -> String {
    let mut out = String::from("run,iteration,n1_to_n0,mean_selected\n");
    for (r, stats) in runs.iter().enumerate() {
        for s in stats {
            out.push_str(&format!(
                "{r},{},{:.6},{:.6}\n",
                s.iteration, s.n1_to_n0, s.mean_selected
            ));
        }
    }
    out
}

/// Strongest word-promotion entries per category as TSV, for debugging the
/// bias tables.
pub fn word_promotion_tsv(
    corpus: &Corpus,
    names: &[String],
    word_promo: &Mat,
    per_category: usize,
) -> String {
    let mut out = String::from("word\tcategory\tvalue\n");
    for (c, name) in names.iter().enumerate() {
        let mut idx: Vec<usize> = (0..corpus.vocab_size()).collect();
        idx.sort_by(|&a, &b| {
            word_promo
                .get(b, c)
                .partial_cmp(&word_promo.get(a, c))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &w in idx.iter().take(per_category) {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\n",
                corpus.word(w as u32),
                name,
                word_promo.get(w, c)
            ));
        }
    }
    out
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let data = serde_json::to_string(value).map_err(|e| {
        CliError::Internal(format!("{}: serialization failed: {e}", path.display()))
    })?;
    fs::write(path, data).map_err(|e| io_err(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
