//! Corpus model: tokenization, vocabulary construction, seed configuration,
//! and the seed-presence indicator consumed by the samplers.
//!
//! Preprocessing pipeline, in order: tokenize on non-alphanumeric boundaries,
//! lowercase, drop stopwords, drop short tokens, then drop words whose
//! document frequency (counted after the previous filters) falls below
//! `min_df`. Vocabulary ids are dense and assigned in first-occurrence order
//! of the surviving words.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// One input document before preprocessing.
#[derive(Debug, Clone)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    /// Gold category names, present only in evaluation corpora.
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub lowercase: bool,
    /// Minimum token length in characters; shorter tokens are dropped.
    pub min_token_len: usize,
    /// Minimum document frequency; words in fewer documents are dropped.
    pub min_df: usize,
    /// Exact-match stopword list, applied after lowercasing.
    pub stopwords: BTreeSet<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            lowercase: true,
            min_token_len: 3,
            min_df: 5,
            stopwords: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// The input contained no documents at all.
    Empty,
    DuplicateDocId(String),
    /// `from_parts` received inconsistent pieces (bad token id, ragged data).
    Invalid(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Empty => write!(f, "corpus has no documents"),
            CorpusError::DuplicateDocId(id) => write!(f, "duplicate document id '{id}'"),
            CorpusError::Invalid(msg) => write!(f, "invalid corpus data: {msg}"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// Preprocessed corpus: token-id sequences plus the derived lookup structures.
#[derive(Debug, Clone)]
pub struct Corpus {
    doc_ids: Vec<String>,
    vocab: Vec<String>,
    /// Flat token stream; document d owns `tokens[offsets[d]..offsets[d+1]]`.
    tokens: Vec<u32>,
    offsets: Vec<usize>,
    labels: Vec<Option<Vec<String>>>,
    lowercased: bool,
    // Derived, rebuilt on construction.
    word_index: BTreeMap<String, u32>,
    /// Per word, ascending distinct indices of the documents containing it.
    df_index: Vec<Vec<u32>>,
}

/// Split on non-alphanumeric characters, optionally lowercasing.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if lowercase {
                for lc in ch.to_lowercase() {
                    cur.push(lc);
                }
            } else {
                cur.push(ch);
            }
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Build a corpus from raw documents. Documents that end up empty are kept
/// (and logged); an input with zero documents is an error.
pub fn preprocess(
    raw_documents: &[RawDocument],
    opts: &PreprocessOptions,
) -> Result<Corpus, CorpusError> {
    if raw_documents.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut seen_ids = BTreeSet::new();
    for doc in raw_documents {
        if !seen_ids.insert(doc.id.as_str()) {
            return Err(CorpusError::DuplicateDocId(doc.id.clone()));
        }
    }

    // Pass 1: filter tokens, assign provisional ids in first-occurrence order,
    // count document frequencies.
    let mut prov_index: BTreeMap<String, u32> = BTreeMap::new();
    let mut prov_words: Vec<String> = Vec::new();
    let mut prov_df: Vec<u32> = Vec::new();
    let mut prov_last_doc: Vec<u32> = Vec::new();
    let mut prov_docs: Vec<Vec<u32>> = Vec::with_capacity(raw_documents.len());
    for (d, doc) in raw_documents.iter().enumerate() {
        let mut ids = Vec::new();
        for tok in tokenize(&doc.text, opts.lowercase) {
            if tok.chars().count() < opts.min_token_len {
                continue;
            }
            if opts.stopwords.contains(&tok) {
                continue;
            }
            let id = match prov_index.get(&tok) {
                Some(&id) => id,
                None => {
                    let id = prov_words.len() as u32;
                    prov_index.insert(tok.clone(), id);
                    prov_words.push(tok);
                    prov_df.push(0);
                    prov_last_doc.push(u32::MAX);
                    id
                }
            };
            if prov_last_doc[id as usize] != d as u32 {
                prov_last_doc[id as usize] = d as u32;
                prov_df[id as usize] += 1;
            }
            ids.push(id);
        }
        prov_docs.push(ids);
    }

    // Pass 2: drop rare words, remap to dense final ids (provisional order is
    // first-occurrence order; filtering preserves it).
    let min_df = opts.min_df as u32;
    let mut remap: Vec<u32> = vec![u32::MAX; prov_words.len()];
    let mut vocab = Vec::new();
    for (pid, word) in prov_words.into_iter().enumerate() {
        if prov_df[pid] >= min_df {
            remap[pid] = vocab.len() as u32;
            vocab.push(word);
        }
    }

    let mut documents: Vec<Vec<u32>> = Vec::with_capacity(prov_docs.len());
    for (d, ids) in prov_docs.into_iter().enumerate() {
        let kept: Vec<u32> = ids
            .into_iter()
            .filter_map(|pid| {
                let w = remap[pid as usize];
                (w != u32::MAX).then_some(w)
            })
            .collect();
        if kept.is_empty() {
            log::warn!(
                "document '{}' has no tokens after preprocessing; kept as empty",
                raw_documents[d].id
            );
        }
        documents.push(kept);
    }

    let doc_ids = raw_documents.iter().map(|r| r.id.clone()).collect();
    let labels = raw_documents.iter().map(|r| r.labels.clone()).collect();
    Corpus::from_parts(doc_ids, vocab, documents, labels, opts.lowercase)
}

impl Corpus {
    /// Assemble a corpus from already-tokenized parts, rebuilding the derived
    /// indices. This is the deserialization entry point: reloading a bundle
    /// reproduces identical token sequences and document-frequency indices.
    pub fn from_parts(
        doc_ids: Vec<String>,
        vocab: Vec<String>,
        documents: Vec<Vec<u32>>,
        labels: Vec<Option<Vec<String>>>,
        lowercased: bool,
    ) -> Result<Corpus, CorpusError> {
        if doc_ids.is_empty() {
            return Err(CorpusError::Empty);
        }
        if documents.len() != doc_ids.len() || labels.len() != doc_ids.len() {
            return Err(CorpusError::Invalid(
                "documents, ids, and labels must have equal length".to_string(),
            ));
        }
        let w_count = vocab.len() as u32;
        let mut word_index = BTreeMap::new();
        for (i, w) in vocab.iter().enumerate() {
            if word_index.insert(w.clone(), i as u32).is_some() {
                return Err(CorpusError::Invalid(format_invalid_word(w)));
            }
        }
        let mut seen = BTreeSet::new();
        for id in &doc_ids {
            if !seen.insert(id.as_str()) {
                return Err(CorpusError::DuplicateDocId(id.clone()));
            }
        }

        let total: usize = documents.iter().map(Vec::len).sum();
        let mut tokens = Vec::with_capacity(total);
        let mut offsets = Vec::with_capacity(documents.len() + 1);
        offsets.push(0);
        let mut df_index: Vec<Vec<u32>> = vec![Vec::new(); vocab.len()];
        for (d, doc) in documents.iter().enumerate() {
            for &w in doc {
                if w >= w_count {
                    return Err(CorpusError::Invalid(alloc::format!(
                        "token id {w} out of range (vocabulary size {w_count})"
                    )));
                }
                tokens.push(w);
                let posting = &mut df_index[w as usize];
                if posting.last() != Some(&(d as u32)) {
                    posting.push(d as u32);
                }
            }
            offsets.push(tokens.len());
        }

        Ok(Corpus {
            doc_ids,
            vocab,
            tokens,
            offsets,
            labels,
            lowercased,
            word_index,
            df_index,
        })
    }

    #[inline]
    pub fn docs(&self) -> usize {
        self.doc_ids.len()
    }

    #[inline]
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    #[inline]
    pub fn total_tokens(&self) -> usize {
        self.tokens.len()
    }

    #[inline]
    pub fn doc_tokens(&self, d: usize) -> &[u32] {
        &self.tokens[self.offsets[d]..self.offsets[d + 1]]
    }

    #[inline]
    pub fn doc_len(&self, d: usize) -> usize {
        self.offsets[d + 1] - self.offsets[d]
    }

    /// Position of document `d`'s first token in the flat token stream.
    #[inline]
    pub fn doc_offset(&self, d: usize) -> usize {
        self.offsets[d]
    }

    #[inline]
    pub fn doc_id(&self, d: usize) -> &str {
        &self.doc_ids[d]
    }

    #[inline]
    pub fn doc_labels(&self, d: usize) -> Option<&[String]> {
        self.labels[d].as_deref()
    }

    #[inline]
    pub fn word(&self, w: u32) -> &str {
        &self.vocab[w as usize]
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.word_index.get(word).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.vocab
    }

    /// Document frequency of a word: number of distinct documents containing it.
    #[inline]
    pub fn df(&self, w: u32) -> usize {
        self.df_index[w as usize].len()
    }

    /// Ascending distinct document indices containing word `w`.
    #[inline]
    pub fn docs_containing(&self, w: u32) -> &[u32] {
        &self.df_index[w as usize]
    }

    pub fn lowercased(&self) -> bool {
        self.lowercased
    }

    /// Token streams per document, for serialization.
    pub fn document_vec(&self) -> Vec<Vec<u32>> {
        (0..self.docs())
            .map(|d| self.doc_tokens(d).to_vec())
            .collect()
    }

    pub fn labels_vec(&self) -> &[Option<Vec<String>>] {
        &self.labels
    }

    pub fn doc_ids_vec(&self) -> &[String] {
        &self.doc_ids
    }
}

fn format_invalid_word(w: &str) -> String {
    alloc::format!("duplicate vocabulary word '{w}'")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub docs: usize,
    pub vocab_size: usize,
    pub total_tokens: usize,
    pub avg_doc_len: f64,
    /// Mean number of gold labels per labeled document, when any labels exist.
    pub label_cardinality: Option<f64>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let docs = corpus.docs();
    let total = corpus.total_tokens();
    let labeled: Vec<usize> = corpus
        .labels_vec()
        .iter()
        .filter_map(|l| l.as_ref().map(Vec::len))
        .collect();
    let label_cardinality = if labeled.is_empty() {
        None
    } else {
        Some(labeled.iter().sum::<usize>() as f64 / labeled.len() as f64)
    };
    CorpusStats {
        docs,
        vocab_size: corpus.vocab_size(),
        total_tokens: total,
        avg_doc_len: total as f64 / docs as f64,
        label_cardinality,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedError {
    MalformedLine {
        line_no: usize,
        content: String,
    },
    DuplicateCategory(String),
    NoCategories,
    /// These categories lost every seed word during vocabulary resolution.
    EmptyCategories(Vec<String>),
}

impl fmt::Display for SeedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedError::MalformedLine { line_no, content } => {
                write!(
                    f,
                    "malformed seed line {line_no}: '{content}' (expected 'name: w1 w2 ...')"
                )
            }
            SeedError::DuplicateCategory(name) => write!(f, "duplicate category name '{name}'"),
            SeedError::NoCategories => write!(f, "seed file defines no categories"),
            SeedError::EmptyCategories(names) => {
                write!(f, "categories with no seed words left in the vocabulary: ")?;
                for (i, n) in names.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "'{n}'")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for SeedError {}

/// Category names plus their seed words resolved to vocabulary ids.
#[derive(Debug, Clone)]
pub struct SeedConfig {
    names: Vec<String>,
    /// Per category, vocabulary ids of its surviving seed words (file order,
    /// duplicates removed).
    seed_ids: Vec<Vec<u32>>,
}

impl SeedConfig {
    /// Parse the `name: w1 w2 ...` format (one category per line, blank lines
    /// skipped) and resolve seed words against the corpus vocabulary. Seeds
    /// missing from the vocabulary are dropped with a warning; a category
    /// losing all its seeds is an error.
    pub fn parse(text: &str, corpus: &Corpus) -> Result<SeedConfig, SeedError> {
        let mut names: Vec<String> = Vec::new();
        let mut seed_ids: Vec<Vec<u32>> = Vec::new();
        let mut empties: Vec<String> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() {
                continue;
            }
            let Some(colon) = line.find(':') else {
                return Err(SeedError::MalformedLine {
                    line_no: idx + 1,
                    content: line.to_string(),
                });
            };
            let name = line[..colon].trim();
            let rest = line[colon + 1..].trim();
            if name.is_empty() || rest.is_empty() {
                return Err(SeedError::MalformedLine {
                    line_no: idx + 1,
                    content: line.to_string(),
                });
            }
            if names.iter().any(|n| n == name) {
                return Err(SeedError::DuplicateCategory(name.to_string()));
            }

            let mut ids = Vec::new();
            for word in rest.split_whitespace() {
                let normalized = if corpus.lowercased() {
                    word.to_lowercase()
                } else {
                    word.to_string()
                };
                match corpus.word_id(&normalized) {
                    Some(id) if ids.contains(&id) => {
                        log::warn!("category '{name}': duplicate seed word '{word}' ignored");
                    }
                    Some(id) => ids.push(id),
                    None => {
                        log::warn!(
                            "category '{name}': seed word '{word}' not in vocabulary, dropped"
                        );
                    }
                }
            }
            if ids.is_empty() {
                empties.push(name.to_string());
            }
            names.push(name.to_string());
            seed_ids.push(ids);
        }
        if names.is_empty() {
            return Err(SeedError::NoCategories);
        }
        if !empties.is_empty() {
            return Err(SeedError::EmptyCategories(empties));
        }
        Ok(SeedConfig { names, seed_ids })
    }

    /// Construct directly from resolved ids (used by the synthetic generator
    /// and tests). Category order defines category ids.
    pub fn from_ids(names: Vec<String>, seed_ids: Vec<Vec<u32>>) -> SeedConfig {
        assert_eq!(names.len(), seed_ids.len());
        SeedConfig { names, seed_ids }
    }

    #[inline]
    pub fn num_categories(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn name(&self, c: usize) -> &str {
        &self.names[c]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn seed_ids(&self, c: usize) -> &[u32] {
        &self.seed_ids[c]
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// True if word `w` is a seed of category `c`.
    pub fn is_seed(&self, c: usize, w: u32) -> bool {
        self.seed_ids[c].contains(&w)
    }
}

/// Binary document-by-category indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indicator {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Indicator {
    pub fn new(rows: usize, cols: usize) -> Self {
        Indicator {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c] != 0
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r * self.cols + c] = u8::from(v);
    }

    /// Indices of the set columns in row `r`.
    pub fn on_cols(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }
}

/// I[d][c] = 1 iff document d contains at least one seed word of category c.
pub fn seed_presence(corpus: &Corpus, seeds: &SeedConfig) -> Indicator {
    let c_count = seeds.num_categories();
    // Invert the seed lists: word id -> categories that list it.
    let mut word_cats: BTreeMap<u32, Vec<u16>> = BTreeMap::new();
    for c in 0..c_count {
        for &w in seeds.seed_ids(c) {
            word_cats.entry(w).or_default().push(c as u16);
        }
    }
    let mut ind = Indicator::new(corpus.docs(), c_count);
    for (&w, cats) in &word_cats {
        for &d in corpus.docs_containing(w) {
            for &c in cats {
                ind.set(d as usize, c as usize, true);
            }
        }
    }
    ind
}
