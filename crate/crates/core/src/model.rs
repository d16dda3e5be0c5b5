//! Model state: hyperparameters, per-token assignments, selector matrix, and
//! the fractional count tables the collapsed sampler maintains.
//!
//! Counts are `f64` because the generalized Pólya urn adds promotion-table
//! values instead of 1. Increment/decrement bookkeeping drifts by rounding
//! over many sweeps, so chains recount from scratch periodically; `recount`
//! is also the consistency oracle used in tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Indicator};
use crate::mat::Mat;
use crate::promotion::PromotionTables;

/// Background topic marker in the flat assignment array; category `c` is
/// stored as `c + 1`.
pub const BACKGROUND: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WordPromotionMode {
    /// Document-frequency co-occurrence with seed words.
    DocumentFrequency,
    /// Embedding cosine affinity to seed words.
    Embedding,
    /// Disabled: all-ones table (unit increments).
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectorForm {
    /// The selector weights as a plain product of gamma and linear factors.
    /// Default.
    Product,
    /// Experimental alternative: the fully collapsed Beta-Bernoulli /
    /// Dirichlet-multinomial ratio. Not selectable from the CLI.
    CollapsedRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Category-promotion weight for documents without a category's seeds.
    pub mu: f64,
    /// Symmetric Beta prior on the background/category switch.
    pub pi: f64,
    /// Beta prior (on) for the per-document selector probability.
    pub p: f64,
    /// Beta prior (off) for the per-document selector probability.
    pub q: f64,
    /// Dirichlet smoothing of the background word distribution.
    pub beta0: f64,
    /// Dirichlet smoothing of category word distributions.
    pub beta1: f64,
    /// Regular smoothing of selected categories (default 50 / C).
    pub gamma0: f64,
    /// Weak smoothing of deselected categories.
    pub gamma1: f64,
    /// Relevance floor in word promotion.
    pub epsilon: f64,
    pub iterations: u32,
    pub runs: u32,
    /// Selectors active. When false the selector sweep is skipped, alpha stays
    /// all-ones, and classification must use top-K ranking.
    pub sparsity: bool,
    pub word_promotion: WordPromotionMode,
    pub selector_form: SelectorForm,
    /// Per-category positives for top-K classification (dense variant only).
    pub top_k: Option<usize>,
}

impl Hyperparams {
    /// Reference defaults; `gamma0` scales with the number of categories.
    pub fn defaults(num_categories: usize) -> Hyperparams {
        Hyperparams {
            mu: 0.3,
            pi: 1.0,
            p: 1.0,
            q: 1.0,
            beta0: 0.01,
            beta1: 0.01,
            gamma0: 50.0 / num_categories.max(1) as f64,
            gamma1: 1e-7,
            epsilon: 0.01,
            iterations: 100,
            runs: 10,
            sparsity: true,
            word_promotion: WordPromotionMode::DocumentFrequency,
            selector_form: SelectorForm::Product,
            top_k: None,
        }
    }

    pub fn validate(&self) -> Result<(), HyperError> {
        fn require(ok: bool, what: &'static str) -> Result<(), HyperError> {
            if ok {
                Ok(())
            } else {
                Err(HyperError(what))
            }
        }
        require(
            self.mu.is_finite() && (0.0..=1.0).contains(&self.mu),
            "mu must be in [0, 1]",
        )?;
        require(self.pi.is_finite() && self.pi > 0.0, "pi must be positive")?;
        require(self.p.is_finite() && self.p > 0.0, "p must be positive")?;
        require(self.q.is_finite() && self.q > 0.0, "q must be positive")?;
        require(
            self.beta0.is_finite() && self.beta0 > 0.0,
            "beta0 must be positive",
        )?;
        require(
            self.beta1.is_finite() && self.beta1 > 0.0,
            "beta1 must be positive",
        )?;
        require(
            self.gamma0.is_finite() && self.gamma0 > 0.0,
            "gamma0 must be positive",
        )?;
        require(
            self.gamma1.is_finite() && self.gamma1 > 0.0,
            "gamma1 must be positive",
        )?;
        require(
            self.epsilon.is_finite() && self.epsilon > 0.0,
            "epsilon must be positive",
        )?;
        require(self.iterations >= 1, "iterations must be at least 1")?;
        require(self.runs >= 1, "runs must be at least 1")?;
        require(
            self.top_k.is_none_or(|k| k >= 1),
            "top-k must be at least 1",
        )?;
        if self.gamma1 >= self.gamma0 {
            log::warn!(
                "gamma1 ({}) is not much smaller than gamma0 ({}); selector sparsity degrades",
                self.gamma1,
                self.gamma0
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HyperError(pub &'static str);

impl fmt::Display for HyperError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl core::error::Error for HyperError {}

/// The count tables, grouped so a from-scratch recount can be compared with
/// (or swapped for) the incrementally maintained set.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts {
    /// Background token total.
    pub n0: f64,
    /// Category token total.
    pub n1: f64,
    /// Background count per word (unit increments).
    pub n0_w: Vec<f64>,
    /// Word-promoted count per category and word (C rows, W cols).
    pub n_cw: Mat,
    /// Per-category sum over words of `n_cw`, maintained incrementally.
    pub n_cw_sum: Vec<f64>,
    /// Category-promoted count per document and category (D rows, C cols).
    pub n_dc: Mat,
    /// Per-document sum over categories of `n_dc`.
    pub n_d_sum: Vec<f64>,
}

impl Counts {
    pub fn zeros(docs: usize, cats: usize, vocab: usize) -> Counts {
        Counts {
            n0: 0.0,
            n1: 0.0,
            n0_w: vec![0.0; vocab],
            n_cw: Mat::zeros(cats, vocab),
            n_cw_sum: vec![0.0; cats],
            n_dc: Mat::zeros(docs, cats),
            n_d_sum: vec![0.0; docs],
        }
    }

    /// Largest absolute difference across all tables.
    pub fn max_divergence(&self, other: &Counts) -> f64 {
        let mut worst: f64 = (self.n0 - other.n0).abs().max((self.n1 - other.n1).abs());
        let pairs = [
            (self.n0_w.as_slice(), other.n0_w.as_slice()),
            (self.n_cw.data(), other.n_cw.data()),
            (self.n_cw_sum.as_slice(), other.n_cw_sum.as_slice()),
            (self.n_dc.data(), other.n_dc.data()),
            (self.n_d_sum.as_slice(), other.n_d_sum.as_slice()),
        ];
        for (a, b) in pairs {
            for (x, y) in a.iter().zip(b) {
                let d = (x - y).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Full sampler state for one chain.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub num_docs: usize,
    pub num_categories: usize,
    pub vocab_size: usize,
    /// Flat per-token assignment, document-major: `BACKGROUND` or `c + 1`.
    pub assign: Vec<u32>,
    /// Binary selector matrix, D x C row-major.
    pub alpha: Vec<u8>,
    /// Per-document number of selected categories.
    pub alpha_count: Vec<u32>,
    pub counts: Counts,
}

impl ModelState {
    #[inline]
    pub fn alpha_get(&self, d: usize, c: usize) -> bool {
        self.alpha[d * self.num_categories + c] != 0
    }

    #[inline]
    pub fn alpha_set(&mut self, d: usize, c: usize, v: bool) {
        self.alpha[d * self.num_categories + c] = u8::from(v);
    }

    /// Selected categories of document `d`.
    pub fn selected(&self, d: usize) -> Vec<u16> {
        (0..self.num_categories)
            .filter(|&c| self.alpha_get(d, c))
            .map(|c| c as u16)
            .collect()
    }

    /// Mean selector-row size across documents.
    pub fn mean_selected(&self) -> f64 {
        if self.num_docs == 0 {
            return 0.0;
        }
        self.alpha_count.iter().map(|&x| f64::from(x)).sum::<f64>() / self.num_docs as f64
    }
}

/// Random initialization: each token flips a fair coin between background and
/// category side; category tokens draw uniformly among the document's
/// seed-present categories (or all categories when none are present).
/// Selectors start all-on. Counts accumulate through the promotion tables.
pub fn init_state<R: Rng>(
    corpus: &Corpus,
    presence: &Indicator,
    promos: &PromotionTables,
    rng: &mut R,
) -> ModelState {
    let docs = corpus.docs();
    let cats = presence.cols();
    let vocab = corpus.vocab_size();
    let mut state = ModelState {
        num_docs: docs,
        num_categories: cats,
        vocab_size: vocab,
        assign: Vec::with_capacity(corpus.total_tokens()),
        alpha: vec![1; docs * cats],
        alpha_count: vec![cats as u32; docs],
        counts: Counts::zeros(docs, cats, vocab),
    };
    let mut seeded: Vec<usize> = Vec::with_capacity(cats);
    for d in 0..docs {
        seeded.clear();
        seeded.extend((0..cats).filter(|&c| presence.get(d, c)));
        let pool: &[usize] = if seeded.is_empty() {
            &[]
        } else {
            seeded.as_slice()
        };
        for &w in corpus.doc_tokens(d) {
            let background = rng.random::<f64>() < 0.5;
            if background {
                state.assign.push(BACKGROUND);
                state.counts.n0 += 1.0;
                state.counts.n0_w[w as usize] += 1.0;
            } else {
                let c = if pool.is_empty() {
                    rng.random_range(0..cats)
                } else {
                    pool[rng.random_range(0..pool.len())]
                };
                state.assign.push(c as u32 + 1);
                add_category_token(&mut state.counts, promos, d, c, w);
            }
        }
    }
    state
}

#[inline]
pub(crate) fn add_category_token(
    counts: &mut Counts,
    promos: &PromotionTables,
    d: usize,
    c: usize,
    w: u32,
) {
    let pw = promos.word(w, c);
    let pc = promos.category(c, d);
    counts.n1 += 1.0;
    counts.n_cw.add(c, w as usize, pw);
    counts.n_cw_sum[c] += pw;
    counts.n_dc.add(d, c, pc);
    counts.n_d_sum[d] += pc;
}

/// Rebuild every count table from the assignments alone.
pub fn compute_counts(corpus: &Corpus, state: &ModelState, promos: &PromotionTables) -> Counts {
    let mut counts = Counts::zeros(state.num_docs, state.num_categories, state.vocab_size);
    let mut t = 0usize;
    for d in 0..corpus.docs() {
        for &w in corpus.doc_tokens(d) {
            match state.assign[t] {
                BACKGROUND => {
                    counts.n0 += 1.0;
                    counts.n0_w[w as usize] += 1.0;
                }
                a => add_category_token(&mut counts, promos, d, (a - 1) as usize, w),
            }
            t += 1;
        }
    }
    counts
}

/// Replace drifted incremental counts with an exact recount.
pub fn recount(state: &mut ModelState, corpus: &Corpus, promos: &PromotionTables) {
    let fresh = compute_counts(corpus, state, promos);
    let div = state.counts.max_divergence(&fresh);
    if div > 0.0 {
        log::debug!("recount corrected drift of {div:.3e}");
    }
    state.counts = fresh;
}

/// Posterior point estimates from the final sampler state.
#[derive(Debug, Clone)]
pub struct PosteriorEstimates {
    /// Background word distribution.
    pub phi0: Vec<f64>,
    /// Category word distributions, C rows, W cols.
    pub phi: Mat,
    /// Document category mixtures, D rows, C cols.
    pub theta: Mat,
    /// Corpus-level share of category-side tokens.
    pub lambda: f64,
    /// Category prior used for token-level classification, proportional to
    /// the smoothed category token masses.
    pub category_prior: Vec<f64>,
}

pub fn estimate(state: &ModelState, hyper: &Hyperparams) -> PosteriorEstimates {
    let w_f = state.vocab_size as f64;
    let counts = &state.counts;

    let denom0 = counts.n0 + w_f * hyper.beta0;
    let phi0: Vec<f64> = counts
        .n0_w
        .iter()
        .map(|&n| (n + hyper.beta0) / denom0)
        .collect();

    let mut phi = Mat::zeros(state.num_categories, state.vocab_size);
    for c in 0..state.num_categories {
        let denom = counts.n_cw_sum[c] + w_f * hyper.beta1;
        let row = phi.row_mut(c);
        for (w, x) in row.iter_mut().enumerate() {
            *x = (counts.n_cw.get(c, w) + hyper.beta1) / denom;
        }
    }

    let mut theta = Mat::zeros(state.num_docs, state.num_categories);
    for d in 0..state.num_docs {
        let mut denom = state.num_categories as f64 * hyper.gamma1;
        for c in 0..state.num_categories {
            if state.alpha_get(d, c) {
                denom += counts.n_dc.get(d, c) + hyper.gamma0;
            }
        }
        let row = theta.row_mut(d);
        for (c, x) in row.iter_mut().enumerate() {
            let num = if state.alpha_get(d, c) {
                counts.n_dc.get(d, c) + hyper.gamma0 + hyper.gamma1
            } else {
                hyper.gamma1
            };
            *x = num / denom;
        }
    }

    let lambda = (counts.n1 + hyper.pi) / (counts.n0 + counts.n1 + 2.0 * hyper.pi);

    let mut prior: Vec<f64> = (0..state.num_categories)
        .map(|c| counts.n_cw_sum[c] + w_f * hyper.beta1)
        .collect();
    let prior_sum: f64 = prior.iter().sum();
    for x in &mut prior {
        *x /= prior_sum;
    }

    PosteriorEstimates {
        phi0,
        phi,
        theta,
        lambda,
        category_prior: prior,
    }
}

/// Highest-probability words of category `c` (probability descending, ties by
/// token id ascending). `n` larger than the vocabulary returns all words.
pub fn top_words(
    estimates: &PosteriorEstimates,
    corpus: &Corpus,
    c: usize,
    n: usize,
) -> Vec<(String, f64)> {
    let row = estimates.phi.row(c);
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(n);
    idx.into_iter()
        .map(|w| (String::from(corpus.word(w as u32)), row[w]))
        .collect()
}
