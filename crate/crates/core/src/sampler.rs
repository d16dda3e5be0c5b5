//! Collapsed Gibbs sampler over the biased generalized Pólya urn.
//!
//! One iteration is a full token sweep (document-major) followed by a
//! selector sweep (document-major, category-minor). Each token resample
//! removes the token's fractional counts, draws a joint switch/category
//! assignment from the conditional weights, and adds the new counts back.
//! Counts are maintained incrementally, including the per-category word-mass
//! denominators; every `RECOUNT_INTERVAL` iterations the chain recounts from
//! scratch to cancel float drift.
//!
//! Fault policy: decrements that leave a count in (-NEG_TOLERANCE, 0) are
//! rounding dust and are clamped to zero; anything lower, or a non-finite
//! weight total, aborts the chain as an internal consistency fault.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};

use crate::corpus::{seed_presence, Corpus, Indicator, SeedConfig};
use crate::math;
use crate::model::{
    init_state, recount, Hyperparams, ModelState, SelectorForm, WordPromotionMode, BACKGROUND,
};
use crate::promotion::{
    build_category_promotion, build_word_promotion, build_word_promotion_embedding,
    uniform_word_promotion, PromotionError, PromotionTables, WordVectors,
};
use crate::ChainRng;

/// Iterations between exact recounts of the incremental tables.
pub const RECOUNT_INTERVAL: u32 = 20;

/// Decrements beyond this magnitude below zero indicate corrupted bookkeeping.
pub const NEG_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerFault {
    NegativeCount { table: &'static str, value: f64 },
    BadWeights { doc: usize, word: u32, total: f64 },
}

impl fmt::Display for SamplerFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplerFault::NegativeCount { table, value } => {
                write!(
                    f,
                    "count table '{table}' went negative ({value:e}); state is corrupt"
                )
            }
            SamplerFault::BadWeights { doc, word, total } => {
                write!(f, "non-finite or non-positive weight total {total} for word {word} in document {doc}")
            }
        }
    }
}

impl core::error::Error for SamplerFault {}

/// Deterministic per-chain RNG: one shared seed, one stream per run.
pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChainRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
fn dec(cell: &mut f64, amount: f64, table: &'static str) -> Result<(), SamplerFault> {
    *cell -= amount;
    if *cell < 0.0 {
        if *cell > -NEG_TOLERANCE {
            log::debug!("clamped rounding residue in '{table}': {:e}", *cell);
            *cell = 0.0;
        } else {
            return Err(SamplerFault::NegativeCount {
                table,
                value: *cell,
            });
        }
    }
    Ok(())
}

/// Remove the counts of token `t` (word `w`, document `d`) from the state.
pub fn remove_token(
    state: &mut ModelState,
    promos: &PromotionTables,
    d: usize,
    w: u32,
    t: usize,
) -> Result<(), SamplerFault> {
    let counts = &mut state.counts;
    match state.assign[t] {
        BACKGROUND => {
            counts.n0 -= 1.0;
            counts.n0_w[w as usize] -= 1.0;
            debug_assert!(counts.n0 >= 0.0 && counts.n0_w[w as usize] >= 0.0);
        }
        a => {
            let c = (a - 1) as usize;
            let pw = promos.word(w, c);
            let pc = promos.category(c, d);
            counts.n1 -= 1.0;
            debug_assert!(counts.n1 >= 0.0);
            dec(&mut counts.n_cw.row_mut(c)[w as usize], pw, "n_cw")?;
            dec(&mut counts.n_cw_sum[c], pw, "n_cw_sum")?;
            dec(&mut counts.n_dc.row_mut(d)[c], pc, "n_dc")?;
            dec(&mut counts.n_d_sum[d], pc, "n_d_sum")?;
        }
    }
    Ok(())
}

/// Add token `t` back with assignment `a` (`BACKGROUND` or category + 1).
pub fn add_token(
    state: &mut ModelState,
    promos: &PromotionTables,
    d: usize,
    w: u32,
    t: usize,
    a: u32,
) {
    let counts = &mut state.counts;
    if a == BACKGROUND {
        counts.n0 += 1.0;
        counts.n0_w[w as usize] += 1.0;
    } else {
        let c = (a - 1) as usize;
        let pw = promos.word(w, c);
        let pc = promos.category(c, d);
        counts.n1 += 1.0;
        counts.n_cw.add(c, w as usize, pw);
        counts.n_cw_sum[c] += pw;
        counts.n_dc.add(d, c, pc);
        counts.n_d_sum[d] += pc;
    }
    state.assign[t] = a;
}

/// Unnormalized assignment weights for a token of word `w` in document `d`:
/// `out[0]` is the background side, `out[c + 1]` category `c`. The caller
/// must already have removed the token being resampled from the counts.
pub fn token_distribution(
    state: &ModelState,
    hyper: &Hyperparams,
    d: usize,
    w: u32,
    out: &mut Vec<f64>,
) {
    let cats = state.num_categories;
    let w_f = state.vocab_size as f64;
    let counts = &state.counts;
    out.clear();
    out.reserve(cats + 1);

    let switch_denom = counts.n0 + counts.n1 + 2.0 * hyper.pi;
    let bg = (counts.n0 + hyper.pi) / switch_denom * (counts.n0_w[w as usize] + hyper.beta0)
        / (counts.n0 + w_f * hyper.beta0);
    out.push(bg);

    let lam1 = (counts.n1 + hyper.pi) / switch_denom;
    let n_dc_row = counts.n_dc.row(d);
    let alpha_row = &state.alpha[d * cats..(d + 1) * cats];

    let mut sel_den = cats as f64 * hyper.gamma1;
    for c in 0..cats {
        if alpha_row[c] != 0 {
            sel_den += n_dc_row[c] + hyper.gamma0;
        }
    }

    for c in 0..cats {
        let word_factor = (counts.n_cw.get(c, w as usize) + hyper.beta1)
            / (counts.n_cw_sum[c] + w_f * hyper.beta1);
        let sel_num = if alpha_row[c] != 0 {
            n_dc_row[c] + hyper.gamma0 + hyper.gamma1
        } else {
            hyper.gamma1
        };
        out.push(lam1 * word_factor * (sel_num / sel_den));
    }
}

/// Linear scan of the cumulative weights; `r` must lie in [0, sum). Falls
/// back to the last entry if rounding pushes `r` past the accumulated sum.
#[inline]
pub fn categorical_scan(weights: &[f64], r: f64) -> usize {
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if r < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Resample token `i` of document `d` in place.
#[allow(clippy::too_many_arguments)]
pub fn sample_token<R: Rng>(
    state: &mut ModelState,
    corpus: &Corpus,
    promos: &PromotionTables,
    hyper: &Hyperparams,
    d: usize,
    i: usize,
    rng: &mut R,
    buf: &mut Vec<f64>,
) -> Result<(), SamplerFault> {
    let w = corpus.doc_tokens(d)[i];
    let t = corpus.doc_offset(d) + i;
    remove_token(state, promos, d, w, t)?;
    token_distribution(state, hyper, d, w, buf);
    let total: f64 = buf.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(SamplerFault::BadWeights {
            doc: d,
            word: w,
            total,
        });
    }
    let r = rng.random::<f64>() * total;
    let pick = categorical_scan(buf, r) as u32;
    add_token(state, promos, d, w, t, pick);
    Ok(())
}

/// Log weights (on, off) for selector (d, c), computed from the current state
/// with the selector's own contribution excluded.
pub fn alpha_log_weights(
    state: &ModelState,
    hyper: &Hyperparams,
    d: usize,
    c: usize,
) -> (f64, f64) {
    let n_dc = state.counts.n_dc.get(d, c);
    let mut n_rest = state.counts.n_d_sum[d] - n_dc;
    if n_rest < 0.0 {
        n_rest = 0.0; // rounding dust from incremental sums
    }
    let alpha_rest = f64::from(state.alpha_count[d] - u32::from(state.alpha_get(d, c)));
    alpha_log_weights_parts(n_dc, n_rest, alpha_rest, state.num_categories as f64, hyper)
}

/// Pure form of the selector weights. `n_dc` is the document's promoted count
/// mass on the examined category, `n_rest` the mass on all other categories,
/// `alpha_rest` how many other categories are currently selected.
pub fn alpha_log_weights_parts(
    n_dc: f64,
    n_rest: f64,
    alpha_rest: f64,
    cats: f64,
    hyper: &Hyperparams,
) -> (f64, f64) {
    let g0 = hyper.gamma0;
    let g1 = hyper.gamma1;
    match hyper.selector_form {
        SelectorForm::Product => {
            let on = math::ln_gamma(n_dc + g0 + g1)
                + math::ln_gamma(alpha_rest * g0 + cats * g1 + n_rest)
                + math::ln_gamma(alpha_rest * g0 + g0 + cats * g1)
                + math::ln(hyper.p + alpha_rest);
            let off = math::ln_gamma(g0 + g1)
                + math::ln_gamma(alpha_rest * g0 + g0 + cats * g1 + n_rest)
                + math::ln_gamma(alpha_rest * g0 + cats * g1)
                + math::ln(hyper.q + cats - alpha_rest - 1.0);
            (on, off)
        }
        SelectorForm::CollapsedRatio => {
            // Beta-Bernoulli selector prior times the collapsed
            // Dirichlet-multinomial over the document's category counts;
            // factors shared by both branches cancel.
            let s_on = (alpha_rest + 1.0) * g0 + cats * g1;
            let s_off = alpha_rest * g0 + cats * g1;
            let total = n_rest + n_dc;
            let on = math::ln_gamma(s_on) - math::ln_gamma(s_on + total)
                + math::ln_gamma(g0 + g1 + n_dc)
                - math::ln_gamma(g0 + g1)
                + math::ln(hyper.p + alpha_rest);
            let off = math::ln_gamma(s_off) - math::ln_gamma(s_off + total)
                + math::ln_gamma(g1 + n_dc)
                - math::ln_gamma(g1)
                + math::ln(hyper.q + cats - alpha_rest - 1.0);
            (on, off)
        }
    }
}

/// Resample selector (d, c) in place.
pub fn sample_alpha<R: Rng>(
    state: &mut ModelState,
    hyper: &Hyperparams,
    d: usize,
    c: usize,
    rng: &mut R,
) {
    let (lw_on, lw_off) = alpha_log_weights(state, hyper, d, c);
    let lse = math::log_sum_exp2(lw_on, lw_off);
    let p_on = math::exp(lw_on - lse);
    let on = rng.random::<f64>() < p_on;
    let was = state.alpha_get(d, c);
    if on != was {
        state.alpha_set(d, c, on);
        if on {
            state.alpha_count[d] += 1;
        } else {
            state.alpha_count[d] -= 1;
        }
    }
}

/// One full sweep: every token, then (unless the dense variant is active)
/// every selector.
pub fn run_iteration<R: Rng>(
    state: &mut ModelState,
    corpus: &Corpus,
    promos: &PromotionTables,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<(), SamplerFault> {
    let mut buf: Vec<f64> = Vec::with_capacity(state.num_categories + 1);
    for d in 0..corpus.docs() {
        for i in 0..corpus.doc_len(d) {
            sample_token(state, corpus, promos, hyper, d, i, rng, &mut buf)?;
        }
    }
    if hyper.sparsity {
        for d in 0..corpus.docs() {
            for c in 0..state.num_categories {
                sample_alpha(state, hyper, d, c, rng);
            }
        }
    }
    Ok(())
}

/// Per-iteration telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: u32,
    /// Ratio of category-side to background-side token counts.
    pub n1_to_n0: f64,
    /// Mean number of selected categories per document.
    pub mean_selected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainError {
    Fault(SamplerFault),
    Promotion(PromotionError),
    /// The embedding variant needs a vector table.
    VectorsRequired,
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::Fault(e) => write!(f, "{e}"),
            ChainError::Promotion(e) => write!(f, "{e}"),
            ChainError::VectorsRequired => {
                write!(f, "embedding word promotion requires a word-vector table")
            }
        }
    }
}

impl core::error::Error for ChainError {}

impl From<SamplerFault> for ChainError {
    fn from(e: SamplerFault) -> Self {
        ChainError::Fault(e)
    }
}

/// Build the seed-presence indicator and both promotion tables for a corpus,
/// honoring the variant switches in `hyper`.
pub fn build_tables(
    corpus: &Corpus,
    seeds: &SeedConfig,
    hyper: &Hyperparams,
    vectors: Option<&WordVectors>,
) -> Result<(Indicator, PromotionTables), ChainError> {
    let presence = seed_presence(corpus, seeds);
    let category = build_category_promotion(&presence, hyper.mu);
    let word = match hyper.word_promotion {
        WordPromotionMode::DocumentFrequency => build_word_promotion(corpus, seeds, hyper.epsilon),
        WordPromotionMode::Off => {
            uniform_word_promotion(corpus.vocab_size(), seeds.num_categories())
        }
        WordPromotionMode::Embedding => {
            let vectors = vectors.ok_or(ChainError::VectorsRequired)?;
            build_word_promotion_embedding(corpus, seeds, vectors, hyper.epsilon)
                .map_err(ChainError::Promotion)?
        }
    };
    Ok((presence, PromotionTables { category, word }))
}

/// Observer invoked after every iteration (post periodic recount).
pub type IterationObserver<'a> = &'a mut dyn FnMut(&ModelState, &IterationStats);

/// Run one chain on prebuilt tables. `seed` is shared across runs; `stream`
/// separates them, so chains are reproducible and mutually independent.
pub fn run_chain_with(
    corpus: &Corpus,
    presence: &Indicator,
    promos: &PromotionTables,
    hyper: &Hyperparams,
    seed: u64,
    stream: u64,
    mut observer: Option<IterationObserver<'_>>,
) -> Result<ModelState, SamplerFault> {
    let mut rng = chain_rng(seed, stream);
    let mut state = init_state(corpus, presence, promos, &mut rng);
    for it in 1..=hyper.iterations {
        run_iteration(&mut state, corpus, promos, hyper, &mut rng)?;
        if it % RECOUNT_INTERVAL == 0 {
            recount(&mut state, corpus, promos);
        }
        if let Some(obs) = observer.as_deref_mut() {
            let stats = IterationStats {
                iteration: it,
                n1_to_n0: state.counts.n1 / state.counts.n0,
                mean_selected: state.mean_selected(),
            };
            obs(&state, &stats);
        }
    }
    Ok(state)
}

/// Convenience entry point: build tables, then run a single chain (stream 0).
pub fn run_chain(
    corpus: &Corpus,
    seeds: &SeedConfig,
    hyper: &Hyperparams,
    vectors: Option<&WordVectors>,
    seed: u64,
) -> Result<ModelState, ChainError> {
    let (presence, promos) = build_tables(corpus, seeds, hyper, vectors)?;
    run_chain_with(corpus, &presence, &promos, hyper, seed, 0, None).map_err(ChainError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{preprocess, PreprocessOptions, RawDocument};
    use crate::mat::Mat;
    use crate::model::{compute_counts, Counts};
    use alloc::borrow::ToOwned;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    /// Hand-buildable state: C=2, W=2, D=1, with directly planted counts.
    fn planted_state(alpha: [u8; 2]) -> ModelState {
        let mut counts = Counts::zeros(1, 2, 2);
        counts.n0 = 1.0;
        counts.n0_w = alloc::vec![1.0, 0.0];
        counts.n1 = 2.0;
        counts.n_cw = Mat::from_rows(&[alloc::vec![1.0, 0.0], alloc::vec![0.0, 1.0]]);
        counts.n_cw_sum = alloc::vec![1.0, 1.0];
        counts.n_dc = Mat::from_rows(&[alloc::vec![1.0, 1.0]]);
        counts.n_d_sum = alloc::vec![2.0];
        ModelState {
            num_docs: 1,
            num_categories: 2,
            vocab_size: 2,
            assign: alloc::vec![],
            alpha_count: alloc::vec![u32::from(alpha[0]) + u32::from(alpha[1])],
            alpha: alpha.to_vec(),
            counts,
        }
    }

    fn planted_hyper() -> Hyperparams {
        let mut h = Hyperparams::defaults(2);
        h.pi = 1.0;
        h.beta0 = 0.5;
        h.beta1 = 0.5;
        h.gamma0 = 2.0;
        h.gamma1 = 0.5;
        h
    }

    #[test]
    fn token_weights_hand_case() {
        // weight[bg]  = (1+1)/5 * (1+0.5)/(1+2*0.5)          = 0.3
        // weight[c0]  = (2+1)/5 * (1+0.5)/(1+1) * (1+2+0.5)/4 = 0.39375
        // weight[c1]  = 3/5 * (0+0.5)/(1+1) * 0.5/4           = 0.01875
        // with selector denominator 4 = (1 + 2) + 2*0.5 (c1 deselected).
        let state = planted_state([1, 0]);
        let hyper = planted_hyper();
        let mut out = Vec::new();
        token_distribution(&state, &hyper, 0, 0, &mut out);
        assert!(close(out[0], 0.3, 1e-15), "bg weight {}", out[0]);
        assert!(close(out[1], 0.39375, 1e-15), "c0 weight {}", out[1]);
        assert!(close(out[2], 0.01875, 1e-15), "c1 weight {}", out[2]);
    }

    #[test]
    fn token_weights_uniform_category_factor_when_all_deselected() {
        // With every selector off the category factor collapses to 1/C.
        let state = planted_state([0, 0]);
        let hyper = planted_hyper();
        let mut out = Vec::new();
        token_distribution(&state, &hyper, 0, 0, &mut out);
        assert!(close(out[1], 0.6 * 0.75 * 0.5, 1e-15));
        assert!(close(out[2], 0.6 * 0.25 * 0.5, 1e-15));
    }

    #[test]
    fn alpha_weights_linear_factor_case() {
        // Fresh document (no counts), C=2, one other selector on, p=q=1:
        // the gamma factors of both branches coincide pairwise and cancel,
        // leaving on/off = (p+1)/(q+0) = 2, so P(on) = 2/3.
        let mut state = planted_state([1, 1]);
        state.counts.n_dc = Mat::zeros(1, 2);
        state.counts.n_d_sum = alloc::vec![0.0];
        let hyper = planted_hyper();
        let (lw_on, lw_off) = alpha_log_weights(&state, &hyper, 0, 0);
        let p_on = math::exp(lw_on - math::log_sum_exp2(lw_on, lw_off));
        assert!(close(p_on, 2.0 / 3.0, 1e-12), "p_on = {p_on}");
    }

    #[test]
    fn alpha_weights_count_factor_case() {
        // n_dc = 2 on the examined category, nothing elsewhere, gamma0 = 1,
        // gamma1 = 0.5: on/off = Γ(2+1.5)/Γ(1.5) * 2 = (1.5 * 2.5) * 2 = 7.5,
        // so P(on) = 7.5/8.5.
        let mut state = planted_state([1, 1]);
        state.counts.n_dc = Mat::from_rows(&[alloc::vec![2.0, 0.0]]);
        state.counts.n_d_sum = alloc::vec![2.0];
        let mut hyper = planted_hyper();
        hyper.gamma0 = 1.0;
        hyper.gamma1 = 0.5;
        let (lw_on, lw_off) = alpha_log_weights(&state, &hyper, 0, 0);
        let p_on = math::exp(lw_on - math::log_sum_exp2(lw_on, lw_off));
        assert!(close(p_on, 7.5 / 8.5, 1e-12), "p_on = {p_on}");
    }

    #[test]
    fn collapsed_ratio_form_favors_on_with_counts() {
        // Weak-smoothing regime: with gamma1 tiny the off branch pays
        // Γ(gamma1 + n) / Γ(gamma1) ~ Γ(n) * gamma1 for its n tokens, so a few
        // counts lock the selector on.
        let mut hyper = planted_hyper();
        hyper.selector_form = SelectorForm::CollapsedRatio;
        hyper.gamma1 = 1e-6;
        let p_on_at = |n: f64| {
            let (on, off) = alpha_log_weights_parts(n, 3.0, 1.0, 3.0, &hyper);
            math::exp(on - math::log_sum_exp2(on, off))
        };
        assert!(p_on_at(0.0) < p_on_at(1.0));
        assert!(p_on_at(1.0) < p_on_at(5.0));
        assert!(p_on_at(5.0) > 0.99, "counts should lock the selector on");
    }

    fn tiny_pipeline() -> (Corpus, SeedConfig, Indicator, PromotionTables, Hyperparams) {
        let raw: Vec<RawDocument> = [
            ("d0", "heart attack heart risk factor"),
            ("d1", "lung cancer lung smoke"),
            ("d2", "heart lung clinical study"),
            ("d3", "weather report sunny clouds"),
            ("d4", "heart rate cardio training"),
        ]
        .iter()
        .map(|(id, text)| RawDocument {
            id: (*id).to_owned(),
            text: (*text).to_owned(),
            labels: None,
        })
        .collect();
        let corpus = preprocess(
            &raw,
            &PreprocessOptions {
                min_df: 1,
                ..PreprocessOptions::default()
            },
        )
        .unwrap();
        let seeds = SeedConfig::parse("cardio: heart\npulmo: lung\n", &corpus).unwrap();
        let hyper = Hyperparams::defaults(2);
        let (presence, promos) = build_tables(&corpus, &seeds, &hyper, None).unwrap();
        (corpus, seeds, presence, promos, hyper)
    }

    #[test]
    fn iteration_preserves_count_consistency() {
        let (corpus, _seeds, presence, promos, hyper) = tiny_pipeline();
        let mut rng = chain_rng(42, 0);
        let mut state = init_state(&corpus, &presence, &promos, &mut rng);
        for it in 0..30 {
            run_iteration(&mut state, &corpus, &promos, &hyper, &mut rng).unwrap();
            let fresh = compute_counts(&corpus, &state, &promos);
            let div = state.counts.max_divergence(&fresh);
            assert!(div < 1e-9, "iteration {it}: divergence {div}");
            assert_eq!(
                state.counts.n0 + state.counts.n1,
                corpus.total_tokens() as f64,
                "token mass must be conserved exactly"
            );
        }
    }

    #[test]
    fn chains_are_reproducible_and_streams_independent() {
        let (corpus, _seeds, presence, promos, mut hyper) = tiny_pipeline();
        hyper.iterations = 5;
        let a = run_chain_with(&corpus, &presence, &promos, &hyper, 9, 0, None).unwrap();
        let b = run_chain_with(&corpus, &presence, &promos, &hyper, 9, 0, None).unwrap();
        assert_eq!(a.assign, b.assign, "same seed and stream must replay");
        assert_eq!(a.alpha, b.alpha);
        let c = run_chain_with(&corpus, &presence, &promos, &hyper, 9, 1, None).unwrap();
        assert_ne!(a.assign, c.assign, "different streams must diverge");
    }

    #[test]
    fn dense_variant_keeps_selectors_on() {
        let (corpus, _seeds, presence, promos, mut hyper) = tiny_pipeline();
        hyper.sparsity = false;
        hyper.iterations = 3;
        let state = run_chain_with(&corpus, &presence, &promos, &hyper, 1, 0, None).unwrap();
        assert!(state.alpha.iter().all(|&a| a == 1));
        assert!(state.alpha_count.iter().all(|&n| n == 2));
    }

    #[test]
    fn observer_sees_every_iteration() {
        let (corpus, _seeds, presence, promos, mut hyper) = tiny_pipeline();
        hyper.iterations = 7;
        let mut seen = Vec::new();
        let mut obs = |_s: &ModelState, st: &IterationStats| seen.push(st.iteration);
        run_chain_with(&corpus, &presence, &promos, &hyper, 3, 0, Some(&mut obs)).unwrap();
        assert_eq!(seen, alloc::vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn corrupted_counts_abort_with_fault() {
        let (corpus, _seeds, presence, promos, _hyper) = tiny_pipeline();
        let mut rng = chain_rng(5, 0);
        let mut state = init_state(&corpus, &presence, &promos, &mut rng);
        // Find a category token and zero its document-category cell so the
        // removal drives it clearly negative.
        let t = state.assign.iter().position(|&a| a != BACKGROUND).unwrap();
        let (mut d, mut w) = (0, 0);
        let mut seen = 0;
        'outer: for dd in 0..corpus.docs() {
            for &ww in corpus.doc_tokens(dd) {
                if seen == t {
                    d = dd;
                    w = ww;
                    break 'outer;
                }
                seen += 1;
            }
        }
        let c = (state.assign[t] - 1) as usize;
        state.counts.n_dc.set(d, c, 0.0);
        match remove_token(&mut state, &promos, d, w, t) {
            Err(SamplerFault::NegativeCount { table: "n_dc", .. }) => {}
            other => panic!("expected n_dc fault, got {other:?}"),
        }
    }

    #[test]
    fn rounding_residue_is_clamped() {
        let (corpus, _seeds, presence, promos, _hyper) = tiny_pipeline();
        let mut rng = chain_rng(5, 0);
        let mut state = init_state(&corpus, &presence, &promos, &mut rng);
        let t = state.assign.iter().position(|&a| a != BACKGROUND).unwrap();
        let (mut d, mut w) = (0, 0);
        let mut seen = 0;
        'outer: for dd in 0..corpus.docs() {
            for &ww in corpus.doc_tokens(dd) {
                if seen == t {
                    d = dd;
                    w = ww;
                    break 'outer;
                }
                seen += 1;
            }
        }
        let c = (state.assign[t] - 1) as usize;
        let pc = promos.category(c, d);
        // Leave 1e-7 less than the removal amount: within tolerance.
        state.counts.n_dc.set(d, c, pc - 1e-7);
        remove_token(&mut state, &promos, d, w, t).unwrap();
        assert_eq!(state.counts.n_dc.get(d, c), 0.0, "residue clamped to zero");
    }

    #[test]
    fn categorical_scan_picks_by_cumulative_mass() {
        let w = [0.25, 0.5, 0.25];
        assert_eq!(categorical_scan(&w, 0.0), 0);
        assert_eq!(categorical_scan(&w, 0.2499), 0);
        assert_eq!(categorical_scan(&w, 0.25), 1);
        assert_eq!(categorical_scan(&w, 0.7499), 1);
        assert_eq!(categorical_scan(&w, 0.75), 2);
        assert_eq!(
            categorical_scan(&w, 2.0),
            2,
            "out of range falls back to last"
        );
    }

    proptest! {
        #[test]
        fn alpha_probabilities_are_complementary(
            n_dc in 0.0f64..80.0,
            n_rest in 0.0f64..300.0,
            alpha_rest in 0u32..12,
            extra_cats in 0u32..8,
            g0 in 0.1f64..30.0,
            g1 in 1e-8f64..0.1,
        ) {
            let cats = f64::from(alpha_rest + 1 + extra_cats);
            let mut hyper = Hyperparams::defaults(cats as usize);
            hyper.gamma0 = g0;
            hyper.gamma1 = g1;
            for form in [SelectorForm::Product, SelectorForm::CollapsedRatio] {
                hyper.selector_form = form;
                let (on, off) =
                    alpha_log_weights_parts(n_dc, n_rest, f64::from(alpha_rest), cats, &hyper);
                prop_assert!(on.is_finite() && off.is_finite());
                let lse = math::log_sum_exp2(on, off);
                let p_on = math::exp(on - lse);
                let p_off = math::exp(off - lse);
                // Extreme ratios saturate one side to exactly 1.0 (the other
                // underflows); that is the correct limiting behavior.
                prop_assert!((0.0..=1.0).contains(&p_on));
                prop_assert!((0.0..=1.0).contains(&p_off));
                prop_assert!(p_on > 0.0 || p_off > 0.0);
                prop_assert!(math::abs(p_on + p_off - 1.0) <= 1e-12);
            }
        }
    }
}
