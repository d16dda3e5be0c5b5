//! Label assignment from a trained state.
//!
//! Scores are token-level posteriors averaged over the document: each token
//! votes with `p(c|w)` derived from the category word distributions and the
//! smoothed category masses. Label sets come from the selector matrix (the
//! model's own sparsity decision); the dense variant ranks documents per
//! category and takes the top K instead.

use alloc::vec::Vec;

use crate::corpus::Corpus;
use crate::mat::Mat;
use crate::model::{ModelState, PosteriorEstimates};

/// Document-by-category score matrix; every row is a probability vector.
/// Documents with no tokens score uniformly.
pub fn category_scores(estimates: &PosteriorEstimates, corpus: &Corpus) -> Mat {
    let cats = estimates.phi.rows();
    let vocab = estimates.phi.cols();
    let uniform = 1.0 / cats as f64;

    // Token-level posterior p(c|w), W rows by C cols.
    let mut pcw = Mat::zeros(vocab, cats);
    for w in 0..vocab {
        let row = pcw.row_mut(w);
        let mut sum = 0.0;
        for (c, x) in row.iter_mut().enumerate() {
            *x = estimates.phi.get(c, w) * estimates.category_prior[c];
            sum += *x;
        }
        if sum > 0.0 {
            for x in row.iter_mut() {
                *x /= sum;
            }
        } else {
            for x in row.iter_mut() {
                *x = uniform;
            }
        }
    }

    let mut scores = Mat::zeros(corpus.docs(), cats);
    for d in 0..corpus.docs() {
        let tokens = corpus.doc_tokens(d);
        let row = scores.row_mut(d);
        if tokens.is_empty() {
            for x in row.iter_mut() {
                *x = uniform;
            }
            continue;
        }
        for &w in tokens {
            let src = pcw.row(w as usize);
            for (x, &p) in row.iter_mut().zip(src) {
                *x += p;
            }
        }
        let inv = 1.0 / tokens.len() as f64;
        for x in row.iter_mut() {
            *x *= inv;
        }
    }
    scores
}

/// Label sets from the selector matrix. A document whose selectors are all
/// off falls back to its single highest-scoring category.
pub fn assigned_labels(state: &ModelState, scores: &Mat) -> Vec<Vec<u16>> {
    (0..state.num_docs)
        .map(|d| {
            let mut set = state.selected(d);
            if set.is_empty() {
                let row = scores.row(d);
                let mut best = 0usize;
                for c in 1..row.len() {
                    if row[c] > row[best] {
                        best = c;
                    }
                }
                set.push(best as u16);
            }
            set
        })
        .collect()
}

/// Top-K labeling for the dense variant: per category, the K highest-scoring
/// documents are positive (ties broken by ascending document index). K larger
/// than the corpus selects every document, with a warning.
pub fn topk_labels(scores: &Mat, k: usize) -> Vec<Vec<u16>> {
    let docs = scores.rows();
    let cats = scores.cols();
    let k = if k > docs {
        log::warn!("top-k {k} exceeds document count {docs}; clamped");
        docs
    } else {
        k
    };
    let mut labels: Vec<Vec<u16>> = alloc::vec![Vec::new(); docs];
    let mut order: Vec<usize> = Vec::with_capacity(docs);
    for c in 0..cats {
        order.clear();
        order.extend(0..docs);
        order.sort_by(|&a, &b| {
            scores
                .get(b, c)
                .partial_cmp(&scores.get(a, c))
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &d in order.iter().take(k) {
            labels[d].push(c as u16);
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::math;
    use crate::model::{Counts, ModelState};
    use alloc::borrow::ToOwned;
    use alloc::vec;
    use alloc::vec::Vec;

    fn two_word_corpus() -> Corpus {
        // d0 = [w0, w0, w1], d1 = [] (empty), d2 = [w1].
        Corpus::from_parts(
            vec!["d0".to_owned(), "d1".to_owned(), "d2".to_owned()],
            vec!["alpha".to_owned(), "beta".to_owned()],
            vec![vec![0, 0, 1], vec![], vec![1]],
            vec![None, None, None],
            true,
        )
        .unwrap()
    }

    fn planted_estimates() -> PosteriorEstimates {
        PosteriorEstimates {
            phi0: vec![0.5, 0.5],
            phi: Mat::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]]),
            theta: Mat::zeros(3, 2),
            lambda: 0.5,
            category_prior: vec![0.5, 0.5],
        }
    }

    #[test]
    fn scores_average_token_posteriors() {
        // Equal priors: p(c0|w0) = 0.75, p(c0|w1) = 0.25.
        // d0 = [w0, w0, w1] scores (0.75 + 0.75 + 0.25) / 3 for c0.
        let corpus = two_word_corpus();
        let scores = category_scores(&planted_estimates(), &corpus);
        assert!(math::abs(scores.get(0, 0) - 1.75 / 3.0) < 1e-12);
        assert!(math::abs(scores.get(0, 1) - 1.25 / 3.0) < 1e-12);
        assert!(math::abs(scores.get(2, 0) - 0.25) < 1e-12);
    }

    #[test]
    fn empty_documents_score_uniformly() {
        let corpus = two_word_corpus();
        let scores = category_scores(&planted_estimates(), &corpus);
        assert_eq!(scores.row(1), &[0.5, 0.5]);
    }

    #[test]
    fn score_rows_are_probability_vectors() {
        let corpus = two_word_corpus();
        let scores = category_scores(&planted_estimates(), &corpus);
        for d in 0..3 {
            let s: f64 = scores.row(d).iter().sum();
            assert!(math::abs(s - 1.0) < 1e-12, "row {d} sums to {s}");
        }
    }

    #[test]
    fn unequal_priors_shift_token_posteriors() {
        let corpus = two_word_corpus();
        let mut est = planted_estimates();
        est.category_prior = vec![0.9, 0.1];
        let scores = category_scores(&est, &corpus);
        // p(c0|w1) = 0.25*0.9 / (0.25*0.9 + 0.75*0.1) = 0.75
        assert!(math::abs(scores.get(2, 0) - 0.75) < 1e-12);
    }

    fn state_with_alpha(alpha: Vec<u8>, docs: usize, cats: usize) -> ModelState {
        let alpha_count = (0..docs)
            .map(|d| {
                alpha[d * cats..(d + 1) * cats]
                    .iter()
                    .map(|&x| u32::from(x))
                    .sum()
            })
            .collect();
        ModelState {
            num_docs: docs,
            num_categories: cats,
            vocab_size: 2,
            assign: Vec::new(),
            alpha,
            alpha_count,
            counts: Counts::zeros(docs, cats, 2),
        }
    }

    #[test]
    fn assigned_labels_read_selectors_with_argmax_fallback() {
        let state = state_with_alpha(vec![1, 0, 1, 1, 0, 0], 3, 2);
        let scores = Mat::from_rows(&[vec![0.6, 0.4], vec![0.5, 0.5], vec![0.2, 0.8]]);
        let labels = assigned_labels(&state, &scores);
        assert_eq!(labels[0], vec![0]);
        assert_eq!(labels[1], vec![0, 1]);
        assert_eq!(
            labels[2],
            vec![1],
            "empty selector row falls back to argmax"
        );
    }

    #[test]
    fn topk_orders_and_breaks_ties_by_document_index() {
        let scores = Mat::from_rows(&[
            vec![0.9, 0.1],
            vec![0.5, 0.5],
            vec![0.9, 0.2],
            vec![0.1, 0.5],
        ]);
        let labels = topk_labels(&scores, 2);
        // Category 0 top-2: docs 0 and 2 (tied 0.9, index order). Category 1
        // top-2: docs 1 and 3 tie at 0.5, doc 1 wins by index, then doc 3.
        let per_cat: Vec<Vec<usize>> = (0..2)
            .map(|c| {
                (0..4)
                    .filter(|&d| labels[d].contains(&(c as u16)))
                    .collect()
            })
            .collect();
        assert_eq!(per_cat[0], vec![0, 2]);
        assert_eq!(per_cat[1], vec![1, 3]);
    }

    #[test]
    fn topk_clamps_oversized_k() {
        let scores = Mat::from_rows(&[vec![0.9], vec![0.5]]);
        let labels = topk_labels(&scores, 10);
        assert_eq!(labels[0], vec![0]);
        assert_eq!(labels[1], vec![0]);
    }

    #[test]
    fn zero_prior_mass_word_scores_uniformly() {
        let corpus = two_word_corpus();
        let mut est = planted_estimates();
        est.phi = Mat::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]);
        let scores = category_scores(&est, &corpus);
        // w0 has zero mass under every category: token votes uniformly.
        assert!(math::abs(scores.get(0, 0) - 0.5) < 1e-12);
    }
}
