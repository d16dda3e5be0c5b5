//! Seed-guided promotion tables.
//!
//! The sampler's generalized Pólya urn replaces unit count increments with
//! fractional ones taken from two tables built before inference starts:
//!
//! * category promotion `P[c][d]`: how strongly a token assigned to category
//!   `c` in document `d` counts toward the document-category table. Documents
//!   containing a seed of `c` get weight 1, others get `mu`; each document row
//!   is rescaled to sum to the number of categories.
//! * word promotion `Pw[w][c]`: how strongly word `w` counts toward category
//!   `c`'s word table, derived from document-level co-occurrence with the
//!   category's seed words (or from embedding similarity). Each category
//!   column is rescaled to sum to the vocabulary size.
//!
//! With `mu = 1` and word promotion disabled both tables are exactly all-ones
//! and the sampler degenerates to the plain unit-increment urn.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Corpus, Indicator, SeedConfig};
use crate::mat::Mat;
use crate::math;

/// Both tables bundled; `category` is stored document-major (D rows, C cols),
/// `word` vocabulary-major (W rows, C cols), so the sampler reads one
/// contiguous row per token.
#[derive(Debug, Clone)]
pub struct PromotionTables {
    pub category: Mat,
    pub word: Mat,
}

impl PromotionTables {
    /// Promotion of category `c` in document `d`.
    #[inline]
    pub fn category(&self, c: usize, d: usize) -> f64 {
        self.category.get(d, c)
    }

    /// Promotion of word `w` toward category `c`.
    #[inline]
    pub fn word(&self, w: u32, c: usize) -> f64 {
        self.word.get(w as usize, c)
    }

    #[inline]
    pub fn category_row(&self, d: usize) -> &[f64] {
        self.category.row(d)
    }

    #[inline]
    pub fn word_row(&self, w: u32) -> &[f64] {
        self.word.row(w as usize)
    }
}

/// Per-document category promotion. Row `d` carries weight 1 for categories
/// whose seeds occur in the document and `mu` otherwise, rescaled so the row
/// sums to C. An all-zero row (`mu = 0`, no seeds present) falls back to the
/// uniform all-ones row rather than dividing by zero.
pub fn build_category_promotion(presence: &Indicator, mu: f64) -> Mat {
    let (docs, cats) = (presence.rows(), presence.cols());
    let c_f = cats as f64;
    let mut out = Mat::zeros(docs, cats);
    let mut u = vec![0.0f64; cats];
    for d in 0..docs {
        let mut sum = 0.0;
        for (c, u_c) in u.iter_mut().enumerate() {
            *u_c = if presence.get(d, c) { 1.0 } else { mu };
            sum += *u_c;
        }
        if sum == 0.0 {
            for u_c in u.iter_mut() {
                *u_c = 1.0;
            }
            sum = c_f;
        }
        // Multiply by (C / sum) rather than dividing by (sum / C): when all
        // weights are 1 the scale is exactly 1.0 and every cell is exactly 1.0,
        // which the unit-increment degeneration relies on.
        let scale = c_f / sum;
        let row = out.row_mut(d);
        for c in 0..cats {
            row[c] = u[c] * scale;
        }
    }
    out
}

/// All-ones word table: word promotion disabled.
pub fn uniform_word_promotion(vocab_size: usize, categories: usize) -> Mat {
    Mat::filled(vocab_size, categories, 1.0)
}

/// Document-frequency word promotion.
///
/// For each seed word `s` of category `c`, `p(w|s)` is the fraction of the
/// documents containing `s` that also contain `w`; `v(w,c)` averages `p(w|s)`
/// over the category's seeds. Relevance is normalized across categories and
/// floored at `epsilon`, then each category column is rescaled to sum to W.
pub fn build_word_promotion(corpus: &Corpus, seeds: &SeedConfig, epsilon: f64) -> Mat {
    let w_count = corpus.vocab_size();
    let cats = seeds.num_categories();
    let mut v = Mat::zeros(w_count, cats);

    let mut in_seed_docs = vec![false; corpus.docs()];
    for c in 0..cats {
        let seed_ids = seeds.seed_ids(c);
        for &s in seed_ids {
            let seed_docs = corpus.docs_containing(s);
            let df_s = seed_docs.len();
            if df_s == 0 {
                log::warn!(
                    "seed word '{}' occurs in no documents; contributes nothing",
                    corpus.word(s)
                );
                continue;
            }
            for &d in seed_docs {
                in_seed_docs[d as usize] = true;
            }
            let inv = 1.0 / df_s as f64;
            for w in 0..w_count as u32 {
                let joint = corpus
                    .docs_containing(w)
                    .iter()
                    .filter(|&&d| in_seed_docs[d as usize])
                    .count();
                v.add(w as usize, c, joint as f64 * inv);
            }
            for &d in seed_docs {
                in_seed_docs[d as usize] = false;
            }
        }
        let inv_seeds = 1.0 / seed_ids.len() as f64;
        for w in 0..w_count {
            let x = v.get(w, c);
            v.set(w, c, x * inv_seeds);
        }
    }

    normalize_relevance(&mut v, epsilon);
    v
}

/// Word vectors for the embedding promotion variant.
#[derive(Debug, Clone, Default)]
pub struct WordVectors {
    map: BTreeMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn new() -> Self {
        WordVectors::default()
    }

    pub fn insert(&mut self, word: String, vector: Vec<f64>) {
        self.map.insert(word, vector);
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.map.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PromotionError {
    /// Every seed of these categories is missing from the vector table.
    EmptyEmbeddedCategories(Vec<String>),
}

impl fmt::Display for PromotionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromotionError::EmptyEmbeddedCategories(names) => {
                write!(f, "categories with no embedded seed words: ")?;
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

impl core::error::Error for PromotionError {}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..n {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (math::sqrt(na) * math::sqrt(nb))
}

/// Embedding word promotion: seed affinity `p(w|s) = (cos(s, w) + 1) / 2`.
/// Vocabulary words without a vector sit at the neutral 0.5. Seeds without a
/// vector are dropped with a warning; a category losing every seed is an
/// error.
pub fn build_word_promotion_embedding(
    corpus: &Corpus,
    seeds: &SeedConfig,
    vectors: &WordVectors,
    epsilon: f64,
) -> Result<Mat, PromotionError> {
    let w_count = corpus.vocab_size();
    let cats = seeds.num_categories();
    let mut v = Mat::zeros(w_count, cats);
    let mut empties = Vec::new();
    for c in 0..cats {
        let embedded: Vec<&[f64]> = seeds
            .seed_ids(c)
            .iter()
            .filter_map(|&s| {
                let word = corpus.word(s);
                let vec = vectors.get(word);
                if vec.is_none() {
                    log::warn!(
                        "category '{}': seed word '{}' has no embedding, dropped",
                        seeds.name(c),
                        word
                    );
                }
                vec
            })
            .collect();
        if embedded.is_empty() {
            empties.push(String::from(seeds.name(c)));
            continue;
        }
        let inv_seeds = 1.0 / embedded.len() as f64;
        for w in 0..w_count {
            let wv = vectors.get(corpus.word(w as u32));
            let mut acc = 0.0;
            for sv in &embedded {
                let cos = match wv {
                    Some(wv) => cosine(sv, wv),
                    None => 0.0,
                };
                acc += (cos + 1.0) * 0.5;
            }
            v.set(w, c, acc * inv_seeds);
        }
    }
    if !empties.is_empty() {
        return Err(PromotionError::EmptyEmbeddedCategories(empties));
    }
    normalize_relevance(&mut v, epsilon);
    Ok(v)
}

/// Shared tail of both word-promotion builders: normalize relevance across
/// categories per word (0/0 taken as 0), floor at `epsilon`, then scale each
/// category column to sum to the vocabulary size.
fn normalize_relevance(v: &mut Mat, epsilon: f64) {
    let (w_count, cats) = (v.rows(), v.cols());
    for w in 0..w_count {
        let row = v.row_mut(w);
        let sum: f64 = row.iter().sum();
        for x in row.iter_mut() {
            let ratio = if sum == 0.0 { 0.0 } else { *x / sum };
            *x = if ratio > epsilon { ratio } else { epsilon };
        }
    }
    let w_f = w_count as f64;
    for c in 0..cats {
        let mut col_sum = 0.0;
        for w in 0..w_count {
            col_sum += v.get(w, c);
        }
        if col_sum == 0.0 {
            continue; // only possible for an empty vocabulary
        }
        let scale = w_f / col_sum;
        for w in 0..w_count {
            let x = v.get(w, c);
            v.set(w, c, x * scale);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{preprocess, PreprocessOptions, RawDocument};
    use alloc::borrow::ToOwned;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn indicator(rows: &[&[bool]]) -> Indicator {
        let mut ind = Indicator::new(rows.len(), rows[0].len());
        for (d, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                ind.set(d, c, v);
            }
        }
        ind
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    #[test]
    fn category_promotion_seeded_row() {
        // One seeded category out of four at mu = 0.3: the seeded category is
        // boosted to 4/1.9, the rest share 0.3 * 4/1.9.
        let ind = indicator(&[&[true, false, false, false]]);
        let p = build_category_promotion(&ind, 0.3);
        assert!(close(p.get(0, 0), 2.1053, 5e-5));
        for c in 1..4 {
            assert!(close(p.get(0, c), 0.6316, 5e-5));
        }
        let sum: f64 = p.row(0).iter().sum();
        assert!(close(sum, 4.0, 1e-9));
    }

    #[test]
    fn category_promotion_mu_zero_restricts_to_seeded() {
        let ind = indicator(&[&[true, true, false, false]]);
        let p = build_category_promotion(&ind, 0.0);
        assert_eq!(p.row(0), &[2.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn category_promotion_mu_zero_unseeded_falls_back_to_uniform() {
        let ind = indicator(&[&[false, false, false]]);
        let p = build_category_promotion(&ind, 0.0);
        assert_eq!(p.row(0), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn category_promotion_mu_one_is_exactly_ones() {
        // Exactness (not approximation) matters: the unit-increment
        // degeneration test compares sampler traces bit for bit.
        for cats in [1usize, 3, 7, 23, 49] {
            let mut ind = Indicator::new(2, cats);
            for c in 0..cats {
                ind.set(0, c, c % 2 == 0);
            }
            let p = build_category_promotion(&ind, 1.0);
            for d in 0..2 {
                for c in 0..cats {
                    assert_eq!(p.get(d, c), 1.0, "cats={cats} d={d} c={c}");
                }
            }
        }
    }

    fn cooccurrence_corpus() -> Corpus {
        let raw: Vec<RawDocument> = [
            ("d0", "heart attack heart"),
            ("d1", "heart surgery"),
            ("d2", "lung cancer"),
            ("d3", "lung heart"),
        ]
        .iter()
        .map(|(id, text)| RawDocument {
            id: (*id).to_owned(),
            text: (*text).to_owned(),
            labels: None,
        })
        .collect();
        let opts = PreprocessOptions {
            min_df: 1,
            ..PreprocessOptions::default()
        };
        preprocess(&raw, &opts).unwrap()
    }

    #[test]
    fn word_promotion_hand_case() {
        // Vocabulary order: heart, attack, surgery, lung, cancer.
        // p(w|heart) = (1, 1/3, 1/3, 1/3, 0); p(w|lung) = (1/2, 0, 0, 1, 1/2).
        // Cross-category normalization, floor 0.01, column rescale to W=5
        // gives exact rationals with denominators 878 and 631.
        let corpus = cooccurrence_corpus();
        let seeds = SeedConfig::parse("cardio: heart\npulmo: lung\n", &corpus).unwrap();
        let p = build_word_promotion(&corpus, &seeds, 0.01);
        let expect_cardio = [
            1000.0 / 878.0,
            1500.0 / 878.0,
            1500.0 / 878.0,
            375.0 / 878.0,
            15.0 / 878.0,
        ];
        let expect_pulmo = [
            500.0 / 631.0,
            15.0 / 631.0,
            15.0 / 631.0,
            1125.0 / 631.0,
            1500.0 / 631.0,
        ];
        for w in 0..5 {
            assert!(
                close(p.get(w, 0), expect_cardio[w], 1e-12),
                "cardio word {w}: {} vs {}",
                p.get(w, 0),
                expect_cardio[w]
            );
            assert!(
                close(p.get(w, 1), expect_pulmo[w], 1e-12),
                "pulmo word {w}: {} vs {}",
                p.get(w, 1),
                expect_pulmo[w]
            );
        }
        for c in 0..2 {
            let col: f64 = (0..5).map(|w| p.get(w, c)).sum();
            assert!(close(col, 5.0, 1e-9));
        }
    }

    #[test]
    fn word_promotion_floor_applies_to_unrelated_words() {
        // "cancer" never co-occurs with the cardio seed: its relevance is
        // floored at epsilon, so after column rescaling it is epsilon times
        // the column scale, strictly positive and the smallest entry.
        let corpus = cooccurrence_corpus();
        let seeds = SeedConfig::parse("cardio: heart\npulmo: lung\n", &corpus).unwrap();
        let p = build_word_promotion(&corpus, &seeds, 0.01);
        let cancer = corpus.word_id("cancer").unwrap() as usize;
        let col_scale = 5.0 / (878.0 / 300.0);
        assert!(close(p.get(cancer, 0), 0.01 * col_scale, 1e-12));
        for w in 0..5 {
            assert!(p.get(w, 0) >= p.get(cancer, 0));
        }
    }

    #[test]
    fn uniform_word_promotion_is_ones() {
        let p = uniform_word_promotion(4, 3);
        for w in 0..4 {
            for c in 0..3 {
                assert_eq!(p.get(w, c), 1.0);
            }
        }
    }

    #[test]
    fn embedding_promotion_missing_word_is_neutral() {
        let corpus = cooccurrence_corpus();
        let seeds = SeedConfig::parse("cardio: heart\n", &corpus).unwrap();
        let mut vectors = WordVectors::new();
        vectors.insert("heart".to_string(), alloc::vec![1.0, 0.0]);
        vectors.insert("attack".to_string(), alloc::vec![0.0, 1.0]); // orthogonal
        vectors.insert("cancer".to_string(), alloc::vec![-1.0, 0.0]); // opposite
        let p = build_word_promotion_embedding(&corpus, &seeds, &vectors, 0.01).unwrap();
        // Single category: any word with positive affinity normalizes to
        // ratio 1 (including vectorless words at the neutral 0.5); "cancer"
        // is exactly opposite, affinity 0, and lands on the floor.
        // Column: four entries at 1, one at 0.01, rescaled to sum to 5.
        let scale = 5.0 / 4.01;
        let cancer = corpus.word_id("cancer").unwrap() as usize;
        for w in 0..corpus.vocab_size() {
            let expect = if w == cancer { 0.01 * scale } else { scale };
            assert!(
                close(p.get(w, 0), expect, 1e-12),
                "word {w}: {} vs {expect}",
                p.get(w, 0)
            );
        }
    }

    #[test]
    fn embedding_promotion_orders_by_affinity() {
        let corpus = cooccurrence_corpus();
        let seeds = SeedConfig::parse("cardio: heart\npulmo: lung\n", &corpus).unwrap();
        let mut vectors = WordVectors::new();
        vectors.insert("heart".to_string(), alloc::vec![1.0, 0.0]);
        vectors.insert("lung".to_string(), alloc::vec![0.0, 1.0]);
        vectors.insert("attack".to_string(), alloc::vec![0.9, 0.1]);
        vectors.insert("cancer".to_string(), alloc::vec![0.1, 0.9]);
        // "surgery" has no vector: affinity (0 + 1)/2 = 0.5 for both.
        let p = build_word_promotion_embedding(&corpus, &seeds, &vectors, 0.01).unwrap();
        let attack = corpus.word_id("attack").unwrap();
        let cancer = corpus.word_id("cancer").unwrap();
        let surgery = corpus.word_id("surgery").unwrap();
        assert!(p.get(attack as usize, 0) > p.get(attack as usize, 1));
        assert!(p.get(cancer as usize, 1) > p.get(cancer as usize, 0));
        assert!(close(
            p.get(surgery as usize, 0),
            p.get(surgery as usize, 1),
            1e-12
        ));
        for c in 0..2 {
            let col: f64 = (0..corpus.vocab_size()).map(|w| p.get(w, c)).sum();
            assert!(close(col, corpus.vocab_size() as f64, 1e-9));
        }
    }

    #[test]
    fn embedding_promotion_empty_category_is_error() {
        let corpus = cooccurrence_corpus();
        let seeds = SeedConfig::parse("cardio: heart\npulmo: lung\n", &corpus).unwrap();
        let mut vectors = WordVectors::new();
        vectors.insert("heart".to_string(), alloc::vec![1.0, 0.0]);
        match build_word_promotion_embedding(&corpus, &seeds, &vectors, 0.01) {
            Err(PromotionError::EmptyEmbeddedCategories(names)) => {
                assert_eq!(names, alloc::vec!["pulmo".to_string()]);
            }
            other => panic!("expected empty-category error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn category_rows_sum_to_c(
            rows in proptest::collection::vec(
                proptest::collection::vec(proptest::bool::ANY, 1..12), 1..30),
            mu in 0.0f64..=1.0,
        ) {
            let cats = rows[0].len();
            let mut ind = Indicator::new(rows.len(), cats);
            for (d, row) in rows.iter().enumerate() {
                for c in 0..cats {
                    ind.set(d, c, row[c % row.len()]);
                }
            }
            let p = build_category_promotion(&ind, mu);
            for d in 0..rows.len() {
                let sum: f64 = p.row(d).iter().sum();
                prop_assert!(math::abs(sum - cats as f64) <= 1e-9);
                for c in 0..cats {
                    let x = p.get(d, c);
                    prop_assert!(x >= 0.0 && x <= cats as f64 + 1e-12);
                }
            }
        }

        #[test]
        fn word_columns_sum_to_w(texts in proptest::collection::vec("[a-d ]{3,40}", 2..10)) {
            let raw: Vec<RawDocument> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| RawDocument {
                    // Pad with a guaranteed token so the corpus is never all-empty
                    // and each category keeps a resolvable seed.
                    id: alloc::format!("doc{i}"),
                    text: alloc::format!("{t} aaa bbb"),
                    labels: None,
                })
                .collect();
            let opts = PreprocessOptions { min_df: 1, ..PreprocessOptions::default() };
            let corpus = preprocess(&raw, &opts).unwrap();
            let seeds = SeedConfig::parse("one: aaa\ntwo: bbb\n", &corpus).unwrap();
            let p = build_word_promotion(&corpus, &seeds, 0.01);
            let w = corpus.vocab_size();
            for c in 0..2 {
                let col: f64 = (0..w).map(|i| p.get(i, c)).sum();
                prop_assert!(math::abs(col - w as f64) <= 1e-6, "col {c} sums to {col}");
            }
            for i in 0..w {
                for c in 0..2 {
                    prop_assert!(p.get(i, c) > 0.0);
                }
            }
        }
    }
}
