//! Synthetic labeled corpora with planted structure.
//!
//! Forward-samples the same mixture the sampler inverts: each document picks
//! one or two categories, mixes their word distributions with a shared
//! background distribution, and emits tokens. Every category owns a disjoint
//! vocabulary block (plus an optional bleed into its neighbor) whose first
//! few words are boosted and exported as that category's seeds, so the
//! generator doubles as a ground-truth oracle: a sampler pointed at the
//! emitted corpus and seed file should recover the planted labels.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::corpus::RawDocument;
use crate::mat::Mat;
use crate::math;
use crate::ChainRng;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub docs: usize,
    pub categories: usize,
    pub vocab_size: usize,
    /// Tokens per document, all documents equal length.
    pub doc_len: usize,
    pub seeds_per_category: usize,
    /// Probability each token comes from the background distribution.
    pub background_fraction: f64,
    /// Probability a document carries two labels instead of one.
    pub two_label_prob: f64,
    /// Symmetric Dirichlet parameter for the per-document category mix.
    pub concentration: f64,
    /// Within-block weight of a seed word relative to a non-seed word.
    pub seed_boost: f64,
    /// Fraction of a category's mass spread uniformly over the next
    /// category's non-seed words (cyclic). Seeds stay exclusive to their
    /// own category so the confusion is in the tail vocabulary, as it is in
    /// real corpora. Zero keeps the blocks fully disjoint.
    pub overlap: f64,
    /// Fraction of each category's mass spent on the background block,
    /// planting generic words that every topic emits. Zero keeps category
    /// and background vocabularies disjoint.
    pub generic: f64,
    /// Within-block rank decay exponent: word at rank i carries weight
    /// (i+1)^-zipf, before the seed boost. Zero gives uniform blocks; real
    /// vocabularies sit nearer 1, leaving most block words rare.
    pub zipf: f64,
    /// Number of sub-topic slices per category. Each document draws its
    /// category tokens from one slice of the block; the seeds appear in
    /// every slice and are the only words linking slices together, the way
    /// a real category covers documents about different facets of it. One
    /// slice means every document uses the whole block.
    pub fragments: usize,
    /// Probability that a category token repeats the document's previous
    /// category token instead of being drawn fresh: word burstiness, the
    /// tendency of a word used once in a document to recur there. Chains
    /// root at fresh draws, so planted marginals are exact; only per-document
    /// multiplicities inflate. Token counts get noisier while document
    /// frequencies stay calibrated, which is the regime that separates
    /// count-based and document-frequency-based signals.
    pub burst: f64,
    /// Expected number of distinct off-topic words per document, each drawn
    /// uniformly from the next category's non-seed block (cyclic on the
    /// first label) and repeated `intrusion_reps` times in that document:
    /// quoted phrases, named entities and digressions that burst locally
    /// without belonging to the document's categories. Each intrusion
    /// touches one document, so it inflates token counts `intrusion_reps`
    /// times harder than document frequencies; signals resting on the
    /// latter stay calibrated while raw counts blur across categories.
    pub intrusions: f64,
    /// Occurrences of each intruding word within its document.
    pub intrusion_reps: usize,
    /// Probability that a document carries a distractor theme: a burst of
    /// words from a dedicated sub-block (the second half of the background
    /// block) making up 40% of that document's tokens. The theme cuts
    /// across labels, so it forms the strongest co-occurrence structure in
    /// the corpus while being orthogonal to gold: topics are tempted to
    /// drift onto it. Its words co-occur with every category's seeds
    /// equally, so seed-relevance signals stay flat and resist the drift.
    pub distractor: f64,
    /// Fraction of each document's tokens drawn from its group's private
    /// jargon: consecutive runs of ten documents share a handful of words
    /// from the second half of the background block that appear nowhere
    /// else, the way real documents carry their own rare terminology.
    /// Groups cut across labels and the background distribution avoids the
    /// jargon words, so these tokens have no good home: they pile into
    /// whichever category-topics are switched on, carrying label noise
    /// between the documents of a group. Their document frequencies stay
    /// low and spread across seeds, which is what a relevance signal built
    /// on seed co-occurrence needs to push them back out.
    pub jargon: f64,
}

impl Default for SynthSpec {
    fn default() -> SynthSpec {
        SynthSpec {
            docs: 200,
            categories: 3,
            vocab_size: 60,
            doc_len: 50,
            seeds_per_category: 3,
            background_fraction: 0.4,
            two_label_prob: 0.3,
            concentration: 1.0,
            seed_boost: 3.0,
            overlap: 0.0,
            generic: 0.0,
            zipf: 0.0,
            fragments: 1,
            burst: 0.0,
            intrusions: 0.0,
            intrusion_reps: 3,
            distractor: 0.0,
            jargon: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    /// Vocabulary cannot hold the requested block structure: each of the
    /// C category blocks plus the background block needs at least
    /// `seeds_per_category` words (background needs one).
    VocabTooSmall {
        need: usize,
        have: usize,
    },
    BadParam(&'static str),
}

impl core::fmt::Display for SynthError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SynthError::VocabTooSmall { need, have } => {
                write!(
                    f,
                    "vocabulary of {have} cannot hold the planted blocks; need {need}"
                )
            }
            SynthError::BadParam(what) => write!(f, "invalid generator parameter: {what}"),
        }
    }
}

pub struct SynthOutput {
    pub documents: Vec<RawDocument>,
    /// Seed file body in the `name: word word` format the seed parser reads.
    pub seed_text: String,
    pub category_names: Vec<String>,
    /// Planted vocabulary; index-aligned with the distribution columns.
    pub words: Vec<String>,
    /// Planted per-category word distributions, one row per category.
    pub category_word_dist: Mat,
    pub background_dist: Vec<f64>,
    /// Gold label sets as category indices, sorted ascending.
    pub gold: Vec<Vec<u16>>,
}

fn validate(spec: &SynthSpec) -> Result<usize, SynthError> {
    if spec.docs == 0 || spec.doc_len == 0 {
        return Err(SynthError::BadParam("docs and doc_len must be positive"));
    }
    if spec.categories == 0 || spec.seeds_per_category == 0 {
        return Err(SynthError::BadParam(
            "categories and seeds_per_category must be positive",
        ));
    }
    if !(0.0..=1.0).contains(&spec.background_fraction) {
        return Err(SynthError::BadParam("background_fraction outside [0, 1]"));
    }
    if !(0.0..=1.0).contains(&spec.two_label_prob) {
        return Err(SynthError::BadParam("two_label_prob outside [0, 1]"));
    }
    if !(0.0..1.0).contains(&spec.overlap) {
        return Err(SynthError::BadParam("overlap outside [0, 1)"));
    }
    if !(0.0..1.0).contains(&spec.generic) || spec.overlap + spec.generic >= 1.0 {
        return Err(SynthError::BadParam(
            "overlap plus generic must stay below 1",
        ));
    }
    if !(0.0..4.0).contains(&spec.zipf) {
        return Err(SynthError::BadParam("zipf outside [0, 4)"));
    }
    if !(0.0..1.0).contains(&spec.burst) {
        return Err(SynthError::BadParam("burst outside [0, 1)"));
    }
    if spec.intrusions.is_nan() || spec.intrusions < 0.0 || spec.intrusion_reps == 0 {
        return Err(SynthError::BadParam(
            "intrusions must be non-negative and reps positive",
        ));
    }
    if spec.intrusions * spec.intrusion_reps as f64 > spec.doc_len as f64 / 2.0 {
        return Err(SynthError::BadParam(
            "intrusions would crowd out document content",
        ));
    }
    if !(0.0..1.0).contains(&spec.distractor) {
        return Err(SynthError::BadParam("distractor outside [0, 1)"));
    }
    if !(0.0..=0.75).contains(&spec.jargon) {
        return Err(SynthError::BadParam("jargon outside [0, 0.75]"));
    }
    if spec.jargon > 0.0 && spec.distractor > 0.0 {
        return Err(SynthError::BadParam(
            "jargon and distractor share the background sub-block",
        ));
    }
    if spec.fragments == 0 {
        return Err(SynthError::BadParam("fragments must be positive"));
    }
    let tail = spec.vocab_size / (spec.categories + 1)
        - spec
            .seeds_per_category
            .min(spec.vocab_size / (spec.categories + 1));
    if spec.fragments > 1 && spec.fragments > tail {
        return Err(SynthError::BadParam(
            "more fragments than non-seed block words",
        ));
    }
    let positive = |x: f64| x > 0.0;
    if !positive(spec.concentration) || !positive(spec.seed_boost) {
        return Err(SynthError::BadParam(
            "concentration and seed_boost must be positive",
        ));
    }
    // C category blocks plus one background block, equal sized except the
    // background absorbs the remainder.
    let block = spec.vocab_size / (spec.categories + 1);
    if block < spec.seeds_per_category {
        let need = (spec.categories + 1) * spec.seeds_per_category;
        return Err(SynthError::VocabTooSmall {
            need,
            have: spec.vocab_size,
        });
    }
    if spec.distractor > 0.0 && spec.vocab_size - spec.categories * block < 2 {
        return Err(SynthError::BadParam(
            "distractor needs at least two background words",
        ));
    }
    if spec.jargon > 0.0 {
        let pool = (spec.vocab_size - spec.categories * block) / 2;
        if pool < spec.docs.div_ceil(JARGON_GROUP_DOCS) {
            return Err(SynthError::BadParam(
                "background block too small for jargon groups",
            ));
        }
    }
    Ok(block)
}

/// Documents per jargon group: consecutive runs of this many documents
/// share one private jargon vocabulary.
const JARGON_GROUP_DOCS: usize = 10;

/// Standard Gamma(shape, 1) draw (Marsaglia-Tsang squeeze, with the
/// boosting trick below shape 1).
fn sample_gamma<R: Rng>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.random();
        return sample_gamma(rng, shape + 1.0) * math::pow(u.max(1e-300), 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / math::sqrt(9.0 * d);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let x = math::sqrt(-2.0 * math::ln(u1.max(1e-300)))
            * math::cos(2.0 * core::f64::consts::PI * u2);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u: f64 = rng.random();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v3;
        }
        if math::ln(u.max(1e-300)) < 0.5 * x * x + d * (1.0 - v3 + math::ln(v3)) {
            return d * v3;
        }
    }
}

fn sample_categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let r: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            cum += p;
            if r < cum {
                return i;
            }
        }
    }
    // Rounding residue: the cumulative sum fell a hair short of 1.
    last_positive
}

pub fn generate(spec: &SynthSpec, rng_seed: u64) -> Result<SynthOutput, SynthError> {
    let block = validate(spec)?;
    let cats = spec.categories;
    let vocab = spec.vocab_size;
    let mut rng = ChainRng::seed_from_u64(rng_seed);

    let mut words = Vec::with_capacity(vocab);
    for c in 0..cats {
        for i in 0..block {
            words.push(format!("c{c}w{i:02}"));
        }
    }
    for i in 0..vocab - cats * block {
        words.push(format!("bgw{i:02}"));
    }

    let mut category_word_dist = Mat::zeros(cats, vocab);
    let seeds_n = spec.seeds_per_category;
    let tail = block - seeds_n;
    let bg_size = vocab - cats * block;
    let frags = if tail == 0 { 1 } else { spec.fragments };
    let rank_weight: Vec<f64> = (0..block)
        .map(|i| math::pow((i + 1) as f64, -spec.zipf))
        .collect();
    let tail_weight: f64 = rank_weight[seeds_n..].iter().sum();
    let seed_weight: f64 = spec.seed_boost * rank_weight[..seeds_n].iter().sum::<f64>();

    // One emission row per (category, slice): the seeds plus that slice of
    // the tail, renormalized, with the bleed and generic mass on top. The
    // exported category_word_dist is the equal-weight mixture of a
    // category's slices, which is what pooled per-category counts converge
    // to when every document draws its slice uniformly.
    let mut slice_dist: Vec<Vec<f64>> = Vec::with_capacity(cats * frags);
    for c in 0..cats {
        let bleed = if cats > 1 && tail > 0 {
            spec.overlap
        } else {
            0.0
        };
        for f in 0..frags {
            let lo = seeds_n + f * tail / frags;
            let hi = seeds_n + (f + 1) * tail / frags;
            let weight_sum = seed_weight + rank_weight[lo..hi].iter().sum::<f64>();
            let own_mass = 1.0 - bleed - spec.generic;
            let mut row = alloc::vec![0.0; vocab];
            for i in 0..seeds_n {
                row[c * block + i] = own_mass * spec.seed_boost * rank_weight[i] / weight_sum;
            }
            for i in lo..hi {
                row[c * block + i] = own_mass * rank_weight[i] / weight_sum;
            }
            if bleed > 0.0 {
                let next = (c + 1) % cats;
                for i in seeds_n..block {
                    row[next * block + i] += bleed * rank_weight[i] / tail_weight;
                }
            }
            if spec.generic > 0.0 {
                for p in row[cats * block..].iter_mut() {
                    *p += spec.generic / bg_size as f64;
                }
            }
            for (w, &p) in row.iter().enumerate() {
                category_word_dist.add(c, w, p / frags as f64);
            }
            slice_dist.push(row);
        }
    }
    // Jargon words live in the back half of the background block and are
    // withheld from the background distribution so they stay group-private.
    let jargon_pool = if spec.jargon > 0.0 { bg_size / 2 } else { 0 };
    let jargon_groups = spec.docs.div_ceil(JARGON_GROUP_DOCS);
    let jargon_per_group = if jargon_pool > 0 {
        jargon_pool / jargon_groups
    } else {
        0
    };
    let mut background_dist = alloc::vec![0.0; vocab];
    for p in background_dist[cats * block..vocab - jargon_pool].iter_mut() {
        *p = 1.0 / (bg_size - jargon_pool) as f64;
    }

    let category_names: Vec<String> = (0..cats).map(|c| format!("cat{c}")).collect();
    let mut seed_text = String::new();
    for c in 0..cats {
        seed_text.push_str(&category_names[c]);
        seed_text.push(':');
        for i in 0..spec.seeds_per_category {
            seed_text.push(' ');
            seed_text.push_str(&words[c * block + i]);
        }
        seed_text.push('\n');
    }

    let mut documents = Vec::with_capacity(spec.docs);
    let mut gold = Vec::with_capacity(spec.docs);
    for d in 0..spec.docs {
        let mut chosen: Vec<u16> = Vec::with_capacity(2);
        chosen.push(rng.random_range(0..cats) as u16);
        if cats > 1 && rng.random::<f64>() < spec.two_label_prob {
            loop {
                let second = rng.random_range(0..cats) as u16;
                if second != chosen[0] {
                    chosen.push(second);
                    break;
                }
            }
        }
        chosen.sort_unstable();

        let theta: Vec<f64> = if chosen.len() == 1 {
            alloc::vec![1.0]
        } else {
            let a = sample_gamma(&mut rng, spec.concentration);
            let b = sample_gamma(&mut rng, spec.concentration);
            let t = a / (a + b);
            alloc::vec![t, 1.0 - t]
        };
        let frag: Vec<usize> = chosen.iter().map(|_| rng.random_range(0..frags)).collect();

        // Off-topic intrusions: a few foreign words, each bursting locally.
        // They displace regular tokens so documents keep their length.
        let mut intruders: Vec<usize> = Vec::new();
        if spec.intrusions > 0.0 && tail > 0 {
            let others: Vec<usize> = (0..cats)
                .filter(|c| !chosen.contains(&(*c as u16)))
                .collect();
            if !others.is_empty() {
                let mut k = spec.intrusions as usize;
                if rng.random::<f64>() < spec.intrusions - k as f64 {
                    k += 1;
                }
                k = k.min(spec.doc_len / (2 * spec.intrusion_reps).max(1));
                for _ in 0..k {
                    let home = others[rng.random_range(0..others.len())];
                    intruders.push(home * block + seeds_n + rng.random_range(0..tail));
                }
            }
        }

        let distracted = spec.distractor > 0.0 && rng.random::<f64>() < spec.distractor;
        let mut tokens: Vec<usize> = Vec::with_capacity(spec.doc_len);
        let mut last_cat: Option<usize> = None;
        while tokens.len() + intruders.len() * spec.intrusion_reps < spec.doc_len {
            let w = if jargon_per_group > 0 && rng.random::<f64>() < spec.jargon {
                let base = vocab - jargon_pool + (d / JARGON_GROUP_DOCS) * jargon_per_group;
                base + rng.random_range(0..jargon_per_group)
            } else if distracted && rng.random::<f64>() < 0.4 {
                cats * block + bg_size / 2 + rng.random_range(0..bg_size - bg_size / 2)
            } else if rng.random::<f64>() < spec.background_fraction {
                sample_categorical(&mut rng, &background_dist)
            } else if let Some(prev) =
                last_cat.filter(|_| spec.burst > 0.0 && rng.random::<f64>() < spec.burst)
            {
                prev
            } else {
                let which = if theta.len() == 1 || rng.random::<f64>() < theta[0] {
                    0
                } else {
                    1
                };
                let row = &slice_dist[chosen[which] as usize * frags + frag[which]];
                let fresh = sample_categorical(&mut rng, row);
                last_cat = Some(fresh);
                fresh
            };
            tokens.push(w);
        }
        for &w in &intruders {
            for _ in 0..spec.intrusion_reps {
                tokens.push(w);
            }
        }
        tokens.truncate(spec.doc_len);

        let mut text = String::with_capacity(spec.doc_len * 6);
        for (t, &w) in tokens.iter().enumerate() {
            if t > 0 {
                text.push(' ');
            }
            text.push_str(&words[w]);
        }

        let labels: Vec<String> = chosen
            .iter()
            .map(|&c| category_names[c as usize].clone())
            .collect();
        documents.push(RawDocument {
            id: format!("d{d:05}"),
            text,
            labels: Some(labels),
        });
        gold.push(chosen);
    }

    Ok(SynthOutput {
        documents,
        seed_text,
        category_names,
        words,
        category_word_dist,
        background_dist,
        gold,
    })
}
