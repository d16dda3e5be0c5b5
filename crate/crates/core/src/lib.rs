//! Seed-guided multi-label topic model for dataless text classification.
//!
//! The model assigns multiple category labels to documents using only a few
//! seed words per category, no labeled training documents. Each document
//! carries a binary category-selector vector (spike-and-slab prior) that
//! prunes irrelevant categories; tokens are explained either by a shared
//! background topic or by one of the selected category topics. Inference is
//! collapsed Gibbs sampling over a biased generalized Pólya urn: seed-guided
//! promotion tables turn unit count increments into fractional ones, pushing
//! probability mass toward seeded categories and their co-occurring words.
//!
//! The crate is `no_std` (with `alloc`): it holds the corpus model,
//! preprocessing, promotion-table construction, the sampler, classification,
//! evaluation metrics, and a synthetic-corpus generator. File formats, the
//! CLI, and multi-chain parallelism live in the companion `smtm-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod corpus;
pub mod eval;
pub mod mat;
pub mod math;
pub mod model;
pub mod promotion;
pub mod sampler;
pub mod synth;

pub use mat::Mat;

/// Deterministic RNG used by chains; seeded per run, with independent streams.
pub type ChainRng = rand_chacha::ChaCha8Rng;
