//! Constituency parsing as tagging with four structural tags.
//!
//! A treebank tree goes through [`transform::to_binary`] (unary chains
//! collapsed, n-ary nodes binarized to the right), then [`codec::encode`]
//! turns the binary tree into `2n - 1` tetra-tags. A tagging model scores
//! every tag at every position ([`decoder::ScoreMatrix`]);
//! [`decoder::dp_decode`] finds the best valid sequence under a stack-depth
//! cap, [`codec::decode`] rebuilds the binary tree and
//! [`transform::from_binary`] restores the original tree shape.
//!
//! ```
//! use std::sync::Arc;
//! use tetratag::{codec, decoder, transform, tree};
//!
//! let gold = tree::read_trees("(S (NP (DT the) (NN cat)) (VP (VBD sat)))").unwrap().remove(0);
//! let tags = codec::encode(&transform::to_binary(&gold).unwrap());
//! assert_eq!(tags.to_string(), "l L/NP r L/S r/VP");
//!
//! let vocab = Arc::new(codec::Vocabulary::from_sequences([&tags]));
//! let scores = decoder::ScoreMatrix::one_hot("0", &tags, vocab, -10.0).unwrap();
//! let (parsed, _) =
//!     tetratag::parse_scores(&scores, &gold.sentence(), &Default::default(), "TOP").unwrap();
//! assert_eq!(parsed, gold);
//! ```

pub mod codec;
pub mod decoder;
pub mod metrics;
pub mod scores_io;
pub mod synthetic;
pub mod transform;
pub mod tree;

pub use codec::{Action, TagSequence, TetraTag, Vocabulary};
pub use decoder::{dp_decode, DecoderConfig, ScoreMatrix, TieBreak};
pub use transform::{BinaryTree, Label};
pub use tree::{Leaf, Tree};

use thiserror::Error;

/// Any error produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Read(#[from] tree::ReadError),
    #[error(transparent)]
    Transform(#[from] transform::TransformError),
    #[error(transparent)]
    Tags(#[from] codec::TagLineError),
    #[error(transparent)]
    Decode(#[from] codec::DecodeError),
    #[error(transparent)]
    Vocabulary(#[from] codec::VocabularyError),
    #[error(transparent)]
    Score(#[from] decoder::ScoreError),
    #[error(transparent)]
    Decoder(#[from] decoder::DecoderError),
    #[error(transparent)]
    ScoreIo(#[from] scores_io::ScoreIoError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    EmptyTree(#[from] tree::EmptyTreeError),
}

/// Parses and decodes one sentence end to end: best tag sequence under
/// `config`, then back to a treebank tree.
pub fn parse_scores(
    scores: &ScoreMatrix,
    words: &[Leaf],
    config: &DecoderConfig,
    root_fallback: &str,
) -> Result<(Tree, decoder::Decoded), Error> {
    let decoded = dp_decode(scores, config)?;
    let binary = codec::decode(&decoded.tags, words)?;
    Ok((transform::from_binary(&binary, root_fallback), decoded))
}
