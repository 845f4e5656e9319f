//! Highest-scoring valid tag sequence under a stack-depth cap.
//!
//! Validity depends only on how many elements are on the stack, so the search
//! space is a lattice of (actions taken) x (stack depth). Every action changes
//! depth by at most one, which makes the sweep `O(n * d)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::codec::{Action, TagSequence, TetraTag, Vocabulary};

/// Default stack-depth cap; enough for every derivation in the WSJ treebank.
pub const DEFAULT_MAX_DEPTH: usize = 8;

/// Largest sentence the exhaustive oracle accepts by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("record {id}: expected {expected} scores, found {found}")]
    Shape {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("record {id}: sentence must contain at least one word")]
    EmptySentence { id: String },
    #[error("record {id}: non-finite score {value} at row {row}, column {column}")]
    NonFinite {
        id: String,
        row: usize,
        column: usize,
        value: f64,
    },
    #[error("record {id}: tag {tag} is not in the vocabulary")]
    UnknownTag { id: String, tag: String },
    #[error("record {id}: vocabulary has no {what} tags")]
    MissingActions { id: String, what: &'static str },
}

/// Per-position tag scores for one sentence: `2n - 1` rows (word, fencepost,
/// word, ...) by `|vocabulary|` columns, row-major.
///
/// Columns whose tag does not belong at a row (a shift tag on a fencepost row
/// and vice versa) are stored but never read.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    id: String,
    n: usize,
    vocab: Arc<Vocabulary>,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(
        id: impl Into<String>,
        n: usize,
        vocab: Arc<Vocabulary>,
        scores: Vec<f64>,
    ) -> Result<Self, ScoreError> {
        let id = id.into();
        if n == 0 {
            return Err(ScoreError::EmptySentence { id });
        }
        let width = vocab.len();
        let expected = (2 * n - 1) * width;
        if scores.len() != expected {
            return Err(ScoreError::Shape {
                id,
                expected,
                found: scores.len(),
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(ScoreError::NonFinite {
                id,
                row: i / width,
                column: i % width,
                value: scores[i],
            });
        }
        let shifts = !vocab.columns_for(Action::ShiftLeft).is_empty()
            || !vocab.columns_for(Action::ShiftRight).is_empty();
        if !shifts {
            return Err(ScoreError::MissingActions { id, what: "shift" });
        }
        let combines = !vocab.columns_for(Action::CombineLeft).is_empty()
            || !vocab.columns_for(Action::CombineRight).is_empty();
        if n > 1 && !combines {
            return Err(ScoreError::MissingActions {
                id,
                what: "make-node",
            });
        }
        Ok(ScoreMatrix { id, n, vocab, scores })
    }

    /// Wraps a contiguous row-major `(2n - 1) x |vocab|` buffer.
    pub fn from_row_major(
        id: impl Into<String>,
        vocab: Arc<Vocabulary>,
        rows: usize,
        data: &[f64],
    ) -> Result<Self, ScoreError> {
        let id = id.into();
        if rows.is_multiple_of(2) {
            return Err(ScoreError::Shape {
                id,
                expected: (rows + 1) * vocab.len(),
                found: data.len(),
            });
        }
        ScoreMatrix::new(id, rows.div_ceil(2), vocab, data.to_vec())
    }

    /// Gold tags score 0, every other cell `off`.
    pub fn one_hot(
        id: impl Into<String>,
        gold: &TagSequence,
        vocab: Arc<Vocabulary>,
        off: f64,
    ) -> Result<Self, ScoreError> {
        let id = id.into();
        let width = vocab.len();
        let mut scores = vec![off; gold.len() * width];
        for (row, tag) in gold.tags().iter().enumerate() {
            let column = vocab.index_of(tag).ok_or_else(|| ScoreError::UnknownTag {
                id: id.clone(),
                tag: tag.to_string(),
            })?;
            scores[row * width + column] = 0.0;
        }
        ScoreMatrix::new(id, gold.num_words(), vocab, scores)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Number of words.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        2 * self.n - 1
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let width = self.vocab.len();
        &self.scores[row * width..(row + 1) * width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, row: usize, tag: &TetraTag) -> Option<f64> {
        self.vocab.index_of(tag).map(|c| self.row(row)[c])
    }

    /// Sum of the scores of `tags`, accumulated left to right.
    pub fn sequence_score(&self, tags: &TagSequence) -> Option<f64> {
        if tags.len() != self.num_rows() {
            return None;
        }
        let mut total = 0.0;
        for (row, tag) in tags.tags().iter().enumerate() {
            total += self.score(row, tag)?;
        }
        Some(total)
    }

    /// Best label variant for each of the two actions allowed at `row`.
    /// Ties go to the lexicographically smallest serialized label.
    fn best_variants(&self, row: usize) -> [Option<(f64, usize)>; 2] {
        let values = self.row(row);
        Action::at_position(row).map(|action| {
            let mut best: Option<(f64, usize)> = None;
            for &c in self.vocab.columns_for(action) {
                let s = values[c];
                if best.is_none_or(|(bs, _)| s > bs) {
                    best = Some((s, c));
                }
            }
            best
        })
    }
}

/// Deterministic choice between equal-scoring paths.
///
/// At each position the two candidate actions differ in the stack depth they
/// start from (`l` comes from one level shallower than `r`; `L` from one level
/// shallower than `R`). `Shallow` prefers the shallower predecessor (`l`/`L`),
/// `Deep` the deeper one (`r`/`R`). Ties are resolved from the last position
/// backwards, which is how the DP's backpointers resolve them. Label ties
/// always go to the smallest label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieBreak {
    #[default]
    Shallow,
    Deep,
}

impl TieBreak {
    /// Index (0 = `l`/`L`, 1 = `r`/`R`) preferred when scores are equal.
    fn preferred(self) -> usize {
        match self {
            TieBreak::Shallow => 0,
            TieBreak::Deep => 1,
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::Shallow => "shallow",
            TieBreak::Deep => "deep",
        })
    }
}

impl FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shallow" => Ok(TieBreak::Shallow),
            "deep" => Ok(TieBreak::Deep),
            other => Err(format!(
                "unknown tie-break rule {other:?} (expected shallow or deep)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderConfig {
    pub max_depth: usize,
    pub tie_break: TieBreak,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            tie_break: TieBreak::Shallow,
        }
    }
}

impl DecoderConfig {
    pub fn with_max_depth(max_depth: usize) -> Self {
        DecoderConfig {
            max_depth,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error("max depth must be at least 1")]
    ZeroDepth,
    #[error("record {id}: no valid tag sequence within depth {max_depth}")]
    NoPath { id: String, max_depth: usize },
    #[error("record {id}: {n} words exceeds the oracle limit of {limit}")]
    TooLong { id: String, n: usize, limit: usize },
}

/// A decoded tag sequence and its total score.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub tags: TagSequence,
    pub score: f64,
}

const NO_EDGE: u8 = u8::MAX;

/// The (step x depth) table of best path scores with backpointers.
///
/// Row `i` holds the state after `i` actions; `best(0, 0) = 0` and every
/// unreachable cell is `-inf`. A backpointer records which of the two actions
/// allowed at step `i` reached the cell.
#[derive(Clone, Debug)]
pub struct Lattice {
    width: usize,
    best: Vec<f64>,
    back: Vec<u8>,
    variants: Vec<[Option<(f64, usize)>; 2]>,
}

impl Lattice {
    pub fn build(scores: &ScoreMatrix, config: &DecoderConfig) -> Result<Self, DecoderError> {
        if config.max_depth == 0 {
            return Err(DecoderError::ZeroDepth);
        }
        let steps = scores.num_rows();
        let d = config.max_depth;
        let width = d + 1;
        let preferred = config.tie_break.preferred();
        let variants: Vec<_> = (0..steps).map(|row| scores.best_variants(row)).collect();

        let mut best = vec![f64::NEG_INFINITY; (steps + 1) * width];
        let mut back = vec![NO_EDGE; (steps + 1) * width];
        best[0] = 0.0;
        for (step, options) in variants.iter().enumerate() {
            let word = step % 2 == 0;
            let (prev, next) = best.split_at_mut((step + 1) * width);
            let prev = &prev[step * width..];
            let next = &mut next[..width];
            let back = &mut back[(step + 1) * width..(step + 2) * width];
            for depth in 1..=d {
                // option 0 (l / L) and option 1 (r / R) predecessors
                let from = if word {
                    [Some(depth - 1), Some(depth)]
                } else {
                    [Some(depth), (depth < d).then_some(depth + 1)]
                };
                let mut value = [f64::NEG_INFINITY; 2];
                for k in 0..2 {
                    if let (Some(p), Some((s, _))) = (from[k], options[k]) {
                        if prev[p] > f64::NEG_INFINITY && (word || k == 0 || p >= 2) {
                            value[k] = prev[p] + s;
                        }
                    }
                }
                let choice = if value[0] > value[1] {
                    0
                } else if value[1] > value[0] {
                    1
                } else {
                    preferred
                };
                if value[choice] > f64::NEG_INFINITY {
                    next[depth] = value[choice];
                    back[depth] = choice as u8;
                }
            }
        }
        Ok(Lattice {
            width,
            best,
            back,
            variants,
        })
    }

    pub fn max_depth(&self) -> usize {
        self.width - 1
    }

    pub fn num_steps(&self) -> usize {
        self.variants.len()
    }

    /// Best score after `step` actions with `depth` elements on the stack.
    pub fn best(&self, step: usize, depth: usize) -> f64 {
        self.best[step * self.width + depth]
    }

    /// Follows backpointers from the accepting cell (all actions taken, one
    /// stack element).
    pub fn backtrack(&self, scores: &ScoreMatrix) -> Option<Decoded> {
        let steps = self.num_steps();
        let score = self.best(steps, 1);
        if score == f64::NEG_INFINITY {
            return None;
        }
        let mut tags = Vec::with_capacity(steps);
        let mut depth = 1;
        for step in (0..steps).rev() {
            let choice = self.back[(step + 1) * self.width + depth];
            debug_assert_ne!(choice, NO_EDGE);
            let choice = choice as usize;
            let (_, column) = self.variants[step][choice].expect("reachable edge");
            tags.push(scores.vocab().get(column).clone());
            depth = match (step % 2 == 0, choice) {
                (true, 0) => depth - 1,
                (false, 1) => depth + 1,
                _ => depth,
            };
        }
        debug_assert_eq!(depth, 0);
        tags.reverse();
        let tags = TagSequence::new(tags).expect("lattice paths respect positions");
        Some(Decoded { tags, score })
    }
}

/// Highest-scoring valid tag sequence whose stack depth never exceeds
/// `config.max_depth`.
pub fn dp_decode(scores: &ScoreMatrix, config: &DecoderConfig) -> Result<Decoded, DecoderError> {
    Lattice::build(scores, config)?
        .backtrack(scores)
        .ok_or_else(|| DecoderError::NoPath {
            id: scores.id().to_string(),
            max_depth: config.max_depth,
        })
}

/// Result of the exhaustive search, with enumeration counts.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub best: Option<Decoded>,
    /// Structural candidates considered: always `2^(2n-1)`.
    pub candidates: u64,
    /// Candidates that are valid and within the depth cap.
    pub valid: u64,
}

/// Brute-force counterpart of [`dp_decode`]: scores every valid structural
/// sequence. Candidates are generated depth-first, so a prefix that breaks a
/// constraint rules out (and accounts for) every completion at once.
pub fn oracle_decode(scores: &ScoreMatrix, config: &DecoderConfig) -> Result<Decoded, DecoderError> {
    let result = oracle_search(scores, config, DEFAULT_ORACLE_LIMIT)?;
    result.best.ok_or_else(|| DecoderError::NoPath {
        id: scores.id().to_string(),
        max_depth: config.max_depth,
    })
}

pub fn oracle_search(
    scores: &ScoreMatrix,
    config: &DecoderConfig,
    limit: usize,
) -> Result<OracleResult, DecoderError> {
    if config.max_depth == 0 {
        return Err(DecoderError::ZeroDepth);
    }
    if scores.n() > limit {
        return Err(DecoderError::TooLong {
            id: scores.id().to_string(),
            n: scores.n(),
            limit,
        });
    }
    let steps = scores.num_rows();
    let options: Vec<_> = (0..steps).map(|row| scores.best_variants(row)).collect();

    struct Search<'a> {
        options: &'a [[Option<(f64, usize)>; 2]],
        max_depth: usize,
        preferred: usize,
        path: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
        valid: u64,
    }

    impl Search<'_> {
        fn visit(&mut self, step: usize, depth: usize, total: f64) {
            if step == self.options.len() {
                if depth == 1 {
                    self.valid += 1;
                    self.offer(total);
                }
                return;
            }
            for choice in 0..2 {
                let action = Action::at_position(step)[choice];
                let Some(next) = action.next_depth(depth) else {
                    continue;
                };
                if next > self.max_depth {
                    continue;
                }
                let Some((s, _)) = self.options[step][choice] else {
                    continue;
                };
                self.path.push(choice);
                self.visit(step + 1, next, total + s);
                self.path.pop();
            }
        }

        fn offer(&mut self, total: f64) {
            let better = match &self.best {
                None => true,
                Some((score, path)) => total > *score || (total == *score && self.prefer(&self.path, path)),
            };
            if better {
                self.best = Some((total, self.path.clone()));
            }
        }

        /// Compare equal-score paths from the last position backwards.
        fn prefer(&self, candidate: &[usize], incumbent: &[usize]) -> bool {
            for (c, i) in candidate.iter().zip(incumbent).rev() {
                if c != i {
                    return *c == self.preferred;
                }
            }
            false
        }
    }

    let mut search = Search {
        options: &options,
        max_depth: config.max_depth,
        preferred: config.tie_break.preferred(),
        path: Vec::with_capacity(steps),
        best: None,
        valid: 0,
    };
    search.visit(0, 0, 0.0);

    let best = search.best.map(|(score, path)| {
        let tags = path
            .iter()
            .enumerate()
            .map(|(step, &choice)| {
                let (_, column) = options[step][choice].unwrap();
                scores.vocab().get(column).clone()
            })
            .collect();
        Decoded {
            tags: TagSequence::new(tags).expect("positions respected"),
            score,
        }
    });
    Ok(OracleResult {
        best,
        candidates: 1u64 << steps,
        valid: search.valid,
    })
}

/// Independent per-position argmax, checked afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOutcome {
    pub argmax: Vec<TetraTag>,
    pub result: Result<TagSequence, crate::codec::Violation>,
}

/// Picks the best in-position tag at every row without looking at the
/// transition system. Diagnostic only.
pub fn greedy_decode(scores: &ScoreMatrix) -> GreedyOutcome {
    let argmax: Vec<TetraTag> = (0..scores.num_rows())
        .map(|row| {
            let [a, b] = scores.best_variants(row);
            let column = match (a, b) {
                (Some((sa, ca)), Some((sb, cb))) => {
                    if sb > sa {
                        cb
                    } else {
                        ca
                    }
                }
                (Some((_, c)), None) | (None, Some((_, c))) => c,
                (None, None) => unreachable!("score matrices always have in-position tags"),
            };
            scores.vocab().get(column).clone()
        })
        .collect();
    let result =
        TagSequence::new(argmax.clone()).and_then(|seq| crate::codec::check_validity(&seq).map(|()| seq));
    GreedyOutcome { argmax, result }
}
