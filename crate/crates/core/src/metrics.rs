//! Labeled bracket F1, tag accuracy and stack-depth coverage.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::codec::{self, decode, encode, TagSequence, Vocabulary};
use crate::decoder::{dp_decode, DecoderConfig, ScoreMatrix};
use crate::transform::{from_binary, to_binary, TransformError, DEFAULT_ROOT_LABEL};
use crate::tree::{strip_annotations, Tree};

/// Evalb-style preprocessing and counting switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub strip_function_tags: bool,
    pub drop_traces: bool,
    pub include_preterminals: bool,
    pub count_root: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            strip_function_tags: true,
            drop_traces: true,
            include_preterminals: false,
            count_root: true,
        }
    }
}

impl EvalConfig {
    /// Exact comparison with no preprocessing.
    pub fn raw() -> Self {
        EvalConfig {
            strip_function_tags: false,
            drop_traces: false,
            ..Default::default()
        }
    }

    pub fn preprocess(&self, tree: &Tree) -> Option<Tree> {
        strip_annotations(tree, self.strip_function_tags, self.drop_traces).ok()
    }
}

/// Multiset of labeled spans `(label, start, end)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BracketMultiset {
    counts: HashMap<(String, usize, usize), usize>,
    total: usize,
}

impl BracketMultiset {
    pub fn from_tree(tree: &Tree, config: &EvalConfig) -> Self {
        let mut set = BracketMultiset::default();
        let mut first = true;
        tree.for_each_span(|label, start, end| {
            if first {
                first = false;
                if !config.count_root {
                    return;
                }
            }
            set.insert(label, start, end);
        });
        if config.include_preterminals {
            for (i, leaf) in tree.leaves().into_iter().enumerate() {
                set.insert(&leaf.tag, i, i + 1);
            }
        }
        set
    }

    fn insert(&mut self, label: &str, start: usize, end: usize) {
        *self.counts.entry((label.to_string(), start, end)).or_default() += 1;
        self.total += 1;
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, label: &str, start: usize, end: usize) -> usize {
        self.counts
            .get(&(label.to_string(), start, end))
            .copied()
            .unwrap_or(0)
    }

    /// Size of the multiset intersection.
    pub fn matched(&self, other: &BracketMultiset) -> usize {
        self.counts
            .iter()
            .map(|(key, &c)| c.min(other.counts.get(key).copied().unwrap_or(0)))
            .sum()
    }
}

/// Precision, recall and F1 in percent. A zero denominator gives 0.
pub fn prf(matched: usize, gold: usize, pred: usize) -> (f64, f64, f64) {
    let pct = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            100.0 * num as f64 / den as f64
        }
    };
    let p = pct(matched, pred);
    let r = pct(matched, gold);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceScore {
    pub index: usize,
    pub length: usize,
    pub matched: usize,
    pub gold: usize,
    pub pred: usize,
    pub f1: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SentenceError {
    #[error("sentence {index}: gold has {gold} words, prediction has {pred}")]
    LengthMismatch { index: usize, gold: usize, pred: usize },
    #[error("sentence {index}: tree is empty after preprocessing")]
    Empty { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{gold} gold trees but {pred} predicted trees")]
    CountMismatch { gold: usize, pred: usize },
    #[error("sentence {index}: gold has {gold} tags, prediction has {pred}")]
    TagLength { index: usize, gold: usize, pred: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold_brackets: usize,
    pub pred_brackets: usize,
    pub sentences: Vec<SentenceScore>,
    /// Sentences left out of the totals.
    pub skipped: Vec<SentenceError>,
}

/// Corpus-level labeled bracket scores (evalb conventions).
pub fn bracket_f1(gold: &[Tree], pred: &[Tree], config: &EvalConfig) -> Result<F1Report, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::CountMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut sentences = Vec::with_capacity(gold.len());
    let mut skipped = Vec::new();
    let (mut matched, mut gold_total, mut pred_total) = (0, 0, 0);
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        let (Some(g), Some(p)) = (config.preprocess(g), config.preprocess(p)) else {
            skipped.push(SentenceError::Empty { index });
            continue;
        };
        if g.num_leaves() != p.num_leaves() {
            skipped.push(SentenceError::LengthMismatch {
                index,
                gold: g.num_leaves(),
                pred: p.num_leaves(),
            });
            continue;
        }
        let gb = BracketMultiset::from_tree(&g, config);
        let pb = BracketMultiset::from_tree(&p, config);
        let m = gb.matched(&pb);
        let (_, _, f1) = prf(m, gb.len(), pb.len());
        sentences.push(SentenceScore {
            index,
            length: g.num_leaves(),
            matched: m,
            gold: gb.len(),
            pred: pb.len(),
            f1,
        });
        matched += m;
        gold_total += gb.len();
        pred_total += pb.len();
    }
    let (precision, recall, f1) = prf(matched, gold_total, pred_total);
    Ok(F1Report {
        precision,
        recall,
        f1,
        matched,
        gold_brackets: gold_total,
        pred_brackets: pred_total,
        sentences,
        skipped,
    })
}

/// Per-position exact match rates: `(structural, structural + label)`.
pub fn tag_accuracy(gold: &[TagSequence], pred: &[TagSequence]) -> Result<(f64, f64), MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::CountMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let (mut total, mut structural, mut labeled) = (0usize, 0usize, 0usize);
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(MetricsError::TagLength {
                index,
                gold: g.len(),
                pred: p.len(),
            });
        }
        for (a, b) in g.tags().iter().zip(p.tags()) {
            total += 1;
            if a.action == b.action {
                structural += 1;
                if a.label == b.label {
                    labeled += 1;
                }
            }
        }
    }
    if total == 0 {
        return Ok((0.0, 0.0));
    }
    Ok((structural as f64 / total as f64, labeled as f64 / total as f64))
}

/// Score given to non-gold tags when decoding gold one-hot matrices.
pub const ONE_HOT_OFF: f64 = -10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRow {
    pub max_depth: usize,
    /// Fraction of trees whose gold derivation fits under the cap.
    pub representable: f64,
    /// Bracket F1 of decoding gold one-hot scores under the cap.
    pub f1: f64,
    /// Trees reproduced exactly under the cap.
    pub exact: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
    /// Number of trees by the maximum stack depth of their gold derivation.
    pub depth_histogram: BTreeMap<usize, usize>,
    pub trees: usize,
    /// Trees that could not be transformed (for example, empty after
    /// preprocessing).
    pub skipped: usize,
}

impl CoverageReport {
    pub fn max_depth(&self) -> Option<usize> {
        self.depth_histogram.keys().next_back().copied()
    }
}

/// For each depth cap, the share of trees the capped decoder can represent
/// and the F1 it reaches when fed the gold tags as one-hot scores.
pub fn coverage_analysis(
    corpus: &[Tree],
    caps: &[usize],
    eval: &EvalConfig,
) -> Result<CoverageReport, TransformError> {
    struct Item {
        gold: Tree,
        tags: TagSequence,
        depth: usize,
    }
    let mut items = Vec::with_capacity(corpus.len());
    let mut skipped = 0;
    for tree in corpus {
        let Some(gold) = eval.preprocess(tree) else {
            skipped += 1;
            continue;
        };
        let tags = encode(&to_binary(&gold)?);
        let depth = codec::max_depth(&tags).expect("encoder output is valid");
        items.push(Item { gold, tags, depth });
    }
    let vocab = Arc::new(Vocabulary::from_sequences(items.iter().map(|i| &i.tags)));
    let mut depth_histogram = BTreeMap::new();
    for item in &items {
        *depth_histogram.entry(item.depth).or_insert(0) += 1;
    }
    let golds: Vec<Tree> = items.iter().map(|i| i.gold.clone()).collect();
    let mut rows = Vec::with_capacity(caps.len());
    for &cap in caps {
        let config = DecoderConfig::with_max_depth(cap.max(1));
        let mut preds = Vec::with_capacity(items.len());
        let mut exact = 0;
        for (i, item) in items.iter().enumerate() {
            let scores = ScoreMatrix::one_hot(i.to_string(), &item.tags, vocab.clone(), ONE_HOT_OFF)
                .expect("gold tags are in the vocabulary");
            let decoded = dp_decode(&scores, &config).expect("left-branching path always exists");
            let words = item.gold.sentence();
            let tree = from_binary(&decode(&decoded.tags, &words).expect("valid"), DEFAULT_ROOT_LABEL);
            if tree == item.gold {
                exact += 1;
            }
            preds.push(tree);
        }
        let representable = if items.is_empty() {
            0.0
        } else {
            items.iter().filter(|i| i.depth <= cap).count() as f64 / items.len() as f64
        };
        let f1 = bracket_f1(&golds, &preds, eval).expect("same number of trees").f1;
        rows.push(CoverageRow {
            max_depth: cap,
            representable,
            f1,
            exact,
        });
    }
    Ok(CoverageReport {
        rows,
        depth_histogram,
        trees: items.len(),
        skipped,
    })
}

/// Least-squares line `y = slope * x + intercept` and its R².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::read_trees;

    fn trees(text: &str) -> Vec<Tree> {
        read_trees(text).unwrap()
    }

    #[test]
    fn identical_trees_score_100() {
        let t = trees("(S (NP (DT a) (NN b)) (VP (VB c)))\n(S (NP-SBJ (-NONE- *)) (VP (VB go)))");
        let report = bracket_f1(&t, &t, &EvalConfig::default()).unwrap();
        assert_eq!(report.f1, 100.0);
        assert_eq!(report.precision, 100.0);
        assert!(report.skipped.is_empty());
    }

    #[test]
    fn hand_counted_example() {
        let gold = trees("(S (NP (A a) (B b)) (VP (C c)))");
        let pred = trees("(S (NP (A a) (B b)) (C c))");
        let report = bracket_f1(&gold, &pred, &EvalConfig::default()).unwrap();
        assert_eq!(report.gold_brackets, 3);
        assert_eq!(report.pred_brackets, 2);
        assert_eq!(report.matched, 2);
        assert_eq!(report.precision, 100.0);
        assert!((report.recall - 66.666_666_666_666_67).abs() < 1e-9);
        assert!((report.f1 - 80.0).abs() < 1e-9);
    }

    #[test]
    fn empty_prediction_set() {
        let report = bracket_f1(&[], &[], &EvalConfig::default()).unwrap();
        assert_eq!(report.f1, 0.0);
        let gold = trees("(S (A a) (B b))");
        let pred = trees("(S (A a) (B b))");
        let no_root = EvalConfig {
            count_root: false,
            ..Default::default()
        };
        let report = bracket_f1(&gold, &pred, &no_root).unwrap();
        assert_eq!(report.f1, 0.0);
        assert_eq!(report.pred_brackets, 0);
    }

    #[test]
    fn unary_chains_count_twice() {
        let gold = trees("(S (VP (A a) (B b)))");
        let pred = trees("(S (A a) (B b))");
        let report = bracket_f1(&gold, &pred, &EvalConfig::default()).unwrap();
        assert_eq!(
            (report.gold_brackets, report.pred_brackets, report.matched),
            (2, 1, 1)
        );
        let gold = trees("(NP (NP (A a) (B b)))");
        let pred = trees("(NP (A a) (B b))");
        let b = BracketMultiset::from_tree(&gold[0], &EvalConfig::default());
        assert_eq!(b.count("NP", 0, 2), 2);
        let report = bracket_f1(&gold, &pred, &EvalConfig::default()).unwrap();
        assert_eq!(report.matched, 1);
    }

    #[test]
    fn length_mismatch_is_skipped() {
        let gold = trees("(S (A a) (B b))\n(S (A a) (B b))");
        let pred = trees("(S (A a) (B b))\n(S (A a) (B b) (C c))");
        let report = bracket_f1(&gold, &pred, &EvalConfig::default()).unwrap();
        assert_eq!(
            report.skipped,
            [SentenceError::LengthMismatch {
                index: 1,
                gold: 2,
                pred: 3
            }]
        );
        assert_eq!(report.sentences.len(), 1);
        assert!(bracket_f1(&gold, &pred[..1], &EvalConfig::default()).is_err());
    }

    #[test]
    fn function_tags_and_traces() {
        let gold = trees("(S (NP-SBJ (-NONE- *)) (VP (VB go) (NP (NN home))))");
        let pred = trees("(S (VP (VB go) (NP (NN home))))");
        assert_eq!(
            bracket_f1(&gold, &pred, &EvalConfig::default()).unwrap().f1,
            100.0
        );
        let raw = bracket_f1(&gold, &pred, &EvalConfig::raw()).unwrap();
        assert_eq!(raw.skipped.len(), 1);
    }

    #[test]
    fn precision_is_recall_swapped() {
        let a = trees("(S (NP (A a) (B b)) (VP (C c) (D d)))");
        let b = trees("(S (A a) (X (B b) (C c)) (D d))");
        let ab = bracket_f1(&a, &b, &EvalConfig::default()).unwrap();
        let ba = bracket_f1(&b, &a, &EvalConfig::default()).unwrap();
        assert_eq!(ab.precision, ba.recall);
        assert_eq!(ab.recall, ba.precision);
    }

    #[test]
    fn tag_accuracy_counts() {
        let g: TagSequence = "l/NP L/S l R r L r".parse().unwrap();
        let p: TagSequence = "l L/S l R r L r".parse().unwrap();
        assert_eq!(
            tag_accuracy(std::slice::from_ref(&g), std::slice::from_ref(&g)).unwrap(),
            (1.0, 1.0)
        );
        let (s, l) = tag_accuracy(std::slice::from_ref(&g), &[p]).unwrap();
        assert_eq!(s, 1.0);
        assert!(l < 1.0);
        let g: TagSequence = "l L l R l R r L r".parse().unwrap();
        let p: TagSequence = "l L l R l R r R r".parse().unwrap();
        assert_eq!(tag_accuracy(std::slice::from_ref(&g), &[p]).unwrap().0, 8.0 / 9.0);
        let short: TagSequence = "l".parse().unwrap();
        assert_eq!(
            tag_accuracy(&[g], &[short]),
            Err(MetricsError::TagLength {
                index: 0,
                gold: 9,
                pred: 1
            })
        );
    }

    #[test]
    fn coverage_on_small_corpus() {
        let corpus = trees("(S (A a) (S (B b) (S (C c) (D d))))\n(S (S (A a) (B b)) (C c))\n(X (A a))");
        let report = coverage_analysis(&corpus, &[1, 2, 3], &EvalConfig::default()).unwrap();
        assert_eq!(report.max_depth(), Some(2));
        assert_eq!(report.depth_histogram, BTreeMap::from([(1, 2), (2, 1)]));
        let rep: Vec<f64> = report.rows.iter().map(|r| r.representable).collect();
        assert!(rep[0] < 1.0);
        assert_eq!(&rep[1..], [1.0, 1.0]);
        assert_eq!(report.rows[1].f1, 100.0);
        assert_eq!(report.rows[1].exact, 3);
        assert_eq!(report.rows[0].exact, 2);
        assert!(report.rows[0].f1 < 100.0);
    }

    #[test]
    fn linear_fit_exact_line() {
        let fit = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
