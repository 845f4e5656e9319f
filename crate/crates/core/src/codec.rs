//! Tetra-tags and the tree/tag bijection.
//!
//! A binary tree over `n` words is written as `2n - 1` tags. Word positions
//! carry a shift action (`l` or `r`: the word is a left or right child) and
//! fenceposts between words carry a make-node action (`L` or `R`: the node
//! mapped to that fencepost is a left or right child). The root counts as a
//! left child. Reading the tags back as actions of a left-corner transition
//! system rebuilds the tree.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::transform::{BinaryTree, Label, TransformError};
use crate::tree::Leaf;

/// The four structural actions. Ordering is `l < r < L < R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    /// `l`: shift the next word as a new stack element.
    ShiftLeft,
    /// `r`: shift the next word into the empty slot of the top element.
    ShiftRight,
    /// `L`: wrap the top element in a new node with an empty right slot.
    CombineLeft,
    /// `R`: like `L`, then combine the result into the element below.
    CombineRight,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::ShiftLeft,
        Action::ShiftRight,
        Action::CombineLeft,
        Action::CombineRight,
    ];

    pub fn symbol(self) -> char {
        match self {
            Action::ShiftLeft => 'l',
            Action::ShiftRight => 'r',
            Action::CombineLeft => 'L',
            Action::CombineRight => 'R',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'l' => Some(Action::ShiftLeft),
            'r' => Some(Action::ShiftRight),
            'L' => Some(Action::CombineLeft),
            'R' => Some(Action::CombineRight),
            _ => None,
        }
    }

    pub fn is_shift(self) -> bool {
        matches!(self, Action::ShiftLeft | Action::ShiftRight)
    }

    /// Whether the node created by this action is a left child.
    pub fn is_left(self) -> bool {
        matches!(self, Action::ShiftLeft | Action::CombineLeft)
    }

    /// The two actions allowed at sequence position `pos`.
    pub fn at_position(pos: usize) -> [Action; 2] {
        if pos.is_multiple_of(2) {
            [Action::ShiftLeft, Action::ShiftRight]
        } else {
            [Action::CombineLeft, Action::CombineRight]
        }
    }

    /// Stack depth after applying this action at `depth`, or `None` if the
    /// action is not allowed there.
    pub fn next_depth(self, depth: usize) -> Option<usize> {
        match self {
            Action::ShiftLeft => Some(depth + 1),
            Action::ShiftRight | Action::CombineLeft => (depth >= 1).then_some(depth),
            Action::CombineRight => (depth >= 2).then(|| depth - 1),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A structural action with an optional node label.
///
/// Serialized as the action symbol, optionally followed by `/` and the label:
/// `l`, `l/NP`, `L/S::VP`, `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TetraTag {
    pub action: Action,
    pub label: Label,
}

impl TetraTag {
    pub fn new(action: Action, label: Label) -> Self {
        TetraTag { action, label }
    }

    pub fn bare(action: Action) -> Self {
        TetraTag {
            action,
            label: Label::dummy(),
        }
    }
}

impl fmt::Display for TetraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.label.is_dummy() {
            write!(f, "{}", self.action)
        } else {
            write!(f, "{}/{}", self.action, self.label)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagParseError {
    #[error("unknown tag {0:?}")]
    Unknown(String),
    #[error("tag {tag:?}: {source}")]
    BadLabel {
        tag: String,
        #[source]
        source: TransformError,
    },
}

impl FromStr for TetraTag {
    type Err = TagParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let action = chars
            .next()
            .and_then(Action::from_symbol)
            .ok_or_else(|| TagParseError::Unknown(s.to_string()))?;
        let rest = chars.as_str();
        let label = match rest.strip_prefix('/') {
            None if rest.is_empty() => Label::dummy(),
            None => return Err(TagParseError::Unknown(s.to_string())),
            Some("") => return Err(TagParseError::Unknown(s.to_string())),
            Some(label) => Label::parse(label).map_err(|source| TagParseError::BadLabel {
                tag: s.to_string(),
                source,
            })?,
        };
        Ok(TetraTag { action, label })
    }
}

/// Why a tag sequence cannot be executed by the transition system.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    #[error("empty tag sequence")]
    Empty,
    #[error("sequence length must be odd")]
    EvenLength,
    #[error("shift action at a fencepost position")]
    ShiftAtFencepost,
    #[error("make-node action at a word position")]
    CombineAtWord,
    #[error("first action must shift onto empty stack")]
    FirstNotShiftLeft,
    #[error("make-node needs a non-empty stack")]
    CombineOnEmptyStack,
    #[error("right make-node needs at least two stack elements")]
    CombineRightNeedsTwo,
    #[error("stack depth limit exceeded")]
    DepthLimit,
    #[error("stack must hold exactly one element at the end")]
    FinalDepth,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("invalid tag at position {position}: {kind}")]
pub struct Violation {
    pub position: usize,
    pub kind: ViolationKind,
}

impl Violation {
    fn at(position: usize, kind: ViolationKind) -> Self {
        Violation { position, kind }
    }
}

fn check_position(pos: usize, action: Action) -> Result<(), Violation> {
    match (pos.is_multiple_of(2), action.is_shift()) {
        (true, false) => Err(Violation::at(pos, ViolationKind::CombineAtWord)),
        (false, true) => Err(Violation::at(pos, ViolationKind::ShiftAtFencepost)),
        _ => Ok(()),
    }
}

/// A sequence of `2n - 1` tags alternating word and fencepost positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TagSequence(Vec<TetraTag>);

impl TagSequence {
    /// Checks the length and position discipline (not transition validity).
    pub fn new(tags: Vec<TetraTag>) -> Result<Self, Violation> {
        if tags.is_empty() {
            return Err(Violation::at(0, ViolationKind::Empty));
        }
        if tags.len().is_multiple_of(2) {
            return Err(Violation::at(tags.len() - 1, ViolationKind::EvenLength));
        }
        for (pos, tag) in tags.iter().enumerate() {
            check_position(pos, tag.action)?;
        }
        Ok(TagSequence(tags))
    }

    pub fn from_actions(actions: &[Action]) -> Result<Self, Violation> {
        TagSequence::new(actions.iter().copied().map(TetraTag::bare).collect())
    }

    pub fn tags(&self) -> &[TetraTag] {
        &self.0
    }

    pub fn actions(&self) -> Vec<Action> {
        self.0.iter().map(|t| t.action).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of words, `(len + 1) / 2`.
    pub fn num_words(&self) -> usize {
        self.0.len().div_ceil(2)
    }

    pub fn into_tags(self) -> Vec<TetraTag> {
        self.0
    }

    pub fn structural_string(&self) -> String {
        let symbols: Vec<String> = self.0.iter().map(|t| t.action.to_string()).collect();
        symbols.join(" ")
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tag) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{tag}")?;
        }
        Ok(())
    }
}

impl FromStr for TagSequence {
    type Err = TagLineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tags = s
            .split_whitespace()
            .map(TetraTag::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TagSequence::new(tags)?)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagLineError {
    #[error(transparent)]
    Parse(#[from] TagParseError),
    #[error(transparent)]
    Violation(#[from] Violation),
}

/// Simulates stack depth over `actions`, returning the depth after each
/// action. Only element counts matter for validity.
pub fn depth_profile_of(actions: &[Action]) -> Result<Vec<usize>, Violation> {
    if actions.is_empty() {
        return Err(Violation::at(0, ViolationKind::Empty));
    }
    let mut depth = 0usize;
    let mut profile = Vec::with_capacity(actions.len());
    for (pos, &action) in actions.iter().enumerate() {
        check_position(pos, action)?;
        depth = action.next_depth(depth).ok_or_else(|| {
            let kind = match action {
                Action::ShiftRight => ViolationKind::FirstNotShiftLeft,
                Action::CombineLeft => ViolationKind::CombineOnEmptyStack,
                _ => ViolationKind::CombineRightNeedsTwo,
            };
            Violation::at(pos, kind)
        })?;
        profile.push(depth);
    }
    if depth != 1 {
        return Err(Violation::at(actions.len() - 1, ViolationKind::FinalDepth));
    }
    Ok(profile)
}

pub fn check_validity(tags: &TagSequence) -> Result<(), Violation> {
    depth_profile_of(&tags.actions()).map(|_| ())
}

pub fn depth_profile(tags: &TagSequence) -> Result<Vec<usize>, Violation> {
    depth_profile_of(&tags.actions())
}

/// Largest stack depth reached by a valid sequence.
pub fn max_depth(tags: &TagSequence) -> Result<usize, Violation> {
    Ok(depth_profile(tags)?.into_iter().max().unwrap_or(0))
}

/// Encodes a binary tree by in-order traversal: leaves and internal nodes
/// interleave exactly like word and fencepost positions.
pub fn encode(tree: &BinaryTree) -> TagSequence {
    fn visit(node: &BinaryTree, is_left: bool, out: &mut Vec<TetraTag>) {
        match node {
            BinaryTree::Leaf { chain, .. } => {
                let action = if is_left {
                    Action::ShiftLeft
                } else {
                    Action::ShiftRight
                };
                out.push(TetraTag::new(action, chain.clone()));
            }
            BinaryTree::Node { label, left, right } => {
                visit(left, true, out);
                let action = if is_left {
                    Action::CombineLeft
                } else {
                    Action::CombineRight
                };
                out.push(TetraTag::new(action, label.clone()));
                visit(right, false, out);
            }
        }
    }
    let mut tags = Vec::with_capacity(2 * tree.num_leaves() - 1);
    visit(tree, true, &mut tags);
    TagSequence(tags)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("{tags} tags need {expected} words, got {found}")]
    LengthMismatch {
        tags: usize,
        expected: usize,
        found: usize,
    },
}

/// One element of the transition-system stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StackElement {
    Complete(BinaryTree),
    /// A tree whose rightmost leaf is the empty slot. Stored as its right
    /// spine from the top: each entry is a node label and its left child; the
    /// last entry's right child is the slot.
    Open(Vec<(Label, BinaryTree)>),
}

impl StackElement {
    fn make_node(self, label: Label) -> StackElement {
        match self {
            StackElement::Complete(tree) => StackElement::Open(vec![(label, tree)]),
            StackElement::Open(_) => unreachable!("make-node on an element with an empty slot"),
        }
    }

    /// Fills the empty slot of `self` with `child`.
    fn combine(self, child: StackElement) -> StackElement {
        let StackElement::Open(mut spine) = self else {
            unreachable!("combine into a complete tree")
        };
        match child {
            StackElement::Complete(mut tree) => {
                while let Some((label, left)) = spine.pop() {
                    tree = BinaryTree::node(label, left, tree);
                }
                StackElement::Complete(tree)
            }
            StackElement::Open(rest) => {
                spine.extend(rest);
                StackElement::Open(spine)
            }
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, StackElement::Complete(_))
    }
}

impl fmt::Display for StackElement {
    /// Same bracketing as [`BinaryTree`]'s `Display`, with `∅` for the slot.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackElement::Complete(tree) => write!(f, "{tree}"),
            StackElement::Open(spine) => {
                for (label, left) in spine {
                    let label = if label.is_dummy() { "*" } else { label.as_str() };
                    write!(f, "({label} {left} ")?;
                }
                f.write_str("∅")?;
                for _ in spine {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// The left-corner transition system: a stack of partial trees and a buffer
/// of words.
#[derive(Clone, Debug)]
pub struct TransitionState {
    stack: Vec<StackElement>,
    buffer: std::vec::IntoIter<Leaf>,
    steps: usize,
}

impl TransitionState {
    pub fn new(words: Vec<Leaf>) -> Self {
        TransitionState {
            stack: Vec::new(),
            buffer: words.into_iter(),
            steps: 0,
        }
    }

    pub fn stack(&self) -> &[StackElement] {
        &self.stack
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    /// Applies one tag.
    pub fn apply(&mut self, tag: &TetraTag) -> Result<(), Violation> {
        let pos = self.steps;
        check_position(pos, tag.action)?;
        if tag.action.next_depth(self.stack.len()).is_none() {
            return Err(Violation::at(
                pos,
                match tag.action {
                    Action::ShiftRight => ViolationKind::FirstNotShiftLeft,
                    Action::CombineLeft => ViolationKind::CombineOnEmptyStack,
                    _ => ViolationKind::CombineRightNeedsTwo,
                },
            ));
        }
        let label = tag.label.clone();
        match tag.action {
            Action::ShiftLeft => {
                let leaf = self.next_word(pos)?;
                self.stack
                    .push(StackElement::Complete(BinaryTree::leaf(leaf, label)));
            }
            Action::ShiftRight => {
                let leaf = self.next_word(pos)?;
                let top = self.stack.pop().unwrap();
                self.stack
                    .push(top.combine(StackElement::Complete(BinaryTree::leaf(leaf, label))));
            }
            Action::CombineLeft => {
                let top = self.stack.pop().unwrap();
                self.stack.push(top.make_node(label));
            }
            Action::CombineRight => {
                let tree = self.stack.pop().unwrap().make_node(label);
                let parent = self.stack.pop().unwrap();
                self.stack.push(parent.combine(tree));
            }
        }
        self.steps += 1;
        Ok(())
    }

    fn next_word(&mut self, pos: usize) -> Result<Leaf, Violation> {
        self.buffer
            .next()
            .ok_or(Violation::at(pos, ViolationKind::FinalDepth))
    }

    /// The finished tree, if the stack holds one complete element and the
    /// buffer is empty.
    pub fn finish(mut self) -> Result<BinaryTree, Violation> {
        let last = self.steps.saturating_sub(1);
        if self.stack.len() != 1 || self.buffer.next().is_some() {
            return Err(Violation::at(last, ViolationKind::FinalDepth));
        }
        match self.stack.pop().unwrap() {
            StackElement::Complete(tree) => Ok(tree),
            StackElement::Open(_) => Err(Violation::at(last, ViolationKind::FinalDepth)),
        }
    }
}

/// Rebuilds the tree for a valid tag sequence over `words`.
pub fn decode(tags: &TagSequence, words: &[Leaf]) -> Result<BinaryTree, DecodeError> {
    check_validity(tags)?;
    if tags.num_words() != words.len() {
        return Err(DecodeError::LengthMismatch {
            tags: tags.len(),
            expected: tags.num_words(),
            found: words.len(),
        });
    }
    let mut state = TransitionState::new(words.to_vec());
    for tag in tags.tags() {
        state.apply(tag)?;
    }
    Ok(state.finish()?)
}

/// Runs the transition system and records the rendered stack after each step.
pub fn trace(tags: &TagSequence, words: &[Leaf]) -> Result<Vec<Vec<String>>, DecodeError> {
    check_validity(tags)?;
    if tags.num_words() != words.len() {
        return Err(DecodeError::LengthMismatch {
            tags: tags.len(),
            expected: tags.num_words(),
            found: words.len(),
        });
    }
    let mut state = TransitionState::new(words.to_vec());
    let mut steps = Vec::with_capacity(tags.len());
    for tag in tags.tags() {
        state.apply(tag)?;
        steps.push(state.stack().iter().map(ToString::to_string).collect());
    }
    Ok(steps)
}

/// Every valid structural sequence for `n` words, found by trying all
/// `2^(2n-1)` position-respecting action strings.
pub fn enumerate_valid(n: usize) -> Vec<Vec<Action>> {
    assert!(
        (1..=16).contains(&n),
        "enumeration only supported for 1 <= n <= 16"
    );
    let len = 2 * n - 1;
    let mut out = Vec::new();
    let mut actions = Vec::with_capacity(len);
    for mask in 0u64..(1u64 << len) {
        actions.clear();
        actions.extend((0..len).map(|pos| Action::at_position(pos)[((mask >> pos) & 1) as usize]));
        if depth_profile_of(&actions).is_ok() {
            out.push(actions.clone());
        }
    }
    out
}

/// An ordered tag vocabulary indexing score-matrix columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tags: Vec<TetraTag>,
    index: HashMap<TetraTag, usize>,
    by_action: [Vec<usize>; 4],
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabularyError {
    #[error("duplicate tag {0} in vocabulary")]
    Duplicate(String),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: TagParseError,
    },
}

impl Vocabulary {
    /// Keeps the given order; duplicates are rejected.
    pub fn new(tags: Vec<TetraTag>) -> Result<Self, VocabularyError> {
        let mut index = HashMap::with_capacity(tags.len());
        let mut by_action: [Vec<usize>; 4] = Default::default();
        for (i, tag) in tags.iter().enumerate() {
            if index.insert(tag.clone(), i).is_some() {
                return Err(VocabularyError::Duplicate(tag.to_string()));
            }
            by_action[tag.action as usize].push(i);
        }
        // label order within each action, so a strict scan keeps the smallest label on ties
        for columns in &mut by_action {
            columns.sort_by(|&a, &b| tags[a].label.cmp(&tags[b].label));
        }
        Ok(Vocabulary {
            tags,
            index,
            by_action,
        })
    }

    /// Sorted, deduplicated vocabulary of every tag in `sequences`.
    pub fn from_sequences<'a>(sequences: impl IntoIterator<Item = &'a TagSequence>) -> Self {
        let mut tags: Vec<TetraTag> = sequences
            .into_iter()
            .flat_map(|s| s.tags().iter().cloned())
            .collect();
        tags.sort();
        tags.dedup();
        Vocabulary::new(tags).expect("deduplicated")
    }

    /// The four unlabeled tags.
    pub fn structural() -> Self {
        Vocabulary::new(Action::ALL.iter().copied().map(TetraTag::bare).collect()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[TetraTag] {
        &self.tags
    }

    pub fn get(&self, column: usize) -> &TetraTag {
        &self.tags[column]
    }

    pub fn index_of(&self, tag: &TetraTag) -> Option<usize> {
        self.index.get(tag).copied()
    }

    /// Columns whose tag has the given structural action, in label order.
    pub fn columns_for(&self, action: Action) -> &[usize] {
        &self.by_action[action as usize]
    }

    /// One tag per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for tag in &self.tags {
            out.push_str(&tag.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, VocabularyError> {
        let tags = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim()
                    .parse()
                    .map_err(|source| VocabularyError::Parse { line: i + 1, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Vocabulary::new(tags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::Shape;
    use Action::*;

    fn words(n: usize) -> Vec<Leaf> {
        (0..n)
            .map(|i| Leaf::new(((b'A' + i as u8) as char).to_string(), "X"))
            .collect()
    }

    fn tree(shape: &Shape) -> BinaryTree {
        BinaryTree::unlabeled(shape, &mut words(64).into_iter())
    }

    fn seq(s: &str) -> TagSequence {
        s.parse().unwrap()
    }

    /// ((A (B (C D))) E)
    fn five_word_example() -> BinaryTree {
        let leaf = |w: &str| BinaryTree::leaf(Leaf::new(w, "X"), Label::dummy());
        let n3 = BinaryTree::node(Label::dummy(), leaf("C"), leaf("D"));
        let n2 = BinaryTree::node(Label::dummy(), leaf("B"), n3);
        let n1 = BinaryTree::node(Label::dummy(), leaf("A"), n2);
        BinaryTree::node(Label::dummy(), n1, leaf("E"))
    }

    #[test]
    fn tag_text_round_trip() {
        for s in ["l", "r/NP", "L/S::VP", "R", "l/-LRB-", "L/PRT/ADVP"] {
            assert_eq!(s.parse::<TetraTag>().unwrap().to_string(), s);
        }
        assert!("x".parse::<TetraTag>().is_err());
        assert!("L/".parse::<TetraTag>().is_err());
        assert!("Lx".parse::<TetraTag>().is_err());
        assert!("L/A::::B".parse::<TetraTag>().is_err());
    }

    #[test]
    fn encodes_five_word_example() {
        let tags = encode(&five_word_example());
        assert_eq!(tags.structural_string(), "l L l R l R r L r");
    }

    #[test]
    fn encodes_small_trees() {
        assert_eq!(encode(&tree(&Shape::Leaf)).to_string(), "l");
        assert_eq!(encode(&tree(&Shape::right_branching(2))).to_string(), "l L r");
        assert_eq!(encode(&tree(&Shape::right_branching(3))).to_string(), "l L l R r");
        assert_eq!(encode(&tree(&Shape::left_branching(3))).to_string(), "l L r L r");
    }

    #[test]
    fn decodes_five_word_example() {
        let decoded = decode(&seq("l L l R l R r L r"), &words(5)).unwrap();
        assert_eq!(decoded, five_word_example());
        assert_eq!(decoded.to_string(), "(* (* A (* B (* C D))) E)");
    }

    #[test]
    fn decodes_single_word() {
        let decoded = decode(&seq("l"), &words(1)).unwrap();
        assert_eq!(decoded, BinaryTree::leaf(Leaf::new("A", "X"), Label::dummy()));
    }

    #[test]
    fn decodes_both_three_word_trees() {
        assert_eq!(
            decode(&seq("l L l R r"), &words(3)).unwrap().to_string(),
            "(* A (* B C))"
        );
        assert_eq!(
            decode(&seq("l L r L r"), &words(3)).unwrap().to_string(),
            "(* (* A B) C)"
        );
    }

    #[test]
    fn five_word_example_trace() {
        let steps = trace(&seq("l L l R l R r L r"), &words(5)).unwrap();
        let expected: [&[&str]; 9] = [
            &["A"],
            &["(* A ∅)"],
            &["(* A ∅)", "B"],
            &["(* A (* B ∅))"],
            &["(* A (* B ∅))", "C"],
            &["(* A (* B (* C ∅)))"],
            &["(* A (* B (* C D)))"],
            &["(* (* A (* B (* C D))) ∅)"],
            &["(* (* A (* B (* C D))) E)"],
        ];
        for (got, want) in steps.iter().zip(expected) {
            assert_eq!(got, want);
        }
        let depths: Vec<usize> = steps.iter().map(Vec::len).collect();
        assert_eq!(depths, [1, 1, 2, 1, 2, 1, 1, 1, 1]);
    }

    #[test]
    fn labels_ride_on_actions() {
        let tags = seq("l/NP L/S r/VP::VB");
        let decoded = decode(&tags, &words(2)).unwrap();
        assert_eq!(decoded.to_string(), "(S A^NP B^VP::VB)");
        assert_eq!(encode(&decoded), tags);
    }

    #[test]
    fn validity_examples() {
        assert_eq!(depth_profile(&seq("l L r")).unwrap(), [1, 1, 1]);
        assert_eq!(
            check_validity(&seq("r L r")),
            Err(Violation::at(0, ViolationKind::FirstNotShiftLeft))
        );
        assert_eq!(
            check_validity(&seq("l R r")),
            Err(Violation::at(1, ViolationKind::CombineRightNeedsTwo))
        );
        // two trees left on the stack
        assert_eq!(
            check_validity(&seq("l L l L r")),
            Err(Violation::at(4, ViolationKind::FinalDepth))
        );
        assert_eq!(
            TagSequence::from_actions(&[ShiftLeft, ShiftLeft, ShiftRight]),
            Err(Violation::at(1, ViolationKind::ShiftAtFencepost))
        );
        assert_eq!(
            TagSequence::from_actions(&[ShiftLeft, CombineLeft]),
            Err(Violation::at(1, ViolationKind::EvenLength))
        );
        assert_eq!(
            TagSequence::from_actions(&[]),
            Err(Violation::at(0, ViolationKind::Empty))
        );
    }

    #[test]
    fn decode_reports_violation_and_length() {
        assert_eq!(
            decode(&seq("l R r"), &words(2)),
            Err(DecodeError::Invalid(Violation::at(
                1,
                ViolationKind::CombineRightNeedsTwo
            )))
        );
        assert!(matches!(
            decode(&seq("l L r"), &words(3)),
            Err(DecodeError::LengthMismatch {
                expected: 2,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn depth_profiles() {
        assert_eq!(
            depth_profile(&seq("l L l R l R r L r")).unwrap(),
            [1, 1, 2, 1, 2, 1, 1, 1, 1]
        );
        for n in 2..=30 {
            assert_eq!(max_depth(&encode(&tree(&Shape::left_branching(n)))).unwrap(), 1);
        }
        // with two words both shapes are the same tree
        assert_eq!(Shape::right_branching(2), Shape::left_branching(2));
        for n in 3..=30 {
            assert_eq!(max_depth(&encode(&tree(&Shape::right_branching(n)))).unwrap(), 2);
        }
    }

    #[test]
    fn catalan_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| enumerate_valid(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn transition_state_invariant() {
        // after a shift the top is complete and every other element is open
        let mut state = TransitionState::new(words(5));
        for tag in seq("l L l R l R r L r").tags() {
            state.apply(tag).unwrap();
            let stack = state.stack();
            if tag.action.is_shift() {
                assert!(stack.last().unwrap().is_complete());
                assert!(stack[..stack.len() - 1].iter().all(|e| !e.is_complete()));
            } else {
                assert!(stack.iter().all(|e| !e.is_complete()));
            }
        }
        assert_eq!(state.finish().unwrap(), five_word_example());
    }

    #[test]
    fn vocabulary_indexes_columns() {
        let vocab = Vocabulary::from_sequences([&seq("l/NP L/S r"), &seq("l L/S r/VP")]);
        let text: Vec<String> = vocab.tags().iter().map(ToString::to_string).collect();
        assert_eq!(text, ["l", "l/NP", "r", "r/VP", "L/S"]);
        assert_eq!(vocab.columns_for(ShiftLeft), [0, 1]);
        assert_eq!(vocab.columns_for(CombineRight), [] as [usize; 0]);
        assert_eq!(Vocabulary::from_text(&vocab.to_text()).unwrap(), vocab);
        assert!(matches!(
            Vocabulary::from_text("l\nl\n"),
            Err(VocabularyError::Duplicate(_))
        ));
        assert!(matches!(
            Vocabulary::from_text("l\nq\n"),
            Err(VocabularyError::Parse { line: 2, .. })
        ));
    }
}
