//! Invertible conversion between treebank trees and labeled full binary trees.
//!
//! Unary chains are collapsed into composite labels joined with `::`
//! (`S -> VP` becomes `S::VP`), chains sitting directly on a word are stored on
//! the leaf, and n-ary nodes are binarized to the right with unlabeled
//! ("dummy") intermediate nodes. The inverse splices every dummy node into its
//! parent, so it accepts any binary tree a decoder can produce.

use std::fmt;

use thiserror::Error;

use crate::tree::{Leaf, Tree};

/// Separator between the parts of a collapsed unary chain.
pub const CHAIN_SEPARATOR: &str = "::";

/// Root label used when a decoded tree has a dummy root.
pub const DEFAULT_ROOT_LABEL: &str = "TOP";

/// A possibly collapsed node label. The empty label is the dummy label on
/// internal nodes and "no chain" on leaves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn dummy() -> Self {
        Label(String::new())
    }

    /// Builds a label from chain parts, top first.
    pub fn from_parts<S: AsRef<str>>(parts: &[S]) -> Result<Self, TransformError> {
        let mut out = String::new();
        for (i, part) in parts.iter().enumerate() {
            let part = part.as_ref();
            validate_part(part)?;
            if i > 0 {
                out.push_str(CHAIN_SEPARATOR);
            }
            out.push_str(part);
        }
        Ok(Label(out))
    }

    /// Parses the serialized `A::B::C` form. The empty string is the dummy label.
    pub fn parse(text: &str) -> Result<Self, TransformError> {
        if text.is_empty() {
            return Ok(Label::dummy());
        }
        for part in text.split(CHAIN_SEPARATOR) {
            validate_part(part)?;
        }
        Ok(Label(text.to_string()))
    }

    pub fn is_dummy(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Chain parts, top first. Empty for the dummy label.
    pub fn parts(&self) -> impl Iterator<Item = &str> {
        let text = self.0.as_str();
        text.split(CHAIN_SEPARATOR).filter(move |_| !text.is_empty())
    }

    /// Prepends `top` to this chain.
    fn push_top(&mut self, top: &str) {
        if self.0.is_empty() {
            self.0 = top.to_string();
        } else {
            self.0 = format!("{top}{CHAIN_SEPARATOR}{}", self.0);
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn validate_part(part: &str) -> Result<(), TransformError> {
    if part.is_empty() {
        return Err(TransformError::EmptyLabel);
    }
    if part.contains(CHAIN_SEPARATOR) || part.starts_with(':') || part.ends_with(':') {
        return Err(TransformError::SeparatorInLabel(part.to_string()));
    }
    if part.chars().any(char::is_whitespace) {
        return Err(TransformError::WhitespaceInLabel(part.to_string()));
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("label {0:?} contains the chain separator \"::\"")]
    SeparatorInLabel(String),
    #[error("label {0:?} contains whitespace")]
    WhitespaceInLabel(String),
    #[error("empty node label")]
    EmptyLabel,
    #[error("node {0:?} has a single child; collapse unary chains before binarizing")]
    UnaryNode(String),
}

/// A tree whose unary chains have been folded into [`Label`]s.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CollapsedTree {
    Leaf {
        leaf: Leaf,
        chain: Label,
    },
    Node {
        label: Label,
        children: Vec<CollapsedTree>,
    },
}

/// A labeled full binary tree over `n` leaves with `n - 1` internal nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BinaryTree {
    Leaf {
        leaf: Leaf,
        chain: Label,
    },
    Node {
        label: Label,
        left: Box<BinaryTree>,
        right: Box<BinaryTree>,
    },
}

impl BinaryTree {
    pub fn leaf(leaf: Leaf, chain: Label) -> Self {
        BinaryTree::Leaf { leaf, chain }
    }

    pub fn node(label: Label, left: BinaryTree, right: BinaryTree) -> Self {
        BinaryTree::Node {
            label,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            BinaryTree::Leaf { .. } => 1,
            BinaryTree::Node { left, right, .. } => left.num_leaves() + right.num_leaves(),
        }
    }

    pub fn num_internal(&self) -> usize {
        match self {
            BinaryTree::Leaf { .. } => 0,
            BinaryTree::Node { left, right, .. } => 1 + left.num_internal() + right.num_internal(),
        }
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        fn go<'a>(t: &'a BinaryTree, out: &mut Vec<&'a Leaf>) {
            match t {
                BinaryTree::Leaf { leaf, .. } => out.push(leaf),
                BinaryTree::Node { left, right, .. } => {
                    go(left, out);
                    go(right, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Builds an unlabeled binary tree from a bracketing over placeholder
    /// words; handy for tests and enumeration.
    pub fn unlabeled(shape: &Shape, words: &mut impl Iterator<Item = Leaf>) -> Self {
        match shape {
            Shape::Leaf => BinaryTree::leaf(words.next().expect("enough words"), Label::dummy()),
            Shape::Node(l, r) => {
                let left = BinaryTree::unlabeled(l, words);
                let right = BinaryTree::unlabeled(r, words);
                BinaryTree::node(Label::dummy(), left, right)
            }
        }
    }
}

impl fmt::Display for BinaryTree {
    /// Debug-oriented bracketing: `(LABEL left right)` with `*` for dummy
    /// labels and `word` or `word^CHAIN` for leaves.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinaryTree::Leaf { leaf, chain } => {
                if chain.is_dummy() {
                    write!(f, "{}", leaf.word)
                } else {
                    write!(f, "{}^{}", leaf.word, chain)
                }
            }
            BinaryTree::Node { label, left, right } => {
                let label = if label.is_dummy() { "*" } else { label.as_str() };
                write!(f, "({label} {left} {right})")
            }
        }
    }
}

/// Unlabeled binary tree shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    /// Every binary tree shape with `n` leaves (there are Catalan(n-1) of them).
    pub fn enumerate(n: usize) -> Vec<Shape> {
        if n == 1 {
            return vec![Shape::Leaf];
        }
        let mut out = Vec::new();
        for k in 1..n {
            let lefts = Shape::enumerate(k);
            let rights = Shape::enumerate(n - k);
            for l in &lefts {
                for r in &rights {
                    out.push(Shape::Node(Box::new(l.clone()), Box::new(r.clone())));
                }
            }
        }
        out
    }

    pub fn left_branching(n: usize) -> Shape {
        let mut shape = Shape::Leaf;
        for _ in 1..n {
            shape = Shape::Node(Box::new(shape), Box::new(Shape::Leaf));
        }
        shape
    }

    pub fn right_branching(n: usize) -> Shape {
        let mut shape = Shape::Leaf;
        for _ in 1..n {
            shape = Shape::Node(Box::new(Shape::Leaf), Box::new(shape));
        }
        shape
    }
}

/// Folds every unary chain into a composite label.
pub fn collapse_unaries(tree: &Tree) -> Result<CollapsedTree, TransformError> {
    match tree {
        Tree::Leaf(leaf) => Ok(CollapsedTree::Leaf {
            leaf: leaf.clone(),
            chain: Label::dummy(),
        }),
        Tree::Node { label, children } => {
            validate_part(label)?;
            if let [only] = children.as_slice() {
                let mut inner = collapse_unaries(only)?;
                match &mut inner {
                    CollapsedTree::Leaf { chain, .. } => chain.push_top(label),
                    CollapsedTree::Node { label: l, .. } => l.push_top(label),
                }
                return Ok(inner);
            }
            let children = children
                .iter()
                .map(collapse_unaries)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CollapsedTree::Node {
                label: Label(label.clone()),
                children,
            })
        }
    }
}

/// Right-branching binarization: `(X c1 c2 ... ck)` becomes
/// `(X c1 (* c2 (* ... ck)))` with dummy-labeled intermediate nodes.
pub fn binarize_right(tree: &CollapsedTree) -> Result<BinaryTree, TransformError> {
    match tree {
        CollapsedTree::Leaf { leaf, chain } => Ok(BinaryTree::leaf(leaf.clone(), chain.clone())),
        CollapsedTree::Node { label, children } => {
            if children.len() < 2 {
                return Err(TransformError::UnaryNode(label.to_string()));
            }
            let mut binarized = children
                .iter()
                .map(binarize_right)
                .collect::<Result<Vec<_>, _>>()?;
            let mut spine = binarized.pop().unwrap();
            while binarized.len() > 1 {
                let left = binarized.pop().unwrap();
                spine = BinaryTree::node(Label::dummy(), left, spine);
            }
            let first = binarized.pop().unwrap();
            Ok(BinaryTree::node(label.clone(), first, spine))
        }
    }
}

/// Removes every dummy node by splicing its children into the parent. A dummy
/// root is relabeled with `root_fallback`.
pub fn unbinarize(tree: &BinaryTree, root_fallback: &str) -> CollapsedTree {
    fn splice(tree: &BinaryTree, out: &mut Vec<CollapsedTree>) {
        match tree {
            BinaryTree::Node { label, left, right } if label.is_dummy() => {
                splice(left, out);
                splice(right, out);
            }
            other => out.push(convert(other)),
        }
    }
    fn convert(tree: &BinaryTree) -> CollapsedTree {
        match tree {
            BinaryTree::Leaf { leaf, chain } => CollapsedTree::Leaf {
                leaf: leaf.clone(),
                chain: chain.clone(),
            },
            BinaryTree::Node { label, left, right } => {
                let mut children = Vec::new();
                splice(left, &mut children);
                splice(right, &mut children);
                CollapsedTree::Node {
                    label: label.clone(),
                    children,
                }
            }
        }
    }
    let mut root = convert(tree);
    if let CollapsedTree::Node { label, .. } = &mut root {
        if label.is_dummy() {
            *label = Label(root_fallback.to_string());
        }
    }
    root
}

/// Re-expands composite labels into unary chains.
pub fn expand_unaries(tree: &CollapsedTree) -> Tree {
    fn wrap(chain: &Label, inner: Tree) -> Tree {
        let parts: Vec<&str> = chain.parts().collect();
        parts
            .into_iter()
            .rev()
            .fold(inner, |acc, part| Tree::node(part, vec![acc]))
    }
    fn go(tree: &CollapsedTree, out: &mut Vec<Tree>) {
        match tree {
            CollapsedTree::Leaf { leaf, chain } => out.push(wrap(chain, Tree::Leaf(leaf.clone()))),
            CollapsedTree::Node { label, children } => {
                let mut expanded = Vec::with_capacity(children.len());
                for child in children {
                    go(child, &mut expanded);
                }
                if label.is_dummy() {
                    out.extend(expanded);
                } else {
                    let parts: Vec<&str> = label.parts().collect();
                    let (last, upper) = parts.split_last().unwrap();
                    let node = Tree::node(*last, expanded);
                    out.push(upper.iter().rev().fold(node, |acc, p| Tree::node(*p, vec![acc])));
                }
            }
        }
    }
    let mut out = Vec::new();
    go(tree, &mut out);
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        Tree::node(DEFAULT_ROOT_LABEL, out)
    }
}

/// `collapse_unaries` followed by `binarize_right`.
pub fn to_binary(tree: &Tree) -> Result<BinaryTree, TransformError> {
    binarize_right(&collapse_unaries(tree)?)
}

/// `unbinarize` followed by `expand_unaries`.
pub fn from_binary(tree: &BinaryTree, root_fallback: &str) -> Tree {
    expand_unaries(&unbinarize(tree, root_fallback))
}
