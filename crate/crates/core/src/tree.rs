//! Parse trees and the bracketed (Penn Treebank style) text format.

use std::fmt;

use thiserror::Error;

/// Preterminal tag used by the treebank for empty elements.
pub const TRACE_TAG: &str = "-NONE-";

/// A word together with its preterminal (part-of-speech) tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Leaf {
    pub word: String,
    pub tag: String,
}

impl Leaf {
    pub fn new(word: impl Into<String>, tag: impl Into<String>) -> Self {
        Leaf {
            word: word.into(),
            tag: tag.into(),
        }
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.tag, self.word)
    }
}

/// A general constituency tree. Internal nodes may have any non-zero number
/// of children, so unary chains and n-ary nodes are both representable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf(Leaf),
    Node { label: String, children: Vec<Tree> },
}

impl Tree {
    pub fn leaf(word: impl Into<String>, tag: impl Into<String>) -> Self {
        Tree::Leaf(Leaf::new(word, tag))
    }

    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Self {
        Tree::Node {
            label: label.into(),
            children,
        }
    }

    /// Leaves in sentence order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            Tree::Leaf(leaf) => out.push(leaf),
            Tree::Node { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }

    /// The sentence this tree spans.
    pub fn sentence(&self) -> Vec<Leaf> {
        self.leaves().into_iter().cloned().collect()
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { children, .. } => children.iter().map(Tree::num_leaves).sum(),
        }
    }

    /// Number of internal (non-leaf) nodes.
    pub fn num_internal(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => 1 + children.iter().map(Tree::num_internal).sum::<usize>(),
        }
    }

    /// Label of the root: the node label or, for a bare leaf, its tag.
    pub fn label(&self) -> &str {
        match self {
            Tree::Leaf(leaf) => &leaf.tag,
            Tree::Node { label, .. } => label,
        }
    }

    /// Calls `f(label, start, end)` for every internal node, pre-order.
    /// Spans are half-open word offsets.
    pub fn for_each_span<F: FnMut(&str, usize, usize)>(&self, mut f: F) {
        self.spans_from(0, &mut f);
    }

    fn spans_from<F: FnMut(&str, usize, usize)>(&self, start: usize, f: &mut F) -> usize {
        match self {
            Tree::Leaf(_) => start + 1,
            Tree::Node { label, children } => {
                let end = start + self.num_leaves();
                f(label, start, end);
                let mut pos = start;
                for child in children {
                    pos = child.spans_from(pos, f);
                }
                debug_assert_eq!(pos, end);
                end
            }
        }
    }

    /// Bracketed form of the tree on a single line.
    pub fn to_bracketed(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(leaf) => leaf.fmt(f),
            Tree::Node { label, children } => {
                write!(f, "({label}")?;
                for child in children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReadError {
    #[error("unexpected end of input at byte {offset}: {open} unclosed parenthesis(es)")]
    UnexpectedEof { offset: usize, open: usize },
    #[error("unexpected ')' at byte {offset}")]
    UnexpectedClose { offset: usize },
    #[error("token {token:?} outside of any tree at byte {offset}")]
    StrayToken { offset: usize, token: String },
    #[error("node {label:?} at byte {offset} has no children")]
    EmptyNode { offset: usize, label: String },
    #[error("node {label:?} at byte {offset} mixes words and subtrees")]
    MixedChildren { offset: usize, label: String },
    #[error("unlabeled node at byte {offset} below the top level")]
    MissingLabel { offset: usize },
}

impl ReadError {
    pub fn offset(&self) -> usize {
        match self {
            ReadError::UnexpectedEof { offset, .. }
            | ReadError::UnexpectedClose { offset }
            | ReadError::StrayToken { offset, .. }
            | ReadError::EmptyNode { offset, .. }
            | ReadError::MixedChildren { offset, .. }
            | ReadError::MissingLabel { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Option<(usize, Token<'a>)> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        match bytes.get(start)? {
            b'(' => {
                self.pos += 1;
                Some((start, Token::Open))
            }
            b')' => {
                self.pos += 1;
                Some((start, Token::Close))
            }
            _ => {
                while self.pos < bytes.len()
                    && !bytes[self.pos].is_ascii_whitespace()
                    && bytes[self.pos] != b'('
                    && bytes[self.pos] != b')'
                {
                    self.pos += 1;
                }
                Some((start, Token::Atom(&self.text[start..self.pos])))
            }
        }
    }
}

enum Child {
    Word(String),
    Tree(Tree),
}

struct Frame {
    offset: usize,
    label: Option<String>,
    children: Vec<Child>,
}

impl Frame {
    fn finish(self, top_level: bool) -> Result<Tree, ReadError> {
        let Frame {
            offset,
            label,
            children,
        } = self;
        let label = match label {
            Some(label) => label,
            None if top_level => {
                if children.iter().any(|c| matches!(c, Child::Word(_))) {
                    return Err(ReadError::MixedChildren {
                        offset,
                        label: String::new(),
                    });
                }
                let mut trees: Vec<Tree> = children
                    .into_iter()
                    .filter_map(|c| match c {
                        Child::Tree(t) => Some(t),
                        Child::Word(_) => None,
                    })
                    .collect();
                return match trees.len() {
                    0 => Err(ReadError::EmptyNode {
                        offset,
                        label: String::new(),
                    }),
                    // PTB wrapper: `( (S ...) )`
                    1 => Ok(trees.pop().unwrap()),
                    _ => Ok(Tree::node("", trees)),
                };
            }
            None => return Err(ReadError::MissingLabel { offset }),
        };
        match children.len() {
            0 => Err(ReadError::EmptyNode { offset, label }),
            1 if matches!(children[0], Child::Word(_)) => {
                let Some(Child::Word(word)) = children.into_iter().next() else {
                    unreachable!()
                };
                Ok(Tree::leaf(word, label))
            }
            _ => {
                let mut trees = Vec::with_capacity(children.len());
                for child in children {
                    match child {
                        Child::Tree(t) => trees.push(t),
                        Child::Word(_) => return Err(ReadError::MixedChildren { offset, label }),
                    }
                }
                Ok(Tree::node(label, trees))
            }
        }
    }
}

/// Reads every tree in a bracketed treebank text.
///
/// `(TAG word)` becomes a [`Leaf`]; an unlabeled outermost wrapper around a
/// single tree is stripped. Tokens are kept verbatim, so escaped brackets such
/// as `-LRB-` survive a round trip unchanged.
pub fn read_trees(text: &str) -> Result<Vec<Tree>, ReadError> {
    let mut lexer = Lexer { text, pos: 0 };
    let mut stack: Vec<Frame> = Vec::new();
    let mut trees = Vec::new();
    while let Some((offset, token)) = lexer.next_token() {
        match token {
            Token::Open => {
                let label = match lexer.clone_peek() {
                    Some((_, Token::Atom(atom))) => {
                        lexer.next_token();
                        Some(atom.to_string())
                    }
                    _ => None,
                };
                stack.push(Frame {
                    offset,
                    label,
                    children: Vec::new(),
                });
            }
            Token::Close => {
                let frame = stack.pop().ok_or(ReadError::UnexpectedClose { offset })?;
                let tree = frame.finish(stack.is_empty())?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Child::Tree(tree)),
                    None => trees.push(tree),
                }
            }
            Token::Atom(atom) => match stack.last_mut() {
                Some(frame) => frame.children.push(Child::Word(atom.to_string())),
                None => {
                    return Err(ReadError::StrayToken {
                        offset,
                        token: atom.to_string(),
                    })
                }
            },
        }
    }
    if !stack.is_empty() {
        return Err(ReadError::UnexpectedEof {
            offset: text.len(),
            open: stack.len(),
        });
    }
    Ok(trees)
}

impl<'a> Lexer<'a> {
    fn clone_peek(&self) -> Option<(usize, Token<'a>)> {
        Lexer {
            text: self.text,
            pos: self.pos,
        }
        .next_token()
    }
}

/// Single-line bracketed form; tokens separated by one space.
pub fn write_tree(tree: &Tree) -> String {
    tree.to_string()
}

/// Writes one tree per line.
pub fn write_trees<'a>(trees: impl IntoIterator<Item = &'a Tree>) -> String {
    let mut out = String::new();
    for tree in trees {
        out.push_str(&tree.to_string());
        out.push('\n');
    }
    out
}

/// Removes function tags and co-indexation from a label: `NP-SBJ-1` → `NP`,
/// `NP=2` → `NP`. Labels starting with `-` (`-LRB-`, `-NONE-`) are kept.
pub fn strip_function_tags(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(0) | None => label,
        Some(cut) => &label[..cut],
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("tree is empty after removing trace subtrees")]
pub struct EmptyTreeError;

/// Evalb-style preprocessing. With `drop_trace_subtrees`, leaves tagged
/// `-NONE-` are removed along with any ancestor left without children.
pub fn strip_annotations(
    tree: &Tree,
    strip_function_tags_flag: bool,
    drop_trace_subtrees: bool,
) -> Result<Tree, EmptyTreeError> {
    fn go(tree: &Tree, strip: bool, drop: bool) -> Option<Tree> {
        let relabel = |l: &str| {
            if strip {
                strip_function_tags(l).to_string()
            } else {
                l.to_string()
            }
        };
        match tree {
            Tree::Leaf(leaf) => {
                if drop && leaf.tag == TRACE_TAG {
                    None
                } else {
                    Some(Tree::leaf(leaf.word.clone(), relabel(&leaf.tag)))
                }
            }
            Tree::Node { label, children } => {
                let kept: Vec<Tree> = children.iter().filter_map(|c| go(c, strip, drop)).collect();
                if kept.is_empty() {
                    None
                } else {
                    Some(Tree::node(relabel(label), kept))
                }
            }
        }
    }
    go(tree, strip_function_tags_flag, drop_trace_subtrees).ok_or(EmptyTreeError)
}
