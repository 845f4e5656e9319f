//! Reading and writing the plain-text files the subcommands exchange.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use tetratag::codec::{TagSequence, Vocabulary};
use tetratag::tree::{read_trees, Leaf, Tree};

#[derive(Debug)]
pub enum Failure {
    /// Bad invocation; exit code 1.
    Usage(String),
    /// Bad or inconsistent input data; exit code 2.
    Data(String),
}

pub type Outcome<T = ()> = Result<T, Failure>;

/// Wraps an error as a data failure mentioning `path`.
pub fn data_err(path: &Path, err: impl Display) -> Failure {
    Failure::Data(format!("{}: {err}", path.display()))
}

pub fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| data_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| data_err(path, e))
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

pub fn load_trees(path: &Path) -> Outcome<Vec<Tree>> {
    let text = read_text(path)?;
    read_trees(&text).map_err(|e| {
        let (line, col) = line_col(&text, e.offset());
        Failure::Data(format!("{}:{line}:{col}: {e}", path.display()))
    })
}

/// One sentence per line as `word/TAG` tokens, split at the last `/`.
pub fn format_sentence(leaves: &[Leaf]) -> String {
    leaves
        .iter()
        .map(|l| format!("{}/{}", l.word, l.tag))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_sentence(line: &str) -> Result<Vec<Leaf>, String> {
    line.split_whitespace()
        .map(|token| match token.rsplit_once('/') {
            Some((word, tag)) if !word.is_empty() && !tag.is_empty() => Ok(Leaf::new(word, tag)),
            _ => Err(format!("token {token:?} is not word/TAG")),
        })
        .collect()
}

pub fn load_sentences(path: &Path) -> Outcome<Vec<Vec<Leaf>>> {
    read_text(path)?
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let words = parse_sentence(line).map_err(|e| data_err(path, format!("line {}: {e}", i + 1)))?;
            if words.is_empty() {
                return Err(data_err(path, format!("line {}: empty sentence", i + 1)));
            }
            Ok(words)
        })
        .collect()
}

pub fn load_tags(path: &Path) -> Outcome<Vec<TagSequence>> {
    read_text(path)?
        .lines()
        .enumerate()
        .map(|(i, line)| {
            line.parse()
                .map_err(|e| data_err(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn load_vocab(path: &Path) -> Outcome<Vocabulary> {
    Vocabulary::from_text(&read_text(path)?).map_err(|e| data_err(path, e))
}
