//! Score files: the boundary between an external tagging model and the
//! decoder, plus synthetic scores for experiments without a model.
//!
//! Text format:
//!
//! ```text
//! tetratag-scores v1
//! vocab<TAB>l<TAB>l/NP<TAB>r<TAB>L/S<TAB>R
//! id s0 n 2
//! <2n-1 lines of |vocab| tab-separated scores>
//! ```
//!
//! Binary format (little endian): `"TTSC"`, `u32` version, `u32` vocabulary
//! size, each tag as `u32` byte length + UTF-8, then records until end of
//! file, each as `u64` payload length followed by `u32` id length, id bytes,
//! `u32` word count and the `f64` grid in row-major order.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::codec::{Action, TagSequence, TetraTag, Vocabulary, VocabularyError};
use crate::decoder::{ScoreError, ScoreMatrix};

pub const TEXT_HEADER: &str = "tetratag-scores v1";
pub const MAGIC: &[u8; 4] = b"TTSC";
pub const VERSION: u32 = 1;

/// Filler for cells whose tag cannot occur at that row.
pub const OUT_OF_POSITION: f64 = f64::MIN;

/// Default gap between the gold tag and every other tag in synthetic scores.
pub const DEFAULT_MARGIN: f64 = 4.0;

/// Cells at or below this value count as the out-of-position filler (the
/// text encoding rounds [`OUT_OF_POSITION`]).
const FILLER_THRESHOLD: f64 = -1e300;

#[derive(Debug, Error)]
pub enum ScoreIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("unsupported score file version {found:?} (expected {TEXT_HEADER:?} or binary v{VERSION})")]
    Version { found: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("record {id}: expected {expected} score rows for {n} words, found {found}")]
    RowCount {
        id: String,
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("record {id}, row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        id: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("truncated binary score file")]
    Truncated,
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Binary,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Binary => "binary",
        })
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "binary" => Ok(Format::Binary),
            other => Err(format!("unknown format {other:?} (expected text or binary)")),
        }
    }
}

/// A vocabulary and one score matrix per sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreFile {
    pub vocab: Arc<Vocabulary>,
    pub records: Vec<ScoreMatrix>,
    /// Out-of-position cells that held a real score when loaded; they are
    /// ignored by every decoder.
    pub ignored_cells: usize,
}

impl ScoreFile {
    pub fn new(vocab: Arc<Vocabulary>, records: Vec<ScoreMatrix>) -> Self {
        ScoreFile {
            vocab,
            records,
            ignored_cells: 0,
        }
    }
}

fn count_ignored(matrix: &ScoreMatrix) -> usize {
    let vocab = matrix.vocab();
    (0..matrix.num_rows())
        .map(|row| {
            let word = row % 2 == 0;
            matrix
                .row(row)
                .iter()
                .zip(vocab.tags())
                .filter(|(s, tag)| tag.action.is_shift() != word && **s > FILLER_THRESHOLD)
                .count()
        })
        .sum()
}

pub fn write_text<W: Write>(file: &ScoreFile, mut out: W) -> io::Result<()> {
    writeln!(out, "{TEXT_HEADER}")?;
    write!(out, "vocab")?;
    for tag in file.vocab.tags() {
        write!(out, "\t{tag}")?;
    }
    writeln!(out)?;
    for record in &file.records {
        writeln!(out, "id {} n {}", record.id(), record.n())?;
        for row in 0..record.num_rows() {
            for (i, s) in record.row(row).iter().enumerate() {
                if i > 0 {
                    out.write_all(b"\t")?;
                }
                // nine significant digits
                write!(out, "{s:.8e}")?;
            }
            writeln!(out)?;
        }
    }
    out.flush()
}

pub fn read_text<R: BufRead>(input: R) -> Result<ScoreFile, ScoreIoError> {
    let mut lines = input.lines().enumerate();
    let malformed = |line: usize, message: &str| ScoreIoError::Malformed {
        line: line + 1,
        message: message.to_string(),
    };

    let (_, header) = lines.next().ok_or_else(|| malformed(0, "empty score file"))?;
    let header = header?;
    if header.trim_end() != TEXT_HEADER {
        return Err(ScoreIoError::Version {
            found: header.trim_end().to_string(),
        });
    }
    let (vocab_line, vocab) = lines.next().ok_or_else(|| malformed(1, "missing vocab line"))?;
    let vocab = vocab?;
    let mut fields = vocab.trim_end_matches(['\r', '\n']).split('\t');
    if fields.next() != Some("vocab") {
        return Err(malformed(vocab_line, "expected \"vocab\" line"));
    }
    let tags = fields
        .map(|t| {
            t.parse::<TetraTag>()
                .map_err(|e| malformed(vocab_line, &e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let vocab = Arc::new(Vocabulary::new(tags)?);
    let width = vocab.len();

    let mut file = ScoreFile::new(vocab.clone(), Vec::new());
    let mut current: Option<(String, usize, Vec<f64>, usize)> = None;
    let finish = |file: &mut ScoreFile,
                  (id, n, data, rows): (String, usize, Vec<f64>, usize)|
     -> Result<(), ScoreIoError> {
        let expected = (2 * n).saturating_sub(1);
        if rows != expected {
            return Err(ScoreIoError::RowCount {
                id,
                n,
                expected,
                found: rows,
            });
        }
        let matrix = ScoreMatrix::new(id, n, vocab.clone(), data)?;
        file.ignored_cells += count_ignored(&matrix);
        file.records.push(matrix);
        Ok(())
    };

    for (idx, line) in lines {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("id ") {
            if let Some(record) = current.take() {
                finish(&mut file, record)?;
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let (id, n) = match parts.as_slice() {
                [id, "n", n] => (
                    id.to_string(),
                    n.parse::<usize>()
                        .map_err(|_| malformed(idx, "word count is not an integer"))?,
                ),
                _ => return Err(malformed(idx, "expected \"id <id> n <n>\"")),
            };
            current = Some((id, n, Vec::with_capacity(width * (2 * n).max(1)), 0));
            continue;
        }
        let Some((id, _, data, rows)) = current.as_mut() else {
            return Err(malformed(idx, "score row before any record header"));
        };
        let before = data.len();
        for field in line.split('\t') {
            let value = field
                .trim()
                .parse::<f64>()
                .map_err(|_| malformed(idx, &format!("bad score {field:?}")))?;
            data.push(value);
        }
        if data.len() - before != width {
            return Err(ScoreIoError::ColumnCount {
                id: id.clone(),
                row: *rows,
                expected: width,
                found: data.len() - before,
            });
        }
        *rows += 1;
    }
    if let Some(record) = current.take() {
        finish(&mut file, record)?;
    }
    Ok(file)
}

pub fn write_binary<W: Write>(file: &ScoreFile, mut out: W) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(file.vocab.len() as u32).to_le_bytes())?;
    for tag in file.vocab.tags() {
        let text = tag.to_string();
        out.write_all(&(text.len() as u32).to_le_bytes())?;
        out.write_all(text.as_bytes())?;
    }
    for record in &file.records {
        let id = record.id().as_bytes();
        let payload = 4 + id.len() + 4 + 8 * record.as_slice().len();
        out.write_all(&(payload as u64).to_le_bytes())?;
        out.write_all(&(id.len() as u32).to_le_bytes())?;
        out.write_all(id)?;
        out.write_all(&(record.n() as u32).to_le_bytes())?;
        for s in record.as_slice() {
            out.write_all(&s.to_le_bytes())?;
        }
    }
    out.flush()
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], ScoreIoError> {
        let end = self.pos.checked_add(len).ok_or(ScoreIoError::Truncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(ScoreIoError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, ScoreIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ScoreIoError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, ScoreIoError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| ScoreIoError::Malformed {
            line: 0,
            message: "invalid UTF-8 in binary score file".into(),
        })
    }

    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

pub fn read_binary<R: Read>(mut input: R) -> Result<ScoreFile, ScoreIoError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 0,
    };
    if cur.take(4)? != MAGIC {
        return Err(ScoreIoError::Version {
            found: "unknown magic bytes".into(),
        });
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(ScoreIoError::Version {
            found: format!("binary v{version}"),
        });
    }
    let vocab_len = cur.u32()? as usize;
    let mut tags = Vec::with_capacity(vocab_len.min(1 << 16));
    for _ in 0..vocab_len {
        let text = cur.string()?;
        let tag = text.parse::<TetraTag>().map_err(|e| ScoreIoError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
        tags.push(tag);
    }
    let vocab = Arc::new(Vocabulary::new(tags)?);
    let mut file = ScoreFile::new(vocab.clone(), Vec::new());
    while !cur.done() {
        let payload = cur.u64()? as usize;
        let mut rec = Cursor {
            bytes: cur.take(payload)?,
            pos: 0,
        };
        let id = rec.string()?;
        let n = rec.u32()? as usize;
        let rest = &rec.bytes[rec.pos..];
        if !rest.len().is_multiple_of(8) {
            return Err(ScoreIoError::Truncated);
        }
        let cells = rest.len() / 8;
        let rows = if vocab.is_empty() { 0 } else { cells / vocab.len() };
        let expected = (2 * n).saturating_sub(1);
        if rows != expected || cells != rows * vocab.len() {
            return Err(ScoreIoError::RowCount {
                id,
                n,
                expected,
                found: rows,
            });
        }
        let data = rest
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let matrix = ScoreMatrix::new(id, n, vocab.clone(), data)?;
        file.ignored_cells += count_ignored(&matrix);
        file.records.push(matrix);
    }
    Ok(file)
}

/// Loads a score file, detecting the encoding from its first bytes.
pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreFile, ScoreIoError> {
    let mut reader = BufReader::new(File::open(path)?);
    let binary = reader.fill_buf()?.starts_with(MAGIC);
    if binary {
        read_binary(reader)
    } else {
        read_text(reader)
    }
}

pub fn save_scores(path: impl AsRef<Path>, file: &ScoreFile, format: Format) -> io::Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        Format::Text => write_text(file, out),
        Format::Binary => write_binary(file, out),
    }
}

/// Settings for [`synth_scores`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub sigma: f64,
    pub seed: u64,
    pub margin: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            sigma: 0.0,
            seed: 0,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Noisy one-hot scores: the gold tag starts at 0, every other in-position
/// tag at `-margin`, then each in-position cell gets `sigma * z` with `z`
/// standard normal. Out-of-position cells hold [`OUT_OF_POSITION`].
///
/// Noise comes from ChaCha8 seeded with `seed` (`seed_from_u64`) and the
/// Ziggurat normal sampler, drawn sentence by sentence, row by row, in
/// vocabulary order, so the output depends only on the inputs.
pub fn synth_scores(
    gold: &[TagSequence],
    vocab: Arc<Vocabulary>,
    params: &SynthParams,
) -> Result<Vec<ScoreMatrix>, ScoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let width = vocab.len();
    gold.iter()
        .enumerate()
        .map(|(i, seq)| {
            let id = i.to_string();
            let mut data = Vec::with_capacity(seq.len() * width);
            for (row, gold_tag) in seq.tags().iter().enumerate() {
                let gold_column = vocab.index_of(gold_tag).ok_or_else(|| ScoreError::UnknownTag {
                    id: id.clone(),
                    tag: gold_tag.to_string(),
                })?;
                let word = row % 2 == 0;
                for (column, tag) in vocab.tags().iter().enumerate() {
                    if tag.action.is_shift() != word {
                        data.push(OUT_OF_POSITION);
                        continue;
                    }
                    let base = if column == gold_column {
                        0.0
                    } else {
                        -params.margin
                    };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    data.push(base + params.sigma * z);
                }
            }
            ScoreMatrix::new(id, seq.num_words(), vocab.clone(), data)
        })
        .collect()
}

/// One-hot scores for every gold sequence (`0` for gold, `off` elsewhere).
pub fn one_hot_scores(
    gold: &[TagSequence],
    vocab: Arc<Vocabulary>,
    off: f64,
) -> Result<Vec<ScoreMatrix>, ScoreError> {
    gold.iter()
        .enumerate()
        .map(|(i, seq)| ScoreMatrix::one_hot(i.to_string(), seq, vocab.clone(), off))
        .collect()
}

/// Whether `action` may appear at score row `row`.
pub fn in_position(row: usize, action: Action) -> bool {
    action.is_shift() == row.is_multiple_of(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{dp_decode, DecoderConfig};

    fn seq(s: &str) -> TagSequence {
        s.parse().unwrap()
    }

    fn sample() -> ScoreFile {
        let gold = [seq("l/NP L/S r"), seq("l"), seq("l L l/VP R/NP r")];
        let vocab = Arc::new(Vocabulary::from_sequences(gold.iter()));
        let params = SynthParams {
            sigma: 1.5,
            seed: 11,
            margin: DEFAULT_MARGIN,
        };
        let records = synth_scores(&gold, vocab.clone(), &params).unwrap();
        ScoreFile::new(vocab, records)
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let file = sample();
        let mut bytes = Vec::new();
        write_binary(&file, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"TTSC");
        assert_eq!(read_binary(bytes.as_slice()).unwrap(), file);
    }

    #[test]
    fn text_round_trip_is_stable() {
        let file = sample();
        let mut first = Vec::new();
        write_text(&file, &mut first).unwrap();
        let loaded = read_text(first.as_slice()).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert_eq!(loaded.ignored_cells, 0);
        for (a, b) in loaded.records.iter().zip(&file.records) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0), "{x} vs {y}");
            }
        }
        let mut second = Vec::new();
        write_text(&loaded, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn text_rejects_wrong_row_count() {
        let text = format!("{TEXT_HEADER}\nvocab\tl\tr\tL\tR\nid s7 n 1\n0\t0\t0\t0\n0\t0\t0\t0\n");
        match read_text(text.as_bytes()) {
            Err(ScoreIoError::RowCount {
                id,
                expected: 1,
                found: 2,
                ..
            }) => assert_eq!(id, "s7"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn text_rejects_nan_and_bad_header() {
        let text = format!("{TEXT_HEADER}\nvocab\tl\tr\tL\tR\nid a n 1\nNaN\t0\t0\t0\n");
        assert!(matches!(
            read_text(text.as_bytes()),
            Err(ScoreIoError::Score(ScoreError::NonFinite { .. }))
        ));
        assert!(matches!(
            read_text("tetratag-scores v2\nvocab\tl\n".as_bytes()),
            Err(ScoreIoError::Version { .. })
        ));
        let text = format!("{TEXT_HEADER}\nvocab\tl\tq\n");
        assert!(matches!(
            read_text(text.as_bytes()),
            Err(ScoreIoError::Malformed { line: 2, .. })
        ));
        let text = format!("{TEXT_HEADER}\nvocab\tl\tr\tL\tR\nid a n 1\n0\t0\t0\n");
        assert!(matches!(
            read_text(text.as_bytes()),
            Err(ScoreIoError::ColumnCount { .. })
        ));
    }

    #[test]
    fn binary_rejects_version_and_truncation() {
        let file = sample();
        let mut bytes = Vec::new();
        write_binary(&file, &mut bytes).unwrap();
        let mut wrong = bytes.clone();
        wrong[4] = 2;
        assert!(matches!(
            read_binary(wrong.as_slice()),
            Err(ScoreIoError::Version { .. })
        ));
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(
            read_binary(bytes.as_slice()),
            Err(ScoreIoError::Truncated)
        ));
    }

    #[test]
    fn out_of_position_values_are_counted() {
        let text = format!("{TEXT_HEADER}\nvocab\tl\tr\tL\tR\nid a n 1\n0\t-1\t5\t-1e308\n");
        let file = read_text(text.as_bytes()).unwrap();
        assert_eq!(file.ignored_cells, 1);
    }

    #[test]
    fn synth_is_deterministic() {
        assert_eq!(sample(), sample());
        let gold = [seq("l L l R r")];
        let vocab = Arc::new(Vocabulary::structural());
        let a = synth_scores(
            &gold,
            vocab.clone(),
            &SynthParams {
                seed: 1,
                sigma: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        let b = synth_scores(
            &gold,
            vocab,
            &SynthParams {
                seed: 2,
                sigma: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_noise_recovers_gold() {
        let gold = [seq("l/NP L/S r"), seq("l L l/VP R/NP r")];
        let vocab = Arc::new(Vocabulary::from_sequences(gold.iter()));
        let scores = synth_scores(&gold, vocab, &SynthParams::default()).unwrap();
        for (s, g) in scores.iter().zip(&gold) {
            assert_eq!(&dp_decode(s, &DecoderConfig::default()).unwrap().tags, g);
        }
    }
}
