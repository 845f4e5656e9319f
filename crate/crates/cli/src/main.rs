//! `tetratag` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgAction, Args, Parser, Subcommand};

use tetratag::decoder::{TieBreak, DEFAULT_MAX_DEPTH};
use tetratag::scores_io::{Format, DEFAULT_MARGIN};
use tetratag::transform::DEFAULT_ROOT_LABEL;

use files::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "tetratag",
    version,
    about = "Constituency parsing as four-way tagging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a treebank into tag sequences, a tag vocabulary and sentences.
    Encode(EncodeArgs),
    /// Make synthetic score files from gold tag sequences.
    Synth(SynthArgs),
    /// Decode score files into trees.
    Decode(DecodeArgs),
    /// Labeled bracket precision, recall and F1.
    Eval(EvalArgs),
    /// Share of a treebank representable under stack-depth caps.
    Coverage(CoverageArgs),
    /// Decode-only timing over synthetic sentences of growing length.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct EncodeArgs {
    /// Bracketed trees, any whitespace layout.
    trees: PathBuf,
    /// Output: one line of space-separated tags per tree.
    #[arg(long)]
    tags: PathBuf,
    /// Output: tag vocabulary, one tag per line.
    #[arg(long)]
    vocab: PathBuf,
    /// Output: one line of word/TAG tokens per tree.
    #[arg(long)]
    sentences: PathBuf,
    /// Strip function tags before encoding.
    #[arg(long)]
    strip_function_tags: bool,
    /// Drop -NONE- subtrees before encoding.
    #[arg(long)]
    drop_traces: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Gold tag sequences, one per line.
    #[arg(long)]
    tags: PathBuf,
    /// Tag vocabulary indexing the score columns.
    #[arg(long)]
    vocab: PathBuf,
    /// Output score file.
    #[arg(short, long)]
    output: PathBuf,
    /// Standard deviation of the Gaussian noise added to every cell.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gap between the gold tag and the other tags before noise.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct DecoderArgs {
    /// Largest stack depth the decoder may use.
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH, value_parser = parse_depth)]
    max_depth: usize,
    /// Preferred action on equal scores: shallow (l/L) or deep (r/R).
    #[arg(long, default_value_t = TieBreak::Shallow)]
    tie_break: TieBreak,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Score file, text or binary (detected from the content).
    scores: PathBuf,
    /// Sentences aligned with the score records, word/TAG tokens.
    #[arg(long)]
    sentences: PathBuf,
    /// Output trees; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the decoded tag sequences here.
    #[arg(long)]
    tags_out: Option<PathBuf>,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Label for a decoded root that carries no label.
    #[arg(long, default_value = DEFAULT_ROOT_LABEL)]
    fallback_root: String,
}

#[derive(Args, Debug)]
struct EvalbArgs {
    /// Remove function tags (NP-SBJ -> NP) before counting.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    strip_function_tags: bool,
    /// Keep -NONE- subtrees.
    #[arg(long)]
    keep_traces: bool,
    /// Count preterminal brackets.
    #[arg(long)]
    include_preterminals: bool,
    /// Do not count the root bracket.
    #[arg(long)]
    no_root: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    gold: PathBuf,
    pred: PathBuf,
    #[command(flatten)]
    evalb: EvalbArgs,
    /// Print per-sentence TSV records instead of the table.
    #[arg(long)]
    tsv: bool,
}

#[derive(Args, Debug)]
struct CoverageArgs {
    trees: PathBuf,
    /// Depth caps to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    caps: Vec<usize>,
    #[command(flatten)]
    evalb: EvalbArgs,
    /// Print TSV records instead of the table.
    #[arg(long)]
    tsv: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Optional treebank; its decode throughput is reported as well.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Sentence lengths to time.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    sizes: Vec<usize>,
    /// Noise of the synthetic scores.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Seed for the synthetic trees and scores.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timing runs per size; the fastest is reported.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Print TSV records instead of the table.
    #[arg(long)]
    tsv: bool,
}

fn parse_depth(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("max depth must be at least 1".into()),
        Ok(d) => Ok(d),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Encode(args) => commands::encode(args),
        Command::Synth(args) => commands::synth(args),
        Command::Decode(args) => commands::decode(args),
        Command::Eval(args) => commands::eval(args),
        Command::Coverage(args) => commands::coverage(args),
        Command::Bench(args) => commands::bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
