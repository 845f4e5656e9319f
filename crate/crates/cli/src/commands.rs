use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tetratag::codec::{self, encode as encode_tree, TagSequence, Vocabulary};
use tetratag::decoder::{DecoderConfig, ScoreMatrix};
use tetratag::metrics::{bracket_f1, coverage_analysis, linear_fit, EvalConfig};
use tetratag::parse_scores;
use tetratag::scores_io::{load_scores, save_scores, synth_scores, ScoreFile, SynthParams};
use tetratag::synthetic::{random_tree, TreeParams};
use tetratag::transform::{to_binary, DEFAULT_ROOT_LABEL};
use tetratag::tree::{strip_annotations, write_trees, Leaf, Tree};

use crate::files::{self, data_err, Failure, Outcome};
use crate::{BenchArgs, CoverageArgs, DecodeArgs, DecoderArgs, EncodeArgs, EvalArgs, EvalbArgs, SynthArgs};

impl DecoderArgs {
    fn config(&self) -> DecoderConfig {
        DecoderConfig {
            max_depth: self.max_depth,
            tie_break: self.tie_break,
        }
    }
}

impl EvalbArgs {
    fn config(&self) -> EvalConfig {
        EvalConfig {
            strip_function_tags: self.strip_function_tags,
            drop_traces: !self.keep_traces,
            include_preterminals: self.include_preterminals,
            count_root: !self.no_root,
        }
    }
}

fn stdout_err(e: io::Error) -> Failure {
    Failure::Data(format!("writing output: {e}"))
}

pub fn encode(args: &EncodeArgs) -> Outcome {
    let trees = files::load_trees(&args.trees)?;
    let mut tags = Vec::with_capacity(trees.len());
    let mut sentences = String::new();
    for (i, tree) in trees.iter().enumerate() {
        let tree = strip_annotations(tree, args.strip_function_tags, args.drop_traces)
            .map_err(|e| data_err(&args.trees, format!("tree {}: {e}", i + 1)))?;
        let binary = to_binary(&tree).map_err(|e| data_err(&args.trees, format!("tree {}: {e}", i + 1)))?;
        tags.push(encode_tree(&binary));
        sentences.push_str(&files::format_sentence(&tree.sentence()));
        sentences.push('\n');
    }
    let vocab = Vocabulary::from_sequences(tags.iter());
    let tag_lines: String = tags.iter().map(|t| format!("{t}\n")).collect();
    files::write_text(&args.tags, &tag_lines)?;
    files::write_text(&args.vocab, &vocab.to_text())?;
    files::write_text(&args.sentences, &sentences)?;

    eprintln!("trees: {}", trees.len());
    if !tags.is_empty() {
        let lengths: Vec<usize> = tags.iter().map(TagSequence::num_words).collect();
        let total: usize = lengths.iter().sum();
        eprintln!(
            "words: {total} (length min {}, mean {:.1}, max {})",
            lengths.iter().min().unwrap(),
            total as f64 / lengths.len() as f64,
            lengths.iter().max().unwrap()
        );
        let mut depths = BTreeMap::new();
        for seq in &tags {
            *depths
                .entry(codec::max_depth(seq).expect("encoder output is valid"))
                .or_insert(0) += 1;
        }
        eprintln!(
            "max stack depth: {} (histogram {})",
            depths.keys().next_back().unwrap(),
            histogram(&depths)
        );
    }
    eprintln!("vocabulary: {} tags", vocab.len());
    Ok(())
}

fn histogram(counts: &BTreeMap<usize, usize>) -> String {
    counts
        .iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn synth(args: &SynthArgs) -> Outcome {
    if !(args.sigma >= 0.0 && args.sigma.is_finite()) {
        return Err(Failure::Usage(format!(
            "--sigma must be a finite value >= 0, got {}",
            args.sigma
        )));
    }
    if !args.margin.is_finite() {
        return Err(Failure::Usage(format!(
            "--margin must be finite, got {}",
            args.margin
        )));
    }
    let gold = files::load_tags(&args.tags)?;
    let vocab = Arc::new(files::load_vocab(&args.vocab)?);
    let params = SynthParams {
        sigma: args.sigma,
        seed: args.seed,
        margin: args.margin,
    };
    let records = synth_scores(&gold, vocab.clone(), &params).map_err(|e| data_err(&args.tags, e))?;
    save_scores(&args.output, &ScoreFile::new(vocab, records), args.format)
        .map_err(|e| data_err(&args.output, e))?;
    eprintln!("wrote {} score records ({})", gold.len(), args.format);
    Ok(())
}

pub fn decode(args: &DecodeArgs) -> Outcome {
    if args.fallback_root.is_empty() || args.fallback_root.chars().any(char::is_whitespace) {
        return Err(Failure::Usage(format!(
            "invalid --fallback-root {:?}",
            args.fallback_root
        )));
    }
    let file = load_scores(&args.scores).map_err(|e| data_err(&args.scores, e))?;
    let sentences = files::load_sentences(&args.sentences)?;
    if file.records.len() != sentences.len() {
        return Err(Failure::Data(format!(
            "{} score records but {} sentences",
            file.records.len(),
            sentences.len()
        )));
    }
    for (record, words) in file.records.iter().zip(&sentences) {
        if record.n() != words.len() {
            return Err(Failure::Data(format!(
                "record {}: scores cover {} words, sentence has {}",
                record.id(),
                record.n(),
                words.len()
            )));
        }
    }
    if file.ignored_cells > 0 {
        eprintln!(
            "warning: ignored {} scores for tags that cannot occur at their position",
            file.ignored_cells
        );
    }

    let config = args.decoder.config();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} threads: {e}", args.threads)))?;
    let results: Vec<_> = pool.install(|| {
        file.records
            .par_iter()
            .zip(sentences.par_iter())
            .map(|(scores, words)| parse_scores(scores, words, &config, &args.fallback_root))
            .collect()
    });

    let mut trees = Vec::with_capacity(results.len());
    let mut tags = String::new();
    let mut failures = Vec::new();
    for (record, result) in file.records.iter().zip(results) {
        match result {
            Ok((tree, decoded)) => {
                tags.push_str(&format!("{}\n", decoded.tags));
                trees.push(tree);
            }
            Err(e) => failures.push(format!("record {}: {e}", record.id())),
        }
    }
    if !failures.is_empty() {
        for failure in &failures {
            eprintln!("{failure}");
        }
        return Err(Failure::Data(format!(
            "{} of {} sentences could not be decoded",
            failures.len(),
            file.records.len()
        )));
    }

    let text = write_trees(&trees);
    match &args.output {
        Some(path) => files::write_text(path, &text)?,
        None => io::stdout().write_all(text.as_bytes()).map_err(stdout_err)?,
    }
    if let Some(path) = &args.tags_out {
        files::write_text(path, &tags)?;
    }
    eprintln!(
        "decoded {} sentences (max depth {}, tie-break {})",
        trees.len(),
        config.max_depth,
        config.tie_break
    );
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Outcome {
    let gold = files::load_trees(&args.gold)?;
    let pred = files::load_trees(&args.pred)?;
    let report = bracket_f1(&gold, &pred, &args.evalb.config()).map_err(|e| Failure::Data(e.to_string()))?;
    for skipped in &report.skipped {
        eprintln!("skipped {skipped}");
    }
    let mut out = String::new();
    if args.tsv {
        out.push_str("sentence\tlength\tmatched\tgold\tpred\tf1\n");
        for s in &report.sentences {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{:.2}\n",
                s.index + 1,
                s.length,
                s.matched,
                s.gold,
                s.pred,
                s.f1
            ));
        }
        out.push_str(&format!(
            "all\t\t{}\t{}\t{}\t{:.2}\n",
            report.matched, report.gold_brackets, report.pred_brackets, report.f1
        ));
    } else {
        out.push_str(&format!(
            "sentences   {} ({} skipped)\n",
            report.sentences.len(),
            report.skipped.len()
        ));
        out.push_str(&format!(
            "brackets    gold {}  predicted {}  matched {}\n",
            report.gold_brackets, report.pred_brackets, report.matched
        ));
        out.push_str(&format!("precision   {:.2}\n", report.precision));
        out.push_str(&format!("recall      {:.2}\n", report.recall));
        out.push_str(&format!("F1          {:.2}\n", report.f1));
    }
    io::stdout().write_all(out.as_bytes()).map_err(stdout_err)
}

pub fn coverage(args: &CoverageArgs) -> Outcome {
    if args.caps.is_empty() || args.caps.contains(&0) {
        return Err(Failure::Usage("--caps needs depth caps >= 1".into()));
    }
    let trees = files::load_trees(&args.trees)?;
    let report =
        coverage_analysis(&trees, &args.caps, &args.evalb.config()).map_err(|e| data_err(&args.trees, e))?;
    if report.skipped > 0 {
        eprintln!(
            "skipped {} trees that are empty after preprocessing",
            report.skipped
        );
    }
    let mut out = String::new();
    if args.tsv {
        out.push_str("max_depth\trepresentable\tf1\texact\ttrees\n");
        for row in &report.rows {
            out.push_str(&format!(
                "{}\t{:.4}\t{:.2}\t{}\t{}\n",
                row.max_depth, row.representable, row.f1, row.exact, report.trees
            ));
        }
    } else {
        out.push_str("max depth   representable   F1       exact\n");
        for row in &report.rows {
            out.push_str(&format!(
                "{:<11} {:>12.2}%   {:>6.2}   {}/{}\n",
                row.max_depth,
                row.representable * 100.0,
                row.f1,
                row.exact,
                report.trees
            ));
        }
        out.push_str(&format!(
            "gold stack depth histogram: {}\n",
            histogram(&report.depth_histogram)
        ));
    }
    io::stdout().write_all(out.as_bytes()).map_err(stdout_err)
}

/// Fastest of `runs` timings of `f`, each averaged over `reps` calls.
fn time_min(runs: u32, reps: u32, mut f: impl FnMut()) -> Duration {
    f();
    (0..runs)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                f();
            }
            start.elapsed() / reps
        })
        .min()
        .expect("runs >= 1")
}

fn decode_all(records: &[ScoreMatrix], sentences: &[Vec<Leaf>], config: &DecoderConfig) {
    for (scores, words) in records.iter().zip(sentences) {
        let parsed = parse_scores(scores, words, config, DEFAULT_ROOT_LABEL).expect("decodable");
        std::hint::black_box(parsed);
    }
}

pub fn bench(args: &BenchArgs) -> Outcome {
    if args.sizes.is_empty() || args.sizes.contains(&0) {
        return Err(Failure::Usage("--sizes needs sentence lengths >= 1".into()));
    }
    if !(args.sigma >= 0.0 && args.sigma.is_finite()) {
        return Err(Failure::Usage(format!(
            "--sigma must be a finite value >= 0, got {}",
            args.sigma
        )));
    }
    let corpus: Vec<Tree> = match &args.corpus {
        Some(path) => files::load_trees(path)?,
        None => Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut trees: Vec<Tree> = args
        .sizes
        .iter()
        .map(|&n| random_tree(&mut rng, n, &TreeParams::default()))
        .collect();
    trees.extend(corpus.iter().cloned());
    let gold = trees
        .iter()
        .map(|t| to_binary(t).map(|b| encode_tree(&b)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Data(format!("corpus: {e}")))?;
    let vocab = Arc::new(Vocabulary::from_sequences(gold.iter()));
    let params = SynthParams {
        sigma: args.sigma,
        seed: args.seed,
        ..Default::default()
    };
    let scores = synth_scores(&gold, vocab, &params).map_err(|e| Failure::Data(e.to_string()))?;
    let sentences: Vec<Vec<Leaf>> = trees.iter().map(Tree::sentence).collect();
    let config = args.decoder.config();
    let synthetic = args.sizes.len();

    let mut timings = Vec::with_capacity(synthetic);
    for i in 0..synthetic {
        let n = args.sizes[i];
        let reps = (20_000 / n).max(2) as u32;
        let t = time_min(args.runs, reps, || {
            decode_all(&scores[i..=i], &sentences[i..=i], &config)
        });
        timings.push((n, t.as_secs_f64()));
    }
    let corpus_time = (!corpus.is_empty()).then(|| {
        time_min(args.runs, 1, || {
            decode_all(&scores[synthetic..], &sentences[synthetic..], &config)
        })
        .as_secs_f64()
    });
    let fit = (timings.len() >= 2).then(|| {
        let xs: Vec<f64> = timings.iter().map(|&(n, _)| n as f64).collect();
        let ys: Vec<f64> = timings.iter().map(|&(_, t)| t).collect();
        linear_fit(&xs, &ys)
    });

    let mut out = String::new();
    if args.tsv {
        out.push_str("n\tseconds_per_sentence\tsentences_per_second\n");
        for &(n, t) in &timings {
            out.push_str(&format!("{n}\t{t:.9}\t{:.1}\n", 1.0 / t));
        }
        if let Some(t) = corpus_time {
            out.push_str(&format!(
                "corpus\t{:.9}\t{:.1}\n",
                t / corpus.len() as f64,
                corpus.len() as f64 / t
            ));
        }
        if let Some(fit) = fit {
            out.push_str(&format!(
                "fit\tslope={:.6e}\tr2={:.5}\n",
                fit.slope, fit.r_squared
            ));
        }
    } else {
        out.push_str(&format!(
            "decode only, max depth {}, sigma {}, fastest of {} runs\n",
            config.max_depth, args.sigma, args.runs
        ));
        out.push_str("n          ms/sentence    sentences/s\n");
        for &(n, t) in &timings {
            out.push_str(&format!("{n:<10} {:>11.4}    {:>11.1}\n", t * 1e3, 1.0 / t));
        }
        if let Some(t) = corpus_time {
            out.push_str(&format!(
                "corpus ({} sentences): {:.1} sentences/s\n",
                corpus.len(),
                corpus.len() as f64 / t
            ));
        }
        if let Some(fit) = fit {
            out.push_str(&format!(
                "linear fit: {:.3} us/word + {:.3} us, R^2 = {:.5}\n",
                fit.slope * 1e6,
                fit.intercept * 1e6,
                fit.r_squared
            ));
        }
    }
    io::stdout().write_all(out.as_bytes()).map_err(stdout_err)
}
