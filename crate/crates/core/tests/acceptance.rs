//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints a PASS/FAIL line on a normal `cargo test` run.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tetratag::codec::{self, decode, encode, enumerate_valid, trace, TagSequence, Vocabulary};
use tetratag::decoder::{dp_decode, oracle_decode, DecoderConfig, ScoreMatrix};
use tetratag::metrics::{bracket_f1, coverage_analysis, linear_fit, EvalConfig};
use tetratag::scores_io::{synth_scores, SynthParams};
use tetratag::synthetic::{random_tree, TreeParams};
use tetratag::transform::{from_binary, to_binary, BinaryTree, Label, Shape, DEFAULT_ROOT_LABEL};
use tetratag::tree::{read_trees, Leaf, Tree};

const SAMPLE: &str = include_str!("../testdata/sample.mrg");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// gold tree -> tags -> one-hot scores -> DP -> tree
fn pipeline(trees: &[Tree], config: &DecoderConfig) -> (Vec<Tree>, usize) {
    let tags: Vec<TagSequence> = trees
        .iter()
        .map(|t| encode(&to_binary(t).expect("transformable")))
        .collect();
    let vocab = Arc::new(Vocabulary::from_sequences(tags.iter()));
    let mut deepest = 0;
    let decoded = trees
        .iter()
        .zip(&tags)
        .map(|(tree, gold)| {
            deepest = deepest.max(codec::max_depth(gold).unwrap());
            let scores = ScoreMatrix::one_hot("g", gold, vocab.clone(), -10.0).unwrap();
            let best = dp_decode(&scores, config).unwrap();
            let binary = decode(&best.tags, &tree.sentence()).unwrap();
            from_binary(&binary, DEFAULT_ROOT_LABEL)
        })
        .collect();
    (decoded, deepest)
}

fn round_trip_identity() -> Outcome {
    let config = DecoderConfig::default();
    let sample = read_trees(SAMPLE).unwrap();
    let (decoded, sample_depth) = pipeline(&sample, &config);
    let sample_ok = decoded == sample;
    let n_sample = sample.len();
    let sample_f1 = bracket_f1(&sample, &decoded, &EvalConfig::raw()).unwrap().f1;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = TreeParams::default();
    let random: Vec<Tree> = (0..10_000)
        .map(|_| {
            let n = rng.random_range(1..=40);
            random_tree(&mut rng, n, &params)
        })
        .collect();
    let (decoded, random_depth) = pipeline(&random, &config);
    let mismatches = decoded.iter().zip(&random).filter(|(a, b)| a != b).count();
    let random_f1 = bracket_f1(&random, &decoded, &EvalConfig::raw()).unwrap().f1;

    outcome(
        sample_ok && sample_f1 == 100.0 && mismatches == 0 && random_f1 == 100.0,
        format!(
            "sample: {n_sample} trees identical={sample_ok} F1={sample_f1} (max depth {sample_depth}); \
             random: 10000 trees, {mismatches} mismatches, F1={random_f1} (max depth {random_depth}); d=8"
        ),
    )
}

fn dp_optimality() -> Outcome {
    let vocab = Arc::new(Vocabulary::from_text("l\nl/NP\nr\nr/VP\nL\nL/S\nL/NP\nR\nR/PP\n").unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let config = DecoderConfig::default();
    let mut failures = 0;
    let mut checked = 0;
    for n in 2..=10 {
        for _ in 0..1000 {
            let data = (0..(2 * n - 1) * vocab.len())
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect();
            let scores = ScoreMatrix::new("r", n, vocab.clone(), data).unwrap();
            let dp = dp_decode(&scores, &config).unwrap();
            let oracle = oracle_decode(&scores, &config).unwrap();
            checked += 1;
            if dp.score != oracle.score {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{checked} matrices (n=2..10, uniform [-1,1]), {failures} score mismatches"),
    )
}

fn bijection_counting() -> Outcome {
    let counts: Vec<usize> = (1..=8).map(|n| enumerate_valid(n).len()).collect();
    let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
    outcome(counts == catalan, format!("valid sequences n=1..8: {counts:?}"))
}

fn worked_example_fidelity() -> Outcome {
    let leaf = |w: &str| BinaryTree::leaf(Leaf::new(w, "X"), Label::dummy());
    let node = |l, r| BinaryTree::node(Label::dummy(), l, r);
    let tree = node(
        node(leaf("A"), node(leaf("B"), node(leaf("C"), leaf("D")))),
        leaf("E"),
    );
    let tags = encode(&tree);
    let structural = tags.structural_string();
    let words: Vec<Leaf> = tree.leaves().into_iter().cloned().collect();
    let steps = trace(&tags, &words).unwrap();
    let depths: Vec<usize> = steps.iter().map(Vec::len).collect();
    let decoded = decode(&tags, &words).unwrap();
    outcome(
        structural == "l L l R l R r L r"
            && depths == [1, 1, 2, 1, 2, 1, 1, 1, 1]
            && steps.len() == 9
            && decoded == tree,
        format!("tags [{structural}], stack depths {depths:?}, decoded {decoded}"),
    )
}

fn depth_properties() -> Outcome {
    let words: Vec<Leaf> = (0..200).map(|i| Leaf::new(format!("w{i}"), "X")).collect();
    let depth_of = |shape: &Shape| {
        let tree = BinaryTree::unlabeled(shape, &mut words.iter().cloned());
        codec::max_depth(&encode(&tree)).unwrap()
    };
    let left_ok = (2..=200).all(|n| depth_of(&Shape::left_branching(n)) == 1);
    let right_ok = (3..=200).all(|n| depth_of(&Shape::right_branching(n)) == 2);
    // with two words the right- and left-branching trees coincide
    let two_ok = Shape::right_branching(2) == Shape::left_branching(2);

    let sample = read_trees(SAMPLE).unwrap();
    let caps: Vec<usize> = (1..=10).collect();
    let report = coverage_analysis(&sample, &caps, &EvalConfig::default()).unwrap();
    let monotone = report
        .rows
        .windows(2)
        .all(|w| w[0].representable <= w[1].representable && w[0].f1 <= w[1].f1);
    let max_depth = report.max_depth().unwrap();
    let asymptote_ok = report
        .rows
        .iter()
        .filter(|r| r.max_depth >= max_depth)
        .all(|r| r.representable == 1.0 && r.f1 == 100.0);
    let curve: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("d{}:{:.3}/{:.2}", r.max_depth, r.representable, r.f1))
        .collect();
    outcome(
        left_ok && right_ok && two_ok && monotone && asymptote_ok,
        format!(
            "left-branching depth 1 (n=2..200): {left_ok}; right-branching depth 2 (n=3..200): {right_ok}; \
             n=2 shapes coincide: {two_ok}; coverage monotone: {monotone}; \
             cap>={max_depth} gives F1 100: {asymptote_ok}; curve [{}]",
            curve.join(" ")
        ),
    )
}

fn decode_time_per_sentence(scores: &ScoreMatrix, words: &[Leaf], config: &DecoderConfig) -> f64 {
    let run = || {
        let best = dp_decode(scores, config).unwrap();
        let binary = decode(&best.tags, words).unwrap();
        std::hint::black_box(from_binary(&binary, DEFAULT_ROOT_LABEL));
    };
    run();
    let reps = (20_000 / words.len()).max(2);
    let mut best = Duration::MAX;
    for _ in 0..5 {
        let start = Instant::now();
        for _ in 0..reps {
            run();
        }
        best = best.min(start.elapsed() / reps as u32);
    }
    best.as_secs_f64()
}

fn linearity() -> Outcome {
    let sizes = [10usize, 100, 1000, 10_000];
    let config = DecoderConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trees: Vec<Tree> = sizes
        .iter()
        .map(|&n| random_tree(&mut rng, n, &TreeParams::default()))
        .collect();
    let gold: Vec<TagSequence> = trees.iter().map(|t| encode(&to_binary(t).unwrap())).collect();
    let vocab = Arc::new(Vocabulary::from_sequences(gold.iter()));
    let params = SynthParams {
        sigma: 1.0,
        seed: 1,
        ..Default::default()
    };
    let scores = synth_scores(&gold, vocab, &params).unwrap();
    let times: Vec<f64> = scores
        .iter()
        .zip(&trees)
        .map(|(s, t)| decode_time_per_sentence(s, &t.sentence(), &config))
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let fit = linear_fit(&xs, &times);
    let table: Vec<String> = sizes
        .iter()
        .zip(&times)
        .map(|(n, t)| format!("n={n}: {:.1}us", t * 1e6))
        .collect();
    outcome(
        fit.r_squared >= 0.99,
        format!(
            "{}; linear fit R^2 = {:.5} (threshold 0.99)",
            table.join(", "),
            fit.r_squared
        ),
    )
}

fn stack_depth_claim() -> Outcome {
    let sample = read_trees(SAMPLE).unwrap();
    let report = coverage_analysis(&sample, &[8], &EvalConfig::default()).unwrap();
    let hist: Vec<String> = report
        .depth_histogram
        .iter()
        .map(|(d, c)| format!("{d}:{c}"))
        .collect();
    match report.max_depth() {
        Some(max) => outcome(
            report.trees == sample.len(),
            format!(
                "sample corpus: {} trees, max stack depth {max}, histogram {{{}}}",
                report.trees,
                hist.join(", ")
            ),
        ),
        None => outcome(false, "no depth reported"),
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        (
            "round-trip identity",
            Duration::from_secs(10),
            round_trip_identity,
        ),
        ("DP optimality", Duration::from_secs(60), dp_optimality),
        ("bijection counting", Duration::from_secs(5), bijection_counting),
        ("worked-example fidelity", Duration::MAX, worked_example_fidelity),
        ("depth properties", Duration::MAX, depth_properties),
        ("linearity", Duration::MAX, linearity),
        ("stack-depth report", Duration::MAX, stack_depth_claim),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = if limit == Duration::MAX {
            String::new()
        } else {
            format!(" / limit {}s", limit.as_secs())
        };
        println!(
            "[{}] {name}: {} ({:.2}s{budget})",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
