//! Random treebank-like trees for property tests and benchmarks.

use rand::RngExt;

use crate::tree::Tree;

const PHRASES: &[&str] = &[
    "S", "NP", "VP", "PP", "SBAR", "ADJP", "ADVP", "QP", "WHNP", "PRN", "NP-SBJ", "S-TPC-1",
];
/// Labels used for unary chains; real treebanks have few distinct ones.
const UNARY: &[&str] = &["S", "NP", "VP", "SBAR", "ADJP"];
const TAGS: &[&str] = &[
    "DT", "NN", "NNS", "VBD", "VBZ", "IN", "JJ", "RB", "PRP", "CD", ",", "-LRB-",
];

/// Shape parameters for [`random_tree`].
#[derive(Clone, Copy, Debug)]
pub struct TreeParams {
    /// Largest number of children of one node.
    pub max_children: usize,
    /// Probability that a node or word gets a unary parent.
    pub unary_prob: f64,
    /// Longest unary chain added at one place.
    pub max_chain: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_children: 4,
            unary_prob: 0.2,
            max_chain: 2,
        }
    }
}

/// A random tree over `n` words with n-ary nodes and unary chains.
pub fn random_tree<R: RngExt + ?Sized>(rng: &mut R, n: usize, params: &TreeParams) -> Tree {
    assert!(n >= 1);
    let mut next_word = 0;
    build(rng, n, params, &mut next_word)
}

fn build<R: RngExt + ?Sized>(rng: &mut R, n: usize, params: &TreeParams, next_word: &mut usize) -> Tree {
    let core = if n == 1 {
        let tag = TAGS[rng.random_range(0..TAGS.len())];
        *next_word += 1;
        Tree::leaf(format!("w{}", *next_word), tag)
    } else {
        let k = rng.random_range(2..=params.max_children.max(2).min(n));
        let sizes = random_composition(rng, n, k);
        let children = sizes
            .into_iter()
            .map(|size| build(rng, size, params, next_word))
            .collect();
        Tree::node(PHRASES[rng.random_range(0..PHRASES.len())], children)
    };
    let mut tree = core;
    if params.max_chain > 0 && rng.random_bool(params.unary_prob) {
        for _ in 0..rng.random_range(1..=params.max_chain) {
            tree = Tree::node(UNARY[rng.random_range(0..UNARY.len())], vec![tree]);
        }
    }
    tree
}

/// Splits `n` into `k` positive parts.
fn random_composition<R: RngExt + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut cuts = rand::seq::index::sample(rng, n - 1, k - 1).into_vec();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for cut in cuts {
        sizes.push(cut + 1 - prev);
        prev = cut + 1;
    }
    sizes.push(n - prev);
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn produces_requested_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..60 {
            let t = random_tree(&mut rng, n, &TreeParams::default());
            assert_eq!(t.num_leaves(), n);
        }
    }

    #[test]
    fn compositions_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..30 {
            for k in 2..=n.min(5) {
                let parts = random_composition(&mut rng, n, k);
                assert_eq!(parts.len(), k);
                assert!(parts.iter().all(|&p| p > 0));
                assert_eq!(parts.iter().sum::<usize>(), n);
            }
        }
    }
}
