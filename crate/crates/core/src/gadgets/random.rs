use crate::error::{Error, Result};
use crate::graph::{build_graph, LabeledGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Refuse to enumerate vertex pairs beyond this size.
pub const MAX_RANDOM_N: usize = 20_000;

/// Erdos-Renyi `G(n, p)`, unlabeled; pairs `(u, v)` with `u < v` are visited in
/// lexicographic order, one Bernoulli draw each.
pub fn gen_gnp(n: usize, p: f64, seed: u64, stream: u64) -> Result<LabeledGraph> {
    if n > MAX_RANDOM_N {
        return Err(Error::Guard(format!("random graph with {n} vertices exceeds {MAX_RANDOM_N}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Guard(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    build_graph(n, &edges, None)
}
