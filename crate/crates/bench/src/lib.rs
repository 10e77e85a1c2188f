//! Shared inputs for the benchmarks in `benches/`.

use kempeflip::harness::{random_neighboring_pair, Instance};

/// A random neighboring pair on `n` vertices of maximum degree `max_degree`
/// with `2 * max_degree` colors, fixed by the seed.
pub fn instance(n: usize, max_degree: usize, seed: u64) -> Instance {
    random_neighboring_pair(n, max_degree, 2 * max_degree, seed).expect("valid benchmark parameters")
}
