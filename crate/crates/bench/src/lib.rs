//! Fixed inputs shared by the benchmarks.

use qglt_core::{BoundaryCondition, GridSpec, PotentialField, ProfileSampler, StarGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible random field on `n` edges.
pub fn field(n: usize, seed: u64) -> PotentialField {
    let graph = StarGraph::new(n).expect("at least one edge");
    ProfileSampler::default().field(&mut ChaCha8Rng::seed_from_u64(seed), graph)
}

pub fn grid(h: f64, len: f64) -> GridSpec {
    GridSpec::with_length(h, len, BoundaryCondition::Dirichlet).expect("length is a multiple of h")
}
