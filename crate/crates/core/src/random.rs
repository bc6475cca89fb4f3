//! Seeded random piecewise-constant potentials.
//!
//! Segment lengths are whole multiples of `unit`, so on any grid whose step
//! divides `unit` the segment boundaries fall on nodes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{EdgePotential, PotentialField, Segment, StarGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSampler {
    pub max_segments: usize,
    pub unit: f64,
    /// Each segment is `1..=max_units` units long.
    pub max_units: usize,
    /// Negative values are drawn from `(0, max_depth]`.
    pub max_depth: f64,
    /// Positive values are drawn from `(0, max_height]`.
    pub max_height: f64,
    pub positive_probability: f64,
    /// Probability that an edge of a random field is left empty.
    pub empty_edge_probability: f64,
}

impl Default for ProfileSampler {
    fn default() -> Self {
        Self {
            max_segments: 3,
            unit: 0.2,
            max_units: 5,
            max_depth: 8.0,
            max_height: 2.0,
            positive_probability: 0.2,
            empty_edge_probability: 0.1,
        }
    }
}

impl ProfileSampler {
    /// A profile with at least one negative segment.
    pub fn profile<R: Rng + ?Sized>(&self, rng: &mut R) -> EdgePotential {
        let k = rng.random_range(1..=self.max_segments);
        let mut segs: Vec<Segment> = (0..k)
            .map(|_| {
                let len = self.unit * rng.random_range(1..=self.max_units) as f64;
                let val = if rng.random_bool(self.positive_probability) {
                    self.max_height * (1.0 - rng.random::<f64>())
                } else {
                    -self.max_depth * (1.0 - rng.random::<f64>())
                };
                Segment::new(len, val)
            })
            .collect();
        if segs.iter().all(|s| s.val >= 0.0) {
            let i = rng.random_range(0..segs.len());
            segs[i].val = -segs[i].val.abs().max(0.1 * self.max_depth);
        }
        EdgePotential::new(segs).expect("sampled segments are valid")
    }

    /// Independent profiles per edge; some edges may be left at zero, but
    /// never all of them.
    pub fn field<R: Rng + ?Sized>(&self, rng: &mut R, graph: StarGraph) -> PotentialField {
        let n = graph.n_edges();
        let keep = rng.random_range(0..n);
        let edges = (0..n)
            .map(|j| {
                let p = self.profile(rng);
                if j != keep && rng.random_bool(self.empty_edge_probability) {
                    EdgePotential::zero()
                } else {
                    p
                }
            })
            .collect();
        PotentialField::new(graph, edges).expect("one profile per edge")
    }

    /// Longest support any sampled profile can have.
    pub fn max_support(&self) -> f64 {
        self.unit * (self.max_segments * self.max_units) as f64
    }
}
