//! Star graphs, truncation grids and piecewise-constant potentials.
//!
//! Potentials are compactly supported step functions on each half-line
//! edge, measured outward from the vertex. All norms are evaluated in
//! closed form, so `∫ V_-^{γ+1/2}` carries no quadrature error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The star graph Γ_N: `n_edges` half-lines glued at one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StarGraph {
    n_edges: usize,
}

impl StarGraph {
    pub fn new(n_edges: usize) -> Result<Self> {
        if n_edges == 0 {
            return Err(Error::NoEdges);
        }
        Ok(Self { n_edges })
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Self::Dirichlet),
            "neumann" => Ok(Self::Neumann),
            other => Err(Error::InvalidConfig(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Uniform grid on each edge: nodes at `h, 2h, ..., n·h = L`.
///
/// With a Dirichlet far end the node at `L` is eliminated; with a Neumann
/// far end it is kept with half weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    step: f64,
    points_per_edge: usize,
    far_bc: BoundaryCondition,
}

impl GridSpec {
    pub fn new(step: f64, points_per_edge: usize, far_bc: BoundaryCondition) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if points_per_edge < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points per edge, got {points_per_edge}"
            )));
        }
        Ok(Self { step, points_per_edge, far_bc })
    }

    /// Grid whose edge length is `length`, which must be a whole number of steps.
    pub fn with_length(step: f64, length: f64, far_bc: BoundaryCondition) -> Result<Self> {
        if !(step.is_finite() && step > 0.0 && length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("step {step} and length {length} must be positive")));
        }
        let n = (length / step).round();
        if (n * step - length).abs() > 1e-9 * length.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "length {length} is not a multiple of the step {step}"
            )));
        }
        Self::new(step, n as usize, far_bc)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points_per_edge(&self) -> usize {
        self.points_per_edge
    }

    pub fn far_bc(&self) -> BoundaryCondition {
        self.far_bc
    }

    pub fn edge_length(&self) -> f64 {
        self.points_per_edge as f64 * self.step
    }

    /// Same number of points, step divided by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { step: self.step / lambda, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub len: f64,
    pub val: f64,
}

impl Segment {
    pub fn new(len: f64, val: f64) -> Self {
        Self { len, val }
    }
}

/// Piecewise-constant potential on one edge, zero beyond the last segment.
///
/// Stored in canonical form: adjacent equal values are merged and trailing
/// zero segments are dropped.
#[derive(Debug, Clone, Default)]
pub struct EdgePotential {
    segments: Vec<Segment>,
    // right end of each segment
    ends: Vec<f64>,
    // ∫_0^{ends[i]} V
    prefix: Vec<f64>,
}

impl PartialEq for EdgePotential {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}

impl EdgePotential {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (index, s) in segments.iter().enumerate() {
            if !(s.len.is_finite() && s.len > 0.0 && s.val.is_finite()) {
                return Err(Error::InvalidSegment { index, len: s.len, val: s.val });
            }
        }
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for s in segments {
            match merged.last_mut() {
                Some(last) if last.val == s.val => last.len += s.len,
                _ => merged.push(s),
            }
        }
        while merged.last().is_some_and(|s| s.val == 0.0) {
            merged.pop();
        }
        Ok(Self::from_canonical(merged))
    }

    /// Convenience constructor from `(length, value)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(len, val)| Segment { len, val }).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    fn from_canonical(segments: Vec<Segment>) -> Self {
        let mut ends = Vec::with_capacity(segments.len());
        let mut prefix = Vec::with_capacity(segments.len());
        let (mut x, mut acc) = (0.0, 0.0);
        for s in &segments {
            x += s.len;
            acc += s.len * s.val;
            ends.push(x);
            prefix.push(acc);
        }
        Self { segments, ends, prefix }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_zero(&self) -> bool {
        self.segments.is_empty()
    }

    /// Length of the support, i.e. the right end of the last nonzero segment.
    pub fn support(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    /// Value at distance `t` from the vertex. At a segment boundary the
    /// segment nearer the vertex wins; at `t = 0` the first segment.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.ends.partition_point(|&e| e < t);
        self.segments.get(i).map_or(0.0, |s| s.val)
    }

    /// `∫_0^x V(t) dt`, exact.
    pub fn antiderivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.ends.partition_point(|&e| e < x);
        if i >= self.segments.len() {
            return self.prefix.last().copied().unwrap_or(0.0);
        }
        let start = if i == 0 { 0.0 } else { self.ends[i - 1] };
        let before = if i == 0 { 0.0 } else { self.prefix[i - 1] };
        before + (x - start) * self.segments[i].val
    }

    /// `∫_a^b V(t) dt`, exact.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    /// `∫ V_-^{γ+1/2}` over the edge.
    pub fn negative_norm(&self, gamma: f64) -> f64 {
        let p = gamma + 0.5;
        self.segments
            .iter()
            .filter(|s| s.val < 0.0)
            .map(|s| s.len * (-s.val).powf(p))
            .sum()
    }

    pub fn min_value(&self) -> f64 {
        self.segments.iter().map(|s| s.val).fold(0.0, f64::min)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.segments.iter().map(|s| s.val.abs()).fold(0.0, f64::max)
    }
}

/// Potential on the real line as a pair of profiles measured outward from
/// the origin: `left(t) = V(-t)`, `right(t) = V(t)` for `t > 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePotential {
    pub left: EdgePotential,
    pub right: EdgePotential,
}

impl LinePotential {
    pub fn new(left: EdgePotential, right: EdgePotential) -> Self {
        Self { left, right }
    }

    /// Constant well of the given depth on `[-width/2, width/2]`.
    pub fn centered_well(width: f64, value: f64) -> Result<Self> {
        let half = EdgePotential::from_pairs(&[(width / 2.0, value)])?;
        Ok(Self { left: half.clone(), right: half })
    }

    pub fn negative_norm(&self, gamma: f64) -> f64 {
        self.left.negative_norm(gamma) + self.right.negative_norm(gamma)
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_zero() && self.right.is_zero()
    }

    pub fn min_value(&self) -> f64 {
        self.left.min_value().min(self.right.min_value())
    }

    /// Profile on `[0, ∞)` of `V(x - offset)`; fails if the translate
    /// reaches below zero.
    pub fn translated(&self, offset: f64) -> Result<EdgePotential> {
        let extent = self.left.support();
        if !(offset >= extent) {
            return Err(Error::OffsetTooSmall { offset, extent });
        }
        let mut segments = Vec::new();
        if offset > extent {
            segments.push(Segment::new(offset - extent, 0.0));
        }
        segments.extend(self.left.segments().iter().rev().copied());
        segments.extend(self.right.segments().iter().copied());
        EdgePotential::new(segments)
    }
}

/// An [`EdgePotential`] per edge of a star graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    graph: StarGraph,
    per_edge: Vec<EdgePotential>,
}

impl PotentialField {
    pub fn new(graph: StarGraph, per_edge: Vec<EdgePotential>) -> Result<Self> {
        if per_edge.len() != graph.n_edges() {
            return Err(Error::EdgeCountMismatch {
                expected: graph.n_edges(),
                found: per_edge.len(),
            });
        }
        Ok(Self { graph, per_edge })
    }

    pub fn zero(graph: StarGraph) -> Self {
        Self { graph, per_edge: vec![EdgePotential::zero(); graph.n_edges()] }
    }

    pub fn graph(&self) -> StarGraph {
        self.graph
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn edges(&self) -> &[EdgePotential] {
        &self.per_edge
    }

    /// Restriction to edge `index` (0-based).
    pub fn edge(&self, index: usize) -> &EdgePotential {
        &self.per_edge[index]
    }

    pub fn is_radial(&self) -> bool {
        self.per_edge.windows(2).all(|w| w[0] == w[1])
    }

    pub fn max_support(&self) -> f64 {
        self.per_edge.iter().map(EdgePotential::support).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.per_edge.iter().map(EdgePotential::min_value).fold(0.0, f64::min)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.per_edge.iter().map(EdgePotential::max_abs_value).fold(0.0, f64::max)
    }

    /// Closed-form `∫_{Γ_N} V_-^{γ+1/2}` without range checks.
    pub(crate) fn negative_norm_unchecked(&self, gamma: f64) -> f64 {
        self.per_edge.iter().map(|e| e.negative_norm(gamma)).sum()
    }

    /// Parse the potential-field JSON document
    /// `{"n_edges": N, "edges": [[{"len": ℓ, "val": v}, ...], ...]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: FieldFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        file.into_field()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(FieldFile::from(self)).expect("field serializes")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub n_edges: usize,
    pub edges: Vec<Vec<Segment>>,
}

impl FieldFile {
    pub fn into_field(self) -> Result<PotentialField> {
        let graph = StarGraph::new(self.n_edges).map_err(|e| Error::Schema {
            path: "n_edges".into(),
            message: e.to_string(),
        })?;
        if self.edges.len() != self.n_edges {
            return Err(Error::Schema {
                path: "edges".into(),
                message: format!("expected {} edges, found {}", self.n_edges, self.edges.len()),
            });
        }
        let mut per_edge = Vec::with_capacity(self.n_edges);
        for (i, segs) in self.edges.into_iter().enumerate() {
            let edge = EdgePotential::new(segs).map_err(|e| match e {
                Error::InvalidSegment { index, len, .. } => {
                    let field = if !(len.is_finite() && len > 0.0) { "len" } else { "val" };
                    Error::Schema {
                        path: format!("edges[{i}][{index}].{field}"),
                        message: e.to_string(),
                    }
                }
                other => other,
            })?;
            per_edge.push(edge);
        }
        PotentialField::new(graph, per_edge)
    }
}

impl From<&PotentialField> for FieldFile {
    fn from(field: &PotentialField) -> Self {
        Self {
            n_edges: field.n_edges(),
            edges: field.edges().iter().map(|e| e.segments().to_vec()).collect(),
        }
    }
}

/// Field with `profile` on every edge.
pub fn radial_field(graph: StarGraph, profile: &EdgePotential) -> PotentialField {
    PotentialField { graph, per_edge: vec![profile.clone(); graph.n_edges()] }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransplantMode {
    /// Translate on the chosen edge only.
    SingleEdge,
    /// Translate on every edge (radial `V_a`).
    Radial,
}

/// Place `V(x - offset)` on edge `edge_index` (1-based) or, in radial mode,
/// on every edge. Other edges carry zero.
pub fn transplant(
    line: &LinePotential,
    graph: StarGraph,
    edge_index: usize,
    offset: f64,
    mode: TransplantMode,
) -> Result<PotentialField> {
    let n = graph.n_edges();
    if edge_index == 0 || edge_index > n {
        return Err(Error::EdgeIndexOutOfRange { index: edge_index, n_edges: n });
    }
    let moved = line.translated(offset)?;
    Ok(match mode {
        TransplantMode::Radial => radial_field(graph, &moved),
        TransplantMode::SingleEdge => {
            let mut field = PotentialField::zero(graph);
            field.per_edge[edge_index - 1] = moved;
            field
        }
    })
}

/// Even extension `Ṽ(-t) = Ṽ(t) = V(t)` to the line.
pub fn symmetric_extension(profile: &EdgePotential) -> LinePotential {
    LinePotential { left: profile.clone(), right: profile.clone() }
}

/// `∫_{Γ_N} V_-^{γ+1/2} dx`, exact for piecewise-constant fields.
pub fn potential_norm(field: &PotentialField, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.5) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    Ok(field.negative_norm_unchecked(gamma))
}

/// `V_λ(x) = λ² V(λx)`: each segment `(ℓ, v)` becomes `(ℓ/λ, λ² v)`.
///
/// Panics if `lambda` is not positive.
pub fn scale_potential(profile: &EdgePotential, lambda: f64) -> EdgePotential {
    assert!(lambda > 0.0 && lambda.is_finite(), "scale factor must be positive");
    let segs = profile
        .segments()
        .iter()
        .map(|s| Segment::new(s.len / lambda, lambda * lambda * s.val))
        .collect();
    EdgePotential::new(segs).expect("scaling preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ep(pairs: &[(f64, f64)]) -> EdgePotential {
        EdgePotential::from_pairs(pairs).unwrap()
    }

    #[test]
    fn canonical_form_merges_and_trims() {
        let p = ep(&[(1.0, -1.0), (0.5, -1.0), (0.2, 0.0), (0.3, 2.0), (1.0, 0.0)]);
        assert_eq!(p.segments(), &[Segment::new(1.5, -1.0), Segment::new(0.2, 0.0), Segment::new(0.3, 2.0)]);
        assert_eq!(p.support(), 2.0);
        assert!(ep(&[(3.0, 0.0)]).is_zero());
    }

    #[test]
    fn rejects_bad_segments() {
        assert!(matches!(
            EdgePotential::from_pairs(&[(1.0, -1.0), (0.0, 2.0)]),
            Err(Error::InvalidSegment { index: 1, .. })
        ));
        assert!(EdgePotential::from_pairs(&[(-1.0, 1.0)]).is_err());
        assert!(EdgePotential::from_pairs(&[(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn value_at_uses_segment_nearer_vertex_on_boundaries() {
        let p = ep(&[(1.0, -1.0), (1.0, -3.0)]);
        assert_eq!(p.value_at(0.0), -1.0);
        assert_eq!(p.value_at(1.0), -1.0);
        assert_eq!(p.value_at(1.5), -3.0);
        assert_eq!(p.value_at(2.0), -3.0);
        assert_eq!(p.value_at(2.5), 0.0);
    }

    #[test]
    fn integral_is_exact() {
        let p = ep(&[(1.0, -1.0), (1.0, -3.0)]);
        assert_eq!(p.integral(0.0, 2.0), -4.0);
        assert!((p.integral(0.5, 1.5) - (-0.5 - 1.5)).abs() < 1e-15);
        assert_eq!(p.integral(2.0, 10.0), 0.0);
    }

    #[test]
    fn radial_field_examples() {
        let g3 = StarGraph::new(3).unwrap();
        let f = radial_field(g3, &ep(&[(1.0, -1.0)]));
        assert_eq!(f.n_edges(), 3);
        assert!(f.is_radial());
        let f1 = radial_field(StarGraph::new(1).unwrap(), &ep(&[(0.3, 5.0)]));
        assert!(f1.is_radial());
        let f4 = radial_field(StarGraph::new(4).unwrap(), &ep(&[(0.5, -2.0), (0.5, -1.0)]));
        assert!(f4.edges().iter().all(|e| e.segments().len() == 2));
    }

    #[test]
    fn transplant_examples() {
        let well = LinePotential::centered_well(1.0, -1.0).unwrap();
        let g3 = StarGraph::new(3).unwrap();
        let f = transplant(&well, g3, 2, 5.0, TransplantMode::SingleEdge).unwrap();
        assert_eq!(f.edge(1).segments(), &[Segment::new(4.5, 0.0), Segment::new(1.0, -1.0)]);
        assert!(f.edge(0).is_zero() && f.edge(2).is_zero());
        assert!(!f.is_radial());

        assert!(matches!(
            transplant(&well, g3, 2, 0.3, TransplantMode::SingleEdge),
            Err(Error::OffsetTooSmall { .. })
        ));

        let r = transplant(&well, g3, 1, 5.0, TransplantMode::Radial).unwrap();
        assert!(r.is_radial());
        assert_eq!(r.edge(2).segments(), &[Segment::new(4.5, 0.0), Segment::new(1.0, -1.0)]);

        assert!(matches!(
            transplant(&well, g3, 4, 5.0, TransplantMode::SingleEdge),
            Err(Error::EdgeIndexOutOfRange { .. })
        ));
        let single = transplant(&well, StarGraph::new(1).unwrap(), 1, 5.0, TransplantMode::SingleEdge).unwrap();
        assert!(single.is_radial());
    }

    #[test]
    fn symmetric_extension_examples() {
        let l = symmetric_extension(&ep(&[(1.0, -1.0)]));
        assert_eq!(l.left, l.right);
        assert_eq!(l.negative_norm(0.5), 2.0);
        assert!(symmetric_extension(&EdgePotential::zero()).is_zero());
        let l2 = symmetric_extension(&ep(&[(0.5, -2.0), (0.5, -1.0)]));
        assert_eq!(l2.left.segments().len() + l2.right.segments().len(), 4);
    }

    #[test]
    fn potential_norm_examples() {
        let g2 = StarGraph::new(2).unwrap();
        let f = PotentialField::new(g2, vec![ep(&[(1.0, -1.0)]), EdgePotential::zero()]).unwrap();
        assert_eq!(potential_norm(&f, 0.5).unwrap(), 1.0);
        let f3 = radial_field(StarGraph::new(3).unwrap(), &ep(&[(2.0, -4.0)]));
        assert!((potential_norm(&f3, 1.5).unwrap() - 96.0).abs() < 1e-12);
        let pos = radial_field(g2, &ep(&[(2.0, 4.0)]));
        assert_eq!(potential_norm(&pos, 1.0).unwrap(), 0.0);
        assert!(matches!(potential_norm(&f, 0.4), Err(Error::GammaOutOfRange(_))));
    }

    #[test]
    fn scale_potential_examples() {
        assert_eq!(scale_potential(&ep(&[(1.0, -1.0)]), 2.0), ep(&[(0.5, -4.0)]));
        let p = ep(&[(0.7, -1.3), (0.2, 2.0)]);
        assert_eq!(scale_potential(&p, 1.0), p);
        assert_eq!(scale_potential(&ep(&[(2.0, -3.0)]), 0.5), ep(&[(4.0, -0.75)]));
    }

    #[test]
    fn grid_length_is_exact_multiple() {
        let g = GridSpec::with_length(0.005, 40.0, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(g.points_per_edge(), 8000);
        assert!(GridSpec::with_length(0.3, 1.0, BoundaryCondition::Dirichlet).is_err());
        assert!(GridSpec::new(0.1, 1, BoundaryCondition::Neumann).is_err());
        assert!(GridSpec::new(0.0, 10, BoundaryCondition::Neumann).is_err());
    }

    #[test]
    fn json_schema_round_trip_and_paths() {
        let text = r#"{"n_edges": 2, "edges": [[{"len": 1.0, "val": -1.0}], []]}"#;
        let f = PotentialField::from_json_str(text).unwrap();
        assert_eq!(f.n_edges(), 2);
        let back = PotentialField::from_json_str(&f.to_json_value().to_string()).unwrap();
        assert_eq!(back, f);

        let bad = r#"{"n_edges": 2, "edges": [[{"len": 1.0, "val": -1.0}], [{"len": -2.0, "val": 1.0}]]}"#;
        match PotentialField::from_json_str(bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "edges[1][0].len"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_type = r#"{"n_edges": 1, "edges": [[{"len": "x", "val": -1.0}]]}"#;
        match PotentialField::from_json_str(bad_type) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "edges[0][0].len"),
            other => panic!("unexpected {other:?}"),
        }
        let short = r#"{"n_edges": 3, "edges": [[]]}"#;
        assert!(matches!(PotentialField::from_json_str(short), Err(Error::Schema { path, .. }) if path == "edges"));
    }

    fn arb_profile() -> impl Strategy<Value = EdgePotential> {
        prop::collection::vec((0.05f64..2.0, -8.0f64..3.0), 0..5)
            .prop_map(|v| EdgePotential::from_pairs(&v).unwrap())
    }

    proptest! {
        #[test]
        fn norm_scales_as_lambda_to_two_gamma(p in arb_profile(), lambda in 0.1f64..10.0, gamma in 0.5f64..3.0) {
            let g = StarGraph::new(3).unwrap();
            let f = PotentialField::new(g, vec![p.clone(), EdgePotential::zero(), p.clone()]).unwrap();
            let fs = PotentialField::new(g, f.edges().iter().map(|e| scale_potential(e, lambda)).collect()).unwrap();
            let lhs = potential_norm(&fs, gamma).unwrap();
            let rhs = lambda.powf(2.0 * gamma) * potential_norm(&f, gamma).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        }

        #[test]
        fn extension_restricts_to_identity(p in arb_profile()) {
            prop_assert_eq!(symmetric_extension(&p).right, p);
        }

        #[test]
        fn transplant_radial_iff_single_edge_graph(n in 1usize..6, a in 2.0f64..10.0) {
            let well = LinePotential::centered_well(1.0, -1.0).unwrap();
            let f = transplant(&well, StarGraph::new(n).unwrap(), 1, a, TransplantMode::SingleEdge).unwrap();
            prop_assert_eq!(f.is_radial(), n == 1);
        }
    }
}
