//! Mass-lumped P1 Galerkin pencils `(K + P, M)` for the form
//! `∫ |ψ'|² + V|ψ|²` on star graphs, half-lines, the line and their cuts.
//!
//! Every operator is a set of [`Block`]s. A block has an optional vertex
//! unknown and a list of tridiagonal chains, one per edge; the first node of
//! each chain couples to the vertex. Node `i` of a chain sits at `(i+1)·h`.
//!
//! Kinetic part: interior diagonal `2/h`, off-diagonal `-1/h`, vertex
//! diagonal `k/h` for `k` attached chains. Mass: `h` in the interior,
//! `h/2` at a kept far end, `k·h/2` at the vertex. The potential enters the
//! diagonal as the exact integral of `V` over the node's dual cell
//! `[x - h/2, x + h/2] ∩ [0, L]`; at the vertex the half cells of all
//! attached edges are summed. With this rule the star form restricted to
//! matching vertex values is literally the form of any cut operator, and a
//! radial star splits exactly into Neumann and Dirichlet half-line blocks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, EdgePotential, GridSpec, LinePotential, PotentialField, StarGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Star(usize),
    HalfLine(BoundaryCondition),
    Line,
    DirectSum(Vec<Structure>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex {
    pub diag: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chain {
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples nodes `i` and `i + 1`.
    pub offdiag: Vec<f64>,
    pub mass: Vec<f64>,
    /// Coefficient linking node 0 to the vertex (unused without a vertex).
    pub coupling: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub vertex: Option<Vertex>,
    pub chains: Vec<Chain>,
    /// Largest absolute diagonal entry, used for pivot thresholds.
    pub scale: f64,
    /// Smallest potential value seen by any node (dual-cell average).
    pub potential_floor: f64,
}

impl Block {
    fn new(vertex: Option<Vertex>, chains: Vec<Chain>, potential_floor: f64) -> Self {
        let scale = chains
            .iter()
            .flat_map(|c| c.diag.iter())
            .chain(vertex.iter().map(|v| &v.diag))
            .fold(1.0f64, |m, d| m.max(d.abs()));
        Self { vertex, chains, scale, potential_floor }
    }

    /// Number of unknowns; the vertex (if any) comes first, then the chains.
    pub fn dim(&self) -> usize {
        self.vertex.is_some() as usize + self.chains.iter().map(Chain::len).sum::<usize>()
    }

    fn offset(&self) -> usize {
        self.vertex.is_some() as usize
    }

    /// `y = K x` with the flat layout described by [`Block::dim`].
    pub fn stiffness_apply(&self, x: &[f64], y: &mut [f64]) {
        let off = self.offset();
        let x0 = if self.vertex.is_some() { x[0] } else { 0.0 };
        let mut acc0 = self.vertex.map_or(0.0, |v| v.diag * x0);
        let mut start = off;
        for c in &self.chains {
            let n = c.len();
            let xs = &x[start..start + n];
            let ys = &mut y[start..start + n];
            for i in 0..n {
                let mut s = c.diag[i] * xs[i];
                if i > 0 {
                    s += c.offdiag[i - 1] * xs[i - 1];
                }
                if i + 1 < n {
                    s += c.offdiag[i] * xs[i + 1];
                }
                ys[i] = s;
            }
            if self.vertex.is_some() && n > 0 {
                ys[0] += c.coupling * x0;
                acc0 += c.coupling * xs[0];
            }
            start += n;
        }
        if self.vertex.is_some() {
            y[0] = acc0;
        }
    }

    /// Diagonal of the mass matrix in the flat layout.
    pub fn mass_diagonal(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.dim());
        if let Some(v) = self.vertex {
            m.push(v.mass);
        }
        for c in &self.chains {
            m.extend_from_slice(&c.mass);
        }
        m
    }
}

/// A generalized symmetric eigenproblem `K ψ = E M ψ` with diagonal `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub structure: Structure,
    pub grid: GridSpec,
    pub blocks: Vec<Block>,
}

impl DiscreteOperator {
    pub fn direct_sum(parts: Vec<DiscreteOperator>) -> Self {
        assert!(!parts.is_empty(), "direct sum of no operators");
        let grid = parts[0].grid;
        let mut structures = Vec::with_capacity(parts.len());
        let mut blocks = Vec::new();
        for p in parts {
            structures.push(p.structure);
            blocks.extend(p.blocks);
        }
        Self { structure: Structure::DirectSum(structures), grid, blocks }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Block::dim).sum()
    }

    /// Lower bound on the spectrum: the smallest dual-cell potential value.
    pub fn potential_floor(&self) -> f64 {
        self.blocks.iter().map(|b| b.potential_floor).fold(0.0, f64::min)
    }

    pub fn scale(&self) -> f64 {
        self.blocks.iter().map(|b| b.scale).fold(1.0, f64::max)
    }

    pub fn dump(&self) -> OperatorDump {
        OperatorDump {
            structure: self.structure.clone(),
            step: self.grid.step(),
            points_per_edge: self.grid.points_per_edge(),
            far_bc: self.grid.far_bc(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDump {
                    vertex: b.vertex.map(|v| VertexDump {
                        diag: v.diag,
                        mass: v.mass,
                        couplings: b.chains.iter().map(|c| c.coupling).collect(),
                    }),
                    edges: b
                        .chains
                        .iter()
                        .map(|c| ChainDump {
                            diag: c.diag.clone(),
                            offdiag: c.offdiag.clone(),
                            mass: c.mass.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Debug dump for diffing operators across implementations.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorDump {
    pub structure: Structure,
    pub step: f64,
    pub points_per_edge: usize,
    pub far_bc: BoundaryCondition,
    pub blocks: Vec<BlockDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockDump {
    pub vertex: Option<VertexDump>,
    pub edges: Vec<ChainDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexDump {
    pub diag: f64,
    pub mass: f64,
    pub couplings: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDump {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Number of chain nodes per edge for a grid.
pub fn chain_len(grid: &GridSpec) -> usize {
    match grid.far_bc() {
        BoundaryCondition::Neumann => grid.points_per_edge(),
        BoundaryCondition::Dirichlet => grid.points_per_edge() - 1,
    }
}

/// Dual cell `[a, b]` of chain node `i` (at `(i+1)·h`).
pub fn node_dual_cell(grid: &GridSpec, i: usize) -> (f64, f64) {
    let h = grid.step();
    let x = (i + 1) as f64 * h;
    (x - 0.5 * h, (x + 0.5 * h).min(grid.edge_length()))
}

/// Half cell `[0, h/2]` each edge contributes to the vertex.
pub fn vertex_half_cell(grid: &GridSpec) -> (f64, f64) {
    (0.0, 0.5 * grid.step())
}

fn check_support(edge: usize, profile: &EdgePotential, grid: &GridSpec) -> Result<()> {
    let length = grid.edge_length();
    let support = profile.support();
    if support > length * (1.0 + 1e-12) {
        return Err(Error::SupportExceedsGrid { edge, support, length });
    }
    Ok(())
}

fn edge_chain(profile: &EdgePotential, grid: &GridSpec, floor: &mut f64) -> Chain {
    let h = grid.step();
    let n = chain_len(grid);
    let neumann_end = grid.far_bc() == BoundaryCondition::Neumann;
    let mut diag = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for i in 0..n {
        let last = neumann_end && i + 1 == n;
        let (a, b) = node_dual_cell(grid, i);
        let m = if last { 0.5 * h } else { h };
        let pot = profile.integral(a, b);
        *floor = floor.min(pot / m);
        diag.push(if last { 1.0 / h } else { 2.0 / h } + pot);
        mass.push(m);
    }
    Chain { diag, offdiag: vec![-1.0 / h; n.saturating_sub(1)], mass, coupling: -1.0 / h }
}

/// Block with a shared vertex joining one chain per profile.
fn vertex_block(profiles: &[&EdgePotential], grid: &GridSpec) -> Block {
    let h = grid.step();
    let k = profiles.len() as f64;
    let (a, b) = vertex_half_cell(grid);
    let pot: f64 = profiles.iter().map(|p| p.integral(a, b)).sum();
    let mass = 0.5 * k * h;
    let mut floor = pot / mass;
    let chains = profiles.iter().map(|p| edge_chain(p, grid, &mut floor)).collect();
    Block::new(Some(Vertex { diag: k / h + pot, mass }), chains, floor)
}

fn check_field(graph: StarGraph, field: &PotentialField, grid: &GridSpec) -> Result<()> {
    if field.n_edges() != graph.n_edges() {
        return Err(Error::EdgeCountMismatch { expected: graph.n_edges(), found: field.n_edges() });
    }
    for (j, e) in field.edges().iter().enumerate() {
        check_support(j + 1, e, grid)?;
    }
    Ok(())
}

/// Kirchhoff star: one vertex unknown shared by all `N` edges.
pub fn assemble_star(graph: StarGraph, field: &PotentialField, grid: &GridSpec) -> Result<DiscreteOperator> {
    check_field(graph, field, grid)?;
    let profiles: Vec<&EdgePotential> = field.edges().iter().collect();
    Ok(DiscreteOperator {
        structure: Structure::Star(graph.n_edges()),
        grid: *grid,
        blocks: vec![vertex_block(&profiles, grid)],
    })
}

/// Half-line with a Neumann (boundary node kept) or Dirichlet (boundary
/// value eliminated) condition at the origin.
pub fn assemble_half_line(
    profile: &EdgePotential,
    grid: &GridSpec,
    bc: BoundaryCondition,
) -> Result<DiscreteOperator> {
    check_support(1, profile, grid)?;
    let block = match bc {
        BoundaryCondition::Neumann => vertex_block(&[profile], grid),
        BoundaryCondition::Dirichlet => {
            let mut floor = 0.0;
            let chain = edge_chain(profile, grid, &mut floor);
            Block::new(None, vec![chain], floor)
        }
    };
    Ok(DiscreteOperator { structure: Structure::HalfLine(bc), grid: *grid, blocks: vec![block] })
}

/// Line on `2n + 1` nodes; the center node plays the vertex, chain 0 is
/// `x > 0` and chain 1 is `x < 0`.
pub fn assemble_line(line: &LinePotential, grid: &GridSpec) -> Result<DiscreteOperator> {
    check_support(1, &line.right, grid)?;
    check_support(2, &line.left, grid)?;
    Ok(DiscreteOperator {
        structure: Structure::Line,
        grid: *grid,
        blocks: vec![vertex_block(&[&line.right, &line.left], grid)],
    })
}

/// Cut of Γ_{2n} into `n` lines pairing edge `i` (`x > 0`) with edge `n+i`
/// (`x < 0`).
pub fn assemble_cut_even(
    graph: StarGraph,
    field: &PotentialField,
    grid: &GridSpec,
) -> Result<Vec<DiscreteOperator>> {
    let n_edges = graph.n_edges();
    if !n_edges.is_multiple_of(2) {
        return Err(Error::OddEdgeCount(n_edges));
    }
    check_field(graph, field, grid)?;
    let n = n_edges / 2;
    (0..n)
        .map(|i| {
            let line = LinePotential::new(field.edge(n + i).clone(), field.edge(i).clone());
            assemble_line(&line, grid)
        })
        .collect()
}

/// Split Γ_N into a star on the edges in `subset` (1-based indices) and a
/// star on the rest, each with its own vertex. A one-edge star is the
/// Neumann half-line.
pub fn assemble_cut_split(
    graph: StarGraph,
    field: &PotentialField,
    grid: &GridSpec,
    subset: &[usize],
) -> Result<(DiscreteOperator, DiscreteOperator)> {
    check_field(graph, field, grid)?;
    let n = graph.n_edges();
    let mut inside = vec![false; n];
    for &j in subset {
        if j == 0 || j > n {
            return Err(Error::EdgeIndexOutOfRange { index: j, n_edges: n });
        }
        inside[j - 1] = true;
    }
    let k = inside.iter().filter(|&&b| b).count();
    if k == 0 || k == n {
        return Err(Error::EmptySplit);
    }
    let part = |want: bool| -> Result<DiscreteOperator> {
        let edges: Vec<&EdgePotential> =
            (0..n).filter(|&j| inside[j] == want).map(|j| field.edge(j)).collect();
        if edges.len() == 1 {
            assemble_half_line(edges[0], grid, BoundaryCondition::Neumann)
        } else {
            Ok(DiscreteOperator {
                structure: Structure::Star(edges.len()),
                grid: *grid,
                blocks: vec![vertex_block(&edges, grid)],
            })
        }
    };
    Ok((part(true)?, part(false)?))
}
