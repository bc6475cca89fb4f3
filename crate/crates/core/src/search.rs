//! Projected gradient ascent of the Lieb-Thirring ratio over cellwise
//! constant, nonpositive potentials.
//!
//! Eigenvalue derivatives are exact for the discrete pencil: the potential
//! enters only through dual-cell integrals, so `∂E_k/∂V_c` is the mass of
//! `ψ_k²` on the overlap of each node's dual cell with cell `c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{assemble_half_line, assemble_star, chain_len, node_dual_cell, vertex_half_cell};
use crate::eigensolve::{eigenvector_cluster, negative_spectrum, riesz_mean, EdgeFunction, SolverTolerances, Spectrum};
use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, EdgePotential, GridSpec, PotentialField, Segment, StarGraph};

/// Values of a potential that is constant on cells `[c·w, (c+1)·w]` of
/// every edge and zero beyond the last cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellField {
    #[serde(skip)]
    graph: StarGraph,
    cell_width: f64,
    values: Vec<Vec<f64>>,
}

impl CellField {
    pub fn new(graph: StarGraph, cell_width: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(cell_width > 0.0 && cell_width.is_finite()) {
            return Err(Error::InvalidConfig(format!("cell width {cell_width}")));
        }
        if values.len() != graph.n_edges() {
            return Err(Error::EdgeCountMismatch { expected: graph.n_edges(), found: values.len() });
        }
        let m = values[0].len();
        if m == 0 || values.iter().any(|v| v.len() != m) {
            return Err(Error::InvalidConfig("every edge needs the same positive number of cells".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("cell values must be finite".into()));
        }
        Ok(Self { graph, cell_width, values })
    }

    pub fn zeros(graph: StarGraph, cells_per_edge: usize, cell_width: f64) -> Result<Self> {
        Self::new(graph, cell_width, vec![vec![0.0; cells_per_edge]; graph.n_edges()])
    }

    /// Same cell profile on every edge.
    pub fn radial(graph: StarGraph, cell_width: f64, profile: Vec<f64>) -> Result<Self> {
        Self::new(graph, cell_width, vec![profile; graph.n_edges()])
    }

    pub fn graph(&self) -> StarGraph {
        self.graph
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn cells_per_edge(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn is_radial(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    fn edge_potential(&self, vals: &[f64]) -> EdgePotential {
        let segs = vals.iter().map(|&v| Segment::new(self.cell_width, v)).collect();
        EdgePotential::new(segs).expect("cell values are finite and widths positive")
    }

    pub fn to_field(&self) -> PotentialField {
        let edges = self.values.iter().map(|v| self.edge_potential(v)).collect();
        PotentialField::new(self.graph, edges).expect("one profile per edge")
    }

    /// `∫ V_-^{γ+1/2}`.
    pub fn negative_norm(&self, gamma: f64) -> f64 {
        self.values.iter().flatten().map(|&v| self.cell_width * (-v).max(0.0).powf(gamma + 0.5)).sum()
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        let r = self.cell_width / grid.step();
        if (r - r.round()).abs() > 1e-9 * r.max(1.0) || r.round() < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "cell width {} is not a multiple of the grid step {}",
                self.cell_width,
                grid.step()
            )));
        }
        let extent = self.cell_width * self.cells_per_edge() as f64;
        if extent > grid.edge_length() * (1.0 + 1e-12) {
            return Err(Error::SupportExceedsGrid { edge: 1, support: extent, length: grid.edge_length() });
        }
        Ok(())
    }
}

/// Overlaps of node dual cells with potential cells.
struct CellMap {
    per_node: Vec<Vec<(usize, f64)>>,
    vertex: Vec<(usize, f64)>,
    cells: usize,
}

impl CellMap {
    fn new(grid: &GridSpec, cell_width: f64, cells: usize) -> Self {
        let overlaps = |(a, b): (f64, f64)| -> Vec<(usize, f64)> {
            let first = (a / cell_width).floor() as usize;
            (first..cells)
                .take_while(|&c| c as f64 * cell_width < b)
                .filter_map(|c| {
                    let lo = a.max(c as f64 * cell_width);
                    let hi = b.min((c + 1) as f64 * cell_width);
                    (hi > lo).then_some((c, hi - lo))
                })
                .collect()
        };
        Self {
            per_node: (0..chain_len(grid)).map(|i| overlaps(node_dual_cell(grid, i))).collect(),
            vertex: overlaps(vertex_half_cell(grid)),
            cells,
        }
    }

    /// `Σ_i ψ_i² |D_i ∩ C_{e,c}|` accumulated into `out[e][c]`.
    fn add_density(&self, psi: &EdgeFunction, weight: f64, out: &mut [Vec<f64>]) {
        for (e, values) in psi.edges.iter().enumerate() {
            let row = &mut out[e];
            for (i, v) in values.iter().enumerate() {
                for &(c, ov) in &self.per_node[i] {
                    row[c] += weight * v * v * ov;
                }
            }
            if let Some(v0) = psi.vertex_value {
                for &(c, ov) in &self.vertex {
                    row[c] += weight * v0 * v0 * ov;
                }
            }
        }
    }
}

/// Ratio, its constituents and its gradient with respect to cell values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioGradient {
    pub ratio: f64,
    pub trace: f64,
    pub norm: f64,
    /// `∂R/∂V_{e,c}` indexed `[edge][cell]`.
    pub gradient: Vec<Vec<f64>>,
}

/// Groups of indices whose eigenvalues lie within `gap` of their neighbor.
fn clusters(spec: &Spectrum, gap: impl Fn(f64) -> f64) -> Vec<(usize, usize)> {
    let ev = &spec.eigenvalues;
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=ev.len() {
        if k == ev.len() || ev[k] - ev[k - 1] > gap(ev[k - 1]) {
            out.push((start, k));
            start = k;
        }
    }
    out
}

fn quotient_gradient(cells: &CellField, gamma: f64, trace: f64, dtrace: Vec<Vec<f64>>) -> Result<RatioGradient> {
    let norm = cells.negative_norm(gamma);
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let w = cells.cell_width;
    let gradient = dtrace
        .into_iter()
        .zip(&cells.values)
        .map(|(dt, vals)| {
            dt.into_iter()
                .zip(vals)
                .map(|(dt, &v)| {
                    let dnorm = if v <= 0.0 { -(gamma + 0.5) * w * (-v).powf(gamma - 0.5) } else { 0.0 };
                    (dt * norm - trace * dnorm) / (norm * norm)
                })
                .collect()
        })
        .collect();
    Ok(RatioGradient { ratio: trace / norm, trace, norm, gradient })
}

/// `∂ tr H_-^γ / ∂V` summed over eigenvalue groups; `group_gap` decides
/// which neighbors form one group, `strict` rejects groups of size > 1.
fn trace_gradient(
    op: &crate::discretize::DiscreteOperator,
    spec: &Spectrum,
    map: &CellMap,
    gamma: f64,
    tol: SolverTolerances,
    strict: bool,
    weight: f64,
    out: &mut [Vec<f64>],
) -> Result<()> {
    let close = 10.0 * tol.tol_eig;
    let group_gap = |e: f64| if strict { close } else { 1e-7 * e.abs().max(1.0) };
    for (a, b) in clusters(spec, group_gap) {
        let ev = &spec.eigenvalues[a..b];
        if strict && b - a > 1 {
            let gap = ev[1] - ev[0];
            return Err(Error::DegenerateSpectrum { eigenvalue: ev[0], gap });
        }
        let mean = ev.iter().sum::<f64>() / ev.len() as f64;
        // d|E|^γ/dV = -γ|E|^{γ-1} dE/dV
        let scale = -weight * gamma * (-mean).powf(gamma - 1.0);
        for psi in eigenvector_cluster(op, mean, b - a, tol)? {
            map.add_density(&psi, scale, out);
        }
    }
    Ok(())
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.5 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

fn gradient_on_star(
    cells: &CellField,
    gamma: f64,
    grid: &GridSpec,
    tol: SolverTolerances,
    strict: bool,
) -> Result<RatioGradient> {
    validate_gamma(gamma)?;
    cells.check_grid(grid)?;
    let op = assemble_star(cells.graph, &cells.to_field(), grid)?;
    let spec = negative_spectrum(&op, tol)?;
    let map = CellMap::new(grid, cells.cell_width, cells.cells_per_edge());
    let mut dtrace = vec![vec![0.0; map.cells]; cells.graph.n_edges()];
    trace_gradient(&op, &spec, &map, gamma, tol, strict, 1.0, &mut dtrace)?;
    quotient_gradient(cells, gamma, riesz_mean(&spec, gamma), dtrace)
}

/// Gradient of the ratio on the star by first-order perturbation of each
/// eigenvalue. Fails with [`Error::DegenerateSpectrum`] when two
/// eigenvalues are within `10·tol_eig`.
pub fn ratio_gradient(cells: &CellField, gamma: f64, grid: &GridSpec, tol: SolverTolerances) -> Result<RatioGradient> {
    gradient_on_star(cells, gamma, grid, tol, true)
}

/// Like [`ratio_gradient`] but differentiates the sum over each cluster of
/// nearly equal eigenvalues, which is smooth where single eigenvalues are
/// not.
pub fn ratio_gradient_clustered(
    cells: &CellField,
    gamma: f64,
    grid: &GridSpec,
    tol: SolverTolerances,
) -> Result<RatioGradient> {
    gradient_on_star(cells, gamma, grid, tol, false)
}

/// Gradient for a radial cell field through the half-line reduction
/// `R = (T_Neu + (N-1) T_Dir) / (N I_half)`. Each edge receives `1/N` of
/// the derivative with respect to the shared profile, which is the star
/// gradient restricted to radial directions.
pub fn ratio_gradient_radial(
    cells: &CellField,
    gamma: f64,
    grid: &GridSpec,
    tol: SolverTolerances,
) -> Result<RatioGradient> {
    validate_gamma(gamma)?;
    if !cells.is_radial() {
        return Err(Error::Unsupported("non-radial cell fields in the radial reduction"));
    }
    cells.check_grid(grid)?;
    let n = cells.graph.n_edges();
    let profile = cells.edge_potential(&cells.values[0]);
    let map = CellMap::new(grid, cells.cell_width, cells.cells_per_edge());
    let mut dprofile = vec![vec![0.0; map.cells]];
    let neu = assemble_half_line(&profile, grid, BoundaryCondition::Neumann)?;
    let neu_spec = negative_spectrum(&neu, tol)?;
    trace_gradient(&neu, &neu_spec, &map, gamma, tol, false, 1.0, &mut dprofile)?;
    let mut trace = riesz_mean(&neu_spec, gamma);
    if n > 1 {
        let dir = assemble_half_line(&profile, grid, BoundaryCondition::Dirichlet)?;
        let dir_spec = negative_spectrum(&dir, tol)?;
        let m = (n - 1) as f64;
        trace_gradient(&dir, &dir_spec, &map, gamma, tol, false, m, &mut dprofile)?;
        trace += m * riesz_mean(&dir_spec, gamma);
    }
    // every edge carries the profile, so the per-edge share of the
    // profile derivative is 1/N of it
    let share: Vec<f64> = dprofile.remove(0).into_iter().map(|d| d / n as f64).collect();
    quotient_gradient(cells, gamma, trace, vec![share; n])
}

/// Ratio alone; radial fields may be evaluated through half-lines.
fn ratio_value(cells: &CellField, gamma: f64, grid: &GridSpec, tol: SolverTolerances, radial: bool) -> Result<f64> {
    let norm = cells.negative_norm(gamma);
    if norm == 0.0 {
        return Ok(0.0);
    }
    let trace = if radial {
        let profile = cells.edge_potential(&cells.values[0]);
        let n = cells.graph.n_edges();
        let neu = negative_spectrum(&assemble_half_line(&profile, grid, BoundaryCondition::Neumann)?, tol)?;
        let mut t = riesz_mean(&neu, gamma);
        if n > 1 {
            let dir = negative_spectrum(&assemble_half_line(&profile, grid, BoundaryCondition::Dirichlet)?, tol)?;
            t += (n - 1) as f64 * riesz_mean(&dir, gamma);
        }
        t
    } else {
        riesz_mean(&negative_spectrum(&assemble_star(cells.graph, &cells.to_field(), grid)?, tol)?, gamma)
    };
    Ok(trace / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub cells_per_edge: usize,
    /// Defaults to four grid steps.
    pub cell_width: Option<f64>,
    pub max_iters: usize,
    /// First trial step, measured in potential units along the gradient
    /// normalized to unit max-norm.
    pub step_init: f64,
    pub step_shrink: f64,
    pub step_grow: f64,
    pub tol_grad: f64,
    pub restarts: usize,
    /// Restrict to radial fields and search in the half-line reduction.
    pub symmetrize: bool,
    pub seed: u64,
    /// Lower bound `-depth_cap` on cell values; defaults to `0.01/h²`,
    /// beyond which the discrete ratio drifts from the continuum one.
    pub depth_cap: Option<f64>,
    /// Depth scale of the random initial bumps.
    pub init_depth: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            cells_per_edge: 100,
            cell_width: None,
            max_iters: 400,
            step_init: 1.0,
            step_shrink: 0.5,
            step_grow: 1.5,
            tol_grad: 1e-9,
            restarts: 16,
            symmetrize: false,
            seed: 0,
            depth_cap: None,
            init_depth: 10.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.cells_per_edge == 0 {
            return bad("cells_per_edge must be at least 1");
        }
        if !(self.step_init > 0.0) {
            return bad("step_init must be positive");
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return bad("step_shrink must lie in (0, 1)");
        }
        if !(self.step_grow >= 1.0) {
            return bad("step_grow must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if !(self.init_depth > 0.0) {
            return bad("init_depth must be positive");
        }
        if matches!(self.cell_width, Some(w) if !(w > 0.0)) || matches!(self.depth_cap, Some(d) if !(d > 0.0)) {
            return bad("cell_width and depth_cap must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradTol,
    MaxIters,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub best_ratio: f64,
    pub iterations: usize,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub gamma: f64,
    pub n_edges: usize,
    pub best_cells: CellField,
    #[serde(skip)]
    pub best_field: PotentialField,
    pub best_ratio: f64,
    /// `(iteration, ratio)` of the winning restart.
    pub iterate_trace: Vec<(usize, f64)>,
    pub terminated_by: Termination,
    pub degenerate_warnings: usize,
    pub restarts: Vec<RestartSummary>,
}

impl SearchResult {
    pub fn trace_tsv(&self) -> String {
        let mut out = String::from("iteration\tratio\n");
        for (i, r) in &self.iterate_trace {
            out.push_str(&format!("{i}\t{r}\n"));
        }
        out
    }
}

struct Run {
    cells: CellField,
    ratio: f64,
    trace: Vec<(usize, f64)>,
    terminated_by: Termination,
    degenerate: usize,
    seed: u64,
}

fn random_start(graph: StarGraph, m: usize, width: f64, cfg: &SearchConfig, cap: f64, rng: &mut ChaCha8Rng) -> CellField {
    let rows = if cfg.symmetrize { 1 } else { graph.n_edges() };
    let mut values = vec![vec![0.0; m]; rows];
    let bumps = rng.random_range(1..=3usize);
    for _ in 0..bumps {
        let e = rng.random_range(0..rows);
        let len = rng.random_range(1..=(m / 4).max(1));
        let start = rng.random_range(0..=m - len);
        let depth = rng.random_range(0.05..1.0) * cfg.init_depth.min(cap);
        for v in &mut values[e][start..start + len] {
            *v = (*v - depth).max(-cap);
        }
    }
    if cfg.symmetrize {
        values = vec![values.remove(0); graph.n_edges()];
    }
    CellField::new(graph, width, values).expect("shape is consistent")
}

fn project(values: &mut [Vec<f64>], cap: f64) {
    for v in values.iter_mut().flatten() {
        *v = v.clamp(-cap, 0.0);
    }
}

fn run_restart(
    graph: StarGraph,
    gamma: f64,
    cfg: &SearchConfig,
    grid: &GridSpec,
    tol: SolverTolerances,
    width: f64,
    cap: f64,
    seed: u64,
) -> Result<Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = cfg.cells_per_edge;
    let mut cells = random_start(graph, m, width, cfg, cap, &mut rng);
    let mut ratio = ratio_value(&cells, gamma, grid, tol, cfg.symmetrize)?;
    let mut trace = vec![(0, ratio)];
    let mut step = cfg.step_init;
    let mut degenerate = 0;
    let mut terminated_by = Termination::MaxIters;
    const ARMIJO: f64 = 1e-4;

    for iter in 1..=cfg.max_iters {
        let grad = if cfg.symmetrize {
            ratio_gradient_radial(&cells, gamma, grid, tol)
        } else {
            ratio_gradient_clustered(&cells, gamma, grid, tol)
        };
        let grad = match grad {
            Ok(g) => g.gradient,
            Err(Error::NoConvergence { .. }) | Err(Error::DegenerateSpectrum { .. }) => {
                degenerate += 1;
                let mut values = cells.values.clone();
                let rows = if cfg.symmetrize { 1 } else { values.len() };
                for row in values.iter_mut().take(rows) {
                    for v in row.iter_mut() {
                        *v += rng.random_range(-1.0..1.0) * cfg.step_init / 100.0;
                    }
                }
                if cfg.symmetrize {
                    values = vec![values[0].clone(); graph.n_edges()];
                }
                project(&mut values, cap);
                cells = CellField::new(graph, width, values)?;
                ratio = ratio_value(&cells, gamma, grid, tol, cfg.symmetrize)?;
                trace.push((iter, ratio));
                continue;
            }
            Err(Error::ZeroNorm) => {
                terminated_by = Termination::GradTol;
                break;
            }
            Err(e) => return Err(e),
        };
        // projected gradient: stationary when no feasible ascent remains
        let mut pg = 0.0f64;
        for (row, grow) in cells.values.iter().zip(&grad) {
            for (&v, &g) in row.iter().zip(grow) {
                pg = pg.max(((v + g).clamp(-cap, 0.0) - v).abs());
            }
        }
        if pg <= cfg.tol_grad {
            terminated_by = Termination::GradTol;
            break;
        }
        let gmax = grad.iter().flatten().fold(0.0f64, |a, g| a.max(g.abs()));
        let mut accepted = false;
        while step >= 1e-12 * cap.max(1.0) {
            let mut values = cells.values.clone();
            for (row, grow) in values.iter_mut().zip(&grad) {
                for (v, g) in row.iter_mut().zip(grow) {
                    *v += step * g / gmax;
                }
            }
            project(&mut values, cap);
            let mut predicted = 0.0;
            for ((new, old), grow) in values.iter().zip(&cells.values).zip(&grad) {
                for ((a, b), g) in new.iter().zip(old).zip(grow) {
                    predicted += g * (a - b);
                }
            }
            let trial = CellField::new(graph, width, values)?;
            let r = ratio_value(&trial, gamma, grid, tol, cfg.symmetrize)?;
            if r >= ratio + ARMIJO * predicted && r > ratio {
                cells = trial;
                ratio = r;
                step *= cfg.step_grow;
                accepted = true;
                break;
            }
            step *= cfg.step_shrink;
        }
        if !accepted {
            terminated_by = Termination::StepUnderflow;
            break;
        }
        trace.push((iter, ratio));
    }
    Ok(Run { cells, ratio, trace, terminated_by, degenerate, seed })
}

/// Maximize `R_γ` on Γ_N over cell fields, restarting from seeded random
/// starts in parallel; the best restart wins, ties going to the lower
/// seed.
pub fn maximize_ratio(graph: StarGraph, gamma: f64, config: &SearchConfig, grid: &GridSpec) -> Result<SearchResult> {
    maximize_ratio_with(graph, gamma, config, grid, SolverTolerances::default())
}

pub fn maximize_ratio_with(
    graph: StarGraph,
    gamma: f64,
    config: &SearchConfig,
    grid: &GridSpec,
    tol: SolverTolerances,
) -> Result<SearchResult> {
    validate_gamma(gamma)?;
    config.validate()?;
    tol.validate()?;
    let h = grid.step();
    let width = config.cell_width.unwrap_or(4.0 * h);
    let cap = config.depth_cap.unwrap_or(0.01 / (h * h));
    CellField::zeros(graph, config.cells_per_edge, width)?.check_grid(grid)?;

    let runs = (0..config.restarts as u64)
        .into_par_iter()
        .map(|r| run_restart(graph, gamma, config, grid, tol, width, cap, config.seed.wrapping_add(r)))
        .collect::<Result<Vec<Run>>>()?;
    let degenerate_warnings = runs.iter().map(|r| r.degenerate).sum();
    let restarts = runs
        .iter()
        .map(|r| RestartSummary {
            seed: r.seed,
            best_ratio: r.ratio,
            iterations: r.trace.last().map_or(0, |t| t.0),
            terminated_by: r.terminated_by,
        })
        .collect();
    let best = runs
        .into_iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio).then(b.seed.cmp(&a.seed)))
        .expect("at least one restart");
    Ok(SearchResult {
        gamma,
        n_edges: graph.n_edges(),
        best_field: best.cells.to_field(),
        best_cells: best.cells,
        best_ratio: best.ratio,
        iterate_trace: best.trace,
        terminated_by: best.terminated_by,
        degenerate_warnings,
        restarts,
    })
}
