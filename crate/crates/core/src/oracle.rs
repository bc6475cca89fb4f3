//! Bound states of piecewise-constant potentials from the secular
//! equation, independent of any discretization.
//!
//! On each edge the solution of `-u'' + Vu = -κ²u` decaying at infinity is
//! propagated from the end of the support back to the vertex with 2×2
//! transfer matrices. With `m_j(κ) = u_j'(0)/u_j(0)`, Kirchhoff states
//! solve `S(κ) = Σ_j m_j(κ) = 0`. `S` is strictly decreasing in `κ`
//! between its poles, which are the Dirichlet levels of single edges, and
//! runs from `+∞` to `-∞` across each pole-free interval. Dirichlet levels
//! are counted with the oscillation theorem (zeros of `u_j` on `(0, ∞)`),
//! so no level is missed by the scan. States vanishing at the vertex
//! appear when `g ≥ 2` edges share a Dirichlet level, with multiplicity
//! `g - 1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, EdgePotential, LinePotential, PotentialField, StarGraph};

/// Smallest `κ` considered; states above `-KAPPA_FLOOR²` are ignored.
pub const KAPPA_FLOOR: f64 = 1e-5;
const SCAN_POINTS: usize = 1001;
const ROOT_WIDTH: f64 = 1e-13;
const POLE_MERGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
struct Shot {
    u: f64,
    du: f64,
    zeros: usize,
}

/// Transfer `(u, u')` from the end of the support back to the vertex and
/// count zeros of `u` on `(0, ∞)`.
fn shoot(profile: &EdgePotential, kappa: f64) -> Shot {
    let (mut u, mut du) = (1.0f64, -kappa);
    let mut zeros = 0usize;
    for s in profile.segments().iter().rev() {
        let q = s.val + kappa * kappa;
        let l = s.len;
        let (nu, ndu) = if q < 0.0 {
            let k = (-q).sqrt();
            let phase = (du / k).atan2(u);
            let half = 0.5 * PI;
            zeros += (((phase + k * l - half) / PI).floor() - ((phase - half) / PI).floor()) as usize;
            let (sn, cs) = (k * l).sin_cos();
            (u * cs - du / k * sn, u * k * sn + du * cs)
        } else {
            let (nu, ndu) = if q > 0.0 {
                let r = q.sqrt();
                let (sh, ch) = ((r * l).sinh(), (r * l).cosh());
                (u * ch - du / r * sh, -u * r * sh + du * ch)
            } else {
                (u - l * du, du)
            };
            zeros += (u * nu < 0.0) as usize;
            (nu, ndu)
        };
        let norm = nu.abs().max(ndu.abs());
        u = nu / norm;
        du = ndu / norm;
    }
    Shot { u, du, zeros }
}

/// Dirichlet-to-Neumann value `ψ'(0+)/ψ(0+)` of the solution decaying at
/// `+∞`; `+∞` when `ψ(0+) = 0`.
pub fn dtn_value(profile: &EdgePotential, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::NonpositiveKappa(kappa));
    }
    let s = shoot(profile, kappa);
    Ok(if s.u == 0.0 { f64::INFINITY } else { s.du / s.u })
}

/// Number of Dirichlet half-line eigenvalues below `-κ²`.
pub fn dirichlet_count(profile: &EdgePotential, kappa: f64) -> usize {
    shoot(profile, kappa).zeros
}

/// Dirichlet levels of one edge as `κ` values in `(lo, hi)`, descending.
pub fn dirichlet_roots(profile: &EdgePotential, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let c_lo = dirichlet_count(profile, lo);
    let c_hi = dirichlet_count(profile, hi);
    count_bisect(profile, lo, hi, c_lo, c_hi, &mut out);
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn count_bisect(p: &EdgePotential, lo: f64, hi: f64, c_lo: usize, c_hi: usize, out: &mut Vec<f64>) {
    if c_lo == c_hi {
        return;
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= ROOT_WIDTH * hi.max(1.0) || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat_n(mid, c_lo - c_hi));
        return;
    }
    let c_mid = dirichlet_count(p, mid);
    count_bisect(p, lo, mid, c_lo, c_mid, out);
    count_bisect(p, mid, hi, c_mid, c_hi, out);
}

fn secular_sum(edges: &[&EdgePotential], kappa: f64) -> f64 {
    edges
        .iter()
        .map(|p| {
            let s = shoot(p, kappa);
            if s.u == 0.0 {
                f64::INFINITY
            } else {
                s.du / s.u
            }
        })
        .sum()
}

/// Diagnostics and roots of one secular-equation solve.
#[derive(Debug, Clone, Serialize)]
pub struct SecularScan {
    pub kappa_grid: Vec<f64>,
    /// Pole-free brackets `(κ_lo, κ_hi)` each holding one Kirchhoff root.
    pub sign_changes: Vec<(f64, f64)>,
    /// Kirchhoff roots `κ`, ascending.
    pub roots: Vec<f64>,
    /// Shared Dirichlet levels `(κ, multiplicity)`.
    pub dirichlet_type_roots: Vec<(f64, usize)>,
    /// The uniform scan alone would have missed a root; it was refined ×10.
    pub scan_too_coarse: bool,
}

impl SecularScan {
    pub fn spectrum(&self) -> Spectrum {
        let mut eigenvalues: Vec<f64> = self.roots.iter().map(|k| -k * k).collect();
        for &(k, mult) in &self.dirichlet_type_roots {
            eigenvalues.extend(std::iter::repeat_n(-k * k, mult));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Spectrum {
            eigenvalues,
            tol_eig: ROOT_WIDTH,
            tol_zero: KAPPA_FLOOR * KAPPA_FLOOR,
            near_zero_flag: false,
        }
    }
}

fn default_kappa_max(edges: &[&EdgePotential]) -> f64 {
    let depth = edges.iter().map(|p| -p.min_value()).fold(0.0, f64::max);
    depth.sqrt() + 1.0
}

/// Secular solve for a star made of the given edges (one edge is the
/// Neumann half-line, two edges the line).
pub fn secular_scan_edges(edges: &[&EdgePotential], kappa_max: Option<f64>) -> Result<SecularScan> {
    if edges.is_empty() {
        return Err(Error::NoEdges);
    }
    let needed = default_kappa_max(edges) - 1.0;
    let kmax = match kappa_max {
        Some(k) if k < needed => {
            return Err(Error::InvalidConfig(format!("kappa_max {k} below sqrt(max V_-) = {needed}")))
        }
        Some(k) => k,
        None => needed + 1.0,
    };
    let kmin = KAPPA_FLOOR;

    let mut levels: Vec<f64> = edges.iter().flat_map(|p| dirichlet_roots(p, kmin, kmax)).collect();
    levels.sort_by(f64::total_cmp);
    let mut poles: Vec<(f64, usize)> = Vec::new();
    for k in levels {
        match poles.last_mut() {
            Some((p, g)) if (k - *p).abs() <= POLE_MERGE * k.max(1.0) => *g += 1,
            _ => poles.push((k, 1)),
        }
    }

    let mut brackets = Vec::new();
    let mut bounds: Vec<f64> = vec![kmin];
    bounds.extend(poles.iter().map(|p| p.0));
    bounds.push(kmax);
    debug_assert!(secular_sum(edges, kmax) < 0.0);
    for (i, w) in bounds.windows(2).enumerate() {
        if i == 0 && !(secular_sum(edges, kmin) > 0.0) {
            continue;
        }
        brackets.push((w[0], w[1]));
    }
    let roots: Vec<f64> = brackets.iter().map(|&(a, b)| decreasing_root(edges, a, b)).collect();

    let scan = |points: usize| -> (Vec<f64>, usize) {
        let grid: Vec<f64> =
            (0..points).map(|i| kmin + (kmax - kmin) * i as f64 / (points - 1) as f64).collect();
        let signs: Vec<bool> = grid.iter().map(|&k| secular_sum(edges, k) > 0.0).collect();
        let found = signs.windows(2).filter(|w| w[0] && !w[1]).count();
        (grid, found)
    };
    let (mut kappa_grid, found) = scan(SCAN_POINTS);
    let mut scan_too_coarse = false;
    if found < roots.len() {
        scan_too_coarse = true;
        kappa_grid = scan(10 * (SCAN_POINTS - 1) + 1).0;
    }

    let dirichlet_type_roots = poles.into_iter().filter(|&(_, g)| g >= 2).map(|(k, g)| (k, g - 1)).collect();
    Ok(SecularScan { kappa_grid, sign_changes: brackets, roots, dirichlet_type_roots, scan_too_coarse })
}

/// Root of `S` in `(lo, hi)` where `S` runs from positive to negative.
fn decreasing_root(edges: &[&EdgePotential], mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_WIDTH * hi.max(1.0) || mid <= lo || mid >= hi {
            return mid;
        }
        let s = secular_sum(edges, mid);
        if s == 0.0 {
            return mid;
        }
        if s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Bound states of the Kirchhoff star with potential `field`.
pub fn secular_bound_states(graph: StarGraph, field: &PotentialField, kappa_max: Option<f64>) -> Result<Spectrum> {
    if field.n_edges() != graph.n_edges() {
        return Err(Error::EdgeCountMismatch { expected: graph.n_edges(), found: field.n_edges() });
    }
    let edges: Vec<&EdgePotential> = field.edges().iter().collect();
    Ok(secular_scan_edges(&edges, kappa_max)?.spectrum())
}

/// Bound states on the line.
pub fn line_bound_states(line: &LinePotential) -> Result<Spectrum> {
    Ok(secular_scan_edges(&[&line.right, &line.left], None)?.spectrum())
}

/// Bound states on the half-line with the given condition at the origin.
pub fn half_line_bound_states(profile: &EdgePotential, bc: BoundaryCondition) -> Result<Spectrum> {
    match bc {
        BoundaryCondition::Neumann => Ok(secular_scan_edges(&[profile], None)?.spectrum()),
        BoundaryCondition::Dirichlet => {
            let kmax = default_kappa_max(&[profile]);
            let mut eigenvalues: Vec<f64> =
                dirichlet_roots(profile, KAPPA_FLOOR, kmax).iter().map(|k| -k * k).collect();
            eigenvalues.sort_by(f64::total_cmp);
            Ok(Spectrum {
                eigenvalues,
                tol_eig: ROOT_WIDTH,
                tol_zero: KAPPA_FLOOR * KAPPA_FLOOR,
                near_zero_flag: false,
            })
        }
    }
}

/// Bound state `-α²/4` of `-d²/dx² - α δ(x)` on the line.
pub fn delta_line_eigenvalue(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    Ok(-alpha * alpha / 4.0)
}
