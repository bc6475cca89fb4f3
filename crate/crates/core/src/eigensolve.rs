//! Negative eigenvalues of a [`DiscreteOperator`] pencil.
//!
//! `K - E·M` is factored as `L D Lᵀ` eliminating every chain from its far
//! end toward the vertex and the vertex last, so fill stays in the vertex
//! row. By Sylvester's law of inertia the number of negative pivots equals
//! the number of eigenvalues below `E`. Eigenvalues are located by
//! bisection on that count; eigenvectors by shifted inverse iteration
//! using the same factorization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{Block, DiscreteOperator, Structure};
use crate::error::{Error, Result};
use crate::graph::GridSpec;

const PIVOT_EPS: f64 = 1e-14;
const SHIFT_RETRIES: usize = 3;
const MAX_INVERSE_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SolverTolerances {
    /// Bisection interval width at which an eigenvalue is accepted.
    pub tol_eig: f64,
    /// Eigenvalues in `(-tol_zero, 0)` are not counted.
    pub tol_zero: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self { tol_eig: 1e-10, tol_zero: 1e-10 }
    }
}

impl SolverTolerances {
    pub fn validate(&self) -> Result<()> {
        if self.tol_eig > 0.0 && self.tol_zero > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "tolerances must be positive (tol_eig = {}, tol_zero = {})",
                self.tol_eig, self.tol_zero
            )))
        }
    }
}

/// Sorted negative eigenvalues; a degenerate eigenvalue appears once per
/// multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub tol_eig: f64,
    pub tol_zero: f64,
    /// Set when an eigenvalue was found in `[-tol_zero, 0)`.
    pub near_zero_flag: bool,
}

impl Spectrum {
    pub fn empty(tol: SolverTolerances) -> Self {
        Self { eigenvalues: Vec::new(), tol_eig: tol.tol_eig, tol_zero: tol.tol_zero, near_zero_flag: false }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Merge several spectra (direct sum).
    pub fn union<'a>(parts: impl IntoIterator<Item = &'a Spectrum>, tol: SolverTolerances) -> Self {
        let mut out = Self::empty(tol);
        for s in parts {
            out.eigenvalues.extend_from_slice(&s.eigenvalues);
            out.near_zero_flag |= s.near_zero_flag;
        }
        out.eigenvalues.sort_by(f64::total_cmp);
        out
    }
}

/// `Σ_k |E_k|^γ`.
pub fn riesz_mean(spec: &Spectrum, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    spec.eigenvalues.iter().map(|e| e.abs().powf(gamma)).sum()
}

fn block_inertia(block: &Block, shift: f64) -> Result<usize> {
    let eps = PIVOT_EPS * block.scale;
    let mut negatives = 0usize;
    let mut schur = block.vertex.map(|v| v.diag - shift * v.mass);
    for c in &block.chains {
        let n = c.len();
        if n == 0 {
            continue;
        }
        let mut d = c.diag[n - 1] - shift * c.mass[n - 1];
        for i in (0..n - 1).rev() {
            if d.abs() < eps {
                return Err(Error::PivotBreakdown { shift });
            }
            negatives += (d < 0.0) as usize;
            d = c.diag[i] - shift * c.mass[i] - c.offdiag[i] * c.offdiag[i] / d;
        }
        if d.abs() < eps {
            return Err(Error::PivotBreakdown { shift });
        }
        negatives += (d < 0.0) as usize;
        if let Some(s) = schur.as_mut() {
            *s -= c.coupling * c.coupling / d;
        }
    }
    if let Some(s) = schur {
        if s.abs() < eps {
            return Err(Error::PivotBreakdown { shift });
        }
        negatives += (s < 0.0) as usize;
    }
    Ok(negatives)
}

/// Number of eigenvalues of the pencil strictly below `shift`.
pub fn inertia(op: &DiscreteOperator, shift: f64) -> Result<usize> {
    op.blocks.iter().map(|b| block_inertia(b, shift)).sum()
}

/// Inertia with the shift nudged upward after a pivot breakdown.
fn robust_inertia(op: &DiscreteOperator, shift: f64) -> Result<usize> {
    let mut s = shift;
    for attempt in 0..=SHIFT_RETRIES {
        match inertia(op, s) {
            Err(Error::PivotBreakdown { .. }) if attempt < SHIFT_RETRIES => {
                s += 1e-10 * shift.abs().max(1.0);
            }
            other => return other,
        }
    }
    unreachable!()
}

/// All eigenvalues below `-tol_zero`, each to within `tol_eig`.
pub fn negative_spectrum(op: &DiscreteOperator, tol: SolverTolerances) -> Result<Spectrum> {
    tol.validate()?;
    let hi = -tol.tol_zero;
    let count_hi = robust_inertia(op, hi)?;
    let near_zero_flag = robust_inertia(op, 0.0)? != count_hi;
    let mut spec = Spectrum { near_zero_flag, ..Spectrum::empty(tol) };
    if count_hi == 0 {
        return Ok(spec);
    }
    let mut lo = op.potential_floor() - 1.0;
    while robust_inertia(op, lo)? > 0 {
        lo = 2.0 * lo - 1.0;
    }
    spec.eigenvalues.reserve(count_hi);
    bisect(op, lo, hi, 0, count_hi, tol.tol_eig, &mut spec.eigenvalues)?;
    Ok(spec)
}

fn bisect(
    op: &DiscreteOperator,
    lo: f64,
    hi: f64,
    count_lo: usize,
    count_hi: usize,
    tol_eig: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    if count_hi == count_lo {
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= tol_eig || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat_n(mid, count_hi - count_lo));
        return Ok(());
    }
    let count_mid = robust_inertia(op, mid)?;
    bisect(op, lo, mid, count_lo, count_mid, tol_eig, out)?;
    bisect(op, mid, hi, count_mid, count_hi, tol_eig, out)
}

/// Node values of a grid function on the edges of an operator.
///
/// `vertex_value` holds the vertex unknown of a star or Neumann half-line
/// and the center node of a line; it is `None` for Dirichlet half-lines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeFunction {
    pub vertex_value: Option<f64>,
    pub edges: Vec<Vec<f64>>,
    pub grid: GridSpec,
}

impl EdgeFunction {
    pub fn from_flat(block: &Block, grid: GridSpec, flat: &[f64]) -> Self {
        let off = block.vertex.is_some() as usize;
        let mut edges = Vec::with_capacity(block.chains.len());
        let mut start = off;
        for c in &block.chains {
            edges.push(flat[start..start + c.len()].to_vec());
            start += c.len();
        }
        Self { vertex_value: block.vertex.map(|_| flat[0]), edges, grid }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        v.extend(self.vertex_value);
        for e in &self.edges {
            v.extend_from_slice(e);
        }
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.to_flat().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn single_block(op: &DiscreteOperator) -> Result<&Block> {
    match op.blocks.as_slice() {
        [b] => Ok(b),
        _ => Err(Error::Unsupported("operators with more than one block")),
    }
}

/// LDLᵀ factor of `K - σM` for one block.
struct Factor {
    chain_pivots: Vec<Vec<f64>>,
    vertex_pivot: Option<f64>,
}

fn factor(block: &Block, shift: f64) -> Result<Factor> {
    let eps = PIVOT_EPS * block.scale;
    let guard = |d: f64| -> Result<f64> {
        if d.abs() < eps {
            Err(Error::PivotBreakdown { shift })
        } else {
            Ok(d)
        }
    };
    let mut chain_pivots = Vec::with_capacity(block.chains.len());
    let mut schur = block.vertex.map(|v| v.diag - shift * v.mass);
    for c in &block.chains {
        let n = c.len();
        let mut d = vec![0.0; n];
        if n > 0 {
            d[n - 1] = guard(c.diag[n - 1] - shift * c.mass[n - 1])?;
            for i in (0..n - 1).rev() {
                d[i] = guard(c.diag[i] - shift * c.mass[i] - c.offdiag[i] * c.offdiag[i] / d[i + 1])?;
            }
            if let Some(s) = schur.as_mut() {
                *s -= c.coupling * c.coupling / d[0];
            }
        }
        chain_pivots.push(d);
    }
    let vertex_pivot = schur.map(guard).transpose()?;
    Ok(Factor { chain_pivots, vertex_pivot })
}

fn solve(block: &Block, f: &Factor, rhs: &[f64]) -> Vec<f64> {
    let off = block.vertex.is_some() as usize;
    let mut y = rhs.to_vec();
    let mut vy = if off == 1 { y[0] } else { 0.0 };
    let mut start = off;
    for (c, d) in block.chains.iter().zip(&f.chain_pivots) {
        let n = c.len();
        let ys = &mut y[start..start + n];
        for i in (0..n.saturating_sub(1)).rev() {
            ys[i] -= c.offdiag[i] * ys[i + 1] / d[i + 1];
        }
        if off == 1 && n > 0 {
            vy -= c.coupling * ys[0] / d[0];
        }
        start += n;
    }
    let xv = f.vertex_pivot.map(|p| vy / p);
    let mut x = vec![0.0; y.len()];
    if let Some(v) = xv {
        x[0] = v;
    }
    let mut start = off;
    for (c, d) in block.chains.iter().zip(&f.chain_pivots) {
        let n = c.len();
        if n == 0 {
            continue;
        }
        let ys = &y[start..start + n];
        let xs = &mut x[start..start + n];
        xs[0] = (ys[0] - c.coupling * xv.unwrap_or(0.0)) / d[0];
        for i in 1..n {
            xs[i] = (ys[i] - c.offdiag[i - 1] * xs[i - 1]) / d[i];
        }
        start += n;
    }
    x
}

fn mass_dot(mass: &[f64], a: &[f64], b: &[f64]) -> f64 {
    mass.iter().zip(a).zip(b).map(|((m, x), y)| m * x * y).sum()
}

fn residual_norm(block: &Block, mass: &[f64], e: f64, x: &[f64], work: &mut [f64]) -> f64 {
    block.stiffness_apply(x, work);
    work.iter()
        .zip(mass)
        .zip(x)
        .map(|((k, m), v)| {
            let r = k - e * m * v;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

fn factor_near(block: &Block, shift: f64) -> Result<Factor> {
    let mut s = shift;
    for attempt in 0..=SHIFT_RETRIES {
        match factor(block, s) {
            Err(Error::PivotBreakdown { .. }) if attempt < SHIFT_RETRIES => {
                s += 1e-10 * shift.abs().max(1.0);
            }
            other => return other,
        }
    }
    unreachable!()
}

/// Mass-orthonormal basis of the eigenspace of a cluster of `multiplicity`
/// eigenvalues at `eigenvalue`, by block inverse iteration.
pub fn eigenvector_cluster(
    op: &DiscreteOperator,
    eigenvalue: f64,
    multiplicity: usize,
    tol: SolverTolerances,
) -> Result<Vec<EdgeFunction>> {
    let block = single_block(op)?;
    let n = block.dim();
    if multiplicity == 0 || multiplicity > n {
        return Err(Error::InvalidConfig(format!("cluster multiplicity {multiplicity}")));
    }
    let mass = block.mass_diagonal();
    let f = factor_near(block, eigenvalue + 0.1 * tol.tol_eig)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut basis: Vec<Vec<f64>> =
        (0..multiplicity).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let threshold = 1e-8 * block.scale;
    let mut work = vec![0.0; n];
    for _ in 0..MAX_INVERSE_ITERS {
        for k in 0..multiplicity {
            let rhs: Vec<f64> = basis[k].iter().zip(&mass).map(|(x, m)| x * m).collect();
            let mut y = solve(block, &f, &rhs);
            for j in 0..k {
                let p = mass_dot(&mass, &basis[j], &y);
                y.iter_mut().zip(&basis[j]).for_each(|(a, b)| *a -= p * b);
            }
            let norm = mass_dot(&mass, &y, &y).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NoConvergence { eigenvalue });
            }
            y.iter_mut().for_each(|v| *v /= norm);
            basis[k] = y;
        }
        let converged = basis
            .iter()
            .all(|x| residual_norm(block, &mass, eigenvalue, x, &mut work) <= threshold);
        if converged {
            for x in &mut basis {
                let pivot = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
                if pivot < 0.0 {
                    x.iter_mut().for_each(|v| *v = -*v);
                }
            }
            return Ok(basis.iter().map(|x| EdgeFunction::from_flat(block, op.grid, x)).collect());
        }
    }
    Err(Error::NoConvergence { eigenvalue })
}

/// Mass-normalized eigenvector for `eigenvalue` by inverse iteration with
/// shift `eigenvalue + 0.1·tol_eig`.
pub fn eigenvector(op: &DiscreteOperator, eigenvalue: f64, tol: SolverTolerances) -> Result<EdgeFunction> {
    Ok(eigenvector_cluster(op, eigenvalue, 1, tol)?.remove(0))
}

/// `M⁻¹ K ψ` for a single-block operator.
pub fn apply_operator(op: &DiscreteOperator, psi: &EdgeFunction) -> Result<EdgeFunction> {
    let block = single_block(op)?;
    let x = psi.to_flat();
    if x.len() != block.dim() {
        return Err(Error::InvalidConfig("function does not match the operator layout".into()));
    }
    let mut y = vec![0.0; x.len()];
    block.stiffness_apply(&x, &mut y);
    for (v, m) in y.iter_mut().zip(block.mass_diagonal()) {
        *v /= m;
    }
    Ok(EdgeFunction::from_flat(block, op.grid, &y))
}

/// `⟨a, b⟩_M` for two functions laid out like `op`.
pub fn mass_inner(op: &DiscreteOperator, a: &EdgeFunction, b: &EdgeFunction) -> Result<f64> {
    let block = single_block(op)?;
    Ok(mass_dot(&block.mass_diagonal(), &a.to_flat(), &b.to_flat()))
}

/// Whether the operator is a single Kirchhoff-type block (used by callers
/// deciding how to treat eigenvectors).
pub fn is_single_block(op: &DiscreteOperator) -> bool {
    op.blocks.len() == 1 && !matches!(op.structure, Structure::DirectSum(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_half_line, assemble_line, assemble_star};
    use crate::graph::{
        radial_field, BoundaryCondition, EdgePotential, LinePotential, PotentialField, StarGraph,
    };
    use nalgebra::{DMatrix, SymmetricEigen};

    fn ep(pairs: &[(f64, f64)]) -> EdgePotential {
        EdgePotential::from_pairs(pairs).unwrap()
    }

    fn grid(h: f64, len: f64) -> GridSpec {
        GridSpec::with_length(h, len, BoundaryCondition::Dirichlet).unwrap()
    }

    /// Dense oracle: eigenvalues of `M^{-1/2} K M^{-1/2}`.
    fn dense_eigenvalues(op: &DiscreteOperator) -> Vec<f64> {
        let mut all = Vec::new();
        for b in &op.blocks {
            let n = b.dim();
            let mass = b.mass_diagonal();
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut e = vec![0.0; n];
            let mut col = vec![0.0; n];
            for j in 0..n {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[j] = 1.0;
                b.stiffness_apply(&e, &mut col);
                for i in 0..n {
                    a[(i, j)] = col[i] / (mass[i] * mass[j]).sqrt();
                }
            }
            all.extend(SymmetricEigen::new(a).eigenvalues.iter().copied());
        }
        all.sort_by(f64::total_cmp);
        all
    }

    fn delta_line(h: f64, len: f64, alpha: f64) -> DiscreteOperator {
        let line = LinePotential::centered_well(h, -alpha / h).unwrap();
        assemble_line(&line, &grid(h, len)).unwrap()
    }

    #[test]
    fn inertia_examples() {
        let g3 = StarGraph::new(3).unwrap();
        let free = assemble_star(g3, &PotentialField::zero(g3), &grid(0.1, 5.0)).unwrap();
        assert_eq!(inertia(&free, -0.1).unwrap(), 0);

        let well = assemble_line(&LinePotential::centered_well(2.0, -1.0).unwrap(), &grid(0.01, 20.0)).unwrap();
        assert_eq!(inertia(&well, -1.0001).unwrap(), 0);

        assert_eq!(inertia(&delta_line(0.005, 20.0, 2.0), -0.5).unwrap(), 1);
    }

    #[test]
    fn free_operator_is_positive_semidefinite() {
        let g2 = StarGraph::new(2).unwrap();
        let gr = GridSpec::new(0.5, 4, BoundaryCondition::Neumann).unwrap();
        let op = assemble_star(g2, &PotentialField::zero(g2), &gr).unwrap();
        for eps in [1e-12, 1e-6, 0.1, 10.0] {
            assert_eq!(inertia(&op, -eps).unwrap(), 0);
        }
        assert!(negative_spectrum(&op, SolverTolerances::default()).unwrap().is_empty());
    }

    #[test]
    fn inertia_matches_dense_oracle() {
        let g = StarGraph::new(3).unwrap();
        let f = PotentialField::new(
            g,
            vec![ep(&[(0.4, -6.0), (0.2, 3.0)]), ep(&[(0.6, -2.0)]), ep(&[(0.2, 1.0), (0.4, -9.0)])],
        )
        .unwrap();
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let op = assemble_star(g, &f, &GridSpec::new(0.1, 25, bc).unwrap()).unwrap();
            let dense = dense_eigenvalues(&op);
            for shift in [-8.0, -5.0, -2.5, -1.0, -0.3, 0.0, 1.7, 12.0] {
                let expected = dense.iter().filter(|&&e| e < shift).count();
                assert_eq!(inertia(&op, shift).unwrap(), expected, "shift {shift}");
            }
            let spec = negative_spectrum(&op, SolverTolerances::default()).unwrap();
            let neg: Vec<f64> = dense.iter().copied().filter(|&e| e < -1e-10).collect();
            assert_eq!(spec.len(), neg.len());
            for (a, b) in spec.eigenvalues.iter().zip(&neg) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn star_well_counts() {
        let g3 = StarGraph::new(3).unwrap();
        let shallow = assemble_star(g3, &radial_field(g3, &ep(&[(1.0, -1.0)])), &grid(0.01, 30.0)).unwrap();
        assert_eq!(negative_spectrum(&shallow, SolverTolerances::default()).unwrap().len(), 1);

        let deep = assemble_star(g3, &radial_field(g3, &ep(&[(1.0, -6.0)])), &grid(0.01, 30.0)).unwrap();
        let s = negative_spectrum(&deep, SolverTolerances::default()).unwrap();
        assert_eq!(s.len(), 3);
        // one simple Neumann-sector level, one doubly degenerate Dirichlet level
        let (a, b, c) = (s.eigenvalues[0], s.eigenvalues[1], s.eigenvalues[2]);
        assert!(b - a > 0.1);
        assert!((c - b).abs() < 1e-9);
    }

    #[test]
    fn half_line_thresholds() {
        let gr = grid(0.01, 30.0);
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
            let free = assemble_half_line(&EdgePotential::zero(), &gr, bc).unwrap();
            assert!(negative_spectrum(&free, SolverTolerances::default()).unwrap().is_empty());
        }
        let shallow = assemble_half_line(&ep(&[(1.0, -1.0)]), &gr, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(negative_spectrum(&shallow, SolverTolerances::default()).unwrap().len(), 0);
        let deep = assemble_half_line(&ep(&[(1.0, -6.0)]), &gr, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(negative_spectrum(&deep, SolverTolerances::default()).unwrap().len(), 1);
    }

    #[test]
    fn line_examples() {
        let gr = grid(0.01, 20.0);
        let free = assemble_line(&LinePotential::default(), &gr).unwrap();
        assert!(negative_spectrum(&free, SolverTolerances::default()).unwrap().is_empty());
        let well = assemble_line(&LinePotential::centered_well(2.0, -1.0).unwrap(), &gr).unwrap();
        assert_eq!(negative_spectrum(&well, SolverTolerances::default()).unwrap().len(), 1);
    }

    #[test]
    fn delta_well_converges_at_second_order() {
        // exact bound state of -2δ is -1
        let errs: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&h| {
                let s = negative_spectrum(&delta_line(h, 30.0, 2.0), SolverTolerances::default()).unwrap();
                assert_eq!(s.len(), 1);
                (s.eigenvalues[0] + 1.0).abs()
            })
            .collect();
        assert!(errs[2] < 1e-4);
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn spectrum_brackets_satisfy_inertia_interlacing() {
        let g = StarGraph::new(4).unwrap();
        let f = PotentialField::new(
            g,
            vec![ep(&[(1.0, -5.0)]), ep(&[(0.5, -3.0)]), EdgePotential::zero(), ep(&[(0.3, 2.0), (0.8, -7.0)])],
        )
        .unwrap();
        let op = assemble_star(g, &f, &grid(0.02, 12.0)).unwrap();
        let tol = SolverTolerances::default();
        let s = negative_spectrum(&op, tol).unwrap();
        assert!(!s.is_empty());
        for (k, &e) in s.eigenvalues.iter().enumerate() {
            assert!(inertia(&op, e - tol.tol_eig).unwrap() <= k);
            assert!(inertia(&op, e + tol.tol_eig).unwrap() > k);
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(inertia(&op, op.potential_floor() - 1e-6).unwrap(), 0);
    }

    #[test]
    fn riesz_mean_examples() {
        let tol = SolverTolerances::default();
        assert_eq!(riesz_mean(&Spectrum::empty(tol), 0.5), 0.0);
        let one = Spectrum { eigenvalues: vec![-1.0], ..Spectrum::empty(tol) };
        assert_eq!(riesz_mean(&one, 0.5), 1.0);
        let three = Spectrum { eigenvalues: vec![-4.0, -1.0, -1.0], ..Spectrum::empty(tol) };
        assert!((riesz_mean(&three, 1.5) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn delta_eigenvector_is_even_and_peaked() {
        let op = delta_line(0.01, 20.0, 2.0);
        let tol = SolverTolerances::default();
        let s = negative_spectrum(&op, tol).unwrap();
        let psi = eigenvector(&op, s.eigenvalues[0], tol).unwrap();
        let v0 = psi.vertex_value.unwrap();
        assert!(v0 > 0.0 && (v0 - psi.max_abs()).abs() < 1e-14);
        for (r, l) in psi.edges[0].iter().zip(&psi.edges[1]) {
            assert!((r - l).abs() < 1e-8);
        }
        // ψ ∝ e^{-|x|}: ratio over one unit of length
        let ratio = psi.edges[0][99] / v0;
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-3, "{ratio}");
        assert!((mass_inner(&op, &psi, &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sector_eigenvectors_on_radial_star() {
        let g3 = StarGraph::new(3).unwrap();
        let op = assemble_star(g3, &radial_field(g3, &ep(&[(1.0, -6.0)])), &grid(0.01, 20.0)).unwrap();
        let tol = SolverTolerances::default();
        let s = negative_spectrum(&op, tol).unwrap();
        let neumann = eigenvector(&op, s.eigenvalues[0], tol).unwrap();
        for e in &neumann.edges[1..] {
            for (a, b) in e.iter().zip(&neumann.edges[0]) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        let dirichlet = eigenvector_cluster(&op, s.eigenvalues[1], 2, tol).unwrap();
        for psi in &dirichlet {
            assert!(psi.vertex_value.unwrap().abs() < 1e-8);
        }
        let cross = mass_inner(&op, &dirichlet[0], &dirichlet[1]).unwrap();
        assert!(cross.abs() < 1e-8);
        let with_neumann = mass_inner(&op, &dirichlet[0], &neumann).unwrap();
        assert!(with_neumann.abs() < 1e-8);
    }

    #[test]
    fn eigenvector_residual_is_small() {
        let g = StarGraph::new(3).unwrap();
        let f = PotentialField::new(g, vec![ep(&[(1.0, -5.0)]), ep(&[(0.5, -3.0)]), ep(&[(0.8, -7.0)])]).unwrap();
        let op = assemble_star(g, &f, &grid(0.02, 12.0)).unwrap();
        let tol = SolverTolerances::default();
        let s = negative_spectrum(&op, tol).unwrap();
        let vecs: Vec<EdgeFunction> = s.eigenvalues.iter().map(|&e| eigenvector(&op, e, tol).unwrap()).collect();
        for (e, psi) in s.eigenvalues.iter().zip(&vecs) {
            let k = apply_operator(&op, psi).unwrap();
            let mass = op.blocks[0].mass_diagonal();
            let r: f64 = k
                .to_flat()
                .iter()
                .zip(psi.to_flat())
                .zip(&mass)
                .map(|((a, b), m)| (m * (a - e * b)).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-8 * op.scale());
        }
        for i in 0..vecs.len() {
            for j in 0..i {
                assert!(mass_inner(&op, &vecs[i], &vecs[j]).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn direct_sum_counts_add() {
        let gr = grid(0.02, 10.0);
        let a = assemble_half_line(&ep(&[(1.0, -6.0)]), &gr, BoundaryCondition::Neumann).unwrap();
        let b = assemble_half_line(&ep(&[(1.0, -6.0)]), &gr, BoundaryCondition::Dirichlet).unwrap();
        let tol = SolverTolerances::default();
        let sa = negative_spectrum(&a, tol).unwrap();
        let sb = negative_spectrum(&b, tol).unwrap();
        let sum = DiscreteOperator::direct_sum(vec![a, b]);
        let s = negative_spectrum(&sum, tol).unwrap();
        assert_eq!(s, Spectrum::union([&sa, &sb], tol));
        assert!(eigenvector(&sum, s.eigenvalues[0], tol).is_err());
    }
}
