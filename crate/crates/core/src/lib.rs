//! Numerical toolkit for Schrödinger operators `-d²/dx² + V` on star graphs
//! with Kirchhoff vertex conditions.
//!
//! The crate assembles mass-lumped Galerkin pencils for star graphs,
//! half-lines, the line and the decoupled ("cut") operators, counts and
//! locates negative eigenvalues by Sylvester inertia, and checks
//! Lieb-Thirring type bounds `tr H_-^γ ≤ L ∫ V_-^{γ+1/2}` against them.
//! An independent transfer-matrix solver for piecewise-constant potentials
//! serves as the reference for the discretization.
//!
//! Module map:
//!
//! * [`graph`]: star graphs, grids, piecewise-constant potentials.
//! * [`discretize`]: pencil assembly for all operator shapes.
//! * [`eigensolve`]: inertia counting, bisection, inverse iteration, Riesz means.
//! * [`oracle`]: secular-equation bound states.
//! * [`functionals`]: Lieb-Thirring constants, ratios and bound checks.
//! * [`symmetry`]: rotation sectors, radial reduction and the translation sweep.
//! * [`search`]: projected gradient ascent on the Lieb-Thirring ratio.
//! * [`random`]: seeded random potentials used by the verification suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod functionals;
pub mod graph;
pub mod oracle;
pub mod random;
pub mod search;
pub mod symmetry;

pub use discretize::{
    assemble_cut_even, assemble_cut_split, assemble_half_line, assemble_line, assemble_star,
    Block, Chain, DiscreteOperator, OperatorDump, Structure, Vertex,
};
pub use eigensolve::{
    eigenvector, eigenvector_cluster, inertia, negative_spectrum, riesz_mean, EdgeFunction,
    SolverTolerances, Spectrum,
};
pub use error::{Error, Result};
pub use functionals::{
    check_mono, check_split_bound, check_theorem1, check_theorem2, classical_constant, delta_calibration,
    lt_ratio, reference_constant, DeltaCalibration, GridInfo, LtConstants, LtReport, Provenance,
    RatioEvaluation, SplitBoundReport,
};
pub use graph::{
    potential_norm, radial_field, scale_potential, symmetric_extension, transplant,
    BoundaryCondition, EdgePotential, GridSpec, LinePotential, PotentialField, Segment,
    StarGraph, TransplantMode,
};
pub use oracle::{
    delta_line_eigenvalue, dtn_value, half_line_bound_states, line_bound_states, secular_bound_states,
    SecularScan,
};
pub use random::ProfileSampler;
pub use search::{
    maximize_ratio, ratio_gradient, ratio_gradient_clustered, ratio_gradient_radial, CellField,
    RatioGradient, SearchConfig, SearchResult, Termination,
};
pub use symmetry::{
    decompose_radial, project_sector, sweep_grid, translation_sweep, verify_neumann_dirichlet_split,
    verify_sector_identity, ComplexEdgeFunction, SectorDecomposition, SectorReport, SectorSpectra,
    SplitIdentityReport, SplitSpectra, TranslationSweep,
};
