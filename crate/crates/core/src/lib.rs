//! Stabilized finite element solver and sub-grid-scale a posteriori error
//! estimation for the stationary convection-diffusion-reaction equation
//! on 2D quadrilateral meshes.
//!
//! The crate provides:
//! - structured quadrilateral meshes on the unit square and an L-shaped domain,
//! - Q1 (bilinear) elements with Gauss-Legendre quadrature,
//! - CSR sparse matrices with CG / BiCGStab / dense LU solvers,
//! - Galerkin, ASGS and OSGS formulations with inter-element edge stabilization,
//! - the sub-grid-scale error estimator (OSGS / ASGS / Verfurth-parameter modes),
//! - a configuration-driven study runner producing convergence tables,
//!   estimator maps (VTK) and line profiles (CSV).

pub mod assembly;
pub mod cases;
pub mod estimator;
pub mod field;
pub mod formulation;
pub mod mesh;
pub mod parallel;
pub mod projection;
pub mod quadrature;
pub mod sparse;
pub mod study;

pub use assembly::{assemble_load, assemble_operators, OperatorSet, PhysicalParams};
pub use cases::BenchmarkCase;
pub use estimator::{effectivity, error_norms, estimate, ErrorReport, EstimatorMode, EstimatorReport};
pub use field::FeFunction;
pub use formulation::{compute_tau, solve_galerkin, solve_stabilized, FormulationKind, StabConstants, StabParams};
pub use mesh::{build_lshape_mesh, build_unit_square_mesh, boundary_nodes, DofMap, DomainKind, Edge, Mesh};
pub use sparse::{CsrMatrix, SolverConfig};
pub use study::{run_study, StudyConfig};
