//! Stabilization parameters and the discrete solvers: plain Galerkin,
//! ASGS (no projection in the stabilization term), and OSGS (residual
//! projected orthogonally to the FE space), with optional inter-element
//! edge stabilization.

use crate::assembly::{self, OperatorSet, PhysicalParams};
use crate::field::FeFunction;
use crate::mesh::{DofMap, Mesh};
use crate::sparse::{self, CsrMatrix, SolveStats, SolverConfig, SparseError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("stabilization parameter undefined: k, |a| and s all zero")]
    DegenerateTau,
    #[error("fixed-point iteration did not converge after {iterations} steps (update {update:.3e})")]
    FixedPointDiverged { iterations: usize, update: f64 },
    #[error(transparent)]
    Solver(#[from] SparseError),
}

/// Algorithmic constants of the stabilization parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct StabConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Default for StabConstants {
    fn default() -> Self {
        StabConstants {
            c1: 4.0,
            c2: 2.0,
            c3: 1.0,
            c4: 1.0 / 3.0,
        }
    }
}

/// tau_k = (c1 k/h^2 + c2 |a|/h + c3 s)^-1, tau_e = c4 tau_k / h, plus
/// the a = 0 variants used by the Verfurth-parameter estimator.
#[derive(Debug, Clone, Copy)]
pub struct StabParams {
    pub tau_k: f64,
    pub tau_e: f64,
    pub tau_k0: f64,
    pub tau_e0: f64,
}

pub fn compute_tau(
    k: f64,
    a_norm: f64,
    s: f64,
    h: f64,
    c: &StabConstants,
) -> Result<StabParams, FormulationError> {
    assert!(h > 0.0, "mesh size must be positive");
    let denom = c.c1 * k / (h * h) + c.c2 * a_norm / h + c.c3 * s;
    let denom0 = c.c1 * k / (h * h) + c.c3 * s;
    if denom <= 0.0 || denom0 <= 0.0 {
        return Err(FormulationError::DegenerateTau);
    }
    let tau_k = 1.0 / denom;
    let tau_k0 = 1.0 / denom0;
    Ok(StabParams {
        tau_k,
        tau_e: c.c4 * tau_k / h,
        tau_k0,
        tau_e0: c.c4 * tau_k0 / h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulationKind {
    Galerkin,
    Asgs,
    Osgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OsgsRealization {
    /// Monolithic system in (u, xi) with xi the projected residual.
    Block,
    /// Lag the projection and iterate; kept as a cross-check.
    FixedPoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FormulationConfig {
    pub kind: FormulationKind,
    pub edge_term_enabled: bool,
    pub f_in_residual: bool,
    pub osgs_realization: OsgsRealization,
    pub constants: StabConstants,
    pub solver: SolverConfig,
    /// Quadrature order for load vectors (forcing may be non-polynomial).
    pub load_quad_order: usize,
}

impl Default for FormulationConfig {
    fn default() -> Self {
        FormulationConfig {
            kind: FormulationKind::Osgs,
            edge_term_enabled: true,
            f_in_residual: true,
            osgs_realization: OsgsRealization::Block,
            constants: StabConstants::default(),
            solver: SolverConfig::default(),
            load_quad_order: 4,
        }
    }
}

impl FormulationConfig {
    pub fn with_kind(kind: FormulationKind) -> Self {
        FormulationConfig {
            kind,
            ..Default::default()
        }
    }
}

pub struct StabilizedSolution {
    pub u: FeFunction,
    /// Projected residual auxiliary (OSGS only).
    pub xi: Option<FeFunction>,
    pub stats: SolveStats,
    pub tau: StabParams,
}

/// K + C + s M.
pub fn galerkin_matrix(ops: &OperatorSet, s: f64) -> CsrMatrix {
    CsrMatrix::linear_combination(&[(1.0, &ops.k_diff), (1.0, &ops.c_conv), (s, &ops.m_mass)])
}

/// Galerkin matrix plus the unprojected stabilization terms:
/// tau_k <-L* v, L u> and, when enabled, -tau_e J.
pub fn asgs_matrix(ops: &OperatorSet, s: f64, tau: &StabParams, edge_term: bool) -> CsrMatrix {
    let te = if edge_term { -tau.tau_e } else { 0.0 };
    CsrMatrix::linear_combination(&[
        (1.0, &ops.k_diff),
        (1.0, &ops.c_conv),
        (s, &ops.m_mass),
        (tau.tau_k, &ops.adj_residual),
        (te, &ops.j_edge),
    ])
}

pub fn solve_galerkin(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    ops: &OperatorSet,
    solver: &SolverConfig,
    load_quad_order: usize,
) -> Result<(FeFunction, SolveStats), FormulationError> {
    let a = galerkin_matrix(ops, params.s);
    let b = assembly::assemble_load(mesh, dofs, &params.f, load_quad_order);
    let (coeffs, stats) = sparse::solve(&a, &b, solver)?;
    Ok((FeFunction { coeffs }, stats))
}

pub fn solve_stabilized(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    ops: &OperatorSet,
    cfg: &FormulationConfig,
) -> Result<StabilizedSolution, FormulationError> {
    let tau = compute_tau(params.k, params.a_norm(), params.s, mesh.h, &cfg.constants)?;
    if cfg.kind == FormulationKind::Galerkin {
        let (u, stats) = solve_galerkin(mesh, dofs, params, ops, &cfg.solver, cfg.load_quad_order)?;
        return Ok(StabilizedSolution {
            u,
            xi: None,
            stats,
            tau,
        });
    }

    let b_f = assembly::assemble_load(mesh, dofs, &params.f, cfg.load_quad_order);
    let flag = if cfg.f_in_residual { 1.0 } else { 0.0 };
    let mut rhs = b_f.clone();
    if cfg.f_in_residual {
        let b_adj = assembly::assemble_adjoint_load(mesh, dofs, params, cfg.load_quad_order);
        for (r, v) in rhs.iter_mut().zip(&b_adj) {
            *r += tau.tau_k * v;
        }
    }
    let a_stab = asgs_matrix(ops, params.s, &tau, cfg.edge_term_enabled);

    match cfg.kind {
        FormulationKind::Galerkin => unreachable!(),
        FormulationKind::Asgs => {
            let (coeffs, stats) = sparse::solve(&a_stab, &rhs, &cfg.solver)?;
            Ok(StabilizedSolution {
                u: FeFunction { coeffs },
                xi: None,
                stats,
                tau,
            })
        }
        FormulationKind::Osgs => match cfg.osgs_realization {
            OsgsRealization::Block => {
                osgs_block(dofs, ops, &tau, &a_stab, &rhs, &b_f, flag, &cfg.solver)
            }
            OsgsRealization::FixedPoint => {
                osgs_fixed_point(dofs, ops, &tau, &a_stab, &rhs, &b_f, flag, &cfg.solver)
            }
        },
    }
}

/// Monolithic OSGS system in (u, xi):
///   A_stab u - tau_k W xi = rhs        (stabilized momentum row)
///   -Lop u + M xi = -flag b_f          (projection row, xi = P_h(Lu - flag f))
/// where W = <-L* v, u> and Lop = <L u, v>.
#[allow(clippy::too_many_arguments)]
fn osgs_block(
    dofs: &DofMap,
    ops: &OperatorSet,
    tau: &StabParams,
    a_stab: &CsrMatrix,
    rhs: &[f64],
    b_f: &[f64],
    flag: f64,
    solver: &SolverConfig,
) -> Result<StabilizedSolution, FormulationError> {
    let n = dofs.n_free;
    let a = CsrMatrix::from_blocks_2x2([
        [(1.0, a_stab), (-tau.tau_k, &ops.adj_mass)],
        [(-1.0, &ops.op_mass), (1.0, &ops.m_mass)],
    ]);
    let mut b = vec![0.0; 2 * n];
    b[..n].copy_from_slice(rhs);
    for i in 0..n {
        b[n + i] = -flag * b_f[i];
    }
    let (x, stats) = sparse::solve(&a, &b, solver)?;
    Ok(StabilizedSolution {
        u: FeFunction {
            coeffs: x[..n].to_vec(),
        },
        xi: Some(FeFunction {
            coeffs: x[n..].to_vec(),
        }),
        stats,
        tau: *tau,
    })
}

#[allow(clippy::too_many_arguments)]
fn osgs_fixed_point(
    dofs: &DofMap,
    ops: &OperatorSet,
    tau: &StabParams,
    a_stab: &CsrMatrix,
    rhs: &[f64],
    b_f: &[f64],
    flag: f64,
    solver: &SolverConfig,
) -> Result<StabilizedSolution, FormulationError> {
    const MAX_ITER: usize = 200;
    const REL_TOL: f64 = 1e-10;
    let n = dofs.n_free;
    let mass_solver = SolverConfig::cg_jacobi(1e-12);
    let mut xi = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut update = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let mut b = rhs.to_vec();
        let wxi = ops.adj_mass.spmv(&xi)?;
        for i in 0..n {
            b[i] += tau.tau_k * wxi[i];
        }
        let (u_next, stats) = sparse::solve(a_stab, &b, solver)?;
        let mut diff2 = 0.0;
        let mut norm2 = 0.0;
        for i in 0..n {
            let d = u_next[i] - u[i];
            diff2 += d * d;
            norm2 += u_next[i] * u_next[i];
        }
        u = u_next;
        update = if norm2 > 0.0 {
            (diff2 / norm2).sqrt()
        } else {
            diff2.sqrt()
        };
        // xi = M^-1 (Lop u - flag b_f)
        let mut p = ops.op_mass.spmv(&u)?;
        for i in 0..n {
            p[i] -= flag * b_f[i];
        }
        let (xi_next, _) = sparse::solve(&ops.m_mass, &p, &mass_solver)?;
        xi = xi_next;
        if update <= REL_TOL {
            return Ok(StabilizedSolution {
                u: FeFunction { coeffs: u },
                xi: Some(FeFunction { coeffs: xi }),
                stats,
                tau: *tau,
            });
        }
    }
    Err(FormulationError::FixedPointDiverged {
        iterations: MAX_ITER,
        update,
    })
}
