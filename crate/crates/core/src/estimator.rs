//! A posteriori error estimation from the sub-grid scales: interior
//! residual contributions (projected or not), diffusive-flux edge jumps,
//! exact-error norms in the L2 and stabilized norms, and effectivity
//! indices.

use crate::assembly::{self, PhysicalParams};
use crate::cases::ExactSolution;
use crate::field::FeFunction;
use crate::formulation::StabParams;
use crate::mesh::{DofMap, Mesh, MeshError};
use crate::parallel;
use crate::projection::{self, ElementField, ProjectionWorkspace};
use crate::quadrature::{gauss_rule, QuadratureError};
use crate::sparse::SparseError;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("exact/reference solution has zero norm; relative quantities undefined")]
    DegenerateNormalization,
    #[error("meshes are not nested refinements of each other")]
    NonNestedMeshes,
    #[error(transparent)]
    Projection(#[from] SparseError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// tau_K ||P_h^perp(R_K)||^2 interior contributions.
    Osgs,
    /// tau_K ||R_K||^2, no projection.
    Asgs,
    /// Projected residual with the a = 0 parameters tau_K0, tau_E0.
    Verfurth0,
}

impl EstimatorMode {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorMode::Osgs => "osgs",
            EstimatorMode::Asgs => "asgs",
            EstimatorMode::Verfurth0 => "verfurth0",
        }
    }
}

/// eta^2 = sum_K interior + sum_E edge; element totals attribute half of
/// each edge contribution to each adjacent element (visualization only,
/// the global value does not depend on the split).
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub mode: EstimatorMode,
    /// Per-element tau-weighted interior contribution (squared).
    pub interior: Vec<f64>,
    /// Per-interior-edge tau-weighted jump contribution (squared).
    pub edge: Vec<f64>,
    /// Per-element eta_K^2.
    pub element_total: Vec<f64>,
    pub eta: f64,
}

pub fn estimate(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    stab: &StabParams,
    u_h: &FeFunction,
    mode: EstimatorMode,
    ws: &ProjectionWorkspace,
    quad_order: usize,
) -> Result<EstimatorReport, EstimatorError> {
    let (k, a, s) = (params.k, params.a, params.s);
    let f = &params.f;
    let residual = ElementField::new(quad_order, move |e, xi, eta| {
        let p = mesh.elem_point(e, xi, eta);
        let lap = u_h.laplacian_at(mesh, dofs, e, xi, eta);
        let g = u_h.grad_at(mesh, dofs, e, xi, eta);
        let v = u_h.value_at(mesh, dofs, e, xi, eta);
        f(p[0], p[1]) - (-k * lap + a[0] * g[0] + a[1] * g[1] + s * v)
    });
    let (tau_k, tau_e) = match mode {
        EstimatorMode::Osgs | EstimatorMode::Asgs => (stab.tau_k, stab.tau_e),
        EstimatorMode::Verfurth0 => (stab.tau_k0, stab.tau_e0),
    };
    let raw_interior = match mode {
        EstimatorMode::Asgs => projection::element_l2_norms(mesh, &residual),
        EstimatorMode::Osgs | EstimatorMode::Verfurth0 => {
            projection::orthogonal_component_element_norms(ws, mesh, &residual)?
        }
    };
    let interior: Vec<f64> = raw_interior.iter().map(|v| tau_k * v).collect();
    let edge: Vec<f64> = assembly::edge_jump_norms(mesh, dofs, u_h, k)
        .iter()
        .map(|v| tau_e * v)
        .collect();
    let mut element_total = interior.clone();
    for (ei, e) in mesh.interior_edges.iter().enumerate() {
        element_total[e.elem_left] += 0.5 * edge[ei];
        element_total[e.elem_right] += 0.5 * edge[ei];
    }
    let eta2: f64 = interior.iter().sum::<f64>() + edge.iter().sum::<f64>();
    Ok(EstimatorReport {
        mode,
        interior,
        edge,
        element_total,
        eta: eta2.max(0.0).sqrt(),
    })
}

/// Exact-error norms: relative L2 and relative stabilized norm
/// |||e|||^2 = k||grad e||^2 + s||e||^2 + tau_K||a.grad e||^2. The L2
/// error is normalized by ||u||; the stabilized error is normalized by
/// the mesh-independent part of |||u||| (the k and s terms only), so
/// that relative and absolute stabilized rates coincide (tau_K depends
/// on h, which would otherwise distort the reported rate).
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub rel_l2: f64,
    pub rel_stab: f64,
    pub abs_l2: f64,
    pub abs_stab: f64,
    /// Squared components of the stabilized error: k||grad e||^2,
    /// s||e||^2, tau_K||a.grad e||^2.
    pub components: [f64; 3],
    /// Squared normalizers: ||u||^2 and k||grad u||^2 + s||u||^2.
    pub denom_l2_sq: f64,
    pub denom_stab_sq: f64,
    /// Per-element squared stabilized error (localized norm).
    pub element_stab: Vec<f64>,
}

pub fn error_norms(
    mesh: &Mesh,
    dofs: &DofMap,
    u_h: &FeFunction,
    exact: &ExactSolution,
    params: &PhysicalParams,
    stab: &StabParams,
    quad_order: usize,
) -> Result<ErrorReport, EstimatorError> {
    let rule = gauss_rule(quad_order)?;
    let det = 0.25 * mesh.h * mesh.h;
    let (k, a, s) = (params.k, params.a, params.s);
    let tk = stab.tau_k;
    // per element: [e^2, k|grad e|^2, s e^2, tau(a.grad e)^2, u^2, |||u|||^2 pieces]
    let locals: Vec<[f64; 6]> = parallel::map_indexed(mesh.elements.len(), |e| {
        let mut acc = [0.0f64; 6];
        for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
            let w = wq * det;
            let p = mesh.elem_point(e, pt[0], pt[1]);
            let ue = (exact.value)(p[0], p[1]);
            let ge = (exact.grad)(p[0], p[1]);
            let uh = u_h.value_at(mesh, dofs, e, pt[0], pt[1]);
            let gh = u_h.grad_at(mesh, dofs, e, pt[0], pt[1]);
            let ev = ue - uh;
            let eg = [ge[0] - gh[0], ge[1] - gh[1]];
            let age = a[0] * eg[0] + a[1] * eg[1];
            acc[0] += w * ev * ev;
            acc[1] += w * k * (eg[0] * eg[0] + eg[1] * eg[1]);
            acc[2] += w * s * ev * ev;
            acc[3] += w * tk * age * age;
            acc[4] += w * ue * ue;
            acc[5] += w * (k * (ge[0] * ge[0] + ge[1] * ge[1]) + s * ue * ue);
        }
        acc
    });
    let mut sums = [0.0f64; 5];
    let element_stab: Vec<f64> = locals
        .iter()
        .map(|acc| {
            sums[0] += acc[0];
            sums[1] += acc[1] + acc[2] + acc[3];
            sums[2] += acc[4];
            sums[3] += acc[5];
            sums[4] += acc[1];
            acc[1] + acc[2] + acc[3]
        })
        .collect();
    let (err_l2_sq, err_stab_sq, den_l2_sq, den_stab_sq) = (sums[0], sums[1], sums[2], sums[3]);
    if den_l2_sq <= 0.0 || den_stab_sq <= 0.0 {
        return Err(EstimatorError::DegenerateNormalization);
    }
    let locals_components: [f64; 3] = [
        locals.iter().map(|a| a[1]).sum(),
        locals.iter().map(|a| a[2]).sum(),
        locals.iter().map(|a| a[3]).sum(),
    ];
    Ok(ErrorReport {
        rel_l2: (err_l2_sq / den_l2_sq).sqrt(),
        rel_stab: (err_stab_sq / den_stab_sq).sqrt(),
        abs_l2: err_l2_sq.sqrt(),
        abs_stab: err_stab_sq.sqrt(),
        components: locals_components,
        denom_l2_sq: den_l2_sq,
        denom_stab_sq: den_stab_sq,
        element_stab,
    })
}

/// Effectivity index eta / |||e|||, with the absolute (unnormalized)
/// stabilized error in the denominator.
pub fn effectivity(est: &EstimatorReport, abs_stab_error: f64) -> Result<f64, EstimatorError> {
    if abs_stab_error <= 0.0 {
        return Err(EstimatorError::DegenerateNormalization);
    }
    Ok(est.eta / abs_stab_error)
}

/// L2 difference against a solution on a nested finer mesh of the same
/// domain, used where no analytic solution is available.
#[derive(Debug, Clone)]
pub struct ReferenceError {
    pub abs_l2: f64,
    pub rel_l2: f64,
}

pub fn reference_error(
    coarse_mesh: &Mesh,
    coarse_dofs: &DofMap,
    coarse_u: &FeFunction,
    fine_mesh: &Mesh,
    fine_dofs: &DofMap,
    fine_u: &FeFunction,
) -> Result<ReferenceError, EstimatorError> {
    if !coarse_mesh.is_nested_refinement(fine_mesh) {
        return Err(EstimatorError::NonNestedMeshes);
    }
    let rule = gauss_rule(4).expect("order 4 supported");
    let det = 0.25 * coarse_mesh.h * coarse_mesh.h;
    let locals: Vec<Result<[f64; 2], MeshError>> =
        parallel::map_indexed(coarse_mesh.elements.len(), |e| {
            let mut acc = [0.0f64; 2];
            for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
                let p = coarse_mesh.elem_point(e, pt[0], pt[1]);
                let uc = coarse_u.value_at(coarse_mesh, coarse_dofs, e, pt[0], pt[1]);
                let uf = fine_u.eval_point(fine_mesh, fine_dofs, p[0], p[1])?;
                let d = uc - uf;
                acc[0] += wq * det * d * d;
                acc[1] += wq * det * uf * uf;
            }
            Ok(acc)
        });
    let mut err_sq = 0.0;
    let mut den_sq = 0.0;
    for l in locals {
        let acc = l?;
        err_sq += acc[0];
        den_sq += acc[1];
    }
    if den_sq <= 0.0 {
        return Err(EstimatorError::DegenerateNormalization);
    }
    Ok(ReferenceError {
        abs_l2: err_sq.sqrt(),
        rel_l2: (err_sq / den_sq).sqrt(),
    })
}
