//! Global L2 projection P_h onto the FE space and the element-wise norms
//! of its orthogonal complement P_h^perp = I - P_h, applied to fields that
//! are evaluable element by element (strong residuals in particular).

use crate::field::FeFunction;
use crate::mesh::{DofMap, Mesh};
use crate::parallel;
use crate::quadrature::{gauss_rule, q1_shape};
use crate::sparse::{self, CooBuilder, CsrMatrix, SolverConfig, SparseError};

/// Field evaluable at reference points of each element, with the
/// quadrature order at which its integrals should be taken.
pub struct ElementField<'a> {
    eval: Box<dyn Fn(usize, f64, f64) -> f64 + Sync + 'a>,
    pub quad_order: usize,
}

impl<'a> ElementField<'a> {
    pub fn new(quad_order: usize, eval: impl Fn(usize, f64, f64) -> f64 + Sync + 'a) -> Self {
        ElementField {
            eval: Box::new(eval),
            quad_order,
        }
    }

    /// Wrap an existing FE function (used for idempotence checks).
    pub fn from_fe(u: &'a FeFunction, mesh: &'a Mesh, dofs: &'a DofMap, quad_order: usize) -> Self {
        ElementField::new(quad_order, move |e, xi, eta| u.value_at(mesh, dofs, e, xi, eta))
    }

    #[inline]
    pub fn value(&self, e: usize, xi: f64, eta: f64) -> f64 {
        (self.eval)(e, xi, eta)
    }
}

/// Cached mass matrix and solver settings for repeated projections.
pub struct ProjectionWorkspace {
    pub mass: CsrMatrix,
    pub solver: SolverConfig,
    pub dofs: DofMap,
}

impl ProjectionWorkspace {
    /// Projection onto the homogeneous-Dirichlet-constrained FE space.
    pub fn new(mesh: &Mesh, dofs: &DofMap) -> Self {
        Self::with_dofs(mesh, dofs.clone())
    }

    /// Projection onto the unconstrained FE space (all nodes free); kept
    /// as a sensitivity-check variant.
    pub fn new_unconstrained(mesh: &Mesh) -> Self {
        Self::with_dofs(mesh, DofMap::all_free(mesh))
    }

    fn with_dofs(mesh: &Mesh, dofs: DofMap) -> Self {
        let rule = gauss_rule(2).expect("order 2 supported");
        let det_j = 0.25 * mesh.h * mesh.h;
        let mut coo = CooBuilder::new(dofs.n_free, dofs.n_free);
        for e in 0..mesh.elements.len() {
            let el = mesh.elements[e];
            for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
                let n = q1_shape(pt[0], pt[1]);
                for i in 0..4 {
                    let Some(r) = dofs.node_to_dof[el[i]] else { continue };
                    for j in 0..4 {
                        let Some(c) = dofs.node_to_dof[el[j]] else { continue };
                        coo.push(r, c, wq * det_j * n[i] * n[j]);
                    }
                }
            }
        }
        ProjectionWorkspace {
            mass: coo.build(),
            solver: SolverConfig::cg_jacobi(1e-12),
            dofs,
        }
    }
}

/// Moments b_i = sum_K <phi_i, w>_K at the field's quadrature order.
pub fn moments(mesh: &Mesh, dofs: &DofMap, w: &ElementField) -> Vec<f64> {
    let rule = gauss_rule(w.quad_order.max(2)).expect("supported order");
    let det_j = 0.25 * mesh.h * mesh.h;
    let locals: Vec<([Option<usize>; 4], [f64; 4])> =
        parallel::map_indexed(mesh.elements.len(), |e| {
            let mut local = [0.0; 4];
            for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
                let wv = w.value(e, pt[0], pt[1]);
                let n = q1_shape(pt[0], pt[1]);
                for i in 0..4 {
                    local[i] += wq * det_j * wv * n[i];
                }
            }
            let el = mesh.elements[e];
            (std::array::from_fn(|i| dofs.node_to_dof[el[i]]), local)
        });
    let mut b = vec![0.0; dofs.n_free];
    for (ds, local) in locals {
        for i in 0..4 {
            if let Some(d) = ds[i] {
                b[d] += local[i];
            }
        }
    }
    b
}

/// Global L2 projection: solve M p = b with b the moments of w.
pub fn l2_project(
    ws: &ProjectionWorkspace,
    mesh: &Mesh,
    w: &ElementField,
) -> Result<FeFunction, SparseError> {
    let b = moments(mesh, &ws.dofs, w);
    let (coeffs, _) = sparse::solve(&ws.mass, &b, &ws.solver)?;
    Ok(FeFunction { coeffs })
}

/// Per-element squared L2 norm of w, at its quadrature order.
pub fn element_l2_norms(mesh: &Mesh, w: &ElementField) -> Vec<f64> {
    let rule = gauss_rule(w.quad_order.max(2)).expect("supported order");
    let det_j = 0.25 * mesh.h * mesh.h;
    parallel::map_indexed(mesh.elements.len(), |e| {
        let mut acc = 0.0;
        for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
            let v = w.value(e, pt[0], pt[1]);
            acc += wq * det_j * v * v;
        }
        acc
    })
}

/// Per-element squared norms of the orthogonal component P_h^perp(w),
/// clamped at zero against roundoff.
pub fn orthogonal_component_element_norms(
    ws: &ProjectionWorkspace,
    mesh: &Mesh,
    w: &ElementField,
) -> Result<Vec<f64>, SparseError> {
    let p = l2_project(ws, mesh, w)?;
    let rule = gauss_rule(w.quad_order.max(2)).expect("supported order");
    let det_j = 0.25 * mesh.h * mesh.h;
    let dofs = &ws.dofs;
    Ok(parallel::map_indexed(mesh.elements.len(), |e| {
        let mut acc = 0.0;
        for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
            let diff = w.value(e, pt[0], pt[1]) - p.value_at(mesh, dofs, e, pt[0], pt[1]);
            acc += wq * det_j * diff * diff;
        }
        acc.max(0.0)
    }))
}
