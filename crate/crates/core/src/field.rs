//! Finite element functions: coefficient vectors over the free dofs of a
//! mesh, with zero trace on the Dirichlet boundary.

use crate::mesh::{DofMap, Mesh, MeshError};
use crate::quadrature::{q1_grad, q1_laplacian, q1_shape};

/// Q1 FE field given by its free-dof coefficients; boundary nodes are
/// implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    pub coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(n_free: usize) -> Self {
        FeFunction { coeffs: vec![0.0; n_free] }
    }

    /// Expand to per-node values (boundary nodes get 0).
    pub fn node_values(&self, dofs: &DofMap) -> Vec<f64> {
        dofs.node_to_dof
            .iter()
            .map(|d| d.map_or(0.0, |i| self.coeffs[i]))
            .collect()
    }

    /// Local coefficients of an element in counterclockwise node order.
    pub fn elem_coeffs(&self, mesh: &Mesh, dofs: &DofMap, e: usize) -> [f64; 4] {
        let el = mesh.elements[e];
        let mut c = [0.0; 4];
        for (k, &node) in el.iter().enumerate() {
            if let Some(d) = dofs.node_to_dof[node] {
                c[k] = self.coeffs[d];
            }
        }
        c
    }

    pub fn value_at(&self, mesh: &Mesh, dofs: &DofMap, e: usize, xi: f64, eta: f64) -> f64 {
        let c = self.elem_coeffs(mesh, dofs, e);
        let n = q1_shape(xi, eta);
        (0..4).map(|i| c[i] * n[i]).sum()
    }

    pub fn grad_at(&self, mesh: &Mesh, dofs: &DofMap, e: usize, xi: f64, eta: f64) -> [f64; 2] {
        let c = self.elem_coeffs(mesh, dofs, e);
        let g = q1_grad(xi, eta, mesh.h).expect("mesh h > 0");
        let mut out = [0.0; 2];
        for i in 0..4 {
            out[0] += c[i] * g[i][0];
            out[1] += c[i] * g[i][1];
        }
        out
    }

    pub fn laplacian_at(&self, mesh: &Mesh, dofs: &DofMap, e: usize, xi: f64, eta: f64) -> f64 {
        let c = self.elem_coeffs(mesh, dofs, e);
        let lap = q1_laplacian(xi, eta, mesh.h);
        (0..4).map(|i| c[i] * lap[i]).sum()
    }

    /// Evaluate at an arbitrary physical point via element location.
    pub fn eval_point(&self, mesh: &Mesh, dofs: &DofMap, x: f64, y: f64) -> Result<f64, MeshError> {
        let (e, xi, eta) = mesh.locate(x, y)?;
        Ok(self.value_at(mesh, dofs, e, xi, eta))
    }

    /// Interpolate onto a nested refinement (coefficients at fine nodes).
    pub fn prolongate(
        &self,
        mesh: &Mesh,
        dofs: &DofMap,
        fine_mesh: &Mesh,
        fine_dofs: &DofMap,
    ) -> Result<FeFunction, MeshError> {
        let mut out = FeFunction::zeros(fine_dofs.n_free);
        for (node, p) in fine_mesh.nodes.iter().enumerate() {
            if let Some(d) = fine_dofs.node_to_dof[node] {
                out.coeffs[d] = self.eval_point(mesh, dofs, p[0], p[1])?;
            }
        }
        Ok(out)
    }
}
