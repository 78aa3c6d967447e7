//! Assembly of the discrete operators: diffusion stiffness, convection,
//! mass, streamline product, inter-element edge-jump form, the literal
//! adjoint/residual pairings used by the stabilized formulations, and
//! load vectors. All operators act on free dofs only (Dirichlet rows and
//! columns are eliminated during assembly).

use crate::field::FeFunction;
use crate::mesh::{DofMap, Mesh};
use crate::parallel;
use crate::quadrature::{gauss_edge_rule, gauss_rule, q1_grad, q1_laplacian, q1_shape};
use crate::sparse::{CooBuilder, CsrMatrix};
use std::sync::Arc;

/// Scalar field over the domain, shared across parallel loops.
pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Constant-coefficient problem data for -k Lap(u) + a.grad(u) + s u = f.
#[derive(Clone)]
pub struct PhysicalParams {
    pub k: f64,
    pub a: [f64; 2],
    pub s: f64,
    pub f: ScalarField,
}

impl std::fmt::Debug for PhysicalParams {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("PhysicalParams")
            .field("k", &self.k)
            .field("a", &self.a)
            .field("s", &self.s)
            .finish_non_exhaustive()
    }
}

impl PhysicalParams {
    pub fn new(k: f64, a: [f64; 2], s: f64, f: ScalarField) -> Self {
        assert!(k > 0.0, "diffusion coefficient must be positive");
        assert!(s >= 0.0, "reaction coefficient must be nonnegative");
        PhysicalParams { k, a, s, f }
    }

    pub fn a_norm(&self) -> f64 {
        (self.a[0] * self.a[0] + self.a[1] * self.a[1]).sqrt()
    }
}

/// Discrete operators over the free dofs, row index = test function.
///
/// The adjoint pairings evaluate the full differential operators at the
/// quadrature points, including the (vanishing) Q1 Laplacian term, rather
/// than dropping it.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    /// k (grad u, grad v)
    pub k_diff: CsrMatrix,
    /// (a.grad u, v)
    pub c_conv: CsrMatrix,
    /// (u, v)
    pub m_mass: CsrMatrix,
    /// (a.grad u, a.grad v)
    pub d_stream: CsrMatrix,
    /// sum_E <k [dn u], k [dn v]>_E over interior edges
    pub j_edge: CsrMatrix,
    /// (u, a.grad v)
    pub g_conv_rhs_map: CsrMatrix,
    /// <-L* v, L u> = (k Lap v + a.grad v - s v, -k Lap u + a.grad u + s u)
    pub adj_residual: CsrMatrix,
    /// <-L* v, u> = (k Lap v + a.grad v - s v, u)
    pub adj_mass: CsrMatrix,
    /// <L u, v> = (-k Lap u + a.grad u + s u, v)
    pub op_mass: CsrMatrix,
}

const N_ELEM_OPS: usize = 8;

/// Assemble all element / edge operators. Element integrands of Q1 x Q1
/// products are exact with the 2x2 Gauss rule on affine squares.
pub fn assemble_operators(mesh: &Mesh, dofs: &DofMap, params: &PhysicalParams) -> OperatorSet {
    let rule = gauss_rule(2).expect("order 2 supported");
    let h = mesh.h;
    let det_j = 0.25 * h * h;
    let (k, a, s) = (params.k, params.a, params.s);

    // With constant coefficients on a uniform mesh of identical affine
    // squares, every element produces the same 4x4 blocks: integrate once.
    // Order: m, kd, c, g, d, t, w, l.
    let mut local = [[[0.0f64; 4]; 4]; N_ELEM_OPS];
    for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
        let wgt = wq * det_j;
        let n = q1_shape(pt[0], pt[1]);
        let g = q1_grad(pt[0], pt[1], h).expect("h > 0");
        let lap = q1_laplacian(pt[0], pt[1], h);
        let ag: [f64; 4] = std::array::from_fn(|i| a[0] * g[i][0] + a[1] * g[i][1]);
        // full operator evaluations, Laplacian included
        let lu: [f64; 4] = std::array::from_fn(|i| -k * lap[i] + ag[i] + s * n[i]);
        let adj: [f64; 4] = std::array::from_fn(|i| k * lap[i] + ag[i] - s * n[i]);
        for i in 0..4 {
            for j in 0..4 {
                local[0][i][j] += wgt * n[i] * n[j];
                local[1][i][j] += wgt * k * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                local[2][i][j] += wgt * ag[j] * n[i];
                local[3][i][j] += wgt * n[j] * ag[i];
                local[4][i][j] += wgt * ag[i] * ag[j];
                local[5][i][j] += wgt * adj[i] * lu[j];
                local[6][i][j] += wgt * adj[i] * n[j];
                local[7][i][j] += wgt * lu[j] * n[i];
            }
        }
    }

    // All eight matrices share one sparsity pattern; build it with a
    // single sort over (row, col, local-entry) triplets and scatter the
    // shared local blocks into per-operator value arrays.
    let nf = dofs.n_free;
    let mut trip: Vec<(u32, u32, u8)> = Vec::with_capacity(16 * mesh.elements.len());
    for el in &mesh.elements {
        let ed: [Option<usize>; 4] = std::array::from_fn(|i| dofs.node_to_dof[el[i]]);
        for i in 0..4 {
            let Some(r) = ed[i] else { continue };
            for j in 0..4 {
                let Some(c) = ed[j] else { continue };
                trip.push((r as u32, c as u32, (4 * i + j) as u8));
            }
        }
    }
    trip.sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);
    let mut row_offsets = vec![0usize; nf + 1];
    let mut col_indices = Vec::new();
    let mut vals: [Vec<f64>; N_ELEM_OPS] = std::array::from_fn(|_| Vec::new());
    let mut pos = 0;
    while pos < trip.len() {
        let (r, c, _) = trip[pos];
        let mut sums = [0.0f64; N_ELEM_OPS];
        while pos < trip.len() && trip[pos].0 == r && trip[pos].1 == c {
            let ij = trip[pos].2 as usize;
            for (m, sum) in sums.iter_mut().enumerate() {
                *sum += local[m][ij / 4][ij % 4];
            }
            pos += 1;
        }
        col_indices.push(c as usize);
        for (m, v) in vals.iter_mut().enumerate() {
            v.push(sums[m]);
        }
        row_offsets[r as usize + 1] = col_indices.len();
    }
    // rows without entries inherit the previous offset
    for r in 1..=nf {
        row_offsets[r] = row_offsets[r].max(row_offsets[r - 1]);
    }
    let mut vals = vals.into_iter();
    let next = |v: Vec<f64>| CsrMatrix {
        n_rows: nf,
        n_cols: nf,
        row_offsets: row_offsets.clone(),
        col_indices: col_indices.clone(),
        values: v,
    };
    let m_mass = next(vals.next().unwrap());
    let k_diff = next(vals.next().unwrap());
    let c_conv = next(vals.next().unwrap());
    let g_conv_rhs_map = next(vals.next().unwrap());
    let d_stream = next(vals.next().unwrap());
    let adj_residual = next(vals.next().unwrap());
    let adj_mass = next(vals.next().unwrap());
    let op_mass = next(vals.next().unwrap());

    OperatorSet {
        k_diff,
        c_conv,
        m_mass,
        d_stream,
        j_edge: assemble_edge_jump_matrix(mesh, dofs, params.k),
        g_conv_rhs_map,
        adj_residual,
        adj_mass,
        op_mass,
    }
}

/// Basis-function normal-derivative jumps on an interior edge: up to 6
/// distinct nodes of the two adjacent elements contribute.
fn edge_jump_basis(
    mesh: &Mesh,
    edge: &crate::mesh::Edge,
    t: f64,
) -> ([usize; 8], [f64; 8], usize) {
    // physical point along the edge
    let pa = mesh.nodes[edge.node_a];
    let pb = mesh.nodes[edge.node_b];
    let x = 0.5 * (pa[0] + pb[0]) + 0.5 * t * (pb[0] - pa[0]);
    let y = 0.5 * (pa[1] + pb[1]) + 0.5 * t * (pb[1] - pa[1]);
    let n = edge.unit_normal;
    let mut nodes = [usize::MAX; 8];
    let mut jumps = [0.0f64; 8];
    let mut count = 0usize;
    for (side, &e) in [edge.elem_left, edge.elem_right].iter().enumerate() {
        let sign = if side == 0 { 1.0 } else { -1.0 };
        let o = mesh.elem_origin(e);
        let xi = (2.0 * (x - o[0]) / mesh.h - 1.0).clamp(-1.0, 1.0);
        let eta = (2.0 * (y - o[1]) / mesh.h - 1.0).clamp(-1.0, 1.0);
        let g = q1_grad(xi, eta, mesh.h).expect("h > 0");
        for (loc, &node) in mesh.elements[e].iter().enumerate() {
            let dn = n[0] * g[loc][0] + n[1] * g[loc][1];
            // merge contributions of nodes shared by both elements
            let slot = nodes[..count].iter().position(|&m| m == node);
            match slot {
                Some(s) => jumps[s] += sign * dn,
                None => {
                    nodes[count] = node;
                    jumps[count] = sign * dn;
                    count += 1;
                }
            }
        }
    }
    (nodes, jumps, count)
}

fn assemble_edge_jump_matrix(mesh: &Mesh, dofs: &DofMap, k: f64) -> CsrMatrix {
    let rule = gauss_edge_rule(2).expect("order 2 supported");
    let nf = dofs.n_free;
    let mut coo = CooBuilder::new(nf, nf);
    let blocks: Vec<_> = parallel::map_indexed(mesh.interior_edges.len(), |ei| {
        let edge = &mesh.interior_edges[ei];
        let mut nodes = [usize::MAX; 8];
        let mut local = [[0.0f64; 8]; 8];
        let mut count = 0;
        for (t, &wq) in rule.points.iter().zip(&rule.weights) {
            let (pn, pj, pc) = edge_jump_basis(mesh, edge, *t);
            nodes = pn;
            count = pc;
            let wgt = wq * 0.5 * edge.length * k * k;
            for i in 0..pc {
                for j in 0..pc {
                    local[i][j] += wgt * pj[i] * pj[j];
                }
            }
        }
        (nodes, local, count)
    });
    for (nodes, local, count) in blocks {
        for i in 0..count {
            let Some(r) = dofs.node_to_dof[nodes[i]] else { continue };
            for j in 0..count {
                let Some(c) = dofs.node_to_dof[nodes[j]] else { continue };
                coo.push(r, c, local[i][j]);
            }
        }
    }
    coo.build()
}

/// Load vector b_i = int f phi_i with the given quadrature order.
pub fn assemble_load(mesh: &Mesh, dofs: &DofMap, f: &ScalarField, quad_order: usize) -> Vec<f64> {
    let rule = gauss_rule(quad_order).expect("supported order");
    let det_j = 0.25 * mesh.h * mesh.h;
    let locals: Vec<([Option<usize>; 4], [f64; 4])> =
        parallel::map_indexed(mesh.elements.len(), |e| {
            let mut local = [0.0; 4];
            for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
                let p = mesh.elem_point(e, pt[0], pt[1]);
                let fv = f(p[0], p[1]);
                let n = q1_shape(pt[0], pt[1]);
                for i in 0..4 {
                    local[i] += wq * det_j * fv * n[i];
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

/// Adjoint load b_i = int f (k Lap phi_i + a.grad phi_i - s phi_i),
/// pairing the forcing with -L* of the test functions.
pub fn assemble_adjoint_load(
    mesh: &Mesh,
    dofs: &DofMap,
    params: &PhysicalParams,
    quad_order: usize,
) -> Vec<f64> {
    let rule = gauss_rule(quad_order).expect("supported order");
    let det_j = 0.25 * mesh.h * mesh.h;
    let (k, a, s) = (params.k, params.a, params.s);
    let f = &params.f;
    let locals: Vec<([Option<usize>; 4], [f64; 4])> =
        parallel::map_indexed(mesh.elements.len(), |e| {
            let mut local = [0.0; 4];
            for (pt, &wq) in rule.points.iter().zip(&rule.weights) {
                let p = mesh.elem_point(e, pt[0], pt[1]);
                let fv = f(p[0], p[1]);
                let n = q1_shape(pt[0], pt[1]);
                let g = q1_grad(pt[0], pt[1], mesh.h).expect("h > 0");
                let lap = q1_laplacian(pt[0], pt[1], mesh.h);
                for i in 0..4 {
                    let adj = k * lap[i] + a[0] * g[i][0] + a[1] * g[i][1] - s * n[i];
                    local[i] += wq * det_j * fv * adj;
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

/// Per-edge squared L2 norm of the diffusive-flux jump k [dn u_h].
pub fn edge_jump_norms(mesh: &Mesh, dofs: &DofMap, u_h: &FeFunction, k: f64) -> Vec<f64> {
    let rule = gauss_edge_rule(3).expect("order 3 supported");
    let nodal = u_h.node_values(dofs);
    parallel::map_indexed(mesh.interior_edges.len(), |ei| {
        let edge = &mesh.interior_edges[ei];
        let mut acc = 0.0;
        for (t, &wq) in rule.points.iter().zip(&rule.weights) {
            let (nodes, jumps, count) = edge_jump_basis(mesh, edge, *t);
            let mut jump = 0.0;
            for i in 0..count {
                jump += nodal[nodes[i]] * jumps[i];
            }
            acc += wq * 0.5 * edge.length * (k * jump) * (k * jump);
        }
        acc
    })
}
