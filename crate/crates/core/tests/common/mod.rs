//! Dense brute-force oracles for the sparse pipeline.
//!
//! Everything here is written directly against piecewise-bilinear hat
//! functions in physical coordinates with 10-point Gauss quadrature per
//! element, independent of the reference-element assembly inside the
//! library. Matrices are dense `Vec<Vec<f64>>`, systems are solved by an
//! inline LU with partial pivoting.

use cdrfem::assembly::PhysicalParams;
use cdrfem::estimator::{estimate, EstimatorMode};
use cdrfem::formulation::{
    asgs_matrix, compute_tau, galerkin_matrix, solve_stabilized, FormulationConfig,
    FormulationKind, StabConstants,
};
use cdrfem::mesh::{build_unit_square_mesh, DofMap, Mesh};
use cdrfem::projection::{l2_project, ElementField, ProjectionWorkspace};
use cdrfem::quadrature::gauss_points_1d;
use cdrfem::sparse::CsrMatrix;
use cdrfem::FeFunction;
use std::sync::Arc;

const QUAD_1D: usize = 10;

/// 1D hat centered at c with support radius h.
fn hat(t: f64, c: f64, h: f64) -> f64 {
    (1.0 - ((t - c) / h).abs()).max(0.0)
}

/// Derivative of `hat`; at the kinks the side is picked by t < c, which
/// no Gauss point ever hits on these meshes.
fn dhat(t: f64, c: f64, h: f64) -> f64 {
    if t <= c - h || t >= c + h {
        0.0
    } else if t < c {
        1.0 / h
    } else {
        -1.0 / h
    }
}

fn phi(mesh: &Mesh, node: usize, x: f64, y: f64) -> f64 {
    let p = mesh.nodes[node];
    hat(x, p[0], mesh.h) * hat(y, p[1], mesh.h)
}

fn grad_phi(mesh: &Mesh, node: usize, x: f64, y: f64) -> [f64; 2] {
    let p = mesh.nodes[node];
    [
        dhat(x, p[0], mesh.h) * hat(y, p[1], mesh.h),
        hat(x, p[0], mesh.h) * dhat(y, p[1], mesh.h),
    ]
}

/// Per-element quadrature points in physical coordinates with weights.
fn element_points(mesh: &Mesh, e: usize) -> Vec<(f64, f64, f64)> {
    let (pts, wts) = gauss_points_1d(QUAD_1D);
    let el = mesh.elements[e];
    let x0 = el.iter().map(|&n| mesh.nodes[n][0]).fold(f64::MAX, f64::min);
    let y0 = el.iter().map(|&n| mesh.nodes[n][1]).fold(f64::MAX, f64::min);
    let half = 0.5 * mesh.h;
    let det = half * half;
    let mut out = Vec::with_capacity(QUAD_1D * QUAD_1D);
    for (j, &py) in pts.iter().enumerate() {
        for (i, &px) in pts.iter().enumerate() {
            out.push((
                x0 + half * (px + 1.0),
                y0 + half * (py + 1.0),
                wts[i] * wts[j] * det,
            ));
        }
    }
    out
}

/// Inline dense LU solve with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.clone()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        assert!(m[col][col] != 0.0, "singular oracle matrix");
        for row in col + 1..n {
            let fac = m[row][col] / m[col][col];
            if fac == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= fac * m[col][k];
            }
            x[row] -= fac * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for row in 0..col {
            x[row] -= m[row][col] * x[col];
        }
    }
    x
}

/// Dense operator matrices over the free dofs, same catalogue as the
/// sparse `OperatorSet` (the Q1 Laplacian vanishes identically, so the
/// full-operator pairings reduce to their convection/reaction parts).
pub struct DenseOps {
    pub m: Vec<Vec<f64>>,
    pub kd: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub t: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
}

pub fn dense_operators(mesh: &Mesh, dofs: &DofMap, k: f64, a: [f64; 2], s: f64) -> DenseOps {
    let nf = dofs.n_free;
    let zero = || vec![vec![0.0; nf]; nf];
    let mut ops = DenseOps {
        m: zero(),
        kd: zero(),
        c: zero(),
        g: zero(),
        d: zero(),
        t: zero(),
        w: zero(),
        l: zero(),
        j: zero(),
    };
    for e in 0..mesh.elements.len() {
        let el = mesh.elements[e];
        for (x, y, wq) in element_points(mesh, e) {
            for &ni in &el {
                let Some(r) = dofs.node_to_dof[ni] else { continue };
                let pi = phi(mesh, ni, x, y);
                let gi = grad_phi(mesh, ni, x, y);
                let agi = a[0] * gi[0] + a[1] * gi[1];
                for &nj in &el {
                    let Some(c) = dofs.node_to_dof[nj] else { continue };
                    let pj = phi(mesh, nj, x, y);
                    let gj = grad_phi(mesh, nj, x, y);
                    let agj = a[0] * gj[0] + a[1] * gj[1];
                    ops.m[r][c] += wq * pi * pj;
                    ops.kd[r][c] += wq * k * (gi[0] * gj[0] + gi[1] * gj[1]);
                    ops.c[r][c] += wq * agj * pi;
                    ops.g[r][c] += wq * pj * agi;
                    ops.d[r][c] += wq * agi * agj;
                    ops.t[r][c] += wq * (agi - s * pi) * (agj + s * pj);
                    ops.w[r][c] += wq * (agi - s * pi) * pj;
                    ops.l[r][c] += wq * (agj + s * pj) * pi;
                }
            }
        }
    }
    // edge-jump form: sides are selected by stepping h/4 off the edge
    // along the normal; products of jumps are invariant to the jump sign
    // convention.
    let (pts, wts) = gauss_points_1d(QUAD_1D);
    for edge in &mesh.interior_edges {
        let pa = mesh.nodes[edge.node_a];
        let pb = mesh.nodes[edge.node_b];
        let n = edge.unit_normal;
        let delta = 0.25 * mesh.h;
        let mut nodes: Vec<usize> = Vec::new();
        for &e in &[edge.elem_left, edge.elem_right] {
            for &nd in &mesh.elements[e] {
                if !nodes.contains(&nd) {
                    nodes.push(nd);
                }
            }
        }
        for (&t, &wq) in pts.iter().zip(&wts) {
            let x = 0.5 * (pa[0] + pb[0]) + 0.5 * t * (pb[0] - pa[0]);
            let y = 0.5 * (pa[1] + pb[1]) + 0.5 * t * (pb[1] - pa[1]);
            let w = wq * 0.5 * edge.length * k * k;
            let jump: Vec<f64> = nodes
                .iter()
                .map(|&nd| {
                    let gm = grad_phi(mesh, nd, x - delta * n[0], y - delta * n[1]);
                    let gp = grad_phi(mesh, nd, x + delta * n[0], y + delta * n[1]);
                    n[0] * (gm[0] - gp[0]) + n[1] * (gm[1] - gp[1])
                })
                .collect();
            for (i, &ni) in nodes.iter().enumerate() {
                let Some(r) = dofs.node_to_dof[ni] else { continue };
                for (j, &nj) in nodes.iter().enumerate() {
                    let Some(c) = dofs.node_to_dof[nj] else { continue };
                    ops.j[r][c] += w * jump[i] * jump[j];
                }
            }
        }
    }
    ops
}

pub fn dense_load(mesh: &Mesh, dofs: &DofMap, f: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; dofs.n_free];
    for e in 0..mesh.elements.len() {
        for (x, y, wq) in element_points(mesh, e) {
            let fv = f(x, y);
            for &nd in &mesh.elements[e] {
                if let Some(d) = dofs.node_to_dof[nd] {
                    b[d] += wq * fv * phi(mesh, nd, x, y);
                }
            }
        }
    }
    b
}

fn dense_adjoint_load(
    mesh: &Mesh,
    dofs: &DofMap,
    a: [f64; 2],
    s: f64,
    f: &dyn Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let mut b = vec![0.0; dofs.n_free];
    for e in 0..mesh.elements.len() {
        for (x, y, wq) in element_points(mesh, e) {
            let fv = f(x, y);
            for &nd in &mesh.elements[e] {
                if let Some(d) = dofs.node_to_dof[nd] {
                    let g = grad_phi(mesh, nd, x, y);
                    b[d] += wq * fv * (a[0] * g[0] + a[1] * g[1] - s * phi(mesh, nd, x, y));
                }
            }
        }
    }
    b
}

fn lin_comb(terms: &[(f64, &Vec<Vec<f64>>)]) -> Vec<Vec<f64>> {
    let n = terms[0].1.len();
    let mut out = vec![vec![0.0; n]; n];
    for &(c, m) in terms {
        for (orow, mrow) in out.iter_mut().zip(m) {
            for (o, v) in orow.iter_mut().zip(mrow) {
                *o += c * v;
            }
        }
    }
    out
}

fn csr_minus_dense(a: &CsrMatrix, b: &[Vec<f64>]) -> f64 {
    let ad = a.to_dense();
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (ar, br) in ad.iter().zip(b) {
        for (&av, &bv) in ar.iter().zip(br) {
            diff += (av - bv) * (av - bv);
            norm += bv * bv;
        }
    }
    (diff / norm).sqrt()
}

pub fn rel_vec_diff(x: &[f64], oracle: &[f64]) -> f64 {
    let diff: f64 = x
        .iter()
        .zip(oracle)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let norm: f64 = oracle.iter().map(|v| v * v).sum();
    (diff / norm).sqrt()
}

/// Evaluate an FE coefficient vector through the oracle basis.
fn fe_value(mesh: &Mesh, dofs: &DofMap, coeffs: &[f64], x: f64, y: f64) -> f64 {
    let mut v = 0.0;
    for (node, &d) in dofs.node_to_dof.iter().enumerate() {
        if let Some(d) = d {
            if coeffs[d] != 0.0 {
                v += coeffs[d] * phi(mesh, node, x, y);
            }
        }
    }
    v
}

fn fe_grad(mesh: &Mesh, dofs: &DofMap, coeffs: &[f64], x: f64, y: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (node, &d) in dofs.node_to_dof.iter().enumerate() {
        if let Some(d) = d {
            let gp = grad_phi(mesh, node, x, y);
            g[0] += coeffs[d] * gp[0];
            g[1] += coeffs[d] * gp[1];
        }
    }
    g
}

/// The manufactured data used by all the oracle comparisons: a bilinear
/// forcing, which every quadrature rule in play integrates exactly
/// against the piecewise-bilinear residual quantities.
pub fn oracle_params() -> (f64, [f64; 2], f64, Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>) {
    (
        0.3,
        [0.4, 0.7],
        0.5,
        Arc::new(|x, y| 1.0 + 2.0 * x - y + 3.0 * x * y),
    )
}

/// Run every oracle comparison on an n-by-n unit-square mesh, returning
/// (check name, relative discrepancy vs the dense oracle) pairs.
pub fn oracle_checks(n: usize) -> Vec<(&'static str, f64)> {
    let mesh = build_unit_square_mesh(n).unwrap();
    let dofs = DofMap::new(&mesh);
    let (k, a, s, f) = oracle_params();
    let params = PhysicalParams::new(k, a, s, f.clone());
    let ops = cdrfem::assemble_operators(&mesh, &dofs, &params);
    let oracle = dense_operators(&mesh, &dofs, k, a, s);
    let tau = compute_tau(k, params.a_norm(), s, mesh.h, &StabConstants::default()).unwrap();

    let mut out = Vec::new();
    let gal_oracle = lin_comb(&[(1.0, &oracle.kd), (1.0, &oracle.c), (s, &oracle.m)]);
    out.push((
        "galerkin matrix",
        csr_minus_dense(&galerkin_matrix(&ops, s), &gal_oracle),
    ));
    let stab_oracle = lin_comb(&[
        (1.0, &oracle.kd),
        (1.0, &oracle.c),
        (s, &oracle.m),
        (tau.tau_k, &oracle.t),
        (-tau.tau_e, &oracle.j),
    ]);
    out.push((
        "asgs matrix",
        csr_minus_dense(&asgs_matrix(&ops, s, &tau, true), &stab_oracle),
    ));
    out.push(("edge jump matrix", csr_minus_dense(&ops.j_edge, &oracle.j)));

    // stabilized solves against dense LU on the oracle blocks
    let b_f = dense_load(&mesh, &dofs, &*f);
    let b_adj = dense_adjoint_load(&mesh, &dofs, a, s, &*f);
    let nf = dofs.n_free;
    let rhs: Vec<f64> = (0..nf).map(|i| b_f[i] + tau.tau_k * b_adj[i]).collect();

    let asgs = solve_stabilized(
        &mesh,
        &dofs,
        &params,
        &ops,
        &FormulationConfig::with_kind(FormulationKind::Asgs),
    )
    .unwrap();
    out.push((
        "asgs solve",
        rel_vec_diff(&asgs.u.coeffs, &dense_solve(&stab_oracle, &rhs)),
    ));

    let mut block = vec![vec![0.0; 2 * nf]; 2 * nf];
    for r in 0..nf {
        for c in 0..nf {
            block[r][c] = stab_oracle[r][c];
            block[r][nf + c] = -tau.tau_k * oracle.w[r][c];
            block[nf + r][c] = -oracle.l[r][c];
            block[nf + r][nf + c] = oracle.m[r][c];
        }
    }
    let mut brhs = vec![0.0; 2 * nf];
    brhs[..nf].copy_from_slice(&rhs);
    for i in 0..nf {
        brhs[nf + i] = -b_f[i];
    }
    let osgs = solve_stabilized(
        &mesh,
        &dofs,
        &params,
        &ops,
        &FormulationConfig::with_kind(FormulationKind::Osgs),
    )
    .unwrap();
    let block_oracle = dense_solve(&block, &brhs);
    out.push((
        "osgs block solve",
        rel_vec_diff(&osgs.u.coeffs, &block_oracle[..nf]),
    ));

    // L2 projection of a smooth field against dense normal equations
    let wfun = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).cos();
    let ws = ProjectionWorkspace::new(&mesh, &dofs);
    let field = ElementField::new(6, |e, xi, eta| {
        let p = mesh.elem_point(e, xi, eta);
        wfun(p[0], p[1])
    });
    let proj = l2_project(&ws, &mesh, &field).unwrap();
    let proj_oracle = dense_solve(&oracle.m, &dense_load(&mesh, &dofs, &wfun));
    out.push(("l2 projection", rel_vec_diff(&proj.coeffs, &proj_oracle)));

    // estimator against brute-force residual integrals
    let u = &osgs.u.coeffs;
    let resid = |x: f64, y: f64| {
        let g = fe_grad(&mesh, &dofs, u, x, y);
        // the Q1 Laplacian vanishes identically, so -k lap(u_h) drops out
        f(x, y) - (a[0] * g[0] + a[1] * g[1] + s * fe_value(&mesh, &dofs, u, x, y))
    };
    let pr = dense_solve(&oracle.m, &dense_load(&mesh, &dofs, &resid));
    let mut eta2_osgs = 0.0;
    let mut eta2_asgs = 0.0;
    for e in 0..mesh.elements.len() {
        for (x, y, wq) in element_points(&mesh, e) {
            let r = resid(x, y);
            let p = fe_value(&mesh, &dofs, &pr, x, y);
            eta2_osgs += wq * tau.tau_k * (r - p) * (r - p);
            eta2_asgs += wq * tau.tau_k * r * r;
        }
    }
    let mut edge2 = 0.0;
    let (pts, wts) = gauss_points_1d(QUAD_1D);
    for edge in &mesh.interior_edges {
        let pa = mesh.nodes[edge.node_a];
        let pb = mesh.nodes[edge.node_b];
        let nrm = edge.unit_normal;
        let delta = 0.25 * mesh.h;
        for (&t, &wq) in pts.iter().zip(&wts) {
            let x = 0.5 * (pa[0] + pb[0]) + 0.5 * t * (pb[0] - pa[0]);
            let y = 0.5 * (pa[1] + pb[1]) + 0.5 * t * (pb[1] - pa[1]);
            let gm = fe_grad(&mesh, &dofs, u, x - delta * nrm[0], y - delta * nrm[1]);
            let gp = fe_grad(&mesh, &dofs, u, x + delta * nrm[0], y + delta * nrm[1]);
            let jump = k * (nrm[0] * (gm[0] - gp[0]) + nrm[1] * (gm[1] - gp[1]));
            edge2 += wq * 0.5 * edge.length * tau.tau_e * jump * jump;
        }
    }
    let u_fe = FeFunction { coeffs: u.clone() };
    for (mode, interior2) in [
        (EstimatorMode::Osgs, eta2_osgs),
        (EstimatorMode::Asgs, eta2_asgs),
    ] {
        let rep = estimate(&mesh, &dofs, &params, &tau, &u_fe, mode, &ws, 6).unwrap();
        let eta_oracle = (interior2 + edge2).sqrt();
        let name = match mode {
            EstimatorMode::Osgs => "eta osgs",
            _ => "eta asgs",
        };
        out.push((name, (rep.eta - eta_oracle).abs() / eta_oracle));
    }
    out
}
