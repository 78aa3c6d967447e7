//! Structured conforming quadrilateral meshes on the unit square and the
//! L-shaped domain, with interior-edge connectivity and Dirichlet dof maps.
//!
//! Node ordering is lexicographic by (y, x); elements are ordered row by
//! row and their nodes counterclockwise starting at the lower-left corner.
//! For interior edges, `elem_left` is the adjacent element with the smaller
//! index and the unit normal points from `elem_left` into `elem_right`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh subdivision count must be at least 1")]
    ZeroSubdivisions,
    #[error("point ({0}, {1}) lies outside the mesh domain")]
    PointOutsideDomain(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    UnitSquare,
    LShape,
}

/// Interior edge shared by exactly two elements.
#[derive(Debug, Clone)]
pub struct Edge {
    pub node_a: usize,
    pub node_b: usize,
    pub elem_left: usize,
    pub elem_right: usize,
    /// Unit normal oriented from `elem_left` into `elem_right`.
    pub unit_normal: [f64; 2],
    pub length: f64,
}

/// Conforming grid of congruent axis-aligned square elements.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    /// Node indices, counterclockwise from the lower-left corner.
    pub elements: Vec<[usize; 4]>,
    pub interior_edges: Vec<Edge>,
    /// Element side length.
    pub h: f64,
    pub domain_kind: DomainKind,
    /// Grid subdivisions per unit length along each axis.
    grid_n: usize,
    /// Cell (i, j) -> element index, for point location.
    cell_to_elem: Vec<Option<usize>>,
}

/// Map from mesh nodes to free degrees of freedom. Boundary nodes carry
/// the homogeneous Dirichlet condition and have no dof.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub node_to_dof: Vec<Option<usize>>,
    pub n_free: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let bnodes = boundary_nodes(mesh);
        let mut node_to_dof = vec![None; mesh.nodes.len()];
        let mut next = 0;
        for (i, slot) in node_to_dof.iter_mut().enumerate() {
            if !bnodes.contains(&i) {
                *slot = Some(next);
                next += 1;
            }
        }
        DofMap {
            node_to_dof,
            n_free: next,
        }
    }

    /// Dof map treating every node as free (used by the unconstrained
    /// projection variant).
    pub fn all_free(mesh: &Mesh) -> Self {
        DofMap {
            node_to_dof: (0..mesh.nodes.len()).map(Some).collect(),
            n_free: mesh.nodes.len(),
        }
    }
}

/// Build an n-by-n grid of square elements on the unit square.
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::ZeroSubdivisions);
    }
    Ok(build_grid(n, DomainKind::UnitSquare, |_, _| true))
}

/// Build the L-shape mesh (0,1)^2 \ [0.5,1]x[0,0.5]. Level 0 is the 8x8
/// grid minus the removed 4x4 block (48 elements); each level divides every
/// element into four.
pub fn build_lshape_mesh(level: usize) -> Result<Mesh, MeshError> {
    let n = 8usize << level;
    Ok(build_grid(n, DomainKind::LShape, move |i, j| {
        // cell center test against the removed quadrant
        let cx = (i as f64 + 0.5) / n as f64;
        let cy = (j as f64 + 0.5) / n as f64;
        !(cx > 0.5 && cy < 0.5)
    }))
}

fn build_grid(n: usize, domain_kind: DomainKind, keep: impl Fn(usize, usize) -> bool) -> Mesh {
    let h = 1.0 / n as f64;
    let np = n + 1;
    let cell_kept: Vec<bool> = (0..n * n)
        .map(|c| keep(c % n, c / n))
        .collect();
    let kept = |i: isize, j: isize| -> bool {
        i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && cell_kept[j as usize * n + i as usize]
    };

    // Nodes: lexicographic by (y, x), keeping only nodes touching a kept cell.
    let mut grid_to_node = vec![usize::MAX; np * np];
    let mut nodes = Vec::new();
    for j in 0..np as isize {
        for i in 0..np as isize {
            let touched = kept(i - 1, j - 1) || kept(i, j - 1) || kept(i - 1, j) || kept(i, j);
            if touched {
                grid_to_node[j as usize * np + i as usize] = nodes.len();
                nodes.push([i as f64 * h, j as f64 * h]);
            }
        }
    }
    let gn = |i: usize, j: usize| grid_to_node[j * np + i];

    // Elements row by row, nodes counterclockwise from the lower-left.
    let mut elements = Vec::new();
    let mut cell_to_elem = vec![None; n * n];
    for j in 0..n {
        for i in 0..n {
            if cell_kept[j * n + i] {
                cell_to_elem[j * n + i] = Some(elements.len());
                elements.push([gn(i, j), gn(i + 1, j), gn(i + 1, j + 1), gn(i, j + 1)]);
            }
        }
    }

    // Interior edges: right and top neighbors of each kept cell.
    let mut interior_edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let Some(e) = cell_to_elem[j * n + i] else { continue };
            // vertical edge shared with the right neighbor
            if i + 1 < n {
                if let Some(er) = cell_to_elem[j * n + i + 1] {
                    let (l, r, normal) = orient(e, er, [1.0, 0.0]);
                    interior_edges.push(Edge {
                        node_a: gn(i + 1, j),
                        node_b: gn(i + 1, j + 1),
                        elem_left: l,
                        elem_right: r,
                        unit_normal: normal,
                        length: h,
                    });
                }
            }
            // horizontal edge shared with the top neighbor
            if j + 1 < n {
                if let Some(et) = cell_to_elem[(j + 1) * n + i] {
                    let (l, r, normal) = orient(e, et, [0.0, 1.0]);
                    interior_edges.push(Edge {
                        node_a: gn(i, j + 1),
                        node_b: gn(i + 1, j + 1),
                        elem_left: l,
                        elem_right: r,
                        unit_normal: normal,
                        length: h,
                    });
                }
            }
        }
    }

    Mesh {
        nodes,
        elements,
        interior_edges,
        h,
        domain_kind,
        grid_n: n,
        cell_to_elem,
    }
}

/// elem_left is the element with the smaller index; flip the normal so it
/// points from left into right.
fn orient(a: usize, b: usize, n_ab: [f64; 2]) -> (usize, usize, [f64; 2]) {
    if a < b {
        (a, b, n_ab)
    } else {
        (b, a, [-n_ab[0], -n_ab[1]])
    }
}

/// Nodes on the domain boundary: a grid node is interior iff all four
/// surrounding cells exist and are kept.
pub fn boundary_nodes(mesh: &Mesh) -> std::collections::BTreeSet<usize> {
    let n = mesh.grid_n;
    let kept = |i: isize, j: isize| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < n
            && (j as usize) < n
            && mesh.cell_to_elem[j as usize * n + i as usize].is_some()
    };
    let mut out = std::collections::BTreeSet::new();
    for (idx, p) in mesh.nodes.iter().enumerate() {
        let i = (p[0] / mesh.h).round() as isize;
        let j = (p[1] / mesh.h).round() as isize;
        let interior = kept(i - 1, j - 1) && kept(i, j - 1) && kept(i - 1, j) && kept(i, j);
        if !interior {
            out.insert(idx);
        }
    }
    out
}

impl Mesh {
    /// Lower-left corner of an element.
    pub fn elem_origin(&self, e: usize) -> [f64; 2] {
        self.nodes[self.elements[e][0]]
    }

    /// Physical coordinates of a reference point (xi, eta) in [-1,1]^2.
    pub fn elem_point(&self, e: usize, xi: f64, eta: f64) -> [f64; 2] {
        let o = self.elem_origin(e);
        [
            o[0] + (xi + 1.0) * 0.5 * self.h,
            o[1] + (eta + 1.0) * 0.5 * self.h,
        ]
    }

    pub fn elem_centroid(&self, e: usize) -> [f64; 2] {
        self.elem_point(e, 0.0, 0.0)
    }

    /// Locate the element containing (x, y) and its reference coordinates.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, f64, f64), MeshError> {
        let n = self.grid_n;
        let eps = 1e-12;
        if x < -eps || x > 1.0 + eps || y < -eps || y > 1.0 + eps {
            return Err(MeshError::PointOutsideDomain(x, y));
        }
        let i = ((x / self.h).floor() as usize).min(n - 1);
        let j = ((y / self.h).floor() as usize).min(n - 1);
        // On a cell border the floor may land in a removed cell; probe the
        // neighbors sharing the point.
        let candidates = [
            (i, j),
            (i.wrapping_sub(1), j),
            (i, j.wrapping_sub(1)),
            (i.wrapping_sub(1), j.wrapping_sub(1)),
        ];
        for (ci, cj) in candidates {
            if ci >= n || cj >= n {
                continue;
            }
            if let Some(e) = self.cell_to_elem[cj * n + ci] {
                let o = self.elem_origin(e);
                let xi = 2.0 * (x - o[0]) / self.h - 1.0;
                let eta = 2.0 * (y - o[1]) / self.h - 1.0;
                if (-1.0 - 1e-9..=1.0 + 1e-9).contains(&xi) && (-1.0 - 1e-9..=1.0 + 1e-9).contains(&eta) {
                    return Ok((e, xi.clamp(-1.0, 1.0), eta.clamp(-1.0, 1.0)));
                }
            }
        }
        Err(MeshError::PointOutsideDomain(x, y))
    }

    /// Total mesh area (sum of element areas).
    pub fn area(&self) -> f64 {
        self.elements.len() as f64 * self.h * self.h
    }

    /// True if `fine` is a nested refinement of `self` (same domain, h an
    /// exact power-of-two fraction).
    pub fn is_nested_refinement(&self, fine: &Mesh) -> bool {
        if self.domain_kind != fine.domain_kind || fine.grid_n < self.grid_n {
            return false;
        }
        fine.grid_n % self.grid_n == 0 && (fine.grid_n / self.grid_n).is_power_of_two()
    }
}
