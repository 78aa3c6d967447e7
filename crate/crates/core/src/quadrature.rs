//! Q1 (bilinear) reference shape functions with derivatives up to second
//! order, the isoparametric mapping for axis-aligned squares, and
//! Gauss-Legendre quadrature rules on elements and edges.
//!
//! Reference element: [-1,1]^2 with nodes counterclockwise
//! (-1,-1), (1,-1), (1,1), (-1,1).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("unsupported quadrature order {0} (expected 1..=6)")]
    UnsupportedOrder(usize),
    #[error("element side length must be positive, got {0}")]
    NonPositiveSide(f64),
}

/// Tensor-product quadrature rule on the reference square.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// 1D quadrature rule on [-1,1] for edge integrals.
#[derive(Debug, Clone)]
pub struct EdgeQuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

const NODE_SIGNS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Bilinear shape function values N_i = (1 + xi_i xi)(1 + eta_i eta)/4.
pub fn q1_shape(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (i, s) in NODE_SIGNS.iter().enumerate() {
        n[i] = 0.25 * (1.0 + s[0] * xi) * (1.0 + s[1] * eta);
    }
    n
}

/// Reference gradients (dN/dxi, dN/deta).
pub fn q1_grad_ref(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut g = [[0.0; 2]; 4];
    for (i, s) in NODE_SIGNS.iter().enumerate() {
        g[i][0] = 0.25 * s[0] * (1.0 + s[1] * eta);
        g[i][1] = 0.25 * s[1] * (1.0 + s[0] * xi);
    }
    g
}

/// Physical gradients on an axis-aligned square of side `h`:
/// chain rule scales each reference direction by 2/h.
pub fn q1_grad(xi: f64, eta: f64, h: f64) -> Result<[[f64; 2]; 4], QuadratureError> {
    if h <= 0.0 {
        return Err(QuadratureError::NonPositiveSide(h));
    }
    let s = 2.0 / h;
    let mut g = q1_grad_ref(xi, eta);
    for gi in &mut g {
        gi[0] *= s;
        gi[1] *= s;
    }
    Ok(g)
}

/// Reference second derivatives (d2/dxi2, d2/dxideta, d2/deta2) of each
/// shape function. The pure second derivatives of a bilinear function are
/// identically zero; they are still carried so the physical Laplacian is
/// computed, not assumed.
pub fn q1_second_ref(_xi: f64, _eta: f64) -> [[f64; 3]; 4] {
    let mut d = [[0.0; 3]; 4];
    for (i, s) in NODE_SIGNS.iter().enumerate() {
        d[i][0] = 0.0;
        d[i][1] = 0.25 * s[0] * s[1];
        d[i][2] = 0.0;
    }
    d
}

/// Physical Laplacian of each shape function on a square of side `h`.
pub fn q1_laplacian(xi: f64, eta: f64, h: f64) -> [f64; 4] {
    let s = 2.0 / h;
    let d = q1_second_ref(xi, eta);
    let mut lap = [0.0; 4];
    for i in 0..4 {
        lap[i] = s * s * (d[i][0] + d[i][2]);
    }
    lap
}

/// Gauss-Legendre points and weights on [-1,1], computed by Newton
/// iteration on the Legendre polynomial. Valid for any order >= 1.
pub fn gauss_points_1d(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    (points, weights)
}

/// Tensor-product Gauss rule of the given 1D order on the reference square.
pub fn gauss_rule(order: usize) -> Result<QuadRule, QuadratureError> {
    if order == 0 || order > 6 {
        return Err(QuadratureError::UnsupportedOrder(order));
    }
    let (p, w) = gauss_points_1d(order);
    let mut points = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for j in 0..order {
        for i in 0..order {
            points.push([p[i], p[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    Ok(QuadRule { points, weights })
}

/// 1D Gauss rule of the given order for edge integrals.
pub fn gauss_edge_rule(order: usize) -> Result<EdgeQuadRule, QuadratureError> {
    if order == 0 || order > 6 {
        return Err(QuadratureError::UnsupportedOrder(order));
    }
    let (points, weights) = gauss_points_1d(order);
    Ok(EdgeQuadRule { points, weights })
}
