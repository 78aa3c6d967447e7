//! The four benchmark problems: parameters, manufactured solutions with
//! hand-coded derivatives, and the forcing f = -k Lap(u) + a.grad(u) + s u.

use crate::assembly::{PhysicalParams, ScalarField};
use crate::mesh::DomainKind;
use std::sync::Arc;

/// Analytic solution with its derivatives, all evaluable pointwise.
pub struct ExactSolution {
    pub value: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub grad: Box<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
    pub laplacian: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

pub struct BenchmarkCase {
    pub name: &'static str,
    pub params: PhysicalParams,
    pub domain_kind: DomainKind,
    /// Absent for the L-shape problem (forcing given directly).
    pub exact: Option<ExactSolution>,
}

pub fn case_by_name(name: &str) -> Option<BenchmarkCase> {
    match name {
        "convection" => Some(case_convection_dominated()),
        "diffusion" => Some(case_diffusion_dominated()),
        "layer" => Some(case_boundary_layer()),
        "lshape" => Some(case_lshape()),
        _ => None,
    }
}

// u = g(x) p(y), g = 100 x^2 (1-x)^2, p = y (1-2y) (1-y)
fn poly_g(x: f64) -> f64 {
    100.0 * x * x * (1.0 - x) * (1.0 - x)
}
fn poly_g1(x: f64) -> f64 {
    100.0 * (2.0 * x - 6.0 * x * x + 4.0 * x * x * x)
}
fn poly_g2(x: f64) -> f64 {
    100.0 * (2.0 - 12.0 * x + 12.0 * x * x)
}
fn poly_p(y: f64) -> f64 {
    y - 3.0 * y * y + 2.0 * y * y * y
}
fn poly_p1(y: f64) -> f64 {
    1.0 - 6.0 * y + 6.0 * y * y
}
fn poly_p2(y: f64) -> f64 {
    -6.0 + 12.0 * y
}

fn polynomial_exact() -> ExactSolution {
    ExactSolution {
        value: Box::new(|x, y| poly_g(x) * poly_p(y)),
        grad: Box::new(|x, y| [poly_g1(x) * poly_p(y), poly_g(x) * poly_p1(y)]),
        laplacian: Box::new(|x, y| poly_g2(x) * poly_p(y) + poly_g(x) * poly_p2(y)),
    }
}

fn forcing_from<F, G, L>(k: f64, a: [f64; 2], s: f64, value: F, grad: G, lap: L) -> ScalarField
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    G: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    L: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(move |x, y| {
        let g = grad(x, y);
        -k * lap(x, y) + a[0] * g[0] + a[1] * g[1] + s * value(x, y)
    })
}

pub fn case_convection_dominated() -> BenchmarkCase {
    let (k, a, s) = (1e-5, [0.4, 0.7], 1e-5);
    let f = forcing_from(
        k,
        a,
        s,
        |x, y| poly_g(x) * poly_p(y),
        |x, y| [poly_g1(x) * poly_p(y), poly_g(x) * poly_p1(y)],
        |x, y| poly_g2(x) * poly_p(y) + poly_g(x) * poly_p2(y),
    );
    BenchmarkCase {
        name: "convection",
        params: PhysicalParams::new(k, a, s, f),
        domain_kind: DomainKind::UnitSquare,
        exact: Some(polynomial_exact()),
    }
}

pub fn case_diffusion_dominated() -> BenchmarkCase {
    let (k, a, s) = (1.0, [0.4e-5, 0.7e-5], 1e-5);
    let f = forcing_from(
        k,
        a,
        s,
        |x, y| poly_g(x) * poly_p(y),
        |x, y| [poly_g1(x) * poly_p(y), poly_g(x) * poly_p1(y)],
        |x, y| poly_g2(x) * poly_p(y) + poly_g(x) * poly_p2(y),
    );
    BenchmarkCase {
        name: "diffusion",
        params: PhysicalParams::new(k, a, s, f),
        domain_kind: DomainKind::UnitSquare,
        exact: Some(polynomial_exact()),
    }
}

// u = B(x) q(y), B = x - (E(x) - E0) / (1 - E0), E(x) = exp(-(1-x)/k),
// q = y (1-y). E0 = exp(-1/k) underflows to 0 for k = 1e-3; the dropped
// terms are below 1e-300 and the direct form stays stable because the
// exponent -(1-x)/k is never positive on the domain.
const LAYER_K: f64 = 1e-3;

fn layer_beta() -> f64 {
    1.0 / (1.0 - (-1.0 / LAYER_K).exp())
}
fn layer_e(x: f64) -> f64 {
    (-(1.0 - x) / LAYER_K).exp()
}
fn layer_b(x: f64) -> f64 {
    x - layer_beta() * (layer_e(x) - (-1.0 / LAYER_K).exp())
}
fn layer_b1(x: f64) -> f64 {
    1.0 - layer_beta() * layer_e(x) / LAYER_K
}
fn layer_b2(x: f64) -> f64 {
    -layer_beta() * layer_e(x) / (LAYER_K * LAYER_K)
}
fn layer_q(y: f64) -> f64 {
    y * (1.0 - y)
}

pub fn case_boundary_layer() -> BenchmarkCase {
    let (k, a, s) = (LAYER_K, [1.0, 1.0], 1.0);
    let value = |x: f64, y: f64| layer_b(x) * layer_q(y);
    let grad = |x: f64, y: f64| [layer_b1(x) * layer_q(y), layer_b(x) * (1.0 - 2.0 * y)];
    let lap = |x: f64, y: f64| layer_b2(x) * layer_q(y) - 2.0 * layer_b(x);
    let f = forcing_from(k, a, s, value, grad, lap);
    BenchmarkCase {
        name: "layer",
        params: PhysicalParams::new(k, a, s, f),
        domain_kind: DomainKind::UnitSquare,
        exact: Some(ExactSolution {
            value: Box::new(value),
            grad: Box::new(grad),
            laplacian: Box::new(lap),
        }),
    }
}

// f = 100 r (r - 1/2) (r - sqrt(2)/2) with r the distance to (0.5, 0.5);
// no analytic solution, errors are measured against a fine-mesh reference.
pub fn case_lshape() -> BenchmarkCase {
    let f: ScalarField = Arc::new(|x, y| {
        let r = ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)).sqrt();
        100.0 * r * (r - 0.5) * (r - std::f64::consts::SQRT_2 / 2.0)
    });
    BenchmarkCase {
        name: "lshape",
        params: PhysicalParams::new(1e-6, [1.0, 3.0], 1.0, f),
        domain_kind: DomainKind::LShape,
        exact: None,
    }
}
