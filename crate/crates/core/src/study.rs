//! Configuration-driven study runner: solve a benchmark case over a mesh
//! sequence, estimate the error in the requested modes, tabulate errors,
//! convergence rates and effectivity indices, and write CSV / legacy-VTK
//! artifacts.

use crate::assembly::assemble_operators;
use crate::cases::{case_by_name, BenchmarkCase};
use crate::estimator::{
    effectivity, error_norms, estimate, reference_error, EstimatorError, EstimatorMode,
    EstimatorReport,
};
use crate::field::FeFunction;
use crate::formulation::{
    solve_stabilized, FormulationConfig, FormulationError, FormulationKind, OsgsRealization,
    StabConstants,
};
use crate::mesh::{build_lshape_mesh, build_unit_square_mesh, DofMap, DomainKind, Mesh, MeshError};
use crate::projection::ProjectionWorkspace;
use crate::sparse::SolverConfig;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("unknown case '{0}' (expected convection, diffusion, layer or lshape)")]
    UnknownCase(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSampleSpec {
    /// y coordinate of the horizontal sampling line.
    pub y: f64,
    pub n_samples: usize,
}

impl Default for LineSampleSpec {
    fn default() -> Self {
        LineSampleSpec {
            y: 0.5,
            n_samples: 101,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub case: String,
    pub formulation: FormulationKind,
    pub edge_term_enabled: bool,
    pub f_in_residual: bool,
    pub osgs_realization: OsgsRealization,
    pub estimators: Vec<EstimatorMode>,
    /// Subdivisions n for square domains, refinement levels for the
    /// L-shape; empty selects the per-case default sequence.
    pub meshes: Vec<usize>,
    /// Reference refinement level for cases without an exact solution.
    pub reference_level: usize,
    pub solver: SolverConfig,
    pub constants: StabConstants,
    pub out_dir: Option<PathBuf>,
    pub line_sample: Option<LineSampleSpec>,
    /// Quadrature order for loads and estimator integrals.
    pub quad_order: usize,
    /// Project residuals onto the unconstrained FE space instead of the
    /// zero-trace one (sensitivity check).
    pub unconstrained_projection: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            case: "convection".into(),
            formulation: FormulationKind::Osgs,
            edge_term_enabled: true,
            f_in_residual: true,
            osgs_realization: OsgsRealization::Block,
            estimators: vec![EstimatorMode::Osgs],
            meshes: Vec::new(),
            reference_level: 5,
            solver: SolverConfig::default(),
            constants: StabConstants::default(),
            out_dir: None,
            line_sample: None,
            quad_order: 4,
            unconstrained_projection: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub mesh_param: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub rel_l2: f64,
    pub rel_stab: f64,
    pub abs_stab: f64,
    /// Global eta per estimator mode, in config order.
    pub eta: Vec<f64>,
    /// Effectivity per mode (NaN when no exact error is available).
    pub ieff: Vec<f64>,
    pub iters: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub modes: Vec<EstimatorMode>,
    pub rows: Vec<TableRow>,
}

/// rate between consecutive rows: log(q_i / q_{i+1}) / log(h_i / h_{i+1}).
pub fn rate_between(q_prev: f64, q_next: f64, h_prev: f64, h_next: f64) -> f64 {
    if !(q_prev > 0.0) || !(q_next > 0.0) {
        return f64::NAN;
    }
    (q_prev / q_next).ln() / (h_prev / h_next).ln()
}

impl ConvergenceTable {
    /// Per-row rates of a quantity; the first entry is NaN.
    pub fn rates(&self, quantity: impl Fn(&TableRow) -> f64) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.rows.len()];
        for i in 1..self.rows.len() {
            out[i] = rate_between(
                quantity(&self.rows[i - 1]),
                quantity(&self.rows[i]),
                self.rows[i - 1].h,
                self.rows[i].h,
            );
        }
        out
    }

    /// Rate over the final mesh interval.
    pub fn final_rate(&self, quantity: impl Fn(&TableRow) -> f64) -> f64 {
        self.rates(quantity).last().copied().unwrap_or(f64::NAN)
    }

    pub fn mode_index(&self, mode: EstimatorMode) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }
}

/// Everything kept in memory per mesh for downstream inspection.
pub struct MeshDetail {
    pub mesh_param: usize,
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub u: FeFunction,
    pub reports: Vec<EstimatorReport>,
    /// Per-element squared stabilized error, when an exact solution exists.
    pub element_stab: Option<Vec<f64>>,
}

pub struct StudyOutput {
    pub table: ConvergenceTable,
    pub details: Vec<MeshDetail>,
    /// Set when a solve/estimate failed; the table holds the completed rows.
    pub failure: Option<String>,
}

fn default_meshes(case: &BenchmarkCase) -> Vec<usize> {
    match case.domain_kind {
        DomainKind::LShape => vec![0, 1, 2, 3],
        DomainKind::UnitSquare => {
            let mut v = vec![8, 16, 32, 64, 128, 256];
            if case.name == "layer" {
                v.push(512);
            }
            v
        }
    }
}

fn build_case_mesh(case: &BenchmarkCase, param: usize) -> Result<Mesh, MeshError> {
    match case.domain_kind {
        DomainKind::UnitSquare => build_unit_square_mesh(param),
        DomainKind::LShape => build_lshape_mesh(param),
    }
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput, StudyError> {
    let case = case_by_name(&cfg.case).ok_or_else(|| StudyError::UnknownCase(cfg.case.clone()))?;
    run_study_with_case(cfg, &case)
}

/// Same as [`run_study`] but with a caller-supplied case record (used by
/// tests that modify the forcing).
pub fn run_study_with_case(cfg: &StudyConfig, case: &BenchmarkCase) -> Result<StudyOutput, StudyError> {
    if cfg.estimators.is_empty() {
        return Err(StudyError::Config("at least one estimator mode required".into()));
    }
    let meshes = if cfg.meshes.is_empty() {
        default_meshes(case)
    } else {
        cfg.meshes.clone()
    };
    if meshes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StudyError::Config("mesh sequence must be strictly increasing".into()));
    }
    if case.domain_kind == DomainKind::UnitSquare && meshes.contains(&0) {
        return Err(StudyError::Config("mesh subdivisions must be at least 1".into()));
    }
    if case.domain_kind == DomainKind::LShape
        && meshes.iter().any(|&l| l >= cfg.reference_level)
    {
        return Err(StudyError::Config(
            "reference level must exceed every study level".into(),
        ));
    }

    let form_cfg = FormulationConfig {
        kind: cfg.formulation,
        edge_term_enabled: cfg.edge_term_enabled,
        f_in_residual: cfg.f_in_residual,
        osgs_realization: cfg.osgs_realization,
        constants: cfg.constants,
        solver: cfg.solver.clone(),
        load_quad_order: cfg.quad_order,
    };

    let mut table = ConvergenceTable {
        modes: cfg.estimators.clone(),
        rows: Vec::new(),
    };
    let mut details = Vec::new();
    let mut failure: Option<String> = None;

    // reference solution for cases without an analytic one
    let mut reference: Option<(Mesh, DofMap, FeFunction)> = None;
    if case.exact.is_none() {
        match solve_on(case, cfg.reference_level, &form_cfg) {
            Ok((mesh, dofs, u, _)) => reference = Some((mesh, dofs, u)),
            Err(e) => failure = Some(format!("reference solve failed: {e}")),
        }
    }

    if failure.is_none() {
        for &param in &meshes {
            match run_one_mesh(cfg, case, param, &form_cfg, reference.as_ref()) {
                Ok((row, detail)) => {
                    table.rows.push(row);
                    details.push(detail);
                }
                Err(e) => {
                    failure = Some(format!("mesh {param}: {e}"));
                    break;
                }
            }
        }
    }

    if let Some(dir) = &cfg.out_dir {
        write_artifacts(dir, cfg, case, &table, &details, failure.as_deref())?;
    }
    Ok(StudyOutput {
        table,
        details,
        failure,
    })
}

fn solve_on(
    case: &BenchmarkCase,
    param: usize,
    form_cfg: &FormulationConfig,
) -> Result<(Mesh, DofMap, FeFunction, usize), String> {
    let mesh = build_case_mesh(case, param).map_err(|e| e.to_string())?;
    let dofs = DofMap::new(&mesh);
    let ops = assemble_operators(&mesh, &dofs, &case.params);
    let sol =
        solve_stabilized(&mesh, &dofs, &case.params, &ops, form_cfg).map_err(format_solve_err)?;
    Ok((mesh, dofs, sol.u, sol.stats.iterations))
}

fn format_solve_err(e: FormulationError) -> String {
    e.to_string()
}

fn run_one_mesh(
    cfg: &StudyConfig,
    case: &BenchmarkCase,
    param: usize,
    form_cfg: &FormulationConfig,
    reference: Option<&(Mesh, DofMap, FeFunction)>,
) -> Result<(TableRow, MeshDetail), String> {
    let (mesh, dofs, u, iters) = solve_on(case, param, form_cfg)?;
    let tau = crate::formulation::compute_tau(
        case.params.k,
        case.params.a_norm(),
        case.params.s,
        mesh.h,
        &cfg.constants,
    )
    .map_err(|e| e.to_string())?;
    let ws = if cfg.unconstrained_projection {
        ProjectionWorkspace::new_unconstrained(&mesh)
    } else {
        ProjectionWorkspace::new(&mesh, &dofs)
    };
    let mut reports = Vec::new();
    for &mode in &cfg.estimators {
        let rep = estimate(&mesh, &dofs, &case.params, &tau, &u, mode, &ws, cfg.quad_order)
            .map_err(|e| e.to_string())?;
        reports.push(rep);
    }

    let (rel_l2, rel_stab, abs_stab, ieff, element_stab) = match &case.exact {
        Some(exact) => match error_norms(&mesh, &dofs, &u, exact, &case.params, &tau, cfg.quad_order) {
            Ok(err) => {
                let ieff: Vec<f64> = reports
                    .iter()
                    .map(|r| effectivity(r, err.abs_stab).unwrap_or(f64::NAN))
                    .collect();
                (
                    err.rel_l2,
                    err.rel_stab,
                    err.abs_stab,
                    ieff,
                    Some(err.element_stab),
                )
            }
            // zero forcing with a zero solution: every error is exactly 0
            Err(EstimatorError::DegenerateNormalization)
                if u.coeffs.iter().all(|&c| c == 0.0) =>
            {
                (0.0, 0.0, 0.0, vec![f64::NAN; reports.len()], None)
            }
            Err(e) => return Err(e.to_string()),
        },
        None => {
            let (rm, rd, ru) = reference.ok_or("no reference solution available")?;
            let err = reference_error(&mesh, &dofs, &u, rm, rd, ru).map_err(|e| e.to_string())?;
            (
                err.rel_l2,
                f64::NAN,
                f64::NAN,
                vec![f64::NAN; reports.len()],
                None,
            )
        }
    };

    let row = TableRow {
        mesh_param: param,
        h: mesh.h,
        n_dofs: dofs.n_free,
        rel_l2,
        rel_stab,
        abs_stab,
        eta: reports.iter().map(|r| r.eta).collect(),
        ieff,
        iters,
    };
    let detail = MeshDetail {
        mesh_param: param,
        mesh,
        dofs,
        u,
        reports,
        element_stab,
    };
    Ok((row, detail))
}

/// u_h (and optionally the exact solution) sampled along the horizontal
/// line at the given y, at n equispaced x positions across [0, 1].
pub fn line_sample(
    mesh: &Mesh,
    dofs: &DofMap,
    u: &FeFunction,
    exact: Option<&crate::cases::ExactSolution>,
    y: f64,
    n_samples: usize,
) -> Result<Vec<(f64, f64, f64)>, MeshError> {
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x = i as f64 / (n_samples - 1).max(1) as f64;
        let uh = u.eval_point(mesh, dofs, x, y)?;
        let ue = exact.map_or(f64::NAN, |e| (e.value)(x, y));
        out.push((x, uh, ue));
    }
    Ok(out)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv(table: &ConvergenceTable, path: &Path) -> Result<(), StudyError> {
    let mut s = String::from("h,ndofs,relL2,rateL2,relStab,rateStab");
    for m in &table.modes {
        write!(s, ",eta_{}", m.label()).unwrap();
    }
    for m in &table.modes {
        write!(s, ",ieff_{}", m.label()).unwrap();
    }
    s.push_str(",iters\n");
    let rate_l2 = table.rates(|r| r.rel_l2);
    let rate_stab = table.rates(|r| r.rel_stab);
    for (i, r) in table.rows.iter().enumerate() {
        write!(
            s,
            "{},{},{},{},{},{}",
            fmt(r.h),
            r.n_dofs,
            fmt(r.rel_l2),
            fmt(rate_l2[i]),
            fmt(r.rel_stab),
            fmt(rate_stab[i])
        )
        .unwrap();
        for v in &r.eta {
            write!(s, ",{}", fmt(*v)).unwrap();
        }
        for v in &r.ieff {
            write!(s, ",{}", fmt(*v)).unwrap();
        }
        writeln!(s, ",{}", r.iters).unwrap();
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Legacy VTK ASCII writer for quad meshes with scalar cell and point data.
pub fn write_vtk(
    mesh: &Mesh,
    cell_data: &[(&str, &[f64])],
    point_data: &[(&str, &[f64])],
    path: &Path,
) -> Result<(), StudyError> {
    for (name, d) in cell_data {
        assert_eq!(d.len(), mesh.elements.len(), "cell data '{name}' length");
    }
    for (name, d) in point_data {
        assert_eq!(d.len(), mesh.nodes.len(), "point data '{name}' length");
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("cdrfem study output\n");
    s.push_str("ASCII\n");
    s.push_str("DATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", mesh.nodes.len()).unwrap();
    for p in &mesh.nodes {
        writeln!(s, "{:.16e} {:.16e} 0.0", p[0], p[1]).unwrap();
    }
    let ne = mesh.elements.len();
    writeln!(s, "CELLS {} {}", ne, 5 * ne).unwrap();
    for el in &mesh.elements {
        writeln!(s, "4 {} {} {} {}", el[0], el[1], el[2], el[3]).unwrap();
    }
    writeln!(s, "CELL_TYPES {ne}").unwrap();
    for _ in 0..ne {
        s.push_str("9\n");
    }
    if !cell_data.is_empty() {
        writeln!(s, "CELL_DATA {ne}").unwrap();
        for (name, data) in cell_data {
            writeln!(s, "SCALARS {name} double 1").unwrap();
            s.push_str("LOOKUP_TABLE default\n");
            for v in *data {
                writeln!(s, "{}", fmt(*v)).unwrap();
            }
        }
    }
    if !point_data.is_empty() {
        writeln!(s, "POINT_DATA {}", mesh.nodes.len()).unwrap();
        for (name, data) in point_data {
            writeln!(s, "SCALARS {name} double 1").unwrap();
            s.push_str("LOOKUP_TABLE default\n");
            for v in *data {
                writeln!(s, "{}", fmt(*v)).unwrap();
            }
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn write_artifacts(
    dir: &Path,
    cfg: &StudyConfig,
    case: &BenchmarkCase,
    table: &ConvergenceTable,
    details: &[MeshDetail],
    failure: Option<&str>,
) -> Result<(), StudyError> {
    std::fs::create_dir_all(dir)?;
    write_csv(table, &dir.join("table.csv"))?;
    if let Some(msg) = failure {
        std::fs::write(dir.join("error.txt"), format!("{msg}\n"))?;
    }
    for d in details {
        let mut cell: Vec<(String, &[f64])> = Vec::new();
        for r in &d.reports {
            cell.push((format!("eta2_{}", r.mode.label()), &r.element_total[..]));
        }
        let cell_named: Vec<(&str, &[f64])> =
            cell.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        let nodal = d.u.node_values(&d.dofs);
        write_vtk(
            &d.mesh,
            &cell_named,
            &[("u_h", &nodal[..])],
            &dir.join(format!("eta_map_{}.vtk", d.mesh_param)),
        )?;
        if let Some(es) = &d.element_stab {
            write_vtk(
                &d.mesh,
                &[("err_stab2", &es[..])],
                &[],
                &dir.join(format!("error_map_{}.vtk", d.mesh_param)),
            )?;
        }
    }
    if let Some(spec) = &cfg.line_sample {
        if let Some(d) = details.last() {
            let samples = line_sample(
                &d.mesh,
                &d.dofs,
                &d.u,
                case.exact.as_ref(),
                spec.y,
                spec.n_samples,
            )
            .map_err(|e| StudyError::Config(e.to_string()))?;
            let mut s = String::from("x,u_h,exact\n");
            for (x, uh, ue) in samples {
                writeln!(s, "{},{},{}", fmt(x), fmt(uh), fmt(ue)).unwrap();
            }
            std::fs::write(dir.join("profile.csv"), s)?;
        }
    }
    Ok(())
}
