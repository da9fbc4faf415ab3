//! ε-sweeps: one limit solve, one ε-solve per row, difference norms and report files.

use crate::assembly::{assemble_eps, AssemblyError};
use crate::config::{ConfigError, SweepConfig};
use crate::data::{DataError, ProblemData};
use crate::limit::{assemble_limit, check_limit_data, manifold_meshes, reconstruct_strip_fields};
use crate::mesh::{build_mesh, refine, CellTag, MeshError, MixedMesh};
use crate::solution::SolutionField;
use crate::solver::{estimate_infsup, solve_saddle, SolverError};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const CSV_HEADER: [&str; 9] =
    ["eps", "err_u1_L2", "err_eu2_L2", "err_p1_H1", "err_p2_H1", "ratio_tau_n", "eta_L2", "beta_h", "status"];

/// Successive error ratios above this mark a column as sitting on its floor.
pub const PLATEAU_RATIO: f64 = 0.9;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("limit problem: {0}")]
    LimitSolve(SolverError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Report { path: String, message: String },
}

/// One line of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub err_u1_l2: f64,
    pub err_eu2_l2: f64,
    pub err_p1_h1: f64,
    pub err_p2_h1: f64,
    pub ratio_tau_n: f64,
    pub eta_l2: f64,
    pub beta_h: f64,
    pub status: String,
}

impl SweepRow {
    pub fn failed(eps: f64, message: &str) -> SweepRow {
        SweepRow {
            eps,
            err_u1_l2: f64::NAN,
            err_eu2_l2: f64::NAN,
            err_p1_h1: f64::NAN,
            err_p2_h1: f64::NAN,
            ratio_tau_n: f64::NAN,
            eta_l2: f64::NAN,
            beta_h: f64::NAN,
            status: format!("failed: {}", message.replace(['\n', '\r'], " ")),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn values(&self) -> [f64; 8] {
        [self.eps, self.err_u1_l2, self.err_eu2_l2, self.err_p1_h1, self.err_p2_h1, self.ratio_tau_n, self.eta_l2, self.beta_h]
    }
}

/// Boundedness diagnostics of the ε-solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub eps: f64,
    pub u1_l2: f64,
    pub eu2_l2: f64,
    pub p1_l2: f64,
    pub p2_l2: f64,
    pub dz_p2_l2: f64,
    pub eta_l2: f64,
    pub tangential_l2: f64,
    pub normal_l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    pub bounds: Vec<BoundsRow>,
    pub limit_beta_h: f64,
    pub mesh_h: f64,
    pub n_cells: usize,
    pub n_unknowns_eps: usize,
    pub n_unknowns_limit: usize,
    pub limit_velocity_l2: f64,
    pub limit_pressure_l2: f64,
    pub limit_tangential_l2: f64,
}

impl ConvergenceReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(SweepRow::is_ok)
    }

    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Checks `a₁ > 0`, `a₂ > 0`, `α ≥ 0` at cell centroids and interface facet midpoints.
pub fn check_data_on_mesh(mesh: &MixedMesh, data: &ProblemData) -> Result<(), DataError> {
    let (mut rock, mut strip, mut iface) = (Vec::new(), Vec::new(), Vec::new());
    for (ci, c) in mesh.cells.iter().enumerate() {
        match c.tag {
            CellTag::Block(_) => rock.push(mesh.centroid(ci)),
            CellTag::Strip(_) => strip.push(mesh.centroid(ci)),
        }
    }
    for (fi, f) in mesh.facets.iter().enumerate() {
        if f.tag.is_interface() {
            let [a, b] = mesh.facet_points(fi);
            iface.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        }
    }
    data.check_hypotheses(&rock, &strip, &iface)
}

/// Builds the reference mesh of a configuration.
pub fn config_mesh(config: &SweepConfig) -> Result<MixedMesh, SweepError> {
    let medium = config.load_medium()?;
    let mut mesh = build_mesh(&medium, config.target_h)?;
    for _ in 0..config.refinements {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

/// Solves the collapsed problem on `mesh`.
pub fn solve_limit(mesh: &MixedMesh, data: &ProblemData, tol: f64) -> Result<(crate::assembly::DiscreteSystem, SolutionField), SweepError> {
    let manifolds = manifold_meshes(mesh);
    check_limit_data(&manifolds, data)?;
    let system = assemble_limit(mesh, &manifolds, data)?;
    let sol = solve_saddle(&system, tol).map_err(SweepError::LimitSolve)?;
    Ok((system, sol))
}

fn coarse_beta(config: &SweepConfig, data: &ProblemData, eps: Option<f64>) -> Result<f64, String> {
    let medium = config.load_medium().map_err(|e| e.to_string())?;
    let h = match config.infsup_h {
        Some(h) => h,
        None => {
            let min_h = medium.fissures().iter().map(|f| f.height).fold(f64::INFINITY, f64::min);
            (0.5 * min_h).min(0.25 * (medium.x_hi() - medium.x_lo()))
        }
    };
    let mesh = build_mesh(&medium, h).map_err(|e| e.to_string())?;
    let system = match eps {
        Some(e) => assemble_eps(&mesh, data, e).map_err(|e| e.to_string())?,
        None => assemble_limit(&mesh, &manifold_meshes(&mesh), data).map_err(|e| e.to_string())?,
    };
    estimate_infsup(&system, &mesh).map_err(|e| e.to_string())
}

fn eps_row(
    mesh: &MixedMesh,
    data: &ProblemData,
    reconstruction: &SolutionField,
    eps: f64,
    beta: f64,
    tol: f64,
) -> Result<(SweepRow, BoundsRow), String> {
    let system = assemble_eps(mesh, data, eps).map_err(|e| e.to_string())?;
    let sol = solve_saddle(&system, tol).map_err(|e| e.to_string())?;
    let scaled = sol.scale_fissure_velocity(eps);
    let d = scaled.difference(reconstruction);
    let grad1 = d.rock_weighted_velocity_l2(mesh, data).map_err(|e| e.to_string())?;
    let err_p1_h1 = (d.rock_pressure_l2(mesh).powi(2) + grad1 * grad1).sqrt();
    let err_p2_h1 = (d.fissure_pressure_l2(mesh).powi(2) + d.fissure_pressure_h1_semi(mesh).powi(2)).sqrt();
    let (t, n) = sol.strip_tangential_normal_l2(mesh);
    let ratio = if n > 0.0 {
        t / n
    } else if t == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let eta = sol.eta_l2(mesh);
    let row = SweepRow {
        eps,
        err_u1_l2: d.rock_velocity_l2(mesh),
        err_eu2_l2: d.fissure_velocity_l2(mesh),
        err_p1_h1,
        err_p2_h1,
        ratio_tau_n: ratio,
        eta_l2: eta,
        beta_h: beta,
        status: "ok".into(),
    };
    let bounds = BoundsRow {
        eps,
        u1_l2: sol.rock_velocity_l2(mesh),
        eu2_l2: scaled.fissure_velocity_l2(mesh),
        p1_l2: sol.rock_pressure_l2(mesh),
        p2_l2: sol.fissure_pressure_l2(mesh),
        dz_p2_l2: sol.dz_pressure_l2(mesh),
        eta_l2: eta,
        tangential_l2: t,
        normal_l2: n,
    };
    Ok((row, bounds))
}

/// Runs the sweep. Per-ε failures become failure rows; errors before the
/// first ε-solve are returned.
pub fn run_sweep(config: &SweepConfig) -> Result<ConvergenceReport, SweepError> {
    config.validate()?;
    let data = config.problem_data()?;
    let mesh = config_mesh(config)?;
    check_data_on_mesh(&mesh, &data)?;
    let (limit_system, limit) = solve_limit(&mesh, &data, config.tol)?;
    let manifolds = manifold_meshes(&mesh);
    let reconstruction = reconstruct_strip_fields(&limit, &mesh, &manifolds);

    let limit_beta_h = coarse_beta(config, &data, None).unwrap_or(f64::NAN);
    let results: Vec<Result<(SweepRow, BoundsRow), String>> = config
        .eps
        .par_iter()
        .map(|&eps| {
            let beta = coarse_beta(config, &data, Some(eps))?;
            eps_row(&mesh, &data, &reconstruction, eps, beta, config.tol)
        })
        .collect();
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for (r, &eps) in results.into_iter().zip(&config.eps) {
        match r {
            Ok((row, b)) => {
                rows.push(row);
                bounds.push(b);
            }
            Err(msg) => rows.push(SweepRow::failed(eps, &msg)),
        }
    }
    let norms = limit.manifold_norms(&mesh);
    let (lt, _) = reconstruction.strip_tangential_normal_l2(&mesh);
    Ok(ConvergenceReport {
        rows,
        bounds,
        limit_beta_h,
        mesh_h: config.mesh_h(),
        n_cells: mesh.cells.len(),
        n_unknowns_eps: crate::dofs::DofLayout::eps(&mesh).n_total(),
        n_unknowns_limit: limit_system.n_total(),
        limit_velocity_l2: norms.velocity,
        limit_pressure_l2: norms.pressure,
        limit_tangential_l2: lt,
    })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> SweepError {
    SweepError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Writes `sweep.csv`, `sweep.dat`, `bounds.dat` and `limit.dat` into `dir`.
pub fn emit_report(report: &ConvergenceReport, dir: &Path) -> Result<(), SweepError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let csv_path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| io_err(&csv_path, e))?;
    for r in &report.rows {
        let mut rec: Vec<String> = r.values().iter().map(|v| format!("{v:e}")).collect();
        rec.push(r.status.clone());
        w.write_record(&rec).map_err(|e| io_err(&csv_path, e))?;
    }
    w.flush().map_err(|e| io_err(&csv_path, e))?;

    let write = |name: &str, text: String| -> Result<(), SweepError> {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).map_err(|e| io_err(&p, e))?;
        f.write_all(text.as_bytes()).map_err(|e| io_err(&p, e))
    };

    let mut dat = String::from("# eps err_u1_L2 err_eu2_L2 err_p1_H1 err_p2_H1 ratio_tau_n eta_L2 beta_h\n");
    for r in report.rows.iter().filter(|r| r.is_ok()) {
        let v: Vec<String> = r.values().iter().map(|v| format!("{v:e}")).collect();
        dat.push_str(&v.join(" "));
        dat.push('\n');
    }
    write("sweep.dat", dat)?;

    let mut b = String::from("# eps u1_L2 eu2_L2 p1_L2 p2_L2 dz_p2_L2 eta_L2 tangential_L2 normal_L2\n");
    for r in &report.bounds {
        let v = [r.eps, r.u1_l2, r.eu2_l2, r.p1_l2, r.p2_l2, r.dz_p2_l2, r.eta_l2, r.tangential_l2, r.normal_l2];
        let v: Vec<String> = v.iter().map(|v| format!("{v:e}")).collect();
        b.push_str(&v.join(" "));
        b.push('\n');
    }
    write("bounds.dat", b)?;

    write(
        "limit.dat",
        format!(
            "# mesh_h cells unknowns_eps unknowns_limit beta_h_limit u2_L2 p2_L2 tangential_L2\n{:e} {} {} {} {:e} {:e} {:e} {:e}\n",
            report.mesh_h,
            report.n_cells,
            report.n_unknowns_eps,
            report.n_unknowns_limit,
            report.limit_beta_h,
            report.limit_velocity_l2,
            report.limit_pressure_l2,
            report.limit_tangential_l2
        ),
    )
}

/// Reads `sweep.csv` back.
pub fn read_report(dir: &Path) -> Result<Vec<SweepRow>, SweepError> {
    let path = dir.join("sweep.csv");
    let bad = |m: String| SweepError::Report { path: path.display().to_string(), message: m };
    let mut r = csv::Reader::from_path(&path).map_err(|e| io_err(&path, e))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut v = [0.0; 8];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k].parse().map_err(|e| bad(format!("row {}, column {}: {e}", line + 1, CSV_HEADER[k])))?;
        }
        rows.push(SweepRow {
            eps: v[0],
            err_u1_l2: v[1],
            err_eu2_l2: v[2],
            err_p1_h1: v[3],
            err_p2_h1: v[4],
            ratio_tau_n: v[5],
            eta_l2: v[6],
            beta_h: v[7],
            status: rec[8].to_string(),
        });
    }
    Ok(rows)
}

/// Observed orders `log(e_k/e_{k+1}) / log(x_k/x_{k+1})`.
pub fn observed_orders(x: &[f64], e: &[f64]) -> Vec<f64> {
    x.windows(2).zip(e.windows(2)).map(|(x, e)| (e[0] / e[1]).ln() / (x[0] / x[1]).ln()).collect()
}

/// How an error column behaves along the ε list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnTrend {
    /// No entry exceeds its predecessor.
    pub monotone: bool,
    pub final_over_initial: f64,
    /// Index from which all successive ratios exceed [`PLATEAU_RATIO`].
    pub plateau_from: Option<usize>,
}

pub fn column_trend(col: &[f64]) -> ColumnTrend {
    let monotone = col.windows(2).all(|w| w[1] <= w[0]);
    let final_over_initial = match (col.first(), col.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    };
    let mut plateau_from = None;
    for k in (1..col.len()).rev() {
        if col[k - 1] > 0.0 && col[k] / col[k - 1] > PLATEAU_RATIO {
            plateau_from = Some(k - 1);
        } else {
            break;
        }
    }
    ColumnTrend { monotone, final_over_initial, plateau_from }
}

/// Human-readable summary of a report read from disk.
pub fn format_summary(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:>10} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}  status\n",
        "eps", "err_u1", "err_eu2", "err_p1_H1", "err_p2_H1", "ratio", "eta", "beta_h"
    ));
    for r in rows {
        let v = r.values();
        for x in v {
            s.push_str(&format!(" {x:>12.4e}"));
        }
        s.push_str(&format!("  {}\n", r.status));
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    if ok.len() >= 2 {
        let eps: Vec<f64> = ok.iter().map(|r| r.eps).collect();
        let cols: [(&str, fn(&SweepRow) -> f64); 4] = [
            ("err_u1_L2", |r| r.err_u1_l2),
            ("err_eu2_L2", |r| r.err_eu2_l2),
            ("err_p1_H1", |r| r.err_p1_h1),
            ("err_p2_H1", |r| r.err_p2_h1),
        ];
        for (name, f) in cols {
            let c: Vec<f64> = ok.iter().map(|r| f(r)).collect();
            let orders = observed_orders(&eps, &c);
            let t = column_trend(&c);
            let orders: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
            s.push_str(&format!(
                "{name}: observed orders in eps [{}], final/initial {:.3}, monotone {}, plateau {}\n",
                orders.join(", "),
                t.final_over_initial,
                t.monotone,
                t.plateau_from.map_or("none".to_string(), |k| format!("from eps = {}", eps[k]))
            ));
        }
        let ratios: Vec<String> = ok.windows(2).map(|w| format!("{:.2}", w[1].ratio_tau_n / w[0].ratio_tau_n)).collect();
        s.push_str(&format!("ratio_tau_n growth per step: [{}]\n", ratios.join(", ")));
    }
    s
}
