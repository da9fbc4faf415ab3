//! Built-in manufactured solutions.

use crate::data::{DataSpec, ProblemData};
use crate::expr::{parse_expr, EvalError, Expr};
use crate::fem::{gauss3_1d, tri6};
use crate::geometry::{DomainSpec, FissureSpec, MediumSpec, DEFAULT_SLOPE_CAP};
use crate::mesh::MixedMesh;
use crate::solution::SolutionField;
use thiserror::Error;

pub const CASES: [&str; 4] = ["rock-only-linear", "flat-fissure-limit", "uniform-tangential", "zero-field"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown manufactured case `{0}`; available: rock-only-linear, flat-fissure-limit, uniform-tangential, zero-field")]
pub struct UnknownCase(pub String);

/// Which discrete problem the exact fields solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseProblem {
    /// The ε-problem, for every ε (the case has no fissure forcing).
    Eps,
    /// The collapsed problem.
    Limit,
}

/// Exact fields. Fissure fields are functions of `x` only; the fissure
/// velocity is the tangential component `u_τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFields {
    pub rock_pressure: Expr,
    pub rock_velocity: [Expr; 2],
    pub fissure_pressure: Expr,
    pub fissure_tangential: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub geometry: MediumSpec,
    pub data: ProblemData,
    pub exact: ExactFields,
    pub problem: CaseProblem,
    /// Coarsest admissible mesh size.
    pub coarse_h: f64,
}

fn e(s: &str) -> Expr {
    parse_expr(s).expect("built-in expression parses")
}

fn flat_fissure_geometry() -> MediumSpec {
    MediumSpec {
        domain: DomainSpec { x_lo: 0.0, x_hi: 1.0, bottom: 0.0, top: 1.2, slope_cap: DEFAULT_SLOPE_CAP },
        fissures: vec![FissureSpec { height: 0.2, breakpoints: vec![0.0, 1.0], segments: vec![vec![0.5]] }],
    }
}

fn data(a1: &str, a2: &str, alpha: &str, source: &str, interface: &str, drained: &str, end_flux: &str) -> ProblemData {
    ProblemData::from_spec(&DataSpec {
        a1: a1.into(),
        a2: a2.into(),
        alpha: alpha.into(),
        source: source.into(),
        gravity_x: "0".into(),
        gravity_z: "0".into(),
        interface_source: interface.into(),
        drained_pressure: drained.into(),
        fissure_end_flux: end_flux.into(),
    })
    .expect("built-in data parse")
}

pub fn manufactured_case(name: &str) -> Result<ManufacturedCase, UnknownCase> {
    match name {
        // p = 1 − z on the unit square, u = (0, 1).
        "rock-only-linear" => Ok(ManufacturedCase {
            name: "rock-only-linear",
            geometry: MediumSpec {
                domain: DomainSpec { x_lo: 0.0, x_hi: 1.0, bottom: 0.0, top: 1.0, slope_cap: DEFAULT_SLOPE_CAP },
                fissures: vec![],
            },
            data: data("1", "1", "0", "0", "0", "1 - z", "0"),
            exact: ExactFields {
                rock_pressure: e("1 - z"),
                rock_velocity: [e("0"), e("1")],
                fissure_pressure: e("0"),
                fissure_tangential: e("0"),
            },
            problem: CaseProblem::Eps,
            coarse_h: 0.25,
        }),
        // Flat fissure at z = 0.5 of height 0.2 over (0, 1), blocks (0, 0.5) and (0.7, 1.2).
        // p² = x(1 − x); p¹ = x(1 − x) d(z) / 0.5 with d the distance to the nearer
        // drained level; u¹ = −∇p¹, u_τ = −∂ₓp², and f_Γ splits the flux balance
        // 4x(1 − x) + 0.2·2 evenly between the two faces.
        "flat-fissure-limit" => Ok(ManufacturedCase {
            name: "flat-fissure-limit",
            geometry: flat_fissure_geometry(),
            data: data("1", "1", "0", "4*(0.6 - abs(z - 0.6))", "2*x*(1 - x) + 0.2", "0", "1"),
            exact: ExactFields {
                rock_pressure: e("x*(1 - x)*(0.6 - abs(z - 0.6))/0.5"),
                rock_velocity: [e("-(1 - 2*x)*(0.6 - abs(z - 0.6))/0.5"), e("x*(1 - x)*((z - 0.6)/abs(z - 0.6))/0.5")],
                fissure_pressure: e("x*(1 - x)"),
                fissure_tangential: e("2*x - 1"),
            },
            problem: CaseProblem::Limit,
            coarse_h: 0.1,
        }),
        // p = 1 + x everywhere and u = (−1, 0): no exchange across the interfaces, so the
        // same fields solve the ε-problem for every ε (with ε u² = u_τ ê₁) and the limit problem.
        "uniform-tangential" => Ok(ManufacturedCase {
            name: "uniform-tangential",
            geometry: flat_fissure_geometry(),
            data: data("1", "1", "0.1", "0", "0", "1 + x", "1 - 2*x"),
            exact: ExactFields {
                rock_pressure: e("1 + x"),
                rock_velocity: [e("-1"), e("0")],
                fissure_pressure: e("1 + x"),
                fissure_tangential: e("-1"),
            },
            problem: CaseProblem::Eps,
            coarse_h: 0.1,
        }),
        "zero-field" => Ok(ManufacturedCase {
            name: "zero-field",
            geometry: flat_fissure_geometry(),
            data: ProblemData::zero_forcing(),
            exact: ExactFields {
                rock_pressure: e("0"),
                rock_velocity: [e("0"), e("0")],
                fissure_pressure: e("0"),
                fissure_tangential: e("0"),
            },
            problem: CaseProblem::Eps,
            coarse_h: 0.1,
        }),
        other => Err(UnknownCase(other.to_string())),
    }
}

/// L² errors of a discrete solution against exact fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseErrors {
    pub rock_velocity: f64,
    pub rock_pressure: f64,
    /// Fissure velocity; for strip layouts `ε u²` is compared with `u_τ ê₁`.
    pub fissure_velocity: f64,
    pub fissure_pressure: f64,
}

pub fn exact_errors(mesh: &MixedMesh, sol: &SolutionField, exact: &ExactFields) -> Result<CaseErrors, EvalError> {
    let layout = &sol.layout;
    let (mut eu, mut ep) = (0.0, 0.0);
    for (d, &ci) in layout.rock.cells.iter().enumerate() {
        for (x, w) in tri6(mesh.cell_points(ci)) {
            let u = sol.rock_velocity_at(mesh, ci, x);
            let ux = exact.rock_velocity[0].eval(x[0], x[1])?;
            let uz = exact.rock_velocity[1].eval(x[0], x[1])?;
            eu += w * ((u[0] - ux).powi(2) + (u[1] - uz).powi(2));
            ep += w * (sol.pressure[d] - exact.rock_pressure.eval(x[0], x[1])?).powi(2);
        }
    }
    let (mut fu, mut fp) = (0.0, 0.0);
    if layout.is_limit() {
        for s in &mesh.strips {
            let i = s.fissure;
            let h = mesh.medium().fissure(i).height;
            for c in 0..mesh.fibers.len() - 1 {
                let (xa, xb) = (mesh.fibers[c], mesh.fibers[c + 1]);
                let ut = sol.velocity[layout.manifold_velocity(i, c)];
                let (pa, pb) = (sol.pressure[layout.manifold_pressure(i, c)], sol.pressure[layout.manifold_pressure(i, c + 1)]);
                for (x, w) in gauss3_1d(xa, xb) {
                    let t = (x - xa) / (xb - xa);
                    let ph = pa + t * (pb - pa);
                    fu += h * w * (ut - exact.fissure_tangential.eval(x, 0.0)?).powi(2);
                    fp += h * w * (ph - exact.fissure_pressure.eval(x, 0.0)?).powi(2);
                }
            }
        }
    } else {
        let eps = sol.eps.unwrap_or(1.0);
        for s in &mesh.strips {
            let i = s.fissure;
            for col in &s.columns {
                let w0 = 1.0 / (1.0 + col.slope * col.slope).sqrt();
                for &ci in &col.cells {
                    let u = sol.strip_velocity(ci).map(|v| eps * v);
                    let cell = &mesh.cells[ci];
                    let vals = cell.vertices.map(|v| sol.pressure[layout.strip_pressure_of_vertex(mesh, i, v)]);
                    let p = mesh.cell_points(ci);
                    let lam = crate::fem::hat_gradients(p);
                    for (x, w) in tri6(p) {
                        let ut = exact.fissure_tangential.eval(x[0], 0.0)?;
                        fu += w * ((u[0] - ut * w0).powi(2) + (u[1] - ut * w0 * col.slope).powi(2));
                        let ph: f64 = (0..3)
                            .map(|k| vals[k] * (1.0 / 3.0 + lam[k][0] * (x[0] - (p[0][0] + p[1][0] + p[2][0]) / 3.0) + lam[k][1] * (x[1] - (p[0][1] + p[1][1] + p[2][1]) / 3.0)))
                            .sum();
                        fp += w * (ph - exact.fissure_pressure.eval(x[0], 0.0)?).powi(2);
                    }
                }
            }
        }
    }
    Ok(CaseErrors { rock_velocity: eu.sqrt(), rock_pressure: ep.sqrt(), fissure_velocity: fu.sqrt(), fissure_pressure: fp.sqrt() })
}
