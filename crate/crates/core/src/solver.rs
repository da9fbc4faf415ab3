//! Sparse direct solution of saddle-point systems and the discrete inf-sup constant.

use crate::assembly::DiscreteSystem;
use crate::dofs::{DofLayout, FissureDofs};
use crate::fem::{edge_midpoints, hat_gradients, rt0};
use crate::mesh::MixedMesh;
use crate::solution::SolutionField;
use crate::sparse::{norm2, CsrMatrix, Triplets};
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;
use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_DENSE_UNKNOWNS: usize = 2000;
/// Condition estimates above this are treated as numerically singular.
pub const SINGULAR_CONDITION: f64 = 1e14;
const MAX_REFINEMENT_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("relative residual {residual:e} above tolerance {tol:e}")]
    ToleranceNotReached { residual: f64, tol: f64 },
    #[error("tolerance {0} outside (0, 1e-6]")]
    InvalidTolerance(f64),
    #[error("{n} unknowns exceed the dense limit {max}")]
    TooLargeForDense { n: usize, max: usize },
    #[error("Gram matrix is not positive definite")]
    IndefiniteGram,
}

struct Factorized {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl Factorized {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Col::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[i]).collect()
    }
}

fn factorize(system: &DiscreteSystem) -> Result<Factorized, SolverError> {
    let n = system.n_total();
    let entries: Vec<Triplet<usize, usize, f64>> =
        system.full_entries().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| SolverError::SingularSystem(format!("matrix construction failed: {e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| SolverError::SingularSystem(format!("factorization failed: {e}")))?;
    Ok(Factorized { lu, n })
}

/// Column-sum norm of the full matrix.
fn norm1(system: &DiscreteSystem) -> f64 {
    let mut col = vec![0.0; system.n_total()];
    for (_, c, v) in system.full_entries() {
        col[c] += v.abs();
    }
    col.into_iter().fold(0.0, f64::max)
}

/// Deterministic probe vector with entries in `[0.5, 1.5)` and alternating signs.
fn probe(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|i| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            if i % 2 == 0 {
                0.5 + u
            } else {
                -0.5 - u
            }
        })
        .collect()
}

/// Lower bound on `‖K‖₁ ‖K⁻¹‖₁` from a single probe solve.
fn condition_estimate(system: &DiscreteSystem, f: &Factorized) -> f64 {
    let z = probe(system.n_total());
    let y = f.solve(&z);
    let ny: f64 = y.iter().map(|v| v.abs()).sum();
    let nz: f64 = z.iter().map(|v| v.abs()).sum();
    norm1(system) * ny / nz
}

pub fn solve_saddle(system: &DiscreteSystem, tol: f64) -> Result<SolutionField, SolverError> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    let n = system.n_total();
    let nv = system.layout.n_velocity;
    if n == 0 {
        return Ok(SolutionField::zeros(system.layout.clone(), system.eps));
    }
    let f = factorize(system)?;
    let cond = condition_estimate(system, &f);
    if !cond.is_finite() || cond > SINGULAR_CONDITION {
        return Err(SolverError::SingularSystem(format!("condition estimate {cond:e}")));
    }
    let rhs = system.full_rhs();
    let rhs_norm = norm2(&rhs);
    let mut x = vec![0.0; n];
    if rhs_norm > 0.0 {
        x = f.solve(&rhs);
        let mut res = residual(system, &x, &rhs);
        let mut steps = 0;
        while norm2(&res) > tol * rhs_norm && steps < MAX_REFINEMENT_STEPS {
            let dx = f.solve(&res);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            res = residual(system, &x, &rhs);
            steps += 1;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::SingularSystem("non-finite solution".into()));
        }
        let rel = norm2(&res) / rhs_norm;
        if rel > tol {
            return Err(SolverError::ToleranceNotReached { residual: rel, tol });
        }
    }
    let pressure = x.split_off(nv);
    Ok(SolutionField { velocity: x, pressure, layout: system.layout.clone(), eps: system.eps })
}

fn residual(system: &DiscreteSystem, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    system.apply(x).iter().zip(rhs).map(|(kx, b)| b - kx).collect()
}

/// Relative residual `‖b − K x‖ / ‖b‖` of a solution (0 when `b = 0` and `x = 0`).
pub fn relative_residual(system: &DiscreteSystem, sol: &SolutionField) -> f64 {
    let rhs = system.full_rhs();
    let r = norm2(&residual(system, &sol.stacked(), &rhs));
    let b = norm2(&rhs);
    if b > 0.0 {
        r / b
    } else {
        r
    }
}

/// Gram matrices of the velocity and pressure norms.
///
/// Velocity: `‖v¹‖₀² + ‖∇·v¹‖₀² + ‖v¹·n̂‖²_{0,Γ} + ‖v²‖₀²`.
/// Pressure: `‖q¹‖₀² + ‖q²‖₁²`, with the fissure parts in collapsed form for limit layouts.
pub fn norm_grams(mesh: &MixedMesh, layout: &DofLayout) -> (CsrMatrix, CsrMatrix) {
    let mut gv = Triplets::new(layout.n_velocity, layout.n_velocity);
    let mut gq = Triplets::new(layout.n_pressure, layout.n_pressure);
    for &ci in &layout.rock.cells {
        let cell = &mesh.cells[ci];
        let p = mesh.cell_points(ci);
        let signs = layout.rock.signs[ci];
        let dofs = cell.facets.map(|f| layout.flux(f).unwrap());
        for x in edge_midpoints(p) {
            let phi: [[f64; 2]; 3] = std::array::from_fn(|k| rt0(p, cell.area, k, signs[k], x));
            for i in 0..3 {
                for j in 0..3 {
                    gv.add(dofs[i], dofs[j], cell.area / 3.0 * (phi[i][0] * phi[j][0] + phi[i][1] * phi[j][1]));
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                gv.add(dofs[i], dofs[j], signs[i] * signs[j] / cell.area);
            }
        }
        let d = layout.rock_pressure(ci).unwrap();
        gq.add(d, d, cell.area);
    }
    for (fi, f) in mesh.facets.iter().enumerate() {
        if f.tag.is_interface() {
            let e = layout.flux(fi).unwrap();
            gv.add(e, e, 1.0 / f.measure);
        }
    }
    match &layout.fissure {
        FissureDofs::Strip(_) => {
            for s in &mesh.strips {
                for col in &s.columns {
                    for &ci in &col.cells {
                        let cell = &mesh.cells[ci];
                        for d in layout.strip_velocity(ci).unwrap() {
                            gv.add(d, d, cell.area);
                        }
                        let g = hat_gradients(mesh.cell_points(ci));
                        let nodes = cell.vertices.map(|v| layout.strip_pressure_of_vertex(mesh, s.fissure, v));
                        for a in 0..3 {
                            for b in 0..3 {
                                let mass = cell.area / 12.0 * if a == b { 2.0 } else { 1.0 };
                                let stiff = cell.area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                                gq.add(nodes[a], nodes[b], mass + stiff);
                            }
                        }
                    }
                }
            }
        }
        FissureDofs::Manifold(m) => {
            for i in 1..=m.n_fissures {
                let h = m.heights[i - 1];
                for c in 0..m.n_columns {
                    let dx = mesh.fibers[c + 1] - mesh.fibers[c];
                    let u = layout.manifold_velocity(i, c);
                    gv.add(u, u, h * dx);
                    let nodes = [layout.manifold_pressure(i, c), layout.manifold_pressure(i, c + 1)];
                    for a in 0..2 {
                        for b in 0..2 {
                            let mass = dx / 6.0 * if a == b { 2.0 } else { 1.0 };
                            let stiff = if a == b { 1.0 } else { -1.0 } / dx;
                            gq.add(nodes[a], nodes[b], h * (mass + stiff));
                        }
                    }
                }
            }
        }
    }
    (gv.into_csr(), gq.into_csr())
}

fn dense(m: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows, m.ncols);
    for (r, c, v) in m.iter() {
        d[(r, c)] += v;
    }
    d
}

/// Smallest generalized singular value of `B` (pressure × velocity) with respect
/// to the Gram matrices `G_V` and `G_Q`: `β² = λ_min(L_Q⁻¹ B G_V⁻¹ Bᵀ L_Q⁻ᵀ)`.
pub fn infsup_dense(b: &DMatrix<f64>, gv: &DMatrix<f64>, gq: &DMatrix<f64>) -> Result<f64, SolverError> {
    let lv = gv.clone().cholesky().ok_or(SolverError::IndefiniteGram)?;
    let lq = gq.clone().cholesky().ok_or(SolverError::IndefiniteGram)?;
    let x = lv.l().solve_lower_triangular(&b.transpose()).ok_or(SolverError::IndefiniteGram)?;
    let s = x.transpose() * &x;
    let lql = lq.l();
    let y = lql.solve_lower_triangular(&s).ok_or(SolverError::IndefiniteGram)?;
    let c = lql.solve_lower_triangular(&y.transpose()).ok_or(SolverError::IndefiniteGram)?;
    let c = 0.5 * (&c + c.transpose());
    let min = SymmetricEigen::new(c).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min.max(0.0).sqrt())
}

pub fn estimate_infsup(system: &DiscreteSystem, mesh: &MixedMesh) -> Result<f64, SolverError> {
    let n = system.n_total();
    if n > MAX_DENSE_UNKNOWNS {
        return Err(SolverError::TooLargeForDense { n, max: MAX_DENSE_UNKNOWNS });
    }
    let (gv, gq) = norm_grams(mesh, &system.layout);
    infsup_dense(&dense(&system.b), &dense(&gv), &dense(&gq))
}
