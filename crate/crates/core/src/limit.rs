//! Collapsed problem: rock Darcy flow coupled to tangential flow along the
//! fissure curves.
//!
//! Per fissure the unknowns are a tangential velocity `u_τ` per fiber column
//! and a continuous piecewise-linear pressure per fiber. The rock flux traces
//! on `Γ_i` and `Γ_i + h_i` stay separate unknowns; the strip thickness enters
//! only through the weight `h_i`.

use crate::assembly::{assemble_facets, assemble_rock_cells, AssemblyError, Blocks, DiscreteSystem};
use crate::data::{Field, ProblemData};
use crate::dofs::DofLayout;
use crate::fem::gauss2;
use crate::mesh::MixedMesh;
use crate::solution::SolutionField;

pub const LIMIT_DATA_TOL: f64 = 1e-10;
const SAMPLES_PER_FIBER: usize = 5;

/// One collapsed fissure.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMesh {
    pub fissure: usize,
    pub height: f64,
    /// Fiber abscissae (nodes).
    pub x: Vec<f64>,
    /// `ζ_i` polyline values at the nodes.
    pub zeta: Vec<f64>,
    /// `λ_i = ζ_i − Σ_{ℓ<i} h_ℓ` at the nodes.
    pub lambda: Vec<f64>,
    /// Per element slope and weight `1/√(1 + ζ′²)`.
    pub slope: Vec<f64>,
    pub weight: Vec<f64>,
}

impl ManifoldMesh {
    pub fn n_elements(&self) -> usize {
        self.x.len() - 1
    }

    pub fn element_length(&self, c: usize) -> f64 {
        self.x[c + 1] - self.x[c]
    }

    /// Point on the strip mid-line above abscissa `x` inside element `c`.
    pub fn midline(&self, c: usize, x: f64) -> [f64; 2] {
        let t = (x - self.x[c]) / self.element_length(c);
        [x, self.zeta[c] + t * (self.zeta[c + 1] - self.zeta[c]) + 0.5 * self.height]
    }
}

pub fn manifold_meshes(mesh: &MixedMesh) -> Vec<ManifoldMesh> {
    let medium = mesh.medium();
    mesh.strips
        .iter()
        .map(|s| {
            let i = s.fissure;
            let zeta: Vec<f64> = (0..mesh.fibers.len()).map(|k| mesh.vertices[mesh.vertex_id(k, s.bottom_level)][1]).collect();
            let shift = medium.cumulative_height(i - 1);
            let slope: Vec<f64> = s.columns.iter().map(|c| c.slope).collect();
            ManifoldMesh {
                fissure: i,
                height: medium.fissure(i).height,
                x: mesh.fibers.clone(),
                lambda: zeta.iter().map(|z| z - shift).collect(),
                weight: slope.iter().map(|s| 1.0 / (1.0 + s * s).sqrt()).collect(),
                slope,
                zeta,
            }
        })
        .collect()
}

/// `a₂` and the tangential part of `g` must not depend on `z` inside a strip.
pub fn check_limit_data(manifolds: &[ManifoldMesh], data: &ProblemData) -> Result<(), AssemblyError> {
    for m in manifolds {
        for c in 0..m.n_elements() {
            let (s, w) = (m.slope[c], m.weight[c]);
            for x in [m.x[c], 0.5 * (m.x[c] + m.x[c + 1]), m.x[c + 1]] {
                let bottom = m.midline(c, x)[1] - 0.5 * m.height;
                let mut first: Option<(f64, f64)> = None;
                for j in 0..SAMPLES_PER_FIBER {
                    let z = bottom + m.height * j as f64 / (SAMPLES_PER_FIBER - 1) as f64;
                    let a2 = data.eval(Field::A2, [x, z])?;
                    let g = data.gravity_at([x, z])?;
                    let gt = w * (g[0] + s * g[1]);
                    match first {
                        None => first = Some((a2, gt)),
                        Some((a0, g0)) => {
                            for (field, v, v0) in [("a2", a2, a0), ("tangential gravity", gt, g0)] {
                                let variation = (v - v0).abs();
                                if variation > LIMIT_DATA_TOL * v0.abs().max(1.0) {
                                    return Err(AssemblyError::LimitData { field, x, z, variation });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn assemble_limit(mesh: &MixedMesh, manifolds: &[ManifoldMesh], data: &ProblemData) -> Result<DiscreteSystem, AssemblyError> {
    check_limit_data(manifolds, data)?;
    let layout = DofLayout::limit(mesh);
    let mut out = Blocks::new(&layout);
    assemble_rock_cells(mesh, data, &layout, &mut out)?;
    for m in manifolds {
        let i = m.fissure;
        let h = m.height;
        for c in 0..m.n_elements() {
            let (s, w) = (m.slope[c], m.weight[c]);
            let u = layout.manifold_velocity(i, c);
            let (n0, n1) = (layout.manifold_pressure(i, c), layout.manifold_pressure(i, c + 1));
            let (mut a2, mut gt) = (0.0, 0.0);
            for (p, _, wq) in gauss2([m.x[c], 0.0], [m.x[c + 1], 0.0]) {
                let q = m.midline(c, p[0]);
                a2 += wq * data.eval(Field::A2, q)?;
                let g = data.gravity_at(q)?;
                gt += wq * w * (g[0] + s * g[1]);
            }
            out.a.add(u, u, h * a2);
            out.b.add(n0, u, -h * w);
            out.b.add(n1, u, h * w);
            out.rhs_g[u] -= h * gt;
        }
    }
    assemble_facets(mesh, data, &layout, &mut out)?;
    Ok(out.finish(layout, None))
}

/// Expands a limit solution into z-independent strip fields on the ε layout:
/// `ũ = w u_τ`, `u₃ = ũ ζ′`, and the fiber pressure copied along each fiber.
pub fn reconstruct_strip_fields(limit: &SolutionField, mesh: &MixedMesh, manifolds: &[ManifoldMesh]) -> SolutionField {
    let src = &limit.layout;
    let layout = DofLayout::eps(mesh);
    let mut velocity = vec![0.0; layout.n_velocity];
    let mut pressure = vec![0.0; layout.n_pressure];
    let nf = layout.rock.n_flux();
    velocity[..nf].copy_from_slice(&limit.velocity[..nf]);
    let nc = layout.rock.n_cells();
    pressure[..nc].copy_from_slice(&limit.pressure[..nc]);
    for (m, s) in manifolds.iter().zip(&mesh.strips) {
        let i = m.fissure;
        for (c, col) in s.columns.iter().enumerate() {
            let ut = limit.velocity[src.manifold_velocity(i, c)];
            let ux = m.weight[c] * ut;
            for &ci in &col.cells {
                let [dx, dz] = layout.strip_velocity(ci).unwrap();
                velocity[dx] = ux;
                velocity[dz] = ux * m.slope[c];
            }
        }
        for k in 0..mesh.fibers.len() {
            let pk = limit.pressure[src.manifold_pressure(i, k)];
            for level in s.bottom_level..=s.top_level {
                pressure[layout.strip_pressure(i, k, level)] = pk;
            }
        }
    }
    SolutionField { velocity, pressure, layout, eps: None }
}
