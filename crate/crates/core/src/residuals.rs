//! Post-solve balance checks.

use crate::assembly::DiscreteSystem;
use crate::data::{DataError, Field, ProblemData};
use crate::fem::{edge_midpoints, gauss2, rt0};
use crate::mesh::{FacetTag, MixedMesh};
use crate::solution::SolutionField;
use std::collections::BTreeSet;

/// `∫_K ∇·u_h − ∫_K F` for every rock cell, in rock-dof order.
pub fn conservation_residual(solution: &SolutionField, system: &DiscreteSystem, mesh: &MixedMesh) -> Vec<f64> {
    solution
        .layout
        .rock
        .cells
        .iter()
        .enumerate()
        .map(|(d, &ci)| solution.rock_divergence(mesh, ci) * mesh.cells[ci].area - system.rhs_f[d])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceResiduals {
    /// Per interface facet: `λ_e − p̄² − s ᾱ (u¹·ν)`, where `λ_e` is the rock
    /// pressure trace recovered from the cell Darcy law tested with the facet's
    /// flux function, `s = +1` on `Γ_i` and `−1` on `Γ_i + h_i`.
    pub stress: Vec<(usize, f64)>,
    /// Per interface pressure unknown: residual of the mass balance tested
    /// against its hat function.
    pub flux: Vec<(usize, f64)>,
}

impl InterfaceResiduals {
    pub fn max_stress(&self) -> f64 {
        self.stress.iter().fold(0.0, |m, (_, r)| m.max(r.abs()))
    }
    pub fn max_flux(&self) -> f64 {
        self.flux.iter().fold(0.0, |m, (_, r)| m.max(r.abs()))
    }
}

pub fn interface_residuals(
    solution: &SolutionField,
    system: &DiscreteSystem,
    mesh: &MixedMesh,
    data: &ProblemData,
) -> Result<InterfaceResiduals, DataError> {
    let layout = &solution.layout;
    let mut stress = Vec::new();
    let mut nodes = BTreeSet::new();
    for (fi, f) in mesh.facets.iter().enumerate() {
        let (i, s) = match f.tag {
            FacetTag::FissureBottom(i) => (i, 1.0),
            FacetTag::FissureTop(i) => (i, -1.0),
            _ => continue,
        };
        let rock = mesh.rock_cell_of(fi);
        let cell = &mesh.cells[rock];
        let k = cell.facets.iter().position(|&g| g == fi).unwrap();
        let p = mesh.cell_points(rock);
        let sign = layout.rock.signs[rock][k];
        let mut work = 0.0;
        for x in edge_midpoints(p) {
            let a1 = data.eval(Field::A1, x)?;
            let g = data.gravity_at(x)?;
            let u = solution.rock_velocity_at(mesh, rock, x);
            let phi = rt0(p, cell.area, k, sign, x);
            work += cell.area / 3.0 * ((a1 * u[0] + g[0]) * phi[0] + (a1 * u[1] + g[1]) * phi[1]);
        }
        let pk = solution.pressure[layout.rock_pressure(rock).unwrap()];
        let trace = pk - s * work;
        let [pa, pb] = mesh.facet_points(fi);
        let mut alpha = 0.0;
        for (x, _, w) in gauss2(pa, pb) {
            alpha += w * data.eval(Field::Alpha, x)?;
        }
        alpha /= f.measure;
        let fissure_nodes = f.vertices.map(|v| layout.interface_pressure(mesh, i, v));
        let p2 = 0.5 * (solution.pressure[fissure_nodes[0]] + solution.pressure[fissure_nodes[1]]);
        let un = solution.velocity[layout.flux(fi).unwrap()] / f.measure;
        stress.push((fi, trace - p2 - s * alpha * un));
        nodes.extend(fissure_nodes);
    }
    let bu = system.b.mul_vec(&solution.velocity);
    let flux = nodes.into_iter().map(|n| (n, bu[n] + system.rhs_f[n])).collect();
    Ok(InterfaceResiduals { stress, flux })
}
