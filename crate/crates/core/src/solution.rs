//! Solution coefficient vectors and their norms.

use crate::data::{DataError, Field, ProblemData};
use crate::dofs::{DofLayout, FissureDofs};
use crate::fem::{edge_midpoints, hat_gradients, rt0};
use crate::mesh::{CellTag, FacetTag, MixedMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub layout: DofLayout,
    /// `None` for limit solutions and reconstructed limit fields.
    pub eps: Option<f64>,
}

fn sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

impl SolutionField {
    pub fn zeros(layout: DofLayout, eps: Option<f64>) -> SolutionField {
        SolutionField { velocity: vec![0.0; layout.n_velocity], pressure: vec![0.0; layout.n_pressure], layout, eps }
    }

    pub fn max_abs(&self) -> f64 {
        self.velocity.iter().chain(&self.pressure).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Stacked `[u; p]`.
    pub fn stacked(&self) -> Vec<f64> {
        let mut x = self.velocity.clone();
        x.extend_from_slice(&self.pressure);
        x
    }

    /// `self − other`; both must share a layout.
    pub fn difference(&self, other: &SolutionField) -> SolutionField {
        assert_eq!(self.layout.n_velocity, other.layout.n_velocity, "layouts differ");
        assert_eq!(self.layout.n_pressure, other.layout.n_pressure, "layouts differ");
        SolutionField {
            velocity: self.velocity.iter().zip(&other.velocity).map(|(a, b)| a - b).collect(),
            pressure: self.pressure.iter().zip(&other.pressure).map(|(a, b)| a - b).collect(),
            layout: self.layout.clone(),
            eps: self.eps,
        }
    }

    /// Copy with the fissure velocity multiplied by `factor`.
    pub fn scale_fissure_velocity(&self, factor: f64) -> SolutionField {
        let mut s = self.clone();
        for v in &mut s.velocity[self.layout.rock.n_flux()..] {
            *v *= factor;
        }
        s
    }

    /// Rock velocity at `x` inside rock cell `ci`.
    pub fn rock_velocity_at(&self, mesh: &MixedMesh, ci: usize, x: [f64; 2]) -> [f64; 2] {
        let cell = &mesh.cells[ci];
        let p = mesh.cell_points(ci);
        let mut u = [0.0; 2];
        for k in 0..3 {
            let d = self.layout.flux(cell.facets[k]).expect("rock facet");
            let phi = rt0(p, cell.area, k, self.layout.rock.signs[ci][k], x);
            u[0] += self.velocity[d] * phi[0];
            u[1] += self.velocity[d] * phi[1];
        }
        u
    }

    fn rock_integral(&self, mesh: &MixedMesh, mut f: impl FnMut(usize, [f64; 2], [f64; 2]) -> Result<f64, DataError>) -> Result<f64, DataError> {
        let mut s = 0.0;
        for &ci in &self.layout.rock.cells {
            let w = mesh.cells[ci].area / 3.0;
            for x in edge_midpoints(mesh.cell_points(ci)) {
                s += w * f(ci, x, self.rock_velocity_at(mesh, ci, x))?;
            }
        }
        Ok(s)
    }

    pub fn rock_velocity_l2(&self, mesh: &MixedMesh) -> f64 {
        self.rock_integral(mesh, |_, _, u| Ok(sq(u))).unwrap().sqrt()
    }

    /// `(∫_{Ω₁} a₁ |u|²)^{1/2}`.
    pub fn rock_energy_norm(&self, mesh: &MixedMesh, data: &ProblemData) -> Result<f64, DataError> {
        Ok(self.rock_integral(mesh, |_, x, u| Ok(data.eval(Field::A1, x)? * sq(u)))?.sqrt())
    }

    /// `‖a₁ u‖₀` over the rock.
    pub fn rock_weighted_velocity_l2(&self, mesh: &MixedMesh, data: &ProblemData) -> Result<f64, DataError> {
        Ok(self
            .rock_integral(mesh, |_, x, u| {
                let a = data.eval(Field::A1, x)?;
                Ok(a * a * sq(u))
            })?
            .sqrt())
    }

    pub fn rock_divergence(&self, mesh: &MixedMesh, ci: usize) -> f64 {
        let cell = &mesh.cells[ci];
        let flux: f64 = (0..3)
            .map(|k| self.layout.rock.signs[ci][k] * self.velocity[self.layout.flux(cell.facets[k]).unwrap()])
            .sum();
        flux / cell.area
    }

    pub fn rock_divergence_l2(&self, mesh: &MixedMesh) -> f64 {
        self.layout
            .rock
            .cells
            .iter()
            .map(|&ci| mesh.cells[ci].area * self.rock_divergence(mesh, ci).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `(Σ_Γ ∫ (u¹·n̂)²)^{1/2}` over both faces of every fissure.
    pub fn interface_normal_l2(&self, mesh: &MixedMesh) -> f64 {
        mesh.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.tag.is_interface())
            .map(|(fi, f)| self.velocity[self.layout.flux(fi).unwrap()].powi(2) / f.measure)
            .sum::<f64>()
            .sqrt()
    }

    pub fn rock_pressure_l2(&self, mesh: &MixedMesh) -> f64 {
        self.layout
            .rock
            .cells
            .iter()
            .enumerate()
            .map(|(d, &ci)| mesh.cells[ci].area * self.pressure[d].powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Velocity of strip cell `ci`.
    pub fn strip_velocity(&self, ci: usize) -> [f64; 2] {
        let [a, b] = self.layout.strip_velocity(ci).expect("strip cell");
        [self.velocity[a], self.velocity[b]]
    }

    fn strip_cells<'a>(&'a self, mesh: &'a MixedMesh) -> impl Iterator<Item = (usize, usize, f64)> + 'a {
        mesh.strips.iter().flat_map(|s| {
            s.columns.iter().flat_map(move |col| col.cells.iter().map(move |&ci| (s.fissure, ci, col.slope)))
        })
    }

    fn strip_pressure_gradient(&self, mesh: &MixedMesh, i: usize, ci: usize) -> [f64; 2] {
        let g = hat_gradients(mesh.cell_points(ci));
        let mut out = [0.0; 2];
        for (k, &v) in mesh.cells[ci].vertices.iter().enumerate() {
            let p = self.pressure[self.layout.strip_pressure_of_vertex(mesh, i, v)];
            out[0] += p * g[k][0];
            out[1] += p * g[k][1];
        }
        out
    }

    /// `‖u²‖₀` over all strips (manifold form for limit layouts).
    pub fn fissure_velocity_l2(&self, mesh: &MixedMesh) -> f64 {
        match &self.layout.fissure {
            FissureDofs::Strip(_) => self
                .strip_cells(mesh)
                .map(|(_, ci, _)| mesh.cells[ci].area * sq(self.strip_velocity(ci)))
                .sum::<f64>()
                .sqrt(),
            FissureDofs::Manifold(_) => self.manifold_norms(mesh).velocity,
        }
    }

    /// Tangential and normal parts `(‖u·ê₁‖₀, ‖u·n̂‖₀)` of the strip velocity.
    pub fn strip_tangential_normal_l2(&self, mesh: &MixedMesh) -> (f64, f64) {
        let (mut t, mut n) = (0.0, 0.0);
        for (_, ci, s) in self.strip_cells(mesh) {
            let u = self.strip_velocity(ci);
            let w = 1.0 / (1.0 + s * s).sqrt();
            let a = mesh.cells[ci].area;
            t += a * (w * (u[0] + s * u[1])).powi(2);
            n += a * (w * (u[1] - s * u[0])).powi(2);
        }
        (t.sqrt(), n.sqrt())
    }

    pub fn fissure_pressure_l2(&self, mesh: &MixedMesh) -> f64 {
        match &self.layout.fissure {
            FissureDofs::Strip(_) => {
                let mut s = 0.0;
                for (i, ci, _) in self.strip_cells(mesh) {
                    let cell = &mesh.cells[ci];
                    let vals = cell.vertices.map(|v| self.pressure[self.layout.strip_pressure_of_vertex(mesh, i, v)]);
                    for k in 0..3 {
                        let mid = 0.5 * (vals[(k + 1) % 3] + vals[(k + 2) % 3]);
                        s += cell.area / 3.0 * mid * mid;
                    }
                }
                s.sqrt()
            }
            FissureDofs::Manifold(_) => self.manifold_norms(mesh).pressure,
        }
    }

    pub fn fissure_pressure_h1_semi(&self, mesh: &MixedMesh) -> f64 {
        match &self.layout.fissure {
            FissureDofs::Strip(_) => self
                .strip_cells(mesh)
                .map(|(i, ci, _)| mesh.cells[ci].area * sq(self.strip_pressure_gradient(mesh, i, ci)))
                .sum::<f64>()
                .sqrt(),
            FissureDofs::Manifold(_) => self.manifold_norms(mesh).pressure_gradient,
        }
    }

    /// `‖∂_z p²‖₀` on the strips (zero for limit layouts).
    pub fn dz_pressure_l2(&self, mesh: &MixedMesh) -> f64 {
        match &self.layout.fissure {
            FissureDofs::Strip(_) => self
                .strip_cells(mesh)
                .map(|(i, ci, _)| mesh.cells[ci].area * self.strip_pressure_gradient(mesh, i, ci)[1].powi(2))
                .sum::<f64>()
                .sqrt(),
            FissureDofs::Manifold(_) => 0.0,
        }
    }

    /// `‖(1/ε) ∂_z p²‖₀`.
    pub fn eta_l2(&self, mesh: &MixedMesh) -> f64 {
        match self.eps {
            Some(eps) => self.dz_pressure_l2(mesh) / eps,
            None => 0.0,
        }
    }

    /// Norms of the collapsed representation, integrating `h_i w_i f` against arc length.
    pub fn manifold_norms(&self, mesh: &MixedMesh) -> ManifoldNorms {
        let (mut v, mut p, mut g) = (0.0, 0.0, 0.0);
        for s in &mesh.strips {
            let i = s.fissure;
            let h = mesh.medium().fissure(i).height;
            for (c, col) in s.columns.iter().enumerate() {
                let dx = mesh.fibers[c + 1] - mesh.fibers[c];
                let sl = col.slope;
                let ds = dx * (1.0 + sl * sl).sqrt();
                let w = 1.0 / (1.0 + sl * sl).sqrt();
                let ut = self.velocity[self.layout.manifold_velocity(i, c)];
                let (a, b) = (
                    self.pressure[self.layout.manifold_pressure(i, c)],
                    self.pressure[self.layout.manifold_pressure(i, c + 1)],
                );
                v += h * w * ut * ut * ds;
                p += h * w * (a * a + a * b + b * b) / 3.0 * ds;
                g += h * w * ((b - a) / dx).powi(2) * ds;
            }
        }
        ManifoldNorms { velocity: v.sqrt(), pressure: p.sqrt(), pressure_gradient: g.sqrt() }
    }

    /// `Σ_Γ ∫ α (u¹·n̂)²`, evaluated with the facet-averaged `α`.
    pub fn interface_energy(&self, mesh: &MixedMesh, data: &ProblemData) -> Result<f64, DataError> {
        let mut s = 0.0;
        for (fi, f) in mesh.facets.iter().enumerate() {
            if !matches!(f.tag, FacetTag::FissureBottom(_) | FacetTag::FissureTop(_)) {
                continue;
            }
            let [a, b] = mesh.facet_points(fi);
            let mut alpha = 0.0;
            for (x, _, w) in crate::fem::gauss2(a, b) {
                alpha += w * data.eval(Field::Alpha, x)?;
            }
            let un = self.velocity[self.layout.flux(fi).unwrap()] / f.measure;
            s += alpha * un * un;
        }
        Ok(s)
    }

    /// `∫_{strips} a₂ |u|²` (strip layouts) or `Σ h_i ∫ a₂ u_τ²` (limit layouts).
    pub fn fissure_energy(&self, mesh: &MixedMesh, data: &ProblemData) -> Result<f64, DataError> {
        let mut s = 0.0;
        match &self.layout.fissure {
            FissureDofs::Strip(_) => {
                for (_, ci, _) in self.strip_cells(mesh) {
                    let cell = &mesh.cells[ci];
                    let u2 = sq(self.strip_velocity(ci));
                    for x in edge_midpoints(mesh.cell_points(ci)) {
                        s += cell.area / 3.0 * data.eval(Field::A2, x)? * u2;
                    }
                }
            }
            FissureDofs::Manifold(_) => {
                for m in crate::limit::manifold_meshes(mesh) {
                    for c in 0..m.n_elements() {
                        let ut = self.velocity[self.layout.manifold_velocity(m.fissure, c)];
                        for (p, _, w) in crate::fem::gauss2([m.x[c], 0.0], [m.x[c + 1], 0.0]) {
                            s += m.height * w * data.eval(Field::A2, m.midline(c, p[0]))? * ut * ut;
                        }
                    }
                }
            }
        }
        Ok(s)
    }

    /// Region tag test helper: true when every strip velocity satisfies `u·n̂ = 0` to `tol`.
    pub fn strip_is_tangential(&self, mesh: &MixedMesh, tol: f64) -> bool {
        self.strip_cells(mesh).all(|(_, ci, s)| {
            let u = self.strip_velocity(ci);
            ((u[1] - s * u[0]) / (1.0 + s * s).sqrt()).abs() <= tol
        })
    }

    /// Cells of `mesh` tagged as strip `i`.
    pub fn strip_cell_ids(mesh: &MixedMesh, i: usize) -> Vec<usize> {
        mesh.cells.iter().enumerate().filter(|(_, c)| c.tag == CellTag::Strip(i)).map(|(k, _)| k).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldNorms {
    pub velocity: f64,
    pub pressure: f64,
    pub pressure_gradient: f64,
}
