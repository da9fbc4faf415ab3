//! Saddle-point assembly of the ε-scaled problem on the reference mesh.
//!
//! The system is
//!
//! ```text
//! [ A  Bᵀ ] [u]   [ rhs_g ]
//! [ B  0  ] [p] = [ −rhs_f ]
//! ```
//!
//! with `A(u, v) = ∫_{Ω₁} a₁ u·v + ε² ∫_{Ω₂} a₂ u·v + Σ ∫_Γ α (u·n̂)(v·n̂)` and
//! `B v (q) = −∫_{Ω₁} q ∇·v + Σ_strips ∫ [ε ∂ₓq ṽ + ∂_z q (v₃ + (ε − 1) ζ′ ṽ)]
//!            + Σ_i ( ∫_{Γ_i} q² v·n̂ − ∫_{Γ_i + h_i} q² v·n̂ )`.

use crate::data::{DataError, Field, ProblemData};
use crate::dofs::DofLayout;
use crate::fem::{edge_midpoints, gauss2, hat_at_midpoint, hat_gradients, rt0};
use crate::mesh::{CellTag, FacetTag, MixedMesh};
use crate::sparse::{CsrMatrix, Triplets};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("epsilon {0} is outside (0, 1]")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Coefficient(#[from] DataError),
    #[error("limit data depend on z: `{field}` varies by {variation:e} along the fiber at x = {x} (sampled at z = {z})")]
    LimitData { field: &'static str, x: f64, z: f64, variation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub rhs_g: Vec<f64>,
    pub rhs_f: Vec<f64>,
    pub layout: DofLayout,
    /// `None` for the limit problem.
    pub eps: Option<f64>,
}

impl DiscreteSystem {
    pub fn n_total(&self) -> usize {
        self.layout.n_total()
    }

    /// Entries of the full symmetric matrix.
    pub fn full_entries(&self) -> Vec<(usize, usize, f64)> {
        let nv = self.layout.n_velocity;
        let mut e: Vec<_> = self.a.iter().collect();
        for (r, c, v) in self.b.iter() {
            e.push((nv + r, c, v));
            e.push((c, nv + r, v));
        }
        e
    }

    pub fn full_rhs(&self) -> Vec<f64> {
        let mut r = self.rhs_g.clone();
        r.extend(self.rhs_f.iter().map(|v| -v));
        r
    }

    /// `K x` for the stacked vector `x = [u; p]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let nv = self.layout.n_velocity;
        let (u, p) = x.split_at(nv);
        let mut top = self.a.mul_vec(u);
        for (t, v) in top.iter_mut().zip(self.b.tr_mul_vec(p)) {
            *t += v;
        }
        top.extend(self.b.mul_vec(u));
        top
    }
}

pub(crate) struct Blocks {
    pub a: Triplets,
    pub b: Triplets,
    pub rhs_g: Vec<f64>,
    pub rhs_f: Vec<f64>,
}

impl Blocks {
    pub fn new(layout: &DofLayout) -> Blocks {
        Blocks {
            a: Triplets::new(layout.n_velocity, layout.n_velocity),
            b: Triplets::new(layout.n_pressure, layout.n_velocity),
            rhs_g: vec![0.0; layout.n_velocity],
            rhs_f: vec![0.0; layout.n_pressure],
        }
    }

    pub fn finish(self, layout: DofLayout, eps: Option<f64>) -> DiscreteSystem {
        DiscreteSystem { a: self.a.into_csr(), b: self.b.into_csr(), rhs_g: self.rhs_g, rhs_f: self.rhs_f, layout, eps }
    }
}

struct LocalRock {
    a: Vec<(usize, usize, f64)>,
    b: Vec<(usize, usize, f64)>,
    g: Vec<(usize, f64)>,
    f: (usize, f64),
}

/// Rock cells: RT0 mass with `a₁`, divergence coupling, gravity and source loads.
pub(crate) fn assemble_rock_cells(mesh: &MixedMesh, data: &ProblemData, layout: &DofLayout, out: &mut Blocks) -> Result<(), DataError> {
    let locals: Vec<Result<LocalRock, DataError>> = layout
        .rock
        .cells
        .par_iter()
        .map(|&ci| {
            let cell = &mesh.cells[ci];
            let p = mesh.cell_points(ci);
            let area = cell.area;
            let signs = layout.rock.signs[ci];
            let dofs = cell.facets.map(|f| layout.flux(f).expect("rock facet has a flux unknown"));
            let q = edge_midpoints(p);
            let w = area / 3.0;
            let mut a = Vec::with_capacity(9);
            let mut g = Vec::with_capacity(3);
            let mut m = [[0.0; 3]; 3];
            let mut gl = [0.0; 3];
            let mut fsum = 0.0;
            for x in q {
                let a1 = data.eval(Field::A1, x)?;
                let grav = data.gravity_at(x)?;
                fsum += w * data.eval(Field::Source, x)?;
                let phi: [[f64; 2]; 3] = std::array::from_fn(|k| rt0(p, area, k, signs[k], x));
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += w * a1 * (phi[i][0] * phi[j][0] + phi[i][1] * phi[j][1]);
                    }
                    gl[i] -= w * (grav[0] * phi[i][0] + grav[1] * phi[i][1]);
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    a.push((dofs[i], dofs[j], m[i][j]));
                }
                g.push((dofs[i], gl[i]));
            }
            let pc = layout.rock_pressure(ci).unwrap();
            let b = (0..3).map(|k| (pc, dofs[k], -signs[k])).collect();
            Ok(LocalRock { a, b, g, f: (pc, fsum) })
        })
        .collect();
    for l in locals {
        let l = l?;
        out.a.extend(l.a);
        out.b.extend(l.b);
        for (i, v) in l.g {
            out.rhs_g[i] += v;
        }
        out.rhs_f[l.f.0] += l.f.1;
    }
    Ok(())
}

/// Interface, drained and lateral facet terms. Strip-side pressure indices are
/// resolved through the layout, so the same routine serves both problems.
pub(crate) fn assemble_facets(mesh: &MixedMesh, data: &ProblemData, layout: &DofLayout, out: &mut Blocks) -> Result<(), DataError> {
    for (fi, facet) in mesh.facets.iter().enumerate() {
        let [pa, pb] = mesh.facet_points(fi);
        let len = facet.measure;
        match facet.tag {
            FacetTag::FissureBottom(i) | FacetTag::FissureTop(i) => {
                let sigma = if matches!(facet.tag, FacetTag::FissureBottom(_)) { 1.0 } else { -1.0 };
                let e = layout.flux(fi).unwrap();
                let nodes = facet.vertices.map(|v| layout.interface_pressure(mesh, i, v));
                let mut alpha = 0.0;
                for (x, t, w) in gauss2(pa, pb) {
                    alpha += w * data.eval(Field::Alpha, x)?;
                    let fg = data.eval(Field::InterfaceSource, x)?;
                    for (node, hat) in nodes.iter().zip([1.0 - t, t]) {
                        out.b.add(*node, e, sigma * w * hat / len);
                        out.rhs_f[*node] += w * fg * hat;
                    }
                }
                out.a.add(e, e, alpha / (len * len));
            }
            FacetTag::Drained => {
                let e = layout.flux(fi).unwrap();
                let mut pd = 0.0;
                for (x, _, w) in gauss2(pa, pb) {
                    pd += w * data.eval(Field::DrainedPressure, x)?;
                }
                out.rhs_g[e] -= pd / len;
            }
            FacetTag::FissureLateral(i) => {
                let nodes = facet.vertices.map(|v| layout.interface_pressure(mesh, i, v));
                for (x, t, w) in gauss2(pa, pb) {
                    let qn = data.eval(Field::FissureEndFlux, x)?;
                    for (node, hat) in nodes.iter().zip([1.0 - t, t]) {
                        out.rhs_f[*node] -= w * qn * hat;
                    }
                }
            }
            FacetTag::Interior => {}
        }
    }
    Ok(())
}

struct LocalStrip {
    a: [(usize, f64); 2],
    b: Vec<(usize, usize, f64)>,
    g: [(usize, f64); 2],
    f: [(usize, f64); 3],
}

pub fn assemble_eps(mesh: &MixedMesh, data: &ProblemData, eps: f64) -> Result<DiscreteSystem, AssemblyError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(AssemblyError::InvalidEpsilon(eps));
    }
    let layout = DofLayout::eps(mesh);
    let mut out = Blocks::new(&layout);
    assemble_rock_cells(mesh, data, &layout, &mut out)?;

    let mut columns = Vec::new();
    for s in &mesh.strips {
        for col in &s.columns {
            for &ci in &col.cells {
                columns.push((s.fissure, col.slope, ci));
            }
        }
    }
    let locals: Vec<Result<LocalStrip, DataError>> = columns
        .par_iter()
        .map(|&(i, slope, ci)| {
            let cell = &mesh.cells[ci];
            debug_assert_eq!(cell.tag, CellTag::Strip(i));
            let p = mesh.cell_points(ci);
            let area = cell.area;
            let [vx, vz] = layout.strip_velocity(ci).unwrap();
            let nodes = cell.vertices.map(|v| layout.strip_pressure_of_vertex(mesh, i, v));
            let grads = hat_gradients(p);
            let w = area / 3.0;
            let (mut a2, mut gx, mut gz) = (0.0, 0.0, 0.0);
            let mut fl = [0.0; 3];
            for (k, x) in edge_midpoints(p).into_iter().enumerate() {
                a2 += w * data.eval(Field::A2, x)?;
                let g = data.gravity_at(x)?;
                gx += w * g[0];
                gz += w * g[1];
                let src = data.eval(Field::Source, x)?;
                for (a, f) in fl.iter_mut().enumerate() {
                    *f += w * src * hat_at_midpoint(a, k);
                }
            }
            let mut b = Vec::with_capacity(6);
            for a in 0..3 {
                let [dx, dz] = grads[a];
                b.push((nodes[a], vx, area * (eps * dx + (eps - 1.0) * slope * dz)));
                b.push((nodes[a], vz, area * dz));
            }
            Ok(LocalStrip {
                a: [(vx, eps * eps * a2), (vz, eps * eps * a2)],
                b,
                g: [(vx, -eps * gx), (vz, -eps * gz)],
                f: std::array::from_fn(|a| (nodes[a], eps * fl[a])),
            })
        })
        .collect();
    for l in locals {
        let l = l.map_err(AssemblyError::from)?;
        for (d, v) in l.a {
            out.a.add(d, d, v);
        }
        out.b.extend(l.b);
        for (d, v) in l.g {
            out.rhs_g[d] += v;
        }
        for (d, v) in l.f {
            out.rhs_f[d] += v;
        }
    }
    assemble_facets(mesh, data, &layout, &mut out)?;
    Ok(out.finish(layout, Some(eps)))
}

/// Outcome of the boundary-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct BcReport {
    /// No row of the system is modified for boundary conditions.
    pub natural_bcs_verified: bool,
    /// Strip lateral walls carry no velocity unknowns.
    pub lateral_walls_free: bool,
    pub drained_facets: usize,
    /// Largest `|∫ p_D φ_e·ν|` over drained facet test functions.
    pub max_drained_boundary_term: f64,
}

/// Both the drained condition and the strip lateral no-flux condition are
/// natural in the mixed form; this checks the layout and reports the boundary
/// term generated by the drained pressure, leaving the system untouched.
pub fn apply_bc(system: DiscreteSystem, mesh: &MixedMesh, data: &ProblemData) -> Result<(DiscreteSystem, BcReport), DataError> {
    let mut max_term: f64 = 0.0;
    let mut drained = 0;
    for (fi, f) in mesh.facets.iter().enumerate() {
        if f.tag == FacetTag::Drained {
            drained += 1;
            let [pa, pb] = mesh.facet_points(fi);
            let mut t = 0.0;
            for (x, _, w) in gauss2(pa, pb) {
                t += w * data.eval(Field::DrainedPressure, x)?;
            }
            max_term = max_term.max((t / f.measure).abs());
        }
    }
    let report = BcReport {
        natural_bcs_verified: true,
        lateral_walls_free: system.layout.lateral_facets_free(mesh),
        drained_facets: drained,
        max_drained_boundary_term: max_term,
    };
    Ok((system, report))
}
