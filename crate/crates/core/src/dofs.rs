//! Degree-of-freedom numbering.
//!
//! Velocity vector: rock facet fluxes first, then fissure unknowns.
//! Pressure vector: rock cell values first, then fissure nodal values.
//! Rock and fissure unknowns never share an index, including on interfaces.

use crate::mesh::{CellTag, FacetTag, MixedMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct RockDofs {
    /// Dof → facet.
    pub flux_facets: Vec<usize>,
    /// Facet → dof.
    pub facet_flux: Vec<Option<usize>>,
    /// Dof → cell.
    pub cells: Vec<usize>,
    /// Cell → dof.
    pub cell_dof: Vec<Option<usize>>,
    /// Per mesh cell, `±1` orientation of each local facet relative to its outward normal.
    pub signs: Vec<[f64; 3]>,
}

impl RockDofs {
    pub fn new(mesh: &MixedMesh) -> RockDofs {
        let mut facet_flux = vec![None; mesh.facets.len()];
        let mut flux_facets = Vec::new();
        let mut cell_dof = vec![None; mesh.cells.len()];
        let mut cells = Vec::new();
        let mut signs = vec![[0.0; 3]; mesh.cells.len()];
        for (ci, cell) in mesh.cells.iter().enumerate() {
            if !matches!(cell.tag, CellTag::Block(_)) {
                continue;
            }
            cell_dof[ci] = Some(cells.len());
            cells.push(ci);
            let cen = mesh.centroid(ci);
            for k in 0..3 {
                let f = cell.facets[k];
                if facet_flux[f].is_none() {
                    facet_flux[f] = Some(flux_facets.len());
                    flux_facets.push(f);
                }
                let [a, _] = mesh.facet_points(f);
                let n = mesh.facets[f].normal;
                let out = n[0] * (a[0] - cen[0]) + n[1] * (a[1] - cen[1]);
                signs[ci][k] = if out > 0.0 { 1.0 } else { -1.0 };
            }
        }
        RockDofs { flux_facets, facet_flux, cells, cell_dof, signs }
    }

    pub fn n_flux(&self) -> usize {
        self.flux_facets.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
}

/// Strip unknowns of the ε-problem: a constant vector per strip cell and a
/// continuous piecewise-linear pressure per strip.
#[derive(Debug, Clone, PartialEq)]
pub struct StripDofs {
    /// Strip index → mesh cell.
    pub cells: Vec<usize>,
    /// Mesh cell → strip index.
    pub cell_index: Vec<Option<usize>>,
    /// Per fissure: first pressure index (relative to the fissure block).
    pub node_base: Vec<usize>,
    /// Per fissure: bottom and top node level.
    pub levels: Vec<(usize, usize)>,
    pub n_nodes: usize,
}

/// Collapsed unknowns: tangential velocity per column and pressure per fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldDofs {
    pub n_fissures: usize,
    pub n_columns: usize,
    pub n_fibers: usize,
    pub heights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FissureDofs {
    Strip(StripDofs),
    Manifold(ManifoldDofs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    pub rock: RockDofs,
    pub fissure: FissureDofs,
    pub n_velocity: usize,
    pub n_pressure: usize,
}

impl DofLayout {
    pub fn eps(mesh: &MixedMesh) -> DofLayout {
        let rock = RockDofs::new(mesh);
        let mut cells = Vec::new();
        let mut cell_index = vec![None; mesh.cells.len()];
        for (ci, cell) in mesh.cells.iter().enumerate() {
            if matches!(cell.tag, CellTag::Strip(_)) {
                cell_index[ci] = Some(cells.len());
                cells.push(ci);
            }
        }
        let mut node_base = Vec::new();
        let mut levels = Vec::new();
        let mut n_nodes = 0;
        for s in &mesh.strips {
            node_base.push(n_nodes);
            levels.push((s.bottom_level, s.top_level));
            n_nodes += mesh.fibers.len() * (s.top_level - s.bottom_level + 1);
        }
        let n_velocity = rock.n_flux() + 2 * cells.len();
        let n_pressure = rock.n_cells() + n_nodes;
        DofLayout {
            rock,
            fissure: FissureDofs::Strip(StripDofs { cells, cell_index, node_base, levels, n_nodes }),
            n_velocity,
            n_pressure,
        }
    }

    pub fn limit(mesh: &MixedMesh) -> DofLayout {
        let rock = RockDofs::new(mesh);
        let n_fissures = mesh.strips.len();
        let n_fibers = mesh.fibers.len();
        let n_columns = n_fibers - 1;
        let heights = (1..=n_fissures).map(|i| mesh.medium().fissure(i).height).collect();
        let n_velocity = rock.n_flux() + n_fissures * n_columns;
        let n_pressure = rock.n_cells() + n_fissures * n_fibers;
        DofLayout {
            rock,
            fissure: FissureDofs::Manifold(ManifoldDofs { n_fissures, n_columns, n_fibers, heights }),
            n_velocity,
            n_pressure,
        }
    }

    pub fn n_total(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.fissure, FissureDofs::Manifold(_))
    }

    pub fn flux(&self, facet: usize) -> Option<usize> {
        self.rock.facet_flux[facet]
    }

    pub fn rock_pressure(&self, cell: usize) -> Option<usize> {
        self.rock.cell_dof[cell]
    }

    pub fn strip(&self) -> &StripDofs {
        match &self.fissure {
            FissureDofs::Strip(s) => s,
            FissureDofs::Manifold(_) => panic!("layout has no strip unknowns"),
        }
    }

    pub fn manifold(&self) -> &ManifoldDofs {
        match &self.fissure {
            FissureDofs::Manifold(m) => m,
            FissureDofs::Strip(_) => panic!("layout has no manifold unknowns"),
        }
    }

    /// Velocity indices `(x, z)` of a strip cell.
    pub fn strip_velocity(&self, cell: usize) -> Option<[usize; 2]> {
        let s = self.strip();
        s.cell_index[cell].map(|k| [self.rock.n_flux() + 2 * k, self.rock.n_flux() + 2 * k + 1])
    }

    /// Pressure index of strip node `(fiber, level)` of fissure `i`.
    pub fn strip_pressure(&self, i: usize, fiber: usize, level: usize) -> usize {
        let s = self.strip();
        let (bl, tl) = s.levels[i - 1];
        debug_assert!(level >= bl && level <= tl);
        self.rock.n_cells() + s.node_base[i - 1] + fiber * (tl - bl + 1) + (level - bl)
    }

    pub fn strip_pressure_of_vertex(&self, mesh: &MixedMesh, i: usize, v: usize) -> usize {
        let (k, m) = mesh.fiber_level(v);
        self.strip_pressure(i, k, m)
    }

    pub fn manifold_velocity(&self, i: usize, column: usize) -> usize {
        let m = self.manifold();
        self.rock.n_flux() + (i - 1) * m.n_columns + column
    }

    pub fn manifold_pressure(&self, i: usize, fiber: usize) -> usize {
        let m = self.manifold();
        self.rock.n_cells() + (i - 1) * m.n_fibers + fiber
    }

    /// Pressure index used on an interface vertex of fissure `i`.
    pub fn interface_pressure(&self, mesh: &MixedMesh, i: usize, v: usize) -> usize {
        match &self.fissure {
            FissureDofs::Strip(_) => self.strip_pressure_of_vertex(mesh, i, v),
            FissureDofs::Manifold(_) => self.manifold_pressure(i, mesh.fiber_level(v).0),
        }
    }

    /// Lateral strip facets carry no velocity unknown.
    pub fn lateral_facets_free(&self, mesh: &MixedMesh) -> bool {
        mesh.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f.tag, FacetTag::FissureLateral(_)))
            .all(|(fi, _)| self.rock.facet_flux[fi].is_none())
    }
}
