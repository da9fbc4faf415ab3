//! Structured layered triangulation of the reference domain.
//!
//! Nodes sit on vertical fibers through a partition of the base interval.
//! Along each fiber the node column is split into regions (block 0, strip 1,
//! block 1, ...), each with a fixed number of layers whose nodes interpolate
//! linearly between the region's lower and upper boundary curves.

use crate::geometry::FissuredMedium;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const MIN_ANGLE_DEG: f64 = 15.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("target size {target_h} is too coarse: at most {limit} gives two layers across the thinnest fissure")]
    TargetTooCoarse { target_h: f64, limit: f64 },
    #[error("target size {0} must be positive and finite")]
    InvalidTarget(f64),
    #[error("cell {cell} has minimum angle {min_angle_deg:.3} degrees, below {MIN_ANGLE_DEG}")]
    MeshQuality { cell: usize, min_angle_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellTag {
    Block(usize),
    Strip(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FacetTag {
    Interior,
    /// `Γ_i`: rock below, strip above.
    FissureBottom(usize),
    /// `Γ_i + h_i`: strip below, rock above.
    FissureTop(usize),
    Drained,
    FissureLateral(usize),
}

impl FacetTag {
    pub fn is_interface(self) -> bool {
        matches!(self, FacetTag::FissureBottom(_) | FacetTag::FissureTop(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Counter-clockwise vertex ids.
    pub vertices: [usize; 3],
    pub tag: CellTag,
    /// `facets[k]` is the facet opposite `vertices[k]`.
    pub facets: [usize; 3],
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: [usize; 2],
    pub tag: FacetTag,
    /// For interface facets `[lower, upper]`; for boundary facets the second entry is `None`.
    pub cells: [Option<usize>; 2],
    /// Upward on interfaces, outward on the boundary, fixed otherwise.
    pub normal: [f64; 2],
    pub measure: f64,
}

/// One column (between fibers `c` and `c + 1`) of a fissure strip.
#[derive(Debug, Clone, PartialEq)]
pub struct StripColumn {
    pub bottom_facet: usize,
    pub top_facet: usize,
    pub cells: Vec<usize>,
    /// Slope of the `ζ_i` polyline on this column.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripLayout {
    pub fissure: usize,
    pub bottom_level: usize,
    pub top_level: usize,
    pub columns: Vec<StripColumn>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedMesh {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    pub facets: Vec<Facet>,
    /// Fiber abscissae.
    pub fibers: Vec<f64>,
    /// Layer count per region, bottom to top.
    pub layers: Vec<usize>,
    pub nodes_per_fiber: usize,
    pub strips: Vec<StripLayout>,
    medium: FissuredMedium,
}

fn fiber_partition(medium: &FissuredMedium, h: f64) -> Vec<f64> {
    let mut bps = vec![medium.x_lo(), medium.x_hi()];
    for f in medium.fissures() {
        bps.extend_from_slice(f.curve.breakpoints());
    }
    bps.sort_by(f64::total_cmp);
    let tol = 1e-12 * (1.0 + (medium.x_hi() - medium.x_lo()).abs());
    bps.dedup_by(|b, a| (*b - *a).abs() <= tol);
    let mut fibers = vec![bps[0]];
    for w in bps.windows(2) {
        let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            fibers.push(if k == n { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / n as f64 });
        }
    }
    fibers
}

/// Lower and upper boundary of region `r` at `x`.
fn region_bounds(medium: &FissuredMedium, r: usize, x: f64) -> (f64, f64) {
    if r % 2 == 0 {
        let j = r / 2;
        (medium.block_lower(j, x), medium.block_upper(j, x))
    } else {
        let f = medium.fissure(r.div_ceil(2));
        let z = f.curve.value(x);
        (z, z + f.height)
    }
}

fn region_tag(r: usize) -> CellTag {
    if r % 2 == 0 {
        CellTag::Block(r / 2)
    } else {
        CellTag::Strip(r.div_ceil(2))
    }
}

fn triangle_area(p: [[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

pub fn min_angle_deg(p: [[f64; 2]; 3]) -> f64 {
    let mut m = f64::INFINITY;
    for k in 0..3 {
        let a = p[k];
        let b = p[(k + 1) % 3];
        let c = p[(k + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt());
        m = m.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
    }
    m
}

pub fn build_mesh(medium: &FissuredMedium, target_h: f64) -> Result<MixedMesh, MeshError> {
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(MeshError::InvalidTarget(target_h));
    }
    let min_h = medium.fissures().iter().map(|f| f.height).fold(f64::INFINITY, f64::min);
    if target_h > min_h / 2.0 {
        return Err(MeshError::TargetTooCoarse { target_h, limit: min_h / 2.0 });
    }
    let fibers = fiber_partition(medium, target_h);
    let width = medium.x_hi() - medium.x_lo();
    let n_regions = 2 * medium.n_fissures() + 1;
    let layers = (0..n_regions)
        .map(|r| {
            if r % 2 == 1 {
                let h = medium.fissure(r.div_ceil(2)).height;
                ((h / target_h - 1e-9).ceil() as usize).max(2)
            } else {
                let mean = medium.block_area(r / 2) / width;
                ((mean / target_h - 1e-9).ceil() as usize).max(1)
            }
        })
        .collect();
    generate(medium, fibers, layers)
}

/// Uniform refinement: every fiber interval and every layer is bisected.
pub fn refine(mesh: &MixedMesh) -> MixedMesh {
    let mut fibers = Vec::with_capacity(2 * mesh.fibers.len() - 1);
    for w in mesh.fibers.windows(2) {
        fibers.push(w[0]);
        fibers.push(0.5 * (w[0] + w[1]));
    }
    fibers.push(*mesh.fibers.last().unwrap());
    let layers = mesh.layers.iter().map(|n| 2 * n).collect();
    generate(&mesh.medium, fibers, layers).expect("refinement of a valid mesh stays valid")
}

fn generate(medium: &FissuredMedium, fibers: Vec<f64>, layers: Vec<usize>) -> Result<MixedMesh, MeshError> {
    let nz = 1 + layers.iter().sum::<usize>();
    let mut level_start = vec![0usize];
    for n in &layers {
        level_start.push(level_start.last().unwrap() + n);
    }
    let mut vertices = Vec::with_capacity(fibers.len() * nz);
    for &x in &fibers {
        vertices.push([x, region_bounds(medium, 0, x).0]);
        for (r, &n) in layers.iter().enumerate() {
            let (lo, hi) = region_bounds(medium, r, x);
            for l in 1..=n {
                let z = if l == n { hi } else { lo + (hi - lo) * l as f64 / n as f64 };
                vertices.push([x, z]);
            }
        }
    }
    let vid = |k: usize, m: usize| k * nz + m;

    let mut tris: Vec<([usize; 3], CellTag)> = Vec::new();
    for c in 0..fibers.len() - 1 {
        for (r, &n) in layers.iter().enumerate() {
            let tag = region_tag(r);
            for l in 0..n {
                let m = level_start[r] + l;
                let (a, b, cc, d) = (vid(c, m), vid(c + 1, m), vid(c + 1, m + 1), vid(c, m + 1));
                let split_a = [[a, b, cc], [a, cc, d]];
                let split_b = [[a, b, d], [b, cc, d]];
                let quality = |s: &[[usize; 3]; 2]| {
                    s.iter()
                        .map(|t| min_angle_deg([vertices[t[0]], vertices[t[1]], vertices[t[2]]]))
                        .fold(f64::INFINITY, f64::min)
                };
                let chosen = if quality(&split_b) > quality(&split_a) { split_b } else { split_a };
                for t in chosen {
                    tris.push((t, tag));
                }
            }
        }
    }

    let mut facets: Vec<Facet> = Vec::new();
    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::with_capacity(tris.len());
    for (ci, (v, tag)) in tris.iter().enumerate() {
        let p = [vertices[v[0]], vertices[v[1]], vertices[v[2]]];
        let area = triangle_area(p);
        let mut fs = [0usize; 3];
        for k in 0..3 {
            let (a, b) = (v[(k + 1) % 3], v[(k + 2) % 3]);
            let key = (a.min(b), a.max(b));
            let id = *edge_map.entry(key).or_insert_with(|| {
                facets.push(Facet {
                    vertices: [key.0, key.1],
                    tag: FacetTag::Interior,
                    cells: [None, None],
                    normal: [0.0, 0.0],
                    measure: 0.0,
                });
                facets.len() - 1
            });
            let slot = if facets[id].cells[0].is_none() { 0 } else { 1 };
            facets[id].cells[slot] = Some(ci);
            fs[k] = id;
        }
        cells.push(Cell { vertices: *v, tag: *tag, facets: fs, area });
    }

    for f in facets.iter_mut() {
        let (p0, p1) = (vertices[f.vertices[0]], vertices[f.vertices[1]]);
        let (dx, dz) = (p1[0] - p0[0], p1[1] - p0[1]);
        f.measure = (dx * dx + dz * dz).sqrt();
        match f.cells {
            [Some(c0), Some(c1)] => {
                let (t0, t1) = (cells[c0].tag, cells[c1].tag);
                if t0 != t1 {
                    let below = |a: CellTag, b: CellTag| match (a, b) {
                        (CellTag::Block(j), CellTag::Strip(i)) => j + 1 == i,
                        (CellTag::Strip(i), CellTag::Block(j)) => i == j,
                        _ => unreachable!("blocks and strips alternate"),
                    };
                    let (lower, upper) = if below(t0, t1) { (c0, c1) } else { (c1, c0) };
                    f.cells = [Some(lower), Some(upper)];
                    f.tag = match cells[upper].tag {
                        CellTag::Strip(i) => FacetTag::FissureBottom(i),
                        CellTag::Block(j) => FacetTag::FissureTop(j),
                    };
                    if p0[0] > p1[0] {
                        f.vertices.swap(0, 1);
                    }
                    let (p0, p1) = (vertices[f.vertices[0]], vertices[f.vertices[1]]);
                    f.normal = [-(p1[1] - p0[1]) / f.measure, (p1[0] - p0[0]) / f.measure];
                } else {
                    f.normal = [-dz / f.measure, dx / f.measure];
                }
            }
            [Some(c0), None] => {
                f.tag = match cells[c0].tag {
                    CellTag::Strip(i) => FacetTag::FissureLateral(i),
                    CellTag::Block(_) => FacetTag::Drained,
                };
                let cen = centroid(&cells[c0], &vertices);
                let mut n = [-dz / f.measure, dx / f.measure];
                if n[0] * (p0[0] - cen[0]) + n[1] * (p0[1] - cen[1]) < 0.0 {
                    n = [-n[0], -n[1]];
                }
                f.normal = n;
            }
            _ => unreachable!("every facet has at least one cell"),
        }
    }

    for (ci, cell) in cells.iter().enumerate() {
        let m = min_angle_deg(cell.vertices.map(|v| vertices[v]));
        if m < MIN_ANGLE_DEG - 1e-9 {
            return Err(MeshError::MeshQuality { cell: ci, min_angle_deg: m });
        }
    }

    let mut strips = Vec::new();
    for i in 1..=medium.n_fissures() {
        let r = 2 * i - 1;
        let (bl, tl) = (level_start[r], level_start[r + 1]);
        let columns = (0..fibers.len() - 1)
            .map(|c| {
                let edge = |m: usize| {
                    let (a, b) = (vid(c, m), vid(c + 1, m));
                    edge_map[&(a.min(b), a.max(b))]
                };
                let p0 = vertices[vid(c, bl)];
                let p1 = vertices[vid(c + 1, bl)];
                StripColumn {
                    bottom_facet: edge(bl),
                    top_facet: edge(tl),
                    cells: Vec::new(),
                    slope: (p1[1] - p0[1]) / (p1[0] - p0[0]),
                }
            })
            .collect();
        strips.push(StripLayout { fissure: i, bottom_level: bl, top_level: tl, columns });
    }
    let nf = fibers.len();
    for (ci, cell) in cells.iter().enumerate() {
        if let CellTag::Strip(i) = cell.tag {
            let col = cell.vertices.iter().map(|v| v / nz).min().unwrap();
            debug_assert!(col < nf - 1);
            strips[i - 1].columns[col].cells.push(ci);
        }
    }

    Ok(MixedMesh { vertices, cells, facets, fibers, layers, nodes_per_fiber: nz, strips, medium: medium.clone() })
}

fn centroid(cell: &Cell, vertices: &[[f64; 2]]) -> [f64; 2] {
    let p = cell.vertices.map(|v| vertices[v]);
    [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
}

impl MixedMesh {
    pub fn medium(&self) -> &FissuredMedium {
        &self.medium
    }

    pub fn vertex_id(&self, fiber: usize, level: usize) -> usize {
        fiber * self.nodes_per_fiber + level
    }

    /// Fiber index and level of vertex `v`.
    pub fn fiber_level(&self, v: usize) -> (usize, usize) {
        (v / self.nodes_per_fiber, v % self.nodes_per_fiber)
    }

    pub fn cell_points(&self, c: usize) -> [[f64; 2]; 3] {
        self.cells[c].vertices.map(|v| self.vertices[v])
    }

    pub fn centroid(&self, c: usize) -> [f64; 2] {
        centroid(&self.cells[c], &self.vertices)
    }

    pub fn facet_points(&self, f: usize) -> [[f64; 2]; 2] {
        self.facets[f].vertices.map(|v| self.vertices[v])
    }

    /// Strip cell adjacent to an interface facet.
    pub fn strip_cell_of(&self, f: usize) -> usize {
        let fc = &self.facets[f];
        match fc.tag {
            FacetTag::FissureBottom(_) => fc.cells[1].unwrap(),
            FacetTag::FissureTop(_) => fc.cells[0].unwrap(),
            _ => panic!("facet {f} is not an interface facet"),
        }
    }

    /// Rock cell adjacent to an interface facet.
    pub fn rock_cell_of(&self, f: usize) -> usize {
        let fc = &self.facets[f];
        match fc.tag {
            FacetTag::FissureBottom(_) => fc.cells[0].unwrap(),
            FacetTag::FissureTop(_) => fc.cells[1].unwrap(),
            _ => panic!("facet {f} is not an interface facet"),
        }
    }

    pub fn region_area(&self, tag: CellTag) -> f64 {
        self.cells.iter().filter(|c| c.tag == tag).map(|c| c.area).sum()
    }

    pub fn facet_measure_sum(&self, tag: FacetTag) -> f64 {
        self.facets.iter().filter(|f| f.tag == tag).map(|f| f.measure).sum()
    }

    pub fn facet_count(&self, tag: FacetTag) -> usize {
        self.facets.iter().filter(|f| f.tag == tag).count()
    }

    pub fn min_angle_deg(&self) -> f64 {
        (0..self.cells.len()).map(|c| min_angle_deg(self.cell_points(c))).fold(f64::INFINITY, f64::min)
    }

    /// Plain-text export: `vertices`, `cells` and `facets` sections.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# fissure mesh v1");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
        }
        let _ = writeln!(s, "cells {}", self.cells.len());
        for c in &self.cells {
            let tag = match c.tag {
                CellTag::Block(j) => format!("block:{j}"),
                CellTag::Strip(i) => format!("strip:{i}"),
            };
            let _ = writeln!(s, "{} {} {} {tag}", c.vertices[0], c.vertices[1], c.vertices[2]);
        }
        let _ = writeln!(s, "facets {}", self.facets.len());
        for f in &self.facets {
            let tag = match f.tag {
                FacetTag::Interior => "interior".to_string(),
                FacetTag::FissureBottom(i) => format!("gamma-bottom:{i}"),
                FacetTag::FissureTop(i) => format!("gamma-top:{i}"),
                FacetTag::Drained => "drained".to_string(),
                FacetTag::FissureLateral(i) => format!("lateral:{i}"),
            };
            let _ = writeln!(s, "{} {} {tag}", f.vertices[0], f.vertices[1]);
        }
        s
    }
}
