//! Test-only reference implementations.
#![allow(dead_code)]

use fissure_core::assembly::DiscreteSystem;
use fissure_core::data::{DataSpec, ProblemData};
use fissure_core::geometry::{validate_medium, DomainSpec, FissureSpec, MediumSpec};
use fissure_core::mesh::{build_mesh, CellTag, FacetTag, MixedMesh};
use std::collections::BTreeMap;

pub fn data(a1: &str, a2: &str, alpha: &str, source: &str, gx: &str, gz: &str, fg: &str, pd: &str, qn: &str) -> ProblemData {
    ProblemData::from_spec(&DataSpec {
        a1: a1.into(),
        a2: a2.into(),
        alpha: alpha.into(),
        source: source.into(),
        gravity_x: gx.into(),
        gravity_z: gz.into(),
        interface_source: fg.into(),
        drained_pressure: pd.into(),
        fissure_end_flux: qn.into(),
    })
    .unwrap()
}

/// One fissure over `(0, width)` given by a polyline, height `h`, blocks below and above.
pub fn polyline_mesh(width: f64, xs: &[f64], zs: &[f64], h: f64, bottom: f64, top: f64, target: f64) -> MixedMesh {
    let segments = xs
        .windows(2)
        .zip(zs.windows(2))
        .map(|(x, z)| {
            let s = (z[1] - z[0]) / (x[1] - x[0]);
            vec![z[0] - s * x[0], s]
        })
        .collect();
    let spec = MediumSpec {
        domain: DomainSpec { x_lo: 0.0, x_hi: width, bottom, top, slope_cap: 50.0 },
        fissures: vec![FissureSpec { height: h, breakpoints: xs.to_vec(), segments }],
    };
    build_mesh(&validate_medium(&spec).unwrap(), target).unwrap()
}

fn eval(e: &fissure_core::expr::Expr, p: [f64; 2]) -> f64 {
    e.eval(p[0], p[1]).unwrap()
}

/// Dense reference assembly of the unscaled problem on the physical mesh.
///
/// Unknowns: one flux per rock facet (positive along the facet normal), a
/// constant vector per strip cell, a value per rock cell and a nodal value per
/// strip vertex. Coefficients are sampled with rules exact for the degrees the
/// tests use: constant `a₁, a₂, α, g`, linear `F, f_Γ, p_D, q_N`.
pub struct Oracle {
    pub k: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Oracle index → library index in the stacked `[u; p]` vector.
    pub to_library: Vec<usize>,
}

pub fn eps_one_oracle(mesh: &MixedMesh, d: &ProblemData, lib: &DiscreteSystem) -> Oracle {
    let nv_lib = lib.layout.n_velocity;
    let mut flux = BTreeMap::new();
    let mut rock_cells = BTreeMap::new();
    let mut strip_cells = BTreeMap::new();
    let mut strip_nodes = BTreeMap::new();
    for c in &mesh.cells {
        if let CellTag::Block(_) = c.tag {
            for f in c.facets {
                let n = flux.len();
                flux.entry(f).or_insert(n);
            }
        }
    }
    let nf = flux.len();
    for (ci, c) in mesh.cells.iter().enumerate() {
        if let CellTag::Strip(_) = c.tag {
            let n = strip_cells.len();
            strip_cells.insert(ci, nf + 2 * n);
        }
    }
    let nv = nf + 2 * strip_cells.len();
    for (ci, c) in mesh.cells.iter().enumerate() {
        if let CellTag::Block(_) = c.tag {
            let n = rock_cells.len();
            rock_cells.insert(ci, nv + n);
        }
    }
    let np_rock = rock_cells.len();
    for c in &mesh.cells {
        if let CellTag::Strip(i) = c.tag {
            for v in c.vertices {
                let n = strip_nodes.len();
                strip_nodes.entry((i, v)).or_insert(nv + np_rock + n);
            }
        }
    }
    let n = nv + np_rock + strip_nodes.len();
    let mut k = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    let mut to_library = vec![usize::MAX; n];
    for (&f, &o) in &flux {
        to_library[o] = lib.layout.flux(f).unwrap();
    }
    for (&c, &o) in &strip_cells {
        let [a, b] = lib.layout.strip_velocity(c).unwrap();
        to_library[o] = a;
        to_library[o + 1] = b;
    }
    for (&c, &o) in &rock_cells {
        to_library[o] = nv_lib + lib.layout.rock_pressure(c).unwrap();
    }
    for (&(i, v), &o) in &strip_nodes {
        to_library[o] = nv_lib + lib.layout.strip_pressure_of_vertex(mesh, i, v);
    }

    // Saddle coupling added symmetrically: K[v][p] = K[p][v] = b(q, v).
    let couple = |k: &mut Vec<Vec<f64>>, q: usize, v: usize, val: f64| {
        k[q][v] += val;
        k[v][q] += val;
    };
    let x = |v: usize| mesh.vertices[v];
    // Interior three-point rule, exact for quadratics.
    let rule = |p: [[f64; 2]; 3]| -> [([f64; 2], [f64; 3]); 3] {
        std::array::from_fn(|m| {
            let mut l = [1.0 / 6.0; 3];
            l[m] = 2.0 / 3.0;
            ([l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0], l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1]], l)
        })
    };

    for (ci, c) in mesh.cells.iter().enumerate() {
        let p = c.vertices.map(x);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        assert!(area > 0.0);
        match c.tag {
            CellTag::Block(_) => {
                let qi = rock_cells[&ci];
                // Basis of facet k: sigma/(2|K|) (x - p_k), sigma = +1 when the facet normal points out of K.
                let sig: [f64; 3] = std::array::from_fn(|kk| {
                    let f = &mesh.facets[c.facets[kk]];
                    let a = x(f.vertices[0]);
                    let d = [a[0] - p[kk][0], a[1] - p[kk][1]];
                    if f.normal[0] * d[0] + f.normal[1] * d[1] > 0.0 { 1.0 } else { -1.0 }
                });
                let dof = c.facets.map(|f| flux[&f]);
                for (pt, _) in rule(p) {
                    let w = area / 3.0;
                    let a1 = eval(&d.a1, pt);
                    let g = [eval(&d.gravity[0], pt), eval(&d.gravity[1], pt)];
                    let phi: [[f64; 2]; 3] =
                        std::array::from_fn(|m| [sig[m] * (pt[0] - p[m][0]) / (2.0 * area), sig[m] * (pt[1] - p[m][1]) / (2.0 * area)]);
                    for a in 0..3 {
                        for b in 0..3 {
                            k[dof[a]][dof[b]] += w * a1 * (phi[a][0] * phi[b][0] + phi[a][1] * phi[b][1]);
                        }
                        rhs[dof[a]] -= w * (g[0] * phi[a][0] + g[1] * phi[a][1]);
                    }
                    rhs[qi] -= w * eval(&d.source, pt);
                }
                for a in 0..3 {
                    couple(&mut k, qi, dof[a], -sig[a]);
                }
            }
            CellTag::Strip(i) => {
                let u = strip_cells[&ci];
                let nodes = c.vertices.map(|v| strip_nodes[&(i, v)]);
                let a2 = eval(&d.a2, p[0]);
                k[u][u] += a2 * area;
                k[u + 1][u + 1] += a2 * area;
                let g = [eval(&d.gravity[0], p[0]), eval(&d.gravity[1], p[0])];
                rhs[u] -= area * g[0];
                rhs[u + 1] -= area * g[1];
                for a in 0..3 {
                    let (b, cc) = (p[(a + 1) % 3], p[(a + 2) % 3]);
                    let grad = [(b[1] - cc[1]) / (2.0 * area), (cc[0] - b[0]) / (2.0 * area)];
                    couple(&mut k, nodes[a], u, area * grad[0]);
                    couple(&mut k, nodes[a], u + 1, area * grad[1]);
                }
                for (pt, l) in rule(p) {
                    let f = eval(&d.source, pt);
                    for a in 0..3 {
                        rhs[nodes[a]] -= area / 3.0 * f * l[a];
                    }
                }
            }
        }
    }

    // Simpson on facets: exact for the products of linears with hats.
    let simpson = |a: [f64; 2], b: [f64; 2]| -> [([f64; 2], f64, f64); 3] {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        [0.0, 0.5, 1.0].map(|t| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], t, len * if t == 0.5 { 4.0 / 6.0 } else { 1.0 / 6.0 }))
    };
    for (fi, f) in mesh.facets.iter().enumerate() {
        let (a, b) = (x(f.vertices[0]), x(f.vertices[1]));
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        match f.tag {
            FacetTag::FissureBottom(i) | FacetTag::FissureTop(i) => {
                let e = flux[&fi];
                let sgn = if matches!(f.tag, FacetTag::FissureBottom(_)) { 1.0 } else { -1.0 };
                let nodes = f.vertices.map(|v| strip_nodes[&(i, v)]);
                k[e][e] += eval(&d.alpha, a) / len;
                for (pt, t, w) in simpson(a, b) {
                    let fg = eval(&d.interface_source, pt);
                    for (node, hat) in nodes.iter().zip([1.0 - t, t]) {
                        // v·n̂ = V/|e| on the facet.
                        couple(&mut k, *node, e, sgn * w * hat / len);
                        rhs[*node] -= w * fg * hat;
                    }
                }
            }
            FacetTag::Drained => {
                let e = flux[&fi];
                for (pt, _, w) in simpson(a, b) {
                    rhs[e] -= w * eval(&d.drained_pressure, pt) / len;
                }
            }
            FacetTag::FissureLateral(i) => {
                let nodes = f.vertices.map(|v| strip_nodes[&(i, v)]);
                for (pt, t, w) in simpson(a, b) {
                    let qn = eval(&d.fissure_end_flux, pt);
                    for (node, hat) in nodes.iter().zip([1.0 - t, t]) {
                        rhs[*node] += w * qn * hat;
                    }
                }
            }
            FacetTag::Interior => {}
        }
    }
    Oracle { k, rhs, to_library }
}

/// Largest entrywise difference between the oracle and the library system.
pub fn max_oracle_difference(o: &Oracle, lib: &DiscreteSystem) -> (f64, f64) {
    let n = o.k.len();
    assert_eq!(n, lib.n_total(), "unknown counts differ");
    let mut seen = vec![false; n];
    for &l in &o.to_library {
        assert!(l < n && !seen[l], "index map is not a bijection");
        seen[l] = true;
    }
    let mut dense = vec![vec![0.0; n]; n];
    for (r, c, v) in lib.full_entries() {
        dense[r][c] += v;
    }
    let rhs = lib.full_rhs();
    let mut dk: f64 = 0.0;
    let mut dr: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            dk = dk.max((o.k[a][b] - dense[o.to_library[a]][o.to_library[b]]).abs());
        }
        dr = dr.max((o.rhs[a] - rhs[o.to_library[a]]).abs());
    }
    (dk, dr)
}

use fissure_core::geometry::{collapse_t, epsilon_scale, FissuredMedium, LocalFrame, Region};
use rand::Rng;

/// A random valid medium: 1 to 3 fissures, polyline or cubic, on a random base interval.
pub fn random_medium<R: Rng>(rng: &mut R) -> FissuredMedium {
    let x_lo = rng.random_range(-2.0..2.0);
    let width = rng.random_range(0.5..3.0);
    let x_hi = x_lo + width;
    let bottom = rng.random_range(-1.0..1.0);
    let n = rng.random_range(1..=3);
    let mut fissures = Vec::new();
    let mut level = bottom + 0.6;
    for _ in 0..n {
        let h = rng.random_range(0.05..0.5);
        let (breakpoints, segments) = if rng.random_bool(0.5) {
            let k = rng.random_range(1..=4);
            let xs: Vec<f64> = (0..=k).map(|m| x_lo + width * m as f64 / k as f64).collect();
            let zs: Vec<f64> = xs.iter().map(|_| level + rng.random_range(0.0..0.3)).collect();
            let segs = xs
                .windows(2)
                .zip(zs.windows(2))
                .map(|(x, z)| {
                    let s = (z[1] - z[0]) / (x[1] - x[0]);
                    vec![z[0] - s * x[0], s]
                })
                .collect();
            (xs, segs)
        } else {
            // level + 0.15 + 0.15 sin-like cubic bump in t = (x - x_lo)/width.
            let (c1, c2) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            // p(t) = c1 t + c2 t² − (c1 + c2) t³ stays within ±0.15 for these ranges.
            let t0 = -x_lo / width;
            let s = 1.0 / width;
            let c3 = -(c1 + c2);
            // Expand in powers of x with t = t0 + s x.
            let base = level + 0.15;
            let a0 = base + c1 * t0 + c2 * t0 * t0 + c3 * t0.powi(3);
            let a1 = c1 * s + 2.0 * c2 * t0 * s + 3.0 * c3 * t0 * t0 * s;
            let a2 = c2 * s * s + 3.0 * c3 * t0 * s * s;
            let a3 = c3 * s.powi(3);
            (vec![x_lo, x_hi], vec![vec![a0, a1, a2, a3]])
        };
        fissures.push(FissureSpec { height: h, breakpoints, segments });
        level += 0.3 + h + rng.random_range(0.3..0.8);
    }
    let spec = MediumSpec {
        domain: DomainSpec { x_lo, x_hi, bottom, top: level + 0.2, slope_cap: 50.0 },
        fissures,
    };
    validate_medium(&spec).expect("generated medium is valid")
}

/// A point strictly inside region `r` at a random abscissa.
pub fn random_point_in<R: Rng>(rng: &mut R, m: &FissuredMedium, r: Region) -> [f64; 2] {
    let x = rng.random_range(m.x_lo()..m.x_hi());
    let (lo, hi) = match r {
        Region::Block(j) => (m.block_lower(j, x), m.block_upper(j, x)),
        Region::Fissure(i) => {
            let z = m.fissure(i).curve.value(x);
            (z, z + m.fissure(i).height)
        }
    };
    let t = rng.random_range(0.01..0.99);
    [x, lo + t * (hi - lo)]
}

pub fn random_region<R: Rng>(rng: &mut R, m: &FissuredMedium) -> Region {
    if rng.random_bool(0.5) {
        Region::Block(rng.random_range(0..m.n_blocks()))
    } else {
        Region::Fissure(rng.random_range(1..=m.n_fissures()))
    }
}

/// Largest deviations over `n` randomized checks of each geometry kernel property:
/// `[frame isometry, φ round trip, Jacobian determinant, collapse rigidity]`.
pub fn geometry_kernel_checks<R: Rng>(rng: &mut R, n: usize) -> [f64; 4] {
    let mut worst = [0.0f64; 4];
    let mut m = random_medium(rng);
    for k in 0..n {
        if k % 50 == 0 {
            m = random_medium(rng);
        }
        // Frame isometry for a random slope within the cap.
        let s = rng.random_range(-50.0..50.0);
        let f = LocalFrame::from_slope(s);
        let v = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let l = f.to_local(v);
        let n2 = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let mm = f.matrix();
        let det = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
        let ortho = f.tangent[0] * f.normal[0] + f.tangent[1] * f.normal[1];
        worst[0] = worst[0].max(((l[0] * l[0] + l[1] * l[1]).sqrt() - n2).abs() / n2.max(1.0)).max((det - 1.0).abs()).max(ortho.abs());

        // φ round trip both ways.
        let eps = rng.random_range(0.05..=1.0);
        let sc = epsilon_scale(&m, eps).unwrap();
        let r = random_region(rng, &m);
        let p = random_point_in(rng, &m, r);
        let y = sc.inverse_phi(p).unwrap();
        let back = sc.map_phi(y).unwrap();
        worst[1] = worst[1].max((back[0] - p[0]).abs()).max((back[1] - p[1]).abs());
        let y2 = random_point_in(rng, sc.scaled(), r);
        let back2 = sc.inverse_phi(sc.map_phi(y2).unwrap()).unwrap();
        worst[1] = worst[1].max((back2[0] - y2[0]).abs()).max((back2[1] - y2[1]).abs());

        // Jacobian determinant: 1/ε in strips, 1 in blocks.
        let j = sc.gradient_jacobian(p).unwrap();
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let expected = match r {
            Region::Fissure(_) => 1.0 / eps,
            Region::Block(_) => 1.0,
        };
        worst[2] = worst[2].max((det - expected).abs() / expected);

        // collapse_T: rigid on blocks, fibers collapse to one point.
        let q = random_point_in(rng, &m, r);
        let (ra, ia) = collapse_t(&m, p).unwrap();
        let (rb, ib) = collapse_t(&m, q).unwrap();
        assert_eq!((ra, rb), (r, r));
        match r {
            Region::Block(_) => {
                let d0 = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                let d1 = ((ia[0] - ib[0]).powi(2) + (ia[1] - ib[1]).powi(2)).sqrt();
                worst[3] = worst[3].max((d0 - d1).abs());
            }
            Region::Fissure(i) => {
                let lambda = m.fissure(i).curve.value(p[0]) - m.cumulative_height(i - 1);
                worst[3] = worst[3].max((ia[1] - lambda).abs()).max((ia[0] - p[0]).abs());
                // The top wall belongs to the block above and lands on the same point.
                let top = [p[0], m.fissure(i).curve.value(p[0]) + m.fissure(i).height];
                let (_, it) = collapse_t(&m, top).unwrap();
                worst[3] = worst[3].max((it[1] - ia[1]).abs());
            }
        }
    }
    worst
}

/// Reference expression tree, printer and evaluator kept independent of the library parser.
#[derive(Debug, Clone)]
pub enum RefExpr {
    Num(f64),
    X,
    Z,
    Neg(Box<RefExpr>),
    Bin(char, Box<RefExpr>, Box<RefExpr>),
    Call(&'static str, Box<RefExpr>),
}

pub fn random_ref_expr<R: Rng>(rng: &mut R, depth: u32) -> RefExpr {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..4) {
            0 => RefExpr::X,
            1 => RefExpr::Z,
            2 => RefExpr::Num(rng.random_range(0..20) as f64 / 4.0),
            _ => RefExpr::Num(rng.random_range(0.0..10.0)),
        };
    }
    let sub = |rng: &mut R| Box::new(random_ref_expr(rng, depth - 1));
    match rng.random_range(0..10) {
        0 => RefExpr::Neg(sub(rng)),
        1..=6 => {
            let op = ['+', '-', '*', '/', '^', '+', '*'][rng.random_range(0..7)];
            if op == '^' {
                // Keep powers tame: small base, integer or simple exponent.
                let base = sub(rng);
                let e = RefExpr::Num([0.5, 1.0, 2.0, 3.0][rng.random_range(0..4)]);
                RefExpr::Bin('^', base, Box::new(e))
            } else {
                RefExpr::Bin(op, sub(rng), sub(rng))
            }
        }
        _ => RefExpr::Call(["sin", "cos", "exp", "sqrt", "abs"][rng.random_range(0..5)], sub(rng)),
    }
}

fn prec(e: &RefExpr) -> u8 {
    match e {
        RefExpr::Bin('+' | '-', ..) => 1,
        RefExpr::Bin('*' | '/', ..) => 2,
        RefExpr::Neg(_) => 3,
        RefExpr::Bin('^', ..) => 4,
        _ => 5,
    }
}

/// Prints with the fewest parentheses standard precedence allows, random spacing
/// and random number spellings.
pub fn print_ref<R: Rng>(e: &RefExpr, rng: &mut R) -> String {
    let ws = |rng: &mut R| [" ", "", "  ", "\t"][rng.random_range(0..4)].to_string();
    let wrap = |s: String, yes: bool| if yes { format!("({s})") } else { s };
    match e {
        RefExpr::Num(v) => match rng.random_range(0..3) {
            0 => format!("{v:?}"),
            1 => format!("{v:e}"),
            _ => format!("{v}"),
        },
        RefExpr::X => "x".into(),
        RefExpr::Z => "z".into(),
        RefExpr::Neg(a) => format!("-{}{}", ws(rng), wrap(print_ref(a, rng), prec(a) < 3)),
        RefExpr::Bin(op, a, b) => {
            let (pl, pr) = match op {
                '+' | '-' => (prec(a) < 1, prec(b) <= 1),
                '*' | '/' => (prec(a) < 2, prec(b) <= 2),
                _ => (prec(a) < 5, prec(b) < 3),
            };
            let l = wrap(print_ref(a, rng), pl);
            let r = wrap(print_ref(b, rng), pr);
            format!("{l}{}{op}{}{r}", ws(rng), ws(rng))
        }
        RefExpr::Call(f, a) => format!("{f}({}{})", ws(rng), print_ref(a, rng)),
    }
}

/// `None` where the value is undefined: zero divisor or a non-finite intermediate.
pub fn eval_ref(e: &RefExpr, x: f64, z: f64) -> Option<f64> {
    let v = match e {
        RefExpr::Num(v) => *v,
        RefExpr::X => x,
        RefExpr::Z => z,
        RefExpr::Neg(a) => -eval_ref(a, x, z)?,
        RefExpr::Bin(op, a, b) => {
            let (a, b) = (eval_ref(a, x, z)?, eval_ref(b, x, z)?);
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' if b == 0.0 => return None,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        RefExpr::Call(f, a) => {
            let a = eval_ref(a, x, z)?;
            match *f {
                "sin" => a.sin(),
                "cos" => a.cos(),
                "exp" => a.exp(),
                "sqrt" => a.sqrt(),
                _ => a.abs(),
            }
        }
    };
    v.is_finite().then_some(v)
}

/// Inputs that must fail to parse, each with an error located inside the text.
pub const MALFORMED: &[&str] = &[
    "", " ", "1 +", "(1", "1)", "2**3", "x y", "sin", "sin(", "sin x", "foo(1)", "y", "1..2", "3 $ 4", "--", "^2",
    "1e", "1e+", ".", "()", "x +* z", "sqrt()", "cos(x))", "exp(x,z)", "2 ^", "abs(", "x_1", "1 2", "(x+z", "π",
];

/// Well-formed inputs whose evaluation is undefined somewhere.
pub const UNDEFINED: &[(&str, f64, f64)] = &[
    ("1/(x-x)", 0.3, 0.1),
    ("0/0", 0.0, 0.0),
    ("sqrt(-1)", 0.0, 0.0),
    ("sqrt(z)", 0.0, -2.0),
    ("exp(1000)", 0.0, 0.0),
    ("(-8)^(1/3)", 0.0, 0.0),
    ("x/z", 1.0, 0.0),
    ("10^400", 0.0, 0.0),
];
