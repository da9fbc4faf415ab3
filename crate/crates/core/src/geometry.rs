//! Translation-generated fissure geometry in the plane.
//!
//! A medium is a stack over the base interval `G = (x_lo, x_hi)`: rock block 0
//! sits on the flat level `bottom`, fissure `i` (1-based) occupies
//! `ζ_i(x) ≤ z < ζ_i(x) + h_i`, block `j` lies between fissure `j` and fissure
//! `j + 1`, and the last block is closed by the flat level `top`.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_SLOPE_CAP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("fissures {lower} and {upper} overlap: sup(ζ+h) = {top_of_lower} >= inf ζ = {bottom_of_upper}")]
    Overlap { lower: usize, upper: usize, top_of_lower: f64, bottom_of_upper: f64 },
    #[error("fissure {fissure} has slope {max_slope} beyond the cap {cap}")]
    VerticalTangent { fissure: usize, max_slope: f64, cap: f64 },
    #[error("rock block {block} is empty or disconnected: {reason}")]
    DisconnectedBlock { block: usize, reason: String },
    #[error("point ({x}, {z}) lies outside the domain")]
    PointOutsideDomain { x: f64, z: f64 },
    #[error("fissure {fissure}: invalid curve: {message}")]
    InvalidCurve { fissure: usize, message: String },
    #[error("fissure {fissure}: height {height} must be positive and finite")]
    InvalidHeight { fissure: usize, height: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("epsilon {0} is outside (0, 1]")]
    InvalidEpsilon(f64),
    #[error("{0}")]
    Config(String),
}

/// Continuous piecewise polynomial of degree at most 3.
///
/// Segment `k` covers `[b_k, b_{k+1}]` and stores `c0 + c1 x + c2 x² + c3 x³`
/// in the global variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    breakpoints: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

fn poly(c: &[f64; 4], x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

fn dpoly(c: &[f64; 4], x: f64) -> f64 {
    (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1]
}

/// Real roots of `a t² + b t + c` inside the open interval `(lo, hi)`.
fn quadratic_roots_in(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if a == 0.0 {
        if b != 0.0 {
            out.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            out.push((-b - s) / (2.0 * a));
            out.push((-b + s) / (2.0 * a));
        }
    }
    out.retain(|t| *t > lo && *t < hi);
    out
}

impl Curve {
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Vec<f64>>) -> Result<Curve, String> {
        if breakpoints.len() < 2 {
            return Err("at least two breakpoints are required".into());
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err("breakpoints must be finite".into());
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err("breakpoints must be strictly increasing".into());
        }
        if segments.len() != breakpoints.len() - 1 {
            return Err(format!(
                "{} breakpoints need {} segments, found {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                segments.len()
            ));
        }
        let mut coeffs = Vec::with_capacity(segments.len());
        for (k, s) in segments.iter().enumerate() {
            if s.is_empty() || s.len() > 4 {
                return Err(format!("segment {k}: expected 1 to 4 coefficients (degree at most 3), found {}", s.len()));
            }
            if s.iter().any(|c| !c.is_finite()) {
                return Err(format!("segment {k}: coefficients must be finite"));
            }
            let mut c = [0.0; 4];
            c[..s.len()].copy_from_slice(s);
            coeffs.push(c);
        }
        for k in 1..coeffs.len() {
            let b = breakpoints[k];
            let l = poly(&coeffs[k - 1], b);
            let r = poly(&coeffs[k], b);
            let mag = |c: &[f64; 4]| c.iter().enumerate().map(|(j, a)| (a * b.powi(j as i32)).abs()).sum::<f64>();
            if (l - r).abs() > 1e-12 * mag(&coeffs[k - 1]).max(mag(&coeffs[k])).max(1.0) {
                return Err(format!("discontinuous at breakpoint {b}: {l} vs {r}"));
            }
        }
        Ok(Curve { breakpoints, coeffs })
    }

    pub fn constant(x_lo: f64, x_hi: f64, c: f64) -> Curve {
        Curve { breakpoints: vec![x_lo, x_hi], coeffs: vec![[c, 0.0, 0.0, 0.0]] }
    }

    /// Continuous polyline through `(xs[k], zs[k])`.
    pub fn polyline(xs: &[f64], zs: &[f64]) -> Result<Curve, String> {
        if xs.len() != zs.len() {
            return Err("polyline needs as many ordinates as abscissae".into());
        }
        let segs = xs
            .windows(2)
            .zip(zs.windows(2))
            .map(|(x, z)| {
                let s = (z[1] - z[0]) / (x[1] - x[0]);
                vec![z[0] - s * x[0], s]
            })
            .collect();
        Curve::new(xs.to_vec(), segs)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[[f64; 4]] {
        &self.coeffs
    }

    pub fn x_lo(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn x_hi(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Segment used at `x`; a breakpoint belongs to the segment on its left.
    pub fn segment(&self, x: f64) -> usize {
        let n = self.breakpoints.partition_point(|b| *b < x);
        n.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    pub fn value(&self, x: f64) -> f64 {
        poly(&self.coeffs[self.segment(x)], x)
    }

    /// ζ′(x), taken from the left at interior breakpoints.
    pub fn slope(&self, x: f64) -> f64 {
        dpoly(&self.coeffs[self.segment(x)], x)
    }

    pub fn max_abs_slope(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let (a, b) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let mut pts = vec![a, b];
            if c[3] != 0.0 {
                let t = -c[2] / (3.0 * c[3]);
                if t > a && t < b {
                    pts.push(t);
                }
            }
            for t in pts {
                m = m.max(dpoly(c, t).abs());
            }
        }
        m
    }

    fn extremes(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, c) in self.coeffs.iter().enumerate() {
            let (a, b) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let mut pts = quadratic_roots_in(3.0 * c[3], 2.0 * c[2], c[1], a, b);
            pts.push(a);
            pts.push(b);
            for t in pts {
                let v = poly(c, t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    pub fn min_value(&self) -> f64 {
        self.extremes().0
    }

    pub fn max_value(&self) -> f64 {
        self.extremes().1
    }

    /// `∫ ζ dx` over the whole curve domain.
    pub fn integral(&self) -> f64 {
        let prim = |c: &[f64; 4], x: f64| ((c[3] / 4.0 * x + c[2] / 3.0) * x + c[1] / 2.0) * x * x + c[0] * x;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| prim(c, self.breakpoints[k + 1]) - prim(c, self.breakpoints[k]))
            .sum()
    }

    /// The same curve translated vertically by `dz`.
    pub fn shifted(&self, dz: f64) -> Curve {
        let mut c = self.clone();
        for s in &mut c.coeffs {
            s[0] += dz;
        }
        c
    }

    pub fn is_piecewise_linear(&self) -> bool {
        self.coeffs.iter().all(|c| c[2] == 0.0 && c[3] == 0.0)
    }
}

/// Orthonormal frame attached to a curve point: tangent `ê₁` and upward normal `n̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
}

impl LocalFrame {
    pub fn from_slope(s: f64) -> LocalFrame {
        let w = 1.0 / (1.0 + s * s).sqrt();
        LocalFrame { tangent: [w, s * w], normal: [-s * w, w] }
    }

    /// `M` with columns `ê₁` and `n̂`, row-major.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.tangent[0], self.normal[0]], [self.tangent[1], self.normal[1]]]
    }

    pub fn m_t_tau(&self) -> f64 {
        self.tangent[0]
    }
    pub fn m_t_n(&self) -> f64 {
        self.normal[0]
    }
    pub fn m_k_tau(&self) -> f64 {
        self.tangent[1]
    }
    pub fn m_k_n(&self) -> f64 {
        self.normal[1]
    }

    /// Components of `v` in the frame, i.e. `Mᵀ v`.
    pub fn to_local(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.tangent[0] * v[0] + self.tangent[1] * v[1],
            self.normal[0] * v[0] + self.normal[1] * v[1],
        ]
    }
}

pub fn normal_vector(curve: &Curve, x: f64) -> [f64; 2] {
    LocalFrame::from_slope(curve.slope(x)).normal
}

pub fn local_frame(curve: &Curve, x: f64) -> LocalFrame {
    LocalFrame::from_slope(curve.slope(x))
}

/// Raw, unvalidated geometry description as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    pub domain: DomainSpec,
    #[serde(default, rename = "fissure")]
    pub fissures: Vec<FissureSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub bottom: f64,
    pub top: f64,
    #[serde(default = "default_slope_cap")]
    pub slope_cap: f64,
}

fn default_slope_cap() -> f64 {
    DEFAULT_SLOPE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FissureSpec {
    pub height: f64,
    pub breakpoints: Vec<f64>,
    pub segments: Vec<Vec<f64>>,
}

impl MediumSpec {
    pub fn from_toml(text: &str) -> Result<MediumSpec, GeometryError> {
        toml::from_str(text).map_err(|e| GeometryError::Config(format_toml_error(text, &e)))
    }

    pub fn from_file(path: &Path) -> Result<MediumSpec, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::Config(format!("{}: {e}", path.display())))?;
        MediumSpec::from_toml(&text).map_err(|e| match e {
            GeometryError::Config(m) => GeometryError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("geometry spec serializes")
    }
}

/// Renders a TOML error as `line L, column C: message`.
pub(crate) fn format_toml_error(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
            format!("line {line}, column {col}: {}", e.message())
        }
        None => e.message().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fissure {
    pub curve: Curve,
    pub height: f64,
}

/// Region of the domain: rock block `j` (0-based) or fissure strip `i` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Block(usize),
    Fissure(usize),
}

/// Validated medium.
#[derive(Debug, Clone, PartialEq)]
pub struct FissuredMedium {
    x_lo: f64,
    x_hi: f64,
    bottom: f64,
    top: f64,
    slope_cap: f64,
    fissures: Vec<Fissure>,
}

pub fn validate_medium(spec: &MediumSpec) -> Result<FissuredMedium, GeometryError> {
    let d = &spec.domain;
    if !(d.x_lo.is_finite() && d.x_hi.is_finite() && d.x_lo < d.x_hi) {
        return Err(GeometryError::InvalidDomain(format!("base interval ({}, {}) is empty", d.x_lo, d.x_hi)));
    }
    if !(d.bottom.is_finite() && d.top.is_finite()) {
        return Err(GeometryError::InvalidDomain("bottom and top must be finite".into()));
    }
    if !(d.slope_cap > 0.0) {
        return Err(GeometryError::InvalidDomain(format!("slope cap {} must be positive", d.slope_cap)));
    }
    let mut fissures = Vec::with_capacity(spec.fissures.len());
    for (k, f) in spec.fissures.iter().enumerate() {
        let i = k + 1;
        let curve = Curve::new(f.breakpoints.clone(), f.segments.clone())
            .map_err(|message| GeometryError::InvalidCurve { fissure: i, message })?;
        fissures.push(Fissure { curve, height: f.height });
    }
    FissuredMedium::new(d.x_lo, d.x_hi, d.bottom, d.top, d.slope_cap, fissures)
}

impl FissuredMedium {
    pub fn new(
        x_lo: f64,
        x_hi: f64,
        bottom: f64,
        top: f64,
        slope_cap: f64,
        fissures: Vec<Fissure>,
    ) -> Result<FissuredMedium, GeometryError> {
        let scale = 1.0 + (x_hi - x_lo).abs();
        for (k, f) in fissures.iter().enumerate() {
            let i = k + 1;
            if !(f.height > 0.0 && f.height.is_finite()) {
                return Err(GeometryError::InvalidHeight { fissure: i, height: f.height });
            }
            if (f.curve.x_lo() - x_lo).abs() > 1e-12 * scale || (f.curve.x_hi() - x_hi).abs() > 1e-12 * scale {
                return Err(GeometryError::InvalidCurve {
                    fissure: i,
                    message: format!(
                        "curve domain ({}, {}) differs from the base interval ({x_lo}, {x_hi})",
                        f.curve.x_lo(),
                        f.curve.x_hi()
                    ),
                });
            }
            let s = f.curve.max_abs_slope();
            if !(s <= slope_cap) {
                return Err(GeometryError::VerticalTangent { fissure: i, max_slope: s, cap: slope_cap });
            }
        }
        for k in 1..fissures.len() {
            let top_of_lower = fissures[k - 1].curve.max_value() + fissures[k - 1].height;
            let bottom_of_upper = fissures[k].curve.min_value();
            if top_of_lower >= bottom_of_upper {
                return Err(GeometryError::Overlap { lower: k, upper: k + 1, top_of_lower, bottom_of_upper });
            }
        }
        match (fissures.first(), fissures.last()) {
            (Some(first), Some(last)) => {
                let lo = first.curve.min_value();
                if !(bottom < lo) {
                    return Err(GeometryError::DisconnectedBlock {
                        block: 0,
                        reason: format!("bottom level {bottom} is not below inf ζ_1 = {lo}"),
                    });
                }
                let hi = last.curve.max_value() + last.height;
                if !(hi < top) {
                    return Err(GeometryError::DisconnectedBlock {
                        block: fissures.len(),
                        reason: format!("top level {top} is not above sup(ζ+h) = {hi}"),
                    });
                }
            }
            _ => {
                if !(bottom < top) {
                    return Err(GeometryError::DisconnectedBlock {
                        block: 0,
                        reason: format!("bottom level {bottom} is not below top level {top}"),
                    });
                }
            }
        }
        Ok(FissuredMedium { x_lo, x_hi, bottom, top, slope_cap, fissures })
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }
    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }
    pub fn bottom(&self) -> f64 {
        self.bottom
    }
    pub fn top(&self) -> f64 {
        self.top
    }
    pub fn slope_cap(&self) -> f64 {
        self.slope_cap
    }
    /// Number of fissures `I`.
    pub fn n_fissures(&self) -> usize {
        self.fissures.len()
    }
    pub fn n_blocks(&self) -> usize {
        self.fissures.len() + 1
    }
    /// Fissure `i`, 1-based.
    pub fn fissure(&self, i: usize) -> &Fissure {
        &self.fissures[i - 1]
    }
    pub fn fissures(&self) -> &[Fissure] {
        &self.fissures
    }

    /// `Σ_{ℓ ≤ j} h_ℓ` with `h_0 = 0`.
    pub fn cumulative_height(&self, j: usize) -> f64 {
        self.fissures[..j].iter().map(|f| f.height).sum()
    }

    /// Lower boundary of block `j` at abscissa `x`.
    pub fn block_lower(&self, j: usize, x: f64) -> f64 {
        if j == 0 {
            self.bottom
        } else {
            let f = self.fissure(j);
            f.curve.value(x) + f.height
        }
    }

    /// Upper boundary of block `j` at abscissa `x`.
    pub fn block_upper(&self, j: usize, x: f64) -> f64 {
        if j == self.fissures.len() {
            self.top
        } else {
            self.fissure(j + 1).curve.value(x)
        }
    }

    /// Exact area of block `j`.
    pub fn block_area(&self, j: usize) -> f64 {
        let w = self.x_hi - self.x_lo;
        let upper = if j == self.fissures.len() { self.top * w } else { self.fissure(j + 1).curve.integral() };
        let lower = if j == 0 {
            self.bottom * w
        } else {
            let f = self.fissure(j);
            f.curve.integral() + f.height * w
        };
        upper - lower
    }

    pub fn strip_area(&self, i: usize) -> f64 {
        self.fissure(i).height * (self.x_hi - self.x_lo)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.locate(p).is_ok()
    }

    /// Region containing `p`; `Γ_i` belongs to the strip, `Γ_i + h_i` to the block above.
    pub fn locate(&self, p: [f64; 2]) -> Result<Region, GeometryError> {
        let [x, z] = p;
        if !(x >= self.x_lo && x <= self.x_hi && z >= self.bottom && z <= self.top) {
            return Err(GeometryError::PointOutsideDomain { x, z });
        }
        for (k, f) in self.fissures.iter().enumerate() {
            let zeta = f.curve.value(x);
            if z < zeta {
                return Ok(Region::Block(k));
            }
            if z < zeta + f.height {
                return Ok(Region::Fissure(k + 1));
            }
        }
        Ok(Region::Block(self.fissures.len()))
    }
}

/// The ε-scaled medium together with the reference medium it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsScaling {
    eps: f64,
    reference: FissuredMedium,
    scaled: FissuredMedium,
}

pub fn epsilon_scale(medium: &FissuredMedium, eps: f64) -> Result<EpsScaling, GeometryError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(GeometryError::InvalidEpsilon(eps));
    }
    let fissures = medium
        .fissures
        .iter()
        .enumerate()
        .map(|(k, f)| Fissure {
            curve: f.curve.shifted(-(1.0 - eps) * medium.cumulative_height(k)),
            height: eps * f.height,
        })
        .collect();
    let top = medium.top - (1.0 - eps) * medium.cumulative_height(medium.n_fissures());
    let scaled = FissuredMedium::new(medium.x_lo, medium.x_hi, medium.bottom, top, medium.slope_cap, fissures)?;
    Ok(EpsScaling { eps, reference: medium.clone(), scaled })
}

impl EpsScaling {
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn reference(&self) -> &FissuredMedium {
        &self.reference
    }
    pub fn scaled(&self) -> &FissuredMedium {
        &self.scaled
    }

    /// Vertical offset `(1 − ε) Σ_{ℓ ≤ j} h_ℓ` of block `j`.
    pub fn block_shift(&self, j: usize) -> f64 {
        (1.0 - self.eps) * self.reference.cumulative_height(j)
    }

    /// Change of variables from the ε-domain to the reference domain.
    pub fn map_phi(&self, y: [f64; 2]) -> Result<[f64; 2], GeometryError> {
        let [x, y3] = y;
        match self.scaled.locate(y)? {
            Region::Block(j) => Ok([x, y3 + self.block_shift(j)]),
            Region::Fissure(i) => {
                let ze = self.scaled.fissure(i).curve.value(x);
                let zeta = self.reference.fissure(i).curve.value(x);
                Ok([x, zeta + (y3 - ze) / self.eps])
            }
        }
    }

    pub fn inverse_phi(&self, p: [f64; 2]) -> Result<[f64; 2], GeometryError> {
        let [x, z] = p;
        match self.reference.locate(p)? {
            Region::Block(j) => Ok([x, z - self.block_shift(j)]),
            Region::Fissure(i) => {
                let ze = self.scaled.fissure(i).curve.value(x);
                let zeta = self.reference.fissure(i).curve.value(x);
                Ok([x, ze + self.eps * (z - zeta)])
            }
        }
    }

    /// Matrix relating reference-domain gradients to ε-domain gradients.
    pub fn gradient_jacobian(&self, p: [f64; 2]) -> Result<[[f64; 2]; 2], GeometryError> {
        match self.reference.locate(p)? {
            Region::Block(_) => Ok([[1.0, 0.0], [0.0, 1.0]]),
            Region::Fissure(i) => {
                let s = self.reference.fissure(i).curve.slope(p[0]);
                Ok(strip_jacobian(self.eps, s))
            }
        }
    }
}

/// `[[1, (1 − 1/ε) s], [0, 1/ε]]`.
pub fn strip_jacobian(eps: f64, slope: f64) -> [[f64; 2]; 2] {
    [[1.0, (1.0 - 1.0 / eps) * slope], [0.0, 1.0 / eps]]
}

pub fn map_phi(medium: &FissuredMedium, eps: f64, y: [f64; 2]) -> Result<[f64; 2], GeometryError> {
    epsilon_scale(medium, eps)?.map_phi(y)
}

pub fn inverse_phi(medium: &FissuredMedium, eps: f64, x: [f64; 2]) -> Result<[f64; 2], GeometryError> {
    epsilon_scale(medium, eps)?.inverse_phi(x)
}

pub fn gradient_jacobian(medium: &FissuredMedium, eps: f64, x: [f64; 2]) -> Result<[[f64; 2]; 2], GeometryError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(GeometryError::InvalidEpsilon(eps));
    }
    match medium.locate(x)? {
        Region::Block(_) => Ok([[1.0, 0.0], [0.0, 1.0]]),
        Region::Fissure(i) => Ok(strip_jacobian(eps, medium.fissure(i).curve.slope(x[0]))),
    }
}

/// Collapses fissure strips onto curves and closes the gaps between blocks.
pub fn collapse_t(medium: &FissuredMedium, p: [f64; 2]) -> Result<(Region, [f64; 2]), GeometryError> {
    let region = medium.locate(p)?;
    let image = match region {
        Region::Block(j) => [p[0], p[1] - medium.cumulative_height(j)],
        Region::Fissure(i) => [p[0], medium.fissure(i).curve.value(p[0]) - medium.cumulative_height(i - 1)],
    };
    Ok((region, image))
}

/// Medium whose fissures are curves `λ_i = ζ_i − Σ_{ℓ<i} h_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMedium {
    pub x_lo: f64,
    pub x_hi: f64,
    pub bottom: f64,
    pub top: f64,
    pub curves: Vec<Curve>,
}

pub fn collapsed_medium(medium: &FissuredMedium) -> ManifoldMedium {
    ManifoldMedium {
        x_lo: medium.x_lo,
        x_hi: medium.x_hi,
        bottom: medium.bottom,
        top: medium.top - medium.cumulative_height(medium.n_fissures()),
        curves: medium
            .fissures
            .iter()
            .enumerate()
            .map(|(k, f)| f.curve.shifted(-medium.cumulative_height(k)))
            .collect(),
    }
}

impl ManifoldMedium {
    /// Strict ordering of the curves and nonempty blocks between them.
    pub fn validate(&self) -> Result<(), GeometryError> {
        for k in 1..self.curves.len() {
            let a = self.curves[k - 1].max_value();
            let b = self.curves[k].min_value();
            if a >= b {
                return Err(GeometryError::Overlap { lower: k, upper: k + 1, top_of_lower: a, bottom_of_upper: b });
            }
        }
        let lowest = self.curves.first().map_or(self.top, |c| c.min_value());
        if !(self.bottom < lowest) {
            return Err(GeometryError::DisconnectedBlock { block: 0, reason: "bottom level not below first curve".into() });
        }
        let highest = self.curves.last().map_or(self.bottom, |c| c.max_value());
        if !(highest < self.top) {
            return Err(GeometryError::DisconnectedBlock {
                block: self.curves.len(),
                reason: "top level not above last curve".into(),
            });
        }
        Ok(())
    }
}
