//! Element-level helpers: quadrature, barycentric gradients, RT0 shape functions.

pub type Point = [f64; 2];

/// Midpoint of the edge opposite vertex `k`, for `k = 0, 1, 2`.
///
/// With weight `|K|/3` each, these points integrate quadratics exactly.
pub fn edge_midpoints(p: [Point; 3]) -> [Point; 3] {
    std::array::from_fn(|k| {
        let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    })
}

/// Value of the hat function of vertex `a` at the midpoint opposite vertex `k`.
pub fn hat_at_midpoint(a: usize, k: usize) -> f64 {
    if a == k {
        0.0
    } else {
        0.5
    }
}

pub fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

/// Gradients of the three barycentric coordinates.
pub fn hat_gradients(p: [Point; 3]) -> [[f64; 2]; 3] {
    let two_a = 2.0 * signed_area(p);
    std::array::from_fn(|k| {
        let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        [(b[1] - c[1]) / two_a, (c[0] - b[0]) / two_a]
    })
}

/// Two-point Gauss rule on a segment: `(point, parameter in [0, 1], weight)`,
/// weights summing to the segment length.
pub fn gauss2(a: Point, b: Point) -> [(Point, f64, f64); 2] {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d].map(|t| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], t, 0.5 * len))
}

/// Lowest-order Raviart–Thomas function of the facet opposite vertex `k`,
/// with unit flux in the direction `sign` times the outward normal.
pub fn rt0(p: [Point; 3], area: f64, k: usize, sign: f64, x: Point) -> [f64; 2] {
    let s = sign / (2.0 * area);
    [s * (x[0] - p[k][0]), s * (x[1] - p[k][1])]
}

/// Six-point rule exact for degree 4: `(point, weight)` with weights summing to the area.
pub fn tri6(p: [Point; 3]) -> [(Point, f64); 6] {
    const A: [(f64, f64, f64); 2] = [
        (0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011),
        (0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322),
    ];
    let area = signed_area(p).abs();
    let at = |l: [f64; 3]| [l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0], l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1]];
    let mut out = [([0.0; 2], 0.0); 6];
    for (g, &(a, b, w)) in A.iter().enumerate() {
        for k in 0..3 {
            let mut l = [a; 3];
            l[k] = b;
            out[3 * g + k] = (at(l), w * area);
        }
    }
    out
}

/// Three-point Gauss rule on `[a, b]`: `(abscissa, weight)`.
pub fn gauss3_1d(a: f64, b: f64) -> [(f64, f64); 3] {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let d = (0.6f64).sqrt();
    [(m - r * d, r * 5.0 / 9.0), (m, r * 8.0 / 9.0), (m + r * d, r * 5.0 / 9.0)]
}
