//! Local P1 element matrices.

use crate::quadrature::{GAUSS2_UNIT, TRIANGLE_MIDPOINTS};

/// Signed area and the constant gradients of the three barycentric
/// basis functions.
pub fn p1_gradients(v: [[f64; 2]; 3]) -> (f64, [[f64; 2]; 3]) {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let area = 0.5 * det;
    let mut grads = [[0.0; 2]; 3];
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        grads[a] = [(v[b][1] - v[c][1]) / det, (v[c][0] - v[b][0]) / det];
    }
    (area, grads)
}

/// `∫ A ∇φ_a · ∇φ_b` for a constant (or averaged) matrix `A`.
pub fn p1_stiffness(v: [[f64; 2]; 3], a: [[f64; 2]; 2]) -> [[f64; 3]; 3] {
    let (area, g) = p1_gradients(v);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let ag = [a[0][0] * g[i][0] + a[0][1] * g[i][1], a[1][0] * g[i][0] + a[1][1] * g[i][1]];
        for j in 0..3 {
            k[i][j] = area * (ag[0] * g[j][0] + ag[1] * g[j][1]);
        }
    }
    k
}

/// Quadrature points of the edge-midpoint rule in physical coordinates.
pub fn triangle_points(v: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    TRIANGLE_MIDPOINTS.map(|l| {
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    })
}

/// `∫ w φ_a φ_b` with the weight sampled at the three edge midpoints.
pub fn p1_weighted_mass(area: f64, weights: [f64; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (q, l) in TRIANGLE_MIDPOINTS.iter().enumerate() {
        let w = area / 3.0 * weights[q];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * l[i] * l[j];
            }
        }
    }
    m
}

/// Arc-length coordinates of the two Gauss points on an edge.
pub fn edge_gauss_sigma(sigma: [f64; 2]) -> [f64; 2] {
    GAUSS2_UNIT.map(|(x, _)| sigma[0] + x * (sigma[1] - sigma[0]))
}

/// `∫ η dφ_a/dσ dφ_b/dσ` on an edge of length `len`; the tangential
/// derivative of a P1 trace is constant per edge, so only the mean of η
/// over the two Gauss points enters.
pub fn edge_tangential(len: f64, eta_at_gauss: [f64; 2]) -> [[f64; 2]; 2] {
    let eta = GAUSS2_UNIT.iter().zip(eta_at_gauss).map(|(&(_, w), e)| w * e).sum::<f64>();
    let k = eta / len;
    [[k, -k], [-k, k]]
}

/// `∫ γ φ_a φ_b` on an edge of length `len` with two-point Gauss quadrature.
pub fn edge_mass(len: f64, gamma_at_gauss: [f64; 2]) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for (&(x, w), g) in GAUSS2_UNIT.iter().zip(gamma_at_gauss) {
        let phi = [1.0 - x, x];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += len * w * g * phi[i] * phi[j];
            }
        }
    }
    m
}
