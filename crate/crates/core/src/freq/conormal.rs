use num_complex::Complex64;

use super::FrequencyOperator;
use crate::fem::FormSet;
use crate::geometry::{BoundaryTag, Mesh};

/// Conormal derivative of a frequency solution on Γ0, in σ-order of the
/// Γ0 cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Conormal {
    pub sigma: Vec<f64>,
    /// Residual functional `r_j = ∫_{Γ0} φ_j ∂_{ν_A}U dσ` from the volume
    /// equation: `((K_A + M_c + s^α M)U − G ℓ̂)_j`.
    pub functional: Vec<Complex64>,
    /// The same functional from the boundary condition: `−((B_η + B_γ)U)_j`.
    pub functional_gibc: Vec<Complex64>,
    /// Pointwise values: the residual functional divided by lumped Γ0 mass.
    pub pointwise: Vec<Complex64>,
    /// Pointwise `(η U')' − γ U` by finite differences along Γ0.
    pub pointwise_gibc: Vec<Complex64>,
}

/// Row sums of the unit Γ0 boundary mass at the Γ0 nodes, in cycle order.
pub fn lumped_boundary_weights(mesh: &Mesh, forms: &FormSet) -> Vec<f64> {
    let m = &forms.unit_boundary_mass;
    mesh.boundary(BoundaryTag::Inner)
        .nodes
        .iter()
        .map(|&i| forms.pattern().row(i).iter().map(|&j| m.get(i, j)).sum())
        .collect()
}

/// Both routes to the weak conormal derivative on Γ0.
pub fn conormal_gamma0(
    mesh: &Mesh,
    op: &FrequencyOperator<'_>,
    u: &[Complex64],
    load: &[f64],
    g_value: Complex64,
    eta: impl Fn(f64) -> f64,
    gamma: impl Fn(f64) -> f64,
) -> Conormal {
    let forms = op.forms();
    let mut volume = forms.stiffness.matvec(u);
    for (a, b) in volume.iter_mut().zip(forms.reaction_mass.matvec(u)) {
        *a += b;
    }
    for (a, b) in volume.iter_mut().zip(forms.mass.matvec(u)) {
        *a += op.symbol() * b;
    }
    let mut boundary = forms.tangential.matvec(u);
    for (a, b) in boundary.iter_mut().zip(forms.boundary_mass.matvec(u)) {
        *a += b;
    }
    let cycle = mesh.boundary(BoundaryTag::Inner);
    let weights = lumped_boundary_weights(mesh, forms);
    let functional: Vec<Complex64> = cycle.nodes.iter().map(|&i| volume[i] - g_value * load[i]).collect();
    let functional_gibc: Vec<Complex64> = cycle.nodes.iter().map(|&i| -boundary[i]).collect();
    let pointwise = functional.iter().zip(&weights).map(|(r, w)| r / w).collect();

    let n = cycle.nodes.len();
    let vertices = mesh.vertices();
    let dist = |a: usize, b: usize| {
        let (p, q) = (vertices[a], vertices[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    let mid_sigma = |k: usize| {
        let (a, b) = (cycle.sigma[k], cycle.sigma[(k + 1) % n]);
        let b = if b <= a { b + cycle.length } else { b };
        let m = 0.5 * (a + b);
        if m >= cycle.length { m - cycle.length } else { m }
    };
    let pointwise_gibc = (0..n)
        .map(|k| {
            let (prev, next) = ((k + n - 1) % n, (k + 1) % n);
            let (ip, ik, inx) = (cycle.nodes[prev], cycle.nodes[k], cycle.nodes[next]);
            let (lp, ln) = (dist(ip, ik), dist(ik, inx));
            let flux_next = eta(mid_sigma(k)) * (u[inx] - u[ik]) / ln;
            let flux_prev = eta(mid_sigma(prev)) * (u[ik] - u[ip]) / lp;
            (flux_next - flux_prev) / (0.5 * (lp + ln)) - gamma(cycle.sigma[k]) * u[ik]
        })
        .collect();
    Conormal { sigma: cycle.sigma.clone(), functional, functional_gibc, pointwise, pointwise_gibc }
}
