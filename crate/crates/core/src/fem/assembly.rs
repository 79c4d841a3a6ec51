use std::sync::Arc;

use super::element::{
    edge_gauss_sigma, edge_mass, edge_tangential, p1_stiffness, p1_weighted_mass, triangle_points,
};
use super::fields::{CoefficientField, ImpedanceField};
use crate::error::Result;
use crate::geometry::{BoundaryTag, Mesh};
use crate::linalg::{CsrMatrix, Pattern};
use crate::quadrature::GAUSS2_UNIT;

/// `K_A`, `M_c` and `M`.
#[derive(Debug, Clone)]
pub struct VolumeForms {
    pub stiffness: CsrMatrix,
    pub reaction_mass: CsrMatrix,
    pub mass: CsrMatrix,
}

/// `B_η` and `B_γ`.
#[derive(Debug, Clone)]
pub struct GibcForms {
    pub tangential: CsrMatrix,
    pub boundary_mass: CsrMatrix,
}

fn triangle_vertices(mesh: &Mesh, t: [usize; 3]) -> [[f64; 2]; 3] {
    t.map(|i| mesh.vertices()[i])
}

pub fn assemble_volume(mesh: &Mesh, pattern: &Arc<Pattern>, coeffs: &CoefficientField) -> Result<VolumeForms> {
    let mut stiffness = CsrMatrix::zeros(pattern.clone());
    let mut reaction_mass = CsrMatrix::zeros(pattern.clone());
    let mut mass = CsrMatrix::zeros(pattern.clone());
    for &t in mesh.triangles() {
        let v = triangle_vertices(mesh, t);
        let points = triangle_points(v);
        let mut a_mean = [[0.0; 2]; 2];
        let mut c = [0.0; 3];
        for (q, &x) in points.iter().enumerate() {
            coeffs.check_at(x)?;
            let a = coeffs.diffusivity(x);
            for r in 0..2 {
                for s in 0..2 {
                    a_mean[r][s] += a[r][s] / 3.0;
                }
            }
            c[q] = coeffs.reaction(x);
        }
        let k = p1_stiffness(v, a_mean);
        let area = super::element::p1_gradients(v).0;
        let mc = p1_weighted_mass(area, c);
        let m = p1_weighted_mass(area, [1.0; 3]);
        for i in 0..3 {
            for j in 0..3 {
                stiffness.add(t[i], t[j], k[i][j]);
                reaction_mass.add(t[i], t[j], mc[i][j]);
                mass.add(t[i], t[j], m[i][j]);
            }
        }
    }
    Ok(VolumeForms { stiffness, reaction_mass, mass })
}

/// Tangential stiffness `∫_{Γ0} w dU/dσ dV/dσ` for an arbitrary weight.
pub fn assemble_tangential<F: Fn(f64) -> f64>(mesh: &Mesh, pattern: &Arc<Pattern>, weight: F) -> CsrMatrix {
    let mut m = CsrMatrix::zeros(pattern.clone());
    for e in mesh.edges_with_tag(BoundaryTag::Inner) {
        let s = edge_gauss_sigma(e.sigma);
        let local = edge_tangential(e.length(mesh.vertices()), [weight(s[0]), weight(s[1])]);
        add_edge(&mut m, e.nodes, local);
    }
    m
}

/// Boundary mass `∫_{Γ0} w U V` for an arbitrary weight.
pub fn assemble_boundary_mass<F: Fn(f64) -> f64>(mesh: &Mesh, pattern: &Arc<Pattern>, weight: F) -> CsrMatrix {
    let mut m = CsrMatrix::zeros(pattern.clone());
    for e in mesh.edges_with_tag(BoundaryTag::Inner) {
        let s = edge_gauss_sigma(e.sigma);
        let local = edge_mass(e.length(mesh.vertices()), [weight(s[0]), weight(s[1])]);
        add_edge(&mut m, e.nodes, local);
    }
    m
}

fn add_edge(m: &mut CsrMatrix, nodes: [usize; 2], local: [[f64; 2]; 2]) {
    for i in 0..2 {
        for j in 0..2 {
            m.add(nodes[i], nodes[j], local[i][j]);
        }
    }
}

pub fn assemble_gibc(mesh: &Mesh, pattern: &Arc<Pattern>, imp: &ImpedanceField) -> Result<GibcForms> {
    imp.check_periodic(mesh.boundary(BoundaryTag::Inner).length)?;
    for e in mesh.edges_with_tag(BoundaryTag::Inner) {
        for s in edge_gauss_sigma(e.sigma) {
            imp.check_at(s)?;
        }
    }
    Ok(GibcForms {
        tangential: assemble_tangential(mesh, pattern, |s| imp.eta.eval(s)),
        boundary_mass: assemble_boundary_mass(mesh, pattern, |s| imp.gamma.eval(s)),
    })
}

/// Load vector `∫_{Γ1} f φ_j dσ`, with `f` a function of arc length on Γ1.
pub fn assemble_flux_load<F: Fn(f64) -> f64>(mesh: &Mesh, f: F) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_vertices()];
    for e in mesh.edges_with_tag(BoundaryTag::Outer) {
        let len = e.length(mesh.vertices());
        for (&(x, w), s) in GAUSS2_UNIT.iter().zip(edge_gauss_sigma(e.sigma)) {
            let fw = len * w * f(s);
            load[e.nodes[0]] += fw * (1.0 - x);
            load[e.nodes[1]] += fw * x;
        }
    }
    load
}
