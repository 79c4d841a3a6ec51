//! P1 finite element forms for the frequency-domain problem:
//! `a_s(U,V) = ∫ A∇U·∇V̄ + (c + s^α) U V̄` on D1 and
//! `b(U,V) = ∫_{Γ0} η U'V̄' + γ U V̄` on the impedance curve.

mod assembly;
mod element;
mod fields;

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

pub use assembly::{
    assemble_boundary_mass, assemble_flux_load, assemble_gibc, assemble_tangential, assemble_volume, GibcForms,
    VolumeForms,
};
pub use element::{edge_gauss_sigma, edge_mass, edge_tangential, p1_gradients, p1_stiffness, p1_weighted_mass};
pub use fields::{CoefficientField, ImpedanceField};

use crate::error::Result;
use crate::geometry::Mesh;
use crate::linalg::{CsrMatrix, LdltFactor, Ordering, Pattern};
use crate::trig::BoundaryFunction;

/// Lower bounds entering the coercivity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityBounds {
    pub a_min: f64,
    pub eta_min: f64,
    pub gamma_min: f64,
}

impl CoercivityBounds {
    /// `min(1, A_min, η_min, γ_min)`.
    pub fn constant(&self) -> f64 {
        1.0f64.min(self.a_min).min(self.eta_min).min(self.gamma_min)
    }
}

/// All assembled matrices for one mesh and coefficient set. Immutable after
/// assembly; shared read-only between concurrent solves.
#[derive(Debug)]
pub struct FormSet {
    pattern: Arc<Pattern>,
    ordering: Arc<Ordering>,
    pub stiffness: CsrMatrix,
    pub reaction_mass: CsrMatrix,
    pub mass: CsrMatrix,
    pub tangential: CsrMatrix,
    pub boundary_mass: CsrMatrix,
    /// Unit-coefficient copies used only for the H¹(D1, Γ0) graph norm.
    pub unit_stiffness: CsrMatrix,
    pub unit_tangential: CsrMatrix,
    pub unit_boundary_mass: CsrMatrix,
    pub bounds: CoercivityBounds,
    norm_factor: OnceLock<LdltFactor<f64>>,
}

impl FormSet {
    pub fn assemble(mesh: &Mesh, coeffs: &CoefficientField, imp: &ImpedanceField) -> Result<Self> {
        let pattern = Arc::new(Pattern::from_triangles(mesh.num_vertices(), mesh.triangles()));
        let ordering = Arc::new(Ordering::reverse_cuthill_mckee(&pattern));
        let volume = assemble_volume(mesh, &pattern, coeffs)?;
        let gibc = assemble_gibc(mesh, &pattern, imp)?;
        let unit = assemble_volume(mesh, &pattern, &CoefficientField::identity())?;
        Ok(FormSet {
            unit_stiffness: unit.stiffness,
            unit_tangential: assemble_tangential(mesh, &pattern, |_| 1.0),
            unit_boundary_mass: assemble_boundary_mass(mesh, &pattern, |_| 1.0),
            stiffness: volume.stiffness,
            reaction_mass: volume.reaction_mass,
            mass: volume.mass,
            tangential: gibc.tangential,
            boundary_mass: gibc.boundary_mass,
            bounds: CoercivityBounds { a_min: coeffs.a_min(), eta_min: imp.eta_min, gamma_min: imp.gamma_min },
            pattern,
            ordering,
            norm_factor: OnceLock::new(),
        })
    }

    /// Same mesh and volume coefficients with a different impedance pair.
    pub fn with_impedance(&self, mesh: &Mesh, imp: &ImpedanceField) -> Result<Self> {
        let gibc = assemble_gibc(mesh, &self.pattern, imp)?;
        Ok(FormSet {
            pattern: self.pattern.clone(),
            ordering: self.ordering.clone(),
            stiffness: self.stiffness.clone(),
            reaction_mass: self.reaction_mass.clone(),
            mass: self.mass.clone(),
            tangential: gibc.tangential,
            boundary_mass: gibc.boundary_mass,
            unit_stiffness: self.unit_stiffness.clone(),
            unit_tangential: self.unit_tangential.clone(),
            unit_boundary_mass: self.unit_boundary_mass.clone(),
            bounds: CoercivityBounds { eta_min: imp.eta_min, gamma_min: imp.gamma_min, ..self.bounds },
            norm_factor: OnceLock::new(),
        })
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn ordering(&self) -> &Arc<Ordering> {
        &self.ordering
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    /// The s-independent part `K_A + M_c + B_η + B_γ`.
    pub fn static_operator(&self) -> CsrMatrix {
        CsrMatrix::real_combination(&[
            (1.0, &self.stiffness),
            (1.0, &self.reaction_mass),
            (1.0, &self.tangential),
            (1.0, &self.boundary_mass),
        ])
    }

    /// `K_I + M + B_1^tan + B_1^mass`, the Gram matrix of the graph norm.
    pub fn graph_norm_matrix(&self) -> CsrMatrix {
        CsrMatrix::real_combination(&[
            (1.0, &self.unit_stiffness),
            (1.0, &self.mass),
            (1.0, &self.unit_tangential),
            (1.0, &self.unit_boundary_mass),
        ])
    }

    /// ‖V‖ in H¹(D1, Γ0).
    pub fn graph_norm(&self, v: &[Complex64]) -> f64 {
        let q = self.unit_stiffness.quadratic_form(v).re
            + self.mass.quadratic_form(v).re
            + self.unit_tangential.quadratic_form(v).re
            + self.unit_boundary_mass.quadratic_form(v).re;
        q.max(0.0).sqrt()
    }

    pub fn graph_norm_real(&self, v: &[f64]) -> f64 {
        let q = self.unit_stiffness.real_quadratic_form(v)
            + self.mass.real_quadratic_form(v)
            + self.unit_tangential.real_quadratic_form(v)
            + self.unit_boundary_mass.real_quadratic_form(v);
        q.max(0.0).sqrt()
    }

    /// Dual norm of a load functional with respect to the graph norm,
    /// `sqrt(ℓᵀ G⁻¹ ℓ)`; mesh-independent counterpart of ‖f‖.
    pub fn load_dual_norm(&self, load: &[f64]) -> Result<f64> {
        let factor = match self.norm_factor.get() {
            Some(f) => f,
            None => {
                let f = LdltFactor::factorize(&self.graph_norm_matrix(), &self.ordering)?;
                self.norm_factor.get_or_init(|| f)
            }
        };
        let y = factor.solve(load);
        Ok(y.iter().zip(load).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }
}

/// Flux load for a boundary function of arc length on Γ1.
pub fn flux_load(mesh: &Mesh, f: &BoundaryFunction) -> Vec<f64> {
    assemble_flux_load(mesh, |s| f.eval(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_annulus_mesh, BoundaryTag, Curve};
    use crate::trig::TrigSeries;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn concentric(h: f64) -> Mesh {
        let outer = Curve::circle([0.0, 0.0], 1.0).unwrap();
        let inner = Curve::circle([0.0, 0.0], 0.5).unwrap();
        build_annulus_mesh(&outer, &inner, h).unwrap()
    }

    fn unit_forms(mesh: &Mesh) -> FormSet {
        let imp = ImpedanceField::constant(mesh.boundary(BoundaryTag::Inner).length, 1.0, 1.0).unwrap();
        FormSet::assemble(mesh, &CoefficientField::identity(), &imp).unwrap()
    }

    #[test]
    fn constants_are_reproduced() {
        let mesh = concentric(0.1);
        let forms = unit_forms(&mesh);
        let ones = vec![1.0; mesh.num_vertices()];
        assert!(forms.stiffness.real_quadratic_form(&ones).abs() < 1e-12);
        assert!((forms.mass.real_quadratic_form(&ones) - mesh.area()).abs() < 1e-12);
        let g0 = mesh.boundary_length(BoundaryTag::Inner);
        assert!(forms.tangential.real_quadratic_form(&ones).abs() < 1e-12);
        assert!((forms.boundary_mass.real_quadratic_form(&ones) - g0).abs() < 1e-12);
        let expected = (mesh.area() + g0).sqrt();
        assert!((forms.graph_norm_real(&ones) - expected).abs() < 1e-12);
        assert_eq!(forms.graph_norm_real(&vec![0.0; mesh.num_vertices()]), 0.0);
    }

    #[test]
    fn matrices_are_symmetric_and_supported_on_gamma0() {
        let mesh = concentric(0.1);
        let forms = unit_forms(&mesh);
        for m in [&forms.stiffness, &forms.mass, &forms.reaction_mass, &forms.tangential, &forms.boundary_mass] {
            assert!(m.asymmetry() < 1e-14);
        }
        let on_gamma0: std::collections::HashSet<usize> =
            mesh.boundary(BoundaryTag::Inner).nodes.iter().copied().collect();
        for i in 0..mesh.num_vertices() {
            if on_gamma0.contains(&i) {
                continue;
            }
            for &j in forms.pattern().row(i) {
                assert_eq!(forms.tangential.get(i, j), 0.0);
                assert_eq!(forms.boundary_mass.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn unit_reaction_equals_mass() {
        let mesh = concentric(0.2);
        let coeffs = CoefficientField::constant([[1.0, 0.0], [0.0, 1.0]], 1.0).unwrap();
        let pattern = Arc::new(Pattern::from_triangles(mesh.num_vertices(), mesh.triangles()));
        let v = assemble_volume(&mesh, &pattern, &coeffs).unwrap();
        for (a, b) in v.mass.values().iter().zip(v.reaction_mass.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn non_elliptic_diffusivity_is_rejected() {
        let mesh = concentric(0.2);
        let pattern = Arc::new(Pattern::from_triangles(mesh.num_vertices(), mesh.triangles()));
        let coeffs = CoefficientField::new(|x| [[1.0 + x[0], 0.0], [0.0, 1.0]], |_| 0.0, 0.5).unwrap();
        assert!(assemble_volume(&mesh, &pattern, &coeffs).is_err());
    }

    #[test]
    fn cosine_mode_tangential_energy_converges() {
        let mut errors = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let mesh = concentric(h);
            let forms = unit_forms(&mesh);
            let cycle = mesh.boundary(BoundaryTag::Inner);
            let ell = cycle.length;
            let mut u = vec![0.0; mesh.num_vertices()];
            for (&n, &s) in cycle.nodes.iter().zip(&cycle.sigma) {
                u[n] = (TAU * s / ell).cos();
            }
            // Brute-force 1D check of the same interpolant.
            let mut brute = 0.0;
            for e in mesh.edges_with_tag(BoundaryTag::Inner) {
                let len = e.length(mesh.vertices());
                brute += (u[e.nodes[1]] - u[e.nodes[0]]).powi(2) / len;
            }
            let form = forms.tangential.real_quadratic_form(&u);
            assert!((form - brute).abs() < 1e-12 * brute);
            errors.push((form - 2.0 * PI * PI / ell).abs());
        }
        assert!(errors[2] < errors[1] && errors[1] < errors[0], "{errors:?}");
        assert!(errors[2] < 1e-2 * 2.0 * PI * PI / PI);
    }

    #[test]
    fn impedance_forms_are_linear() {
        let mesh = concentric(0.1);
        let pattern = Arc::new(Pattern::from_triangles(mesh.num_vertices(), mesh.triangles()));
        let ell = mesh.boundary(BoundaryTag::Inner).length;
        let f1 = BoundaryFunction::Series(TrigSeries::new(ell, vec![1.0, 0.3, 0.2]).unwrap());
        let f2 = BoundaryFunction::Series(TrigSeries::new(ell, vec![2.0, 0.0, -0.5]).unwrap());
        let sum = f1.plus(&f2);
        let a = ImpedanceField::new(f1.clone(), f1.clone(), 0.5, 0.5).unwrap();
        let b = ImpedanceField::new(f2.clone(), f2.scaled(2.0), 1.0, 1.0).unwrap();
        let c = ImpedanceField::new(sum.clone(), f1.plus(&f2.scaled(2.0)), 1.0, 1.0).unwrap();
        let (fa, fb, fc) =
            (assemble_gibc(&mesh, &pattern, &a).unwrap(), assemble_gibc(&mesh, &pattern, &b).unwrap(), assemble_gibc(&mesh, &pattern, &c).unwrap());
        for k in 0..pattern.nnz() {
            let t = fa.tangential.values()[k] + fb.tangential.values()[k];
            assert!((t - fc.tangential.values()[k]).abs() < 1e-14 * t.abs().max(1.0));
            let m = fa.boundary_mass.values()[k] + fb.boundary_mass.values()[k];
            assert!((m - fc.boundary_mass.values()[k]).abs() < 1e-14 * m.abs().max(1.0));
        }
        let doubled = ImpedanceField::new(f1.clone(), f1.scaled(2.0), 0.5, 1.0).unwrap();
        let fd = assemble_gibc(&mesh, &pattern, &doubled).unwrap();
        for (x, y) in fa.boundary_mass.values().iter().zip(fd.boundary_mass.values()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn impedance_below_bound_is_rejected() {
        let mesh = concentric(0.2);
        let pattern = Arc::new(Pattern::from_triangles(mesh.num_vertices(), mesh.triangles()));
        let ell = mesh.boundary(BoundaryTag::Inner).length;
        let eta = BoundaryFunction::Series(TrigSeries::new(ell, vec![1.0, 0.9]).unwrap());
        let imp = ImpedanceField::new(eta, BoundaryFunction::constant(ell, 1.0).unwrap(), 0.5, 1.0).unwrap();
        assert!(assemble_gibc(&mesh, &pattern, &imp).is_err());
        let aperiodic = ImpedanceField::new(
            BoundaryFunction::custom(|s| 1.0 + s),
            BoundaryFunction::constant(ell, 1.0).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        assert!(assemble_gibc(&mesh, &pattern, &aperiodic).is_err());
    }

    #[test]
    fn flux_load_sums_and_converges() {
        let coarse = concentric(0.1);
        let fine = concentric(0.05);
        let err = |mesh: &Mesh| (assemble_flux_load(mesh, |_| 1.0).iter().sum::<f64>() - TAU).abs();
        assert!(err(&coarse) < 0.01 * TAU);
        assert!(err(&coarse) / err(&fine) >= 3.0);
        let ell = fine.boundary(BoundaryTag::Outer).length;
        let sin_sum: f64 = assemble_flux_load(&fine, |s| (TAU * s / ell).sin()).iter().sum();
        assert!(sin_sum.abs() < 1e-8, "{sin_sum}");
        let load = assemble_flux_load(&fine, |_| 1.0);
        let outer: std::collections::HashSet<usize> =
            fine.boundary(BoundaryTag::Outer).nodes.iter().copied().collect();
        for (i, v) in load.iter().enumerate() {
            if !outer.contains(&i) {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn graph_norm_matches_elementwise_integrals() {
        let mesh = Mesh::clone(&concentric(0.1));
        let forms = unit_forms(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<Complex64> =
            (0..mesh.num_vertices()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        // Closed-form P1 integrals: constant gradient and the exact vertex mass rule.
        let mut total = 0.0;
        for &t in mesh.triangles() {
            let (area, g) = p1_gradients(t.map(|i| mesh.vertices()[i]));
            let vals = t.map(|i| v[i]);
            let grad = [0, 1].map(|d| (0..3).map(|a| vals[a] * g[a][d]).sum::<Complex64>());
            total += area * (grad[0].norm_sqr() + grad[1].norm_sqr());
            let s: Complex64 = vals.iter().sum();
            total += area / 12.0 * (vals.iter().map(|z| z.norm_sqr()).sum::<f64>() + s.norm_sqr());
        }
        for e in mesh.edges_with_tag(BoundaryTag::Inner) {
            let len = e.length(mesh.vertices());
            let (a, b) = (v[e.nodes[0]], v[e.nodes[1]]);
            total += (b - a).norm_sqr() / len;
            total += len / 3.0 * (a.norm_sqr() + (a * b.conj()).re + b.norm_sqr());
        }
        let norm = forms.graph_norm(&v);
        assert!((norm - total.sqrt()).abs() < 1e-10 * norm);
    }

    #[test]
    fn load_dual_norm_is_bounded_by_euclidean_scaling() {
        let mesh = concentric(0.1);
        let forms = unit_forms(&mesh);
        let load = assemble_flux_load(&mesh, |_| 1.0);
        let dual = forms.load_dual_norm(&load).unwrap();
        assert!(dual > 0.0 && dual.is_finite());
        let doubled: Vec<f64> = load.iter().map(|x| 2.0 * x).collect();
        assert!((forms.load_dual_norm(&doubled).unwrap() - 2.0 * dual).abs() < 1e-12 * dual);
    }
}
