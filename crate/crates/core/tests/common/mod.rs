//! Shared fixtures and the 1D radial oracle used by several test targets.
#![allow(dead_code)]

use fracgibc::fem::{CoefficientField, FormSet, ImpedanceField};
use fracgibc::geometry::{build_annulus_mesh, BoundaryTag, Curve, Mesh};
use fracgibc::trig::{BoundaryFunction, TrigSeries};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub const R_OUTER: f64 = 1.0;
pub const R_INNER: f64 = 0.5;

pub fn concentric_mesh(h: f64) -> Mesh {
    let outer = Curve::circle([0.0, 0.0], R_OUTER).unwrap();
    let inner = Curve::circle([0.0, 0.0], R_INNER).unwrap();
    build_annulus_mesh(&outer, &inner, h).unwrap()
}

pub fn ellipse_mesh(h: f64) -> Mesh {
    let outer = Curve::circle([0.0, 0.0], R_OUTER).unwrap();
    let inner = Curve::ellipse([0.0, 0.0], 0.5, 0.3).unwrap();
    build_annulus_mesh(&outer, &inner, h).unwrap()
}

pub fn gamma0_length(mesh: &Mesh) -> f64 {
    mesh.boundary(BoundaryTag::Inner).length
}

/// A = I, c = 0, constant η and γ.
pub fn constant_forms(mesh: &Mesh, eta: f64, gamma: f64) -> FormSet {
    let imp = ImpedanceField::constant(gamma0_length(mesh), eta, gamma).unwrap();
    FormSet::assemble(mesh, &CoefficientField::identity(), &imp).unwrap()
}

/// η = 1 + 0.5 cos(2πσ/ℓ₀), γ = 2 + sin(2πσ/ℓ₀).
pub fn trig_truth(mesh: &Mesh) -> (BoundaryFunction, BoundaryFunction) {
    let l0 = gamma0_length(mesh);
    (
        BoundaryFunction::Series(TrigSeries::new(l0, vec![1.0, 0.5, 0.0]).unwrap()),
        BoundaryFunction::Series(TrigSeries::new(l0, vec![2.0, 0.0, 1.0]).unwrap()),
    )
}

/// A = I, c = 0 with the trigonometric truth impedance.
pub fn trig_truth_forms(mesh: &Mesh) -> FormSet {
    let (eta, gamma) = trig_truth(mesh);
    let imp = ImpedanceField::new(eta, gamma, 0.5, 1.0).unwrap();
    FormSet::assemble(mesh, &CoefficientField::identity(), &imp).unwrap()
}

/// Chebyshev solution of `−(rU′)′/r + k U = 0` on `(R0, R1)` with
/// `U′(R1) = flux` and `−U′(R0) + γ U(R0) = 0`, for complex `k = s^α`.
pub struct RadialOracle {
    coeffs: Vec<Complex64>,
    r0: f64,
    r1: f64,
}

fn chebyshev(x: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut t, mut d, mut dd) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    t[0] = 1.0;
    if n > 1 {
        t[1] = x;
        d[1] = 1.0;
    }
    for k in 1..n.saturating_sub(1) {
        t[k + 1] = 2.0 * x * t[k] - t[k - 1];
        d[k + 1] = 2.0 * t[k] + 2.0 * x * d[k] - d[k - 1];
        dd[k + 1] = 4.0 * d[k] + 2.0 * x * dd[k] - dd[k - 1];
    }
    (t, d, dd)
}

impl RadialOracle {
    pub fn new(k: Complex64, gamma: f64, flux: Complex64, degree: usize) -> Self {
        let (r0, r1) = (R_INNER, R_OUTER);
        let n = degree + 1;
        let half = 0.5 * (r1 - r0);
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        let mut b = DVector::<Complex64>::zeros(n);
        // Interior Gauss-Lobatto points.
        for i in 1..degree {
            let x = (std::f64::consts::PI * i as f64 / degree as f64).cos();
            let r = 0.5 * (r1 + r0) + half * x;
            let (t, d, dd) = chebyshev(x, n);
            for j in 0..n {
                let u2 = dd[j] / (half * half);
                let u1 = d[j] / half;
                a[(i, j)] = Complex64::new(-u2 - u1 / r, 0.0) + k * t[j];
            }
        }
        let (t1, d1, _) = chebyshev(1.0, n);
        let (t0, d0, _) = chebyshev(-1.0, n);
        for j in 0..n {
            a[(0, j)] = Complex64::new(d1[j] / half, 0.0);
            a[(degree, j)] = Complex64::new(-d0[j] / half + gamma * t0[j], 0.0);
        }
        let _ = t1;
        b[0] = flux;
        let c = a.lu().solve(&b).expect("radial collocation system is regular");
        RadialOracle { coeffs: c.iter().copied().collect(), r0, r1 }
    }

    /// `(U(r), U′(r))`, valid slightly outside `[R0, R1]` by polynomial extension.
    pub fn eval(&self, r: f64) -> (Complex64, Complex64) {
        let half = 0.5 * (self.r1 - self.r0);
        let x = (r - 0.5 * (self.r1 + self.r0)) / half;
        let (t, d, _) = chebyshev(x, self.coeffs.len());
        let mut u = Complex64::new(0.0, 0.0);
        let mut du = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            u += c * t[j];
            du += c * d[j] / half;
        }
        (u, du)
    }
}

/// Degree-5 seven-point rule on a triangle: barycentric points and weights
/// (weights sum to 1).
const DUNAVANT5: [([f64; 3], f64); 7] = {
    let a1 = 0.059_715_871_789_770;
    let b1 = 0.470_142_064_105_115;
    let a2 = 0.797_426_985_353_087;
    let b2 = 0.101_286_507_323_456;
    let w1 = 0.132_394_152_788_506;
    let w2 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
};

/// `(‖U_h − U‖_{H¹}, ‖U‖_{H¹})` over the mesh triangles for a radial exact
/// solution.
pub fn radial_h1_error(mesh: &Mesh, u: &[Complex64], oracle: &RadialOracle) -> (f64, f64) {
    let (mut err, mut norm) = (0.0, 0.0);
    for &t in mesh.triangles() {
        let v = t.map(|i| mesh.vertices()[i]);
        let (area, g) = fracgibc::fem::p1_gradients(v);
        let vals = t.map(|i| u[i]);
        let grad_h = [0, 1].map(|d| (0..3).map(|a| vals[a] * g[a][d]).sum::<Complex64>());
        for (l, w) in DUNAVANT5 {
            let x = [0, 1].map(|d| l[0] * v[0][d] + l[1] * v[1][d] + l[2] * v[2][d]);
            let r = x[0].hypot(x[1]);
            let (ue, due) = oracle.eval(r);
            let grad_e = [due * (x[0] / r), due * (x[1] / r)];
            let uh: Complex64 = (0..3).map(|a| vals[a] * l[a]).sum();
            err += area * w * ((uh - ue).norm_sqr() + (grad_h[0] - grad_e[0]).norm_sqr() + (grad_h[1] - grad_e[1]).norm_sqr());
            norm += area * w * (ue.norm_sqr() + grad_e[0].norm_sqr() + grad_e[1].norm_sqr());
        }
    }
    (err.sqrt(), norm.sqrt())
}

/// Relative L² distance `‖a − b‖_M / ‖b‖_M` in the mass matrix of the forms.
pub fn relative_l2(forms: &FormSet, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (forms.mass.real_quadratic_form(&d) / forms.mass.real_quadratic_form(b)).sqrt()
}

