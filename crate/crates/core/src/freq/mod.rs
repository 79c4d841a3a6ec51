//! Frequency-domain solves `T_h(s) U = G(s) ℓ̂` with
//! `T_h(s) = K_A + M_c + B_η + B_γ + s^α M`.

mod checks;
mod conormal;

use std::fmt::Write as _;

use num_complex::Complex64;

pub use checks::{coercivity_check, stability_ratio, CoercivityReport, StabilitySample};
pub use conormal::{conormal_gamma0, lumped_boundary_weights, Conormal};

use crate::error::{Error, Result};
use crate::fem::FormSet;
use crate::geometry::{BoundaryTag, Mesh};
use crate::laplace::{caputo_symbol, check_admissible};
use crate::linalg::{norm2, CsrMatrix, LdltFactor};

/// Relative residual every accepted solve must reach.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Assembled `T_h(s)`; complex symmetric, not Hermitian.
pub fn system_matrix(forms: &FormSet, s: Complex64, alpha: f64) -> Result<CsrMatrix<Complex64>> {
    check_admissible(s, alpha)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(CsrMatrix::complex_combination(&[
        (one, &forms.stiffness),
        (one, &forms.reaction_mass),
        (one, &forms.tangential),
        (one, &forms.boundary_mass),
        (caputo_symbol(s, alpha)?, &forms.mass),
    ]))
}

enum Factor {
    Real(LdltFactor<f64>),
    Complex(LdltFactor<Complex64>),
}

/// Factorized `T_h(s)` for one frequency; reused across load vectors.
pub struct FrequencyOperator<'a> {
    forms: &'a FormSet,
    s: Complex64,
    alpha: f64,
    symbol: Complex64,
    factor: Factor,
}

impl<'a> FrequencyOperator<'a> {
    pub fn new(forms: &'a FormSet, s: Complex64, alpha: f64) -> Result<Self> {
        check_admissible(s, alpha)?;
        let symbol = caputo_symbol(s, alpha)?;
        let factor = if symbol.im == 0.0 {
            let m = CsrMatrix::real_combination(&[
                (1.0, &forms.stiffness),
                (1.0, &forms.reaction_mass),
                (1.0, &forms.tangential),
                (1.0, &forms.boundary_mass),
                (symbol.re, &forms.mass),
            ]);
            Factor::Real(LdltFactor::factorize(&m, forms.ordering())?)
        } else {
            Factor::Complex(LdltFactor::factorize(&system_matrix(forms, s, alpha)?, forms.ordering())?)
        };
        Ok(FrequencyOperator { forms, s, alpha, symbol, factor })
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `s^α`.
    pub fn symbol(&self) -> Complex64 {
        self.symbol
    }

    pub fn forms(&self) -> &FormSet {
        self.forms
    }

    /// `T_h(s) x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let f = self.forms;
        let mut y = f.stiffness.matvec(x);
        for m in [&f.reaction_mass, &f.tangential, &f.boundary_mass] {
            for (a, b) in y.iter_mut().zip(m.matvec(x)) {
                *a += b;
            }
        }
        for (a, b) in y.iter_mut().zip(f.mass.matvec(x)) {
            *a += self.symbol * b;
        }
        y
    }

    fn raw_solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        match &self.factor {
            Factor::Complex(f) => f.solve(rhs),
            Factor::Real(f) => {
                let re = f.solve(&rhs.iter().map(|z| z.re).collect::<Vec<_>>());
                let im = if rhs.iter().any(|z| z.im != 0.0) {
                    f.solve(&rhs.iter().map(|z| z.im).collect::<Vec<_>>())
                } else {
                    vec![0.0; rhs.len()]
                };
                re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
            }
        }
    }

    /// Solves `T_h(s) x = rhs`, with one refinement step if the residual is
    /// above tolerance. Fails if the residual invariant still does not hold.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let scale = norm2(rhs);
        if scale == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); rhs.len()]);
        }
        let mut x = self.raw_solve(rhs);
        for attempt in 0..2 {
            let r: Vec<Complex64> = rhs.iter().zip(self.apply(&x)).map(|(b, ax)| b - ax).collect();
            let rel = norm2(&r) / scale;
            if rel <= SOLVER_TOLERANCE {
                return Ok(x);
            }
            if attempt == 1 || !rel.is_finite() {
                return Err(Error::Invariant(format!(
                    "frequency solve at s = {} has relative residual {rel:e} > {SOLVER_TOLERANCE:e}",
                    self.s
                )));
            }
            for (xi, d) in x.iter_mut().zip(self.raw_solve(&r)) {
                *xi += d;
            }
        }
        unreachable!()
    }

    /// Solves for the load `G(s) ℓ̂`.
    pub fn solve_load(&self, load: &[f64], g_value: Complex64, flux: &str) -> Result<FrequencySolution> {
        let rhs: Vec<Complex64> = load.iter().map(|&l| g_value * l).collect();
        let u = self.solve(&rhs)?;
        Ok(FrequencySolution { s: self.s, alpha: self.alpha, u, flux: flux.to_string(), g_value })
    }
}

/// Nodal solution of the frequency problem for one flux.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySolution {
    pub s: Complex64,
    pub alpha: f64,
    pub u: Vec<Complex64>,
    pub flux: String,
    pub g_value: Complex64,
}

/// Factorizes and solves once.
pub fn solve_frequency(
    forms: &FormSet,
    load: &[f64],
    s: Complex64,
    alpha: f64,
    g_value: Complex64,
    flux: &str,
) -> Result<FrequencySolution> {
    FrequencyOperator::new(forms, s, alpha)?.solve_load(load, g_value, flux)
}

/// Values at the tagged boundary nodes in σ-order, as `(σ, value)`.
pub fn trace<T: Copy>(mesh: &Mesh, u: &[T], tag: BoundaryTag) -> Vec<(f64, T)> {
    let cycle = mesh.boundary(tag);
    cycle.nodes.iter().zip(&cycle.sigma).map(|(&n, &s)| (s, u[n])).collect()
}

/// Per-node `x y Re(U) Im(U)` lines.
pub fn solution_to_text(mesh: &Mesh, u: &[Complex64]) -> String {
    let mut out = String::new();
    for (p, z) in mesh.vertices().iter().zip(u) {
        let _ = writeln!(out, "{} {} {} {}", p[0], p[1], z.re, z.im);
    }
    out
}

/// `sigma Re Im` lines.
pub fn trace_to_text(trace: &[(f64, Complex64)]) -> String {
    let mut out = String::new();
    for (s, z) in trace {
        let _ = writeln!(out, "{s} {} {}", z.re, z.im);
    }
    out
}
