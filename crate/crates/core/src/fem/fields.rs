use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::trig::BoundaryFunction;

type MatrixField = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;
type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Volume coefficients: the symmetric diffusivity `A(x)` with certified
/// ellipticity bound `a_min`, and the reaction coefficient `c(x) ≥ 0`.
#[derive(Clone)]
pub struct CoefficientField {
    diffusivity: MatrixField,
    reaction: ScalarField,
    a_min: f64,
}

fn min_eigenvalue(a: [[f64; 2]; 2]) -> f64 {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let diff = 0.5 * (a[0][0] - a[1][1]);
    mean - diff.hypot(a[0][1])
}

impl CoefficientField {
    pub fn new<A, C>(diffusivity: A, reaction: C, a_min: f64) -> Result<Self>
    where
        A: Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static,
        C: Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    {
        if !(a_min > 0.0 && a_min.is_finite()) {
            return Err(Error::InvalidCoefficient(format!("A_min must be positive, got {a_min}")));
        }
        Ok(CoefficientField { diffusivity: Arc::new(diffusivity), reaction: Arc::new(reaction), a_min })
    }

    /// Constant `A` and `c`; `A_min` is the smallest eigenvalue of `A`.
    pub fn constant(a: [[f64; 2]; 2], c: f64) -> Result<Self> {
        let field = Self::new(move |_| a, move |_| c, min_eigenvalue(a))?;
        field.check_at([0.0, 0.0])?;
        Ok(field)
    }

    pub fn identity() -> Self {
        Self::constant([[1.0, 0.0], [0.0, 1.0]], 0.0).expect("identity is admissible")
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    pub fn diffusivity(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        (self.diffusivity)(x)
    }

    pub fn reaction(&self, x: [f64; 2]) -> f64 {
        (self.reaction)(x)
    }

    /// Checks symmetry, ellipticity and `c ≥ 0` at one point.
    pub fn check_at(&self, x: [f64; 2]) -> Result<()> {
        let a = self.diffusivity(x);
        let scale = a[0][0].abs().max(a[1][1].abs()).max(1.0);
        if (a[0][1] - a[1][0]).abs() > 1e-12 * scale {
            return Err(Error::InvalidCoefficient(format!("A is not symmetric at {x:?}")));
        }
        let lambda = min_eigenvalue(a);
        if !(lambda >= self.a_min * (1.0 - 1e-12)) {
            return Err(Error::InvalidCoefficient(format!(
                "ellipticity fails at {x:?}: smallest eigenvalue {lambda} < A_min = {}",
                self.a_min
            )));
        }
        let c = self.reaction(x);
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidCoefficient(format!("c = {c} is negative at {x:?}")));
        }
        Ok(())
    }
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField").field("a_min", &self.a_min).finish_non_exhaustive()
    }
}

/// Impedance coefficients η (tangential) and γ (mass) on Γ0 as functions of
/// arc length, with certified lower bounds.
#[derive(Debug, Clone)]
pub struct ImpedanceField {
    pub eta: BoundaryFunction,
    pub gamma: BoundaryFunction,
    pub eta_min: f64,
    pub gamma_min: f64,
}

impl ImpedanceField {
    pub fn new(eta: BoundaryFunction, gamma: BoundaryFunction, eta_min: f64, gamma_min: f64) -> Result<Self> {
        if !(eta_min > 0.0) {
            return Err(Error::InvalidCoefficient(format!("eta_min must be positive, got {eta_min}")));
        }
        if !(gamma_min > 0.0) {
            return Err(Error::InvalidCoefficient(format!("gamma_min must be positive, got {gamma_min}")));
        }
        Ok(ImpedanceField { eta, gamma, eta_min, gamma_min })
    }

    /// Constant coefficients with the lower bounds set to the values.
    pub fn constant(period: f64, eta: f64, gamma: f64) -> Result<Self> {
        Self::new(
            BoundaryFunction::constant(period, eta)?,
            BoundaryFunction::constant(period, gamma)?,
            eta,
            gamma,
        )
    }

    pub(crate) fn check_at(&self, sigma: f64) -> Result<()> {
        let eta = self.eta.eval(sigma);
        if !(eta >= self.eta_min * (1.0 - 1e-12)) {
            return Err(Error::InvalidCoefficient(format!(
                "eta = {eta} below eta_min = {} at sigma = {sigma}",
                self.eta_min
            )));
        }
        let gamma = self.gamma.eval(sigma);
        if !(gamma >= self.gamma_min * (1.0 - 1e-12)) {
            return Err(Error::InvalidCoefficient(format!(
                "gamma = {gamma} below gamma_min = {} at sigma = {sigma}",
                self.gamma_min
            )));
        }
        Ok(())
    }

    pub(crate) fn check_periodic(&self, period: f64) -> Result<()> {
        for (name, f) in [("eta", &self.eta), ("gamma", &self.gamma)] {
            let (a, b) = (f.eval(0.0), f.eval(period));
            if (a - b).abs() > 1e-10 * a.abs().max(1.0) {
                return Err(Error::InvalidCoefficient(format!(
                    "{name} is not periodic on Γ0: {a} at σ = 0 vs {b} at σ = ℓ"
                )));
            }
        }
        Ok(())
    }
}
