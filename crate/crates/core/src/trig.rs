//! Real trigonometric basis on a periodic arc-length interval, used for
//! impedance coefficients on Γ0 and flux patterns on Γ1.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `{1, cos(2πσ/ℓ), sin(2πσ/ℓ), cos(4πσ/ℓ), sin(4πσ/ℓ), ...}` truncated to `size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigBasis {
    period: f64,
    size: usize,
}

impl TrigBasis {
    pub fn new(period: f64, size: usize) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("basis period must be positive, got {period}")));
        }
        if size == 0 {
            return Err(Error::InvalidArgument("basis size must be at least 1".into()));
        }
        Ok(TrigBasis { period, size })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn eval(&self, j: usize, sigma: f64) -> f64 {
        if j == 0 {
            return 1.0;
        }
        let k = j.div_ceil(2);
        let arg = TAU * k as f64 * sigma / self.period;
        if j % 2 == 1 {
            arg.cos()
        } else {
            arg.sin()
        }
    }

    pub fn label(j: usize) -> String {
        match j {
            0 => "1".to_string(),
            j if j % 2 == 1 => format!("cos{}", j.div_ceil(2)),
            j => format!("sin{}", j / 2),
        }
    }
}

/// Finite expansion in a [`TrigBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    basis: TrigBasis,
    coeffs: Vec<f64>,
}

impl TrigSeries {
    pub fn new(period: f64, coeffs: Vec<f64>) -> Result<Self> {
        let basis = TrigBasis::new(period, coeffs.len())?;
        Ok(TrigSeries { basis, coeffs })
    }

    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::new(period, vec![value])
    }

    pub fn basis(&self) -> TrigBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(j, &c)| c * self.basis.eval(j, sigma)).sum()
    }
}

/// A real function of arc length on a boundary curve.
#[derive(Clone)]
pub enum BoundaryFunction {
    Series(TrigSeries),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl BoundaryFunction {
    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Ok(BoundaryFunction::Series(TrigSeries::constant(period, value)?))
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        BoundaryFunction::Custom(Arc::new(f))
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        match self {
            BoundaryFunction::Series(s) => s.eval(sigma),
            BoundaryFunction::Custom(f) => f(sigma),
        }
    }

    /// Pointwise scaled copy.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            BoundaryFunction::Series(s) => BoundaryFunction::Series(TrigSeries {
                basis: s.basis,
                coeffs: s.coeffs.iter().map(|c| c * factor).collect(),
            }),
            BoundaryFunction::Custom(f) => {
                let f = f.clone();
                BoundaryFunction::custom(move |s| factor * f(s))
            }
        }
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &BoundaryFunction) -> Self {
        let (a, b) = (self.clone(), other.clone());
        BoundaryFunction::custom(move |s| a.eval(s) + b.eval(s))
    }
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryFunction::Series(s) => f.debug_tuple("Series").field(s).finish(),
            BoundaryFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl From<TrigSeries> for BoundaryFunction {
    fn from(s: TrigSeries) -> Self {
        BoundaryFunction::Series(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_ordering_and_labels() {
        let b = TrigBasis::new(2.0, 5).unwrap();
        assert_eq!(b.eval(0, 0.3), 1.0);
        assert!((b.eval(1, 0.5) - (std::f64::consts::PI * 0.5).cos()).abs() < 1e-15);
        assert!((b.eval(4, 0.25) - (std::f64::consts::PI * 0.5).sin()).abs() < 1e-15);
        assert_eq!(TrigBasis::label(3), "cos2");
        assert_eq!(TrigBasis::label(4), "sin2");
    }

    #[test]
    fn series_is_periodic() {
        let s = TrigSeries::new(1.7, vec![1.0, 0.5, -0.25, 0.1]).unwrap();
        assert!((s.eval(0.0) - s.eval(1.7)).abs() < 1e-14);
    }
}
