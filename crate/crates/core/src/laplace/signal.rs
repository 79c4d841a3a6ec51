use std::fmt;

use num_complex::Complex64;
use statrs::function::factorial::factorial;

use crate::error::{Error, Result};

/// One term `weight · t^q e^{−βt}` of a causal forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalTerm {
    pub weight: f64,
    pub q: u32,
    pub beta: f64,
}

/// Temporal forcing `g(t) = Σ w t^q e^{−βt}` for `t > 0`, zero for `t ≤ 0`.
/// Every term has `q ≥ 1`, so `g(0) = 0` and `|G(s)| = O(|s|^{-2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSignal {
    terms: Vec<SignalTerm>,
}

impl TemporalSignal {
    pub fn new(terms: Vec<SignalTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("temporal signal needs at least one term".into()));
        }
        for t in &terms {
            if t.q < 1 {
                return Err(Error::InvalidArgument(format!(
                    "unsupported signal t^{} e^(-{} t): the family requires q ≥ 1",
                    t.q, t.beta
                )));
            }
            if !(t.beta >= 0.0 && t.beta.is_finite() && t.weight.is_finite()) {
                return Err(Error::InvalidArgument(format!("signal needs β ≥ 0, got {}", t.beta)));
            }
        }
        Ok(TemporalSignal { terms })
    }

    /// `t^q e^{−βt}`.
    pub fn monomial_exp(q: u32, beta: f64) -> Result<Self> {
        Self::new(vec![SignalTerm { weight: 1.0, q, beta }])
    }

    pub fn terms(&self) -> &[SignalTerm] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|a| a.weight * t.powi(a.q as i32) * (-a.beta * t).exp()).sum()
    }

    /// Closed-form transform `Σ w q! / (s+β)^{q+1}`.
    pub fn transform(&self, s: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|a| a.weight * factorial(a.q as u64) / (s + a.beta).powi(a.q as i32 + 1))
            .sum()
    }

    /// Decay exponent `p = min(q+1)`.
    pub fn decay_exponent(&self) -> f64 {
        self.terms.iter().map(|a| a.q + 1).min().unwrap_or(2) as f64
    }
}

impl fmt::Display for TemporalSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*t^{}*exp(-{}t)", a.weight, a.q, a.beta)?;
        }
        Ok(())
    }
}

/// Measured `sup |G(s)| |s|^p` over the sample rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub p: f64,
    pub constant: f64,
}

/// Samples `|G(s)| |s|^p` on the rays `Arg s ∈ {0, ±π/4, ±(π/2 − 0.01)}` for
/// `|s| ∈ [1, 10⁴]` and rejects `G` if the product keeps growing over the
/// last two decades.
pub fn verify_decay<F: Fn(Complex64) -> Complex64>(g: F, p: f64) -> Result<DecayCertificate> {
    if !(p > 1.0) {
        return Err(Error::DecayFailure(format!("decay exponent must exceed 1, got {p}")));
    }
    let half = std::f64::consts::FRAC_PI_2;
    let rays = [0.0, half / 2.0, -half / 2.0, half - 0.01, -(half - 0.01)];
    let per_decade = 10;
    let mut constant: f64 = 0.0;
    for &angle in &rays {
        let values: Vec<(f64, f64)> = (0..=4 * per_decade)
            .map(|k| {
                let r = 10f64.powf(k as f64 / per_decade as f64);
                (r, g(Complex64::from_polar(r, angle)).norm() * r.powf(p))
            })
            .collect();
        if let Some(&(r, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::DecayFailure(format!("G is not finite at |s| = {r}, Arg s = {angle}")));
        }
        let tail = &values[2 * per_decade..];
        let (r0, v0) = tail[0];
        let (r1, v1) = tail[tail.len() - 1];
        if v0 > 0.0 && v1 > 0.0 {
            let slope = (v1 / v0).ln() / (r1 / r0).ln();
            if slope > 0.05 {
                return Err(Error::DecayFailure(format!(
                    "|G(s)|·|s|^{p} grows like |s|^{slope:.3} along Arg s = {angle:.3}"
                )));
            }
        }
        constant = values.iter().fold(constant, |m, &(_, v)| m.max(v));
    }
    Ok(DecayCertificate { p, constant })
}
