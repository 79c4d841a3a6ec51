use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

const ARC_LENGTH_TOL: f64 = 1e-12;
const POSITIVITY_SAMPLES: usize = 4096;

/// Radial profile of a star-shaped curve, as a function of the polar angle
/// about the curve center.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Circle { radius: f64 },
    /// Axis-aligned ellipse with semi-axes along x and y.
    Ellipse { semi_x: f64, semi_y: f64 },
    /// `r(θ) = mean + Σ_k cos[k-1]·cos(kθ) + sin[k-1]·sin(kθ)`.
    Star { mean: f64, cos: Vec<f64>, sin: Vec<f64> },
}

impl Shape {
    fn radius_and_derivative(&self, theta: f64) -> (f64, f64) {
        match self {
            Shape::Circle { radius } => (*radius, 0.0),
            Shape::Ellipse { semi_x, semi_y } => {
                let (s, c) = theta.sin_cos();
                let q = (semi_y * c).powi(2) + (semi_x * s).powi(2);
                let r = semi_x * semi_y / q.sqrt();
                let dq = (semi_x * semi_x - semi_y * semi_y) * (2.0 * theta).sin();
                (r, -0.5 * r * dq / q)
            }
            Shape::Star { mean, cos, sin } => {
                let mut r = *mean;
                let mut dr = 0.0;
                let n = cos.len().max(sin.len());
                for k in 1..=n {
                    let a = cos.get(k - 1).copied().unwrap_or(0.0);
                    let b = sin.get(k - 1).copied().unwrap_or(0.0);
                    let (s, c) = (k as f64 * theta).sin_cos();
                    r += a * c + b * s;
                    dr += k as f64 * (b * c - a * s);
                }
                (r, dr)
            }
        }
    }
}

/// A closed, counterclockwise, star-shaped C² curve
/// `x(θ) = center + r(θ)·(cos θ, sin θ)`, θ ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    center: [f64; 2],
    shape: Shape,
    length: f64,
}

impl Curve {
    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(center, Shape::Circle { radius })
    }

    pub fn ellipse(center: [f64; 2], semi_x: f64, semi_y: f64) -> Result<Self> {
        Self::new(center, Shape::Ellipse { semi_x, semi_y })
    }

    pub fn star(center: [f64; 2], mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(center, Shape::Star { mean, cos, sin })
    }

    /// Validates the shape and computes its length.
    pub fn new(center: [f64; 2], shape: Shape) -> Result<Self> {
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(Error::InvalidCurve("center must be finite".into()));
        }
        match &shape {
            Shape::Circle { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidCurve(format!("nonpositive radius {radius}")));
                }
            }
            Shape::Ellipse { semi_x, semi_y } => {
                if !(*semi_x > 0.0 && *semi_y > 0.0 && semi_x.is_finite() && semi_y.is_finite()) {
                    return Err(Error::InvalidCurve(format!(
                        "nonpositive semi-axes ({semi_x}, {semi_y})"
                    )));
                }
            }
            Shape::Star { .. } => {
                // A star curve is simple exactly when its radius stays positive.
                for i in 0..POSITIVITY_SAMPLES {
                    let theta = TAU * i as f64 / POSITIVITY_SAMPLES as f64;
                    let (r, _) = shape.radius_and_derivative(theta);
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(Error::InvalidCurve(format!(
                            "star radius {r:.3e} at angle {theta:.4} is not positive; curve self-intersects"
                        )));
                    }
                }
            }
        }
        let mut curve = Curve { center, shape, length: 0.0 };
        curve.length = curve.arc_length(0.0, TAU);
        Ok(curve)
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Total arc length ℓ.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.shape.radius_and_derivative(theta).0
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        let (s, c) = theta.sin_cos();
        [self.center[0] + r * c, self.center[1] + r * s]
    }

    /// |x'(θ)|.
    pub fn speed(&self, theta: f64) -> f64 {
        let (r, dr) = self.shape.radius_and_derivative(theta);
        r.hypot(dr)
    }

    /// Arc length between two polar angles.
    pub fn arc_length(&self, from: f64, to: f64) -> f64 {
        integrate_adaptive(|t| self.speed(t), from, to, ARC_LENGTH_TOL)
    }

    /// Polar angle at which the arc length measured from θ = 0 equals `sigma`.
    pub fn angle_at_arc_length(&self, sigma: f64) -> f64 {
        let mut theta = TAU * sigma / self.length;
        for _ in 0..50 {
            let step = (self.arc_length(0.0, theta) - sigma) / self.speed(theta);
            theta -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        theta
    }

    /// Whether `p` lies strictly inside the curve.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx.hypot(dy) < self.radius(dy.atan2(dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_lengths() {
        let c = Curve::circle([0.0, 0.0], 1.0).unwrap();
        assert!((c.length() - 2.0 * PI).abs() < 1e-12);
        let c = Curve::circle([0.3, -0.2], 0.5).unwrap();
        assert!((c.length() - PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(Curve::circle([0.0, 0.0], 0.0).is_err());
        assert!(Curve::ellipse([0.0, 0.0], 0.5, -0.1).is_err());
        // 0.2 + 0.3 cos 2θ dips below zero.
        assert!(Curve::star([0.0, 0.0], 0.2, vec![0.0, 0.3], vec![]).is_err());
    }

    #[test]
    fn star_with_single_mode_matches_circle_when_coefficients_vanish() {
        let s = Curve::star([0.0, 0.0], 0.7, vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!((s.length() - 1.4 * PI).abs() < 1e-12);
    }

    #[test]
    fn angle_inverts_arc_length() {
        let e = Curve::ellipse([0.0, 0.0], 0.5, 0.3).unwrap();
        for &frac in &[0.1, 0.37, 0.5, 0.93] {
            let sigma = frac * e.length();
            let theta = e.angle_at_arc_length(sigma);
            assert!((e.arc_length(0.0, theta) - sigma).abs() < 1e-12);
        }
    }

    #[test]
    fn contains_is_strict() {
        let c = Curve::circle([0.0, 0.0], 1.0).unwrap();
        assert!(c.contains([0.5, 0.5]));
        assert!(!c.contains([1.0, 0.5]));
    }
}
