//! Caputo symbol, temporal forcing transforms and numerical Laplace inversion.

mod contour;
mod partial;
mod signal;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

pub use contour::{invert, invert_adaptive, ContourSpec, InversionReport, Trajectory, TrajectorySource};
pub use partial::{partial_transform, truncation_decay_study, DecayFit, TruncationStudy};
pub use signal::{verify_decay, DecayCertificate, SignalTerm, TemporalSignal};

use crate::error::{Error, Result};

/// Margin kept between contour nodes and the edge of the coercivity sector.
pub const SECTOR_MARGIN: f64 = 0.1;

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fractional order must satisfy α ∈ (0,1), got {alpha}")))
    }
}

/// `θ_max = min(π, π/(2α)) − 0.1`.
pub fn sector_cap(alpha: f64) -> f64 {
    PI.min(FRAC_PI_2 / alpha) - SECTOR_MARGIN
}

/// Frequencies accepted by the solver: the open right half-plane plus the
/// sector `|Arg s| ≤ θ_max` on which `cos(α Arg s)` stays positive.
pub fn is_admissible(s: Complex64, alpha: f64) -> bool {
    s != Complex64::new(0.0, 0.0) && s.is_finite() && (s.re > 0.0 || s.arg().abs() <= sector_cap(alpha))
}

pub fn check_admissible(s: Complex64, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if is_admissible(s, alpha) {
        Ok(())
    } else {
        Err(Error::OutsideSector { s, alpha })
    }
}

/// Principal branch `s^α = |s|^α e^{iα Arg s}`.
pub fn caputo_symbol(s: Complex64, alpha: f64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s^α is undefined at s = {s}")));
    }
    if s.im == 0.0 && s.re > 0.0 {
        return Ok(Complex64::new(s.re.powf(alpha), 0.0));
    }
    Ok(Complex64::from_polar(s.norm().powf(alpha), alpha * s.arg()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symbol_examples() {
        let half = |s| caputo_symbol(s, 0.5).unwrap();
        assert_eq!(half(Complex64::new(1.0, 0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(half(Complex64::new(4.0, 0.0)), Complex64::new(2.0, 0.0));
        let z = half(Complex64::new(1.0, 1.0));
        let expected = Complex64::from_polar(2f64.powf(0.25), PI / 8.0);
        assert!((z - expected).norm() < 1e-15);
        assert!(caputo_symbol(Complex64::new(0.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible(Complex64::new(1.0, 0.4), 0.5));
        assert!(is_admissible(Complex64::new(-1.0, 1.0), 0.5));
        assert!(!is_admissible(Complex64::new(-1.0, 1.0), 0.9));
        assert!(!is_admissible(Complex64::new(0.0, 0.0), 0.5));
        assert!(check_alpha(1.5).unwrap_err().to_string().contains("α ∈ (0,1)"));
        assert!((sector_cap(0.25) - (PI - 0.1)).abs() < 1e-15);
        assert!((sector_cap(0.75) - (2.0 * PI / 3.0 - 0.1)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn symbol_is_multiplicative_on_positive_axis(a in 1e-3f64..1e3, b in 1e-3f64..1e3, alpha in 0.01f64..0.99) {
            let lhs = caputo_symbol(Complex64::new(a * b, 0.0), alpha).unwrap();
            let rhs = caputo_symbol(Complex64::new(a, 0.0), alpha).unwrap()
                * caputo_symbol(Complex64::new(b, 0.0), alpha).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-14 * lhs.norm());
        }
    }
}
