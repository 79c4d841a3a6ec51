use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::contour::Trajectory;
use crate::error::{Error, Result};

/// `∫₀ᵀ u(t) e^{−st} dt` by the trapezoid rule on the trajectory's own
/// samples, with `T` the last sample time. A causal zero sample is
/// prepended when the trajectory starts after `t = 0`.
pub fn partial_transform(trajectory: &Trajectory, s: Complex64) -> Result<Vec<Complex64>> {
    let (times, values) = (&trajectory.times, &trajectory.values);
    if times.is_empty() {
        return Err(Error::InvalidArgument("partial transform of an empty trajectory".into()));
    }
    if s.re <= 0.0 {
        return Err(Error::InvalidArgument(format!("partial transform needs Re s > 0, got {s}")));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("trajectory times must be nonnegative and increasing".into()));
    }
    let dim = values[0].len();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut prev_t = 0.0;
    let mut prev: Vec<Complex64> = if times[0] == 0.0 {
        values[0].iter().map(|&v| Complex64::new(v, 0.0)).collect()
    } else {
        vec![Complex64::new(0.0, 0.0); dim]
    };
    let start = usize::from(times[0] == 0.0);
    for (&t, row) in times.iter().zip(values).skip(start) {
        let e = (-s * t).exp();
        let half = 0.5 * (t - prev_t);
        for ((a, p), &v) in acc.iter_mut().zip(prev.iter_mut()).zip(row) {
            let cur = e * v;
            *a += half * (*p + cur);
            *p = cur;
        }
        prev_t = t;
    }
    Ok(acc)
}

/// Result of fitting `log e(T) = a + m log T − r T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub log_constant: f64,
    pub power: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationStudy {
    pub horizons: Vec<f64>,
    pub errors: Vec<f64>,
    /// `C_cal T^m e^{−Re(s) T}` with `C_cal` fixed at the first horizon.
    pub bounds: Vec<f64>,
    pub m: u32,
    pub fit: DecayFit,
}

impl TruncationStudy {
    pub fn monotone(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }

    pub fn within_bound(&self) -> bool {
        self.errors.iter().zip(&self.bounds).all(|(e, b)| *e <= b * (1.0 + 1e-12))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,error,bound\n");
        for ((t, e), b) in self.horizons.iter().zip(&self.errors).zip(&self.bounds) {
            let _ = writeln!(out, "{t},{e},{b}");
        }
        out
    }
}

/// Truncation errors `‖U(s) − Ũ_T(s)‖` for each horizon `T`, measured in
/// the weighted norm `sqrt(Σ w_i |x_i|²)`, and the decay fit. The
/// trajectory must cover the largest horizon; `m = ⌈α + |1 − p|⌉`.
pub fn truncation_decay_study(
    trajectory: &Trajectory,
    exact: &[Complex64],
    weights: &[f64],
    s: Complex64,
    horizons: &[f64],
    alpha: f64,
    p: f64,
) -> Result<TruncationStudy> {
    if horizons.len() < 3 || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("need at least three increasing horizons".into()));
    }
    if horizons[0] < 1.0 {
        return Err(Error::InvalidArgument(format!("horizons must satisfy T ≥ 1, got {}", horizons[0])));
    }
    let last = *trajectory.times.last().ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    if last < horizons[horizons.len() - 1] * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!("trajectory ends at {last}, before the last horizon")));
    }
    let mut errors = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let n = trajectory.times.iter().take_while(|&&t| t <= horizon * (1.0 + 1e-12)).count();
        let cut = Trajectory {
            times: trajectory.times[..n].to_vec(),
            values: trajectory.values[..n].to_vec(),
            source: trajectory.source,
        };
        let partial = partial_transform(&cut, s)?;
        let e2: f64 = exact.iter().zip(&partial).zip(weights).map(|((a, b), w)| w * (a - b).norm_sqr()).sum();
        errors.push(e2.sqrt());
    }
    let floor = 1e-13 * exact.iter().zip(weights).map(|(a, w)| w * a.norm_sqr()).sum::<f64>().sqrt();
    if errors.iter().any(|&e| e <= floor) {
        return Err(Error::InvalidArgument(
            "truncation error reached the floating-point floor; shrink the horizon list".into(),
        ));
    }
    let m = (alpha + (1.0 - p).abs()).ceil() as u32;
    let c_cal = errors[0] / (horizons[0].powi(m as i32) * (-s.re * horizons[0]).exp());
    let bounds = horizons.iter().map(|&t| c_cal * t.powi(m as i32) * (-s.re * t).exp()).collect();
    let design = DMatrix::from_fn(horizons.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => horizons[i].ln(),
        _ => -horizons[i],
    });
    let rhs = DVector::from_iterator(errors.len(), errors.iter().map(|e| e.ln()));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Invariant(format!("decay fit failed: {e}")))?;
    Ok(TruncationStudy {
        horizons: horizons.to_vec(),
        errors,
        bounds,
        m,
        fit: DecayFit { log_constant: coef[0], power: coef[1], rate: coef[2] },
    })
}

#[cfg(test)]
mod tests {
    use super::super::TrajectorySource;
    use super::*;

    fn ramp(t_end: f64, n: usize) -> Trajectory {
        let times: Vec<f64> = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
        let values = times.iter().map(|&t| vec![t, 2.0 * t]).collect();
        Trajectory { times, values, source: TrajectorySource::L1Oracle }
    }

    #[test]
    fn ramp_partial_transform_matches_closed_form() {
        let s = Complex64::new(1.0, 0.0);
        let exact = 1.0 - 6.0 * (-5.0f64).exp();
        let coarse = partial_transform(&ramp(5.0, 20_000), s).unwrap();
        let fine = partial_transform(&ramp(5.0, 40_000), s).unwrap();
        assert!((fine[0].re - exact).abs() < 1e-8);
        assert!((fine[0] - coarse[0]).norm() < 1e-8);
        assert!((fine[1] - 2.0 * fine[0]).norm() < 1e-14);
    }

    #[test]
    fn ramp_truncation_study() {
        let traj = ramp(8.0, 80_000);
        let s = Complex64::new(1.0, 0.0);
        let exact = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let study = truncation_decay_study(&traj, &exact, &[1.0, 0.0], s, &[1.0, 2.0, 4.0, 8.0], 0.5, 2.0).unwrap();
        assert!(study.monotone());
        assert_eq!(study.m, 2);
        assert!(study.within_bound());
        assert!((study.fit.rate - 1.0).abs() < 0.1, "{:?}", study.fit);
        assert!(study.to_csv().starts_with("T,error,bound\n1,"));
        let doubled = truncation_decay_study(&traj, &exact, &[0.0, 1.0], s, &[1.0, 2.0, 4.0, 8.0], 0.5, 2.0).unwrap();
        for (a, b) in study.errors.iter().zip(&doubled.errors) {
            assert!((b - 2.0 * a).abs() < 1e-10 * b);
        }
        assert!(truncation_decay_study(&traj, &exact, &[1.0, 0.0], s, &[0.5, 2.0, 4.0], 0.5, 2.0).is_err());
    }
}
