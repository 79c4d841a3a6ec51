use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_alpha, sector_cap};
use crate::error::{Error, Result};

/// Largest ratio `t_max / t_min` served by one set of contour nodes.
const WINDOW_RATIO: f64 = 10.0;

/// Quadrature contour for the Bromwich integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourSpec {
    /// `z(u) = μ(1 + sin(iu − ψ))`, trapezoid in `u` with step `step`;
    /// conjugate symmetry halves the node count.
    Hyperbola { mu: f64, psi: f64, step: f64, nodes: usize },
    /// Vertical line `Re s = abscissa`, Fourier-series trapezoid with
    /// half-period `half_period` and Lanczos smoothing.
    Bromwich { abscissa: f64, half_period: f64, nodes: usize },
}

impl ContourSpec {
    /// Hyperbola tuned for times in `[t_max/10, t_max]`, confined to the
    /// sector `|Arg s| ≤ θ_max`. Falls back to the vertical line when the
    /// sector is too narrow to hold a left-opening hyperbola.
    pub fn for_window(alpha: f64, t_max: f64, nodes: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if !(t_max > 0.0 && t_max.is_finite()) || nodes < 2 {
            return Err(Error::InvalidArgument(format!("bad contour window t_max = {t_max}, N = {nodes}")));
        }
        let psi = 0.8f64.min(sector_cap(alpha) - FRAC_PI_2);
        if psi < 0.05 {
            return Ok(Self::bromwich(t_max, nodes.max(1024)));
        }
        let n = nodes as f64;
        Ok(ContourSpec::Hyperbola { mu: 0.12 * n / t_max, psi, step: 5.0 / n, nodes })
    }

    pub fn bromwich(t_max: f64, nodes: usize) -> Self {
        let half_period = 2.0 * t_max;
        ContourSpec::Bromwich { abscissa: 8.0 / half_period, half_period, nodes }
    }

    pub fn nodes(&self) -> usize {
        match *self {
            ContourSpec::Hyperbola { nodes, .. } | ContourSpec::Bromwich { nodes, .. } => nodes,
        }
    }

    pub fn with_nodes(&self, alpha: f64, t_max: f64, nodes: usize) -> Result<Self> {
        match self {
            ContourSpec::Hyperbola { .. } => Self::for_window(alpha, t_max, nodes),
            ContourSpec::Bromwich { .. } => Ok(Self::bromwich(t_max, nodes)),
        }
    }

    /// Nodes `z_k` and weights `w_k` with `f(t) ≈ Σ Re(w_k e^{z_k t} F(z_k))`.
    pub fn quadrature(&self) -> Vec<(Complex64, Complex64)> {
        match *self {
            ContourSpec::Hyperbola { mu, psi, step, nodes } => (0..nodes)
                .map(|k| {
                    let w = Complex64::new(-psi, k as f64 * step);
                    let z = mu * (1.0 + w.sin());
                    let dz = Complex64::i() * mu * w.cos();
                    let half = if k == 0 { 0.5 } else { 1.0 };
                    // Im(x) = Re(-i x)
                    (z, -Complex64::i() * dz * (half * step / PI))
                })
                .collect(),
            ContourSpec::Bromwich { abscissa, half_period, nodes } => (0..nodes)
                .map(|k| {
                    let z = Complex64::new(abscissa, k as f64 * PI / half_period);
                    let half = if k == 0 { 0.5 } else { 1.0 };
                    let x = k as f64 / nodes as f64;
                    let sigma = if k == 0 { 1.0 } else { (PI * x).sin() / (PI * x) };
                    (z, Complex64::new(half * sigma / half_period, 0.0))
                })
                .collect(),
        }
    }

    /// Rejects node sets that leave the admissible sector.
    pub fn check_sector(&self, alpha: f64) -> Result<()> {
        let cap = sector_cap(alpha);
        for (z, _) in self.quadrature() {
            if !(z.re > 0.0 || z.arg().abs() <= cap) {
                return Err(Error::OutsideSector { s: z, alpha });
            }
        }
        Ok(())
    }
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectorySource {
    ContourInversion,
    L1Oracle,
}

/// Samples `u(·, t_k)` of a real vector-valued function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub source: TrajectorySource,
}

impl Trajectory {
    /// One row per sample: `t v_1 v_2 ...`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, row) in self.times.iter().zip(&self.values) {
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    /// Restriction of every sample to the given components.
    pub fn select(&self, components: &[usize]) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            values: self.values.iter().map(|row| components.iter().map(|&i| row[i]).collect()).collect(),
            source: self.source,
        }
    }
}

pub type Evaluator<'a> = dyn Fn(Complex64) -> Result<Vec<Complex64>> + Sync + 'a;

fn evaluate_nodes(spec: &ContourSpec, evaluator: &Evaluator<'_>) -> Result<Vec<(Complex64, Complex64, Vec<Complex64>)>> {
    spec.quadrature()
        .into_par_iter()
        .map(|(z, w)| evaluator(z).map(|v| (z, w, v)))
        .collect()
}

fn combine(samples: &[(Complex64, Complex64, Vec<Complex64>)], t: f64) -> Vec<f64> {
    let dim = samples.first().map_or(0, |s| s.2.len());
    let mut out = vec![0.0; dim];
    for (z, w, v) in samples {
        let c = w * (z * t).exp();
        for (o, x) in out.iter_mut().zip(v) {
            *o += (c * x).re;
        }
    }
    out
}

/// Groups positive times into windows with `t_max / t_min ≤ 10`; returns
/// index ranges into the sorted time list.
fn windows(times: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut i = times.iter().position(|&t| t > 0.0).unwrap_or(times.len());
    while i < times.len() {
        let limit = times[i] * WINDOW_RATIO;
        let mut j = i + 1;
        while j < times.len() && times[j] <= limit {
            j += 1;
        }
        out.push(i..j);
        i = j;
    }
    out
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("output times must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Inverts with one fixed contour for all times. Times `≤ 0` give zero.
pub fn invert(spec: &ContourSpec, alpha: f64, evaluator: &Evaluator<'_>, times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    spec.check_sector(alpha)?;
    let samples = evaluate_nodes(spec, evaluator)?;
    let dim = samples.first().map_or(0, |s| s.2.len());
    let values = times.iter().map(|&t| if t <= 0.0 { vec![0.0; dim] } else { combine(&samples, t) }).collect();
    Ok(Trajectory { times: times.to_vec(), values, source: TrajectorySource::ContourInversion })
}

/// Per-window record of the self-validating inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    pub windows: Vec<WindowReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub t_min: f64,
    pub t_max: f64,
    pub nodes: usize,
    /// Max difference between the last two node counts, relative to the
    /// largest value in the window.
    pub agreement: f64,
    pub spec: ContourSpec,
}

/// Windowed inversion with the node count doubled from `initial_nodes`
/// until two successive results agree to `tol` (relative to the window
/// peak). Fails when `max_nodes` is reached first.
pub fn invert_adaptive(
    alpha: f64,
    evaluator: &Evaluator<'_>,
    times: &[f64],
    tol: f64,
    initial_nodes: usize,
    max_nodes: usize,
) -> Result<(Trajectory, InversionReport)> {
    check_times(times)?;
    check_alpha(alpha)?;
    let mut values: Vec<Option<Vec<f64>>> = vec![None; times.len()];
    let mut reports = Vec::new();
    for range in windows(times) {
        let ts = &times[range.clone()];
        let t_max = *ts.last().expect("nonempty window");
        let mut spec = ContourSpec::for_window(alpha, t_max, initial_nodes)?;
        spec.check_sector(alpha)?;
        let mut previous: Vec<Vec<f64>> = {
            let samples = evaluate_nodes(&spec, evaluator)?;
            ts.iter().map(|&t| combine(&samples, t)).collect()
        };
        loop {
            let n = spec.nodes() * 2;
            if n > max_nodes {
                return Err(Error::BudgetExceeded(format!(
                    "contour inversion on [{}, {t_max}] did not self-agree to {tol} within {max_nodes} nodes",
                    ts[0]
                )));
            }
            let next_spec = spec.with_nodes(alpha, t_max, n)?;
            next_spec.check_sector(alpha)?;
            let samples = evaluate_nodes(&next_spec, evaluator)?;
            let next: Vec<Vec<f64>> = ts.iter().map(|&t| combine(&samples, t)).collect();
            let peak = next.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = next.iter().flatten().zip(previous.iter().flatten()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let agreement = if peak > 0.0 { diff / peak } else { diff };
            spec = next_spec;
            previous = next;
            if agreement <= tol {
                reports.push(WindowReport { t_min: ts[0], t_max, nodes: n, agreement, spec });
                break;
            }
        }
        for (slot, v) in values[range].iter_mut().zip(previous) {
            *slot = Some(v);
        }
    }
    let dim = values.iter().flatten().next().map_or_else(
        || evaluator(Complex64::new(1.0, 0.0)).map(|v| v.len()),
        |v| Ok(v.len()),
    )?;
    let values = values.into_iter().map(|v| v.unwrap_or_else(|| vec![0.0; dim])).collect();
    Ok((
        Trajectory { times: times.to_vec(), values, source: TrajectorySource::ContourInversion },
        InversionReport { windows: reports },
    ))
}
