//! L1 time stepping for the Caputo problem, used as an independent check
//! on the Laplace-domain pipeline.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fem::FormSet;
use crate::laplace::{check_alpha, TemporalSignal, Trajectory, TrajectorySource};
use crate::linalg::{norm2, CsrMatrix, LdltFactor};

/// Largest number of steps `refine_until` may take.
pub const STEP_BUDGET: usize = 1 << 20;

/// `w_k = (k+1)^{1−α} − k^{1−α}` for `k = 0..n`.
pub fn l1_weights(alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one L1 weight".into()));
    }
    let e = 1.0 - alpha;
    Ok((0..n).map(|k| ((k + 1) as f64).powf(e) - (k as f64).powf(e)).collect())
}

/// `M d^α u/dt^α + S u = g(t) ℓ`: the pieces an L1 step needs.
pub trait SteppingSystem {
    fn dim(&self) -> usize;
    fn apply_mass(&self, x: &[f64]) -> Vec<f64>;
    fn load(&self) -> &[f64];
    /// Returns a solver for `(c0 M + S) x = b`.
    fn step_solver(&self, c0: f64) -> Result<Box<dyn Fn(&[f64]) -> Vec<f64> + '_>>;
}

/// Spatial FEM system with `S = K_A + M_c + B_η + B_γ`.
pub struct FemSystem<'a> {
    forms: &'a FormSet,
    static_op: CsrMatrix,
    load: Vec<f64>,
}

impl<'a> FemSystem<'a> {
    pub fn new(forms: &'a FormSet, load: Vec<f64>) -> Self {
        FemSystem { static_op: forms.static_operator(), forms, load }
    }
}

impl SteppingSystem for FemSystem<'_> {
    fn dim(&self) -> usize {
        self.forms.n()
    }

    fn apply_mass(&self, x: &[f64]) -> Vec<f64> {
        self.forms.mass.matvec(x)
    }

    fn load(&self) -> &[f64] {
        &self.load
    }

    fn step_solver(&self, c0: f64) -> Result<Box<dyn Fn(&[f64]) -> Vec<f64> + '_>> {
        let m = CsrMatrix::real_combination(&[(c0, &self.forms.mass), (1.0, &self.static_op)]);
        let factor = LdltFactor::factorize(&m, self.forms.ordering())?;
        Ok(Box::new(move |b| factor.solve(b)))
    }
}

/// Scalar model `d^α y/dt^α + λ y = g(t)`.
pub struct ScalarSystem {
    lambda: f64,
    load: [f64; 1],
}

impl ScalarSystem {
    pub fn new(lambda: f64) -> Self {
        ScalarSystem { lambda, load: [1.0] }
    }
}

impl SteppingSystem for ScalarSystem {
    fn dim(&self) -> usize {
        1
    }

    fn apply_mass(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn load(&self) -> &[f64] {
        &self.load
    }

    fn step_solver(&self, c0: f64) -> Result<Box<dyn Fn(&[f64]) -> Vec<f64> + '_>> {
        let d = c0 + self.lambda;
        if d == 0.0 {
            return Err(Error::SolverBreakdown { pivot: 0, magnitude: 0.0 });
        }
        Ok(Box::new(move |b| vec![b[0] / d]))
    }
}

/// L1 scheme from `u⁰ = 0` on the grid `t_n = n Δt`, `n = 0..=steps`:
/// `(c0 M + S) uⁿ = g(tₙ) ℓ + c0 M [uⁿ⁻¹ − Σ_{k=1}^{n−1} w_k (uⁿ⁻ᵏ − uⁿ⁻ᵏ⁻¹)]`
/// with `c0 = Δt^{−α} / Γ(2−α)`. The full history is kept.
pub fn solve_time_domain<S: SteppingSystem + ?Sized>(
    system: &S,
    alpha: f64,
    signal: &TemporalSignal,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_alpha(alpha)?;
    if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
        return Err(Error::InvalidArgument(format!("bad time grid: dt = {dt}, steps = {steps}")));
    }
    let dim = system.dim();
    let weights = l1_weights(alpha, steps)?;
    let c0 = dt.powf(-alpha) / gamma(2.0 - alpha);
    let solve = system.step_solver(c0)?;
    let load = system.load();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    times.push(0.0);
    values.push(vec![0.0; dim]);
    let mut memory = vec![0.0; dim];
    for n in 1..=steps {
        // memory = uⁿ⁻¹ − Σ_{k=1}^{n−1} w_k d^{n−k}, with d^j = u^j − u^{j−1}
        memory.copy_from_slice(&values[n - 1]);
        for k in 1..n {
            let w = weights[k];
            for (m, d) in memory.iter_mut().zip(&diffs[n - k - 1]) {
                *m -= w * d;
            }
        }
        let t = n as f64 * dt;
        let g = signal.eval(t);
        let mut rhs = system.apply_mass(&memory);
        for (r, l) in rhs.iter_mut().zip(load) {
            *r = c0 * *r + g * l;
        }
        let u = solve(&rhs);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("L1 step {n} produced a non-finite state")));
        }
        diffs.push(u.iter().zip(&values[n - 1]).map(|(a, b)| a - b).collect());
        times.push(t);
        values.push(u);
    }
    Ok(Trajectory { times, values, source: TrajectorySource::L1Oracle })
}

/// Trajectory certified by step halving.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedTrajectory {
    /// Samples at the requested output times from the finest run.
    pub trajectory: Trajectory,
    pub dt: f64,
    /// Successive differences at the output times, relative to the largest
    /// output norm.
    pub differences: Vec<f64>,
}

/// Halves `Δt` from `dt0` until two successive runs differ by less than
/// `tol` at every output time. Output times must be multiples of `dt0`.
/// `tol = ∞` returns the first run.
pub fn refine_until<S: SteppingSystem + ?Sized>(
    system: &S,
    alpha: f64,
    signal: &TemporalSignal,
    outputs: &[f64],
    dt0: f64,
    tol: f64,
) -> Result<RefinedTrajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let t_end = outputs.iter().copied().fold(0.0, f64::max);
    if outputs.is_empty() || !(t_end > 0.0) {
        return Err(Error::InvalidArgument("need at least one positive output time".into()));
    }
    let index = |t: f64, dt: f64| -> Result<usize> {
        let k = (t / dt).round();
        if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::InvalidArgument(format!("output time {t} is not on the grid Δt = {dt}")));
        }
        Ok(k as usize)
    };
    let run = |dt: f64| -> Result<Vec<Vec<f64>>> {
        let steps = (t_end / dt).round() as usize;
        if steps > STEP_BUDGET {
            return Err(Error::BudgetExceeded(format!("{steps} steps > 2^20 at Δt = {dt}")));
        }
        let traj = solve_time_domain(system, alpha, signal, dt, steps)?;
        outputs.iter().map(|&t| index(t, dt).map(|k| traj.values[k].clone())).collect()
    };
    let mut dt = dt0;
    let mut current = run(dt)?;
    let mut differences = Vec::new();
    if tol.is_finite() {
        loop {
            let finer_dt = dt / 2.0;
            let finer = run(finer_dt)?;
            let peak = finer.iter().map(|v| norm2(v)).fold(0.0, f64::max);
            let diff = finer
                .iter()
                .zip(&current)
                .map(|(a, b)| norm2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()))
                .fold(0.0, f64::max);
            let rel = if peak > 0.0 { diff / peak } else { diff };
            differences.push(rel);
            dt = finer_dt;
            current = finer;
            if rel < tol {
                break;
            }
        }
    }
    Ok(RefinedTrajectory {
        trajectory: Trajectory { times: outputs.to_vec(), values: current, source: TrajectorySource::L1Oracle },
        dt,
        differences,
    })
}
