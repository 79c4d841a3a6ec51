use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FrequencyOperator;
use crate::error::{Error, Result};
use crate::fem::FormSet;
use crate::laplace::{caputo_symbol, check_admissible};

/// Sampled coercivity margins at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub s: Complex64,
    pub alpha: f64,
    /// Lower bound on `Re(e^{−iα Arg s}(a_s + b)(U,U)) / ‖U‖²`: for
    /// `Re s > 0`, `cos(απ/2)·C·min(1, Re(s)^α)`; for sector points with
    /// `Re s ≤ 0`, `cos(α|Arg s|)·C·min(1, |s|^α)`. `C = min(1, A_min, η_min, γ_min)`.
    pub bound: f64,
    /// `Re(e^{−iα Arg s}(a_s + b)(U,U)) − bound` for unit-norm samples.
    pub margins: Vec<f64>,
}

impl CoercivityReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self) -> bool {
        self.min_margin() >= -1e-10
    }
}

pub fn coercivity_bound(forms: &FormSet, s: Complex64, alpha: f64) -> f64 {
    let c = forms.bounds.constant();
    if s.re > 0.0 {
        (alpha * FRAC_PI_2).cos() * c * 1f64.min(s.re.powf(alpha))
    } else {
        (alpha * s.arg().abs()).cos() * c * 1f64.min(s.norm().powf(alpha))
    }
}

/// Evaluates the rotated energy on `n_samples` random complex vectors,
/// normalized in the H¹(D1, Γ0) graph norm.
pub fn coercivity_check(forms: &FormSet, s: Complex64, alpha: f64, n_samples: usize, seed: u64) -> Result<CoercivityReport> {
    check_admissible(s, alpha)?;
    let symbol = caputo_symbol(s, alpha)?;
    let rotation = Complex64::from_polar(1.0, -alpha * s.arg());
    let bound = coercivity_bound(forms, s, alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = forms.n();
    let margins = (0..n_samples.max(1))
        .map(|_| {
            let mut u: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let norm = forms.graph_norm(&u);
            u.iter_mut().for_each(|z| *z /= norm);
            let static_part = forms.stiffness.quadratic_form(&u)
                + forms.reaction_mass.quadratic_form(&u)
                + forms.tangential.quadratic_form(&u)
                + forms.boundary_mass.quadratic_form(&u);
            let energy = static_part + symbol * forms.mass.quadratic_form(&u);
            (rotation * energy).re - bound
        })
        .collect();
    Ok(CoercivityReport { s, alpha, bound, margins })
}

/// One point of the stability sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySample {
    pub s: Complex64,
    pub alpha: f64,
    pub norm: f64,
    /// `‖U‖ / (|G(s)| ‖ℓ̂‖_*)` divided by `sec(απ/2) / min(1, Re(s)^α)`.
    pub ratio: f64,
}

/// Solves for `G(s) ℓ̂` and normalizes the graph norm of the solution by
/// the stability-estimate shape. `‖ℓ̂‖_*` is the dual graph norm of the load.
pub fn stability_ratio(forms: &FormSet, load: &[f64], s: Complex64, alpha: f64, g_value: Complex64) -> Result<StabilitySample> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("the stability estimate needs Re s > 0, got s = {s}")));
    }
    let op = FrequencyOperator::new(forms, s, alpha)?;
    let sol = op.solve_load(load, g_value, "stability")?;
    let norm = forms.graph_norm(&sol.u);
    let shape = 1.0 / ((alpha * FRAC_PI_2).cos() * 1f64.min(s.re.powf(alpha)));
    let ratio = norm / (g_value.norm() * forms.load_dual_norm(load)?) / shape;
    Ok(StabilitySample { s, alpha, norm, ratio })
}
