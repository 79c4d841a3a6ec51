use num_complex::Complex64;
use rayon::prelude::*;

use super::{synthesize_ntd, FluxBasis, NtdDataset};
use crate::error::{Error, Result};
use crate::fem::{FormSet, ImpedanceField};
use crate::freq::{FrequencyOperator, SOLVER_TOLERANCE};
use crate::geometry::{BoundaryTag, Mesh};
use crate::laplace::TemporalSignal;
use crate::trig::BoundaryFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    /// Largest Γ1 trace difference over all fluxes.
    pub difference: f64,
    /// `SOLVER_TOLERANCE` times the largest trace magnitude.
    pub floor: f64,
    pub first: NtdDataset,
    pub second: NtdDataset,
}

impl InjectivityReport {
    pub fn separation(&self) -> f64 {
        self.difference / self.floor
    }
}

/// NtD difference between two impedance pairs on the same mesh and volume
/// coefficients.
pub fn injectivity_probe(
    mesh: &Mesh,
    forms: &FormSet,
    first: &ImpedanceField,
    second: &ImpedanceField,
    basis: &FluxBasis,
    s: Complex64,
    alpha: f64,
    signal: &TemporalSignal,
) -> Result<InjectivityReport> {
    let a = forms.with_impedance(mesh, first)?;
    let b = forms.with_impedance(mesh, second)?;
    let da = synthesize_ntd(mesh, &a, basis, s, alpha, signal)?;
    let db = synthesize_ntd(mesh, &b, basis, s, alpha, signal)?;
    let difference = da.max_difference(&db);
    let floor = SOLVER_TOLERANCE * da.max_abs().max(db.max_abs());
    Ok(InjectivityReport { difference, floor, first: da, second: db })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub sizes: Vec<usize>,
    /// `‖t − P_n t‖ / ‖t‖` in L²(Γ0).
    pub residuals: Vec<f64>,
    /// Number of numerically independent traces among the first `n`.
    pub effective_ranks: Vec<usize>,
}

impl DensityReport {
    pub fn non_increasing(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,residual,effective_rank\n");
        for ((n, r), k) in self.sizes.iter().zip(&self.residuals).zip(&self.effective_ranks) {
            out.push_str(&format!("{n},{r},{k}\n"));
        }
        out
    }
}

/// Projects `target` (a function of Γ0 arc length) onto the span of the
/// Γ0 traces of the first `n` fluxes for each `n` in `sizes`. The traces
/// are orthonormalized incrementally (with reorthogonalization) in the Γ0
/// boundary-mass inner product, so nested spans give non-increasing
/// residuals; near-dependent traces are dropped and counted out of the
/// effective rank.
pub fn density_probe(
    mesh: &Mesh,
    forms: &FormSet,
    basis_size: usize,
    sizes: &[usize],
    s: f64,
    alpha: f64,
    signal: &TemporalSignal,
    target: &BoundaryFunction,
) -> Result<DensityReport> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[sizes.len() - 1] > basis_size {
        return Err(Error::InvalidArgument("flux counts must increase and fit the basis".into()));
    }
    let sc = Complex64::new(s, 0.0);
    let g = signal.transform(sc);
    if s <= 0.0 || g.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!("density probe needs real s > 0 with G(s) ≠ 0, got {s}")));
    }
    let basis = FluxBasis::new(mesh, basis_size)?;
    let op = FrequencyOperator::new(forms, sc, alpha)?;
    let cycle = mesh.boundary(BoundaryTag::Inner);
    let n_nodes = mesh.num_vertices();
    let restrict = |full: &[f64]| {
        let mut v = vec![0.0; n_nodes];
        for &i in &cycle.nodes {
            v[i] = full[i];
        }
        v
    };
    let traces: Vec<Vec<f64>> = (0..sizes[sizes.len() - 1])
        .into_par_iter()
        .map(|j| {
            let sol = op.solve_load(&basis.load(mesh, j), g, &basis.label(j))?;
            Ok(restrict(&sol.u.iter().map(|z| z.re).collect::<Vec<_>>()))
        })
        .collect::<Result<_>>()?;
    let gram = &forms.unit_boundary_mass;
    let inner = |a: &[f64], b: &[f64]| -> f64 { gram.matvec(b).iter().zip(a).map(|(x, y)| x * y).sum() };
    let mut t = vec![0.0; n_nodes];
    for (&i, &sg) in cycle.nodes.iter().zip(&cycle.sigma) {
        t[i] = target.eval(sg);
    }
    let t_norm = inner(&t, &t).sqrt();
    if t_norm == 0.0 {
        return Err(Error::InvalidArgument("target vanishes on Γ0".into()));
    }
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut residual = t.clone();
    let (mut residuals, mut ranks) = (Vec::new(), Vec::new());
    let mut next = 0;
    for &n in sizes {
        while next < n {
            let mut v = traces[next].clone();
            let original = inner(&v, &v).sqrt();
            for _ in 0..2 {
                for e in &q {
                    let c = inner(e, &v);
                    v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = inner(&v, &v).sqrt();
            if norm > 1e-10 * original {
                v.iter_mut().for_each(|x| *x /= norm);
                let c = inner(&v, &residual);
                residual.iter_mut().zip(&v).for_each(|(x, y)| *x -= c * y);
                q.push(v);
            }
            next += 1;
        }
        residuals.push(inner(&residual, &residual).max(0.0).sqrt() / t_norm);
        ranks.push(q.len());
    }
    Ok(DensityReport { sizes: sizes.to_vec(), residuals, effective_ranks: ranks })
}
