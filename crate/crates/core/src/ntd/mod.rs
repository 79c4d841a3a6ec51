//! Neumann-to-Dirichlet data, impedance recovery from Γ0 Cauchy data, and
//! the injectivity and density probes.

mod probes;
mod recover;

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

pub use probes::{density_probe, injectivity_probe, DensityReport, InjectivityReport};
pub use recover::{recover_impedance, InversionResult, Regularization, TestSpace, Truth};

use crate::error::{Error, Result};
use crate::fem::{assemble_flux_load, edge_gauss_sigma, FormSet};
use crate::freq::{conormal_gamma0, FrequencyOperator};
use crate::geometry::{BoundaryTag, Mesh};
use crate::laplace::{partial_transform, TemporalSignal, Trajectory};
use crate::trig::TrigBasis;

/// Trigonometric fluxes `{1, cos(2πkσ/ℓ₁), sin(2πkσ/ℓ₁), ...}` on Γ1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxBasis {
    basis: TrigBasis,
}

impl FluxBasis {
    pub fn new(mesh: &Mesh, size: usize) -> Result<Self> {
        Ok(FluxBasis { basis: TrigBasis::new(mesh.boundary(BoundaryTag::Outer).length, size)? })
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }

    pub fn label(&self, j: usize) -> String {
        TrigBasis::label(j)
    }

    pub fn eval(&self, j: usize, sigma: f64) -> f64 {
        self.basis.eval(j, sigma)
    }

    pub fn load(&self, mesh: &Mesh, j: usize) -> Vec<f64> {
        assemble_flux_load(mesh, |s| self.basis.eval(j, s))
    }

    /// `∫_{Γ1} f_i f_j dσ` by 2-point Gauss on the Γ1 edges.
    pub fn gram(&self, mesh: &Mesh) -> Vec<Vec<f64>> {
        let n = self.size();
        let mut g = vec![vec![0.0; n]; n];
        for e in mesh.edges_with_tag(BoundaryTag::Outer) {
            let len = e.length(mesh.vertices());
            for s in edge_gauss_sigma(e.sigma) {
                let v: Vec<f64> = (0..n).map(|j| self.eval(j, s)).collect();
                for i in 0..n {
                    for j in 0..n {
                        g[i][j] += 0.5 * len * v[i] * v[j];
                    }
                }
            }
        }
        g
    }
}

/// Γ1 traces, one column per flux.
#[derive(Debug, Clone, PartialEq)]
pub struct NtdDataset {
    pub s: Complex64,
    pub horizon: Option<f64>,
    pub sigma: Vec<f64>,
    pub labels: Vec<String>,
    pub columns: Vec<Vec<Complex64>>,
}

impl NtdDataset {
    /// Rows are Γ1 nodes; columns are `sigma` then `<flux>_re,<flux>_im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma");
        for l in &self.labels {
            let _ = write!(out, ",{l}_re,{l}_im");
        }
        out.push('\n');
        for (i, s) in self.sigma.iter().enumerate() {
            let _ = write!(out, "{s}");
            for c in &self.columns {
                let _ = write!(out, ",{},{}", c[i].re, c[i].im);
            }
            out.push('\n');
        }
        out
    }

    /// Largest entrywise difference over all columns.
    pub fn max_difference(&self, other: &NtdDataset) -> f64 {
        self.columns
            .iter()
            .zip(&other.columns)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.columns.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_real_frequency(s: Complex64, g: Complex64) -> Result<()> {
    if s.im != 0.0 || !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("NtD data needs a real positive s, got {s}")));
    }
    if g.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!("G(s) vanishes at s = {s}")));
    }
    Ok(())
}

/// One frequency solve per flux; columns are Γ1 traces of `U_{f_j}(·, s)`.
pub fn synthesize_ntd(
    mesh: &Mesh,
    forms: &FormSet,
    basis: &FluxBasis,
    s: Complex64,
    alpha: f64,
    signal: &TemporalSignal,
) -> Result<NtdDataset> {
    let g = signal.transform(s);
    check_real_frequency(s, g)?;
    let op = FrequencyOperator::new(forms, s, alpha)?;
    let cycle = mesh.boundary(BoundaryTag::Outer);
    let columns = (0..basis.size())
        .into_par_iter()
        .map(|j| {
            let sol = op.solve_load(&basis.load(mesh, j), g, &basis.label(j))?;
            Ok(cycle.nodes.iter().map(|&n| sol.u[n]).collect())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    Ok(NtdDataset {
        s,
        horizon: None,
        sigma: cycle.sigma.clone(),
        labels: (0..basis.size()).map(|j| basis.label(j)).collect(),
        columns,
    })
}

/// Laplace transforms of the Γ1 trace trajectories cut at `T`.
pub fn truncated_ntd(
    trajectories: &[Trajectory],
    sigma: &[f64],
    labels: &[String],
    horizon: f64,
    s: Complex64,
) -> Result<NtdDataset> {
    if !(horizon >= 1.0) {
        return Err(Error::InvalidArgument(format!("truncation horizon must satisfy T ≥ 1, got {horizon}")));
    }
    let columns = trajectories
        .iter()
        .map(|traj| {
            let n = traj.times.iter().take_while(|&&t| t <= horizon * (1.0 + 1e-12)).count();
            if n == 0 || traj.times[n - 1] < horizon * (1.0 - 1e-12) {
                return Err(Error::InvalidArgument(format!("trajectory does not reach T = {horizon}")));
            }
            let cut = Trajectory { times: traj.times[..n].to_vec(), values: traj.values[..n].to_vec(), source: traj.source };
            partial_transform(&cut, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NtdDataset { s, horizon: Some(horizon), sigma: sigma.to_vec(), labels: labels.to_vec(), columns })
}

/// Γ0 edges in local (cycle) numbering, shared by forward checks and the
/// inverse system.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamma0Edges {
    pub length: f64,
    pub sigma: Vec<f64>,
    /// `(local nodes, σ at the endpoints, edge length)`.
    pub edges: Vec<([usize; 2], [f64; 2], f64)>,
}

impl Gamma0Edges {
    pub fn new(mesh: &Mesh) -> Self {
        let cycle = mesh.boundary(BoundaryTag::Inner);
        let local: HashMap<usize, usize> = cycle.nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        let edges = cycle
            .edges
            .iter()
            .map(|&e| {
                let edge = &mesh.boundary_edges()[e];
                (edge.nodes.map(|n| local[&n]), edge.sigma, edge.length(mesh.vertices()))
            })
            .collect();
        Gamma0Edges { length: cycle.length, sigma: cycle.sigma.clone(), edges }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `B_η(w) u` and `B_γ(w) u` restricted to Γ0 for a weight function `w`,
    /// using the forward edge kernels.
    pub fn apply_forms(&self, w: impl Fn(f64) -> f64, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut tan = vec![0.0; self.len()];
        let mut mass = vec![0.0; self.len()];
        for &(nodes, sigma, len) in &self.edges {
            let gs = edge_gauss_sigma(sigma);
            let wg = [w(gs[0]), w(gs[1])];
            let kt = crate::fem::edge_tangential(len, wg);
            let km = crate::fem::edge_mass(len, wg);
            for a in 0..2 {
                for b in 0..2 {
                    tan[nodes[a]] += kt[a][b] * u[nodes[b]];
                    mass[nodes[a]] += km[a][b] * u[nodes[b]];
                }
            }
        }
        (tan, mass)
    }
}

/// Per-flux Γ0 traces and conormal functionals at one real frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub s: f64,
    pub gamma0: Gamma0Edges,
    pub labels: Vec<String>,
    /// `U_i` at the Γ0 nodes, in cycle order.
    pub traces: Vec<Vec<f64>>,
    /// `∫_{Γ0} φ_j ∂_{ν_A} U_i dσ` for each Γ0 hat `φ_j`.
    pub conormals: Vec<Vec<f64>>,
}

impl CauchyData {
    /// Weak GIBC residual `r + B_η U + B_γ U` for each flux, given (η, γ).
    pub fn gibc_residuals(&self, eta: impl Fn(f64) -> f64, gamma: impl Fn(f64) -> f64) -> Vec<f64> {
        self.traces
            .iter()
            .zip(&self.conormals)
            .map(|(u, r)| {
                let (t, _) = self.gamma0.apply_forms(&eta, u);
                let (_, m) = self.gamma0.apply_forms(&gamma, u);
                let res: Vec<f64> = r.iter().zip(&t).zip(&m).map(|((a, b), c)| a + b + c).collect();
                crate::linalg::norm2(&res) / crate::linalg::norm2(r).max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// Multiplies every trace and conormal value by `1 + level·ξ`, `ξ ~ N(0,1)`.
    pub fn with_noise(&self, level: f64, seed: u64) -> Result<CauchyData> {
        let normal = Normal::new(0.0, level).map_err(|e| Error::InvalidArgument(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for (u, r) in out.traces.iter_mut().zip(out.conormals.iter_mut()) {
            for v in u.iter_mut() {
                *v *= 1.0 + normal.sample(&mut rng);
            }
            for v in r.iter_mut() {
                *v *= 1.0 + normal.sample(&mut rng);
            }
        }
        Ok(out)
    }
}

/// Forward solves for each flux, returning the Γ0 Cauchy pairs.
pub fn gather_cauchy_gamma0(
    mesh: &Mesh,
    forms: &FormSet,
    basis: &FluxBasis,
    s: f64,
    alpha: f64,
    signal: &TemporalSignal,
) -> Result<CauchyData> {
    let sc = Complex64::new(s, 0.0);
    let g = signal.transform(sc);
    check_real_frequency(sc, g)?;
    let op = FrequencyOperator::new(forms, sc, alpha)?;
    let nodes = &mesh.boundary(BoundaryTag::Inner).nodes;
    let pairs = (0..basis.size())
        .into_par_iter()
        .map(|j| {
            let load = basis.load(mesh, j);
            let sol = op.solve_load(&load, g, &basis.label(j))?;
            let cn = conormal_gamma0(mesh, &op, &sol.u, &load, g, |_| 0.0, |_| 0.0);
            let trace: Vec<f64> = nodes.iter().map(|&n| sol.u[n].re).collect();
            Ok((trace, cn.functional.iter().map(|z| z.re).collect()))
        })
        .collect::<Result<Vec<(Vec<f64>, Vec<f64>)>>>()?;
    let (traces, conormals) = pairs.into_iter().unzip();
    Ok(CauchyData {
        s,
        gamma0: Gamma0Edges::new(mesh),
        labels: (0..basis.size()).map(|j| basis.label(j)).collect(),
        traces,
        conormals,
    })
}
