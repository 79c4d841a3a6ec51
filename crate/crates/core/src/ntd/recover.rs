use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::CauchyData;
use crate::error::{Error, Result};
use crate::trig::{BoundaryFunction, TrigBasis, TrigSeries};

/// Test functions on Γ0 used to form the inverse system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSpace {
    /// One row per P1 hat at each Γ0 node.
    Hats,
    /// Rows combined into the first `n` trigonometric modes on Γ0 (as P1
    /// interpolants). Smooth tests avoid differentiating noisy traces.
    Trig(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// Fixed Tikhonov parameter; `0` is plain least squares.
    Fixed(f64),
    /// λ chosen so the residual equals `tau` times the expected noise norm
    /// for multiplicative noise of relative size `noise_level`.
    Discrepancy { noise_level: f64, tau: f64 },
}

/// Known coefficients, for error reporting.
#[derive(Debug, Clone)]
pub struct Truth {
    pub eta: BoundaryFunction,
    pub gamma: BoundaryFunction,
}

#[derive(Debug, Clone)]
pub struct InversionResult {
    pub eta: TrigSeries,
    pub gamma: TrigSeries,
    pub lambda: f64,
    pub residual: f64,
    pub relative_residual: f64,
    /// Residual norm the discrepancy principle aimed for, if used.
    pub target_residual: Option<f64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub test_space: TestSpace,
    /// Smallest value of η̂ on a fine σ grid; negative values indicate
    /// under-regularization.
    pub eta_min: f64,
    pub eta_error: Option<f64>,
    pub gamma_error: Option<f64>,
}

impl InversionResult {
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "eta_coefficients = {}", join(self.eta.coeffs()));
        let _ = writeln!(out, "gamma_coefficients = {}", join(self.gamma.coeffs()));
        let _ = writeln!(out, "lambda = {}", self.lambda);
        let _ = writeln!(out, "residual = {}", self.residual);
        let _ = writeln!(out, "relative_residual = {}", self.relative_residual);
        if let Some(t) = self.target_residual {
            let _ = writeln!(out, "target_residual = {t}");
        }
        let _ = writeln!(out, "rank = {} / {}", self.rank, self.singular_values.len());
        let _ = writeln!(out, "singular_values = {}", join(&self.singular_values));
        let _ = writeln!(out, "eta_min_on_grid = {}", self.eta_min);
        if self.eta_min < 0.0 {
            let _ = writeln!(out, "warning = recovered eta is negative somewhere");
        }
        if let Some(e) = self.eta_error {
            let _ = writeln!(out, "eta_relative_linf_error = {e}");
        }
        if let Some(e) = self.gamma_error {
            let _ = writeln!(out, "gamma_relative_linf_error = {e}");
        }
        out
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Dense per-flux operators `B(w)` on Γ0 for each basis weight.
fn basis_operators(data: &CauchyData, basis: &TrigBasis, tangential: bool) -> Vec<DMatrix<f64>> {
    let n = data.gamma0.len();
    (0..basis.size())
        .map(|k| {
            let mut m = DMatrix::zeros(n, n);
            for &(nodes, sigma, len) in &data.gamma0.edges {
                let gs = crate::fem::edge_gauss_sigma(sigma);
                let w = [basis.eval(k, gs[0]), basis.eval(k, gs[1])];
                let local = if tangential {
                    crate::fem::edge_tangential(len, w)
                } else {
                    crate::fem::edge_mass(len, w)
                };
                for a in 0..2 {
                    for b in 0..2 {
                        m[(nodes[a], nodes[b])] += local[a][b];
                    }
                }
            }
            m
        })
        .collect()
}

fn test_matrix(data: &CauchyData, test: TestSpace) -> Result<DMatrix<f64>> {
    let n = data.gamma0.len();
    match test {
        TestSpace::Hats => Ok(DMatrix::identity(n, n)),
        TestSpace::Trig(m) => {
            let basis = TrigBasis::new(data.gamma0.length, m)?;
            Ok(DMatrix::from_fn(m, n, |i, j| basis.eval(i, data.gamma0.sigma[j])))
        }
    }
}

struct System {
    a: DMatrix<f64>,
    b: DVector<f64>,
    /// Per data block: test matrix, traces, conormals and the operators
    /// needed for the noise estimate.
    blocks: Vec<Block>,
}

struct Block {
    test: DMatrix<f64>,
    traces: Vec<DVector<f64>>,
    conormals: Vec<DVector<f64>>,
    eta_ops: Vec<DMatrix<f64>>,
    gamma_ops: Vec<DMatrix<f64>>,
}

fn build_system(data: &[CauchyData], m_eta: usize, m_gamma: usize, test: TestSpace) -> Result<System> {
    let cols = m_eta + m_gamma;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let mut blocks = Vec::new();
    for d in data {
        let eta_basis = TrigBasis::new(d.gamma0.length, m_eta)?;
        let gamma_basis = TrigBasis::new(d.gamma0.length, m_gamma)?;
        let eta_ops = basis_operators(d, &eta_basis, true);
        let gamma_ops = basis_operators(d, &gamma_basis, false);
        let p = test_matrix(d, test)?;
        let mut block = Block { test: p.clone(), traces: Vec::new(), conormals: Vec::new(), eta_ops, gamma_ops };
        for (u, r) in d.traces.iter().zip(&d.conormals) {
            let u = DVector::from_column_slice(u);
            let r = DVector::from_column_slice(r);
            let columns: Vec<DVector<f64>> =
                block.eta_ops.iter().chain(&block.gamma_ops).map(|op| &p * (op * &u)).collect();
            let pr = -(&p * &r);
            for i in 0..p.nrows() {
                rows.push(columns.iter().map(|c| c[i]).collect());
                rhs.push(pr[i]);
            }
            block.traces.push(u);
            block.conormals.push(r);
        }
        blocks.push(block);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no Cauchy data".into()));
    }
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    Ok(System { a, b: DVector::from_vec(rhs), blocks })
}

/// Expected residual norm at coefficients `x` under multiplicative noise
/// of relative size `level` on traces and conormals.
fn noise_norm(system: &System, x: &DVector<f64>, m_eta: usize, level: f64) -> f64 {
    let mut total = 0.0;
    for block in &system.blocks {
        let mut op = DMatrix::<f64>::zeros(block.test.ncols(), block.test.ncols());
        for (k, m) in block.eta_ops.iter().enumerate() {
            op += m * x[k];
        }
        for (k, m) in block.gamma_ops.iter().enumerate() {
            op += m * x[m_eta + k];
        }
        let pop = &block.test * op;
        for (u, r) in block.traces.iter().zip(&block.conormals) {
            for i in 0..pop.nrows() {
                for j in 0..pop.ncols() {
                    total += (pop[(i, j)] * u[j]).powi(2) + (block.test[(i, j)] * r[j]).powi(2);
                }
            }
        }
    }
    level * total.sqrt()
}

struct Svd {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v_t: DMatrix<f64>,
}

impl Svd {
    fn solve(&self, b: &DVector<f64>, lambda: f64, rank: usize) -> DVector<f64> {
        let utb = self.u.transpose() * b;
        let mut y = DVector::zeros(self.sigma.len());
        for i in 0..rank {
            let s = self.sigma[i];
            y[i] = s / (s * s + lambda) * utb[i];
        }
        self.v_t.transpose() * y
    }
}

/// Least-squares recovery of trigonometric (η, γ) coefficients from
/// `rows: r + B_η(η̂)U + B_γ(γ̂)U = 0` tested against `test`, with Tikhonov
/// term `λ‖x‖²`.
pub fn recover_impedance(
    data: &[CauchyData],
    m_eta: usize,
    m_gamma: usize,
    test: TestSpace,
    regularization: Regularization,
    truth: Option<&Truth>,
) -> Result<InversionResult> {
    if m_eta == 0 || m_gamma == 0 {
        return Err(Error::InvalidArgument("basis sizes must be at least 1".into()));
    }
    let system = build_system(data, m_eta, m_gamma, test)?;
    let cols = m_eta + m_gamma;
    if system.a.nrows() < cols {
        return Err(Error::RankDeficient { rank: system.a.nrows(), columns: cols });
    }
    let svd = system.a.clone().svd(true, true);
    let svd = Svd {
        u: svd.u.expect("requested"),
        sigma: svd.singular_values,
        v_t: svd.v_t.expect("requested"),
    };
    // nalgebra returns singular values in descending order.
    let s_max = svd.sigma[0];
    let rank = svd.sigma.iter().filter(|&&s| s > 1e-12 * s_max).count();
    let residual_of = |x: &DVector<f64>| (&system.a * x - &system.b).norm();
    let (lambda, target) = match regularization {
        Regularization::Fixed(l) => {
            if !(l >= 0.0) {
                return Err(Error::InvalidArgument(format!("λ must be nonnegative, got {l}")));
            }
            if l == 0.0 && rank < cols {
                return Err(Error::RankDeficient { rank, columns: cols });
            }
            (l, None)
        }
        Regularization::Discrepancy { noise_level, tau } => {
            let x0 = svd.solve(&system.b, 0.0, rank);
            let target = tau * noise_norm(&system, &x0, m_eta, noise_level);
            let (mut lo, mut hi) = ((s_max * s_max * 1e-14).ln(), (s_max * s_max * 1e4).ln());
            if residual_of(&svd.solve(&system.b, lo.exp(), cols)) >= target {
                (if rank < cols { lo.exp() } else { 0.0 }, Some(target))
            } else {
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if residual_of(&svd.solve(&system.b, mid.exp(), cols)) > target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                (lo.exp(), Some(target))
            }
        }
    };
    let x = svd.solve(&system.b, lambda, if lambda == 0.0 { rank } else { cols });
    let residual = residual_of(&x);
    let period = data[0].gamma0.length;
    let eta = TrigSeries::new(period, x.as_slice()[..m_eta].to_vec())?;
    let gamma = TrigSeries::new(period, x.as_slice()[m_eta..].to_vec())?;
    let grid: Vec<f64> = (0..2048).map(|k| period * k as f64 / 2048.0).collect();
    let eta_min = grid.iter().map(|&s| eta.eval(s)).fold(f64::INFINITY, f64::min);
    let rel = |est: &TrigSeries, truth: &BoundaryFunction| {
        let err = grid.iter().map(|&s| (est.eval(s) - truth.eval(s)).abs()).fold(0.0, f64::max);
        let scale = grid.iter().map(|&s| truth.eval(s).abs()).fold(0.0, f64::max);
        err / scale
    };
    Ok(InversionResult {
        eta_error: truth.map(|t| rel(&eta, &t.eta)),
        gamma_error: truth.map(|t| rel(&gamma, &t.gamma)),
        eta,
        gamma,
        lambda,
        residual,
        relative_residual: residual / system.b.norm().max(f64::MIN_POSITIVE),
        target_residual: target,
        rank,
        singular_values: svd.sigma.iter().copied().collect(),
        test_space: test,
        eta_min,
    })
}
