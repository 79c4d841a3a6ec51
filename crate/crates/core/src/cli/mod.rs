//! Configuration-driven study runner behind the `fracgibc` binary.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::json;

pub use config::{
    config_hash, parse_config, CoefficientConfig, Config, CurveSpec, FluxConfig, FrequencyConfig, GeometryConfig,
    ImpedanceConfig, InversionConfig, StudyConfig,
};

use crate::error::{Error, Result};
use crate::fem::FormSet;
use crate::freq::{coercivity_check, solution_to_text, stability_ratio, trace, FrequencyOperator};
use crate::geometry::{build_annulus_mesh, mesh_to_string, BoundaryTag, Mesh};
use crate::laplace::{invert_adaptive, truncation_decay_study, Trajectory};
use crate::ntd::{gather_cauchy_gamma0, recover_impedance, synthesize_ntd, FluxBasis, Truth};
use crate::time::{refine_until, solve_time_domain, FemSystem};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Upper limit on contour nodes for `invert-laplace`.
const MAX_CONTOUR_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Mesh,
    SolveFreq,
    SolveTime,
    InvertLaplace,
    Ntd,
    InvertImpedance,
    StudyCoercivity,
    StudyTruncation,
    StudyConvergence,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Mesh,
        Command::SolveFreq,
        Command::SolveTime,
        Command::InvertLaplace,
        Command::Ntd,
        Command::InvertImpedance,
        Command::StudyCoercivity,
        Command::StudyTruncation,
        Command::StudyConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::SolveFreq => "solve-freq",
            Command::SolveTime => "solve-time",
            Command::InvertLaplace => "invert-laplace",
            Command::Ntd => "ntd",
            Command::InvertImpedance => "invert-impedance",
            Command::StudyCoercivity => "study-coercivity",
            Command::StudyTruncation => "study-truncation",
            Command::StudyConvergence => "study-convergence",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command '{s}'")))
    }
}

/// Process exit status for an error: 2 for bad input, 3 for a failed
/// numerical invariant, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidCurve(_)
        | Error::InvalidMesh(_)
        | Error::InvalidCoefficient(_)
        | Error::OutsideSector { .. } => 2,
        Error::SolverBreakdown { .. }
        | Error::DecayFailure(_)
        | Error::RankDeficient { .. }
        | Error::BudgetExceeded(_)
        | Error::Invariant(_) => 3,
        Error::Io(_) => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Files written by one command, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
}

struct Context {
    cfg: Config,
    command: Command,
    config_path: PathBuf,
    out_dir: PathBuf,
    seed: u64,
    outputs: Vec<String>,
}

impl Context {
    fn header(&self) -> String {
        format!(
            "# fracgibc {VERSION} {} config_sha256={} seed={}\n",
            self.command.name(),
            self.cfg.hash,
            self.seed
        )
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.out_dir.join(name), format!("{}{}", self.header(), body))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn mesh(&self) -> Result<Mesh> {
        mesh_for(&self.cfg, self.cfg.geometry.h)
    }

    fn forms(&self, mesh: &Mesh) -> Result<FormSet> {
        let imp = self.cfg.impedance.field(mesh.boundary(BoundaryTag::Inner).length)?;
        FormSet::assemble(mesh, &self.cfg.coefficient_field()?, &imp)
    }

    fn flux_load(&self, mesh: &Mesh) -> Result<(FluxBasis, Vec<f64>)> {
        let basis = FluxBasis::new(mesh, self.cfg.flux.basis_size)?;
        let load = basis.load(mesh, self.cfg.flux.mode);
        Ok((basis, load))
    }

    /// Rewrites `manifest.jsonl`, keeping one line per command in name order.
    fn write_manifest(&self) -> Result<()> {
        let path = self.out_dir.join("manifest.jsonl");
        let mut lines: Vec<String> = match fs::read_to_string(&path) {
            Ok(text) => text
                .lines()
                .filter(|l| {
                    serde_json::from_str::<serde_json::Value>(l)
                        .map(|v| v["command"] != self.command.name())
                        .unwrap_or(false)
                })
                .map(str::to_string)
                .collect(),
            Err(_) => Vec::new(),
        };
        let modules: serde_json::Map<String, serde_json::Value> =
            ["geometry", "fem", "freq", "laplace", "time", "ntd", "cli"]
                .iter()
                .map(|m| (m.to_string(), json!(VERSION)))
                .collect();
        let entry = json!({
            "command": self.command.name(),
            "config": self.config_path.display().to_string(),
            "config_sha256": self.cfg.hash,
            "seed": self.seed,
            "outputs": self.outputs,
            "modules": modules,
        });
        lines.push(entry.to_string());
        lines.sort_by_key(|l| {
            serde_json::from_str::<serde_json::Value>(l).map(|v| v["command"].to_string()).unwrap_or_default()
        });
        let mut text = lines.join("\n");
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

fn mesh_for(cfg: &Config, h: f64) -> Result<Mesh> {
    build_annulus_mesh(&cfg.geometry.outer.build()?, &cfg.geometry.inner.build()?, h)
}

/// Parses the config and runs one command. Outputs are written even when a
/// study check fails; the failure is returned afterwards.
pub fn run(command: Command, opts: &RunOptions) -> Result<RunSummary> {
    let text = fs::read_to_string(&opts.config)?;
    let cfg = parse_config(&text)?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir)?;
    let seed = opts.seed.unwrap_or(cfg.inversion.seed);
    let mut ctx = Context { cfg, command, config_path: opts.config.clone(), out_dir, seed, outputs: Vec::new() };
    let outcome = match command {
        Command::Mesh => run_mesh(&mut ctx),
        Command::SolveFreq => run_solve_freq(&mut ctx),
        Command::SolveTime => run_solve_time(&mut ctx),
        Command::InvertLaplace => run_invert_laplace(&mut ctx),
        Command::Ntd => run_ntd(&mut ctx),
        Command::InvertImpedance => run_invert_impedance(&mut ctx),
        Command::StudyCoercivity => run_study_coercivity(&mut ctx),
        Command::StudyTruncation => run_study_truncation(&mut ctx),
        Command::StudyConvergence => run_study_convergence(&mut ctx),
    };
    if !ctx.outputs.is_empty() {
        ctx.write_manifest()?;
    }
    outcome.map(|()| RunSummary { out_dir: ctx.out_dir, outputs: ctx.outputs })
}

fn run_mesh(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    ctx.write("mesh.txt", &mesh_to_string(&mesh))
}

fn complex_csv(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

fn trace_csv(trace: &[(f64, Complex64)]) -> String {
    let mut out = String::from("sigma,re,im\n");
    for (s, z) in trace {
        let _ = writeln!(out, "{s},{}", complex_csv(*z));
    }
    out
}

fn run_solve_freq(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    let (basis, load) = ctx.flux_load(&mesh)?;
    let alpha = ctx.cfg.frequency.alpha;
    let label = basis.label(ctx.cfg.flux.mode);
    let mut summary = String::from("index,s_re,s_im,graph_norm,stability_ratio\n");
    for (k, &s) in ctx.cfg.frequency.s.clone().iter().enumerate() {
        let g = ctx.cfg.flux.signal.transform(s);
        let sol = FrequencyOperator::new(&forms, s, alpha)?.solve_load(&load, g, &label)?;
        let ratio = if s.re > 0.0 {
            stability_ratio(&forms, &load, s, alpha, g)?.ratio.to_string()
        } else {
            String::new()
        };
        let _ = writeln!(summary, "{k},{},{},{ratio}", complex_csv(s), forms.graph_norm(&sol.u));
        ctx.write(&format!("solution_{k}.txt"), &format!("# x y re im\n{}", solution_to_text(&mesh, &sol.u)))?;
        ctx.write(&format!("trace_gamma1_{k}.csv"), &trace_csv(&trace(&mesh, &sol.u, BoundaryTag::Outer)))?;
        ctx.write(&format!("trace_gamma0_{k}.csv"), &trace_csv(&trace(&mesh, &sol.u, BoundaryTag::Inner)))?;
    }
    ctx.write("frequency_summary.csv", &summary)
}

fn trajectory_text(traj: &Trajectory, sigma: &[f64]) -> String {
    let mut out = String::from("# t, then the Γ1 trace at sigma =");
    for s in sigma {
        let _ = write!(out, " {s}");
    }
    out.push('\n');
    out + &traj.to_text()
}

fn run_solve_time(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    let (_, load) = ctx.flux_load(&mesh)?;
    let f = &ctx.cfg.frequency;
    let system = FemSystem::new(&forms, load);
    let refined = refine_until(&system, f.alpha, &ctx.cfg.flux.signal, &f.times, f.dt, f.time_tol)?;
    let cycle = mesh.boundary(BoundaryTag::Outer);
    let gamma1 = refined.trajectory.select(&cycle.nodes);
    let mut report = String::from("level,difference\n");
    for (k, d) in refined.differences.iter().enumerate() {
        let _ = writeln!(report, "{k},{d}");
    }
    let _ = writeln!(report, "# final dt = {}", refined.dt);
    ctx.write("time_gamma1.txt", &trajectory_text(&gamma1, &cycle.sigma))?;
    ctx.write("time_refinement.csv", &report)
}

fn run_invert_laplace(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    let (basis, load) = ctx.flux_load(&mesh)?;
    let f = ctx.cfg.frequency.clone();
    let signal = ctx.cfg.flux.signal.clone();
    let cycle = mesh.boundary(BoundaryTag::Outer);
    let label = basis.label(ctx.cfg.flux.mode);
    let evaluator = |z: Complex64| -> Result<Vec<Complex64>> {
        let sol = FrequencyOperator::new(&forms, z, f.alpha)?.solve_load(&load, signal.transform(z), &label)?;
        Ok(cycle.nodes.iter().map(|&n| sol.u[n]).collect())
    };
    let (traj, report) = invert_adaptive(f.alpha, &evaluator, &f.times, f.contour_tol, f.contour_nodes, MAX_CONTOUR_NODES)?;
    let mut windows = String::from("t_min,t_max,nodes,agreement\n");
    for w in &report.windows {
        let _ = writeln!(windows, "{},{},{},{}", w.t_min, w.t_max, w.nodes, w.agreement);
    }
    ctx.write("contour_gamma1.txt", &trajectory_text(&traj, &cycle.sigma))?;
    ctx.write("contour_windows.csv", &windows)
}

fn run_ntd(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    if let Some(s) = ctx.cfg.frequency.s.iter().find(|s| s.im != 0.0 || !(s.re > 0.0)) {
        return Err(Error::InvalidArgument(format!("NtD data needs real positive frequencies, got {s}")));
    }
    let basis = FluxBasis::new(&mesh, ctx.cfg.flux.basis_size)?;
    for (k, &s) in ctx.cfg.frequency.s.clone().iter().enumerate() {
        let data = synthesize_ntd(&mesh, &forms, &basis, s, ctx.cfg.frequency.alpha, &ctx.cfg.flux.signal)?;
        ctx.write(&format!("ntd_{k}.csv"), &data.to_csv())?;
    }
    Ok(())
}

fn run_invert_impedance(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    let basis = FluxBasis::new(&mesh, ctx.cfg.flux.basis_size)?;
    let inv = ctx.cfg.inversion.clone();
    let period = mesh.boundary(BoundaryTag::Inner).length;
    let (eta, gamma) = ctx.cfg.impedance.functions(period)?;
    let mut data = gather_cauchy_gamma0(&mesh, &forms, &basis, inv.s, ctx.cfg.frequency.alpha, &ctx.cfg.flux.signal)?;
    if inv.noise > 0.0 {
        data = data.with_noise(inv.noise, ctx.seed)?;
    }
    let truth = Truth { eta, gamma };
    let result = recover_impedance(&[data], inv.eta_modes, inv.gamma_modes, inv.test, inv.regularization, Some(&truth))?;
    let mut report = format!("noise = {}\nfluxes = {}\ns = {}\n", inv.noise, basis.size(), inv.s);
    report.push_str(&result.to_report());
    ctx.write("impedance_report.txt", &report)
}

/// The frequency grid of the coercivity and stability studies.
pub fn study_grid() -> Vec<Complex64> {
    [(0.5, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 0.4), (1.0, -0.4), (2.0, 0.8), (2.0, -0.8)]
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect()
}

fn run_study_coercivity(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    let mut csv = String::from("alpha,s_re,s_im,sample,margin,bound\n");
    let mut worst = f64::INFINITY;
    for &alpha in &ctx.cfg.study.alphas {
        for s in study_grid() {
            let report = coercivity_check(&forms, s, alpha, ctx.cfg.study.samples, ctx.seed)?;
            for (k, m) in report.margins.iter().enumerate() {
                let _ = writeln!(csv, "{alpha},{},{k},{m},{}", complex_csv(s), report.bound);
            }
            worst = worst.min(report.min_margin());
        }
    }
    ctx.write("coercivity.csv", &csv)?;
    if worst < -1e-10 {
        return Err(Error::Invariant(format!("coercivity margin {worst} is negative")));
    }
    Ok(())
}

fn run_study_truncation(ctx: &mut Context) -> Result<()> {
    let mesh = ctx.mesh()?;
    let forms = ctx.forms(&mesh)?;
    let (basis, load) = ctx.flux_load(&mesh)?;
    let alpha = ctx.cfg.frequency.alpha;
    let s = ctx.cfg.frequency.s[0];
    if s.im != 0.0 || !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("the truncation study needs a real positive first s, got {s}")));
    }
    let signal = ctx.cfg.flux.signal.clone();
    let study = &ctx.cfg.study;
    let dt = study.truncation_dt;
    let t_end = *study.horizons.last().expect("validated horizons");
    let steps = (t_end / dt).round() as usize;
    let system = FemSystem::new(&forms, load.clone());
    let nodes = &mesh.boundary(BoundaryTag::Outer).nodes;
    let traj = solve_time_domain(&system, alpha, &signal, dt, steps)?.select(nodes);
    let sol = FrequencyOperator::new(&forms, s, alpha)?.solve_load(&load, signal.transform(s), &basis.label(ctx.cfg.flux.mode))?;
    let exact: Vec<Complex64> = nodes.iter().map(|&n| sol.u[n]).collect();
    let result = truncation_decay_study(
        &traj,
        &exact,
        &mesh.boundary_node_weights(BoundaryTag::Outer),
        s,
        &study.horizons,
        alpha,
        signal.decay_exponent(),
    )?;
    ctx.write("truncation.csv", &result.to_csv())?;
    ctx.write(
        "truncation_fit.csv",
        &format!(
            "m,power,rate,expected_rate,monotone,within_bound\n{},{},{},{},{},{}\n",
            result.m,
            result.fit.power,
            result.fit.rate,
            s.re,
            result.monotone(),
            result.within_bound()
        ),
    )?;
    if !result.monotone() || !result.within_bound() {
        return Err(Error::Invariant("truncation errors are not monotone or exceed the calibrated bound".into()));
    }
    Ok(())
}

/// Periodic linear interpolation of `(σ, value)` samples.
fn interpolate_periodic(samples: &[(f64, Complex64)], period: f64, sigma: f64) -> Complex64 {
    // samples start at σ = 0, so k ≥ 1
    let x = sigma.rem_euclid(period);
    let k = samples.partition_point(|p| p.0 <= x);
    let a = samples[k - 1];
    let b = if k == samples.len() { (period, samples[0].1) } else { samples[k] };
    let w = (x - a.0) / (b.0 - a.0);
    a.1 * (1.0 - w) + b.1 * w
}

fn run_study_convergence(ctx: &mut Context) -> Result<()> {
    let alpha = ctx.cfg.frequency.alpha;
    let s = ctx.cfg.frequency.s[0];
    let mut levels = Vec::new();
    for &h in &ctx.cfg.study.h_list.clone() {
        let mesh = mesh_for(&ctx.cfg, h)?;
        let forms = ctx.forms(&mesh)?;
        let (basis, load) = ctx.flux_load(&mesh)?;
        let g = ctx.cfg.flux.signal.transform(s);
        let sol = FrequencyOperator::new(&forms, s, alpha)?.solve_load(&load, g, &basis.label(ctx.cfg.flux.mode))?;
        let ratio = if s.re > 0.0 { Some(stability_ratio(&forms, &load, s, alpha, g)?.ratio) } else { None };
        levels.push((h, mesh.num_vertices(), forms.graph_norm(&sol.u), trace(&mesh, &sol.u, BoundaryTag::Outer), ratio));
    }
    let finest = levels.iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("validated h list").clone();
    let period = ctx.cfg.geometry.outer.build()?.length();
    let reference = &finest.3;
    let mut csv = String::from("h,nodes,graph_norm,trace_difference,stability_ratio\n");
    for (h, n, norm, tr, ratio) in &levels {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(sigma, v) in tr {
            let r = interpolate_periodic(reference, period, sigma);
            num += (v - r).norm_sqr();
            den += r.norm_sqr();
        }
        let ratio = ratio.map_or(String::new(), |r| r.to_string());
        let _ = writeln!(csv, "{h},{n},{norm},{},{ratio}", (num / den).sqrt());
    }
    ctx.write("convergence.csv", &csv)
}

/// Runs a command and maps the outcome to a process exit status, printing
/// a summary or the error.
pub fn main_with(command: &str, opts: &RunOptions) -> i32 {
    let outcome = Command::from_str(command).and_then(|c| run(c, opts));
    match outcome {
        Ok(summary) => {
            for o in &summary.outputs {
                println!("{}", Path::new(&summary.out_dir).join(o).display());
            }
            0
        }
        Err(e) => {
            eprintln!("fracgibc {command}: {e}");
            exit_code(&e)
        }
    }
}
