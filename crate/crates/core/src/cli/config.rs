//! INI-style study configuration.

use std::collections::BTreeMap;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::{CoefficientField, ImpedanceField};
use crate::geometry::{Curve, Shape};
use crate::laplace::{check_alpha, is_admissible, TemporalSignal};
use crate::ntd::{Regularization, TestSpace};
use crate::trig::{BoundaryFunction, TrigSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub center: [f64; 2],
    pub shape: Shape,
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve> {
        Curve::new(self.center, self.shape.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub outer: CurveSpec,
    pub inner: CurveSpec,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientConfig {
    pub a: [[f64; 2]; 2],
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceConfig {
    /// Trigonometric coefficients on Γ0 in the order 1, cos1, sin1, cos2, ...
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub eta_min: f64,
    pub gamma_min: f64,
}

impl ImpedanceConfig {
    pub fn field(&self, period: f64) -> Result<ImpedanceField> {
        ImpedanceField::new(
            BoundaryFunction::Series(TrigSeries::new(period, self.eta.clone())?),
            BoundaryFunction::Series(TrigSeries::new(period, self.gamma.clone())?),
            self.eta_min,
            self.gamma_min,
        )
    }

    pub fn functions(&self, period: f64) -> Result<(BoundaryFunction, BoundaryFunction)> {
        Ok((
            BoundaryFunction::Series(TrigSeries::new(period, self.eta.clone())?),
            BoundaryFunction::Series(TrigSeries::new(period, self.gamma.clone())?),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxConfig {
    pub basis_size: usize,
    /// Index of the flux used by single-flux commands.
    pub mode: usize,
    pub signal: TemporalSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyConfig {
    pub alpha: f64,
    pub s: Vec<Complex64>,
    pub times: Vec<f64>,
    pub contour_nodes: usize,
    pub contour_tol: f64,
    pub dt: f64,
    pub time_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    pub eta_modes: usize,
    pub gamma_modes: usize,
    pub regularization: Regularization,
    pub noise: f64,
    pub seed: u64,
    pub test: TestSpace,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub alphas: Vec<f64>,
    pub samples: usize,
    pub horizons: Vec<f64>,
    pub h_list: Vec<f64>,
    pub truncation_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub geometry: GeometryConfig,
    pub coefficients: CoefficientConfig,
    pub impedance: ImpedanceConfig,
    pub flux: FluxConfig,
    pub frequency: FrequencyConfig,
    pub inversion: InversionConfig,
    pub study: StudyConfig,
    pub output_dir: Option<String>,
    /// SHA-256 of the configuration text.
    pub hash: String,
}

impl Config {
    pub fn coefficient_field(&self) -> Result<CoefficientField> {
        CoefficientField::constant(self.coefficients.a, self.coefficients.c)
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("geometry", &["outer", "inner", "outer_center", "inner_center", "h"]),
    ("coefficients", &["a", "c"]),
    ("impedance", &["eta", "gamma", "eta_min", "gamma_min"]),
    ("flux", &["basis_size", "mode", "q", "beta"]),
    ("frequency", &["alpha", "s", "times", "contour_nodes", "contour_tol", "dt", "time_tol"]),
    ("inversion", &["eta_modes", "gamma_modes", "lambda", "noise", "seed", "test", "tau", "s"]),
    ("study", &["alphas", "samples", "horizons", "h_list", "truncation_dt"]),
    ("output", &["dir"]),
];

struct Raw {
    values: BTreeMap<(String, String), (usize, String)>,
}

impl Raw {
    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.values.get(&(section.to_string(), key.to_string()))
    }

    fn parse<T>(&self, section: &str, key: &str, default: T, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        match self.get(section, key) {
            None => Ok(default),
            Some((line, text)) => {
                f(text).map_err(|m| Error::Parse { line: *line, message: format!("[{section}] {key}: {m}") })
            }
        }
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map_or(0, |v| v.0)
    }
}

fn floats(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect()
}

fn float(text: &str) -> std::result::Result<f64, String> {
    match floats(text)?.as_slice() {
        [x] => Ok(*x),
        _ => Err(format!("expected one number, got '{text}'")),
    }
}

fn integer(text: &str) -> std::result::Result<u64, String> {
    text.trim().parse::<u64>().map_err(|_| format!("'{}' is not a nonnegative integer", text.trim()))
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`.
fn complex(text: &str) -> std::result::Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("'{text}' is not a complex number");
    if let Some(body) = t.strip_suffix('i') {
        let split = body.char_indices().skip(1).filter(|&(k, c)| (c == '+' || c == '-') && !body[..k].ends_with(['e', 'E'])).last();
        let (re, im) = match split {
            Some((k, _)) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

fn complexes(text: &str) -> std::result::Result<Vec<Complex64>, String> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).map(complex).collect()
}

fn shape(text: &str) -> std::result::Result<Shape, String> {
    let mut parts = text.split_whitespace();
    let kind = parts.next().ok_or("missing curve kind")?;
    let nums = floats(&parts.collect::<Vec<_>>().join(" "))?;
    match (kind, nums.as_slice()) {
        ("circle", [r]) => Ok(Shape::Circle { radius: *r }),
        ("ellipse", [a, b]) => Ok(Shape::Ellipse { semi_x: *a, semi_y: *b }),
        ("star", [mean, rest @ ..]) if rest.len() % 2 == 0 => Ok(Shape::Star {
            mean: *mean,
            cos: rest.iter().step_by(2).copied().collect(),
            sin: rest.iter().skip(1).step_by(2).copied().collect(),
        }),
        _ => Err(format!(
            "expected 'circle r', 'ellipse a b' or 'star r0 c1 s1 c2 s2 ...', got '{text}'"
        )),
    }
}

fn point(text: &str) -> std::result::Result<[f64; 2], String> {
    match floats(text)?.as_slice() {
        [x, y] => Ok([*x, *y]),
        _ => Err("expected two numbers".into()),
    }
}

/// Certified lower bound `c₀ − Σ_{k≥1} |c_k|` of a trigonometric series.
fn series_lower_bound(c: &[f64]) -> f64 {
    c[0] - c[1..].iter().map(|x| x.abs()).sum::<f64>()
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut values = BTreeMap::new();
    let mut section: Option<String> = None;
    for (k, raw_line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw_line.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line: line_no, message: format!("malformed section header '{line}'") })?
                .trim()
                .to_lowercase();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(Error::Parse { line: line_no, message: format!("unknown section [{name}]") });
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: line_no, message: format!("expected 'key = value', got '{line}'") })?;
        let key = key.trim().to_lowercase();
        let sec = section
            .clone()
            .ok_or_else(|| Error::Parse { line: line_no, message: format!("key '{key}' appears before any section") })?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Parse { line: line_no, message: format!("unknown key '{key}' in [{sec}]") });
        }
        if values.insert((sec.clone(), key.clone()), (line_no, value.trim().to_string())).is_some() {
            return Err(Error::Parse { line: line_no, message: format!("duplicate key '{key}' in [{sec}]") });
        }
    }
    let raw = Raw { values };
    let err = |sec: &str, key: &str, message: String| Error::Parse { line: raw.line(sec, key), message };

    // [geometry]
    let outer = CurveSpec {
        center: raw.parse("geometry", "outer_center", [0.0, 0.0], point)?,
        shape: raw.parse("geometry", "outer", Shape::Circle { radius: 1.0 }, shape)?,
    };
    let inner = CurveSpec {
        center: raw.parse("geometry", "inner_center", [0.0, 0.0], point)?,
        shape: raw.parse("geometry", "inner", Shape::Circle { radius: 0.5 }, shape)?,
    };
    for (key, spec) in [("outer", &outer), ("inner", &inner)] {
        spec.build().map_err(|e| err("geometry", key, e.to_string()))?;
    }
    let h = raw.parse("geometry", "h", 0.05, float)?;
    if !(h > 0.0) {
        return Err(err("geometry", "h", format!("mesh size h must be positive, got {h}")));
    }

    // [coefficients]
    let a = raw.parse("coefficients", "a", vec![1.0, 0.0, 0.0, 1.0], floats)?;
    if a.len() != 4 {
        return Err(err("coefficients", "a", "A needs four entries a11 a12 a21 a22".into()));
    }
    let a = [[a[0], a[1]], [a[2], a[3]]];
    let c = raw.parse("coefficients", "c", 0.0, float)?;
    CoefficientField::constant(a, c).map_err(|e| {
        err(
            "coefficients",
            "a",
            format!("{e} (assumption: A symmetric with ξ·Aξ ≥ A_min|ξ|², A_min > 0, and c ≥ 0)"),
        )
    })?;

    // [impedance]
    let eta = raw.parse("impedance", "eta", vec![1.0], floats)?;
    let gamma = raw.parse("impedance", "gamma", vec![1.0], floats)?;
    if eta.is_empty() || gamma.is_empty() {
        return Err(err("impedance", "eta", "impedance series need at least one coefficient".into()));
    }
    let eta_min = raw.parse("impedance", "eta_min", series_lower_bound(&eta), float)?;
    let gamma_min = raw.parse("impedance", "gamma_min", series_lower_bound(&gamma), float)?;
    if !(eta_min > 0.0) {
        return Err(err("impedance", "eta_min", format!("η_min = {eta_min}: assumption η ≥ η_min > 0 violated")));
    }
    if !(gamma_min > 0.0) {
        return Err(err("impedance", "gamma_min", format!("γ_min = {gamma_min}: assumption γ ≥ γ_min > 0 violated")));
    }
    for (key, series, bound) in [("eta", &eta, eta_min), ("gamma", &gamma, gamma_min)] {
        let series = TrigSeries::new(1.0, series.clone())?;
        let low = (0..4096).map(|k| series.eval(k as f64 / 4096.0)).fold(f64::INFINITY, f64::min);
        if low < bound * (1.0 - 1e-12) {
            return Err(err("impedance", key, format!("{key} drops to {low} below its lower bound {bound}")));
        }
    }

    // [flux]
    let basis_size = raw.parse("flux", "basis_size", 16, integer)? as usize;
    let mode = raw.parse("flux", "mode", 0, integer)? as usize;
    if basis_size == 0 || mode >= basis_size {
        return Err(err("flux", "mode", format!("flux mode {mode} outside basis of size {basis_size}")));
    }
    let q = raw.parse("flux", "q", 1, integer)?;
    let beta = raw.parse("flux", "beta", 1.0, float)?;
    let signal = TemporalSignal::monomial_exp(q as u32, beta).map_err(|e| err("flux", "q", e.to_string()))?;

    // [frequency]
    let alpha = raw.parse("frequency", "alpha", 0.5, float)?;
    check_alpha(alpha).map_err(|_| err("frequency", "alpha", format!("α = {alpha}: assumption α ∈ (0,1) violated")))?;
    let s = raw.parse("frequency", "s", vec![Complex64::new(1.0, 0.0)], complexes)?;
    if s.is_empty() {
        return Err(err("frequency", "s", "need at least one frequency".into()));
    }
    if let Some(bad) = s.iter().find(|z| !is_admissible(**z, alpha)) {
        return Err(err("frequency", "s", format!("s = {bad} is outside the admissible sector for α = {alpha}")));
    }
    let times = raw.parse("frequency", "times", vec![0.5, 1.0, 2.0], floats)?;
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(err("frequency", "times", "times must be positive and increasing".into()));
    }
    let contour_nodes = raw.parse("frequency", "contour_nodes", 64, integer)? as usize;
    let contour_tol = raw.parse("frequency", "contour_tol", 1e-6, float)?;
    let dt = raw.parse("frequency", "dt", 0.01, float)?;
    let time_tol = raw.parse("frequency", "time_tol", 1e-3, float)?;
    if contour_nodes < 2 || !(contour_tol > 0.0) || !(dt > 0.0) || !(time_tol > 0.0) {
        return Err(err("frequency", "dt", "contour_nodes ≥ 2 and positive tolerances and dt are required".into()));
    }

    // [inversion]
    let eta_modes = raw.parse("inversion", "eta_modes", eta.len().max(1), integer_usize)?;
    let gamma_modes = raw.parse("inversion", "gamma_modes", gamma.len().max(1), integer_usize)?;
    let noise = raw.parse("inversion", "noise", 0.0, float)?;
    if !(noise >= 0.0) {
        return Err(err("inversion", "noise", "noise level must be nonnegative".into()));
    }
    let tau = raw.parse("inversion", "tau", 1.1, float)?;
    let regularization = raw.parse("inversion", "lambda", Regularization::Fixed(0.0), |t| {
        if t.trim() == "discrepancy" {
            if noise > 0.0 {
                Ok(Regularization::Discrepancy { noise_level: noise, tau })
            } else {
                Err("the discrepancy principle needs noise > 0".into())
            }
        } else {
            let l = float(t)?;
            if l >= 0.0 { Ok(Regularization::Fixed(l)) } else { Err("λ must be nonnegative".into()) }
        }
    })?;
    let seed = raw.parse("inversion", "seed", 1, integer)?;
    let test = raw.parse("inversion", "test", TestSpace::Hats, |t| {
        let parts: Vec<&str> = t.split_whitespace().collect();
        match parts.as_slice() {
            ["hats"] => Ok(TestSpace::Hats),
            ["trig", n] => n.parse().map(TestSpace::Trig).map_err(|_| format!("bad test count '{n}'")),
            _ => Err(format!("expected 'hats' or 'trig N', got '{t}'")),
        }
    })?;
    let inv_s = raw.parse("inversion", "s", 1.0, float)?;
    if !(inv_s > 0.0) {
        return Err(err("inversion", "s", "inversion needs a real positive s".into()));
    }

    // [study]
    let alphas = raw.parse("study", "alphas", vec![0.25, 0.5, 0.75], floats)?;
    if let Some(a) = alphas.iter().find(|a| check_alpha(**a).is_err()) {
        return Err(err("study", "alphas", format!("α = {a}: assumption α ∈ (0,1) violated")));
    }
    let samples = raw.parse("study", "samples", 50, integer_usize)?;
    let horizons = raw.parse("study", "horizons", vec![1.0, 2.0, 4.0, 8.0], floats)?;
    if horizons.len() < 3 || horizons[0] < 1.0 || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(err("study", "horizons", "need at least three increasing horizons with T ≥ 1".into()));
    }
    let h_list = raw.parse("study", "h_list", vec![0.1, 0.05, 0.025], floats)?;
    if h_list.len() < 2 || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(err("study", "h_list", "need at least two positive mesh sizes".into()));
    }
    let truncation_dt = raw.parse("study", "truncation_dt", 1.0 / 256.0, float)?;

    let output_dir = raw.get("output", "dir").map(|v| v.1.clone());
    Ok(Config {
        geometry: GeometryConfig { outer, inner, h },
        coefficients: CoefficientConfig { a, c },
        impedance: ImpedanceConfig { eta, gamma, eta_min, gamma_min },
        flux: FluxConfig { basis_size, mode, signal },
        frequency: FrequencyConfig { alpha, s, times, contour_nodes, contour_tol, dt, time_tol },
        inversion: InversionConfig { eta_modes, gamma_modes, regularization, noise, seed, test, s: inv_s },
        study: StudyConfig { alphas, samples, horizons, h_list, truncation_dt },
        output_dir,
        hash: config_hash(text),
    })
}

fn integer_usize(text: &str) -> std::result::Result<usize, String> {
    integer(text).map(|v| v as usize)
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
