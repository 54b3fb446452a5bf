use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elasticity::{rigid_basis, rigid_count, ElasticParams};
use crate::error::{Error, Result};
use crate::fem::{ElementOrder, SolverConfig, SolverKind, Trace};
use crate::geometry::{make_profile, GradingConfig, NeckProfile, ProfileKind};

/// Outer boundary data φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhiSelector {
    /// φ = (x₂, 0).
    AffineX2,
    /// φ = ψ_α (zero-based α).
    Rigid(usize),
    Zero,
    /// φ = (a x₁ + b x₂, c x₁ + d x₂).
    Affine([f64; 4]),
    /// φ = (0, x₁ x₂).
    Bend,
}

impl PhiSelector {
    pub fn trace(&self) -> Trace {
        match *self {
            PhiSelector::AffineX2 => Arc::new(|x| [x[1], 0.0]),
            PhiSelector::Rigid(a) => {
                let psi = rigid_basis(2)[a];
                Arc::new(move |x| psi.eval2(x))
            }
            PhiSelector::Zero => Arc::new(|_| [0.0, 0.0]),
            PhiSelector::Affine([a, b, c, d]) => {
                Arc::new(move |x| [a * x[0] + b * x[1], c * x[0] + d * x[1]])
            }
            PhiSelector::Bend => Arc::new(|x| [0.0, x[0] * x[1]]),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            PhiSelector::Rigid(a) if a >= rigid_count(dim) => Err(Error::Config(format!(
                "rigid:{} is out of range, d = {dim} has {} rigid modes",
                a + 1,
                rigid_count(dim)
            ))),
            PhiSelector::Affine(c) if c.iter().any(|v| !v.is_finite()) => {
                Err(Error::Config("affine coefficients must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PhiSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSelector::AffineX2 => f.write_str("affine-x2"),
            PhiSelector::Rigid(a) => write!(f, "rigid:{}", a + 1),
            PhiSelector::Zero => f.write_str("zero"),
            PhiSelector::Affine(c) => write!(f, "affine:{},{},{},{}", c[0], c[1], c[2], c[3]),
            PhiSelector::Bend => f.write_str("bend"),
        }
    }
}

impl FromStr for PhiSelector {
    type Err = Error;

    /// `affine-x2`, `zero`, `bend`, `rigid:<α>` (one-based), `affine:a,b,c,d`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "affine-x2" => return Ok(PhiSelector::AffineX2),
            "zero" => return Ok(PhiSelector::Zero),
            "bend" => return Ok(PhiSelector::Bend),
            _ => {}
        }
        if let Some(a) = s.strip_prefix("rigid:") {
            let a: usize = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad rigid index in '{s}'")))?;
            if a == 0 {
                return Err(Error::Config("rigid modes are numbered from 1".into()));
            }
            return Ok(PhiSelector::Rigid(a - 1));
        }
        if let Some(c) = s.strip_prefix("affine:") {
            let v = parse_floats(c)?;
            let arr: [f64; 4] = v
                .try_into()
                .map_err(|_| Error::Config(format!("'{s}' needs four coefficients")))?;
            return Ok(PhiSelector::Affine(arr));
        }
        Err(Error::Config(format!("unknown boundary data '{s}'")))
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{}'", t.trim())))
        })
        .collect()
}

/// `n` geometrically spaced values from `start` down to `end`.
pub fn geometric_list(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let (a, b) = (start.ln(), end.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// 8 points from 10^−1.5 to 10^−4.
pub fn default_eps_list() -> Vec<f64> {
    geometric_list(10f64.powf(-1.5), 1e-4, 8)
}

/// `a,b,c` or `start:end:n` (geometric).
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad ε start '{}'", parts[0])))?;
        let end: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad ε end '{}'", parts[1])))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad ε count '{}'", parts[2])))?;
        if n == 0 {
            return Err(Error::Config("ε list is empty".into()));
        }
        return Ok(geometric_list(start, end, n));
    }
    parse_floats(s)
}

/// Everything needed to reproduce a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub profile: ProfileKind,
    pub dim: usize,
    pub m: f64,
    pub r0: f64,
    pub kappa0: f64,
    pub r_neck: f64,
    pub outer_radius: f64,
    pub lambda: f64,
    pub mu: f64,
    pub phi: PhiSelector,
    pub eps_list: Vec<f64>,
    pub grading: GradingConfig,
    pub order: ElementOrder,
    pub solver: SolverConfig,
    /// Half-width r of the neck region Ω_r where max|∇u| is measured; defaults to r_neck.
    pub neck_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// Recorded with every row; the pipeline itself has no random component.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Power,
            dim: 2,
            m: 2.0,
            r0: 0.3,
            kappa0: 1.0,
            r_neck: 0.5,
            outer_radius: 2.5,
            lambda: 1.0,
            mu: 1.0,
            phi: PhiSelector::AffineX2,
            eps_list: default_eps_list(),
            grading: GradingConfig::default(),
            order: ElementOrder::Quadratic,
            solver: SolverConfig::default(),
            neck_radius: None,
            out: None,
            summary: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<ElasticParams> {
        ElasticParams::new(self.lambda, self.mu, self.dim)
    }

    pub fn profile_at(&self, epsilon: f64) -> Result<NeckProfile> {
        make_profile(
            self.profile,
            self.dim,
            epsilon,
            self.kappa0,
            self.m,
            self.r0,
            self.r_neck,
            self.outer_radius,
        )
    }

    pub fn neck_radius(&self) -> f64 {
        self.neck_radius.unwrap_or(self.r_neck)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::Config("ε list is empty".into()));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e < 0.5)) {
            return Err(Error::Config("every ε must lie in (0, ½)".into()));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("ε list must be strictly decreasing".into()));
        }
        if let Some(r) = self.neck_radius {
            if !(r > 0.0 && r <= self.r_neck) {
                return Err(Error::Config(format!("neck radius {r} must lie in (0, R]")));
            }
        }
        if !(self.solver.rtol > 0.0) {
            return Err(Error::Config("solver tolerance must be positive".into()));
        }
        if !(self.grading.budget > 0.0) || self.grading.n_layers == 0 {
            return Err(Error::Config(
                "mesh budget and layer count must be positive".into(),
            ));
        }
        self.phi.validate(self.dim)?;
        self.params()?;
        self.profile_at(self.eps_list[0])?;
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: bad number '{v}'")))
        };
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("{key}: bad integer '{v}'")))
        };
        match key.trim().replace('-', "_").as_str() {
            "profile" => {
                self.profile = match v {
                    "flat" => ProfileKind::Flat,
                    "power" => ProfileKind::Power,
                    _ => {
                        return Err(Error::Config(format!(
                            "profile must be flat or power, got '{v}'"
                        )))
                    }
                }
            }
            "dim" => self.dim = int(v)?,
            "m" => self.m = num(v)?,
            "r0" => self.r0 = num(v)?,
            "kappa0" => self.kappa0 = num(v)?,
            "r_neck" => self.r_neck = num(v)?,
            "outer_radius" => self.outer_radius = num(v)?,
            "lambda" => self.lambda = num(v)?,
            "mu" => self.mu = num(v)?,
            "phi" => self.phi = v.parse()?,
            "eps_list" | "eps" => self.eps_list = parse_eps_list(v)?,
            "mesh_budget" | "budget" => self.grading.budget = num(v)?,
            "n_layers" => self.grading.n_layers = int(v)?,
            "cells_per_scale" => self.grading.cells_per_scale = num(v)?,
            "growth" => self.grading.growth = num(v)?,
            "far_spacing" => self.grading.far_spacing = num(v)?,
            "max_nodes" => self.grading.max_nodes = int(v)?,
            "order" => {
                self.order = match v {
                    "1" => ElementOrder::Linear,
                    "2" => ElementOrder::Quadratic,
                    _ => return Err(Error::Config(format!("order must be 1 or 2, got '{v}'"))),
                }
            }
            "tol" => self.solver.rtol = num(v)?,
            "solver" => {
                self.solver.kind = match v {
                    "auto" => SolverKind::Auto,
                    "cg" => SolverKind::Cg,
                    "direct" => SolverKind::Direct,
                    _ => {
                        return Err(Error::Config(format!(
                            "solver must be auto, cg or direct, got '{v}'"
                        )))
                    }
                }
            }
            "cg_max_iter" => self.solver.cg_max_iter = int(v)?,
            "neck_radius" => self.neck_radius = Some(num(v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "summary" => self.summary = Some(PathBuf::from(v)),
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: bad integer '{v}'")))?
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines (`#` starts a comment) on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn profile_name(&self) -> &'static str {
        match self.profile {
            ProfileKind::Flat => "flat",
            ProfileKind::Power => "power",
        }
    }
}
