//! Experiment orchestration: ε-sweeps, CSV rows, rate fits and oracle comparisons.

mod config;
mod fit;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use config::{default_eps_list, geometric_list, parse_eps_list, ExperimentConfig, PhiSelector};
pub use fit::{fit_rate, fit_with_log_power, LineFit, RateFit};

use crate::asymptotics::{
    flat_entry_oracle, order_m_entry_law, predicted_rate, ContactGeometry, LogFactor,
    RatePrediction,
};
use crate::decomposition::{decompose, traction_loads, traction_moments, Decomposition};
use crate::error::{Error, Result};
use crate::fem::{max_gradient, Discretization, Region, SolveMethod};
use crate::geometry::{ball_volume, build_mesh, ProfileKind};
use crate::par;

/// First line of every sweep CSV.
pub const CSV_VERSION: &str = "# neckstress-v1";

/// Measurements at one ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowData {
    pub dofs: usize,
    pub cells: usize,
    pub min_layers: usize,
    pub min_quality: f64,
    pub grad_max: f64,
    pub grad_at: [f64; 2],
    /// a₁₁ row-major.
    pub a11: Vec<f64>,
    pub a11_min_eig: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub diff: Vec<f64>,
    pub system_residual: f64,
    pub p_residual: f64,
    pub asymmetry: f64,
    /// max_β |b₁ᵝ(volume) − b₁ᵝ(traction)| / ‖b₁‖.
    pub b_cross_defect: f64,
    /// Largest traction moment of u on ∂D₁ ∪ ∂D₂.
    pub moment_max: f64,
    pub solve_residual: f64,
    pub solve_iterations: usize,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub epsilon: f64,
    pub outcome: std::result::Result<RowData, String>,
}

/// Rows in ε order plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

/// Runs the full pipeline at one ε.
pub fn run_point(config: &ExperimentConfig, epsilon: f64) -> Result<RowData> {
    run_point_full(config, epsilon).map(|r| r.0)
}

/// As [`run_point`], also returning the decomposition for field export.
pub fn run_point_full(config: &ExperimentConfig, epsilon: f64) -> Result<(RowData, Decomposition)> {
    let params = config.params()?;
    let profile = config.profile_at(epsilon)?;
    let mesh = build_mesh(&profile, &config.grading)?;
    let report = mesh.report;
    let disc = Discretization::new(Arc::new(mesh), params, config.order)?;
    let dec = decompose(&disc, config.phi.trace(), &config.solver)?;
    let gm = max_gradient(&dec.u, Region::Neck(config.neck_radius()))?;
    let sys = &dec.system;
    let c = sys.c.as_ref().expect("solved system");
    let n = sys.n_alpha;
    let a11 = sys.a11();
    let tl = traction_loads(&params, &dec.cells)?;
    let bn = sys.b[0].norm();
    let b_cross_defect = if bn > 0.0 {
        (&tl[0] - &sys.b[0]).amax() / bn
    } else {
        (&tl[0] - &sys.b[0]).amax()
    };
    let moments = traction_moments(&params, &dec.u)?;
    let moment_max = moments.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let solve_residual = dec
        .cells
        .reports
        .iter()
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    let solve_iterations = dec
        .cells
        .reports
        .iter()
        .map(|r| r.iterations)
        .max()
        .unwrap_or(0);
    let method = match dec.cells.reports.first().map(|r| r.method) {
        Some(SolveMethod::Cg) => "cg",
        Some(SolveMethod::Cholesky) => "cholesky",
        _ => "trivial",
    };
    let row = RowData {
        dofs: disc.space.n_dofs(),
        cells: disc.space.n_cells(),
        min_layers: report.min_layers,
        min_quality: report.min_quality,
        grad_max: gm.value,
        grad_at: gm.location,
        a11: (0..n * n).map(|k| a11[(k / n, k % n)]).collect(),
        a11_min_eig: sys.a11_eigenvalues()[0],
        c1: c[0].iter().copied().collect(),
        c2: c[1].iter().copied().collect(),
        diff: (&c[0] - &c[1]).iter().copied().collect(),
        system_residual: sys.residual,
        p_residual: sys.p_residual,
        asymmetry: sys.asymmetry,
        b_cross_defect,
        moment_max,
        solve_residual,
        solve_iterations,
        method: method.into(),
    };
    Ok((row, dec))
}

/// Runs every ε of the configuration; ε points run concurrently and rows come back in ε order.
/// A failure at one ε is recorded in its row and the sweep continues.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepTable> {
    config.validate()?;
    if config.dim != 2 {
        return Err(Error::Unsupported(
            "finite-element sweeps are two-dimensional".into(),
        ));
    }
    let indexed: Vec<(usize, f64)> = config.eps_list.iter().copied().enumerate().collect();
    let rows = par::map_slice(&indexed, |&(index, epsilon)| SweepRow {
        index,
        epsilon,
        outcome: run_point(config, epsilon).map_err(|e| e.to_string()),
    });
    Ok(SweepTable {
        config: config.clone(),
        rows,
    })
}

fn csv_columns(n: usize) -> Vec<String> {
    let mut c: Vec<String> = [
        "index",
        "epsilon",
        "status",
        "profile",
        "m",
        "r0",
        "phi",
        "mesh_budget",
        "order",
        "seed",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    c.extend(
        [
            "dofs",
            "cells",
            "min_layers",
            "min_quality",
            "grad_max",
            "grad_x1",
            "grad_x2",
        ]
        .map(String::from),
    );
    for a in 1..=n {
        for b in 1..=n {
            c.push(format!("a11_{a}{b}"));
        }
    }
    c.push("a11_min_eig".into());
    for name in ["c1", "c2", "diff"] {
        for a in 1..=n {
            c.push(format!("{name}_{a}"));
        }
    }
    c.extend(
        [
            "system_residual",
            "p_residual",
            "asymmetry",
            "b_cross_defect",
            "moment_max",
            "solve_residual",
            "solve_iterations",
            "method",
        ]
        .map(String::from),
    );
    c
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

impl SweepTable {
    pub fn n_alpha(&self) -> usize {
        crate::elasticity::rigid_count(self.config.dim)
    }

    pub fn header(&self) -> String {
        csv_columns(self.n_alpha()).join(",")
    }

    /// CSV body lines (no version line, no header).
    pub fn csv_rows(&self) -> Vec<String> {
        let cfg = &self.config;
        let n = self.n_alpha();
        let width = csv_columns(n).len();
        self.rows
            .iter()
            .map(|row| {
                let mut cols = vec![row.index.to_string(), f(row.epsilon)];
                let status = match &row.outcome {
                    Ok(_) => "ok".to_string(),
                    Err(e) => format!("error: {}", e.replace([',', '\n', '\r'], ";")),
                };
                cols.push(status);
                cols.extend([
                    cfg.profile_name().to_string(),
                    f(cfg.m),
                    f(cfg.r0),
                    cfg.phi.to_string().replace(',', " "),
                    f(cfg.grading.budget),
                    cfg.order.degree().to_string(),
                    cfg.seed.to_string(),
                ]);
                if let Ok(d) = &row.outcome {
                    cols.extend([
                        d.dofs.to_string(),
                        d.cells.to_string(),
                        d.min_layers.to_string(),
                        f(d.min_quality),
                        f(d.grad_max),
                    ]);
                    cols.extend([f(d.grad_at[0]), f(d.grad_at[1])]);
                    cols.extend(d.a11.iter().map(|v| f(*v)));
                    cols.push(f(d.a11_min_eig));
                    for v in [&d.c1, &d.c2, &d.diff] {
                        cols.extend(v.iter().map(|x| f(*x)));
                    }
                    cols.extend([
                        f(d.system_residual),
                        f(d.p_residual),
                        f(d.asymmetry),
                        f(d.b_cross_defect),
                        f(d.moment_max),
                        f(d.solve_residual),
                        d.solve_iterations.to_string(),
                        d.method.clone(),
                    ]);
                }
                cols.resize(width, String::new());
                cols.join(",")
            })
            .collect()
    }

    /// Full CSV text: version line, header, rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CSV_VERSION}");
        let _ = writeln!(s, "{}", self.header());
        for r in self.csv_rows() {
            let _ = writeln!(s, "{r}");
        }
        s
    }

    /// Appends rows to `path`, writing the version line and header only for a new or empty file.
    pub fn append_csv(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let existing = std::fs::read_to_string(path).unwrap_or_default();
        let mut out = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        if existing.trim().is_empty() {
            out.write_all(self.to_csv().as_bytes())?;
            return Ok(());
        }
        let mut lines = existing.lines();
        if lines.next() != Some(CSV_VERSION) || lines.next() != Some(self.header().as_str()) {
            return Err(Error::Config(format!(
                "{} has a different CSV schema",
                path.display()
            )));
        }
        for r in self.csv_rows() {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    fn ok_rows(&self) -> impl Iterator<Item = (f64, &RowData)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|d| (r.epsilon, d)))
    }

    /// (ε, value) over successful rows.
    pub fn series(&self, value: impl Fn(&RowData) -> f64) -> Vec<(f64, f64)> {
        self.ok_rows().map(|(e, d)| (e, value(d))).collect()
    }

    pub fn geometry(&self) -> ContactGeometry {
        match self.config.profile {
            ProfileKind::Flat => ContactGeometry::Flat { r0: self.config.r0 },
            ProfileKind::Power => ContactGeometry::Power { m: self.config.m },
        }
    }

    pub fn prediction(&self) -> RatePrediction {
        predicted_rate(self.config.dim, self.geometry())
    }

    /// Rate fit of max|∇u| in the neck.
    pub fn gradient_fit(&self) -> Result<RateFit> {
        fit_rate(&self.series(|d| d.grad_max), Some(&self.prediction()))
    }

    /// Rate fit of a₁₁^{αβ} (zero-based indices, absolute values).
    pub fn entry_fit(&self, alpha: usize, beta: usize) -> Result<RateFit> {
        let n = self.n_alpha();
        fit_rate(&self.series(|d| d.a11[alpha * n + beta].abs()), None)
    }

    /// Rate fit of |C₁ᵅ − C₂ᵅ|.
    pub fn diff_fit(&self, alpha: usize) -> Result<RateFit> {
        fit_rate(&self.series(|d| d.diff[alpha].abs()), None)
    }
}

/// One a₁₁ entry: FEM slope against the analytic prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryComparison {
    pub alpha: usize,
    pub beta: usize,
    pub fem_slope: f64,
    pub oracle_slope: f64,
    pub log_factor: bool,
    /// Off-diagonal laws are upper bounds only; the entry may grow more slowly.
    pub two_sided: bool,
    pub tolerance: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// Compares FEM entry samples with the flat-contact oracle (`Flat`) or the ρ law (`Power`).
pub fn compare_entry(
    dim: usize,
    geometry: ContactGeometry,
    alpha: usize,
    beta: usize,
    samples: &[(f64, f64)],
) -> Result<EntryComparison> {
    let (oracle_slope, log_factor, fem_slope) = match geometry {
        ContactGeometry::Flat { r0 } if r0 > 0.0 => {
            let area = ball_volume(dim - 1, r0);
            let oracle: Result<Vec<(f64, f64)>> = samples
                .iter()
                .map(|&(e, _)| Ok((e, flat_entry_oracle(dim, area, e, alpha, beta)?)))
                .collect();
            let oracle = fit_rate(&oracle?, None)?.slope();
            (oracle, false, fit_rate(samples, None)?.slope())
        }
        ContactGeometry::Flat { .. } | ContactGeometry::Power { .. } => {
            let m = match geometry {
                ContactGeometry::Power { m } => m,
                _ => 2.0,
            };
            let law = order_m_entry_law(dim, m, alpha, beta)?;
            let (exp, log) = law.exponent();
            let fem = if log {
                fit_with_log_power(samples, -1.0)?.best_slope()
            } else {
                fit_rate(samples, None)?.slope()
            };
            (exp, log, fem)
        }
    };
    let tolerance = if log_factor { 0.25 } else { 0.15 };
    let two_sided = alpha == beta;
    let deviation = if two_sided {
        (fem_slope - oracle_slope).abs()
    } else {
        (oracle_slope - fem_slope).max(0.0)
    };
    Ok(EntryComparison {
        alpha,
        beta,
        fem_slope,
        oracle_slope,
        log_factor,
        two_sided,
        tolerance,
        deviation,
        pass: deviation <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub geometry: ContactGeometry,
    pub entries: Vec<EntryComparison>,
    /// Entries skipped because they vanish (by symmetry) at some ε.
    pub skipped: Vec<(usize, usize)>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Per-entry comparison of the measured a₁₁ slopes with the analytic predictions.
pub fn compare_oracles(table: &SweepTable) -> Result<OracleReport> {
    let n = table.n_alpha();
    if table.series(|d| d.grad_max).len() < 4 {
        return Err(Error::TooFewSamples(table.series(|d| d.grad_max).len()));
    }
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for alpha in 0..n {
        for beta in alpha..n {
            let samples = table.series(|d| d.a11[alpha * n + beta].abs());
            let scale = table.series(|d| {
                d.a11[alpha * n + alpha]
                    .abs()
                    .max(d.a11[beta * n + beta].abs())
            });
            let negligible = samples.iter().zip(&scale).any(|(s, c)| s.1 <= 1e-8 * c.1);
            if negligible {
                skipped.push((alpha, beta));
                continue;
            }
            match compare_entry(table.config.dim, table.geometry(), alpha, beta, &samples) {
                Ok(c) => entries.push(c),
                Err(Error::Unsupported(_)) => skipped.push((alpha, beta)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(OracleReport {
        geometry: table.geometry(),
        entries,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// JSON-ready summary of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub prediction: RatePrediction,
    pub gradient: Option<RateFit>,
    pub entries: Vec<(usize, usize, RateFit)>,
    pub diffs: Vec<(usize, RateFit)>,
    pub oracle: Option<OracleReport>,
    pub failed_rows: Vec<(usize, String)>,
    pub checks: Vec<CheckResult>,
}

/// Slope tolerance for the gradient-rate check.
pub const RATE_TOLERANCE: f64 = 0.1;
pub const MIN_R_SQUARED: f64 = 0.98;

pub fn summarize(table: &SweepTable) -> SweepSummary {
    let n = table.n_alpha();
    let prediction = table.prediction();
    let gradient = table.gradient_fit().ok();
    let entries = (0..n)
        .filter_map(|a| table.entry_fit(a, a).ok().map(|f| (a, a, f)))
        .collect();
    let diffs = (0..n)
        .filter_map(|a| table.diff_fit(a).ok().map(|f| (a, f)))
        .collect();
    let oracle = compare_oracles(table).ok();
    let failed_rows = table
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.index, e.clone())))
        .collect::<Vec<_>>();
    let mut checks = Vec::new();
    if let Some(g) = &gradient {
        let s = g.best_slope();
        let pass = (s - prediction.exponent).abs() <= RATE_TOLERANCE
            && g.best_r_squared() >= MIN_R_SQUARED;
        checks.push(CheckResult {
            name: "gradient rate".into(),
            pass,
            detail: format!(
                "slope {s:.4} vs predicted {:.4}{} (±{RATE_TOLERANCE}), R² {:.4}",
                prediction.exponent,
                if prediction.log_factor == LogFactor::None {
                    ""
                } else {
                    " after log correction"
                },
                g.best_r_squared()
            ),
        });
    }
    let ok: Vec<&RowData> = table.ok_rows().map(|r| r.1).collect();
    if !ok.is_empty() {
        let spd = ok.iter().all(|d| d.a11_min_eig > 0.0);
        checks.push(CheckResult {
            name: "a11 positive definite".into(),
            pass: spd,
            detail: format!(
                "min eigenvalue {:.4e}",
                ok.iter()
                    .map(|d| d.a11_min_eig)
                    .fold(f64::INFINITY, f64::min)
            ),
        });
        let p = ok.iter().map(|d| d.p_residual).fold(0.0, f64::max);
        checks.push(CheckResult {
            name: "difference relation".into(),
            pass: p <= 1e-10,
            detail: format!("max residual {p:.3e} (≤ 1e-10)"),
        });
        let b = ok.iter().map(|d| d.b_cross_defect).fold(0.0, f64::max);
        checks.push(CheckResult {
            name: "load cross-check".into(),
            pass: b <= 1e-6,
            detail: format!("max relative defect {b:.3e} (≤ 1e-6)"),
        });
    }
    if let Some(o) = &oracle {
        checks.push(CheckResult {
            name: "entry oracles".into(),
            pass: o.all_pass(),
            detail: o
                .entries
                .iter()
                .map(|e| {
                    format!(
                        "a11_{}{}: {:.3} vs {:.3}{}",
                        e.alpha + 1,
                        e.beta + 1,
                        e.fem_slope,
                        e.oracle_slope,
                        if e.two_sided { "" } else { " (bound)" }
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
        });
    }
    checks.push(CheckResult {
        name: "all points solved".into(),
        pass: failed_rows.is_empty(),
        detail: format!("{} failed", failed_rows.len()),
    });
    SweepSummary {
        config: table.config.clone(),
        prediction,
        gradient,
        entries,
        diffs,
        oracle,
        failed_rows,
        checks,
    }
}
