use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use neckstress::asymptotics::{order_m_families, SingularIntegral};
use neckstress::fem::io::write_field;
use neckstress::geometry::{build_mesh, mesh_io::write_mesh};
use neckstress::harness::{
    fit_with_log_power, parse_eps_list, run_point_full, run_sweep, summarize, ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "neckstress",
    version,
    about = "Stress concentration between nearly touching stiff inclusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graded mesh at one ε and write it.
    Mesh {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        eps: f64,
    },
    /// Solve the decomposition at one ε; prints a JSON row.
    Solve {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        eps: f64,
        /// Export the reconstructed displacement here.
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// Run an ε-sweep; appends CSV rows and writes a JSON summary.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Fit a column of a sweep CSV against ε.
    Fit {
        input: PathBuf,
        #[arg(long, default_value = "grad_max")]
        column: String,
        /// s in value·|log ε|^s for the corrected fit.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        log_power: f64,
    },
    /// Evaluate singular integrals ∫ r^k/(ε + r^m)^p dr and fit their exponents.
    Oracle {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        /// Custom k; with --p replaces the order-m family table.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1.5)]
        upper: f64,
        #[arg(long, default_value = "1e-2:1e-6:9")]
        eps_list: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    r0: Option<String>,
    /// Comma list or `start:end:n` (geometric).
    #[arg(long)]
    eps_list: Option<String>,
    /// affine-x2 | rigid:<α> | zero | bend | affine:a,b,c,d
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    summary: Option<String>,
    #[arg(long)]
    mesh_budget: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// auto | cg | direct
    #[arg(long)]
    solver: Option<String>,
    /// 1 | 2
    #[arg(long)]
    order: Option<String>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            cfg.apply_text(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
        let flags = [
            ("profile", &self.profile),
            ("dim", &self.dim),
            ("m", &self.m),
            ("r0", &self.r0),
            ("eps_list", &self.eps_list),
            ("phi", &self.phi),
            ("out", &self.out),
            ("summary", &self.summary),
            ("mesh_budget", &self.mesh_budget),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("solver", &self.solver),
            ("order", &self.order),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| e.to_string())?;
            }
        }
        Ok(cfg)
    }
}

/// Name, integral and predicted (exponent, log factor) when known.
type Family = (String, SingularIntegral, Option<(f64, bool)>);

fn emit(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Mesh { exp, eps } => {
            let cfg = exp.resolve()?;
            let mesh = build_mesh(
                &cfg.profile_at(eps).map_err(|e| e.to_string())?,
                &cfg.grading,
            )
            .map_err(|e| e.to_string())?;
            let r = &mesh.report;
            eprintln!(
                "{} nodes, {} cells, layers {}..{}, min quality {:.3}",
                mesh.n_nodes(),
                mesh.n_cells(),
                r.min_layers,
                r.max_layers,
                r.min_quality
            );
            emit(cfg.out.as_deref(), &write_mesh(&mesh))
        }
        Command::Solve {
            exp,
            eps,
            field_out,
        } => {
            let cfg = exp.resolve()?;
            cfg.validate().map_err(|e| e.to_string())?;
            let (row, dec) = run_point_full(&cfg, eps).map_err(|e| e.to_string())?;
            if let Some(p) = field_out {
                fs::write(&p, write_field(&dec.u)).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            let json = serde_json::to_string_pretty(&row).map_err(|e| e.to_string())?;
            emit(cfg.out.as_deref(), &(json + "\n"))
        }
        Command::Sweep { exp } => {
            let cfg = exp.resolve()?;
            let table = run_sweep(&cfg).map_err(|e| e.to_string())?;
            match &cfg.out {
                Some(p) => table.append_csv(p).map_err(|e| e.to_string())?,
                None => print!("{}", table.to_csv()),
            }
            let summary = summarize(&table);
            for c in &summary.checks {
                eprintln!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if let Some(p) = &cfg.summary {
                let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
                fs::write(p, json + "\n").map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok(())
        }
        Command::Fit {
            input,
            column,
            log_power,
        } => {
            let mut reader = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .from_path(&input)
                .map_err(|e| format!("{}: {e}", input.display()))?;
            let headers = reader.headers().map_err(|e| e.to_string())?.clone();
            let idx = |name: &str| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| format!("no column '{name}'"))
            };
            let (ie, iv, is) = (idx("epsilon")?, idx(&column)?, idx("status")?);
            let mut samples = Vec::new();
            for rec in reader.records() {
                let rec = rec.map_err(|e| e.to_string())?;
                if &rec[is] != "ok" {
                    continue;
                }
                let parse = |i: usize| {
                    rec[i]
                        .parse::<f64>()
                        .map_err(|_| format!("bad number '{}'", &rec[i]))
                };
                samples.push((parse(ie)?, parse(iv)?.abs()));
            }
            let fit = fit_with_log_power(&samples, log_power).map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&fit).map_err(|e| e.to_string())?
            );
            Ok(())
        }
        Command::Oracle {
            dim,
            m,
            k,
            p,
            upper,
            eps_list,
            out,
        } => {
            let eps = parse_eps_list(&eps_list).map_err(|e| e.to_string())?;
            let families: Vec<Family> = match (k, p) {
                (Some(k), Some(p)) => {
                    vec![("custom".into(), SingularIntegral::new(k, m, p, upper), None)]
                }
                (None, None) => order_m_families(dim, m)
                    .into_iter()
                    .map(|(name, law)| {
                        (name.to_string(), law.integral(upper), Some(law.exponent()))
                    })
                    .collect(),
                _ => return Err("--k and --p must be given together".into()),
            };
            let mut text = String::from("family,k,m,p,epsilon,value\n");
            let mut report = Vec::new();
            for (name, integral, predicted) in &families {
                let mut samples = Vec::new();
                for &e in &eps {
                    let v = integral.eval(e).map_err(|err| err.to_string())?;
                    text.push_str(&format!(
                        "{name},{:e},{:e},{:e},{e:e},{v:e}\n",
                        integral.k, integral.m, integral.p
                    ));
                    samples.push((e, v));
                }
                let (exp, log) = predicted.unwrap_or_else(|| integral.exponent());
                let fit = fit_with_log_power(&samples, if log { -1.0 } else { 0.0 })
                    .map_err(|e| e.to_string())?;
                report.push(format!(
                    "{name}: fitted {:.4} predicted {exp:.4}{}",
                    fit.best_slope(),
                    if log { " (|log ε| corrected)" } else { "" }
                ));
            }
            emit(out.as_deref(), &text)?;
            for line in report {
                eprintln!("{line}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
