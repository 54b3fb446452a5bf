//! P1/P2 vector finite elements for the Lamé system with Dirichlet data.
//!
//! A [`Discretization`] owns the assembled stiffness matrix of one mesh and
//! lazily one sparse Cholesky factor of its interior block, so the several
//! cell problems on a mesh share a single factorization.

mod assembly;
mod field;
pub mod io;
pub mod solver;
mod space;
pub mod sparse;

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use assembly::assemble_stiffness;
pub use field::{
    boundary_traction_moment, energy_integral, gradient_at, integrate_gradient, max_gradient,
    DisplacementField, FieldLabel, GradientMax, Region,
};
pub use solver::{SolverConfig, SolverKind};
pub use space::{ElementOrder, FeSpace};

use crate::elasticity::{ElasticParams, RigidMotion};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, Mesh};
use crate::par;
use solver::{direct_solve, pcg, Cholesky};
use sparse::CsrMatrix;

/// Vector-valued boundary trace.
pub type Trace = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Dirichlet data for every boundary tag.
#[derive(Clone)]
pub struct BoundaryData {
    traces: [Trace; 3],
}

fn tag_slot(tag: BoundaryTag) -> usize {
    match tag {
        BoundaryTag::InclusionTop => 0,
        BoundaryTag::InclusionBottom => 1,
        BoundaryTag::Outer => 2,
    }
}

impl BoundaryData {
    pub fn new(top: Trace, bottom: Trace, outer: Trace) -> Self {
        Self {
            traces: [top, bottom, outer],
        }
    }

    /// Builds data from (tag, trace) pairs; every tag must be present exactly once.
    pub fn from_pairs(pairs: Vec<(BoundaryTag, Trace)>) -> Result<Self> {
        let mut slots: [Option<Trace>; 3] = [None, None, None];
        for (tag, t) in pairs {
            let s = &mut slots[tag_slot(tag)];
            if s.is_some() {
                return Err(Error::InvalidParameter(format!(
                    "trace for '{}' given twice",
                    tag.name()
                )));
            }
            *s = Some(t);
        }
        let [a, b, c] = slots;
        match (a, b, c) {
            (Some(a), Some(b), Some(c)) => Ok(Self::new(a, b, c)),
            _ => Err(Error::InvalidParameter(
                "every boundary tag needs a trace".into(),
            )),
        }
    }

    pub fn zero() -> Self {
        Self::uniform(Arc::new(|_| [0.0, 0.0]))
    }

    pub fn uniform(trace: Trace) -> Self {
        Self::new(trace.clone(), trace.clone(), trace)
    }

    pub fn rigid(psi: RigidMotion) -> Self {
        Self::uniform(Arc::new(move |x| psi.eval2(x)))
    }

    pub fn trace(&self, tag: BoundaryTag) -> &Trace {
        &self.traces[tag_slot(tag)]
    }
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("BoundaryData")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    Trivial,
    Cg,
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub dofs: usize,
    /// PCG iterations, or refinement passes for the direct path.
    pub iterations: usize,
    pub residual: f64,
    pub wall_time: f64,
    pub method: SolveMethod,
}

/// Assembled system on one mesh with strong Dirichlet elimination on every tagged node.
pub struct Discretization {
    pub space: Arc<FeSpace>,
    pub params: ElasticParams,
    pub stiffness: CsrMatrix,
    free: Vec<usize>,
    free_index: Vec<usize>,
    k_ii: CsrMatrix,
    factor: OnceLock<Option<Cholesky>>,
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("dofs", &self.space.n_dofs())
            .field("free", &self.free.len())
            .finish()
    }
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>, params: ElasticParams, order: ElementOrder) -> Result<Self> {
        if params.dim != 2 {
            return Err(Error::Unsupported(format!(
                "finite elements are two-dimensional, got d = {}",
                params.dim
            )));
        }
        let space = Arc::new(FeSpace::new(mesh, order));
        let stiffness = assemble_stiffness(&space, &params);
        let mut free = Vec::new();
        let mut free_index = vec![usize::MAX; space.n_dofs()];
        for (node, tag) in space.node_tags.iter().enumerate() {
            if tag.is_none() {
                for comp in 0..2 {
                    free_index[2 * node + comp] = free.len();
                    free.push(2 * node + comp);
                }
            }
        }
        let k_ii = stiffness.submatrix(&free, &free_index);
        Ok(Self {
            space,
            params,
            stiffness,
            free,
            free_index,
            k_ii,
            factor: OnceLock::new(),
        })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_free(&self, dof: usize) -> bool {
        self.free_index[dof] != usize::MAX
    }

    /// Nodal vector equal to the Dirichlet data on tagged nodes and 0 elsewhere.
    fn lift(&self, bc: &BoundaryData) -> Vec<f64> {
        let mut g = vec![0.0; self.space.n_dofs()];
        for (node, tag) in self.space.node_tags.iter().enumerate() {
            if let Some(tag) = tag {
                let v = bc.trace(*tag)(self.space.points[node]);
                g[2 * node] = v[0];
                g[2 * node + 1] = v[1];
            }
        }
        g
    }

    fn cholesky(&self) -> Result<&Cholesky> {
        self.factor
            .get_or_init(|| Cholesky::factor(&self.k_ii).ok())
            .as_ref()
            .ok_or(Error::Singular {
                condition_estimate: solver::diagonal_condition_estimate(&self.k_ii),
            })
    }

    /// Solves one Dirichlet problem per entry of `bcs`, sharing the factorization.
    pub fn solve_many(
        &self,
        bcs: &[(FieldLabel, BoundaryData)],
        cfg: &SolverConfig,
    ) -> Result<Vec<(DisplacementField, SolveReport)>> {
        let start = Instant::now();
        let lifts: Vec<Vec<f64>> = par::map_slice(bcs, |(_, bc)| self.lift(bc));
        let rhs: Vec<Vec<f64>> = par::map_slice(&lifts, |g| {
            let kg = self.stiffness.apply(g);
            self.free.iter().map(|&i| -kg[i]).collect()
        });
        let n = self.free.len();
        let mut method = SolveMethod::Cg;
        let mut sols: Vec<Option<(Vec<f64>, usize, f64)>> = vec![None; rhs.len()];
        // Auto: several right-hand sides amortize one factorization; a single one goes through PCG.
        let try_cg = match cfg.kind {
            SolverKind::Cg => true,
            SolverKind::Auto => rhs.len() == 1,
            SolverKind::Direct => false,
        };
        if try_cg {
            for (k, f) in rhs.iter().enumerate() {
                let (x, it, rel) = pcg(&self.k_ii, f, cfg.rtol, cfg.cg_max_iter);
                if rel <= cfg.rtol {
                    sols[k] = Some((x, it, rel));
                } else if cfg.kind == SolverKind::Cg {
                    return Err(Error::NotConverged {
                        iterations: it,
                        residual: rel,
                    });
                } else {
                    break;
                }
            }
        }
        if sols.iter().any(Option::is_none) {
            method = SolveMethod::Cholesky;
            let chol = self.cholesky()?;
            let (xs, passes, worst) = direct_solve(&self.k_ii, chol, &rhs, cfg);
            if !(worst <= cfg.rtol) {
                return Err(Error::NotConverged {
                    iterations: passes,
                    residual: worst,
                });
            }
            for (k, (x, f)) in xs.into_iter().zip(&rhs).enumerate() {
                let rel = if sparse::norm2(f) > 0.0 {
                    solver::residual(&self.k_ii, &x, f) / sparse::norm2(f)
                } else {
                    0.0
                };
                sols[k] = Some((x, passes, rel));
            }
        }
        let elapsed = start.elapsed().as_secs_f64() / bcs.len().max(1) as f64;
        let mut out = Vec::with_capacity(bcs.len());
        for (((label, _), mut g), sol) in bcs.iter().zip(lifts).zip(sols) {
            let (x, it, rel) = sol.expect("every right-hand side solved");
            for (k, &dof) in self.free.iter().enumerate() {
                g[dof] = x[k];
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Singular {
                    condition_estimate: f64::INFINITY,
                });
            }
            let values = g.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            let m = if n == 0 { SolveMethod::Trivial } else { method };
            let report = SolveReport {
                dofs: self.space.n_dofs(),
                iterations: it,
                residual: rel,
                wall_time: elapsed,
                method: m,
            };
            out.push((
                DisplacementField::new(self.space.clone(), values, label.clone()),
                report,
            ));
        }
        Ok(out)
    }

    pub fn solve(
        &self,
        label: FieldLabel,
        bc: BoundaryData,
        cfg: &SolverConfig,
    ) -> Result<(DisplacementField, SolveReport)> {
        Ok(self
            .solve_many(&[(label, bc)], cfg)?
            .pop()
            .expect("one solution"))
    }
}

/// Assembles and solves a single Dirichlet problem.
pub fn solve_dirichlet(
    mesh: Arc<Mesh>,
    params: &ElasticParams,
    bc: BoundaryData,
    order: ElementOrder,
    cfg: &SolverConfig,
) -> Result<(DisplacementField, SolveReport)> {
    Discretization::new(mesh, *params, order)?.solve(FieldLabel::Other("u".into()), bc, cfg)
}
