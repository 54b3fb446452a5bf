//! Cell-problem decomposition u = Σ C₁ᵅ v₁ᵅ + Σ C₂ᵅ v₂ᵅ + v₃.
//!
//! Each v_iᵅ carries the rigid mode ψ_α on ∂D_i and vanishes on the rest of the
//! boundary; v₃ carries the outer data φ. The constants C_iᵅ follow from the
//! vanishing of every traction moment on both inclusions, which is the
//! symmetric 2n×2n Gram system with entries a_ij^{αβ} = ∫(ℂe(v_iᵅ), e(v_jᵝ)).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::elasticity::{rigid_basis, ElasticParams, RigidMotion};
use crate::error::{Error, Result};
use crate::fem::{
    boundary_traction_moment, energy_integral, max_gradient, BoundaryData, Discretization,
    DisplacementField, FieldLabel, GradientMax, Region, SolveReport, SolverConfig, Trace,
};
use crate::geometry::BoundaryTag;
use crate::par;

/// Relative asymmetry above which assembly reports a discretization fault.
pub const ASYMMETRY_LIMIT: f64 = 1e-6;

fn inclusion_tag(i: usize) -> BoundaryTag {
    if i == 0 {
        BoundaryTag::InclusionTop
    } else {
        BoundaryTag::InclusionBottom
    }
}

/// Solved cell problems on one mesh.
#[derive(Debug, Clone)]
pub struct CellProblems {
    pub params: ElasticParams,
    pub basis: Vec<RigidMotion>,
    /// `v[i][α]` solves the problem with ψ_α on ∂D_{i+1}.
    pub v: [Vec<DisplacementField>; 2],
    pub v3: DisplacementField,
    pub reports: Vec<SolveReport>,
}

impl CellProblems {
    pub fn n_alpha(&self) -> usize {
        self.basis.len()
    }

    /// Fields in system order: v₁¹ … v₁ⁿ, v₂¹ … v₂ⁿ.
    pub fn ordered(&self) -> Vec<&DisplacementField> {
        self.v[0].iter().chain(self.v[1].iter()).collect()
    }
}

/// Solves the d(d+1)/2·2 + 1 cell problems with one shared factorization.
pub fn solve_cell_problems(
    disc: &Discretization,
    phi: Trace,
    cfg: &SolverConfig,
) -> Result<CellProblems> {
    let basis = rigid_basis(disc.params.dim);
    let zero: Trace = Arc::new(|_| [0.0, 0.0]);
    let mut bcs = Vec::with_capacity(2 * basis.len() + 1);
    for i in 0..2 {
        for (alpha, &psi) in basis.iter().enumerate() {
            let rigid: Trace = Arc::new(move |x| psi.eval2(x));
            let (top, bottom) = if i == 0 {
                (rigid, zero.clone())
            } else {
                (zero.clone(), rigid)
            };
            bcs.push((
                FieldLabel::Cell {
                    inclusion: i as u8 + 1,
                    alpha,
                },
                BoundaryData::new(top, bottom, zero.clone()),
            ));
        }
    }
    bcs.push((FieldLabel::Data, BoundaryData::new(zero.clone(), zero, phi)));
    let mut solved = disc.solve_many(&bcs, cfg)?;
    let reports = solved.iter().map(|s| s.1).collect();
    let v3 = solved.pop().expect("v3 solved").0;
    let n = basis.len();
    let v2: Vec<DisplacementField> = solved.drain(n..).map(|s| s.0).collect();
    let v1: Vec<DisplacementField> = solved.into_iter().map(|s| s.0).collect();
    Ok(CellProblems {
        params: disc.params,
        basis,
        v: [v1, v2],
        v3,
        reports,
    })
}

/// Gram system and its solution.
#[derive(Debug, Clone)]
pub struct CoefficientSystem {
    pub n_alpha: usize,
    /// `a[i][j][(α, β)] = a_{i+1,j+1}^{αβ} = ∫(ℂe(v_iᵅ), e(v_jᵝ))`.
    pub a: [[DMatrix<f64>; 2]; 2],
    pub b: [DVector<f64>; 2],
    pub c: Option<[DVector<f64>; 2]>,
    /// Relative asymmetry of the assembled 2n×2n matrix before averaging.
    pub asymmetry: f64,
    /// ‖Mx − b‖ / ‖b‖ of the solved system.
    pub residual: f64,
    /// p = b₁ − (a₁₁ + a₂₁)ᵀC₂.
    pub p: Option<DVector<f64>>,
    /// ‖a₁₁(C₁ − C₂) − p‖ / ‖p‖.
    pub p_residual: f64,
}

impl CoefficientSystem {
    pub fn a11(&self) -> &DMatrix<f64> {
        &self.a[0][0]
    }

    /// Full 2n×2n matrix; row (j, β), column (i, α) holds a_ij^{αβ}.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n_alpha;
        DMatrix::from_fn(2 * n, 2 * n, |r, c| self.a[c / n][r / n][(c % n, r % n)])
    }

    pub fn rhs(&self) -> DVector<f64> {
        let n = self.n_alpha;
        DVector::from_fn(2 * n, |r, _| self.b[r / n][r % n])
    }

    /// C₁ − C₂, once solved.
    pub fn diff(&self) -> Option<DVector<f64>> {
        self.c.as_ref().map(|c| &c[0] - &c[1])
    }

    /// Eigenvalues of a₁₁ in ascending order.
    pub fn a11_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .a11()
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Fills a_ij and b_j from volume energy integrals; every ordered pair is
/// computed, the asymmetry recorded, and the matrix symmetrized.
pub fn assemble_system(params: &ElasticParams, cells: &CellProblems) -> Result<CoefficientSystem> {
    let n = cells.n_alpha();
    let fields = cells.ordered();
    let pairs: Vec<(usize, usize)> = (0..2 * n)
        .flat_map(|k| (0..2 * n).map(move |l| (k, l)))
        .collect();
    let energies = par::map_slice(&pairs, |&(k, l)| {
        energy_integral(params, fields[k], fields[l], Region::All)
    });
    let loads = par::map_range(2 * n, |k| {
        energy_integral(params, &cells.v3, fields[k], Region::All)
    });
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for (&(k, l), e) in pairs.iter().zip(energies) {
        g[(k, l)] = e?;
    }
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let asymmetry = (&g - g.transpose()).amax() / scale;
    if asymmetry > ASYMMETRY_LIMIT {
        return Err(Error::Asymmetric { defect: asymmetry });
    }
    let g = 0.5 * (&g + g.transpose());
    let block = |i: usize, j: usize| DMatrix::from_fn(n, n, |al, be| g[(i * n + al, j * n + be)]);
    let mut bvec = Vec::with_capacity(2 * n);
    for l in loads {
        bvec.push(-l?);
    }
    let b = [
        DVector::from_fn(n, |r, _| bvec[r]),
        DVector::from_fn(n, |r, _| bvec[n + r]),
    ];
    Ok(CoefficientSystem {
        n_alpha: n,
        a: [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]],
        b,
        c: None,
        asymmetry,
        residual: f64::NAN,
        p: None,
        p_residual: f64::NAN,
    })
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let ev = m.clone().symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Solves the 2n×2n system densely and checks the difference relation a₁₁(C₁ − C₂) = p.
pub fn solve_coefficients(mut sys: CoefficientSystem) -> Result<CoefficientSystem> {
    let n = sys.n_alpha;
    let m = sys.matrix();
    let rhs = sys.rhs();
    let x = match m.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            return Err(Error::Singular {
                condition_estimate: condition_estimate(&m),
            })
        }
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            condition_estimate: condition_estimate(&m),
        });
    }
    let bn = rhs.norm();
    sys.residual = if bn > 0.0 {
        (&m * &x - &rhs).norm() / bn
    } else {
        (&m * &x).norm()
    };
    let c1 = DVector::from_fn(n, |r, _| x[r]);
    let c2 = DVector::from_fn(n, |r, _| x[n + r]);
    let p = &sys.b[0] - (&sys.a[0][0] + &sys.a[1][0]).transpose() * &c2;
    let diff = &c1 - &c2;
    let defect = (&sys.a[0][0] * &diff - &p).norm();
    let pn = p.norm();
    sys.p_residual = if pn > 0.0 { defect / pn } else { defect };
    sys.p = Some(p);
    sys.c = Some([c1, c2]);
    Ok(sys)
}

/// C₁ − C₂ from Cramer's rule on a₁₁ x = p (an independent route to the difference).
pub fn cramer_diff(sys: &CoefficientSystem) -> Result<DVector<f64>> {
    let p = sys
        .p
        .as_ref()
        .ok_or(Error::InvalidParameter("system not solved".into()))?;
    let a = sys.a11();
    let det = a.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular {
            condition_estimate: condition_estimate(a),
        });
    }
    Ok(DVector::from_fn(sys.n_alpha, |k, _| {
        let mut ak = a.clone();
        ak.set_column(k, p);
        ak.determinant() / det
    }))
}

/// u = Σ C₁ᵅ v₁ᵅ + Σ C₂ᵅ v₂ᵅ + v₃.
pub fn reconstruct(cells: &CellProblems, sys: &CoefficientSystem) -> Result<DisplacementField> {
    let c = sys
        .c
        .as_ref()
        .ok_or(Error::InvalidParameter("system not solved".into()))?;
    if c[0].len() != cells.n_alpha() {
        return Err(Error::InvalidParameter(
            "coefficient count does not match the cell problems".into(),
        ));
    }
    let mut terms: Vec<(f64, &DisplacementField)> = Vec::with_capacity(2 * cells.n_alpha() + 1);
    for i in 0..2 {
        for (alpha, f) in cells.v[i].iter().enumerate() {
            terms.push((c[i][alpha], f));
        }
    }
    terms.push((1.0, &cells.v3));
    DisplacementField::linear_combination(&terms, FieldLabel::Reconstructed)
}

/// Traction moments ∫_{∂D_i} (ℂe(u)ν)·ψ_α, `[i][α]`.
pub fn traction_moments(params: &ElasticParams, u: &DisplacementField) -> Result<[Vec<f64>; 2]> {
    let basis = rigid_basis(params.dim);
    let mut out = [Vec::new(), Vec::new()];
    for (i, slot) in out.iter_mut().enumerate() {
        for psi in &basis {
            slot.push(boundary_traction_moment(params, u, inclusion_tag(i), psi)?);
        }
    }
    Ok(out)
}

/// b_jᵝ computed from boundary traction moments of v₃ instead of volume integrals.
pub fn traction_loads(params: &ElasticParams, cells: &CellProblems) -> Result<[DVector<f64>; 2]> {
    let m = traction_moments(params, &cells.v3)?;
    Ok([
        DVector::from_vec(m[0].clone()),
        DVector::from_vec(m[1].clone()),
    ])
}

/// a_ij^{αβ} = −∫_{∂D_j} (ℂe(v_iᵅ)ν)·ψ_β from boundary traction moments.
pub fn traction_gram(
    params: &ElasticParams,
    cells: &CellProblems,
) -> Result<[[DMatrix<f64>; 2]; 2]> {
    let n = cells.n_alpha();
    let mut a: [[DMatrix<f64>; 2]; 2] = Default::default();
    for (i, row) in a.iter_mut().enumerate() {
        for (j, blk) in row.iter_mut().enumerate() {
            *blk = DMatrix::zeros(n, n);
            for alpha in 0..n {
                for (beta, psi) in cells.basis.iter().enumerate() {
                    blk[(alpha, beta)] = -boundary_traction_moment(
                        params,
                        &cells.v[i][alpha],
                        inclusion_tag(j),
                        psi,
                    )?;
                }
            }
        }
    }
    Ok(a)
}

/// max |∇(v₁ᵅ + v₂ᵅ)| over `region` for each α.
pub fn sum_field_check(cells: &CellProblems, region: Region) -> Result<Vec<GradientMax>> {
    (0..cells.n_alpha())
        .map(|alpha| {
            let s = DisplacementField::linear_combination(
                &[(1.0, &cells.v[0][alpha]), (1.0, &cells.v[1][alpha])],
                FieldLabel::Other(format!("v1_{0}+v2_{0}", alpha + 1)),
            )?;
            max_gradient(&s, region)
        })
        .collect()
}

/// Cell problems, solved system and reconstructed field for one boundary datum.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub cells: CellProblems,
    pub system: CoefficientSystem,
    pub u: DisplacementField,
}

/// Full pipeline: cell problems → Gram system → coefficients → u.
pub fn decompose(disc: &Discretization, phi: Trace, cfg: &SolverConfig) -> Result<Decomposition> {
    let cells = solve_cell_problems(disc, phi, cfg)?;
    let system = solve_coefficients(assemble_system(&disc.params, &cells)?)?;
    let u = reconstruct(&cells, &system)?;
    Ok(Decomposition { cells, system, u })
}

/// Serializable summary of a solved system (flat key-value form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub a11: Vec<Vec<f64>>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub diff: Vec<f64>,
    pub residual: f64,
    pub p_residual: f64,
    pub asymmetry: f64,
}

impl CoefficientReport {
    pub fn from_system(sys: &CoefficientSystem) -> Option<Self> {
        let c = sys.c.as_ref()?;
        let a = sys.a11();
        Some(Self {
            a11: (0..sys.n_alpha)
                .map(|r| (0..sys.n_alpha).map(|k| a[(r, k)]).collect())
                .collect(),
            c1: c[0].iter().copied().collect(),
            c2: c[1].iter().copied().collect(),
            diff: (&c[0] - &c[1]).iter().copied().collect(),
            residual: sys.residual,
            p_residual: sys.p_residual,
            asymmetry: sys.asymmetry,
        })
    }
}
