//! Isotropic Lamé tensor, strains and the rigid-displacement basis.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether a matrix is symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

/// Lamé parameters together with the ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElasticParams {
    pub lambda: f64,
    pub mu: f64,
    pub dim: usize,
}

impl ElasticParams {
    /// Validated constructor: requires `mu > 0` and `dim*lambda + 2*mu > 0`.
    pub fn new(lambda: f64, mu: f64, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
        }
        if !(mu > 0.0) || !(dim as f64 * lambda + 2.0 * mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lamé parameters λ={lambda}, μ={mu} violate ellipticity in d={dim}"
            )));
        }
        Ok(Self { lambda, mu, dim })
    }

    /// λ = μ = 1 in two dimensions.
    pub fn unit_2d() -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
            dim: 2,
        }
    }

    /// Ellipticity bounds `(min{2μ, dλ+2μ}, max{2μ, dλ+2μ})` of the quadratic form on symmetric matrices.
    pub fn ellipticity_bounds(&self) -> (f64, f64) {
        let a = 2.0 * self.mu;
        let b = self.dim as f64 * self.lambda + 2.0 * self.mu;
        (a.min(b), a.max(b))
    }

    /// Component C_ijkl = λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk), zero-based indices.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        self.lambda * d(i, j) * d(k, l) + self.mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    }

    /// Plane-strain material matrix in Voigt order (xx, yy, xy) with engineering shear.
    pub fn plane_strain_matrix(&self) -> [[f64; 3]; 3] {
        let (l, m) = (self.lambda, self.mu);
        [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]]
    }
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    if !a.is_square() {
        return false;
    }
    let scale = a.amax().max(1.0);
    (a - a.transpose()).amax() <= SYMMETRY_TOL * scale
}

/// Applies the Lamé tensor: λ tr(A) I + 2μ A.
pub fn lame_apply(params: &ElasticParams, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != params.dim || !is_symmetric(a) {
        return Err(Error::NotSymmetric);
    }
    let mut out = a * (2.0 * params.mu);
    let tr = a.trace();
    for i in 0..params.dim {
        out[(i, i)] += params.lambda * tr;
    }
    Ok(out)
}

/// Symmetric part of a displacement gradient.
pub fn strain(grad_u: &DMatrix<f64>) -> DMatrix<f64> {
    (grad_u + grad_u.transpose()) * 0.5
}

/// The pairing (ℂ e_u) : e_v.
pub fn energy_pairing(
    params: &ElasticParams,
    e_u: &DMatrix<f64>,
    e_v: &DMatrix<f64>,
) -> Result<f64> {
    if !is_symmetric(e_v) {
        return Err(Error::NotSymmetric);
    }
    let c = lame_apply(params, e_u)?;
    Ok(c.component_mul(e_v).sum())
}

/// One element ψ_α of the rigid-displacement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigidMotion {
    /// Translation along e_i (zero-based).
    Translation { dim: usize, axis: usize },
    /// Rotation x_j e_k − x_k e_j with j < k (zero-based).
    Rotation { dim: usize, j: usize, k: usize },
}

impl RigidMotion {
    pub fn dim(&self) -> usize {
        match *self {
            RigidMotion::Translation { dim, .. } | RigidMotion::Rotation { dim, .. } => dim,
        }
    }

    pub fn is_translation(&self) -> bool {
        matches!(self, RigidMotion::Translation { .. })
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        match *self {
            RigidMotion::Translation { axis, .. } => v[axis] = 1.0,
            RigidMotion::Rotation { j, k, .. } => {
                v[k] = x[j];
                v[j] = -x[k];
            }
        }
        v
    }

    /// Constant gradient, `grad[(r, c)] = ∂ψ_r/∂x_c`.
    pub fn gradient(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        if let RigidMotion::Rotation { j, k, .. } = *self {
            g[(k, j)] = 1.0;
            g[(j, k)] = -1.0;
        }
        g
    }

    /// Two-dimensional evaluation used by the finite-element code.
    pub fn eval2(&self, p: [f64; 2]) -> [f64; 2] {
        let v = self.eval(&p);
        [v[0], v[1]]
    }
}

/// Number of rigid motions in dimension `d`.
pub fn rigid_count(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Translations first, then rotations in lexicographic (j, k) order.
pub fn rigid_basis(d: usize) -> Vec<RigidMotion> {
    let mut out: Vec<RigidMotion> = (0..d)
        .map(|axis| RigidMotion::Translation { dim: d, axis })
        .collect();
    for j in 0..d {
        for k in (j + 1)..d {
            out.push(RigidMotion::Rotation { dim: d, j, k });
        }
    }
    out
}

/// Evaluates the basis at `x` and stacks the values as columns.
pub fn basis_matrix(d: usize, x: &[f64]) -> DMatrix<f64> {
    let basis = rigid_basis(d);
    let cols: Vec<DVector<f64>> = basis
        .iter()
        .map(|psi| DVector::from_vec(psi.eval(x)))
        .collect();
    DMatrix::from_columns(&cols)
}
