use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::space::{quadrature_rule, shape_grads, shape_values, FeSpace};
use super::BoundaryData;
use crate::elasticity::{ElasticParams, RigidMotion};
use crate::error::{Error, Result};
use crate::geometry::BoundaryTag;
use crate::par;

/// Which problem a field solves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldLabel {
    /// v_iᵅ: rigid mode `alpha` (zero-based) on inclusion `inclusion` ∈ {1, 2}.
    Cell {
        inclusion: u8,
        alpha: usize,
    },
    /// v₃: the outer data φ with homogeneous data on both inclusions.
    Data,
    Reconstructed,
    Other(String),
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldLabel::Cell { inclusion, alpha } => write!(f, "v{inclusion}_{}", alpha + 1),
            FieldLabel::Data => f.write_str("v3"),
            FieldLabel::Reconstructed => f.write_str("u"),
            FieldLabel::Other(s) => f.write_str(s),
        }
    }
}

/// Nodal displacement on a finite-element space. Immutable once built.
#[derive(Debug, Clone)]
pub struct DisplacementField {
    pub space: Arc<FeSpace>,
    pub values: Vec<[f64; 2]>,
    pub label: FieldLabel,
}

impl DisplacementField {
    pub fn new(space: Arc<FeSpace>, values: Vec<[f64; 2]>, label: FieldLabel) -> Self {
        assert_eq!(values.len(), space.n_nodes(), "one value per node");
        Self {
            space,
            values,
            label,
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(
        space: Arc<FeSpace>,
        f: impl Fn([f64; 2]) -> [f64; 2],
        label: FieldLabel,
    ) -> Self {
        let values = space.points.iter().map(|&p| f(p)).collect();
        Self {
            space,
            values,
            label,
        }
    }

    pub fn zero(space: Arc<FeSpace>, label: FieldLabel) -> Self {
        Self::interpolate(space, |_| [0.0, 0.0], label)
    }

    pub fn same_space(&self, other: &DisplacementField) -> bool {
        Arc::ptr_eq(&self.space, &other.space)
    }

    /// Σ cₖ fₖ; all fields must share one space.
    pub fn linear_combination(
        terms: &[(f64, &DisplacementField)],
        label: FieldLabel,
    ) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyRegion)?.1;
        if terms.iter().any(|(_, f)| !f.same_space(first)) {
            return Err(Error::MeshMismatch);
        }
        let values = (0..first.values.len())
            .map(|n| {
                let mut v = [0.0; 2];
                for (c, f) in terms {
                    v[0] += c * f.values[n][0];
                    v[1] += c * f.values[n][1];
                }
                v
            })
            .collect();
        Ok(Self {
            space: first.space.clone(),
            values,
            label,
        })
    }

    pub fn sub(&self, other: &DisplacementField) -> Result<Self> {
        Self::linear_combination(
            &[(1.0, self), (-1.0, other)],
            FieldLabel::Other(format!("{}-{}", self.label, other.label)),
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| [s * v[0], s * v[1]]).collect(),
            label: self.label.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v[0].is_finite() && v[1].is_finite())
    }

    /// Largest nodal deviation from the Dirichlet data over tagged nodes.
    pub fn boundary_defect(&self, bc: &BoundaryData) -> f64 {
        let mut worst = 0.0f64;
        for (n, tag) in self.space.node_tags.iter().enumerate() {
            if let Some(tag) = tag {
                let g = bc.trace(*tag)(self.space.points[n]);
                worst = worst
                    .max((g[0] - self.values[n][0]).abs())
                    .max((g[1] - self.values[n][1]).abs());
            }
        }
        worst
    }

    /// Largest nodal deviation from `f`.
    pub fn max_nodal_deviation(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
        self.space
            .points
            .iter()
            .zip(&self.values)
            .map(|(&p, v)| {
                let g = f(p);
                (g[0] - v[0]).abs().max((g[1] - v[1]).abs())
            })
            .fold(0.0, f64::max)
    }

    /// ∇u inside cell `c` at barycentric point `l`; entry (r, k) is ∂u_r/∂x_k.
    pub fn cell_gradient(&self, c: usize, l: [f64; 3]) -> Matrix2<f64> {
        let g = self.space.geom(c);
        let gr = shape_grads(self.space.order, &g, l);
        let mut out = Matrix2::zeros();
        for (a, &node) in self.space.cell(c).iter().enumerate() {
            let u = self.values[node];
            for r in 0..2 {
                for k in 0..2 {
                    out[(r, k)] += u[r] * gr[a][k];
                }
            }
        }
        out
    }

    pub fn cell_value(&self, c: usize, l: [f64; 3]) -> [f64; 2] {
        let s = shape_values(self.space.order, l);
        let mut out = [0.0; 2];
        for (a, &node) in self.space.cell(c).iter().enumerate() {
            out[0] += s[a] * self.values[node][0];
            out[1] += s[a] * self.values[node][1];
        }
        out
    }

    pub fn value_at(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let (c, l) = self
            .space
            .locate(x)
            .ok_or(Error::OutsideDomain { x: x[0], y: x[1] })?;
        Ok(self.cell_value(c, l))
    }
}

/// Element gradient at a point of the domain.
pub fn gradient_at(field: &DisplacementField, x: [f64; 2]) -> Result<Matrix2<f64>> {
    let (c, l) = field
        .space
        .locate(x)
        .ok_or(Error::OutsideDomain { x: x[0], y: x[1] })?;
    Ok(field.cell_gradient(c, l))
}

/// Sampling regions. A sample belongs to a region when its horizontal coordinate
/// satisfies the region's bound and its cell lies in the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// Ω_r: |x₁| < r inside the gap.
    Neck(f64),
    /// Ω \ Ω_r.
    ShellMinusNeck(f64),
    /// Gap cells with |x₁ − center| < half_width.
    Patch {
        center: f64,
        half_width: f64,
    },
    All,
}

impl Region {
    fn cell_in_gap(space: &FeSpace, c: usize) -> bool {
        space.mesh.cell_in_gap(c)
    }

    /// Whether a sample at `x` in cell `c` belongs to the region.
    pub fn contains(&self, space: &FeSpace, c: usize, x: [f64; 2]) -> bool {
        match *self {
            Region::All => true,
            Region::Neck(r) => x[0].abs() < r && Self::cell_in_gap(space, c),
            Region::ShellMinusNeck(r) => !(x[0].abs() < r && Self::cell_in_gap(space, c)),
            Region::Patch { center, half_width } => {
                (x[0] - center).abs() < half_width && Self::cell_in_gap(space, c)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientMax {
    /// Frobenius norm of ∇u at the argmax sample.
    pub value: f64,
    pub location: [f64; 2],
}

/// Maximum Frobenius norm of ∇u over element quadrature points and the
/// midpoints of edges on ∂D₁ ∪ ∂D₂ inside `region`.
pub fn max_gradient(field: &DisplacementField, region: Region) -> Result<GradientMax> {
    let space = &field.space;
    let rule = quadrature_rule(space.order);
    let per_cell = par::map_range(space.n_cells(), |c| {
        let mut best: Option<GradientMax> = None;
        for &(l, _) in rule {
            let x = space.point_at(c, l);
            if region.contains(space, c, x) {
                let v = field.cell_gradient(c, l).norm();
                if best.is_none_or(|b| v > b.value) {
                    best = Some(GradientMax {
                        value: v,
                        location: x,
                    });
                }
            }
        }
        best
    });
    let edge = par::map_slice(&space.inclusion_edge_samples, |&(c, l)| {
        let x = space.point_at(c, l);
        region.contains(space, c, x).then(|| GradientMax {
            value: field.cell_gradient(c, l).norm(),
            location: x,
        })
    });
    let mut best: Option<GradientMax> = None;
    for s in per_cell.into_iter().chain(edge).flatten() {
        if best.is_none_or(|b| s.value > b.value) {
            best = Some(s);
        }
    }
    best.ok_or(Error::EmptyRegion)
}

/// ∫_region f(x, ∇u(x)) by the element rule.
pub fn integrate_gradient(
    field: &DisplacementField,
    region: Region,
    f: impl Fn([f64; 2], &Matrix2<f64>) -> f64 + Sync + Send,
) -> f64 {
    let space = &field.space;
    let rule = quadrature_rule(space.order);
    par::sum_range(space.n_cells(), |c| {
        let area = space.geom(c).area;
        rule.iter()
            .map(|&(l, w)| {
                let x = space.point_at(c, l);
                if region.contains(space, c, x) {
                    w * area * f(x, &field.cell_gradient(c, l))
                } else {
                    0.0
                }
            })
            .sum()
    })
}

/// ∫ (ℂ e(a), e(b)) over `region` (plane strain).
pub fn energy_integral(
    params: &ElasticParams,
    a: &DisplacementField,
    b: &DisplacementField,
    region: Region,
) -> Result<f64> {
    if !a.same_space(b) {
        return Err(Error::MeshMismatch);
    }
    let space = &a.space;
    let rule = quadrature_rule(space.order);
    let (lam, mu) = (params.lambda, params.mu);
    Ok(par::sum_range(space.n_cells(), |c| {
        let area = space.geom(c).area;
        let mut s = 0.0;
        for &(l, w) in rule {
            let x = space.point_at(c, l);
            if !region.contains(space, c, x) {
                continue;
            }
            let ga = a.cell_gradient(c, l);
            let gb = b.cell_gradient(c, l);
            let ea = 0.5 * (ga + ga.transpose());
            let eb = 0.5 * (gb + gb.transpose());
            s += w * area * (lam * ea.trace() * eb.trace() + 2.0 * mu * ea.dot(&eb));
        }
        s
    }))
}

/// ∫_{∂D} (ℂe(u)ν)·ψ with ν the normal pointing out of the inclusion, computed
/// from the discrete residual: −Σ_{nodes j on the tag} ψ(x_j)·(K u)_j.
pub fn boundary_traction_moment(
    params: &ElasticParams,
    field: &DisplacementField,
    tag: BoundaryTag,
    psi: &RigidMotion,
) -> Result<f64> {
    let space = &field.space;
    let on_tag: Vec<bool> = space.node_tags.iter().map(|t| *t == Some(tag)).collect();
    if !on_tag.iter().any(|&b| b) {
        return Err(Error::EmptyRegion);
    }
    let nloc = space.order.nodes_per_cell();
    let nd = 2 * nloc;
    let contrib = par::map_range(space.n_cells(), |c| {
        let nodes = space.cell(c);
        if !nodes.iter().any(|&n| on_tag[n]) {
            return 0.0;
        }
        let k = space.element_stiffness(params, c);
        let u: Vec<f64> = (0..nd).map(|i| field.values[nodes[i / 2]][i % 2]).collect();
        let mut s = 0.0;
        for (a, &n) in nodes.iter().enumerate() {
            if !on_tag[n] {
                continue;
            }
            let p = psi.eval2(space.points[n]);
            for comp in 0..2 {
                let row = 2 * a + comp;
                let ku: f64 = (0..nd).map(|j| k[row * nd + j] * u[j]).sum();
                s += p[comp] * ku;
            }
        }
        s
    });
    Ok(-contrib.into_iter().sum::<f64>())
}
