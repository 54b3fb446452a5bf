use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elasticity::ElasticParams;
use crate::geometry::{signed_area, BoundaryTag, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementOrder {
    Linear,
    Quadratic,
}

impl ElementOrder {
    pub fn nodes_per_cell(&self) -> usize {
        match self {
            ElementOrder::Linear => 3,
            ElementOrder::Quadratic => 6,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            ElementOrder::Linear => 1,
            ElementOrder::Quadratic => 2,
        }
    }
}

/// Barycentric points and weights (fractions of the area) of the element rule.
pub(crate) fn quadrature_rule(order: ElementOrder) -> &'static [([f64; 3], f64)] {
    const CENTROID: [([f64; 3], f64); 1] = [([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)];
    const THREE: [([f64; 3], f64); 3] = [
        ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
        ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
        ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
    ];
    match order {
        ElementOrder::Linear => &CENTROID,
        ElementOrder::Quadratic => &THREE,
    }
}

/// Lagrange space on a triangulation. Node ordering per cell is
/// `[v0, v1, v2, m01, m12, m20]` for quadratic elements.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub order: ElementOrder,
    pub points: Vec<[f64; 2]>,
    cell_nodes: Vec<usize>,
    pub node_tags: Vec<Option<BoundaryTag>>,
    /// (cell, barycentric point) at the midpoint of every edge on ∂D₁ ∪ ∂D₂.
    pub inclusion_edge_samples: Vec<(usize, [f64; 3])>,
}

/// Geometry of one triangle: area and constant barycentric gradients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellGeom {
    pub area: f64,
    pub grad_l: [[f64; 2]; 3],
}

impl CellGeom {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let area = signed_area(p[0], p[1], p[2]);
        let s = 1.0 / (2.0 * area);
        let grad_l = [
            [(p[1][1] - p[2][1]) * s, (p[2][0] - p[1][0]) * s],
            [(p[2][1] - p[0][1]) * s, (p[0][0] - p[2][0]) * s],
            [(p[0][1] - p[1][1]) * s, (p[1][0] - p[0][0]) * s],
        ];
        Self { area, grad_l }
    }
}

/// Shape-function gradients at barycentric point `l`.
pub(crate) fn shape_grads(order: ElementOrder, g: &CellGeom, l: [f64; 3]) -> [[f64; 2]; 6] {
    let gl = g.grad_l;
    let mut out = [[0.0; 2]; 6];
    match order {
        ElementOrder::Linear => {
            out[..3].copy_from_slice(&gl);
        }
        ElementOrder::Quadratic => {
            for i in 0..3 {
                let f = 4.0 * l[i] - 1.0;
                out[i] = [f * gl[i][0], f * gl[i][1]];
            }
            for (e, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                out[3 + e] = [
                    4.0 * (l[i] * gl[j][0] + l[j] * gl[i][0]),
                    4.0 * (l[i] * gl[j][1] + l[j] * gl[i][1]),
                ];
            }
        }
    }
    out
}

/// Shape-function values at barycentric point `l`.
pub(crate) fn shape_values(order: ElementOrder, l: [f64; 3]) -> [f64; 6] {
    match order {
        ElementOrder::Linear => [l[0], l[1], l[2], 0.0, 0.0, 0.0],
        ElementOrder::Quadratic => [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ],
    }
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: ElementOrder) -> Self {
        let mut points = mesh.nodes.clone();
        let vertex_tags = mesh.node_tags();
        let mut node_tags = vertex_tags.clone();
        let mut edge_tag = HashMap::new();
        for e in &mesh.boundary_edges {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            edge_tag.insert(key, e.tag);
        }
        let nloc = order.nodes_per_cell();
        let mut cell_nodes = Vec::with_capacity(mesh.cells.len() * nloc);
        let mut edge_node: HashMap<(usize, usize), usize> = HashMap::new();
        let mut inclusion_edge_samples = Vec::new();
        for (c, t) in mesh.cells.iter().enumerate() {
            cell_nodes.extend_from_slice(t);
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let key = (t[i].min(t[j]), t[i].max(t[j]));
                let tag = edge_tag.get(&key).copied();
                if matches!(
                    tag,
                    Some(BoundaryTag::InclusionTop | BoundaryTag::InclusionBottom)
                ) {
                    let mut l = [0.0; 3];
                    l[i] = 0.5;
                    l[j] = 0.5;
                    inclusion_edge_samples.push((c, l));
                }
                if order == ElementOrder::Quadratic {
                    let id = *edge_node.entry(key).or_insert_with(|| {
                        let (a, b) = (mesh.nodes[key.0], mesh.nodes[key.1]);
                        points.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                        node_tags.push(tag);
                        points.len() - 1
                    });
                    cell_nodes.push(id);
                }
            }
        }
        Self {
            mesh,
            order,
            points,
            cell_nodes,
            node_tags,
            inclusion_edge_samples,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.points.len()
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.points.len()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.cells.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let n = self.order.nodes_per_cell();
        &self.cell_nodes[c * n..(c + 1) * n]
    }

    pub(crate) fn geom(&self, c: usize) -> CellGeom {
        CellGeom::new(self.mesh.cell_points(c))
    }

    /// Physical point of barycentric coordinates `l` in cell `c`.
    pub fn point_at(&self, c: usize, l: [f64; 3]) -> [f64; 2] {
        let p = self.mesh.cell_points(c);
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }

    pub fn centroid(&self, c: usize) -> [f64; 2] {
        self.point_at(c, [1.0 / 3.0; 3])
    }

    /// Barycentric coordinates of `x` in cell `c`.
    pub fn barycentric(&self, c: usize, x: [f64; 2]) -> [f64; 3] {
        let p = self.mesh.cell_points(c);
        let a = signed_area(p[0], p[1], p[2]);
        [
            signed_area(x, p[1], p[2]) / a,
            signed_area(p[0], x, p[2]) / a,
            signed_area(p[0], p[1], x) / a,
        ]
    }

    /// Cell containing `x` (closed, with a small tolerance), if any.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let tol = -1e-10;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for c in 0..self.n_cells() {
            let p = self.mesh.cell_points(c);
            let (xmin, xmax) = (
                p[0][0].min(p[1][0]).min(p[2][0]),
                p[0][0].max(p[1][0]).max(p[2][0]),
            );
            let (ymin, ymax) = (
                p[0][1].min(p[1][1]).min(p[2][1]),
                p[0][1].max(p[1][1]).max(p[2][1]),
            );
            let slack = 1e-10 * (xmax - xmin).max(ymax - ymin);
            if x[0] < xmin - slack
                || x[0] > xmax + slack
                || x[1] < ymin - slack
                || x[1] > ymax + slack
            {
                continue;
            }
            let l = self.barycentric(c, x);
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= tol && best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((c, l, worst));
            }
        }
        best.map(|(c, l, _)| (c, l))
    }

    /// Element stiffness in plane strain, row-major over local dofs (2·node + component).
    pub(crate) fn element_stiffness(&self, params: &ElasticParams, c: usize) -> Vec<f64> {
        let nloc = self.order.nodes_per_cell();
        let nd = 2 * nloc;
        let d = params.plane_strain_matrix();
        let g = self.geom(c);
        let mut k = vec![0.0; nd * nd];
        for &(l, w) in quadrature_rule(self.order) {
            let gr = shape_grads(self.order, &g, l);
            let wq = w * g.area;
            // B columns: dof (a, 0) → (gx, 0, gy); dof (a, 1) → (0, gy, gx).
            let mut b = vec![[0.0; 3]; nd];
            for a in 0..nloc {
                b[2 * a] = [gr[a][0], 0.0, gr[a][1]];
                b[2 * a + 1] = [0.0, gr[a][1], gr[a][0]];
            }
            for i in 0..nd {
                let db = [
                    d[0][0] * b[i][0] + d[0][1] * b[i][1],
                    d[1][0] * b[i][0] + d[1][1] * b[i][1],
                    d[2][2] * b[i][2],
                ];
                for j in 0..nd {
                    k[i * nd + j] += wq * (db[0] * b[j][0] + db[1] * b[j][1] + db[2] * b[j][2]);
                }
            }
        }
        k
    }
}
