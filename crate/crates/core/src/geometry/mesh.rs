//! Block-structured triangulation of the shell Ω = D \ (D₁ ∪ D₂) in two dimensions.
//!
//! The neck |x₁| ≤ a is a tensor-product block: columns graded toward the
//! contact structure and `n_layers` layers spanning the gap in every column.
//! The rest of Ω is a radial O-grid between the outline of D₁ ∪ neck ∪ D₂
//! (star-shaped about (0, ε/2)) and the outer circle. Triangles of the O-grid
//! always have two vertices on one ray and one on the neighbouring ray, so
//! they cannot invert.

use serde::{Deserialize, Serialize};

use super::profile::{NeckProfile, ProfileKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryTag {
    /// ∂D₁, the upper inclusion.
    InclusionTop,
    /// ∂D₂, the lower inclusion.
    InclusionBottom,
    /// ∂D, the outer circle.
    Outer,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 3] = [
        BoundaryTag::InclusionTop,
        BoundaryTag::InclusionBottom,
        BoundaryTag::Outer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryTag::InclusionTop => "top",
            BoundaryTag::InclusionBottom => "bottom",
            BoundaryTag::Outer => "outer",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Mesh resolution controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradingConfig {
    /// Element layers spanning the gap.
    pub n_layers: usize,
    /// Columns per neck length scale near the contact structure.
    pub cells_per_scale: f64,
    /// Geometric growth ratio of neighbouring spacings.
    pub growth: f64,
    /// Target spacing far from the neck.
    pub far_spacing: f64,
    /// Resolution multiplier; spacings scale like 1/√budget.
    pub budget: f64,
    /// Hard cap on the node count.
    pub max_nodes: usize,
}

impl Default for GradingConfig {
    fn default() -> Self {
        Self {
            n_layers: 4,
            cells_per_scale: 4.0,
            growth: 1.2,
            far_spacing: 0.2,
            budget: 1.0,
            max_nodes: 2_000_000,
        }
    }
}

impl GradingConfig {
    fn refine(&self) -> f64 {
        self.budget.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradingReport {
    /// Fewest element layers over sampled neck fibers |x₁| < R.
    pub min_layers: usize,
    pub max_layers: usize,
    /// Smallest 4√3·area / Σ edge², in (0, 1].
    pub min_quality: f64,
    /// Half-width of the structured neck block.
    pub block_half_width: f64,
    pub n_columns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub profile: NeckProfile,
    pub nodes: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub report: GradingReport,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// 4√3·area / (l₁² + l₂² + l₃²); 1 for equilateral triangles.
pub fn triangle_quality(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let d2 = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
    let s = d2(a, b) + d2(b, c) + d2(c, a);
    4.0 * 3f64.sqrt() * signed_area(a, b, c) / s
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> [[f64; 2]; 3] {
        let t = self.cells[c];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    /// Whether `p` lies in the neck Ω_r = {|x₁| < r, h₂ < x₂ < ε + h₁}.
    pub fn in_neck(&self, p: [f64; 2], r: f64) -> bool {
        let pr = &self.profile;
        let tol = 1e-12 * pr.gap_radial(p[0]);
        p[0].abs() < r && p[1] >= pr.bottom(p[0]) - tol && p[1] <= pr.top(p[0]) + tol
    }

    /// Per-node boundary tag (None for interior nodes).
    pub fn node_tags(&self) -> Vec<Option<BoundaryTag>> {
        let mut tags = vec![None; self.nodes.len()];
        for e in &self.boundary_edges {
            for &n in &e.nodes {
                tags[n] = Some(e.tag);
            }
        }
        tags
    }

    /// Minimum quality over all cells.
    pub fn min_quality(&self) -> f64 {
        (0..self.cells.len())
            .map(|c| {
                let [a, b, d] = self.cell_points(c);
                triangle_quality(a, b, d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether all vertices of cell `c` lie in the closed band h₂ ≤ x₂ ≤ ε + h₁
    /// of their own abscissa, i.e. the cell belongs to the gap between the inclusions.
    pub fn cell_in_gap(&self, c: usize) -> bool {
        let pr = &self.profile;
        self.cell_points(c).iter().all(|p| {
            if p[0].abs() > pr.chart_limit() {
                return false;
            }
            let tol = 1e-12 * (1.0 + pr.gap_radial(p[0]));
            p[1] >= pr.bottom(p[0]) - tol && p[1] <= pr.top(p[0]) + tol
        })
    }

    /// Element layers crossed by the vertical fiber at x₁ inside the gap (triangle pairs).
    pub fn layers_at(&self, x1: f64) -> usize {
        let mut count = 0usize;
        for c in 0..self.cells.len() {
            let pts = self.cell_points(c);
            let xmin = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let xmax = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            if x1 > xmin && x1 < xmax && self.cell_in_gap(c) {
                count += 1;
            }
        }
        count.div_ceil(2)
    }

    /// Checks orientation, tags and closure; used by tests and after import.
    pub fn validate(&self) -> Result<()> {
        let fail = |region: &str, reason: String| {
            Err(Error::Meshing {
                region: region.into(),
                reason,
            })
        };
        for (c, t) in self.cells.iter().enumerate() {
            if t.iter().any(|&n| n >= self.nodes.len()) {
                return fail("cells", format!("cell {c} references a missing node"));
            }
            let [a, b, d] = self.cell_points(c);
            if !(signed_area(a, b, d) > 0.0) {
                return fail(
                    "cells",
                    format!(
                        "cell {c} at ({:.4}, {:.4}) is not positively oriented",
                        a[0], a[1]
                    ),
                );
            }
        }
        // Every boundary edge must be used by exactly one cell; every tagged curve closed.
        let mut edge_use = std::collections::HashMap::new();
        for t in &self.cells {
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let key = (t[i].min(t[j]), t[i].max(t[j]));
                *edge_use.entry(key).or_insert(0usize) += 1;
            }
        }
        let mut degree = std::collections::HashMap::new();
        for e in &self.boundary_edges {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            if edge_use.get(&key) != Some(&1) {
                return fail(
                    "boundary",
                    format!("tagged edge {:?} is not on the boundary", e.nodes),
                );
            }
            for &n in &e.nodes {
                *degree.entry((n, e.tag)).or_insert(0usize) += 1;
            }
        }
        if let Some(((n, tag), _)) = degree.iter().find(|(_, &d)| d != 2) {
            return fail(
                "boundary",
                format!("{} curve is not closed at node {n}", tag.name()),
            );
        }
        let free = edge_use.values().filter(|&&u| u == 1).count();
        if free != self.boundary_edges.len() {
            return fail(
                "boundary",
                format!(
                    "{free} boundary edges but {} tagged",
                    self.boundary_edges.len()
                ),
            );
        }
        Ok(())
    }
}

/// Marches from `start` toward `end` with spacing `h(distance from start)` and
/// rescales the points so the last one lands on `end`. Returns interior points and `end`.
fn march(start: f64, end: f64, h: impl Fn(f64) -> f64) -> Vec<f64> {
    let len = (end - start).abs();
    let dir = (end - start).signum();
    let mut s = vec![0.0];
    loop {
        let cur = *s.last().unwrap();
        let next = cur + h(cur);
        if next >= len {
            if s.len() > 1 && next - len > 0.5 * (next - cur) {
                s.pop();
            }
            break;
        }
        s.push(next);
    }
    s.push(len);
    // Absorb the mismatch of the final step by a uniform stretch.
    let n = s.len() - 1;
    let scale = len / s[n];
    s.iter().skip(1).map(|v| start + dir * v * scale).collect()
}

/// Half-width a of the neck block: δ(a) − ε ≈ a/4, clamped to [R, 1.8R].
fn block_half_width(p: &NeckProfile) -> f64 {
    let f = |a: f64| p.relative_height(a) - 0.25 * a;
    let (mut lo, mut hi) = (p.r_neck, 1.8 * p.r_neck);
    if f(lo) >= 0.0 {
        return lo;
    }
    if f(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Column abscissas on [0, a] (including both ends).
fn column_positions(p: &NeckProfile, g: &GradingConfig, a: f64) -> Vec<f64> {
    let refine = g.refine();
    let ns = g.cells_per_scale * refine;
    let ell = match p.kind {
        ProfileKind::Power => p.neck_scale(),
        ProfileKind::Flat => (p.epsilon / p.kappa0).sqrt(),
    };
    let cap = p.r_neck / (10.0 * refine);
    let h = |dist: f64| (ell / ns + (g.growth - 1.0) / refine * dist).min(cap);
    let mut xs = vec![0.0];
    if p.kind == ProfileKind::Flat && p.r0 > 0.0 {
        let mut inner = march(p.r0, 0.0, h);
        inner.pop();
        inner.reverse();
        xs.extend(inner);
        xs.push(p.r0);
        xs.extend(march(p.r0, a, h));
    } else {
        xs.extend(march(0.0, a, h));
    }
    xs
}

/// The inclusion outline outside the neck block, parametrized by arclength.
///
/// Points are returned as (x₁, Y) with Y the height above the ε-shifted base, so
/// ∂D₁ is (x₁, ε + Y) and ∂D₂ is (x₁, −Y).
struct Outline {
    a: f64,
    xc: f64,
    center: [f64; 2],
    radius: f64,
    theta0: f64,
    /// Cumulative arclength at the end of each piece: graph, arc, cap.
    ends: [f64; 3],
    graph_table: Vec<(f64, f64)>,
    h1: Box<dyn Fn(f64) -> f64>,
}

impl Outline {
    fn new(p: &NeckProfile, a: f64) -> Result<Self> {
        let xc = p.chart_limit();
        let r = p.r_neck;
        let pp = *p;
        let h1 = move |x: f64| pp.h1_radial(x);
        let s = 0.5 * p.relative_height_deriv(xc);
        let norm = (1.0 + s * s).sqrt();
        let center = [xc - r * s / norm, h1(xc) + r / norm];
        if center[0] <= 0.0 {
            return Err(Error::Meshing {
                region: "inclusion closure".into(),
                reason: format!("profile too steep at the chart end (slope {s:.3})"),
            });
        }
        let reach = (center[0].powi(2) + (center[1] + p.epsilon).powi(2)).sqrt() + r;
        if reach > 0.9 * p.outer_radius {
            return Err(Error::Meshing {
                region: "inclusion closure".into(),
                reason: format!(
                    "inclusion reaches radius {reach:.3}, too close to the outer circle"
                ),
            });
        }
        let theta0 = (-1.0f64).atan2(s);
        // Arclength table for the graph piece.
        let n = 4000;
        let mut graph_table = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = [a, h1(a)];
        graph_table.push((0.0, a));
        for i in 1..=n {
            let x = a + (xc - a) * i as f64 / n as f64;
            let cur = [x, h1(x)];
            acc += ((cur[0] - prev[0]).powi(2) + (cur[1] - prev[1]).powi(2)).sqrt();
            graph_table.push((acc, x));
            prev = cur;
        }
        let arc_len = r * (std::f64::consts::FRAC_PI_2 - theta0);
        let ends = [acc, acc + arc_len, acc + arc_len + center[0]];
        Ok(Self {
            a,
            xc,
            center,
            radius: r,
            theta0,
            ends,
            graph_table,
            h1: Box::new(h1),
        })
    }

    fn half_length(&self) -> f64 {
        self.ends[2]
    }

    /// Point at arclength `s` from the block corner (x₁ = a) toward the top of the cap.
    fn point(&self, s: f64) -> [f64; 2] {
        if s <= self.ends[0] {
            let t = &self.graph_table;
            let i = t.partition_point(|e| e.0 < s).clamp(1, t.len() - 1);
            let (s0, x0) = t[i - 1];
            let (s1, x1) = t[i];
            let x = if s1 > s0 {
                x0 + (x1 - x0) * (s - s0) / (s1 - s0)
            } else {
                x0
            };
            let x = x.clamp(self.a, self.xc);
            [x, (self.h1)(x)]
        } else if s <= self.ends[1] {
            let th = self.theta0 + (s - self.ends[0]) / self.radius;
            [
                self.center[0] + self.radius * th.cos(),
                self.center[1] + self.radius * th.sin(),
            ]
        } else {
            let x = (self.center[0] - (s - self.ends[1])).max(0.0);
            [x, self.center[1] + self.radius]
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LoopClass {
    Lateral,
    Top,
    Bottom,
}

/// Diagonal choice that keeps the mesh symmetric under x₁ ↦ −x₁ and the midplane reflection.
fn split_a(center: [f64; 2], mid: f64) -> bool {
    (center[0] >= 0.0) == (center[1] >= mid)
}

pub fn build_mesh(profile: &NeckProfile, grading: &GradingConfig) -> Result<Mesh> {
    let p = profile;
    if p.dim != 2 {
        return Err(Error::Unsupported(format!(
            "meshing is two-dimensional, got d = {}",
            p.dim
        )));
    }
    if grading.n_layers < 1
        || !(grading.budget > 0.0)
        || !(grading.growth > 1.0)
        || !(grading.cells_per_scale > 0.0)
    {
        return Err(Error::InvalidParameter(format!(
            "grading config {grading:?}"
        )));
    }
    let eps = p.epsilon;
    let mid = 0.5 * eps;
    let nl = grading.n_layers;
    let refine = grading.refine();

    // Neck block.
    let a = block_half_width(p);
    let half = column_positions(p, grading, a);
    let mut cols: Vec<f64> = half.iter().skip(1).rev().map(|x| -x).collect();
    cols.extend(&half);
    let ncol = cols.len();
    let est = ncol * (nl + 1)
        + (2.0 * std::f64::consts::PI * p.outer_radius / (grading.far_spacing / refine)).powi(2)
            as usize;
    if est > grading.max_nodes {
        return Err(Error::Meshing {
            region: "neck block".into(),
            reason: format!(
                "about {est} nodes needed, budget allows {}",
                grading.max_nodes
            ),
        });
    }
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    for &x in &cols {
        let (lo, hi) = (p.bottom(x), p.top(x));
        for k in 0..=nl {
            let y = if k == 0 {
                lo
            } else if k == nl {
                hi
            } else {
                lo + (hi - lo) * k as f64 / nl as f64
            };
            nodes.push([x, y]);
        }
    }
    let bid = |i: usize, k: usize| i * (nl + 1) + k;
    let mut cells: Vec<[usize; 3]> = Vec::new();
    let mut edges: Vec<BoundaryEdge> = Vec::new();
    for i in 0..ncol - 1 {
        for k in 0..nl {
            let (ll, lr, ur, ul) = (bid(i, k), bid(i + 1, k), bid(i + 1, k + 1), bid(i, k + 1));
            let c = [
                0.5 * (cols[i] + cols[i + 1]),
                0.25 * (nodes[ll][1] + nodes[lr][1] + nodes[ur][1] + nodes[ul][1]),
            ];
            if split_a(c, mid) {
                cells.push([ll, lr, ur]);
                cells.push([ll, ur, ul]);
            } else {
                cells.push([ll, lr, ul]);
                cells.push([lr, ur, ul]);
            }
        }
        edges.push(BoundaryEdge {
            nodes: [bid(i, 0), bid(i + 1, 0)],
            tag: BoundaryTag::InclusionBottom,
        });
        edges.push(BoundaryEdge {
            nodes: [bid(i, nl), bid(i + 1, nl)],
            tag: BoundaryTag::InclusionTop,
        });
    }

    // Inclusion outlines, right half from the block corner to the cap midpoint.
    let outline = Outline::new(p, a)?;
    let col_width = cols[ncol - 1] - cols[ncol - 2];
    let lateral = p.gap_radial(a) / nl as f64;
    let h0 = (col_width * lateral).sqrt();
    let h_far = grading.far_spacing / refine;
    let arc_s = march(0.0, outline.half_length(), |s| {
        (h0 + (grading.growth - 1.0) * s).min(h_far)
    });
    let right: Vec<[f64; 2]> = arc_s.iter().map(|&s| outline.point(s)).collect();
    // Full upper outline from the right corner (exclusive) to the left corner (exclusive).
    let mut upper: Vec<[f64; 2]> = right.clone();
    let last = upper.pop().expect("outline has points");
    upper.push([0.0, last[1]]);
    upper.extend(right.iter().rev().skip(1).map(|q| [-q[0], q[1]]));

    // Peanut loop, counter-clockwise about (0, ε/2).
    let mut loop_ids: Vec<usize> = Vec::new();
    let mut classes: Vec<LoopClass> = Vec::new();
    for k in 0..=nl {
        loop_ids.push(bid(ncol - 1, k));
        classes.push(LoopClass::Lateral);
    }
    for q in &upper {
        loop_ids.push(nodes.len());
        nodes.push([q[0], eps + q[1]]);
        classes.push(LoopClass::Top);
    }
    for k in (0..=nl).rev() {
        loop_ids.push(bid(0, k));
        classes.push(LoopClass::Lateral);
    }
    for q in upper.iter().rev() {
        loop_ids.push(nodes.len());
        nodes.push([q[0], -q[1]]);
        classes.push(LoopClass::Bottom);
    }
    let nloop = loop_ids.len();
    let c0 = [0.0, mid];
    let mut angles = Vec::with_capacity(nloop);
    let mut prev = f64::NEG_INFINITY;
    let mut offset = 0.0;
    for (i, &id) in loop_ids.iter().enumerate() {
        let q = nodes[id];
        let mut th = (q[1] - c0[1]).atan2(q[0] - c0[0]) + offset;
        if th < prev {
            offset += 2.0 * std::f64::consts::PI;
            th += 2.0 * std::f64::consts::PI;
        }
        if i > 0 && !(th > prev) {
            return Err(Error::Meshing {
                region: format!("inclusion outline near ({:.4}, {:.4})", q[0], q[1]),
                reason: "outline is not star-shaped about the neck center".into(),
            });
        }
        angles.push(th);
        prev = th;
    }
    if angles[nloop - 1] - angles[0] >= 2.0 * std::f64::consts::PI {
        return Err(Error::Meshing {
            region: "inclusion outline".into(),
            reason: "outline winds more than once".into(),
        });
    }

    // Radial O-grid.
    let ro = p.outer_radius;
    let outer: Vec<[f64; 2]> = loop_ids
        .iter()
        .map(|&id| {
            let q = nodes[id];
            let (dx, dy) = (q[0] - c0[0], q[1] - c0[1]);
            let l = (dx * dx + dy * dy).sqrt();
            let u = [dx / l, dy / l];
            let b = c0[0] * u[0] + c0[1] * u[1];
            let t = -b + (b * b - (c0[0] * c0[0] + c0[1] * c0[1]) + ro * ro).sqrt();
            [c0[0] + t * u[0], c0[1] + t * u[1]]
        })
        .collect();
    let ray_len: Vec<f64> = loop_ids
        .iter()
        .zip(&outer)
        .map(|(&id, o)| ((o[0] - nodes[id][0]).powi(2) + (o[1] - nodes[id][1]).powi(2)).sqrt())
        .collect();
    let lmin = ray_len.iter().cloned().fold(f64::INFINITY, f64::min);
    let taus = march(0.0, 1.0, |t| {
        (lateral + (grading.growth - 1.0) * t * lmin).min(h_far) / lmin
    });
    let nring = taus.len();
    let base = nodes.len();
    for (j, &t) in taus.iter().enumerate() {
        for (i, &id) in loop_ids.iter().enumerate() {
            let b = nodes[id];
            let o = outer[i];
            nodes.push(if j + 1 == nring {
                o
            } else {
                [b[0] + t * (o[0] - b[0]), b[1] + t * (o[1] - b[1])]
            });
        }
    }
    let ring = |i: usize, j: usize| {
        if j == 0 {
            loop_ids[i]
        } else {
            base + (j - 1) * nloop + i
        }
    };
    for i in 0..nloop {
        let i1 = (i + 1) % nloop;
        for j in 0..nring {
            let (p00, p10, p11, p01) = (ring(i, j), ring(i1, j), ring(i1, j + 1), ring(i, j + 1));
            let pts = [nodes[p00], nodes[p10], nodes[p11], nodes[p01]];
            let c = [
                0.25 * pts.iter().map(|q| q[0]).sum::<f64>(),
                0.25 * pts.iter().map(|q| q[1]).sum::<f64>(),
            ];
            let tris = if split_a(c, mid) {
                [[p00, p10, p11], [p00, p11, p01]]
            } else {
                [[p00, p10, p01], [p10, p11, p01]]
            };
            for t in tris {
                let area = signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
                if area == 0.0 || !area.is_finite() {
                    return Err(Error::Meshing {
                        region: format!("shell near ({:.4}, {:.4})", c[0], c[1]),
                        reason: "degenerate triangle".into(),
                    });
                }
                cells.push(if area > 0.0 { t } else { [t[0], t[2], t[1]] });
            }
        }
        let tag = match (classes[i], classes[i1]) {
            (LoopClass::Top, _) | (_, LoopClass::Top) => Some(BoundaryTag::InclusionTop),
            (LoopClass::Bottom, _) | (_, LoopClass::Bottom) => Some(BoundaryTag::InclusionBottom),
            _ => None,
        };
        if let Some(tag) = tag {
            edges.push(BoundaryEdge {
                nodes: [loop_ids[i], loop_ids[i1]],
                tag,
            });
        }
        edges.push(BoundaryEdge {
            nodes: [ring(i, nring), ring(i1, nring)],
            tag: BoundaryTag::Outer,
        });
    }

    let mut mesh = Mesh {
        profile: *p,
        nodes,
        cells,
        boundary_edges: edges,
        report: GradingReport {
            min_layers: 0,
            max_layers: 0,
            min_quality: 0.0,
            block_half_width: a,
            n_columns: ncol - 1,
        },
    };
    mesh.report = grading_report(&mesh, a, ncol - 1);
    Ok(mesh)
}

fn grading_report(mesh: &Mesh, a: f64, n_columns: usize) -> GradingReport {
    let r = mesh.profile.r_neck;
    // Off-grid sample abscissas so fibers never pass through vertices.
    let layers: Vec<usize> = (0..41)
        .map(|i| mesh.layers_at(r * (-0.975 + 0.04875 * i as f64) + 1.234_567e-7))
        .collect();
    GradingReport {
        min_layers: layers.iter().copied().min().unwrap_or(0),
        max_layers: layers.iter().copied().max().unwrap_or(0),
        min_quality: mesh.min_quality(),
        block_half_width: a,
        n_columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn march_hits_end() {
        let v = march(0.0, 1.0, |_| 0.3);
        assert_eq!(*v.last().unwrap(), 1.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let v = march(0.3, 0.0, |d| 0.01 + 0.2 * d);
        assert_eq!(*v.last().unwrap(), 0.0);
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn block_width_rules() {
        let p = NeckProfile::power(2, 1e-3, 2.0).unwrap();
        assert_eq!(block_half_width(&p), 0.5);
        let p = NeckProfile::power(2, 1e-3, 6.0).unwrap();
        assert!((block_half_width(&p) - 0.25f64.powf(0.2)).abs() < 1e-9);
    }

    #[test]
    fn quality_of_equilateral() {
        let q = triangle_quality([0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]);
        assert!((q - 1.0).abs() < 1e-12);
    }
}
