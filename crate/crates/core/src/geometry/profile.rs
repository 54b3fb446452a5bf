use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape family of the neck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// Flat contact set B′_{R₀} with a quadratic convex extension.
    Flat,
    /// Relative convexity of order m: (h₁ − h₂)(x′) = κ₀|x′|^m.
    Power,
}

/// Neck geometry: D₁ lies above x_d = ε + h₁(x′), D₂ below x_d = h₂(x′), h₂ = −h₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckProfile {
    pub kind: ProfileKind,
    pub dim: usize,
    pub epsilon: f64,
    pub kappa0: f64,
    pub m: f64,
    pub r0: f64,
    pub r_neck: f64,
    pub outer_radius: f64,
}

/// Validated constructor.
#[allow(clippy::too_many_arguments)]
pub fn make_profile(
    kind: ProfileKind,
    dim: usize,
    epsilon: f64,
    kappa0: f64,
    m: f64,
    r0: f64,
    r_neck: f64,
    outer_radius: f64,
) -> Result<NeckProfile> {
    let bad = |msg: String| Err(Error::InvalidParameter(msg));
    if dim < 2 {
        return bad(format!("dimension {dim} < 2"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return bad(format!("ε = {epsilon} must be positive"));
    }
    if !(kappa0 > 0.0) {
        return bad(format!("κ₀ = {kappa0} must be positive (convexity)"));
    }
    if !(r_neck > 0.0) {
        return bad(format!("neck half-width R = {r_neck} must be positive"));
    }
    if !(outer_radius >= 5.0 * r_neck) {
        return bad(format!(
            "outer radius {outer_radius} < 5R = {}",
            5.0 * r_neck
        ));
    }
    let m = match kind {
        ProfileKind::Power => {
            if !(m >= 2.0) || !m.is_finite() {
                return bad(format!("order m = {m} must be ≥ 2"));
            }
            m
        }
        ProfileKind::Flat => {
            if !(r0 >= 0.0) || r0 >= r_neck {
                return bad(format!(
                    "flat radius R₀ = {r0} must lie in [0, R = {r_neck})"
                ));
            }
            2.0
        }
    };
    let r0 = if kind == ProfileKind::Flat { r0 } else { 0.0 };
    Ok(NeckProfile {
        kind,
        dim,
        epsilon,
        kappa0,
        m,
        r0,
        r_neck,
        outer_radius,
    })
}

impl NeckProfile {
    /// Order-m profile with the workspace defaults (κ₀ = 1, R = 0.5, outer radius 2.5).
    pub fn power(dim: usize, epsilon: f64, m: f64) -> Result<Self> {
        make_profile(ProfileKind::Power, dim, epsilon, 1.0, m, 0.0, 0.5, 2.5)
    }

    /// Flat profile with the workspace defaults (κ₀ = 1, R = 0.5, outer radius 2.5).
    pub fn flat(dim: usize, epsilon: f64, r0: f64) -> Result<Self> {
        make_profile(ProfileKind::Flat, dim, epsilon, 1.0, 2.0, r0, 0.5, 2.5)
    }

    /// Same geometry at a different separation.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        make_profile(
            self.kind,
            self.dim,
            epsilon,
            self.kappa0,
            self.m,
            self.r0,
            self.r_neck,
            self.outer_radius,
        )
    }

    /// Radius of the neck chart, 2R.
    pub fn chart_limit(&self) -> f64 {
        2.0 * self.r_neck
    }

    /// (h₁ − h₂) as a function of r = |x′|.
    pub fn relative_height(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.kind {
            ProfileKind::Power => self.kappa0 * r.powf(self.m),
            ProfileKind::Flat => {
                let t = (r - self.r0).max(0.0);
                self.kappa0 * t * t
            }
        }
    }

    /// Radial derivative of (h₁ − h₂).
    pub fn relative_height_deriv(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.kind {
            ProfileKind::Power => self.kappa0 * self.m * r.powf(self.m - 1.0),
            ProfileKind::Flat => 2.0 * self.kappa0 * (r - self.r0).max(0.0),
        }
    }

    /// Second radial derivative of (h₁ − h₂) (one-sided on ∂Σ′).
    pub fn relative_height_second(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.kind {
            ProfileKind::Power => {
                if r == 0.0 && self.m > 2.0 {
                    0.0
                } else {
                    self.kappa0 * self.m * (self.m - 1.0) * r.powf(self.m - 2.0)
                }
            }
            ProfileKind::Flat => {
                if r > self.r0 {
                    2.0 * self.kappa0
                } else {
                    0.0
                }
            }
        }
    }

    /// h₁ at radius r (no chart check).
    pub fn h1_radial(&self, r: f64) -> f64 {
        0.5 * self.relative_height(r)
    }

    /// h₂ = −h₁.
    pub fn h2_radial(&self, r: f64) -> f64 {
        -self.h1_radial(r)
    }

    fn check_chart(&self, x: &[f64]) -> Result<f64> {
        let r = norm(x);
        let limit = self.chart_limit();
        if r > limit * (1.0 + 1e-12) {
            return Err(Error::ChartExceeded { x: r, limit });
        }
        Ok(r)
    }

    pub fn h1(&self, x: &[f64]) -> Result<f64> {
        Ok(self.h1_radial(self.check_chart(x)?))
    }

    pub fn h2(&self, x: &[f64]) -> Result<f64> {
        Ok(self.h2_radial(self.check_chart(x)?))
    }

    /// δ(x′) = ε + h₁ − h₂.
    pub fn gap(&self, x: &[f64]) -> Result<f64> {
        Ok(self.gap_radial(self.check_chart(x)?))
    }

    pub fn gap_radial(&self, r: f64) -> f64 {
        self.epsilon + self.relative_height(r)
    }

    /// Upper curve x₂ = ε + h₁(x₁) in two dimensions (no chart check).
    pub fn top(&self, x1: f64) -> f64 {
        self.epsilon + self.h1_radial(x1)
    }

    /// Lower curve x₂ = h₂(x₁) in two dimensions (no chart check).
    pub fn bottom(&self, x1: f64) -> f64 {
        self.h2_radial(x1)
    }

    /// Slope of the upper curve in two dimensions.
    pub fn top_slope(&self, x1: f64) -> f64 {
        0.5 * self.relative_height_deriv(x1) * x1.signum()
    }

    /// (d−1)-volume of Σ′ = B′_{R₀}.
    pub fn flat_area(&self) -> f64 {
        match self.kind {
            ProfileKind::Power => 0.0,
            ProfileKind::Flat => ball_volume(self.dim - 1, self.r0),
        }
    }

    /// Horizontal length scale where the gap doubles: (ε/κ₀)^{1/m}.
    pub fn neck_scale(&self) -> f64 {
        (self.epsilon / self.kappa0).powf(1.0 / self.m)
    }

    /// Distance from |x′| to the edge of the contact structure (∂Σ′, or the origin for Power).
    pub fn dist_to_contact_edge(&self, r: f64) -> f64 {
        (r.abs() - self.r0).abs()
    }
}

/// δ(x′); fails outside the chart.
pub fn gap(profile: &NeckProfile, x: &[f64]) -> Result<f64> {
    profile.gap(x)
}

/// dist(x′, Σ′) for ball-shaped Σ′.
pub fn dist_to_flat(profile: &NeckProfile, x: &[f64]) -> Result<f64> {
    if profile.kind != ProfileKind::Flat {
        return Err(Error::WrongKind { expected: "Flat" });
    }
    Ok((norm(x) - profile.r0).max(0.0))
}

/// Volume of the k-dimensional ball of radius r.
pub fn ball_volume(k: usize, r: f64) -> f64 {
    // V_k = 2π/k · V_{k−2}, starting from V_0 = 1 and V_1 = 2.
    let mut v = if k.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut j = if k.is_multiple_of(2) { 2 } else { 3 };
    while j <= k {
        v *= 2.0 * std::f64::consts::PI / j as f64;
        j += 2;
    }
    v * r.powi(k as i32)
}

/// Radius of the k-ball with the given volume.
pub fn ball_radius(k: usize, volume: f64) -> f64 {
    (volume / ball_volume(k, 1.0)).powf(1.0 / k as f64)
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
