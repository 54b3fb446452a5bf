//! Analytic side of the problem: scaling functions, singular-integral oracles,
//! rate tables and pointwise envelopes, and the explicit auxiliary fields v̄, ṽ.
//!
//! Indices α, β are zero-based throughout and follow [`crate::elasticity::rigid_basis`]:
//! `0..d` are translations, `d..d(d+1)/2` rotations.

mod auxiliary;
pub mod quadrature;

pub use auxiliary::{vbar, vbar_gradient, vtilde, vtilde_gradient};
pub use quadrature::{
    integrate, singular_integral_oracle, Quadrature, SingularIntegral, ORACLE_RTOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, NeckProfile, ProfileKind};

const BOUNDARY_TOL: f64 = 1e-12;

/// Which of the two scaling families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoKind {
    One,
    Two,
}

/// ρ¹_{k,m}(ε) or ρ²_{k,m}(ε).
pub fn rho(kind: RhoKind, k: f64, m: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "ρ needs ε ∈ (0, ½), got {epsilon}"
        )));
    }
    if k < 1.0 || m < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "ρ needs k ≥ 1 and m ≥ 2, got k={k}, m={m}"
        )));
    }
    let (e, log) = rho_exponent(kind, k, m);
    Ok(if log {
        epsilon.ln().abs()
    } else {
        epsilon.powf(e)
    })
}

/// ε-exponent of ρ and whether it is the |log ε| branch.
pub fn rho_exponent(kind: RhoKind, k: f64, m: f64) -> (f64, bool) {
    if (m - k).abs() <= BOUNDARY_TOL * k.max(m) {
        return (0.0, true);
    }
    if m < k {
        return (0.0, false);
    }
    match kind {
        RhoKind::One => ((k - m) / m, false),
        RhoKind::Two => ((k - m) / (2.0 * m), false),
    }
}

/// One singular-integral family of the order-m entry estimates, tied to its ρ law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub rho_kind: RhoKind,
    pub rho_k: f64,
    pub m: f64,
    /// Power of r in the integrand.
    pub k: f64,
    /// Power of the denominator.
    pub p: f64,
}

impl ScalingLaw {
    pub fn exponent(&self) -> (f64, bool) {
        rho_exponent(self.rho_kind, self.rho_k, self.m)
    }

    pub fn rho(&self, epsilon: f64) -> Result<f64> {
        rho(self.rho_kind, self.rho_k, self.m, epsilon)
    }

    pub fn integral(&self, upper: f64) -> SingularIntegral {
        SingularIntegral::new(self.k, self.m, self.p, upper)
    }
}

/// Entry families of the order-m Gram matrix a₁₁ in dimension d.
///
/// Each family is ∫ r^k/(ε + r^m)^p dr with the r^{d−2} radial Jacobian folded into k.
pub fn order_m_families(d: usize, m: f64) -> Vec<(&'static str, ScalingLaw)> {
    let df = d as f64;
    let law = |rho_kind, rho_k, k, p| ScalingLaw {
        rho_kind,
        rho_k,
        m,
        k,
        p,
    };
    let mut out = vec![
        (
            "translation diagonal",
            law(RhoKind::One, df - 1.0, df - 2.0, 1.0),
        ),
        ("rotation diagonal", law(RhoKind::One, df + 1.0, df, 1.0)),
        (
            "translation off-diagonal",
            law(RhoKind::Two, 2.0 * (df - 1.0), df - 2.0, 0.5),
        ),
        (
            "mixed translation-rotation",
            law(RhoKind::Two, 2.0 * df, df - 1.0, 0.5),
        ),
    ];
    if d >= 3 {
        out.push((
            "rotation off-diagonal",
            law(RhoKind::Two, 2.0 * (df + 1.0), df, 0.5),
        ));
    }
    out
}

/// ρ law governing entry (α, β) of a₁₁ for an order-m profile.
pub fn order_m_entry_law(d: usize, m: f64, alpha: usize, beta: usize) -> Result<ScalingLaw> {
    let n = crate::elasticity::rigid_count(d);
    if alpha >= n || beta >= n {
        return Err(Error::Unsupported(format!(
            "entry ({alpha}, {beta}) in d = {d}"
        )));
    }
    let fam = order_m_families(d, m);
    let (ta, tb) = (alpha < d, beta < d);
    let idx = match (alpha == beta, ta, tb) {
        (true, true, _) => 0,
        (true, false, _) => 1,
        (false, true, true) => 2,
        (false, false, false) => 4,
        _ => 3,
    };
    if d == 2 && idx == 4 {
        return Err(Error::Unsupported("d = 2 has a single rotation".into()));
    }
    Ok(fam[idx].1)
}

/// Contact geometry as seen by the rate tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContactGeometry {
    /// Flat contact set B′_{R₀} (R₀ = 0 is point contact of order 2).
    Flat { r0: f64 },
    /// Relative convexity of order m.
    Power { m: f64 },
}

impl ContactGeometry {
    pub fn of(profile: &NeckProfile) -> Self {
        match profile.kind {
            ProfileKind::Flat => ContactGeometry::Flat { r0: profile.r0 },
            ProfileKind::Power => ContactGeometry::Power { m: profile.m },
        }
    }
}

/// Multiplicative logarithmic correction on top of the power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogFactor {
    None,
    /// Value behaves like ε^e · |log ε|.
    Times,
    /// Value behaves like ε^e / |log ε|.
    Over,
}

impl LogFactor {
    /// |log ε|^s such that value / factor is a pure power of ε.
    pub fn factor(&self, epsilon: f64) -> f64 {
        match self {
            LogFactor::None => 1.0,
            LogFactor::Times => epsilon.ln().abs(),
            LogFactor::Over => 1.0 / epsilon.ln().abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// |Σ′| > 0: no blow-up.
    FlatBounded,
    /// 2 ≤ m < d−1.
    BelowCritical,
    /// m = d−1.
    LowerCritical,
    /// d−1 < m < d+1.
    Intermediate,
    /// m = d+1.
    UpperCritical,
    /// m > d+1.
    AboveCritical,
}

/// Predicted behaviour of ‖∇u‖_∞ ~ ε^exponent · log_factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub dim: usize,
    pub geometry: ContactGeometry,
    pub regime: Regime,
    pub exponent: f64,
    pub log_factor: LogFactor,
}

pub fn predicted_rate(d: usize, geometry: ContactGeometry) -> RatePrediction {
    let m = match geometry {
        ContactGeometry::Flat { r0 } if r0 > 0.0 => {
            return RatePrediction {
                dim: d,
                geometry,
                regime: Regime::FlatBounded,
                exponent: 0.0,
                log_factor: LogFactor::None,
            };
        }
        ContactGeometry::Flat { .. } => 2.0,
        ContactGeometry::Power { m } => m,
    };
    let df = d as f64;
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOL * b.abs().max(1.0);
    let (regime, exponent, log_factor) = if near(m, df - 1.0) {
        (Regime::LowerCritical, -1.0, LogFactor::Over)
    } else if near(m, df + 1.0) {
        (Regime::UpperCritical, -(1.0 - 1.0 / m), LogFactor::Over)
    } else if m < df - 1.0 {
        (Regime::BelowCritical, -1.0, LogFactor::None)
    } else if m < df + 1.0 {
        (
            Regime::Intermediate,
            -(1.0 - 1.0 / m).min((df - 1.0) / m),
            LogFactor::None,
        )
    } else {
        (Regime::AboveCritical, -df / m, LogFactor::None)
    };
    RatePrediction {
        dim: d,
        geometry,
        regime,
        exponent,
        log_factor,
    }
}

/// Right-hand side of the pointwise gradient estimate at horizontal position `x`,
/// scaled by the caller's calibration constant `c` and ‖φ‖.
pub fn pointwise_bound(
    d: usize,
    geometry: ContactGeometry,
    epsilon: f64,
    x: &[f64],
    phi_norm: f64,
    c: f64,
) -> Result<f64> {
    if x.len() != d - 1 {
        return Err(Error::InvalidParameter(format!(
            "x′ must have {} components",
            d - 1
        )));
    }
    let r = crate::geometry::norm(x);
    let e = epsilon;
    let le = e.ln().abs();
    let df = d as f64;
    let shape = match geometry {
        ContactGeometry::Flat { r0 } => {
            let area = ball_volume(d - 1, r0);
            let dist = (r - r0).max(0.0);
            let denom = e + dist * dist;
            let (c1, c2) = match d {
                2 => (e / (area + e.sqrt()), e / (area.powi(3) + e)),
                3 => (e / (area + e * le), e / (area * area + e)),
                _ => (e / (area + e), e / (area.powf((df + 1.0) / (df - 1.0)) + e)),
            };
            c1 / denom + c2 * r / denom
        }
        ContactGeometry::Power { m } => {
            let denom = e + r.powf(m);
            let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOL * b.max(1.0);
            if near(m, df - 1.0) {
                1.0 / (le * denom) + r / denom + 1.0
            } else if near(m, df + 1.0) {
                e.powf(1.0 - (df - 1.0) / m) / denom + r / (le * denom) + 1.0
            } else if m < df - 1.0 {
                1.0 / denom
            } else if m < df + 1.0 {
                e.powf(1.0 - (df - 1.0) / m) / denom + r / denom + 1.0
            } else {
                e.powf(1.0 - (df - 1.0) / m) / denom
                    + e.powf(1.0 - (df + 1.0) / m) * r / denom
                    + 1.0
            }
        }
    };
    Ok(c * shape * phi_norm)
}

/// Radial position maximizing the envelope on [0, r_max], by a dense logarithmic scan
/// refined with golden-section search.
pub fn envelope_argmax(
    d: usize,
    geometry: ContactGeometry,
    epsilon: f64,
    r_max: f64,
) -> Result<(f64, f64)> {
    let eval = |r: f64| {
        let mut x = vec![0.0; d - 1];
        x[0] = r;
        pointwise_bound(d, geometry, epsilon, &x, 1.0, 1.0)
    };
    let n = 2000;
    let lo = (epsilon.powf(0.5) * 1e-4).min(r_max * 1e-6);
    let mut best = (0.0, eval(0.0)?);
    let mut grid = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let r = lo * (r_max / lo).powf(i as f64 / n as f64);
        grid.push(r);
        let v = eval(r)?;
        if v > best.1 {
            best = (r, v);
        }
    }
    if best.0 == 0.0 {
        return Ok(best);
    }
    let i = grid.iter().position(|&g| g == best.0).unwrap_or(0);
    let (mut a, mut b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(n)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c1 = b - phi * (b - a);
        let c2 = a + phi * (b - a);
        if eval(c1)? > eval(c2)? {
            b = c2;
        } else {
            a = c1;
        }
    }
    let r = 0.5 * (a + b);
    let v = eval(r)?;
    Ok(if v > best.1 { (r, v) } else { best })
}

/// Upper-bound shape for entry (α, β) of a₁₁ in the flat-contact case.
pub fn flat_entry_oracle(
    d: usize,
    area: f64,
    epsilon: f64,
    alpha: usize,
    beta: usize,
) -> Result<f64> {
    let n = crate::elasticity::rigid_count(d);
    if d < 2 || alpha >= n || beta >= n {
        return Err(Error::Unsupported(format!(
            "entry ({alpha}, {beta}) in d = {d}"
        )));
    }
    let (a, b) = (alpha.min(beta), alpha.max(beta));
    let e = epsilon;
    let se = e.sqrt();
    let le = e.ln().abs();
    let s = area;
    let df = d as f64;
    let (ta, tb) = (a < d, b < d);
    let v = if d == 2 {
        match (a, b) {
            (0, 0) | (1, 1) => s / e + 1.0 / se,
            (2, 2) => s.powi(3) / e + 1.0,
            (0, 1) => s / se + le,
            _ => s * s / se + 1.0,
        }
    } else if a == b && ta {
        if d == 3 {
            s / e + le
        } else {
            s / e + 1.0
        }
    } else if a == b {
        s.powf((df + 1.0) / (df - 1.0)) / e + 1.0
    } else if ta && tb {
        s / se + s.powf((df - 2.0) / (df - 1.0)) * le + 1.0
    } else if ta != tb {
        s.powf(df / (df - 1.0)) / se + s * le + 1.0
    } else {
        s.powf((df + 1.0) / (df - 1.0)) / se + s.powf(df / (df - 1.0)) * le + 1.0
    };
    Ok(v)
}
