use nalgebra::DMatrix;

use crate::elasticity::RigidMotion;
use crate::error::{Error, Result};
use crate::geometry::{norm, NeckProfile};

const GAP_TOL: f64 = 1e-12;

struct Fiber {
    r: f64,
    h1: f64,
    h2: f64,
    delta: f64,
}

fn fiber(profile: &NeckProfile, x: &[f64]) -> Result<Fiber> {
    let d = profile.dim;
    if x.len() != d {
        return Err(Error::InvalidParameter(format!(
            "point must have {d} components"
        )));
    }
    let xp = &x[..d - 1];
    let h1 = profile.h1(xp)?;
    let h2 = profile.h2(xp)?;
    let delta = profile.epsilon + h1 - h2;
    let xd = x[d - 1];
    let slack = GAP_TOL * delta.max(1.0);
    if xd < h2 - slack || xd > profile.epsilon + h1 + slack {
        return Err(Error::OutOfGap { x: norm(xp) });
    }
    Ok(Fiber {
        r: norm(xp),
        h1,
        h2,
        delta,
    })
}

/// v̄(x) = (x_d − h₂(x′)) / δ(x′).
pub fn vbar(profile: &NeckProfile, x: &[f64]) -> Result<f64> {
    let f = fiber(profile, x)?;
    Ok((x[profile.dim - 1] - f.h2) / f.delta)
}

/// ∂h₁/∂x_c for each horizontal coordinate c.
fn h1_gradient(profile: &NeckProfile, x: &[f64], r: f64) -> Vec<f64> {
    let d = profile.dim;
    let dr = 0.5 * profile.relative_height_deriv(r);
    (0..d - 1)
        .map(|c| if r > 0.0 { dr * x[c] / r } else { 0.0 })
        .collect()
}

/// ∇v̄; the last component is 1/δ(x′).
pub fn vbar_gradient(profile: &NeckProfile, x: &[f64]) -> Result<Vec<f64>> {
    let f = fiber(profile, x)?;
    let d = profile.dim;
    let dh1 = h1_gradient(profile, x, f.r);
    let t = x[d - 1] - f.h2;
    let mut g: Vec<f64> = dh1
        .iter()
        .map(|&g1| {
            // ∂h₂ = −∂h₁ and ∂δ = 2∂h₁.
            (g1 * f.delta - t * 2.0 * g1) / (f.delta * f.delta)
        })
        .collect();
    g.push(1.0 / f.delta);
    Ok(g)
}

/// ṽ(x) = ψ(x′, ε + h₁(x′)) v̄(x): equals ψ on the upper curve and 0 on the lower one.
pub fn vtilde(
    profile: &NeckProfile,
    psi: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
) -> Result<Vec<f64>> {
    let v = vbar(profile, x)?;
    let d = profile.dim;
    let mut top = x.to_vec();
    top[d - 1] = profile.epsilon + profile.h1(&x[..d - 1])?;
    Ok(psi(&top).into_iter().map(|c| c * v).collect())
}

/// ∇ṽ for rigid data, `out[(r, c)] = ∂ṽ_r/∂x_c`.
pub fn vtilde_gradient(
    profile: &NeckProfile,
    psi: &RigidMotion,
    x: &[f64],
) -> Result<DMatrix<f64>> {
    let d = profile.dim;
    let f = fiber(profile, x)?;
    let v = (x[d - 1] - f.h2) / f.delta;
    let gv = vbar_gradient(profile, x)?;
    let dh1 = h1_gradient(profile, x, f.r);
    let mut top = x.to_vec();
    top[d - 1] = profile.epsilon + f.h1;
    let pv = psi.eval(&top);
    let gp = psi.gradient();
    let mut out = DMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            // Chain rule through the trace point (x′, ε + h₁(x′)).
            let trace = if c < d - 1 {
                gp[(r, c)] + gp[(r, d - 1)] * dh1[c]
            } else {
                0.0
            };
            out[(r, c)] = trace * v + pv[r] * gv[c];
        }
    }
    Ok(out)
}
