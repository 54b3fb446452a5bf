use neckstress::asymptotics::{
    envelope_argmax, order_m_families, pointwise_bound, predicted_rate, rho,
    singular_integral_oracle, vbar, vbar_gradient, vtilde, vtilde_gradient, ContactGeometry,
    LogFactor, Regime, RhoKind, SingularIntegral,
};
use neckstress::elasticity::rigid_basis;
use neckstress::geometry::NeckProfile;
use neckstress::harness::{fit_with_log_power, geometric_list};
use proptest::prelude::*;

/// Independent closed form: ∫₀^R dr/(ε + r²) = arctan(R/√ε)/√ε.
fn arctan_closed_form(eps: f64, upper: f64) -> f64 {
    (upper / eps.sqrt()).atan() / eps.sqrt()
}

#[test]
fn oracle_matches_arctan_closed_form() {
    for eps in [1e-1, 1e-3, 1e-6, 1e-9] {
        for upper in [0.5, 1.5, 40.0] {
            let v = singular_integral_oracle(0.0, 2.0, 1.0, eps, upper).unwrap();
            let exact = arctan_closed_form(eps, upper);
            assert!(
                ((v - exact) / exact).abs() < 1e-8,
                "ε={eps} R={upper}: {v} vs {exact}"
            );
        }
    }
}

#[test]
fn oracle_without_singularity_is_near_polynomial_integral() {
    // With ε = R^m the denominator lies in [ε, 2ε], so the value is within a factor 2 of R^{k+1}/((k+1)ε).
    for (k, m) in [(0.0, 2.0), (1.0, 3.0), (2.0, 4.0), (3.0, 6.0)] {
        let upper = 0.8f64;
        let eps = upper.powf(m);
        let v = singular_integral_oracle(k, m, 1.0, eps, upper).unwrap();
        let flat = upper.powf(k + 1.0) / ((k + 1.0) * eps);
        assert!(v <= flat && v >= 0.5 * flat, "k={k} m={m}: {v} vs {flat}");
    }
}

#[test]
fn oracle_rejects_bad_arguments() {
    assert!(singular_integral_oracle(0.0, 1.5, 1.0, 1e-3, 1.0).is_err());
    assert!(singular_integral_oracle(-1.0, 2.0, 1.0, 1e-3, 1.0).is_err());
    assert!(singular_integral_oracle(0.0, 2.0, 1.0, 0.0, 1.0).is_err());
}

#[test]
fn rho_examples() {
    assert!((rho(RhoKind::One, 1.0, 2.0, 1e-4).unwrap() - 100.0).abs() < 1e-9);
    assert_eq!(rho(RhoKind::One, 3.0, 2.0, 0.2).unwrap(), 1.0);
    assert!((rho(RhoKind::One, 2.0, 2.0, (-10f64).exp()).unwrap() - 10.0).abs() < 1e-12);
    assert!(rho(RhoKind::Two, 1.0, 2.0, 0.5).is_err());
}

#[test]
fn rate_table_examples() {
    let r = predicted_rate(2, ContactGeometry::Power { m: 2.0 });
    assert_eq!(r.exponent, -0.5);
    let r = predicted_rate(3, ContactGeometry::Power { m: 2.0 });
    assert_eq!(
        (r.regime, r.exponent, r.log_factor),
        (Regime::LowerCritical, -1.0, LogFactor::Over)
    );
    let r = predicted_rate(2, ContactGeometry::Flat { r0: 0.3 });
    assert_eq!(r.exponent, 0.0);
    let r = predicted_rate(4, ContactGeometry::Power { m: 2.0 });
    assert_eq!((r.regime, r.exponent), (Regime::BelowCritical, -1.0));
    let r = predicted_rate(3, ContactGeometry::Power { m: 4.0 });
    assert_eq!(
        (r.regime, r.log_factor),
        (Regime::UpperCritical, LogFactor::Over)
    );
    assert!((r.exponent + 0.75).abs() < 1e-15);
}

#[test]
fn log_factor_sits_exactly_on_regime_boundaries() {
    for d in 2..6 {
        let df = d as f64;
        for m in [df - 1.0, df + 1.0] {
            if m >= 2.0 {
                assert_eq!(
                    predicted_rate(d, ContactGeometry::Power { m }).log_factor,
                    LogFactor::Over
                );
            }
            for h in [-1e-6, 1e-6] {
                if m + h >= 2.0 {
                    assert_eq!(
                        predicted_rate(d, ContactGeometry::Power { m: m + h }).log_factor,
                        LogFactor::None
                    );
                }
            }
        }
    }
}

#[test]
fn vbar_examples() {
    let p = NeckProfile::flat(2, 0.01, 0.3).unwrap();
    assert!((vbar(&p, &[0.0, 0.005]).unwrap() - 0.5).abs() < 1e-15);
    assert!((vbar(&p, &[0.1, 0.01]).unwrap() - 1.0).abs() < 1e-15);
    assert!((vbar_gradient(&p, &[0.0, 0.003]).unwrap()[1] - 100.0).abs() < 1e-9);
    let q = NeckProfile::power(2, 0.01, 2.0).unwrap();
    let x = 0.2;
    let top = q.top(x);
    assert!((vbar(&q, &[x, top]).unwrap() - 1.0).abs() < 1e-14);
    assert!(vbar(&q, &[x, top + 0.1]).is_err());
    assert!(vbar(&q, &[1.5, 0.0]).is_err());
}

#[test]
fn vtilde_reproduces_boundary_data() {
    let p = NeckProfile::power(2, 1e-3, 2.0).unwrap();
    let basis = rigid_basis(2);
    for psi in &basis {
        let f = |y: &[f64]| psi.eval(y);
        for x in [-0.9, -0.3, 0.0, 0.05, 0.7] {
            let top = vtilde(&p, &f, &[x, p.top(x)]).unwrap();
            let want = psi.eval(&[x, p.top(x)]);
            assert!(top.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-14));
            let bottom = vtilde(&p, &f, &[x, p.bottom(x)]).unwrap();
            assert!(bottom.iter().all(|v| v.abs() < 1e-14));
        }
    }
}

/// Central differences of ṽ.
fn fd_gradient(p: &NeckProfile, alpha: usize, x: [f64; 2]) -> [[f64; 2]; 2] {
    let psi = rigid_basis(2)[alpha];
    let f = |y: &[f64]| psi.eval(y);
    let v = |y: [f64; 2]| vtilde(p, &f, &y).unwrap();
    let mut g = [[0.0; 2]; 2];
    let h = 1e-7 * p.gap(&[x[0]]).unwrap();
    for c in 0..2 {
        let mut a = x;
        let mut b = x;
        a[c] += h;
        b[c] -= h;
        let (va, vb) = (v(a), v(b));
        for r in 0..2 {
            g[r][c] = (va[r] - vb[r]) / (2.0 * h);
        }
    }
    g
}

#[test]
fn vtilde_derivative_bound_has_uniform_constant() {
    // |∂ṽ| ≤ C (d/(ε+d²)|ψ| + |∇ψ|) with d the distance to Σ′; C fitted per ε must stay bounded.
    let mut constants = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let p = NeckProfile::flat(2, eps, 0.3).unwrap();
        let mut c_max = 0.0f64;
        for alpha in 0..3 {
            let psi = rigid_basis(2)[alpha];
            for i in 0..60 {
                let x1 = -0.95 + 1.9 * i as f64 / 59.0;
                for t in [0.1, 0.5, 0.9] {
                    let x2 = p.bottom(x1) + t * p.gap(&[x1]).unwrap();
                    let g = fd_gradient(&p, alpha, [x1, x2]);
                    let top = psi.eval(&[x1, p.top(x1)]);
                    let dist = (x1.abs() - 0.3).max(0.0);
                    for r in 0..2 {
                        let bound =
                            dist / (eps + dist * dist) * top[r].abs() + psi.gradient().amax();
                        let lhs = g[r][0].abs();
                        if bound > 0.0 {
                            c_max = c_max.max(lhs / bound);
                        }
                    }
                }
            }
        }
        constants.push(c_max);
    }
    let (lo, hi) = constants
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi < 4.0 && hi / lo < 2.0, "fitted constants {constants:?}");
}

#[test]
fn vtilde_gradient_agrees_with_differences() {
    let p = NeckProfile::power(2, 1e-3, 3.0).unwrap();
    for alpha in 0..3 {
        for x1 in [-0.4, 0.01, 0.3] {
            let x2 = p.bottom(x1) + 0.37 * p.gap(&[x1]).unwrap();
            let g = vtilde_gradient(&p, &rigid_basis(2)[alpha], &[x1, x2]).unwrap();
            let fd = fd_gradient(&p, alpha, [x1, x2]);
            for r in 0..2 {
                for c in 0..2 {
                    assert!(
                        (g[(r, c)] - fd[r][c]).abs() < 1e-5 * (1.0 + fd[r][c].abs()),
                        "α={alpha} x1={x1}"
                    );
                }
            }
        }
    }
}

#[test]
fn envelope_examples() {
    // Inside Σ′ the flat envelope stays O(1) as ε → 0.
    let flat = ContactGeometry::Flat { r0: 0.3 };
    let a = pointwise_bound(2, flat, 1e-3, &[0.1], 1.0, 1.0).unwrap();
    let b = pointwise_bound(2, flat, 1e-7, &[0.1], 1.0, 1.0).unwrap();
    assert!(b < 1.25 * a, "{a} → {b}");
    // Point contact of order 2 scales like ε^{−1/2} at the origin.
    let pc = ContactGeometry::Power { m: 2.0 };
    let r = pointwise_bound(2, pc, 1e-6, &[0.0], 1.0, 1.0).unwrap()
        / pointwise_bound(2, pc, 1e-4, &[0.0], 1.0, 1.0).unwrap();
    assert!((r - 10.0).abs() < 0.1, "ratio {r}");
    // Above the upper critical order the maximum sits away from the origin, at |x′| ~ ε^{1/m}.
    let eps = 1e-6;
    let (r_star, v) = envelope_argmax(2, ContactGeometry::Power { m: 6.0 }, eps, 0.5).unwrap();
    assert!(
        r_star > 0.5 * eps.powf(1.0 / 6.0) && r_star < 3.0 * eps.powf(1.0 / 6.0),
        "argmax {r_star}"
    );
    assert!(
        v > pointwise_bound(2, ContactGeometry::Power { m: 6.0 }, eps, &[0.0], 1.0, 1.0).unwrap()
    );
}

#[test]
fn fit_detects_log_factor() {
    // 1/(ε|log ε|) over [1e-4, 1e-2]: the raw slope is visibly shallower than −1, the corrected one is −1.
    let s: Vec<(f64, f64)> = geometric_list(1e-2, 1e-4, 9)
        .into_iter()
        .map(|e| (e, 1.0 / (e * e.ln().abs())))
        .collect();
    let fit = fit_with_log_power(&s, 1.0).unwrap();
    assert!(
        fit.slope() > -1.0 && fit.slope() < -0.85,
        "raw {}",
        fit.slope()
    );
    assert!((fit.best_slope() + 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_exponents_follow_rho_laws(d in 2usize..5, m in 2.0f64..7.0) {
        let eps = geometric_list(1e-2, 1e-6, 9);
        for (name, law) in order_m_families(d, m) {
            let integral: SingularIntegral = law.integral(1.5);
            let samples: Vec<(f64, f64)> = eps.iter().map(|&e| (e, integral.eval(e).unwrap())).collect();
            let (exp, log) = law.exponent();
            let fit = fit_with_log_power(&samples, if log { -1.0 } else { 0.0 }).unwrap();
            // Near m = k the correction to the leading term decays like ε^{|k−m|/(qm)}, too slowly to fit
            // over four decades; the exact boundary values are covered by the acceptance suite.
            let q = if law.rho_kind == RhoKind::One { 1.0 } else { 2.0 };
            if !log && (law.rho_k - m).abs() / (q * m) < 0.15 {
                continue;
            }
            prop_assert!((fit.best_slope() - exp).abs() < 0.05 || (exp == 0.0 && fit.best_slope().abs() < 0.05),
                "{}: fitted {} expected {}", name, fit.best_slope(), exp);
        }
    }

    #[test]
    fn rate_exponent_is_continuous_in_m(d in 2usize..6, m in 2.0f64..12.0) {
        let h = 1e-7;
        let e = |m: f64| predicted_rate(d, ContactGeometry::Power { m }).exponent;
        prop_assert!((e(m + h) - e(m)).abs() < 1e-5);
        prop_assert!(e(m) <= 0.0 && e(m) >= -1.0);
    }

    #[test]
    fn vbar_is_fiber_energy_minimizer(eps in 1e-4f64..0.1, x in -0.9f64..0.9, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let p = NeckProfile::power(2, eps, 2.0).unwrap();
        let delta = p.gap(&[x]).unwrap();
        // ∫|∂ v̄|² dx₂ = 1/δ; competitor g(t) = t + t(1−t)(c₁ + c₂t) has the same endpoint values.
        let n = 400;
        let mut e_comp = 0.0;
        let mut e_vbar = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let dg = 1.0 + (1.0 - 2.0 * t) * (c1 + c2 * t) + t * (1.0 - t) * c2;
            e_comp += dg * dg / delta / n as f64;
            let y = p.bottom(x) + t * delta;
            let g = vbar_gradient(&p, &[x, y]).unwrap()[1];
            e_vbar += g * g * delta / n as f64;
        }
        prop_assert!((e_vbar - 1.0 / delta).abs() < 1e-9 / delta);
        prop_assert!(e_vbar <= e_comp * (1.0 + 1e-12));
    }
}
