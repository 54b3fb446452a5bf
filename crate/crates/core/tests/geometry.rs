use neckstress::geometry::{
    build_mesh, gap, make_profile, mesh_io, BoundaryTag, GradingConfig, NeckProfile, ProfileKind,
};
use neckstress::Error;
use proptest::prelude::*;

fn on_curve(mesh: &neckstress::geometry::Mesh) -> f64 {
    let p = &mesh.profile;
    let mut worst = 0.0f64;
    for e in &mesh.boundary_edges {
        for &n in &e.nodes {
            let x = mesh.nodes[n];
            let err = match e.tag {
                BoundaryTag::Outer => ((x[0].hypot(x[1]) - p.outer_radius) / p.outer_radius).abs(),
                // Only the faces bounding the gap; caps and side arcs are checked by validate().
                _ if x[0].abs() > p.chart_limit() || x[1].abs() > 0.5 => continue,
                BoundaryTag::InclusionTop => (x[1] - p.top(x[0])).abs() / (1.0 + p.top(x[0]).abs()),
                BoundaryTag::InclusionBottom => {
                    (x[1] - p.bottom(x[0])).abs() / (1.0 + p.bottom(x[0]).abs())
                }
            };
            worst = worst.max(err);
        }
    }
    worst
}

#[test]
fn power_profile_example() {
    let p = make_profile(ProfileKind::Power, 2, 0.01, 1.0, 2.0, 0.0, 1.0, 5.0).unwrap();
    for x in [0.0, 0.1, 0.37, -1.2, 2.0] {
        assert!((gap(&p, &[x]).unwrap() - (0.01 + x * x)).abs() < 1e-14);
    }
}

#[test]
fn degenerate_flat_matches_quadratic_power() {
    let f = NeckProfile::flat(2, 0.01, 0.0).unwrap();
    let q = NeckProfile::power(2, 0.01, 2.0).unwrap();
    // The flat extension is ½κ₀ dist² per inclusion, so the relative height is κ₀|x′|².
    for x in [0.0, 0.05, 0.3, 0.9] {
        assert!((gap(&f, &[x]).unwrap() - gap(&q, &[x]).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn rejects_invalid_profiles() {
    let mk = |kind, eps, m, r0| make_profile(kind, 2, eps, 1.0, m, r0, 0.5, 2.5);
    assert!(matches!(
        mk(ProfileKind::Power, 0.0, 2.0, 0.0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        mk(ProfileKind::Power, 0.01, 1.5, 0.0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        mk(ProfileKind::Flat, 0.01, 2.0, 0.5),
        Err(Error::InvalidParameter(_))
    ));
    assert!(make_profile(ProfileKind::Power, 2, 0.01, -1.0, 2.0, 0.0, 0.5, 2.5).is_err());
    assert!(make_profile(ProfileKind::Power, 2, 0.01, 1.0, 2.0, 0.0, 0.5, 2.0).is_err());
}

#[test]
fn point_contact_mesh_has_required_layers() {
    let p = NeckProfile::power(2, 1e-3, 2.0).unwrap();
    let mesh = build_mesh(&p, &GradingConfig::default()).unwrap();
    mesh.validate().unwrap();
    assert!(
        mesh.report.min_layers >= 4,
        "min layers {}",
        mesh.report.min_layers
    );
    // Column lines are vertex fibers, so sample between them.
    for x in [1.7e-4, 0.013, -0.2, 0.41] {
        assert!(
            mesh.layers_at(x) >= 4,
            "layers at {x}: {}",
            mesh.layers_at(x)
        );
    }
    assert!(on_curve(&mesh) < 1e-12);
}

#[test]
fn flat_mesh_boundary_is_exact_on_plateau() {
    let p = NeckProfile::flat(2, 1e-2, 0.3).unwrap();
    let mesh = build_mesh(&p, &GradingConfig::default()).unwrap();
    mesh.validate().unwrap();
    let mut seen = [false; 2];
    for e in &mesh.boundary_edges {
        for &n in &e.nodes {
            let x = mesh.nodes[n];
            if x[0].abs() <= 0.3 && x[1].abs() < 0.1 {
                match e.tag {
                    BoundaryTag::InclusionTop => {
                        assert_eq!(x[1], 1e-2);
                        seen[0] = true;
                    }
                    BoundaryTag::InclusionBottom => {
                        assert_eq!(x[1], 0.0);
                        seen[1] = true;
                    }
                    BoundaryTag::Outer => panic!("outer node inside the plateau"),
                }
            }
        }
    }
    assert!(seen[0] && seen[1]);
    assert!(on_curve(&mesh) < 1e-12);
}

#[test]
fn refinement_grows_dofs_without_degrading_quality() {
    let p = NeckProfile::power(2, 1e-3, 2.0).unwrap();
    let coarse = build_mesh(&p, &GradingConfig::default()).unwrap();
    let fine = build_mesh(
        &p,
        &GradingConfig {
            budget: 4.0,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(fine.n_nodes() > coarse.n_nodes());
    assert!(fine.report.min_quality >= coarse.report.min_quality - 1e-12);
}

#[test]
fn mesh_round_trip_is_lossless() {
    let p = NeckProfile::power(2, 3e-3, 4.0).unwrap();
    let mesh = build_mesh(&p, &GradingConfig::default()).unwrap();
    let text = mesh_io::write_mesh(&mesh);
    let back = mesh_io::read_mesh(&text).unwrap();
    assert_eq!(back, mesh);
    assert_eq!(mesh_io::write_mesh(&back), text);
}

#[test]
fn mesh_is_deterministic() {
    let p = NeckProfile::flat(2, 1e-3, 0.3).unwrap();
    let a = build_mesh(&p, &GradingConfig::default()).unwrap();
    let b = build_mesh(&p, &GradingConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unreachable_budget_is_reported() {
    let p = NeckProfile::power(2, 1e-3, 2.0).unwrap();
    let r = build_mesh(
        &p,
        &GradingConfig {
            max_nodes: 100,
            ..Default::default()
        },
    );
    assert!(matches!(r, Err(Error::Meshing { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_is_at_least_epsilon(eps in 1e-5f64..0.1, m in 2.0f64..8.0, r0 in 0.0f64..0.45, x in -1.0f64..1.0, flat in any::<bool>()) {
        let p = if flat { NeckProfile::flat(2, eps, r0).unwrap() } else { NeckProfile::power(2, eps, m).unwrap() };
        let g = gap(&p, &[x]).unwrap();
        prop_assert!(g >= eps);
        let on_contact = if flat { x.abs() <= r0 } else { x == 0.0 };
        prop_assert_eq!(g == eps, on_contact);
    }

    #[test]
    fn flat_extension_is_kappa_convex(r0 in 0.0f64..0.45, kappa in 0.5f64..3.0, x in 0.0f64..0.95) {
        // In d ≥ 3 the tangential curvature of any C¹ extension vanishes at ∂Σ′, so only d = 2 is checked.
        let p = make_profile(ProfileKind::Flat, 2, 1e-3, kappa, 2.0, r0, 0.5, 2.5).unwrap();
        prop_assume!(x > r0 + 1e-3 && x < 0.99);
        let rel = |q: f64| p.gap(&[q]).unwrap() - p.epsilon;
        let h = 1e-4;
        let second = (rel(x + h) - 2.0 * rel(x) + rel(x - h)) / (h * h);
        prop_assert!(second >= kappa * (1.0 - 1e-4), "second difference {} < κ₀ = {}", second, kappa);
    }

    #[test]
    fn outside_chart_is_rejected(x in 1.0001f64..3.0) {
        let p = NeckProfile::power(2, 1e-2, 2.0).unwrap();
        let rejected = matches!(gap(&p, &[x]), Err(Error::ChartExceeded { .. }));
        prop_assert!(rejected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn meshes_satisfy_invariants(log_eps in -4.0f64..-1.5, m in 2.0f64..6.0, flat in any::<bool>()) {
        let eps = 10f64.powf(log_eps);
        let p = if flat { NeckProfile::flat(2, eps, 0.3).unwrap() } else { NeckProfile::power(2, eps, m).unwrap() };
        let mesh = build_mesh(&p, &GradingConfig::default()).unwrap();
        prop_assert!(mesh.validate().is_ok());
        prop_assert!(mesh.report.min_layers >= 4);
        prop_assert!(mesh.report.min_quality > 0.0);
        prop_assert!(on_curve(&mesh) < 1e-12);
    }
}
