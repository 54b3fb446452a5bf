use std::sync::Arc;

use neckstress::asymptotics::vbar;
use neckstress::decomposition::decompose;
use neckstress::elasticity::{rigid_basis, ElasticParams};
use neckstress::fem::{
    boundary_traction_moment, energy_integral, gradient_at, max_gradient, solve_dirichlet,
    BoundaryData, Discretization, DisplacementField, ElementOrder, FieldLabel, Region,
    SolverConfig, SolverKind, Trace,
};
use neckstress::geometry::{build_mesh, BoundaryTag, GradingConfig, Mesh, NeckProfile};
use neckstress::Error;

fn mesh(profile: NeckProfile, budget: f64) -> Arc<Mesh> {
    Arc::new(
        build_mesh(
            &profile,
            &GradingConfig {
                budget,
                ..Default::default()
            },
        )
        .unwrap(),
    )
}

fn point_contact(eps: f64) -> Arc<Mesh> {
    mesh(NeckProfile::power(2, eps, 2.0).unwrap(), 1.0)
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn rigid_data_is_reproduced_exactly() {
    let m = point_contact(1e-3);
    let params = ElasticParams::unit_2d();
    for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
        let disc = Discretization::new(m.clone(), params, order).unwrap();
        let problems: Vec<_> = rigid_basis(2)
            .into_iter()
            .map(|psi| (FieldLabel::Other("rigid".into()), BoundaryData::rigid(psi)))
            .collect();
        let solved = disc.solve_many(&problems, &cfg()).unwrap();
        for ((field, report), psi) in solved.iter().zip(rigid_basis(2)) {
            let err = field.max_nodal_deviation(|x| psi.eval2(x));
            assert!(err < 1e-10, "{order:?} {psi:?}: {err}");
            assert!(report.residual <= 1e-10);
            for tag in [BoundaryTag::InclusionTop, BoundaryTag::InclusionBottom] {
                for phi in rigid_basis(2) {
                    assert!(
                        boundary_traction_moment(&params, field, tag, &phi)
                            .unwrap()
                            .abs()
                            < 1e-9
                    );
                }
            }
            let other = DisplacementField::interpolate(
                disc.space.clone(),
                |x| [x[0] * x[1], x[1] * x[1]],
                FieldLabel::Other("q".into()),
            );
            assert!(
                energy_integral(&params, &other, field, Region::All)
                    .unwrap()
                    .abs()
                    < 1e-9
            );
        }
    }
}

#[test]
fn zero_data_gives_zero_field() {
    let (f, r) = solve_dirichlet(
        point_contact(1e-2),
        &ElasticParams::unit_2d(),
        BoundaryData::zero(),
        ElementOrder::Quadratic,
        &cfg(),
    )
    .unwrap();
    assert!(f.values.iter().all(|v| *v == [0.0, 0.0]));
    assert_eq!(r.residual, 0.0);
}

#[test]
fn boundary_data_is_matched_and_field_is_finite() {
    let trace: Trace = Arc::new(|x| [x[1], x[0] * x[0]]);
    let bc = BoundaryData::new(
        Arc::new(|x| [0.1 * x[0], 1.0]),
        Arc::new(|_| [0.0, 0.0]),
        trace,
    );
    let (f, _) = solve_dirichlet(
        point_contact(1e-3),
        &ElasticParams::unit_2d(),
        bc.clone(),
        ElementOrder::Quadratic,
        &cfg(),
    )
    .unwrap();
    assert!(f.is_finite());
    assert!(f.boundary_defect(&bc) <= 1e-12);
}

#[test]
fn iterative_and_direct_solvers_agree() {
    let disc = Discretization::new(
        point_contact(1e-2),
        ElasticParams::unit_2d(),
        ElementOrder::Quadratic,
    )
    .unwrap();
    let bc = BoundaryData::new(
        Arc::new(|_| [1.0, 0.0]),
        Arc::new(|_| [0.0, 0.0]),
        Arc::new(|x| [x[1], 0.0]),
    );
    let cg = SolverConfig {
        kind: SolverKind::Cg,
        cg_max_iter: 20_000,
        ..cfg()
    };
    let direct = SolverConfig {
        kind: SolverKind::Direct,
        ..cfg()
    };
    let (a, ra) = disc.solve(FieldLabel::Data, bc.clone(), &cg).unwrap();
    let (b, rb) = disc.solve(FieldLabel::Data, bc, &direct).unwrap();
    assert!(ra.residual <= 1e-10 && rb.residual <= 1e-10);
    assert!(a.max_nodal_deviation(|x| b.value_at(x).unwrap()) < 1e-6);
}

#[test]
fn starved_cg_reports_non_convergence() {
    let disc = Discretization::new(
        point_contact(1e-3),
        ElasticParams::unit_2d(),
        ElementOrder::Quadratic,
    )
    .unwrap();
    let starved = SolverConfig {
        kind: SolverKind::Cg,
        cg_max_iter: 3,
        ..cfg()
    };
    let r = disc.solve(
        FieldLabel::Data,
        BoundaryData::rigid(rigid_basis(2)[0]).clone(),
        &starved,
    );
    // Rigid data on every boundary still needs iterations in the interior.
    let bc = BoundaryData::new(
        Arc::new(|_| [1.0, 0.0]),
        Arc::new(|_| [0.0, 0.0]),
        Arc::new(|_| [0.0, 0.0]),
    );
    let s = disc.solve(FieldLabel::Data, bc, &starved);
    assert!(r.is_ok() || matches!(r, Err(Error::NotConverged { .. })));
    assert!(matches!(s, Err(Error::NotConverged { .. })));
}

#[test]
fn gradient_at_examples() {
    let m = mesh(NeckProfile::flat(2, 1e-2, 0.3).unwrap(), 1.0);
    let disc =
        Discretization::new(m.clone(), ElasticParams::unit_2d(), ElementOrder::Quadratic).unwrap();
    let rot = rigid_basis(2)[2];
    let f = DisplacementField::interpolate(
        disc.space.clone(),
        |x| rot.eval2(x),
        FieldLabel::Other("psi3".into()),
    );
    let g = gradient_at(&f, [0.4, 1.2]).unwrap();
    assert!(
        (g[(0, 1)] + 1.0).abs() < 1e-12
            && (g[(1, 0)] - 1.0).abs() < 1e-12
            && g[(0, 0)].abs() < 1e-12
    );
    let p = m.profile;
    let vb = DisplacementField::interpolate(
        disc.space.clone(),
        |x| {
            let v = if x[0].abs() < 0.9 && x[1] >= p.bottom(x[0]) && x[1] <= p.top(x[0]) {
                vbar(&p, &x).unwrap()
            } else {
                0.0
            };
            [0.0, v]
        },
        FieldLabel::Other("vbar".into()),
    );
    let g = gradient_at(&vb, [0.0, 0.005]).unwrap();
    assert!(
        g[(1, 0)].abs() < 1e-8 && (g[(1, 1)] - 100.0).abs() < 1e-8,
        "{g}"
    );
    let c = DisplacementField::interpolate(
        disc.space.clone(),
        |_| [2.0, -1.0],
        FieldLabel::Other("c".into()),
    );
    assert!(gradient_at(&c, [0.4, 1.2]).unwrap().amax() < 1e-12);
    assert!(matches!(
        gradient_at(&c, [0.0, 0.6]),
        Err(Error::OutsideDomain { .. })
    ));
    assert!(matches!(
        gradient_at(&c, [3.0, 0.0]),
        Err(Error::OutsideDomain { .. })
    ));
}

#[test]
fn max_gradient_of_rotation_is_sqrt_two() {
    let disc = Discretization::new(
        point_contact(1e-3),
        ElasticParams::unit_2d(),
        ElementOrder::Quadratic,
    )
    .unwrap();
    let rot = rigid_basis(2)[2];
    let f = DisplacementField::interpolate(
        disc.space.clone(),
        |x| rot.eval2(x),
        FieldLabel::Other("psi3".into()),
    );
    for region in [Region::Neck(0.5), Region::ShellMinusNeck(0.5), Region::All] {
        assert!((max_gradient(&f, region).unwrap().value - 2f64.sqrt()).abs() < 1e-12);
    }
    assert!(matches!(
        max_gradient(
            &f,
            Region::Patch {
                center: 3.0,
                half_width: 0.1
            }
        ),
        Err(Error::EmptyRegion)
    ));
}

#[test]
fn energy_integral_basics() {
    let params = ElasticParams::unit_2d();
    let m = point_contact(1e-2);
    let disc = Discretization::new(m.clone(), params, ElementOrder::Quadratic).unwrap();
    let q = DisplacementField::interpolate(
        disc.space.clone(),
        |x| [x[0] * x[1], x[1]],
        FieldLabel::Other("q".into()),
    );
    let t = DisplacementField::interpolate(
        disc.space.clone(),
        |x| rigid_basis(2)[1].eval2(x),
        FieldLabel::Other("t".into()),
    );
    assert!(energy_integral(&params, &q, &t, Region::All).unwrap().abs() < 1e-12);
    assert!(energy_integral(&params, &q, &q, Region::All).unwrap() > 0.0);
    let other = Discretization::new(m, params, ElementOrder::Linear).unwrap();
    let z = DisplacementField::zero(other.space.clone(), FieldLabel::Other("z".into()));
    assert!(matches!(
        energy_integral(&params, &q, &z, Region::All),
        Err(Error::MeshMismatch)
    ));
}

#[test]
fn cell_problem_gradient_is_sandwiched() {
    // |∇v₁¹| ~ 1/(ε + x₁²) across the neck, with one constant serving all ε.
    let params = ElasticParams::unit_2d();
    let mut ratios = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let m = point_contact(eps);
        let p = m.profile;
        let bc = BoundaryData::new(
            Arc::new(|_| [1.0, 0.0]),
            Arc::new(|_| [0.0, 0.0]),
            Arc::new(|_| [0.0, 0.0]),
        );
        let (f, _) = solve_dirichlet(m, &params, bc, ElementOrder::Quadratic, &cfg()).unwrap();
        for i in 0..=20 {
            let x1 = 0.4 * i as f64 / 20.0;
            let x = [x1, 0.5 * (p.top(x1) + p.bottom(x1))];
            let g = gradient_at(&f, x).unwrap().norm();
            ratios.push(g * (eps + x1 * x1));
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 4.0, "ratio range [{lo}, {hi}]");
}

#[test]
fn energy_converges_under_refinement() {
    let params = ElasticParams::unit_2d();
    let prof = NeckProfile::power(2, 1e-2, 2.0).unwrap();
    let bc = BoundaryData::new(
        Arc::new(|_| [1.0, 0.0]),
        Arc::new(|_| [0.0, 0.0]),
        Arc::new(|_| [0.0, 0.0]),
    );
    let energies: Vec<f64> = [1.0, 4.0, 16.0]
        .iter()
        .map(|&b| {
            let (f, _) = solve_dirichlet(
                mesh(prof, b),
                &params,
                bc.clone(),
                ElementOrder::Quadratic,
                &cfg(),
            )
            .unwrap();
            energy_integral(&params, &f, &f, Region::All).unwrap()
        })
        .collect();
    // Richardson estimate from the last three levels.
    let (e0, e1, e2) = (energies[0], energies[1], energies[2]);
    let denom = e0 - 2.0 * e1 + e2;
    let limit = if denom.abs() > 0.0 {
        e2 - (e2 - e1).powi(2) / denom
    } else {
        e2
    };
    let errs: Vec<f64> = energies.iter().map(|e| (e - limit).abs()).collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + 1e-3 * limit.abs(), "energies {energies:?}");
    }
    assert!(
        errs[2] < 1e-3 * limit,
        "energies {energies:?}, limit {limit}"
    );
}

#[test]
fn flat_gradient_is_stable_when_epsilon_halves() {
    let params = ElasticParams::unit_2d();
    let phi: Trace = Arc::new(|x| [x[1], 0.0]);
    let value = |eps: f64| {
        let disc = Discretization::new(
            mesh(NeckProfile::flat(2, eps, 0.3).unwrap(), 1.0),
            params,
            ElementOrder::Quadratic,
        )
        .unwrap();
        let dec = decompose(&disc, phi.clone(), &cfg()).unwrap();
        max_gradient(&dec.u, Region::Neck(0.5)).unwrap().value
    };
    let (a, b) = (value(1e-3), value(5e-4));
    assert!(b / a < 1.3 && a / b < 1.3, "{a} → {b}");
}

#[test]
fn point_contact_argmax_is_near_the_neck_center() {
    let params = ElasticParams::unit_2d();
    let phi: Trace = Arc::new(|x| [x[1], 0.0]);
    for eps in [1e-3, 1e-4] {
        let disc =
            Discretization::new(point_contact(eps), params, ElementOrder::Quadratic).unwrap();
        let dec = decompose(&disc, phi.clone(), &cfg()).unwrap();
        let gm = max_gradient(&dec.u, Region::Neck(0.5)).unwrap();
        assert!(
            gm.location[0].abs() <= 2.0 * eps.sqrt(),
            "ε={eps}: argmax at {:?}",
            gm.location
        );
    }
}
