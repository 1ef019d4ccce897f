//! Invariants checked on randomly drawn inputs.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use magsteklov::aux1d::{kappa1, kappa1_direct, AuxProblem, Weight};
use magsteklov::disk::{lambda_disk_with, FiberProblem, RegimePolicy};
use magsteklov::exterior::{profile_quotient, lambda_exterior_closed_form};
use magsteklov::geometry::{build_domain, offset_curve, DomainSpec, Normalization, OffsetOptions, Symmetry};
use magsteklov::meshing::{triangulate, Mesh, NodalValues};
use magsteklov::specfun::{bessel_i, bessel_k, Order};
use magsteklov::steklov2d::{assemble_forms, lambda_dtn, Gauge};

fn shape() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, b)| DomainSpec::ellipse(a, b)),
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(w, h)| DomainSpec::rectangle(w, h)),
        (3usize..9, 0.5..1.5f64).prop_map(|(n, r)| DomainSpec::regular_polygon(n, r)),
        (2u32..5, 0.0..1.0f64).prop_map(|(k, s)| DomainSpec::perturbed_disk(0.9 * s / (1.0 + (k * k) as f64), k)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isoperimetric_deficit_is_nonnegative(spec in shape()) {
        let m = build_domain(&spec).unwrap().metrics();
        prop_assert!(m.isoperimetric_deficit() >= -1e-12 * m.perimeter * m.perimeter);
    }

    #[test]
    fn disk_deficit_vanishes(r in 0.1..10.0f64) {
        let m = build_domain(&DomainSpec::disk(r)).unwrap().metrics();
        prop_assert!(m.isoperimetric_deficit().abs() <= 1e-12 * m.perimeter * m.perimeter);
    }

    #[test]
    fn steiner_length_is_affine(spec in shape(), t in 0.01..2.0f64) {
        let d = build_domain(&spec).unwrap();
        let c = offset_curve(&d, t, &OffsetOptions::default()).unwrap();
        let l = d.metrics().perimeter;
        prop_assert!((c.length - (l + TAU * t)).abs() < 1e-8 * (l + TAU * t));
    }

    #[test]
    fn offset_moment_below_circle(spec in shape(), t in 0.01..2.0f64) {
        let d = build_domain(&spec.normalized(Normalization::Perimeter(TAU))).unwrap();
        prop_assume!(d.metrics().isoperimetric_deficit() > 1e-6);
        let c = offset_curve(&d, t, &OffsetOptions::default()).unwrap();
        prop_assert!(c.second_moment < TAU * (1.0 + t).powi(3));
        prop_assert!(c.centroid[0].hypot(c.centroid[1]) < 1e-8);
    }

    #[test]
    fn wronskian(x in 1e-3..50.0f64) {
        let w = bessel_i(Order::Zero, x).unwrap() * bessel_k(Order::One, x).unwrap()
            + bessel_i(Order::One, x).unwrap() * bessel_k(Order::Zero, x).unwrap();
        prop_assert!((w * x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disk_scaling_identity(b in 0.05..1.0f64, r in 0.3..1.0f64, s in 0.5..1.0f64) {
        let direct = lambda_disk_with(b, s * r, RegimePolicy::Override).unwrap();
        let scaled = lambda_disk_with(b * s * s, r, RegimePolicy::Override).unwrap() / s;
        prop_assert!((direct - scaled).abs() < 1e-13 * direct);
    }

    #[test]
    fn exterior_profile_quotient_is_equality(b in 0.05..1.0f64, r in 0.3..1.0f64) {
        let q = profile_quotient(b, r);
        let l = lambda_exterior_closed_form(b, r);
        prop_assert!((q - l).abs() < 1e-8 * l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refinement_keeps_shape_and_topology(spec in shape(), h in 0.2..0.4f64) {
        let d = build_domain(&spec.normalized(Normalization::Area(PI))).unwrap();
        let m = triangulate(&d, h, 0).unwrap();
        let r = m.refine(&d);
        prop_assert!((r.h - 0.5 * m.h).abs() < 1e-15);
        prop_assert!(r.min_angle_deg() >= m.min_angle_deg() - 1.0);
        for mesh in [&m, &r] {
            let euler = mesh.num_nodes() as i64 - mesh.num_edges() as i64 + mesh.triangles.len() as i64;
            prop_assert_eq!(euler, 1);
        }
    }

    #[test]
    fn mesh_dump_round_trips(spec in shape(), seed in 0.0..10.0f64) {
        let d = build_domain(&spec.normalized(Normalization::Area(PI))).unwrap();
        let m = triangulate(&d, 0.3, 0).unwrap();
        let vals = NodalValues::Complex(m.nodes.iter().map(|p| Complex64::new((seed * p[0]).sin(), p[1].exp() / 7.0)).collect());
        let text = m.dump(Some(&vals));
        let (back, v) = Mesh::parse(&text).unwrap();
        prop_assert_eq!(&back.nodes, &m.nodes);
        prop_assert_eq!(&back.triangles, &m.triangles);
        prop_assert_eq!(&back.boundary, &m.boundary);
        prop_assert_eq!(back.dump(v.as_ref()), text);
    }

    #[test]
    fn mu_1d_strictly_increasing(b in 0.1..1.0f64, beta in -1.0..1.0f64, step in 0.01..0.5f64) {
        let p = FiberProblem::new(0, b, 1.0, 800).unwrap();
        prop_assert!(p.mu_robin(beta + step).unwrap() > p.mu_robin(beta).unwrap());
    }

    #[test]
    fn constant_trial_bound(b in 0.2..1.0f64, r in 0.5..1.0f64) {
        let p = FiberProblem::new(0, b, r, 800).unwrap();
        let beta = -1.05 * r.powi(3) * b * b / 16.0;
        prop_assert!(p.mu_robin(beta).unwrap() < 0.0);
    }

    #[test]
    fn kappa_is_monotone_in_the_weight(b in 0.1..2.0f64, lift in 0.01..2.0f64, cut in 0.1..0.9f64) {
        let a_star = PI;
        let low = AuxProblem::from_fn(b, a_star, 600, |_| 4.0 * PI).unwrap();
        let high = AuxProblem::from_fn(b, a_star, 600, |a| if a > cut * a_star { 4.0 * PI * (1.0 + lift) } else { 4.0 * PI }).unwrap();
        let (kl, _) = kappa1_direct(&low).unwrap();
        let (kh, _) = kappa1_direct(&high).unwrap();
        prop_assert!(kh < kl);
    }

    #[test]
    fn kappa_ground_state_and_flux(b in 0.1..2.0f64) {
        let k = kappa1(&AuxProblem::new(b, PI, &Weight::four_pi(), 600).unwrap()).unwrap();
        prop_assert!(k.f.iter().all(|&f| f > 0.0));
        prop_assert!(k.residual <= 1e-8);
        prop_assert!(k.route_gap() <= 1e-8);
    }

    #[test]
    fn steklov_value_is_positive(b in 0.01..3.0f64, spec in shape()) {
        let d = build_domain(&spec.normalized(Normalization::Area(PI))).unwrap();
        let m = Arc::new(triangulate(&d, 0.3, 0).unwrap());
        let fs = assemble_forms(m, b, Gauge::Symmetric, None).unwrap();
        prop_assert!(lambda_dtn(&fs).unwrap().lambda > 0.0);
    }
}

#[test]
fn steklov_scaling_on_disk() {
    let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
    let m = triangulate(&d, 0.2, 0).unwrap();
    let s = 1.7;
    let scaled = Mesh::from_parts(m.nodes.iter().map(|p| [s * p[0], s * p[1]]).collect(), m.triangles.clone(), s * m.h).unwrap();
    let b = 0.3;
    let lam = |mesh: Mesh, b: f64| lambda_dtn(&assemble_forms(Arc::new(mesh), b, Gauge::Symmetric, None).unwrap()).unwrap().lambda;
    let direct = lam(scaled, b);
    let via = lam(m, b * s * s) / s;
    assert!((direct - via).abs() < 1e-10 * direct, "{direct} vs {via}");
}

#[test]
fn symmetric_domains_are_detected() {
    for spec in [DomainSpec::ellipse(1.2, 0.7), DomainSpec::rectangle(2.0, 1.0), DomainSpec::perturbed_disk(0.1, 2)] {
        let m = build_domain(&spec).unwrap().metrics();
        assert_ne!(m.symmetry, Symmetry::None);
    }
}
