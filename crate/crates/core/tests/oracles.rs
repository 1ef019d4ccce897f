//! Comparisons against values computed independently of the library.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use magsteklov::aux1d::{kappa1, truncation_study, AuxProblem, Weight};
use magsteklov::disk::{lambda_disk, lambda_disk_with, RegimePolicy};
use magsteklov::geometry::{build_domain, offset_curve, DomainSpec, Normalization, OffsetOptions};
use magsteklov::harness::{verify_bounded, verify_exterior, Relation, VerifyOptions};
use magsteklov::meshing::triangulate;
use magsteklov::specfun::{bessel_i, bessel_k, Order};
use magsteklov::steklov2d::{steklov_study, Gauge, SpectralRoute};
use magsteklov::torsion::{solve_torsion, torsion_run, vector_potential};

fn i_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn k0_series(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let q = 0.25 * x * x;
    let (mut term, mut harmonic, mut sum) = (1.0, 0.0, 0.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        sum += term * harmonic;
        if term < 1e-18 {
            break;
        }
    }
    -((0.5 * x).ln() + EULER) * i_series(0, x) + sum
}

/// `ψ` at the centre of the unit square from the double sine series.
fn square_torsion_center(terms: usize) -> f64 {
    let mut s = 0.0;
    for m in (1..terms).step_by(2) {
        for n in (1..terms).step_by(2) {
            let sign = if ((m + n) / 2 - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let (mf, nf) = (m as f64, n as f64);
            s += sign / (mf * nf * (mf * mf + nf * nf));
        }
    }
    16.0 / PI.powi(4) * s
}

#[test]
fn bessel_matches_power_series() {
    for &x in &[1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let i0 = bessel_i(Order::Zero, x).unwrap();
        let i1 = bessel_i(Order::One, x).unwrap();
        assert!((i0 - i_series(0, x)).abs() < 1e-13 * i0, "I0({x})");
        assert!((i1 - i_series(1, x)).abs() < 1e-13 * i1, "I1({x})");
    }
    for &x in &[1e-3, 0.1, 0.5, 1.0, 2.0] {
        let k0 = bessel_k(Order::Zero, x).unwrap();
        assert!((k0 - k0_series(x)).abs() < 1e-12 * k0, "K0({x})");
    }
}

#[test]
fn disk_eigenvalue_matches_series_ratio() {
    for &(b, r) in &[(1.0, 1.0), (0.5, 1.2), (0.1, 1.0), (2.0, 0.6)] {
        let s = 0.25 * b * r * r;
        let oracle = 0.5 * b * r * i_series(1, s) / i_series(0, s);
        let got = lambda_disk(b, r).unwrap();
        assert!((got - oracle).abs() < 1e-9 * oracle, "b={b} R={r}: {got} vs {oracle}");
    }
    let small = lambda_disk(0.1, 1.0).unwrap();
    assert!((small - 0.01 / 16.0).abs() < 1e-3 * small);
}

#[test]
fn square_offset_second_moment() {
    let d = build_domain(&DomainSpec::rectangle(1.0, 1.0)).unwrap();
    let t = 0.25;
    let c = offset_curve(&d, t, &OffsetOptions::default()).unwrap();
    let sides = 4.0 * ((0.5 + t).powi(2) + 1.0 / 12.0);
    let arcs = 4.0 * t * ((0.5 + t * t) * PI / 2.0 + 2.0 * t);
    let oracle = sides + arcs;
    assert!((c.second_moment - oracle).abs() < 1e-4 * oracle, "{} vs {oracle}", c.second_moment);
    assert!((c.length - (4.0 + TAU * t)).abs() < 1e-8);
}

#[test]
fn square_torsion_center_value() {
    let oracle = square_torsion_center(2001);
    assert!((oracle - 0.07367).abs() < 1e-5);
    let d = build_domain(&DomainSpec::rectangle(1.0, 1.0)).unwrap();
    let mut errs = Vec::new();
    for h in [0.1, 0.05] {
        let psi = solve_torsion(Arc::new(triangulate(&d, h, 0).unwrap())).unwrap();
        errs.push((psi.max() - oracle).abs());
    }
    assert!(errs[1] < 1e-3 && errs[1] < errs[0], "{errs:?}");
}

#[test]
fn disk_vector_potential_converges() {
    let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
    let mut errs = Vec::new();
    let mut m = triangulate(&d, 0.2, 0).unwrap();
    for _ in 0..4 {
        let mesh = Arc::new(m.clone());
        m = m.refine(&d);
        let a = vector_potential(&solve_torsion(mesh.clone()).unwrap());
        let mut e2 = 0.0;
        for (t, v) in mesh.triangles.iter().zip(&a.values) {
            let [p, q, r] = t.map(|i| mesh.nodes[i]);
            let area = 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])).abs();
            for (x, y) in [(p, q), (q, r), (r, p)] {
                let c = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
                e2 += area / 3.0 * ((v[0] + 0.5 * c[1]).powi(2) + (v[1] - 0.5 * c[0]).powi(2));
            }
        }
        errs.push(e2.sqrt());
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    assert!(orders.windows(2).all(|o| o[1] > o[0]), "{orders:?}");
    assert!(orders[orders.len() - 1] >= 0.99, "{orders:?}");
}

#[test]
fn steklov_disk_small_field() {
    let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
    let s = steklov_study(&d, 0.1, 0.1, 1, Gauge::Symmetric, SpectralRoute::Dtn).unwrap();
    let oracle = 0.01 / 16.0;
    assert!((s.extrapolated - oracle).abs() < 0.01 * oracle, "{}", s.extrapolated);
}

#[test]
fn kappa_disk_weight_matches_closed_form() {
    for b in [0.1, 0.5, 0.9] {
        let k = kappa1(&AuxProblem::new(b, PI, &Weight::four_pi(), 2000).unwrap()).unwrap();
        let s = 0.25 * b;
        let oracle = TAU * 0.5 * b * i_series(1, s) / i_series(0, s);
        assert!((k.kappa - oracle).abs() < 1e-5 * oracle, "b={b}: {} vs {oracle}", k.kappa);
    }
}

#[test]
fn kappa_is_quadratic_for_small_field() {
    let k = |b: f64| kappa1(&AuxProblem::new(b, PI, &Weight::four_pi(), 2000).unwrap()).unwrap().kappa;
    let (k1, k2) = (k(0.05), k(0.1));
    assert!((k2 / k1 - 4.0).abs() < 1e-3, "{}", k2 / k1);
    assert!((k1 / 0.0025 - PI / 8.0).abs() < 1e-3);
}

#[test]
fn ellipse_truncation_is_monotone() {
    let d = build_domain(&DomainSpec::ellipse(1.5, 1.0).normalized(Normalization::Area(PI))).unwrap();
    let mesh = triangulate(&d, 0.1, 0).unwrap().refine(&d).refine(&d);
    let run = torsion_run(Arc::new(mesh), 200, 0.02).unwrap();
    let rows = truncation_study(0.5, &Arc::new(run.weight), &[1, 2, 3, 4, 6, 8], 2000).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].1 <= w[0].1 * (1.0 + 1e-12), "{rows:?}");
    }
}

#[test]
fn bounded_chain_on_disk_is_equality() {
    let d = build_domain(&DomainSpec::disk(1.0)).unwrap();
    let r = verify_bounded(&d, 0.5, 0.1, 2, 2000, &VerifyOptions::default()).unwrap();
    assert!(r.equality_case && r.pass);
    assert!(r.comparisons.iter().all(|c| c.relation == Relation::Equality && c.pass));
    let oracle = 0.25 * i_series(1, 0.125) / i_series(0, 0.125);
    assert!((r.lambda - oracle).abs() <= r.lambda_error.max(1e-3 * oracle), "{} vs {oracle}", r.lambda);
}

#[test]
fn bounded_chain_on_square() {
    let d = build_domain(&DomainSpec::rectangle(1.0, 1.0).normalized(Normalization::Area(PI))).unwrap();
    let r = verify_bounded(&d, 0.5, 0.1, 2, 2000, &VerifyOptions::default()).unwrap();
    assert!(r.pass && !r.equality_case);
    let disk = lambda_disk(0.5, 1.0).unwrap();
    assert!(r.lambda + r.lambda_error < disk);
    assert!(r.lambda + r.lambda_error < r.lambda_perimeter_disk);
    let t = r.perimeter / TAU;
    let direct = lambda_disk_with(0.5, t, RegimePolicy::Override).unwrap();
    assert!((r.lambda_perimeter_disk - direct).abs() < 1e-12 * direct);
}

#[test]
fn exterior_trial_beats_disk() {
    let opts = VerifyOptions { override_regime: true, ..Default::default() };
    let square = build_domain(&DomainSpec::rectangle(1.0, 1.0).normalized(Normalization::Perimeter(TAU))).unwrap();
    let r = verify_exterior(&square, 1.0, &opts).unwrap();
    assert!(r.pass && r.margin > 0.0 && r.steiner_ok && r.moment_ok && r.centroid_ok);

    let bumpy = build_domain(&DomainSpec::perturbed_disk(0.1, 2).normalized(Normalization::Perimeter(TAU))).unwrap();
    let r = verify_exterior(&bumpy, 0.8, &VerifyOptions::default()).unwrap();
    assert!(r.pass && r.margin > r.error);

    let disk = build_domain(&DomainSpec::disk(1.0)).unwrap();
    let r = verify_exterior(&disk, 0.8, &VerifyOptions::default()).unwrap();
    assert!(r.is_disk && r.pass);
}
