mod common;

use chemclock::oscillator::{analyze_nullcline, nullcline_cubic, NULLCLINE_COEFFS};
use chemclock::periodest::{adaptive_quadrature, branch_integrand};
use chemclock::{compile, estimate_period, Crn, Monomial, OscillatorParams, PolyOde};

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn period_matches_fixed_panel_simpson() {
    let g = |x: f64| branch_integrand(x, 2.1) / 0.1;
    let t1 = -common::composite_simpson(g, 3.0, 4.0, 1_000_000);
    let t2 = common::composite_simpson(g, 0.0, 1.0, 1_000_000);
    let est = estimate_period(0.1, 2.1, 1e-10).unwrap();
    assert!((est.t1 - t1).abs() <= 1e-8 * t1, "{} vs {t1}", est.t1);
    assert!((est.t2 - t2).abs() <= 1e-8 * t2, "{} vs {t2}", est.t2);
    assert!(t1 > 9.0 && t1 < 11.0 && t2 > 9.0 && t2 < 11.0);
}

#[test]
fn steep_branch_integral_matches_oracle() {
    let g = |x: f64| branch_integrand(x, 2.1);
    let q = adaptive_quadrature(g, 3.0, 4.0, 1e-10).unwrap();
    let oracle = common::composite_simpson(g, 3.0, 4.0, 1_000_000);
    assert!((q.value - oracle).abs() <= 1e-10, "{} vs {oracle}", q.value);
}

#[test]
fn landing_points_match_root_finding() {
    let geo = analyze_nullcline(NULLCLINE_COEFFS, 2.1).unwrap();
    let right = bisect(|x| nullcline_cubic(x) - 1.0, 3.5, 5.0);
    let left = bisect(|x| nullcline_cubic(x) - 5.0, -1.0, 0.5);
    assert!((geo.landing_points[0].0 - right).abs() < 1e-12);
    assert!((geo.landing_points[1].0 - left).abs() < 1e-12);
    for ((xf, yf), (xl, yl)) in geo.fold_points.iter().zip(&geo.landing_points) {
        assert_ne!(xf, xl);
        assert_eq!(yf, yl);
        assert!((nullcline_cubic(*xl) - yl).abs() < 1e-12);
    }
}

#[test]
fn landing_points_of_a_shifted_cubic() {
    // f(x) = -(x - 1)^3 + 3(x - 1) + 4: folds at 0 and 2, landings at 3 and -1
    let coeffs = [-1.0, 3.0, 0.0, 2.0];
    let f = |x: f64| ((-x + 3.0) * x) * x + 2.0;
    let geo = analyze_nullcline(coeffs, 1.0).unwrap();
    assert_eq!(geo.fold_points, [(0.0, 2.0), (2.0, 6.0)]);
    let right = bisect(|x| f(x) - 2.0, 2.5, 4.0);
    let left = bisect(|x| f(x) - 6.0, -2.0, -0.5);
    assert!((geo.landing_points[0].0 - right).abs() < 1e-12);
    assert!((geo.landing_points[1].0 - left).abs() < 1e-12);
}

#[test]
fn hand_evaluated_vector_field() {
    let sys = chemclock::build_core(&OscillatorParams::default(), "").unwrap();
    let xy = sys.restrict(&["x", "y"]).unwrap();
    let rates = xy.eval(&[1.0, 1.0]).unwrap();
    assert_eq!(rates[0], 0.0);
    assert!((rates[1] + 0.11).abs() < 1e-15);
}

#[test]
fn printed_network_reproduces_the_oscillator() {
    let params = OscillatorParams::default();
    let sys = chemclock::build_core(&params, "").unwrap();
    let parsed = Crn::parse(common::REFERENCE_CRN).unwrap();
    assert!(parsed.validate().is_ok());
    let back = parsed.to_ode();
    for name in ["x", "y", "u", "v"] {
        let ours = sys.equation(name).unwrap();
        let theirs = back.equation(name).unwrap();
        assert_eq!(ours.len(), theirs.len(), "{name}");
        for t in ours {
            let c = back.coefficient(name, &t.monomial);
            assert!(
                (c - t.coeff).abs() <= 1e-12 * t.coeff.abs(),
                "{name}: {} vs {c}",
                t.coeff
            );
        }
    }
    assert_eq!(compile(&sys).unwrap().reactions.len(), 13);
}

#[test]
fn literal_x_plus_y_to_2y_breaks_the_x_equation() {
    let literal = common::REFERENCE_CRN.replace("X + Y ->{0.1} X + 2Y", "X + Y ->{0.1} 2Y");
    let back = Crn::parse(&literal).unwrap().to_ode();
    let sys = chemclock::build_core(&OscillatorParams::default(), "").unwrap();
    let xy = Monomial::new([("x", 1), ("y", 1)]).unwrap();
    let drift = back.coefficient("x", &xy) - sys.coefficient("x", &xy);
    assert!((drift + 0.1).abs() < 1e-12, "{drift}");
    assert_eq!(back.coefficient("y", &xy), sys.coefficient("y", &xy));
}

#[test]
fn non_realizable_difference_is_rejected() {
    let sys = PolyOde::builder()
        .species("x")
        .species("y")
        .term("x", 1.0, Monomial::var("x").unwrap())
        .term("x", -1.0, Monomial::var("y").unwrap())
        .build()
        .unwrap();
    let err = compile(&sys).unwrap_err();
    assert_eq!(err.violations.len(), 1);
    assert_eq!(err.violations[0].species.as_str(), "x");
    assert_eq!(err.violations[0].monomial, Monomial::var("y").unwrap());
    assert!(err.to_string().contains("does not contain x"));
}
