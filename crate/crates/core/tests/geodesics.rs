use finslerlab::catalog;
use finslerlab::geodesics::*;
use finslerlab::Error;

fn collinearity(x0: &[f64], dir: &[f64], x: &[f64]) -> f64 {
    let d = [x[0] - x0[0], x[1] - x0[1]];
    let norm = dir[0].hypot(dir[1]);
    (d[0] * dir[1] - d[1] * dir[0]).abs() / norm
}

#[test]
fn funk_ray_from_centre() {
    let e = catalog::funk(2).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.0, 0.0], &[1.0, 0.0], 1.0, 1000).unwrap();
    assert!(tr.f_drift() <= 1e-8, "drift {}", tr.f_drift());
    for p in &tr.samples {
        assert!(collinearity(&[0.0, 0.0], &[1.0, 0.0], &p.x) <= 1e-8);
        assert!(p.x[0].hypot(p.x[1]) < 1.0);
        // unit-speed Funk ray from the centre: r(t) = 1 − e^{−t}
        assert!((p.x[0] - (1.0 - (-p.t).exp())).abs() < 1e-10, "t={} x={}", p.t, p.x[0]);
    }
}

#[test]
fn funk_ray_off_centre_is_straight() {
    let e = catalog::funk(2).unwrap();
    let (x0, y0) = ([0.2, -0.1], [0.3, 0.5]);
    let tr = integrate_geodesic(&e.metric, &x0, &y0, 1.0, 1000).unwrap();
    assert!(tr.f_drift() <= 1e-8);
    for p in &tr.samples {
        assert!(collinearity(&x0, &y0, &p.x) <= 1e-8);
    }
}

#[test]
fn sphere_chart_line_through_origin() {
    let e = catalog::sphere_chart(2).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.0, 0.0], &[0.6, 0.8], 1.0, 1000).unwrap();
    assert!(tr.f_drift() <= 1e-8);
    for p in &tr.samples {
        assert!(collinearity(&[0.0, 0.0], &[0.6, 0.8], &p.x) <= 1e-6);
    }
}

#[test]
fn fourth_order_convergence() {
    let e = catalog::funk(2).unwrap();
    let (x0, y0) = ([0.1, 0.2], [1.2, -0.7]);
    let end = |steps| integrate_geodesic(&e.metric, &x0, &y0, 1.0, steps).unwrap().last().x.clone();
    let reference = end(640);
    let err = |steps| {
        let x = end(steps);
        (x[0] - reference[0]).hypot(x[1] - reference[1])
    };
    assert!(err(10) / err(20) >= 2f64.powf(3.5));
    assert!(integrate_geodesic(&e.metric, &x0, &y0, 1.0, 10).unwrap().f_drift() < 1e-13);

    let r = catalog::randers(2, &[0.3, 0.1], catalog::BetaMode::Polynomial).unwrap();
    let drift = |steps| integrate_geodesic(&r.metric, &[0.1, 0.1], &[1.0, 0.5], 1.0, steps).unwrap().f_drift();
    let (coarse, fine) = (drift(20), drift(40));
    assert!(coarse / fine >= 2f64.powf(3.5), "coarse {coarse:e} fine {fine:e}");
}

#[test]
fn reversal_returns_to_start() {
    let e = catalog::randers(2, &[0.3, 0.1], catalog::BetaMode::Polynomial).unwrap();
    let (x0, y0) = ([0.1, 0.05], [0.4, 0.3]);
    let fwd = integrate_geodesic(&e.metric, &x0, &y0, 1.0, 1000).unwrap();
    let end = fwd.last();
    let back = integrate_geodesic(&e.metric, &end.x, &end.y, -1.0, 1000).unwrap();
    let b = back.last();
    for i in 0..2 {
        assert!((b.x[i] - x0[i]).abs() < 1e-7 && (b.y[i] - y0[i]).abs() < 1e-7);
    }
}

#[test]
fn leaving_the_funk_ball_is_located() {
    let e = catalog::funk(2).unwrap();
    match integrate_geodesic(&e.metric, &[0.0, 0.0], &[1.0, 0.0], -2.0, 400) {
        Err(Error::LeftDomain { t }) => assert!((t + 2f64.ln()).abs() < 0.05, "t = {t}"),
        other => panic!("expected LeftDomain, got {other:?}"),
    }
}

#[test]
fn rotation_flow_quarter_turn() {
    let x = catalog::rotation(2).unwrap();
    let tr = integrate_flow(&x.field, &[1.0, 0.0], std::f64::consts::FRAC_PI_2, 2000, None).unwrap();
    let p = tr.last();
    assert!(p.x[0].abs() < 1e-10 && (p.x[1] - 1.0).abs() < 1e-10, "{:?}", p.x);
}

#[test]
fn translation_flow_is_linear() {
    let x = catalog::translation(3, 1).unwrap();
    let tr = integrate_flow(&x.field, &[0.5, 0.5, 0.5], 0.75, 7, None).unwrap();
    assert_eq!(tr.last().x, vec![0.5, 1.25, 0.5]);
}

#[test]
fn c_family_flow_matches_scalar_ode() {
    let x = catalog::c_projective(2).unwrap();
    let tr = integrate_flow(&x.field, &[0.1, 0.0], 1.0, 1000, None).unwrap();
    for p in &tr.samples {
        let r = 0.1 / (1.0 - 0.1 * p.t);
        assert!((p.x[0] - r).abs() < 1e-8 && p.x[1] == 0.0);
    }
}

#[test]
fn flag_curvature_constant_along_funk_geodesic() {
    let e = catalog::funk(2).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.1, -0.2], &[0.5, 0.4], 1.0, 200).unwrap();
    let st = probe_constancy(&e.metric, &tr.subsample(20), Quantity::FlagCurvature { flags: 5, seed: 1 }).unwrap();
    assert!((st.mean + 0.25).abs() <= 1e-5 && st.max_deviation <= 1e-5, "{st:?}");
}

#[test]
fn euclidean_flag_curvature_vanishes() {
    let e = catalog::euclidean(3).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.0, 0.1, 0.2], &[1.0, 0.3, -0.2], 1.0, 10).unwrap();
    let st = probe_constancy(&e.metric, &tr, Quantity::FlagCurvature { flags: 3, seed: 2 }).unwrap();
    assert_eq!(st.max_deviation, 0.0);
    assert_eq!(st.mean, 0.0);
}

#[test]
fn tau_derivative_is_s_on_funk() {
    let e = catalog::funk(2).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.1, -0.2], &[0.5, 0.4], 1.0, 400).unwrap();
    let c = tau_derivative_check(&e.metric, &tr, 40).unwrap();
    assert!(c.points >= 9 && c.max_deviation <= 1e-4, "{c:?}");
}

#[test]
fn s_over_f_constant_on_funk_geodesic() {
    let e = catalog::funk(3).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.1, -0.2, 0.05], &[0.5, 0.4, 0.1], 1.0, 100).unwrap();
    let st = probe_constancy(&e.metric, &tr.subsample(25), Quantity::SOverF).unwrap();
    assert!((st.mean - 2.0).abs() < 1e-8 && st.max_deviation < 1e-8, "{st:?}");
}

#[test]
fn csv_export_has_probe_column() {
    let e = catalog::euclidean(2).unwrap();
    let tr = integrate_geodesic(&e.metric, &[0.0, 0.0], &[1.0, 0.0], 1.0, 4).unwrap();
    let vals = vec![0.0; tr.len()];
    let csv = tr.to_csv(Some(("K", &vals))).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,y1,y2,F,K");
    assert_eq!(csv.lines().count(), 6);
    assert!(tr.to_csv(Some(("K", &vals[..2]))).is_err());
}
