mod common;

use common::mean_std;
use finslerlab::catalog::{self, BetaMode, CatalogEntry, Region, METRIC_LABELS};
use finslerlab::geometry::Geometry;
use finslerlab::nonriem::{iml_fit, s_curvature};
use finslerlab::symmetry::{complete_lift, flow_lie, lie_spray, lie_tensor, FlowSchedule, Object};
use finslerlab::tensor::TangentSample;
use finslerlab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_entries() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for label in METRIC_LABELS {
            if let Ok(e) = catalog::metric(label, n) {
                out.push(e);
            }
        }
    }
    out
}

#[test]
fn documented_examples() {
    let f = catalog::funk(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let v = f.metric.eval(&[0.0, 0.0], &y).unwrap();
        assert!((v - (y[0] * y[0] + y[1] * y[1]).sqrt()).abs() <= 1e-14);
    }

    let r = catalog::randers(2, &[0.3, 0.0], BetaMode::Constant).unwrap();
    assert!(r.properties.locally_minkowski && r.properties.berwald);
    for s in r.samples(10, 2).unwrap() {
        let g = Geometry::new(&r.metric, &s, 1, 2).unwrap();
        assert!(g.value(g.spray().unwrap()).max_abs() <= 1e-15);
    }

    let q = catalog::quartic_minkowski(2).unwrap();
    for s in q.samples(10, 3).unwrap() {
        let want = (s.y[0].powi(4) + s.y[1].powi(4)).powf(0.25);
        assert!((q.metric.eval(&s.x, &s.y).unwrap() - want).abs() <= 1e-14);
        let g = Geometry::new(&q.metric, &s, 0, 3).unwrap();
        assert!(g.value(g.cartan().unwrap()).max_abs() > 1e-3);
    }
    assert!(!q.properties.riemannian);
}

#[test]
fn every_entry_passes_the_sample_gates() {
    for e in all_entries() {
        let samples = e.samples(200, 99).unwrap();
        assert_eq!(samples.len(), 200);
        for s in &samples {
            assert!(e.metric.homogeneity_defect(&s.x, &s.y).unwrap() <= 1e-12, "{}", e.label);
            assert!(Geometry::new(&e.metric, s, 0, 2).is_ok(), "{}", e.label);
        }
    }
}

#[test]
fn property_flags_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for e in all_entries() {
        let n = e.metric.n;
        let p = &e.properties;
        let samples = e.samples(20, 12).unwrap();
        let mut s_over_f = Vec::new();
        let mut lambdas = Vec::new();
        for s in &samples {
            let g = Geometry::new(&e.metric, s, 1, 5).unwrap();
            if p.riemannian {
                assert!(g.value(g.cartan().unwrap()).max_abs() <= 1e-10, "{}", e.label);
            }
            if p.berwald {
                assert!(g.value(g.berwald_curvature().unwrap()).max_abs() <= 1e-9, "{}", e.label);
            }
            if p.landsberg {
                assert!(g.value(g.landsberg().unwrap()).max_abs() <= 1e-9, "{}", e.label);
            }
            if p.locally_minkowski {
                assert!(g.value(g.spray().unwrap()).max_abs() <= 1e-14, "{}", e.label);
                let moved: Vec<f64> = s.x.iter().map(|v| 0.5 * v + 0.1).collect();
                let a = e.metric.eval(&s.x, &s.y).unwrap();
                assert!((e.metric.eval(&moved, &s.y).unwrap() - a).abs() <= 1e-14 * a, "{}", e.label);
            }
            if p.isotropic_s {
                s_over_f.push(s_curvature(&e.metric, &g).unwrap().value / g.f().value());
            }
            if let (Some(k), true) = (p.constant_flag, n >= 2) {
                let c = Geometry::new(&e.metric, s, 2, 4).unwrap();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!((c.flag_curvature(&v).unwrap() - k).abs() <= 1e-5, "{}", e.label);
            }
            if let Some(c) = p.iml_constant {
                let fit = iml_fit(&g).unwrap();
                lambdas.push(fit.lambda / g.f().value());
                assert!((fit.lambda / g.f().value() - c).abs() <= 1e-5, "{}", e.label);
            }
        }
        if p.isotropic_s {
            let (_, std) = mean_std(&s_over_f);
            assert!(std <= 1e-4, "{}", e.label);
        }
        if p.iml_constant.is_some() {
            assert!(mean_std(&lambdas).1 <= 1e-4, "{}", e.label);
        }
    }
}

#[test]
fn randers_poly_has_no_shortcut_properties() {
    let r = catalog::randers(2, &[0.3, 0.0], BetaMode::Polynomial).unwrap();
    let p = &r.properties;
    assert!(!p.riemannian && !p.berwald && !p.locally_minkowski && p.constant_flag.is_none());
    let s = &r.samples(1, 0).unwrap()[0];
    let g = Geometry::new(&r.metric, s, 1, 5).unwrap();
    assert!(g.value(g.berwald_curvature().unwrap()).max_abs() > 1e-4);
}

#[test]
fn vector_field_examples() {
    let e = catalog::euclidean(2).unwrap();
    let s = TangentSample::new(vec![0.3, -0.2], vec![0.8, 0.5]);
    let low = Geometry::new(&e.metric, &s, 1, 3).unwrap();
    assert!(matches!(complete_lift(&catalog::rotation(2).unwrap().field).jets(&low), Err(Error::TruncationOrderExceeded(_))));
    let g = Geometry::new(&e.metric, &s, 2, 3).unwrap();

    let rot = catalog::rotation(2).unwrap();
    let lift = complete_lift(&rot.field).jets(&g).unwrap();
    assert!(g.value(&lie_tensor(&lift, g.fundamental())).max_abs() <= 1e-14);

    let dil = catalog::dilation(2).unwrap();
    let lift = complete_lift(&dil.field).jets(&g).unwrap();
    let lg = g.value(&lie_tensor(&lift, g.fundamental()));
    let gv = g.value(g.fundamental());
    for (a, b) in lg.components.iter().zip(&gv.components) {
        assert!((a - 2.0 * b).abs() <= 1e-14);
    }
    let flow = flow_lie(&e.metric, &dil.field, &s, Object::Fundamental, FlowSchedule::default()).unwrap();
    for (a, b) in flow.value.components.iter().zip(&gv.components) {
        assert!((a - 2.0 * b).abs() <= 1e-7);
    }
    let ls = lie_spray(&e.metric, &dil.field, &s).unwrap();
    assert!(ls.psi.abs() <= 1e-14 && ls.residual <= 1e-14);

    let cp = catalog::c_projective(2).unwrap();
    let ls = lie_spray(&e.metric, &cp.field, &s).unwrap();
    assert!(ls.residual <= 1e-12);
    assert!((ls.psi - s.y[0]).abs() <= 1e-12);

    let fields = catalog::catalog_vector_fields(3).unwrap();
    let labels: Vec<&str> = fields.iter().map(|f| f.label.as_str()).collect();
    assert_eq!(labels, ["rotation", "translation", "translation-2", "translation-3", "dilation", "c-projective", "random-cubic"]);
    assert_eq!(catalog::catalog_vector_fields(1).unwrap().len(), 4);
}

#[test]
fn invalid_parameters() {
    assert!(matches!(catalog::randers(2, &[0.8, 0.6], BetaMode::Constant), Err(Error::InvalidParameter(_))));
    assert!(matches!(catalog::randers(2, &[0.3], BetaMode::Constant), Err(Error::InvalidParameter(_))));
    assert!(matches!(catalog::funk(0), Err(Error::InvalidParameter(_))));
    assert!(matches!(catalog::euclidean(5), Err(Error::InvalidParameter(_))));
    assert!(matches!(catalog::metric("hyperbolic", 2), Err(Error::InvalidParameter(_))));
    assert!(matches!(catalog::rotation(1), Err(Error::InvalidParameter(_))));
    assert!(matches!(catalog::vector_field("translation-4", 3), Err(Error::InvalidParameter(_))));

    let e = catalog::euclidean(2).unwrap();
    let tiny = Region { radius: 0.1, ball: true, axis_margin: 0.9 };
    assert!(matches!(catalog::sample_points(&e.metric, &tiny, 5, 0), Err(Error::InsufficientSamples { .. })));
}

#[test]
fn sampling_is_seeded() {
    let f = catalog::funk(3).unwrap();
    assert_eq!(f.samples(30, 5).unwrap(), f.samples(30, 5).unwrap());
    assert_ne!(f.samples(30, 5).unwrap(), f.samples(30, 6).unwrap());
    for s in f.samples(100, 5).unwrap() {
        assert!(s.x.iter().map(|v| v * v).sum::<f64>() <= 0.36);
    }
}
