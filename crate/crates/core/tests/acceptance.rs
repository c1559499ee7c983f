//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{flag_from, riemann_from_spray, Oracle, MATRIX};
use finslerlab::catalog::{self, BetaMode, CatalogEntry, METRIC_LABELS};
use finslerlab::curvature::{
    berwald_commutation_residual, bianchi_trace_residuals, curvature_bundle, ricci_contraction_residual,
    ricci_identity_residual, ricci_relation_residual, trace_curvature_residual,
};
use finslerlab::expr::{parse_expr, parse_tangent_field};
use finslerlab::geodesics::{integrate_flow, integrate_geodesic, probe_constancy, tau_derivative_check, Quantity};
use finslerlab::geometry::Geometry;
use finslerlab::nonriem::{iml_fit, mean_berwald, nonriem_bundle, s_curvature};
use finslerlab::symmetry::{
    classify, lie_ricci_compare, verify_lemma31, verify_prop_i_invariant, ClassificationReport, Tolerances,
};
use finslerlab::tensor::{TangentSample, TensorValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

/// Running maximum of named residuals with a shared bound.
struct Worst {
    bound: f64,
    value: f64,
    at: String,
}

impl Worst {
    fn new(bound: f64) -> Self {
        Worst { bound, value: 0.0, at: String::new() }
    }

    fn see(&mut self, value: f64, what: impl FnOnce() -> String) {
        if !(value <= self.value) {
            self.value = value;
            self.at = what();
        }
    }

    fn finish(&self, label: &str) -> Outcome {
        let line = format!("{label} worst {:.2e} ≤ {:.0e} ({})", self.value, self.bound, self.at);
        if self.value <= self.bound {
            Ok(line)
        } else {
            Err(line)
        }
    }
}

fn rel(t: &TensorValue, scale: f64) -> f64 {
    t.max_abs() / (1.0 + scale)
}

fn diff(a: &TensorValue, b: &TensorValue, deg: i32, l: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (u, v) in a.components.iter().zip(&b.components) {
        let want = u * l.powi(deg);
        worst = worst.max((v - want).abs());
        scale = scale.max(want.abs());
    }
    worst / (1.0 + scale)
}

fn randers_poly(n: usize) -> CatalogEntry {
    let b: Vec<f64> = (0..n).map(|i| if i == 0 { 0.2 } else { 0.1 }).collect();
    catalog::randers(n, &b, BetaMode::Polynomial).unwrap()
}

fn within_time(started: Instant, limit: f64, body: Outcome) -> Outcome {
    let secs = started.elapsed().as_secs_f64();
    match body {
        Ok(s) if secs <= limit => Ok(format!("{s}; {secs:.1} s ≤ {limit:.0} s")),
        Ok(s) => Err(format!("{s}; {secs:.1} s exceeds {limit:.0} s")),
        Err(s) => Err(format!("{s}; {secs:.1} s")),
    }
}

fn core_identities() -> Outcome {
    let started = Instant::now();
    let per_sample = |e: &CatalogEntry, s: &TangentSample| -> f64 {
        let g = Geometry::new(&e.metric, s, 1, 4).unwrap();
        let n = g.n();
        let gv = g.value(g.fundamental());
        let mut w = gv.max_diff(&g.value(&g.fundamental_product_form())) / (1.0 + gv.max_abs());
        let c = g.value(g.cartan().unwrap());
        w = w.max(rel(&g.value(&g.cartan().unwrap().contract_vec(0, g.y())), c.max_abs()));
        let l = g.value(g.ell_up().unwrap());
        let mut gll = 0.0;
        for i in 0..n {
            for j in 0..n {
                gll += gv.get(&[i, j]) * l.get(&[i]) * l.get(&[j]);
            }
        }
        w = w.max((gll - 1.0).abs());
        let a = g.cartan_a().unwrap();
        w = w.max(rel(&g.value(&a.contract_vec(2, &g.ell_up().unwrap().comps)), g.value(&a).max_abs()));
        let lam = 2.5;
        let s2 = TangentSample::new(s.x.clone(), s.y.iter().map(|v| lam * v).collect());
        let h = Geometry::new(&e.metric, &s2, 1, 4).unwrap();
        w = w.max(diff(&gv, &h.value(h.fundamental()), 0, lam));
        w = w.max(diff(&c, &h.value(h.cartan().unwrap()), -1, lam));
        w = w.max(diff(&g.value(g.spray().unwrap()), &h.value(h.spray().unwrap()), 2, lam));
        w = w.max(diff(&g.value(g.nonlinear().unwrap()), &h.value(h.nonlinear().unwrap()), 1, lam));
        w = w.max(diff(&g.value(g.berwald_coeffs().unwrap()), &h.value(h.berwald_coeffs().unwrap()), 0, lam));
        w
    };
    let mut worst = Worst::new(1e-9);
    let mut count = 0;
    for n in [2, 3] {
        for label in ["euclidean", "sphere_chart", "randers", "funk", "quartic_minkowski"] {
            let e = catalog::metric(label, n).unwrap();
            let samples = e.samples(200, 2024).unwrap();
            count += samples.len();
            let r: Vec<f64> = samples.par_iter().map(|s| per_sample(&e, s)).collect();
            let (k, v) = r.iter().enumerate().fold((0, 0.0), |a, (k, &v)| if v > a.1 { (k, v) } else { a });
            worst.see(v, || format!("{label} n={n} sample {k}"));
        }
    }
    within_time(started, 30.0, worst.finish(&format!("{count} samples")))
}

fn curvature_identities() -> Outcome {
    let started = Instant::now();
    let psi2 = parse_tangent_field(&["x1^2*y2 - 0.4*x2*y1 + y1*y2^2/(y1^2+y2^2)", "0.3*x1*x2*y1 + y2^3/(y1^2+y2^2) - x2^2*y2"], 2).unwrap();
    let psi3 = parse_tangent_field(&["x1*y2 + x3^2*y1", "y3^2/sqrt(y1^2+y2^2+y3^2) - x2*y2", "0.5*x1*x2*y3 + y1"], 3).unwrap();
    let mut worst = Worst::new(1e-5);
    for n in [2, 3] {
        let psi = if n == 2 { &psi2 } else { &psi3 };
        for e in [randers_poly(n), catalog::funk(n).unwrap(), catalog::sphere_chart(n).unwrap(), catalog::metric("randers", n).unwrap()] {
            let rows: Vec<Vec<(f64, &str)>> = e
                .samples(20, 77)
                .unwrap()
                .par_iter()
                .map(|s| {
                    let g = Geometry::new(&e.metric, s, 2, 6).unwrap();
                    let p = g.tangent_field(psi).unwrap();
                    let (a, b) = bianchi_trace_residuals(&g).unwrap();
                    let scale = g.value(g.berwald_hh().unwrap()).max_abs();
                    vec![
                        (trace_curvature_residual(&g).unwrap().max_abs() / (1.0 + scale), "K^r_0m0 = R^r_m"),
                        (ricci_identity_residual(&g, &p).unwrap().max_abs(), "Ricci identity"),
                        (berwald_commutation_residual(&g, g.f()).unwrap().max_abs(), "commutation"),
                        (a.max_abs(), "y^j K_jl.m"),
                        (b.max_abs(), "y^l K_jl.m + 2H_jm"),
                        (ricci_contraction_residual(&g).unwrap().abs(), "ℓℓRic_ik = Ric/F²"),
                        (ricci_relation_residual(&g).unwrap().max_abs(), "Ric_ij = R̃_ij − H_ij"),
                    ]
                })
                .collect();
            for row in rows {
                for (v, name) in row {
                    worst.see(v, || format!("{name} on {} n={n}", e.label));
                }
            }
        }
    }
    within_time(started, 60.0, worst.finish("7 identities × 8 metrics × 20 samples"))
}

fn constant_values() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut funk = Worst::new(1e-5);
    let mut oracle = Worst::new(1e-5);
    for n in [2, 3] {
        let f = catalog::funk(n).unwrap();
        let o = Oracle::new(&f.metric);
        let sprays: Vec<_> = (1..=n).map(|i| parse_expr(&format!("0.5*({})*y{i}", f.metric.f), n).unwrap()).collect();
        for base in f.samples(20, 5).unwrap() {
            for k in 0..100 {
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let s = TangentSample::new(base.x.clone(), y);
                let g = Geometry::new(&f.metric, &s, 2, 4).unwrap();
                let kv = g.flag_curvature(&v).unwrap();
                funk.see((kv + 0.25).abs(), || format!("funk n={n}"));
                if k == 0 {
                    let closed: Vec<f64> = sprays.iter().map(|e| e.eval(&s.x, &s.y).unwrap()).collect();
                    let fd = o.spray(&s.x, &s.y);
                    let spray_gap = closed.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    oracle.see(spray_gap, || format!("closed-form spray n={n}"));
                    let r = riemann_from_spray(&sprays, f.metric.guard.as_ref(), &s.x, &s.y);
                    let k_fd = flag_from(&r, &o.fundamental(&s.x, &s.y), &s.y, &v);
                    oracle.see((k_fd + 0.25).abs(), || format!("finite-difference flag n={n}"));
                }
            }
        }
    }
    let mut sphere = Worst::new(1e-6);
    let sp = catalog::sphere_chart(2).unwrap();
    for s in sp.samples(50, 6).unwrap() {
        let g = Geometry::new(&sp.metric, &s, 2, 6).unwrap();
        let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        sphere.see((g.flag_curvature(&v).unwrap() - 1.0).abs(), || "sphere flag".into());
        let ric = g.value(&g.ricci_second().unwrap());
        sphere.see(ric.max_diff(&g.value(g.fundamental())), || "sphere Einstein".into());
    }
    let mut flat = Worst::new(1e-10);
    for n in [2, 3] {
        let e = catalog::euclidean(n).unwrap();
        for s in e.samples(20, 7).unwrap() {
            let g = Geometry::new(&e.metric, &s, 2, 6).unwrap();
            let c = curvature_bundle(&g).unwrap();
            for t in [&c.riemann_trace, &c.berwald_hh, &c.berwald_ricci, &c.ricci_tilde, &c.ricci_second, &c.cartan_hh, &c.cartan_hv, &c.cartan_vv, &c.h_curvature] {
                flat.see(t.max_abs(), || format!("euclidean curvature n={n}"));
            }
            flat.see(c.ricci_scalar.abs(), || "euclidean Ric".into());
            let b = nonriem_bundle(&e.metric, &g).unwrap();
            for t in [&b.e, &b.h, &b.landsberg, &b.mean_landsberg] {
                flat.see(t.max_abs(), || format!("euclidean non-Riemannian n={n}"));
            }
            flat.see(b.tau.abs().max(b.s.abs()), || format!("euclidean τ, S n={n}"));
        }
    }
    let parts = [funk.finish("funk K = −¼"), oracle.finish("fd oracle"), sphere.finish("sphere"), flat.finish("euclidean")];
    join(parts)
}

fn join<const N: usize>(parts: [Outcome; N]) -> Outcome {
    let ok = parts.iter().all(|p| p.is_ok());
    let text = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect::<Vec<_>>().join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn non_riemannian() -> Outcome {
    let mut e_paths = Worst::new(1e-3);
    for n in [2, 3] {
        for e in [catalog::funk(n).unwrap(), catalog::metric("randers", n).unwrap(), randers_poly(n)] {
            for s in e.samples(10, 8).unwrap() {
                let p = mean_berwald(&e.metric, &Geometry::new(&e.metric, &s, 1, 5).unwrap()).unwrap();
                e_paths.see(p.disagreement, || format!("{} n={n}", e.label));
            }
        }
    }
    let mut s_berwald = Worst::new(2e-6);
    for n in [2, 3] {
        for label in METRIC_LABELS {
            let e = catalog::metric(label, n).unwrap();
            if !e.properties.berwald {
                continue;
            }
            for s in e.samples(10, 9).unwrap() {
                let v = s_curvature(&e.metric, &Geometry::new(&e.metric, &s, 1, 3).unwrap()).unwrap().value;
                s_berwald.see(v.abs(), || format!("{label} n={n}"));
            }
        }
    }
    let mut tau = Worst::new(1e-4);
    for (e, x0, y0) in [
        (catalog::funk(2).unwrap(), vec![0.1, -0.2], vec![0.6, 0.3]),
        (catalog::funk(3).unwrap(), vec![0.1, 0.0, -0.2], vec![0.3, 0.4, 0.2]),
        (randers_poly(2), vec![0.0, 0.1], vec![1.0, 0.5]),
    ] {
        let tr = integrate_geodesic(&e.metric, &x0, &y0, 1.0, 200).unwrap();
        let chk = tau_derivative_check(&e.metric, &tr, 10).unwrap();
        tau.see(chk.max_deviation, || format!("{} n={}", e.label, e.metric.n));
    }
    let mut iml = Worst::new(1e-5);
    let mut iml_std = Worst::new(1e-4);
    let mut value = 0.0;
    for n in [2, 3] {
        let f = catalog::funk(n).unwrap();
        let mut ratios = Vec::new();
        for s in f.samples(50, 10).unwrap() {
            let g = Geometry::new(&f.metric, &s, 1, 4).unwrap();
            let fit = iml_fit(&g).unwrap();
            iml.see(fit.residual, || format!("funk n={n}"));
            ratios.push(fit.lambda / g.f().value());
        }
        let (mean, std) = common::mean_std(&ratios);
        iml_std.see(std, || format!("funk n={n}"));
        value = mean;
    }
    join([
        e_paths.finish("E paths"),
        s_berwald.finish("S on Berwald"),
        tau.finish("τ′ = S"),
        iml.finish("J + λ̂I"),
        iml_std.finish(&format!("λ̂/F = {value:.6} spread")),
    ])
}

fn classification_reports() -> Vec<(&'static str, &'static str, &'static str, ClassificationReport)> {
    MATRIX
        .par_iter()
        .map(|&(m, f, want)| {
            let e = catalog::metric(m, 2).unwrap();
            let field = catalog::vector_field(f, 2).unwrap();
            let ss = e.samples(20, 7).unwrap();
            (m, f, want, classify(&e.metric, &field.field, f, &ss, Tolerances::default()).unwrap())
        })
        .collect()
}

fn verdicts(r: &ClassificationReport) -> [bool; 7] {
    [r.projective, r.affine, r.killing, r.i_invariant, r.e_invariant, r.c_projective, r.h_invariant].map(|v| v.pass)
}

fn symmetry(reports: &[(&str, &str, &str, ClassificationReport)], started: Instant) -> Outcome {
    let entry = |m: &str| catalog::metric(m, 2).unwrap();
    let field = |f: &str| catalog::vector_field(f, 2).unwrap().field;
    let mut lemma = Worst::new(1e-5);
    for (m, f) in [("euclidean", "c-projective"), ("euclidean", "rotation"), ("sphere_chart", "rotation")] {
        let e = entry(m);
        let r = verify_lemma31(&e.metric, &field(f), &e.samples(6, 13).unwrap()).unwrap();
        for it in &r.items {
            lemma.see(it.residual, || format!("{m}/{f} {}", it.item));
        }
    }
    let mut prop = Worst::new(1e-5);
    let mut beh15 = Worst::new(1e-5);
    for (m, f) in [("euclidean", "c-projective"), ("euclidean", "translation"), ("sphere_chart", "rotation"), ("funk", "rotation")] {
        let e = entry(m);
        let ss = e.samples(5, 4).unwrap();
        let r = verify_prop_i_invariant(&e.metric, &field(f), &ss).unwrap();
        for it in &r.items {
            prop.see(it.residual, || format!("{m}/{f} {}", it.item));
        }
        let r = lie_ricci_compare(&e.metric, &field(f), &ss).unwrap();
        let v = r.item("£Ric − £R̃").unwrap().residual;
        beh15.see(v, || format!("{m}/{f}"));
    }
    let mut lemma_b = Worst::new(1e-5);
    let mut wrong = Vec::new();
    for (m, f, want, r) in reports {
        if let Some(b) = r.lemma_b {
            lemma_b.see(b, || format!("{m}/{f}"));
        }
        let got = verdicts(r);
        for (k, c) in want.chars().enumerate() {
            if c != '?' && (c == 'Y') != got[k] {
                wrong.push(format!("{m}/{f}#{k}"));
            }
        }
    }
    let matrix = if wrong.is_empty() {
        Ok(format!("confusion matrix exact on {} pairs", reports.len()))
    } else {
        Err(format!("false verdicts {wrong:?}"))
    };
    within_time(
        started,
        120.0,
        join([lemma.finish("lemma items"), prop.finish("£E £H £B"), beh15.finish("£Ric = £R̃"), lemma_b.finish("lemma B"), matrix]),
    )
}

fn theorem_probes(reports: &[(&str, &str, &str, ClassificationReport)]) -> Outcome {
    let mut along = Worst::new(1e-5);
    for (x0, y0) in [(vec![0.1, -0.2], vec![0.5, 0.4]), (vec![-0.3, 0.2], vec![0.2, -0.7])] {
        let f = catalog::funk(2).unwrap();
        let tr = integrate_geodesic(&f.metric, &x0, &y0, 1.0, 200).unwrap();
        let st = probe_constancy(&f.metric, &tr.subsample(10), Quantity::FlagCurvature { flags: 5, seed: 1 }).unwrap();
        along.see(st.max_deviation, || "funk geodesic".into());
    }
    let e = catalog::euclidean(2).unwrap();
    let c = catalog::c_projective(2).unwrap();
    let tr = integrate_flow(&c.field, &[0.1, 0.3], 1.0, 200, Some(&e.metric)).unwrap();
    let st = probe_constancy(&e.metric, &tr.subsample(10), Quantity::FlagCurvature { flags: 5, seed: 2 }).unwrap();
    along.see(st.max_deviation, || "c-family curve".into());

    let mut guard = Vec::new();
    for (m, f, _, r) in reports {
        let landsberg = r.max_landsberg <= 1e-6;
        if landsberg && r.projective.pass && !r.affine.pass && r.i_invariant.pass && r.max_cartan > 1e-6 {
            guard.push(format!("{m}/{f}"));
        }
    }
    let guard = if guard.is_empty() {
        Ok(format!("no counterexample among {} pairs", reports.len()))
    } else {
        Err(format!("counterexamples {guard:?}"))
    };
    join([along.finish("flag curvature along curves"), guard])
}

fn determinism() -> Outcome {
    let run = || -> Result<serde_json::Value, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_finslerlab"))
            .args(["verify", "--suite", "all", "--metric", "funk", "--dim", "2", "--seed", "1", "--json"])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("exit {:?}", out.status.code()));
        }
        let mut doc: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        doc.as_object_mut().ok_or("report is not an object")?.remove("timings");
        Ok(doc)
    };
    let a = serde_json::to_vec(&run()?).unwrap();
    let b = serde_json::to_vec(&run()?).unwrap();
    if a == b {
        Ok(format!("two runs, {} identical bytes", a.len()))
    } else {
        let at = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        Err(format!("payloads differ at byte {at}"))
    }
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(p) => Err(format!(
            "panicked: {}",
            p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "core identities", guarded(core_identities)));
    results.push((2, "curvature identities", guarded(curvature_identities)));
    results.push((3, "constant values", guarded(constant_values)));
    results.push((4, "non-Riemannian suite", guarded(non_riemannian)));
    let started = Instant::now();
    let reports = catch_unwind(classification_reports);
    match &reports {
        Ok(r) => {
            results.push((5, "symmetry suite", guarded(|| symmetry(r, started))));
            results.push((6, "theorem probes", guarded(|| theorem_probes(r))));
        }
        Err(_) => {
            results.push((5, "symmetry suite", Err("classification panicked".into())));
            results.push((6, "theorem probes", Err("classification panicked".into())));
        }
    }
    results.push((7, "determinism", guarded(determinism)));

    let mut failed = 0;
    for (k, name, r) in &results {
        match r {
            Ok(s) => println!("criterion {k} ({name}): PASS  {s}"),
            Err(s) => {
                failed += 1;
                println!("criterion {k} ({name}): FAIL  {s}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
