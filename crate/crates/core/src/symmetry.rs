//! Complete lifts, Lie derivatives along them, and the projective-field
//! classifier.
//!
//! Lie derivatives are available by two independent routes: flow pullback
//! (`F_t(x, y) = F(Φ_t(x), DΦ_t(x) y)`, the whole pipeline rerun on `F_t`
//! and differentiated in `t`) and closed-form jet formulas.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{MetricField, VectorFieldExpr};
use crate::geometry::{Derivative, Geometry};
use crate::jets::{Jet, JetSpace};
use crate::tensor::{JetTensor, Lower, TangentSample, TensorValue, Upper};

/// Complete lift `X̂ = X^i ∂_i + y^k ∂_k X^i ∂̇_i` of a base field.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedField {
    pub base: VectorFieldExpr,
}

pub fn complete_lift(field: &VectorFieldExpr) -> LiftedField {
    LiftedField { base: field.clone() }
}

impl LiftedField {
    /// Horizontal part `X^i(x)` and vertical part `Y^i = y^k ∂_k X^i`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.base.n;
        if x.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len().min(y.len()) });
        }
        let space = JetSpace::get(n, 1, 0);
        let xs: Vec<Jet> = x.iter().enumerate().map(|(k, &v)| Jet::var_x(&space, k, v)).collect();
        let comps = self.base.eval_generic(&xs)?;
        let horizontal = comps.iter().map(Jet::value).collect();
        let vertical = comps
            .iter()
            .map(|c| (0..n).map(|k| y[k] * c.derivative_x(k).value()).sum())
            .collect();
        Ok((horizontal, vertical))
    }

    /// Jets of the lift in `geo`'s space.
    pub fn jets(&self, geo: &Geometry) -> Result<LiftJets> {
        if self.base.n != geo.n() {
            return Err(Error::DimensionMismatch { expected: geo.n(), got: self.base.n });
        }
        if geo.orders().0 < 2 {
            return Err(Error::TruncationOrderExceeded(format!(
                "the complete lift needs x order ≥ 2, have {}",
                geo.orders().0
            )));
        }
        let x = geo.vector_field(&self.base)?;
        let dx = x.horizontal_partial();
        let ddx = dx.horizontal_partial();
        let n = geo.n();
        let y = (0..n).map(|i| sum(n, |k| geo.y()[k].mul_jet(dx.at(&[i, k])))).collect();
        Ok(LiftJets { x, dx, ddx, y })
    }
}

/// `X^i`, `∂_k X^i` (`[i, k]`), `∂_l ∂_k X^i` (`[i, k, l]`) and `Y^i`.
#[derive(Debug, Clone)]
pub struct LiftJets {
    pub x: JetTensor,
    pub dx: JetTensor,
    pub ddx: JetTensor,
    pub y: Vec<Jet>,
}

fn sum(n: usize, mut f: impl FnMut(usize) -> Jet) -> Jet {
    let mut acc = f(0);
    for r in 1..n {
        acc = &acc + &f(r);
    }
    acc
}

/// Closed-form Lie derivative of a tensor field on `TM₀` along `X̂`:
/// `X̂(T)` plus `T_{..r..} ∂_j X^r` for lower slots minus
/// `T^{..r..} ∂_r X^i` for upper slots.
pub fn lie_tensor(lift: &LiftJets, t: &JetTensor) -> JetTensor {
    let n = t.n;
    let rank = t.rank();
    let tx = t.horizontal_partial();
    let ty = t.vertical();
    JetTensor::from_fn(n, &t.variance, |idx| {
        let mut ext = idx.to_vec();
        ext.push(0);
        let mut acc = sum(n, |r| {
            ext[rank] = r;
            &lift.x.at(&[r]).mul_jet(tx.at(&ext)) + &lift.y[r].mul_jet(ty.at(&ext))
        });
        for s in 0..rank {
            let mut src = idx.to_vec();
            for r in 0..n {
                src[s] = r;
                let term = match t.variance[s] {
                    Upper => t.at(&src).mul_jet(lift.dx.at(&[idx[s], r])).scale(-1.0),
                    Lower => t.at(&src).mul_jet(lift.dx.at(&[r, idx[s]])),
                };
                acc = &acc + &term;
            }
        }
        acc
    })
}

/// Closed-form `£_X̂ G^i = X^r ∂_r G^i + Y^r ∂̇_r G^i − G^r ∂_r X^i + ½ ∂_j ∂_k X^i y^j y^k`.
pub fn lie_spray_jet(geo: &Geometry, lift: &LiftJets) -> Result<JetTensor> {
    let n = geo.n();
    let g = geo.spray()?;
    let gx = g.horizontal_partial();
    let gy = g.vertical();
    let y = geo.y();
    Ok(JetTensor::from_fn(n, &[Upper], |i| {
        let i = i[0];
        let transport = sum(n, |r| {
            let a = &lift.x.at(&[r]).mul_jet(gx.at(&[i, r])) + &lift.y[r].mul_jet(gy.at(&[i, r]));
            &a - &g.at(&[r]).mul_jet(lift.dx.at(&[i, r]))
        });
        let second = sum(n, |j| sum(n, |k| lift.ddx.at(&[i, j, k]).mul_jet(&y[j].mul_jet(&y[k]))));
        &transport + &second.scale(0.5)
    }))
}

/// `Ψ = (1/(n+1)) ∂̇_i £_X̂ G^i`.
pub fn psi_jet(geo: &Geometry, lie_g: &JetTensor) -> Jet {
    let n = geo.n();
    sum(n, |i| lie_g.at(&[i]).derivative_y(i)).scale(1.0 / (n as f64 + 1.0))
}

/// `f = ∇_i X^i + I_i ∇_0 X^i` (Cartan h-derivative).
pub fn f_jet(geo: &Geometry, lift: &LiftJets) -> Result<Jet> {
    let n = geo.n();
    let dx = geo.covariant(&lift.x, Derivative::CartanH)?; // [i, j] = ∇_j X^i
    let div = sum(n, |i| dx.at(&[i, i]).clone());
    let d0 = geo.along_y(&dx); // [i]
    let i = geo.mean_cartan()?;
    Ok(&div + &sum(n, |h| i.at(&[h]).mul_jet(d0.at(&[h]))))
}

/// Step schedule of the flow-pullback derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSchedule {
    pub h: f64,
    /// RK4 steps per flow evaluation.
    pub substeps: usize,
}

impl Default for FlowSchedule {
    fn default() -> Self {
        FlowSchedule { h: 1e-3, substeps: 4 }
    }
}

fn flow_jets(field: &VectorFieldExpr, x: &[f64], t: f64, ox: usize, substeps: usize) -> Result<Vec<Jet>> {
    let n = field.n;
    let space = JetSpace::get(n, ox, 0);
    let mut phi: Vec<Jet> = x.iter().enumerate().map(|(k, &v)| Jet::var_x(&space, k, v)).collect();
    if t == 0.0 {
        return Ok(phi);
    }
    let h = t / substeps.max(1) as f64;
    let shift = |a: &[Jet], k: &[Jet], c: f64| -> Vec<Jet> { a.iter().zip(k).map(|(a, k)| a + &k.scale(c)).collect() };
    for _ in 0..substeps.max(1) {
        let k1 = field.eval_generic(&phi)?;
        let k2 = field.eval_generic(&shift(&phi, &k1, h / 2.0))?;
        let k3 = field.eval_generic(&shift(&phi, &k2, h / 2.0))?;
        let k4 = field.eval_generic(&shift(&phi, &k3, h))?;
        phi = (0..n)
            .map(|i| {
                let s = &(&k1[i] + &k2[i].scale(2.0)) + &(&k3[i].scale(2.0) + &k4[i]);
                &phi[i] + &s.scale(h / 6.0)
            })
            .collect();
    }
    Ok(phi)
}

/// Jet of `F_t(x, y) = F(Φ_t(x), DΦ_t(x) y)` at `sample`.
pub fn pullback_jet(
    metric: &MetricField,
    field: &VectorFieldExpr,
    sample: &TangentSample,
    t: f64,
    orders: (usize, usize),
    substeps: usize,
) -> Result<Jet> {
    let (ox, oy) = orders;
    let n = metric.n;
    let left = |_| Error::FlowLeftDomain { t };
    let phi = flow_jets(field, &sample.x, t, ox + 1, substeps).map_err(left)?;
    let xt: Vec<f64> = phi.iter().map(Jet::value).collect();
    if !xt.iter().all(|v| v.is_finite()) {
        return Err(Error::FlowLeftDomain { t });
    }
    metric.check_guard(&xt).map_err(left)?;
    let ext: Vec<Jet> = phi.iter().map(|p| p.extend_y(oy)).collect();
    let space = JetSpace::get(n, ox, oy);
    let eta: Vec<Jet> = sample.y.iter().enumerate().map(|(k, &v)| Jet::var_y(&space, k, v)).collect();
    let xs: Vec<Jet> = ext.iter().map(|p| p.truncate(ox, oy)).collect();
    let ys: Vec<Jet> = ext.iter().map(|p| sum(n, |k| p.derivative_x(k).mul_jet(&eta[k]))).collect();
    metric.f.eval_generic(&xs, &ys).map_err(left)
}

/// A flow-pullback Lie derivative with its extrapolation error estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieEstimate {
    pub value: TensorValue,
    pub error: f64,
}

/// Differentiates `eval(Geometry of F_t)` at `t = 0` with the fourth-order
/// central formula at steps `h` and `h/2`, Richardson-combined.
pub fn flow_lie_with(
    metric: &MetricField,
    field: &VectorFieldExpr,
    sample: &TangentSample,
    orders: (usize, usize),
    schedule: FlowSchedule,
    eval: impl Fn(&Geometry) -> Result<Vec<TensorValue>>,
) -> Result<Vec<LieEstimate>> {
    let h = schedule.h;
    let at = |t: f64| -> Result<Vec<TensorValue>> {
        let f = pullback_jet(metric, field, sample, t, orders, schedule.substeps)?;
        let geo = Geometry::from_jet(sample, f).map_err(|e| match e {
            Error::Domain(_) | Error::NotPositiveDefinite { .. } => Error::FlowLeftDomain { t },
            e => e,
        })?;
        eval(&geo)
    };
    let ts = [h / 2.0, h, 2.0 * h];
    let plus: Vec<Vec<TensorValue>> = ts.iter().map(|&t| at(t)).collect::<Result<_>>()?;
    let minus: Vec<Vec<TensorValue>> = ts.iter().map(|&t| at(-t)).collect::<Result<_>>()?;
    let count = plus[0].len();
    let mut out = Vec::with_capacity(count);
    for obj in 0..count {
        let proto = &plus[0][obj];
        let m = proto.components.len();
        let comp = |s: usize, sign: bool, c: usize| if sign { plus[s][obj].components[c] } else { minus[s][obj].components[c] };
        let mut value = Vec::with_capacity(m);
        let mut error: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for c in 0..m {
            let d_half = (8.0 * (comp(0, true, c) - comp(0, false, c)) - (comp(1, true, c) - comp(1, false, c))) / (6.0 * h);
            let d_full = (8.0 * (comp(1, true, c) - comp(1, false, c)) - (comp(2, true, c) - comp(2, false, c))) / (12.0 * h);
            let v = (16.0 * d_half - d_full) / 15.0;
            error = error.max((d_full - d_half).abs());
            scale = scale.max(v.abs());
            value.push(v);
        }
        if !(error <= 1e-3 * (1.0 + scale)) {
            return Err(Error::ExtrapolationDiverged { estimate: error });
        }
        out.push(LieEstimate {
            value: TensorValue { base: sample.clone(), variance: proto.variance.clone(), components: value },
            error,
        });
    }
    Ok(out)
}

/// Objects the flow route can differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Object {
    FSquared,
    Fundamental,
    Spray,
    Nonlinear,
    BerwaldCoeffs,
    BerwaldCurvature,
    MeanCartan,
    MeanLandsberg,
    MeanBerwald,
    HCurvature,
    BerwaldHh,
    BerwaldRicci,
    RicciTilde,
    RicciSecond,
}

impl Object {
    /// Jet orders of `F` this object needs.
    pub fn orders(self) -> (usize, usize) {
        match self {
            Object::FSquared | Object::Fundamental => (0, 2),
            Object::MeanCartan => (0, 3),
            Object::Spray => (1, 2),
            Object::Nonlinear => (1, 3),
            Object::BerwaldCoeffs | Object::MeanLandsberg => (1, 4),
            Object::BerwaldCurvature | Object::MeanBerwald => (1, 5),
            Object::BerwaldHh | Object::BerwaldRicci | Object::RicciTilde => (2, 5),
            Object::HCurvature | Object::RicciSecond => (2, 6),
        }
    }

    pub fn eval(self, geo: &Geometry) -> Result<TensorValue> {
        Ok(match self {
            Object::FSquared => geo.value(&JetTensor::scalar(geo.n(), geo.f2().clone())),
            Object::Fundamental => geo.value(geo.fundamental()),
            Object::Spray => geo.value(geo.spray()?),
            Object::Nonlinear => geo.value(geo.nonlinear()?),
            Object::BerwaldCoeffs => geo.value(geo.berwald_coeffs()?),
            Object::BerwaldCurvature => geo.value(geo.berwald_curvature()?),
            Object::MeanCartan => geo.value(geo.mean_cartan()?),
            Object::MeanLandsberg => geo.value(&geo.mean_landsberg()?),
            Object::MeanBerwald => geo.value(geo.mean_berwald()?),
            Object::HCurvature => geo.value(&geo.h_curvature()?),
            Object::BerwaldHh => geo.value(geo.berwald_hh()?),
            Object::BerwaldRicci => geo.value(&geo.berwald_ricci()?),
            Object::RicciTilde => geo.value(&geo.ricci_tilde()?),
            Object::RicciSecond => geo.value(&geo.ricci_second()?),
        })
    }
}

/// Flow-pullback `£_X̂ T` of several objects at one sample.
pub fn flow_lie_objects(
    metric: &MetricField,
    field: &VectorFieldExpr,
    sample: &TangentSample,
    objects: &[Object],
    schedule: FlowSchedule,
) -> Result<Vec<LieEstimate>> {
    let orders = objects.iter().fold((0, 2), |a, o| {
        let b = o.orders();
        (a.0.max(b.0), a.1.max(b.1))
    });
    flow_lie_with(metric, field, sample, orders, schedule, |geo| objects.iter().map(|o| o.eval(geo)).collect())
}

pub fn flow_lie(
    metric: &MetricField,
    field: &VectorFieldExpr,
    sample: &TangentSample,
    object: Object,
    schedule: FlowSchedule,
) -> Result<LieEstimate> {
    Ok(flow_lie_objects(metric, field, sample, &[object], schedule)?.remove(0))
}

/// `£_X̂ G^i`, its Euler-extracted `Ψ`, and the projectivity residual
/// `max|£G^i − Ψ y^i| / (1 + max|£G^i|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieSpray {
    pub lie_g: Vec<f64>,
    pub psi: f64,
    pub residual: f64,
}

fn spray_residual(lie_g: &[f64], psi: f64, y: &[f64]) -> f64 {
    let scale = lie_g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let dev = lie_g.iter().zip(y).map(|(g, y)| (g - psi * y).abs()).fold(0.0, f64::max);
    dev / (1.0 + scale)
}

/// Closed-form route.
pub fn lie_spray(metric: &MetricField, field: &VectorFieldExpr, sample: &TangentSample) -> Result<LieSpray> {
    let geo = Geometry::new(metric, sample, 2, 4)?;
    let lift = complete_lift(field).jets(&geo)?;
    let lg = lie_spray_jet(&geo, &lift)?;
    let psi = psi_jet(&geo, &lg).value();
    let lie_g: Vec<f64> = geo.value(&lg).components;
    let residual = spray_residual(&lie_g, psi, &sample.y);
    Ok(LieSpray { lie_g, psi, residual })
}

/// Flow route: `£G^i` by pullback, `Ψ` from the pulled-back `G^i_k` trace.
pub fn lie_spray_flow(
    metric: &MetricField,
    field: &VectorFieldExpr,
    sample: &TangentSample,
    schedule: FlowSchedule,
) -> Result<LieSpray> {
    let v = flow_lie_objects(metric, field, sample, &[Object::Spray, Object::Nonlinear], schedule)?;
    let n = metric.n;
    let lie_g = v[0].value.components.clone();
    let psi = (0..n).map(|i| v[1].value.get(&[i, i])).sum::<f64>() / (n as f64 + 1.0);
    let residual = spray_residual(&lie_g, psi, &sample.y);
    Ok(LieSpray { lie_g, psi, residual })
}

/// Classification tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub projective: f64,
    /// Affine iff `|Ψ| ≤ affine · F`.
    pub affine: f64,
    pub killing: f64,
    pub invariant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { projective: 1e-6, affine: 1e-6, killing: 1e-8, invariant: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Verdict {
    fn new(residual: f64, tolerance: f64) -> Self {
        Verdict { pass: residual <= tolerance, residual, tolerance }
    }

    fn gated(self, gate: bool) -> Self {
        Verdict { pass: self.pass && gate, ..self }
    }
}

/// Per-sample quantities gathered by the classifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleClass {
    pub projective: f64,
    pub psi: f64,
    pub psi_over_f: f64,
    pub f: f64,
    pub killing: f64,
    pub i_invariant: f64,
    pub e_invariant: f64,
    pub c_projective: f64,
    pub h_invariant: f64,
    pub lemma_b: f64,
    pub euler: f64,
    pub cartan_norm: f64,
    pub landsberg_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub field: String,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub projective: Verdict,
    pub affine: Verdict,
    pub killing: Verdict,
    pub i_invariant: Verdict,
    pub e_invariant: Verdict,
    pub c_projective: Verdict,
    pub h_invariant: Verdict,
    /// Lemma B consistency `∇_0 t_ij − (2Ψ g_ij + Ψ_i y_j + Ψ_j y_i)`, for
    /// projective fields.
    pub lemma_b: Option<f64>,
    /// `max |y^k Ψ_k − Ψ|`.
    pub euler: f64,
    pub max_cartan: f64,
    pub max_landsberg: f64,
    pub psi_samples: Vec<f64>,
    pub f_samples: Vec<f64>,
}

fn max_abs(t: &JetTensor) -> f64 {
    t.comps.iter().map(|c| c.value().abs()).fold(0.0, f64::max)
}

fn classify_sample(
    metric: &MetricField,
    field: &VectorFieldExpr,
    s: &TangentSample,
    schedule: FlowSchedule,
) -> Result<SampleClass> {
    let n = metric.n;
    let geo = Geometry::new(metric, s, 3, 7)?;
    let lift = complete_lift(field).jets(&geo)?;
    let lg = lie_spray_jet(&geo, &lift)?;
    let psi = psi_jet(&geo, &lg);
    let lgv = geo.value(&lg).components;
    let projective = spray_residual(&lgv, psi.value(), &s.y);
    let f_scalar = geo.f().value();

    let killing = flow_lie(metric, field, s, Object::Fundamental, schedule)?.value.max_abs();

    let f = f_jet(&geo, &lift)?;
    let fk = JetTensor::scalar(n, f.clone()).vertical();
    let pk = JetTensor::scalar(n, psi.clone()).vertical(); // Ψ_k
    let pkj = pk.vertical(); // Ψ_k.j
    let dpk = geo.covariant(&pk, Derivative::CartanH)?; // [j, k] = ∇_k Ψ_j
    let c_proj = dpk.sub(&dpk.permute(&[1, 0]));
    let dpkj = geo.covariant(&pkj, Derivative::CartanH)?; // [j, k, l] = ∇_l Ψ_jk
    let h_inv = dpkj.sub(&dpkj.permute(&[0, 2, 1]));

    let t = lie_tensor(&lift, geo.fundamental());
    let t0 = geo.cartan_along_y(&t)?;
    let yl = geo.lower(&geo.tensor(&[Upper], geo.y().to_vec()), 0);
    let g = geo.fundamental();
    let lemma_b = JetTensor::from_fn(n, &[Lower, Lower], |ij| {
        let (i, j) = (ij[0], ij[1]);
        let rhs = &(&g.at(&[i, j]).mul_jet(&psi).scale(2.0) + &pk.at(&[i]).mul_jet(yl.at(&[j])))
            + &pk.at(&[j]).mul_jet(yl.at(&[i]));
        t0.at(&[i, j]) - &rhs
    });
    let euler = (sum(n, |k| geo.y()[k].mul_jet(pk.at(&[k]))).value() - psi.value()).abs();
    Ok(SampleClass {
        projective,
        psi: psi.value(),
        psi_over_f: psi.value() / f_scalar,
        f: f.value(),
        killing,
        i_invariant: max_abs(&fk),
        e_invariant: max_abs(&pkj),
        c_projective: max_abs(&c_proj),
        h_invariant: max_abs(&h_inv),
        lemma_b: max_abs(&lemma_b),
        euler,
        cartan_norm: max_abs(geo.cartan()?),
        landsberg_norm: max_abs(geo.landsberg()?),
    })
}

/// Runs every classification test over `samples` (at least 20).
pub fn classify(
    metric: &MetricField,
    field: &VectorFieldExpr,
    label: &str,
    samples: &[TangentSample],
    tol: Tolerances,
) -> Result<ClassificationReport> {
    const MIN_SAMPLES: usize = 20;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { got: samples.len(), need: MIN_SAMPLES });
    }
    let schedule = FlowSchedule::default();
    let per: Vec<SampleClass> =
        samples.par_iter().map(|s| classify_sample(metric, field, s, schedule)).collect::<Result<_>>()?;
    let worst = |f: fn(&SampleClass) -> f64| per.iter().map(f).fold(0.0, f64::max);
    let projective = Verdict::new(worst(|c| c.projective), tol.projective);
    let p = projective.pass;
    let affine = Verdict::new(worst(|c| c.psi_over_f.abs()), tol.affine).gated(p);
    let killing = Verdict::new(worst(|c| c.killing), tol.killing);
    let i_invariant = Verdict::new(worst(|c| c.i_invariant), tol.invariant).gated(p);
    let e_invariant = Verdict::new(worst(|c| c.e_invariant), tol.invariant).gated(p);
    if i_invariant.pass && !e_invariant.pass {
        return Err(Error::Engine(format!(
            "I-invariance passed (residual {:e}) but E-invariance failed (residual {:e})",
            i_invariant.residual, e_invariant.residual
        )));
    }
    Ok(ClassificationReport {
        metric: metric.label.clone(),
        field: label.to_string(),
        samples: samples.len(),
        tolerances: tol,
        projective,
        affine,
        killing,
        i_invariant,
        e_invariant,
        c_projective: Verdict::new(worst(|c| c.c_projective), tol.invariant).gated(p),
        h_invariant: Verdict::new(worst(|c| c.h_invariant), tol.invariant).gated(p),
        lemma_b: p.then(|| worst(|c| c.lemma_b)),
        euler: worst(|c| c.euler),
        max_cartan: worst(|c| c.cartan_norm),
        max_landsberg: worst(|c| c.landsberg_norm),
        psi_samples: per.iter().map(|c| c.psi).collect(),
        f_samples: per.iter().map(|c| c.f).collect(),
    })
}

/// Worst residual of one identity over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemResidual {
    pub item: String,
    /// `max |lhs − rhs| / max(1, max |rhs|)` over samples.
    pub residual: f64,
    /// Largest flow-extrapolation error estimate on the left side.
    pub flow_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub samples: usize,
    pub items: Vec<ItemResidual>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.items.iter().map(|i| i.residual).fold(0.0, f64::max)
    }

    pub fn item(&self, name: &str) -> Option<&ItemResidual> {
        self.items.iter().find(|i| i.item == name)
    }

    fn merge(names: &[&str], per: Vec<Vec<(f64, f64)>>) -> Self {
        let items = names
            .iter()
            .enumerate()
            .map(|(k, name)| ItemResidual {
                item: name.to_string(),
                residual: per.iter().map(|p| p[k].0).fold(0.0, f64::max),
                flow_error: per.iter().map(|p| p[k].1).fold(0.0, f64::max),
            })
            .collect();
        ResidualReport { samples: per.len(), items }
    }
}

fn residual(lhs: &TensorValue, rhs: &TensorValue) -> f64 {
    lhs.max_diff(rhs) / rhs.max_abs().max(1.0)
}

fn require_projective(metric: &MetricField, field: &VectorFieldExpr, samples: &[TangentSample]) -> Result<()> {
    for s in samples {
        let r = lie_spray(metric, field, s)?.residual;
        if r > Tolerances::default().projective {
            return Err(Error::NotProjective { residual: r });
        }
    }
    Ok(())
}

fn require_i_invariant(metric: &MetricField, field: &VectorFieldExpr, samples: &[TangentSample]) -> Result<()> {
    require_projective(metric, field, samples)?;
    for s in samples {
        let geo = Geometry::new(metric, s, 2, 4)?;
        let lift = complete_lift(field).jets(&geo)?;
        let fk = JetTensor::scalar(geo.n(), f_jet(&geo, &lift)?).vertical();
        let r = max_abs(&fk);
        if r > Tolerances::default().invariant {
            return Err(Error::NotIInvariant { residual: r });
        }
    }
    Ok(())
}

pub const LEMMA31_ITEMS: [&str; 10] = [
    "1: £G^i_k",
    "2: £G^i_jk",
    "3: £G^i_jkl",
    "4: £E_jl",
    "5: £I_k",
    "6: £J_k",
    "7: (n+1)Ψ_k",
    "7': Ψ = ∇_0 f/(n+1)",
    "8: £K^i_jkl",
    "9: £K_jl",
];

fn lemma31_sample(
    metric: &MetricField,
    field: &VectorFieldExpr,
    s: &TangentSample,
    schedule: FlowSchedule,
) -> Result<Vec<(f64, f64)>> {
    let n = metric.n;
    let nf = n as f64;
    let objects = [
        Object::Nonlinear,
        Object::BerwaldCoeffs,
        Object::BerwaldCurvature,
        Object::MeanBerwald,
        Object::MeanCartan,
        Object::MeanLandsberg,
        Object::BerwaldHh,
        Object::BerwaldRicci,
    ];
    let lhs = flow_lie_objects(metric, field, s, &objects, schedule)?;

    let geo = Geometry::new(metric, s, 3, 7)?;
    let lift = complete_lift(field).jets(&geo)?;
    let psi = psi_jet(&geo, &lie_spray_jet(&geo, &lift)?);
    let y = geo.y();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let p1 = JetTensor::scalar(n, psi.clone()).vertical(); // Ψ_k
    let p2 = p1.vertical(); // Ψ_k.j  [k, j]
    let p3 = p2.vertical(); // Ψ_k.j.l [k, j, l]
    let v = |t: &JetTensor| geo.value(t);

    let r1 = JetTensor::from_fn(n, &[Upper, Lower], |ik| {
        let (i, k) = (ik[0], ik[1]);
        &p1.at(&[k]).mul_jet(&y[i]) + &psi.scale(delta(i, k))
    });
    let r2 = JetTensor::from_fn(n, &[Upper, Lower, Lower], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        &(&p1.at(&[k]).scale(delta(i, j)) + &p1.at(&[j]).scale(delta(i, k))) + &y[i].mul_jet(p2.at(&[k, j]))
    });
    let r3 = JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let a = &p2.at(&[k, l]).scale(delta(i, j)) + &p2.at(&[j, l]).scale(delta(i, k));
        &(&a + &p2.at(&[k, j]).scale(delta(i, l))) + &y[i].mul_jet(p3.at(&[k, j, l]))
    });
    let r4 = p2.scale(0.5 * (nf + 1.0));
    let f = f_jet(&geo, &lift)?;
    let fk = JetTensor::scalar(n, f.clone()).vertical(); // f_.k
    let i_low = geo.mean_cartan()?;
    let r6 = geo.cartan_along_y(&fk)?.add(&i_low.map(|c| c.mul_jet(&psi)));
    let df = geo.delta(&JetTensor::scalar(n, f.clone()))?; // ∇_k f
    let r7 = df.add(&geo.cartan_along_y(&fk)?);
    let l7 = {
        let b = &lhs[1].value;
        let comps = (0..n).map(|k| (0..n).map(|i| b.get(&[i, i, k])).sum()).collect();
        TensorValue { base: s.clone(), variance: vec![Lower], components: comps }
    };
    let psi_from_f = geo.along_y(&df).comps[0].scale(1.0 / (nf + 1.0)).value();
    let dp = geo.covariant(&p1, Derivative::BerwaldH)?; // [l, k] = D_k Ψ_l
    let dpv = dp.vertical(); // [l, k, j] = (D_k Ψ_l).j
    let r8 = JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let anti = dp.at(&[l, k]) - dp.at(&[k, l]);
        let anti_v = dpv.at(&[l, k, j]) - dpv.at(&[k, l, j]);
        let a = &anti.scale(delta(i, j)) + &dp.at(&[j, k]).scale(delta(i, l));
        &(&a - &dp.at(&[j, l]).scale(delta(i, k))) + &y[i].mul_jet(&anti_v)
    });
    let dpj = geo.covariant(&p2, Derivative::BerwaldH)?; // [l, j, i] = D_i Ψ_l.j
    let r9 = JetTensor::from_fn(n, &[Lower, Lower], |jl| {
        let (j, l) = (jl[0], jl[1]);
        let a = dp.at(&[l, j]) - &dp.at(&[j, l]).scale(nf);
        &a + &sum(n, |i| y[i].mul_jet(dpj.at(&[l, j, i])))
    });

    let e = |k: usize| lhs[k].error;
    Ok(vec![
        (residual(&lhs[0].value, &v(&r1)), e(0)),
        (residual(&lhs[1].value, &v(&r2)), e(1)),
        (residual(&lhs[2].value, &v(&r3)), e(2)),
        (residual(&lhs[3].value, &v(&r4)), e(3)),
        (residual(&lhs[4].value, &v(&fk)), e(4)),
        (residual(&lhs[5].value, &v(&r6)), e(5)),
        (residual(&l7, &v(&r7.scale(1.0))), e(1)),
        ((psi_from_f - psi.value()).abs() / psi.value().abs().max(1.0), 0.0),
        (residual(&lhs[6].value, &v(&r8)), e(6)),
        (residual(&lhs[7].value, &v(&r9)), e(7)),
    ])
}

/// Two-path check of the Lie derivative formulas for a projective field:
/// left sides by flow pullback, right sides from `Ψ` and `f` jets.
pub fn verify_lemma31(metric: &MetricField, field: &VectorFieldExpr, samples: &[TangentSample]) -> Result<ResidualReport> {
    require_projective(metric, field, samples)?;
    let schedule = FlowSchedule::default();
    let per: Vec<Vec<(f64, f64)>> =
        samples.par_iter().map(|s| lemma31_sample(metric, field, s, schedule)).collect::<Result<_>>()?;
    Ok(ResidualReport::merge(&LEMMA31_ITEMS, per))
}

/// `£E`, `£H`, `£B` by flow pullback for an I-invariant projective field.
pub fn verify_prop_i_invariant(
    metric: &MetricField,
    field: &VectorFieldExpr,
    samples: &[TangentSample],
) -> Result<ResidualReport> {
    require_i_invariant(metric, field, samples)?;
    let schedule = FlowSchedule::default();
    let objects = [Object::MeanBerwald, Object::HCurvature, Object::BerwaldCurvature];
    let per: Vec<Vec<(f64, f64)>> = samples
        .par_iter()
        .map(|s| {
            let v = flow_lie_objects(metric, field, s, &objects, schedule)?;
            Ok(v.iter().map(|l| (l.value.max_abs(), l.error)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(ResidualReport::merge(&["£E", "£H", "£B"], per))
}

/// `£Ric_ij − £R̃_ij` by flow pullback for an I-invariant projective field.
pub fn lie_ricci_compare(metric: &MetricField, field: &VectorFieldExpr, samples: &[TangentSample]) -> Result<ResidualReport> {
    require_i_invariant(metric, field, samples)?;
    let schedule = FlowSchedule::default();
    let per: Vec<Vec<(f64, f64)>> = samples
        .par_iter()
        .map(|s| {
            let v = flow_lie_objects(metric, field, s, &[Object::RicciSecond, Object::RicciTilde], schedule)?;
            Ok(vec![
                (v[0].value.max_diff(&v[1].value), v[0].error.max(v[1].error)),
                (v[0].value.max_abs(), v[0].error),
                (v[1].value.max_abs(), v[1].error),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(ResidualReport::merge(&["£Ric − £R̃", "|£Ric|", "|£R̃|"], per))
}

/// The codifferential of `X^♭ = g_jk X^k dx^j` by both formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Codifferential {
    /// `−(g^ij ∇_i X_j − X_j ∇_0 C^j)`.
    pub cartan: f64,
    /// `−g^ij D_i X_j`.
    pub berwald: f64,
    pub disagreement: f64,
}

pub fn codifferential_h(metric: &MetricField, field: &VectorFieldExpr, sample: &TangentSample) -> Result<Codifferential> {
    let geo = Geometry::new(metric, sample, 1, 4)?;
    let n = geo.n();
    let x_up = geo.vector_field(field)?;
    let x_low = geo.lower(&x_up, 0);
    let gi = geo.inverse();
    let contract = |d: &JetTensor| sum(n, |i| sum(n, |j| gi.at(&[i, j]).mul_jet(d.at(&[j, i])))).value();
    let dc = geo.covariant(&x_low, Derivative::CartanH)?; // [j, i] = ∇_i X_j
    let db = geo.covariant(&x_low, Derivative::BerwaldH)?;
    let c0 = geo.cartan_along_y(&geo.cartan_trace()?)?; // ∇_0 C^j
    let xc = sum(n, |j| x_low.at(&[j]).mul_jet(c0.at(&[j]))).value();
    let cartan = -(contract(&dc) - xc);
    let berwald = -contract(&db);
    Ok(Codifferential { cartan, berwald, disagreement: (cartan - berwald).abs() })
}
