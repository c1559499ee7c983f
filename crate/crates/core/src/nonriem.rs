//! Distortion, S-curvature, E, H, Landsberg tensors and the indicatrix volume.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::MetricField;
use crate::geometry::Geometry;
use crate::jets::Jet;
use crate::tensor::{JetTensor, Lower, TensorValue};

/// Angular quadrature used for the indicatrix volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    /// `n = 1`: the two endpoints of the unit "sphere".
    Endpoints,
    /// `n = 2`: Gauss-Legendre in the polar angle.
    Polar,
    /// `n = 3`: Gauss-Legendre in `cos θ` times Gauss-Legendre in `φ`.
    Spherical,
    /// `n = 4`: product Gauss-Legendre over hyperspherical angles.
    Hyperspherical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatrixQuadrature {
    pub x: Vec<f64>,
    pub method: QuadratureMethod,
    pub node_count: usize,
    pub volume: f64,
    pub error_estimate: f64,
}

static NODES: Lazy<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    let mut cache = NODES.lock().unwrap_or_else(|p| p.into_inner());
    cache
        .entry(m)
        .or_insert_with(|| {
            let mut xs = vec![0.0; m];
            let mut ws = vec![0.0; m];
            for i in 0..m.div_ceil(2) {
                let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, z);
                    for k in 2..=m {
                        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    if m == 1 {
                        p0 = 1.0;
                        p1 = z;
                    }
                    dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
                    let dz = p1 / dp;
                    z -= dz;
                    if dz.abs() < 1e-16 {
                        break;
                    }
                }
                xs[i] = -z;
                xs[m - 1 - i] = z;
                let w = 2.0 / ((1.0 - z * z) * dp * dp);
                ws[i] = w;
                ws[m - 1 - i] = w;
            }
            Arc::new((xs, ws))
        })
        .clone()
}

/// `∫_a^b f` by `m`-point Gauss-Legendre.
fn gl_nodes(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let q = gauss_legendre(m);
    let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
    q.0.iter().zip(&q.1).map(|(&t, &w)| (mid + half * t, half * w)).collect()
}

/// Euclidean volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => {
            let half = n as f64 / 2.0;
            PI.powf(half) / gamma_half_integer(half + 1.0)
        }
    }
}

fn gamma_half_integer(a: f64) -> f64 {
    if a == 1.0 {
        1.0
    } else if a == 0.5 {
        PI.sqrt()
    } else {
        (a - 1.0) * gamma_half_integer(a - 1.0)
    }
}

/// `(1/n) Σ w F(x, θ)^{-n}` over unit directions `θ` with solid-angle weights.
fn volume_with(metric: &MetricField, x: &[f64], scale: usize) -> Result<(f64, usize)> {
    let n = metric.n;
    let inv = |dir: &[f64]| -> Result<f64> {
        let f = metric.f.eval(x, dir)?;
        if !(f > 0.0) {
            return Err(Error::domain(format!("F = {f} on the unit sphere")));
        }
        Ok(f.powi(-(n as i32)))
    };
    let mut acc = 0.0;
    let mut count = 0;
    match n {
        1 => {
            acc = inv(&[1.0])? + inv(&[-1.0])?;
            count = 2;
        }
        2 => {
            for (t, w) in gl_nodes(256 / scale, 0.0, 2.0 * PI) {
                acc += w * inv(&[t.cos(), t.sin()])?;
                count += 1;
            }
        }
        3 => {
            let phis = gl_nodes(128 / scale, 0.0, 2.0 * PI);
            for (u, wu) in gl_nodes(64 / scale, -1.0, 1.0) {
                let s = (1.0 - u * u).sqrt();
                for &(p, wp) in &phis {
                    acc += wu * wp * inv(&[s * p.cos(), s * p.sin(), u])?;
                    count += 1;
                }
            }
        }
        4 => {
            let phis = gl_nodes(64 / scale, 0.0, 2.0 * PI);
            let us = gl_nodes(32 / scale, -1.0, 1.0);
            for (a, wa) in gl_nodes(32 / scale, 0.0, PI) {
                let (sa, ca) = (a.sin(), a.cos());
                for &(u, wu) in &us {
                    let s = (1.0 - u * u).sqrt();
                    for &(p, wp) in &phis {
                        let dir = [ca, sa * u, sa * s * p.cos(), sa * s * p.sin()];
                        acc += wa * sa * sa * wu * wp * inv(&dir)?;
                        count += 1;
                    }
                }
            }
        }
        _ => return Err(Error::InvalidParameter(format!("dimension {n} unsupported"))),
    }
    Ok((acc / n as f64, count))
}

/// Euclidean volume of the indicatrix `{y : F(x, y) < 1}`, using `r(θ) = 1/F(x, θ)`.
pub fn indicatrix_volume(metric: &MetricField, x: &[f64]) -> Result<IndicatrixQuadrature> {
    metric.check_guard(x)?;
    let n = metric.n;
    let (v, count) = volume_with(metric, x, 1)?;
    let (coarse, _) = volume_with(metric, x, 2)?;
    let err = (v - coarse).abs();
    let tol = match n {
        1 | 2 => 1e-8,
        3 => 1e-6,
        _ => 1e-4,
    };
    if !(err <= tol * v) {
        return Err(Error::QuadratureNotConverged { estimate: err });
    }
    let method = match n {
        1 => QuadratureMethod::Endpoints,
        2 => QuadratureMethod::Polar,
        3 => QuadratureMethod::Spherical,
        _ => QuadratureMethod::Hyperspherical,
    };
    Ok(IndicatrixQuadrature { x: x.to_vec(), method, node_count: count, volume: v, error_estimate: err })
}

/// `∂ ln V / ∂x^i` by five-point central differences with one Richardson step.
pub fn log_volume_gradient(metric: &MetricField, x: &[f64]) -> Result<Vec<f64>> {
    let margin = metric.guard_value(x)?;
    let h = 1e-3 * margin.min(1.0);
    let lnv = |p: &[f64]| -> Result<f64> { Ok(volume_with(metric, p, 1)?.0.ln()) };
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let d = |h: f64| -> Result<f64> {
            let at = |s: f64| {
                let mut p = x.to_vec();
                p[i] += s * h;
                lnv(&p)
            };
            Ok((8.0 * (at(1.0)? - at(-1.0)?) - (at(2.0)? - at(-2.0)?)) / (12.0 * h))
        };
        let (d1, d2) = (d(h)?, d(h / 2.0)?);
        grad.push((16.0 * d2 - d1) / 15.0);
    }
    Ok(grad)
}

/// `τ = ln(√det g · V(x) / Vol(Bⁿ))`.
pub fn distortion(metric: &MetricField, geo: &Geometry) -> Result<f64> {
    let v = indicatrix_volume(metric, &geo.sample().x)?.volume;
    Ok(geo.half_log_det().value() + (v / unit_ball_volume(geo.n())).ln())
}

/// S-curvature split into its jet part `y^k δ_k(½ ln det g)` and the
/// volume part `y^k ∂_k ln V`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SCurvature {
    pub value: f64,
    pub jet_part: f64,
    pub volume_part: f64,
}

fn s_jet(geo: &Geometry) -> Result<Jet> {
    let t = JetTensor::scalar(geo.n(), geo.half_log_det().clone());
    Ok(geo.along_y(&geo.delta(&t)?).comps[0].clone())
}

/// `S = y^i ∂_{x^i} τ − 2 G^i ∂̇_i τ`.
pub fn s_curvature(metric: &MetricField, geo: &Geometry) -> Result<SCurvature> {
    let jet_part = s_jet(geo)?.value();
    let grad = log_volume_gradient(metric, &geo.sample().x)?;
    let volume_part: f64 = grad.iter().zip(&geo.sample().y).map(|(g, y)| g * y).sum();
    Ok(SCurvature { value: jet_part + volume_part, jet_part, volume_part })
}

/// `E_ij` by both routes: half the `y`-Hessian of `S`, and `½ G^m_imj`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanBerwaldPaths {
    pub from_s: TensorValue,
    pub from_spray: TensorValue,
    pub disagreement: f64,
}

pub fn mean_berwald(metric: &MetricField, geo: &Geometry) -> Result<MeanBerwaldPaths> {
    let n = geo.n();
    let grad = log_volume_gradient(metric, &geo.sample().x)?;
    let mut s = s_jet(geo)?;
    for (k, g) in grad.iter().enumerate() {
        s = &s + &geo.y()[k].scale(*g);
    }
    let hess = JetTensor::scalar(n, s).vertical().vertical().scale(0.5);
    let a = geo.value(&JetTensor { n, variance: vec![Lower, Lower], comps: hess.comps });
    let b = geo.value(geo.mean_berwald()?);
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    let disagreement = a.max_diff(&b) / scale;
    Ok(MeanBerwaldPaths { from_s: a, from_spray: b, disagreement })
}

/// Isotropic mean Landsberg fit `J + λ̂ I ≈ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImlFit {
    pub lambda: f64,
    pub residual: f64,
}

pub fn iml_fit(geo: &Geometry) -> Result<ImlFit> {
    let n = geo.n();
    let gi = geo.value(geo.inverse());
    let i = geo.value(geo.mean_cartan()?);
    let j = geo.value(&geo.mean_landsberg()?);
    let dot = |a: &TensorValue, b: &TensorValue| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += gi.get(&[p, q]) * a.get(&[p]) * b.get(&[q]);
            }
        }
        s
    };
    let ii = dot(&i, &i);
    if !(ii.sqrt() > 1e-8) {
        return Err(Error::MeanCartanVanishes { norm: ii.max(0.0).sqrt() });
    }
    let lambda = -dot(&j, &i) / ii;
    let jj = dot(&j, &j);
    let mut r = j.clone();
    for (c, ic) in r.components.iter_mut().zip(&i.components) {
        *c += lambda * ic;
    }
    let residual = if jj > 0.0 { (dot(&r, &r).max(0.0) / jj).sqrt() } else { 0.0 };
    Ok(ImlFit { lambda, residual })
}

/// Every non-Riemannian quantity at one sample.
#[derive(Debug, Clone, Serialize)]
pub struct NonRiemBundle {
    pub tau: f64,
    pub s: f64,
    pub e: TensorValue,
    pub h: TensorValue,
    pub landsberg: TensorValue,
    pub mean_landsberg: TensorValue,
    pub iml: Option<ImlFit>,
}

pub fn nonriem_bundle(metric: &MetricField, geo: &Geometry) -> Result<NonRiemBundle> {
    let iml = match iml_fit(geo) {
        Ok(f) => Some(f),
        Err(Error::MeanCartanVanishes { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(NonRiemBundle {
        tau: distortion(metric, geo)?,
        s: s_curvature(metric, geo)?.value,
        e: geo.value(geo.mean_berwald()?),
        h: geo.value(&geo.h_curvature()?),
        landsberg: geo.value(geo.landsberg()?),
        mean_landsberg: geo.value(&geo.mean_landsberg()?),
        iml,
    })
}
