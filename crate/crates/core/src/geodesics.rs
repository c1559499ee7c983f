//! Fixed-step RK4 geodesics and flows, with curve-wise probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{MetricField, VectorFieldExpr};
use crate::geometry::{orders, Geometry};
use crate::nonriem;
use crate::tensor::TangentSample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryPoint>,
    pub step: f64,
    pub order: u32,
    /// `F(x(t), y(t))` for geodesics; empty for flows without a metric.
    pub f: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.samples.last().expect("trajectories hold at least the initial point")
    }

    /// Largest `|F(t) − F(0)| / F(0)`.
    pub fn f_drift(&self) -> f64 {
        match self.f.first() {
            Some(&f0) => self.f.iter().map(|f| (f - f0).abs() / f0).fold(0.0, f64::max),
            None => 0.0,
        }
    }

    /// Every `stride`-th point, always keeping the last one.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let mut keep: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if keep.last() != Some(&(self.len() - 1)) {
            keep.push(self.len() - 1);
        }
        Trajectory {
            samples: keep.iter().map(|&i| self.samples[i].clone()).collect(),
            step: self.step * stride as f64,
            order: self.order,
            f: if self.f.is_empty() { vec![] } else { keep.iter().map(|&i| self.f[i]).collect() },
        }
    }

    /// CSV with columns `t, x1.., y1.., F` and an optional probe column.
    pub fn to_csv(&self, probe: Option<(&str, &[f64])>) -> Result<String> {
        let n = self.samples.first().map_or(0, |p| p.x.len());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = vec!["t".into()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("y{i}")));
        header.push("F".into());
        if let Some((name, values)) = probe {
            if values.len() != self.len() {
                return Err(Error::DimensionMismatch { expected: self.len(), got: values.len() });
            }
            header.push(name.into());
        }
        let io = |e: csv::Error| Error::Engine(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for (k, p) in self.samples.iter().enumerate() {
            let mut row = vec![p.t];
            row.extend(&p.x);
            row.extend(&p.y);
            row.push(self.f.get(k).copied().unwrap_or(f64::NAN));
            if let Some((_, values)) = probe {
                row.push(values[k]);
            }
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Engine(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Engine(e.to_string()))
    }
}

fn rk4_step(state: &[f64], h: f64, rhs: &impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let shifted = |k: &[f64], c: f64| state.iter().zip(k).map(|(s, k)| s + c * k).collect::<Vec<_>>();
    let k1 = rhs(state)?;
    let k2 = rhs(&shifted(&k1, h / 2.0))?;
    let k3 = rhs(&shifted(&k2, h / 2.0))?;
    let k4 = rhs(&shifted(&k3, h))?;
    Ok((0..state.len()).map(|i| state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Integrates `rhs` with `steps` RK4 steps; `inside` decides domain
/// membership. A failed step is bisected to the last admissible time.
fn integrate(
    state0: Vec<f64>,
    t_end: f64,
    steps: usize,
    rhs: impl Fn(&[f64]) -> Result<Vec<f64>>,
    inside: impl Fn(&[f64]) -> bool,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if steps == 0 || !t_end.is_finite() {
        return Err(Error::StepUnderflow { t: 0.0 });
    }
    let h = t_end / steps as f64;
    if h.abs() < 1e-12 * t_end.abs().max(1.0) || h == 0.0 {
        return Err(Error::StepUnderflow { t: 0.0 });
    }
    if !inside(&state0) {
        return Err(Error::LeftDomain { t: 0.0 });
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, state0));
    for k in 0..steps {
        let t = k as f64 * h;
        let cur = &out[k].1;
        let ok = |s: &Result<Vec<f64>>| matches!(s, Ok(v) if v.iter().all(|c| c.is_finite()) && inside(v));
        let next = rk4_step(cur, h, &rhs);
        if !ok(&next) {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if ok(&rk4_step(cur, mid * h, &rhs)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Err(Error::LeftDomain { t: t + lo * h });
        }
        out.push(((k + 1) as f64 * h, next?));
    }
    Ok(out)
}

/// Spray coefficients `G^i(x, y)`.
pub fn spray_at(metric: &MetricField, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let s = TangentSample::new(x.to_vec(), y.to_vec());
    let (ox, oy) = orders::SPRAY;
    let geo = Geometry::new(metric, &s, ox, oy)?;
    Ok(geo.value(geo.spray()?).components)
}

fn in_guard(metric: &MetricField, x: &[f64]) -> bool {
    matches!(metric.guard_value(x), Ok(v) if v > 0.0)
}

/// Solves `ẍ^i + 2G^i(x, ẋ) = 0` from `(x0, y0)` over `[0, T]`.
pub fn integrate_geodesic(metric: &MetricField, x0: &[f64], y0: &[f64], t_end: f64, steps: usize) -> Result<Trajectory> {
    let n = metric.n;
    if x0.len() != n || y0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len().min(y0.len()) });
    }
    let rhs = |s: &[f64]| -> Result<Vec<f64>> {
        let (x, y) = s.split_at(n);
        let g = spray_at(metric, x, y)?;
        let mut d = y.to_vec();
        d.extend(g.iter().map(|g| -2.0 * g));
        Ok(d)
    };
    let mut state0 = x0.to_vec();
    state0.extend_from_slice(y0);
    let path = integrate(state0, t_end, steps, rhs, |s| in_guard(metric, &s[..n]))?;
    let mut samples = Vec::with_capacity(path.len());
    let mut f = Vec::with_capacity(path.len());
    for (t, s) in path {
        let (x, y) = s.split_at(n);
        f.push(metric.eval(x, y)?);
        samples.push(TrajectoryPoint { t, x: x.to_vec(), y: y.to_vec() });
    }
    Ok(Trajectory { samples, step: t_end / steps as f64, order: 4, f })
}

/// Integral curve of `X` from `x0`; `domain` optionally restricts the
/// curve to a metric's guard.
pub fn integrate_flow(
    field: &VectorFieldExpr,
    x0: &[f64],
    t_end: f64,
    steps: usize,
    domain: Option<&MetricField>,
) -> Result<Trajectory> {
    let n = field.n;
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let inside = |x: &[f64]| domain.map_or(true, |m| in_guard(m, x));
    let path = integrate(x0.to_vec(), t_end, steps, |x| field.eval(x), inside)?;
    let samples = path
        .into_iter()
        .map(|(t, x)| {
            let y = field.eval(&x)?;
            Ok(TrajectoryPoint { t, x, y })
        })
        .collect::<Result<Vec<_>>>()?;
    let f = match domain {
        Some(m) => samples.iter().map(|p| m.eval(&p.x, &p.y)).collect::<Result<Vec<_>>>()?,
        None => vec![],
    };
    Ok(Trajectory { samples, step: t_end / steps as f64, order: 4, f })
}

/// Scalar probed along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Flag curvature over `flags` random transverse directions per point.
    FlagCurvature { flags: usize, seed: u64 },
    RicciOverF2,
    SOverF,
    Tau,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::FlagCurvature { .. } => "flag_curvature",
            Quantity::RicciOverF2 => "ricci_over_f2",
            Quantity::SOverF => "s_over_f",
            Quantity::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStats {
    pub quantity: &'static str,
    pub mean: f64,
    /// Largest `|q − mean|` over all points (and flags).
    pub max_deviation: f64,
    pub min: f64,
    pub max: f64,
    pub evaluations: usize,
    /// One value per curve point (the mean over flags for flag curvature).
    pub per_point: Vec<f64>,
}

fn stats(quantity: &'static str, all: &[f64], per_point: Vec<f64>) -> ProbeStats {
    let mean = all.iter().sum::<f64>() / all.len().max(1) as f64;
    let max_deviation = all.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    ProbeStats {
        quantity,
        mean,
        max_deviation,
        min: all.iter().cloned().fold(f64::INFINITY, f64::min),
        max: all.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        evaluations: all.len(),
        per_point,
    }
}

/// Evaluates `quantity` at every point of `curve`, taking `y = ẋ`.
pub fn probe_constancy(metric: &MetricField, curve: &Trajectory, quantity: Quantity) -> Result<ProbeStats> {
    let n = metric.n;
    let mut all = Vec::new();
    let mut per_point = Vec::with_capacity(curve.len());
    let mut rng = match quantity {
        Quantity::FlagCurvature { seed, .. } => ChaCha8Rng::seed_from_u64(seed),
        _ => ChaCha8Rng::seed_from_u64(0),
    };
    for p in &curve.samples {
        let s = TangentSample::new(p.x.clone(), p.y.clone());
        let v = match quantity {
            Quantity::FlagCurvature { flags, .. } => {
                let geo = Geometry::new(metric, &s, 2, 4)?;
                let mut acc = 0.0;
                let mut got = 0;
                let mut tries = 0;
                while got < flags.max(1) {
                    tries += 1;
                    if tries > 100 * flags.max(1) {
                        return Err(Error::InsufficientSamples { got, need: flags });
                    }
                    let v: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
                    match geo.flag_curvature(&v) {
                        Ok(k) => {
                            all.push(k);
                            acc += k;
                            got += 1;
                        }
                        Err(Error::DegenerateFlag { .. }) => continue,
                        Err(e) => return Err(e),
                    }
                }
                acc / got as f64
            }
            Quantity::RicciOverF2 => {
                let geo = Geometry::new(metric, &s, 2, 4)?;
                let f = geo.f().value();
                let r = geo.ricci_scalar()?.value() / (f * f);
                all.push(r);
                r
            }
            Quantity::SOverF => {
                let (ox, oy) = orders::CONNECTION;
                let geo = Geometry::new(metric, &s, ox, oy)?;
                let r = nonriem::s_curvature(metric, &geo)?.value / geo.f().value();
                all.push(r);
                r
            }
            Quantity::Tau => {
                let geo = Geometry::new(metric, &s, 0, 2)?;
                let r = nonriem::distortion(metric, &geo)?;
                all.push(r);
                r
            }
        };
        per_point.push(v);
    }
    Ok(stats(quantity.name(), &all, per_point))
}

/// Comparison of `dτ/dt` (five-point differences along the curve) with `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauDerivativeCheck {
    pub max_deviation: f64,
    pub points: usize,
}

/// Checks `τ′(t) = S(t)` at every `stride`-th interior point of a geodesic.
pub fn tau_derivative_check(metric: &MetricField, curve: &Trajectory, stride: usize) -> Result<TauDerivativeCheck> {
    let m = curve.len();
    if m < 5 {
        return Err(Error::InsufficientSamples { got: m, need: 5 });
    }
    let tau_at = |k: usize| -> Result<f64> {
        let p = &curve.samples[k];
        let geo = Geometry::new(metric, &TangentSample::new(p.x.clone(), p.y.clone()), 0, 2)?;
        nonriem::distortion(metric, &geo)
    };
    let h = curve.step;
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for k in (2..m - 2).step_by(stride.max(1)) {
        let d = (8.0 * (tau_at(k + 1)? - tau_at(k - 1)?) - (tau_at(k + 2)? - tau_at(k - 2)?)) / (12.0 * h);
        let p = &curve.samples[k];
        let (ox, oy) = orders::CONNECTION;
        let geo = Geometry::new(metric, &TangentSample::new(p.x.clone(), p.y.clone()), ox, oy)?;
        let s = nonriem::s_curvature(metric, &geo)?.value;
        worst = worst.max((d - s).abs());
        points += 1;
    }
    Ok(TauDerivativeCheck { max_deviation: worst, points })
}
