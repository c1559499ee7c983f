//! Report documents (schema `finslerlab.report/1`).
//!
//! A document is a JSON object with the keys `schema`, `engine`, `command`,
//! `config`, `status`, `payload` and `timings`. Everything except `timings`
//! is a pure function of the configuration and the engine version.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::harness::{at, random_flags, HResult};
use crate::catalog::CatalogEntry;
use crate::curvature;
use crate::error::Error;
use crate::geometry::Geometry;
use crate::nonriem::{self, ImlFit};
use crate::tensor::{Slot, TangentSample, TensorValue};

pub const SCHEMA: &str = "finslerlab.report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Engine {
    pub name: &'static str,
    pub version: &'static str,
}

pub const ENGINE: Engine = Engine { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") };

/// Wall-clock timings in milliseconds, kept apart from the payload.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.stages.push((name.to_string(), t0.elapsed().as_secs_f64() * 1e3));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument<P: Serialize> {
    pub schema: &'static str,
    pub engine: Engine,
    pub command: String,
    pub config: RunConfig,
    pub status: Status,
    pub payload: P,
    pub timings: Timings,
}

impl<P: Serialize> ReportDocument<P> {
    pub fn new(command: &str, config: &RunConfig, status: Status, payload: P, timings: Timings) -> Self {
        ReportDocument { schema: SCHEMA, engine: ENGINE, command: command.into(), config: config.clone(), status, payload, timings }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// A tensor as variance letters (`u`/`l`) and row-major components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor {
    pub variance: String,
    pub components: Vec<f64>,
}

impl From<&TensorValue> for Tensor {
    fn from(t: &TensorValue) -> Self {
        let variance = t.variance.iter().map(|s| if *s == Slot::Upper { 'u' } else { 'l' }).collect();
        Tensor { variance, components: t.components.clone() }
    }
}

impl From<TensorValue> for Tensor {
    fn from(t: TensorValue) -> Self {
        Tensor::from(&t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagValue {
    pub transverse: Vec<f64>,
    pub curvature: f64,
}

/// Every object of the pipeline at one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBlock {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub margin: f64,
    pub f: f64,
    pub fundamental: Tensor,
    pub inverse: Tensor,
    pub ell: Tensor,
    pub cartan: Tensor,
    pub mean_cartan: Tensor,
    pub spray: Tensor,
    pub nonlinear: Tensor,
    pub berwald_coeffs: Tensor,
    pub berwald_curvature: Tensor,
    pub cartan_gamma: Tensor,
    pub riemann_trace: Tensor,
    pub ricci_scalar: f64,
    pub berwald_hh: Tensor,
    pub berwald_ricci: Tensor,
    pub ricci_tilde: Tensor,
    pub ricci_second: Tensor,
    pub cartan_hh: Tensor,
    pub cartan_hv: Tensor,
    pub cartan_vv: Tensor,
    pub tau: f64,
    pub s: f64,
    pub mean_berwald: Tensor,
    pub h_curvature: Tensor,
    pub landsberg: Tensor,
    pub mean_landsberg: Tensor,
    pub iml: Option<ImlFit>,
    pub flags: Vec<FlagValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorReport {
    pub metric: String,
    pub expression: String,
    pub dim: usize,
    pub samples: Vec<SampleBlock>,
}

fn block(entry: &CatalogEntry, s: &TangentSample, flags: &[Vec<f64>]) -> crate::Result<SampleBlock> {
    let metric = &entry.metric;
    let geo = Geometry::new(metric, s, 2, 6)?;
    let v = |t: &crate::tensor::JetTensor| Tensor::from(geo.value(t));
    let curv = curvature::curvature_bundle(&geo)?;
    let nr = nonriem::nonriem_bundle(metric, &geo)?;
    let mut fl = Vec::new();
    for t in flags {
        match geo.flag_curvature(t) {
            Ok(k) => fl.push(FlagValue { transverse: t.clone(), curvature: k }),
            Err(Error::DegenerateFlag { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(SampleBlock {
        x: s.x.clone(),
        y: s.y.clone(),
        margin: s.margin,
        f: geo.f().value(),
        fundamental: v(geo.fundamental()),
        inverse: v(geo.inverse()),
        ell: v(geo.ell_up()?),
        cartan: v(geo.cartan()?),
        mean_cartan: v(geo.mean_cartan()?),
        spray: v(geo.spray()?),
        nonlinear: v(geo.nonlinear()?),
        berwald_coeffs: v(geo.berwald_coeffs()?),
        berwald_curvature: v(geo.berwald_curvature()?),
        cartan_gamma: v(geo.cartan_gamma()?),
        riemann_trace: curv.riemann_trace.into(),
        ricci_scalar: curv.ricci_scalar,
        berwald_hh: curv.berwald_hh.into(),
        berwald_ricci: curv.berwald_ricci.into(),
        ricci_tilde: curv.ricci_tilde.into(),
        ricci_second: curv.ricci_second.into(),
        cartan_hh: curv.cartan_hh.into(),
        cartan_hv: curv.cartan_hv.into(),
        cartan_vv: curv.cartan_vv.into(),
        tau: nr.tau,
        s: nr.s,
        mean_berwald: nr.e.into(),
        h_curvature: nr.h.into(),
        landsberg: nr.landsberg.into(),
        mean_landsberg: nr.mean_landsberg.into(),
        iml: nr.iml,
        flags: fl,
    })
}

/// Full tensor dump at `samples` seeded points.
pub fn tensor_report(entry: &CatalogEntry, config: &RunConfig) -> HResult<TensorReport> {
    let n = entry.metric.n;
    let samples = entry.samples(config.samples, config.seed).map_err(|e| super::harness::Located {
        error: e,
        context: "sampling".into(),
        sample: None,
    })?;
    let blocks = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let flags = if n >= 2 { random_flags(n, config.flags, config.seed.wrapping_add(i as u64)) } else { vec![] };
            at(block(entry, s, &flags), "report", s)
        })
        .collect::<HResult<Vec<_>>>()?;
    Ok(TensorReport { metric: entry.label.clone(), expression: entry.metric.f.to_string(), dim: n, samples: blocks })
}
