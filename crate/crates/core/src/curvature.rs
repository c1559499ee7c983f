//! Curvature identities evaluated as residual tensors at a sample.

use serde::Serialize;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::MetricField;
use crate::geometry::{Derivative, Geometry};
use crate::jets::Jet;
use crate::tensor::{JetTensor, Lower, TangentSample, TensorValue, Upper};

/// A flag `span{y, v}` with flagpole `y` at the sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub base: TangentSample,
    pub transverse: Vec<f64>,
}

/// Flag curvature `K(P, y) = g_y(R_y v, v) / (g_y(y,y) g_y(v,v) − g_y(v,y)²)`.
pub fn flag_curvature(geo: &Geometry, flag: &Flag) -> Result<f64> {
    if flag.transverse.len() != geo.n() {
        return Err(Error::DimensionMismatch { expected: geo.n(), got: flag.transverse.len() });
    }
    geo.flag_curvature(&flag.transverse)
}

/// Spread of flag curvature over flags sharing a base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlagSpread {
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
    /// `variance ≤ 1e-10 · mean²`, or every value is zero.
    pub constant: bool,
}

/// Flag curvature of every flag (all at the same `x`), with its sample
/// mean and variance.
pub fn flag_spread(metric: &MetricField, flags: &[Flag]) -> Result<FlagSpread> {
    let Some(first) = flags.first() else {
        return Err(Error::InvalidParameter("no flags given".into()));
    };
    let ks = flags
        .par_iter()
        .map(|fl| {
            if fl.base.x != first.base.x {
                return Err(Error::InvalidParameter("flags must share the base point".into()));
            }
            let geo = Geometry::new(metric, &fl.base, 2, 4)?;
            flag_curvature(&geo, fl)
        })
        .collect::<Result<Vec<f64>>>()?;
    let count = ks.len();
    let mean = ks.iter().sum::<f64>() / count as f64;
    let variance = if count > 1 { ks.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (count - 1) as f64 } else { 0.0 };
    let constant = variance <= 1e-10 * mean * mean || ks.iter().all(|k| k.abs() <= 1e-12);
    Ok(FlagSpread { mean, variance, count, constant })
}

/// All curvature tensors at one sample.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBundle {
    pub riemann_trace: TensorValue,
    pub ricci_scalar: f64,
    pub berwald_hh: TensorValue,
    pub berwald_ricci: TensorValue,
    pub ricci_tilde: TensorValue,
    pub ricci_second: TensorValue,
    pub cartan_hh: TensorValue,
    pub cartan_hv: TensorValue,
    pub cartan_vv: TensorValue,
    pub h_curvature: TensorValue,
}

pub fn curvature_bundle(geo: &Geometry) -> Result<CurvatureBundle> {
    Ok(CurvatureBundle {
        riemann_trace: geo.value(geo.riemann_trace()?),
        ricci_scalar: geo.ricci_scalar()?.value(),
        berwald_hh: geo.value(geo.berwald_hh()?),
        berwald_ricci: geo.value(&geo.berwald_ricci()?),
        ricci_tilde: geo.value(&geo.ricci_tilde()?),
        ricci_second: geo.value(&geo.ricci_second()?),
        cartan_hh: geo.value(geo.cartan_hh()?),
        cartan_hv: geo.value(&geo.cartan_hv()?),
        cartan_vv: geo.value(&geo.cartan_vv()?),
        h_curvature: geo.value(&geo.h_curvature()?),
    })
}

/// `K^r_0m0 − R^r_m`.
pub fn trace_curvature_residual(geo: &Geometry) -> Result<TensorValue> {
    let k = geo.berwald_hh()?;
    let r = geo.riemann_trace()?;
    let k0 = k.contract_vec(3, geo.y()).contract_vec(1, geo.y()); // [r, m]
    Ok(geo.value(&k0.sub(r)))
}

/// Residual of the Ricci identity for the Cartan connection,
/// `∇_k∇_lΨ^i − ∇_l∇_kΨ^i − (Ψ^r R^i_rkl − ∇̇_rΨ^i R^r_0kl − ∇_rΨ^i S^r_kl)`,
/// indexed `[i, k, l]`.
pub fn ricci_identity_residual(geo: &Geometry, psi: &[Jet]) -> Result<TensorValue> {
    let n = geo.n();
    let psi = geo.tensor(&[Upper], psi.to_vec());
    let d = geo.covariant(&psi, Derivative::CartanH)?; // [i, l]
    let dd = geo.covariant(&d, Derivative::CartanH)?; // [i, l, k]
    let dv = geo.covariant(&psi, Derivative::CartanV)?; // [i, r]
    let r = geo.cartan_hh()?;
    let r0 = r.contract_vec(1, geo.y()); // [r, k, l]
    let c = geo.cartan_mixed()?;
    let res = JetTensor::from_fn(n, &[Upper, Lower, Lower], |ix| {
        let (i, k, l) = (ix[0], ix[1], ix[2]);
        let lhs = dd.at(&[i, l, k]) - dd.at(&[i, k, l]);
        let mut rhs = psi.at(&[0]).mul_jet(r.at(&[i, 0, k, l]));
        for s in 0..n {
            if s > 0 {
                rhs = &rhs + &psi.at(&[s]).mul_jet(r.at(&[i, s, k, l]));
            }
            rhs = &rhs - &dv.at(&[i, s]).mul_jet(r0.at(&[s, k, l]));
            let torsion = c.at(&[s, k, l]) - c.at(&[s, l, k]);
            rhs = &rhs - &d.at(&[i, s]).mul_jet(&torsion);
        }
        &lhs - &rhs
    });
    Ok(geo.value(&res))
}

/// Residual of the Berwald commutation rule for a scalar field,
/// `D_m D_k ψ − D_k D_m ψ − K^r_0km ∂̇_r ψ`, indexed `[m, k]`.
///
/// With `K` as in [`Geometry::berwald_hh`] one has
/// `[δ_m, δ_k] = K^r_0km ∂̇_r`.
pub fn berwald_commutation_residual(geo: &Geometry, psi: &Jet) -> Result<TensorValue> {
    Ok(geo.value(&commutation(geo, psi, false)?))
}

pub(crate) fn commutation(geo: &Geometry, psi: &Jet, swapped: bool) -> Result<JetTensor> {
    let n = geo.n();
    let s = JetTensor::scalar(n, psi.clone());
    let d = geo.delta(&s)?; // [k]
    let dd = geo.covariant(&d, Derivative::BerwaldH)?; // [k, m] = D_m D_k ψ
    let k0 = geo.berwald_hh()?.contract_vec(1, geo.y()); // [r, a, b] = K^r_0ab
    let sy = s.vertical(); // [r]
    Ok(JetTensor::from_fn(n, &[Lower, Lower], |mk| {
        let (m, k) = (mk[0], mk[1]);
        let lhs = dd.at(&[k, m]) - dd.at(&[m, k]);
        let (a, b) = if swapped { (m, k) } else { (k, m) };
        let mut rhs = k0.at(&[0, a, b]).mul_jet(sy.at(&[0]));
        for r in 1..n {
            rhs = &rhs + &k0.at(&[r, a, b]).mul_jet(sy.at(&[r]));
        }
        &lhs - &rhs
    }))
}

/// Contracted Bianchi traces: `(y^j K_jl.m, y^l K_jl.m + 2 H_jm)`.
pub fn bianchi_trace_residuals(geo: &Geometry) -> Result<(TensorValue, TensorValue)> {
    let kv = geo.berwald_ricci()?.vertical(); // [j, l, m]
    let a = kv.contract_vec(0, geo.y());
    let h = geo.h_curvature()?;
    let b = kv.contract_vec(1, geo.y()).add(&h.scale(2.0));
    Ok((geo.value(&a), geo.value(&b)))
}

/// `Ric_ij − R̃_ij + H_ij`.
pub fn ricci_relation_residual(geo: &Geometry) -> Result<TensorValue> {
    let r = geo.ricci_second()?.sub(&geo.ricci_tilde()?).add(&geo.h_curvature()?);
    Ok(geo.value(&r))
}

/// `ℓ^i ℓ^k Ric_ik − Ric / F²`.
pub fn ricci_contraction_residual(geo: &Geometry) -> Result<f64> {
    let r = geo.value(&geo.ricci_second()?);
    let ell = geo.value(geo.ell_up()?);
    let n = geo.n();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += ell.get(&[i]) * ell.get(&[k]) * r.get(&[i, k]);
        }
    }
    let f = geo.f().value();
    Ok(s - geo.ricci_scalar()?.value() / (f * f))
}
