//! Finsler geometry at a single point of the slit tangent bundle.
//!
//! A [`Geometry`] holds the jet of `F` at a sample and derives every tensor
//! from it lazily. Each derived object consumes some of the jet's `x` and `y`
//! orders; accessors report [`Error::TruncationOrderExceeded`] when the jet of
//! `F` is too shallow for the request.

use std::cell::OnceCell;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::{MetricField, Scalar, TangentFieldExpr, VectorFieldExpr};
use crate::jets::{jet_of, Jet, JetSpace, JetSpec};
use crate::tensor::{index_tuples, JetTensor, Lower, Slot, TangentSample, TensorValue, Upper};

/// Jet orders of `F` needed by the main consumers.
pub mod orders {
    pub const SPRAY: (usize, usize) = (1, 2);
    pub const CONNECTION: (usize, usize) = (1, 4);
    pub const CURVATURE: (usize, usize) = (2, 5);
    pub const FULL: (usize, usize) = (2, 6);
}

#[derive(Default)]
struct Cache {
    ell_up: OnceCell<JetTensor>,
    ell_low: OnceCell<JetTensor>,
    cartan: OnceCell<JetTensor>,
    cartan_mixed: OnceCell<JetTensor>,
    mean_cartan: OnceCell<JetTensor>,
    spray: OnceCell<JetTensor>,
    nonlinear: OnceCell<JetTensor>,
    berwald_coeffs: OnceCell<JetTensor>,
    berwald_curvature: OnceCell<JetTensor>,
    gamma: OnceCell<JetTensor>,
    riemann_trace: OnceCell<JetTensor>,
    berwald_hh: OnceCell<JetTensor>,
    cartan_hh: OnceCell<JetTensor>,
    mean_berwald: OnceCell<JetTensor>,
    landsberg: OnceCell<JetTensor>,
}

pub struct Geometry {
    n: usize,
    sample: TangentSample,
    f: Jet,
    f2: Jet,
    ys: Vec<Jet>,
    g: JetTensor,
    ginv: JetTensor,
    log_det: Jet,
    cache: Cache,
}

/// Which connection a covariant derivative uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    /// Cartan horizontal `∇_k`.
    CartanH,
    /// Cartan vertical `∇̇_k`.
    CartanV,
    /// Berwald horizontal `D_k`.
    BerwaldH,
}

fn sum(n: usize, mut f: impl FnMut(usize) -> Jet) -> Jet {
    let mut acc = f(0);
    for r in 1..n {
        acc = &acc + &f(r);
    }
    acc
}

impl Geometry {
    /// Expands `F` at `sample` to the given orders.
    pub fn new(metric: &MetricField, sample: &TangentSample, ox: usize, oy: usize) -> Result<Self> {
        if sample.x.len() != metric.n || sample.y.len() != metric.n {
            return Err(Error::DimensionMismatch { expected: metric.n, got: sample.x.len() });
        }
        metric.check_guard(&sample.x)?;
        let spec = JetSpec::new(metric.n, ox, oy)?;
        let f = jet_of(&metric.f, &sample.x, &sample.y, spec)?;
        Self::from_jet(sample, f)
    }

    /// Builds the geometry from a precomputed jet of `F` at `sample`.
    pub fn from_jet(sample: &TangentSample, f: Jet) -> Result<Self> {
        let n = sample.n();
        let oy = f.orders().1;
        if oy < 2 {
            return Err(Error::TruncationOrderExceeded(format!("need y order ≥ 2, got {oy}")));
        }
        if !(f.value() > 0.0) || !f.value().is_finite() {
            return Err(Error::domain(format!("F = {} is not positive at the sample", f.value())));
        }
        let space = f.space().clone();
        let ys: Vec<Jet> = sample.y.iter().enumerate().map(|(k, &v)| Jet::var_y(&space, k, v)).collect();
        let f2 = f.mul_jet(&f);
        let h = JetTensor::scalar(n, f2.clone()).vertical().vertical().scale(0.5);
        let g = JetTensor { n, variance: vec![Lower, Lower], comps: h.comps };

        let gv = DMatrix::from_fn(n, n, |i, j| g.at(&[i, j]).value());
        let eig = SymmetricEigen::new(gv).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eig.iter().cloned().fold(0.0, f64::max);
        if !(min > 1e-12 * max.max(1e-300)) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let (ginv_comps, det) = invert(n, &g.comps)?;
        let ginv = JetTensor { n, variance: vec![Upper, Upper], comps: ginv_comps };
        let log_det = det.ln()?.scale(0.5);
        Ok(Geometry { n, sample: sample.clone(), f, f2, ys, g, ginv, log_det, cache: Cache::default() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sample(&self) -> &TangentSample {
        &self.sample
    }

    pub fn orders(&self) -> (usize, usize) {
        self.f.orders()
    }

    pub fn f(&self) -> &Jet {
        &self.f
    }

    pub fn f2(&self) -> &Jet {
        &self.f2
    }

    /// Jets of the fiber coordinates `y^k`.
    pub fn y(&self) -> &[Jet] {
        &self.ys
    }

    pub fn space(&self) -> &std::sync::Arc<JetSpace> {
        self.f.space()
    }

    pub fn value(&self, t: &JetTensor) -> TensorValue {
        t.value(&self.sample)
    }

    fn need(&self, what: &str, ox: usize, oy: usize) -> Result<()> {
        let (fx, fy) = self.orders();
        if fx < ox || fy < oy {
            return Err(Error::TruncationOrderExceeded(format!(
                "{what} needs F expanded to orders (x {ox}, y {oy}), have (x {fx}, y {fy})"
            )));
        }
        Ok(())
    }

    fn cached<'a>(
        &'a self,
        cell: &'a OnceCell<JetTensor>,
        what: &str,
        need: (usize, usize),
        build: impl FnOnce() -> Result<JetTensor>,
    ) -> Result<&'a JetTensor> {
        if let Some(t) = cell.get() {
            return Ok(t);
        }
        self.need(what, need.0, need.1)?;
        let t = build()?;
        let _ = cell.set(t);
        Ok(cell.get().expect("just set"))
    }

    /// `g_ij = ½ [F²]_{y^i y^j}`.
    pub fn fundamental(&self) -> &JetTensor {
        &self.g
    }

    /// `g^ij`.
    pub fn inverse(&self) -> &JetTensor {
        &self.ginv
    }

    /// `½ ln det g` as a jet.
    pub fn half_log_det(&self) -> &Jet {
        &self.log_det
    }

    /// `g_ij = F F_{y^i y^j} + F_{y^i} F_{y^j}`, the product-rule form.
    pub fn fundamental_product_form(&self) -> JetTensor {
        let fy = JetTensor::scalar(self.n, self.f.clone()).vertical();
        let fyy = fy.vertical();
        JetTensor::from_fn(self.n, &[Lower, Lower], |ij| {
            &self.f.mul_jet(fyy.at(ij)) + &fy.at(&[ij[0]]).mul_jet(fy.at(&[ij[1]]))
        })
    }

    /// `ℓ^i = y^i / F`.
    pub fn ell_up(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.ell_up, "ℓ^i", (0, 0), || {
            let inv = self.f.recip()?;
            Ok(JetTensor::from_fn(self.n, &[Upper], |i| self.ys[i[0]].mul_jet(&inv)))
        })
    }

    /// `ℓ_i = F_{y^i}`.
    pub fn ell_low(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.ell_low, "ℓ_i", (0, 1), || Ok(JetTensor::scalar(self.n, self.f.clone()).vertical()))
    }

    /// `C_ijk = ½ ∂̇_k g_ij`.
    pub fn cartan(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.cartan, "C_ijk", (0, 3), || Ok(self.g.vertical().scale(0.5)))
    }

    /// `A_ijk = F C_ijk`.
    pub fn cartan_a(&self) -> Result<JetTensor> {
        Ok(self.cartan()?.map(|c| c.mul_jet(&self.f)))
    }

    /// `C^i_jk = g^il C_ljk`.
    pub fn cartan_mixed(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.cartan_mixed, "C^i_jk", (0, 3), || {
            let c = self.cartan()?;
            Ok(self.raise(c, 0))
        })
    }

    /// `I_i = g^jk C_ijk`.
    pub fn mean_cartan(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_cartan, "I_i", (0, 3), || {
            let c = self.cartan()?;
            Ok(JetTensor::from_fn(self.n, &[Lower], |i| {
                sum(self.n, |j| sum(self.n, |k| self.ginv.at(&[j, k]).mul_jet(c.at(&[i[0], j, k]))))
            }))
        })
    }

    /// `C^k = g^ij C^k_ij`.
    pub fn cartan_trace(&self) -> Result<JetTensor> {
        let i = self.mean_cartan()?;
        Ok(self.raise(i, 0))
    }

    /// Raises slot `slot` (which must be lower) with `g^ij`.
    pub fn raise(&self, t: &JetTensor, slot: usize) -> JetTensor {
        assert_eq!(t.variance[slot], Lower);
        let mut variance = t.variance.clone();
        variance[slot] = Upper;
        JetTensor::from_fn(self.n, &variance, |idx| {
            let mut src = idx.to_vec();
            sum(self.n, |l| {
                src[slot] = l;
                self.ginv.at(&[idx[slot], l]).mul_jet(t.at(&src))
            })
        })
    }

    /// Lowers slot `slot` (which must be upper) with `g_ij`.
    pub fn lower(&self, t: &JetTensor, slot: usize) -> JetTensor {
        assert_eq!(t.variance[slot], Upper);
        let mut variance = t.variance.clone();
        variance[slot] = Lower;
        JetTensor::from_fn(self.n, &variance, |idx| {
            let mut src = idx.to_vec();
            sum(self.n, |l| {
                src[slot] = l;
                self.g.at(&[idx[slot], l]).mul_jet(t.at(&src))
            })
        })
    }

    /// Contracts the last slot with `y`.
    pub fn along_y(&self, t: &JetTensor) -> JetTensor {
        t.contract_vec(t.rank() - 1, &self.ys)
    }

    /// Spray coefficients `G^i = ¼ g^il ([F²]_{x^k y^l} y^k − [F²]_{x^l})`.
    pub fn spray(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.spray, "G^i", (1, 2), || {
            let n = self.n;
            let f2 = JetTensor::scalar(n, self.f2.clone());
            let fx = f2.horizontal_partial();
            let fxy = fx.vertical();
            let w: Vec<Jet> = (0..n)
                .map(|l| &sum(n, |k| fxy.at(&[k, l]).mul_jet(&self.ys[k])) - fx.at(&[l]))
                .collect();
            Ok(JetTensor::from_fn(n, &[Upper], |i| {
                sum(n, |l| self.ginv.at(&[i[0], l]).mul_jet(&w[l])).scale(0.25)
            }))
        })
    }

    /// `G^i_j = ∂̇_j G^i`.
    pub fn nonlinear(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.nonlinear, "G^i_j", (1, 3), || Ok(self.spray()?.vertical()))
    }

    /// `G^i_jk = ∂̇_k G^i_j`.
    pub fn berwald_coeffs(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.berwald_coeffs, "G^i_jk", (1, 4), || Ok(self.nonlinear()?.vertical()))
    }

    /// Berwald curvature `B^i_jkl = ∂̇_l G^i_jk`.
    pub fn berwald_curvature(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.berwald_curvature, "B^i_jkl", (1, 5), || Ok(self.berwald_coeffs()?.vertical()))
    }

    /// Horizontal frame derivative `δ_k T = ∂_k T − G^r_k ∂̇_r T`, appended as a
    /// new last slot.
    pub fn delta(&self, t: &JetTensor) -> Result<JetTensor> {
        let gn = self.nonlinear()?;
        let n = self.n;
        let mut variance = t.variance.clone();
        variance.push(Lower);
        let mut comps = Vec::with_capacity(t.comps.len() * n);
        for c in &t.comps {
            let dy: Vec<Jet> = (0..n).map(|r| c.derivative_y(r)).collect();
            for k in 0..n {
                let corr = sum(n, |r| gn.at(&[r, k]).mul_jet(&dy[r]));
                comps.push(&c.derivative_x(k) - &corr);
            }
        }
        Ok(JetTensor { n, variance, comps })
    }

    /// Cartan horizontal coefficients
    /// `Γ^i_jk = ½ g^il (δ_j g_lk + δ_k g_jl − δ_l g_jk)`.
    pub fn cartan_gamma(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.gamma, "Γ^i_jk", (1, 3), || {
            let n = self.n;
            let dg = self.delta(&self.g)?; // [a, b, c] = δ_c g_ab
            let low = JetTensor::from_fn(n, &[Lower, Lower, Lower], |ljk| {
                let (l, j, k) = (ljk[0], ljk[1], ljk[2]);
                &(dg.at(&[l, k, j]) + dg.at(&[j, l, k])) - dg.at(&[j, k, l])
            });
            Ok(self.raise(&low, 0).scale(0.5))
        })
    }

    /// Covariant derivative of `t` with a new last slot `k`.
    pub fn covariant(&self, t: &JetTensor, kind: Derivative) -> Result<JetTensor> {
        let (base, conn) = match kind {
            Derivative::CartanH => (self.delta(t)?, self.cartan_gamma()?),
            Derivative::CartanV => (t.vertical(), self.cartan_mixed()?),
            Derivative::BerwaldH => (self.delta(t)?, self.berwald_coeffs()?),
        };
        let n = self.n;
        let rank = t.rank();
        let mut out = base;
        for (pos, idx) in index_tuples(n, rank + 1).into_iter().enumerate() {
            let k = idx[rank];
            let mut acc: Option<Jet> = None;
            for s in 0..rank {
                let mut src = idx[..rank].to_vec();
                let a = idx[s];
                for r in 0..n {
                    src[s] = r;
                    let term = match t.variance[s] {
                        Upper => t.at(&src).mul_jet(conn.at(&[a, r, k])),
                        Lower => t.at(&src).mul_jet(conn.at(&[r, a, k])).scale(-1.0),
                    };
                    acc = Some(match acc {
                        None => term,
                        Some(x) => &x + &term,
                    });
                }
            }
            if let Some(a) = acc {
                out.comps[pos] = &out.comps[pos] + &a;
            }
        }
        Ok(out)
    }

    /// `∇_0 T = y^k ∇_k T`.
    pub fn cartan_along_y(&self, t: &JetTensor) -> Result<JetTensor> {
        Ok(self.along_y(&self.covariant(t, Derivative::CartanH)?))
    }

    /// `D_0 T = y^k D_k T`.
    pub fn berwald_along_y(&self, t: &JetTensor) -> Result<JetTensor> {
        Ok(self.along_y(&self.covariant(t, Derivative::BerwaldH)?))
    }

    /// Trace curvature
    /// `R^i_k = 2 ∂_k G^i − y^j ∂_j ∂̇_k G^i + 2 G^j G^i_jk − G^i_j G^j_k`.
    pub fn riemann_trace(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.riemann_trace, "R^i_k", (2, 4), || {
            let n = self.n;
            let g = self.spray()?;
            let g1 = self.nonlinear()?;
            let g2 = self.berwald_coeffs()?;
            let gx = g.horizontal_partial(); // [i, k]
            let g1x = g1.horizontal_partial(); // [i, k, j]
            Ok(JetTensor::from_fn(n, &[Upper, Lower], |ik| {
                let (i, k) = (ik[0], ik[1]);
                let a = gx.at(&[i, k]).scale(2.0);
                let b = sum(n, |j| self.ys[j].mul_jet(g1x.at(&[i, k, j])));
                let c = sum(n, |j| g.at(&[j]).mul_jet(g2.at(&[i, j, k]))).scale(2.0);
                let d = sum(n, |j| g1.at(&[i, j]).mul_jet(g1.at(&[j, k])));
                &(&(&a - &b) + &c) - &d
            }))
        })
    }

    /// `Ric = R^i_i` (2-homogeneous in `y`).
    pub fn ricci_scalar(&self) -> Result<Jet> {
        Ok(self.riemann_trace()?.trace(0, 1).comps[0].clone())
    }

    /// Flag curvature of the plane spanned by `y` and `v`.
    pub fn flag_curvature(&self, v: &[f64]) -> Result<f64> {
        let n = self.n;
        let r = self.value(self.riemann_trace()?);
        let g = self.value(&self.g);
        let y = &self.sample.y;
        let gdot = |a: &[f64], b: &[f64]| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += g.get(&[i, j]) * a[i] * b[j];
                }
            }
            s
        };
        let rv: Vec<f64> = (0..n).map(|i| (0..n).map(|k| r.get(&[i, k]) * v[k]).sum()).collect();
        let (yy, vv, vy) = (gdot(y, y), gdot(v, v), gdot(v, y));
        let den = yy * vv - vy * vy;
        let ratio = den / (yy * vv);
        if !(ratio > 1e-10) {
            return Err(Error::DegenerateFlag { ratio });
        }
        Ok(gdot(&rv, v) / den)
    }

    /// Berwald hh-curvature
    /// `K^i_jkl = δ_k G^i_jl − δ_l G^i_jk + G^i_rk G^r_jl − G^i_rl G^r_jk`.
    pub fn berwald_hh(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.berwald_hh, "K^i_jkl", (2, 5), || {
            let n = self.n;
            let g2 = self.berwald_coeffs()?;
            let d = self.delta(g2)?; // [i, j, l, k] = δ_k G^i_jl
            Ok(JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                let quad = sum(n, |r| {
                    &g2.at(&[i, r, k]).mul_jet(g2.at(&[r, j, l])) - &g2.at(&[i, r, l]).mul_jet(g2.at(&[r, j, k]))
                });
                &(d.at(&[i, j, l, k]) - d.at(&[i, j, k, l])) + &quad
            }))
        })
    }

    /// `K_jl = K^i_jil`.
    pub fn berwald_ricci(&self) -> Result<JetTensor> {
        let k = self.berwald_hh()?;
        Ok(JetTensor::from_fn(self.n, &[Lower, Lower], |jl| sum(self.n, |i| k.at(&[i, jl[0], i, jl[1]]).clone())))
    }

    /// `R̃_ij = ½ (K_ij + K_ji)`.
    pub fn ricci_tilde(&self) -> Result<JetTensor> {
        let k = self.berwald_ricci()?;
        Ok(k.add(&k.permute(&[1, 0])).scale(0.5))
    }

    /// `Ric_ij = ½ ∂̇_i ∂̇_j Ric`.
    pub fn ricci_second(&self) -> Result<JetTensor> {
        self.need("Ric_ij", 2, 6)?;
        let r = JetTensor::scalar(self.n, self.ricci_scalar()?);
        Ok(r.vertical().vertical().scale(0.5))
    }

    /// `δΓ` part of the Cartan hh-curvature,
    /// `δ_k Γ^i_jm − δ_m Γ^i_jk + Γ^i_sk Γ^s_jm − Γ^i_sm Γ^s_jk`.
    fn cartan_hh_base(&self) -> Result<JetTensor> {
        let n = self.n;
        let gm = self.cartan_gamma()?;
        let d = self.delta(gm)?; // [i, j, m, k] = δ_k Γ^i_jm
        Ok(JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
            let (i, j, k, m) = (ix[0], ix[1], ix[2], ix[3]);
            let quad = sum(n, |s| {
                &gm.at(&[i, s, k]).mul_jet(gm.at(&[s, j, m])) - &gm.at(&[i, s, m]).mul_jet(gm.at(&[s, j, k]))
            });
            &(d.at(&[i, j, m, k]) - d.at(&[i, j, k, m])) + &quad
        }))
    }

    /// Cartan hh-curvature `R^i_jkm`, with `R^s_km = y^p R^s_pkm` taken from
    /// the `δΓ` part (the `C` term drops out under contraction with `y`).
    pub fn cartan_hh(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.cartan_hh, "R^i_jkm", (2, 4), || {
            let n = self.n;
            let base = self.cartan_hh_base()?;
            let c = self.cartan_mixed()?;
            let r0 = base.contract_vec(1, &self.ys); // [s, k, m]
            Ok(JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
                let (i, j, k, m) = (ix[0], ix[1], ix[2], ix[3]);
                base.at(ix) + &sum(n, |s| r0.at(&[s, k, m]).mul_jet(c.at(&[i, s, j])))
            }))
        })
    }

    /// Cartan hv-curvature
    /// `P^i_jkl = ∇^i C_kjl − ∇_j C^i_kl + C^i_kr ∇_0 C^r_jl − C^r_kj ∇_0 C^i_rl`.
    pub fn cartan_hv(&self) -> Result<JetTensor> {
        self.need("P^i_jkl", 1, 4)?;
        let n = self.n;
        let c = self.cartan()?;
        let cm = self.cartan_mixed()?;
        let dc = self.covariant(c, Derivative::CartanH)?; // [k, j, l, s]
        let dcm = self.covariant(cm, Derivative::CartanH)?; // [i, k, l, j]
        let dcm0 = self.along_y(&dcm); // [r, j, l]
        Ok(JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
            let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
            let a = sum(n, |s| self.ginv.at(&[i, s]).mul_jet(dc.at(&[k, j, l, s])));
            let b = dcm.at(&[i, k, l, j]);
            let c1 = sum(n, |r| cm.at(&[i, k, r]).mul_jet(dcm0.at(&[r, j, l])));
            let c2 = sum(n, |r| cm.at(&[r, k, j]).mul_jet(dcm0.at(&[i, r, l])));
            &(&(&a - b) + &c1) - &c2
        }))
    }

    /// Cartan vv-curvature `Q^i_jkl = C^i_lr C^r_jk − C^i_rk C^r_jl`.
    pub fn cartan_vv(&self) -> Result<JetTensor> {
        let n = self.n;
        let cm = self.cartan_mixed()?;
        Ok(JetTensor::from_fn(n, &[Upper, Lower, Lower, Lower], |ix| {
            let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
            sum(n, |r| &cm.at(&[i, l, r]).mul_jet(cm.at(&[r, j, k])) - &cm.at(&[i, r, k]).mul_jet(cm.at(&[r, j, l])))
        }))
    }

    /// Mean Berwald curvature `E_ij = ½ G^m_imj`.
    pub fn mean_berwald(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.mean_berwald, "E_ij", (1, 5), || {
            let b = self.berwald_curvature()?;
            Ok(JetTensor::from_fn(self.n, &[Lower, Lower], |ij| {
                sum(self.n, |m| b.at(&[m, ij[0], m, ij[1]]).clone()).scale(0.5)
            }))
        })
    }

    /// `H_ij = ∇_0 E_ij`.
    pub fn h_curvature(&self) -> Result<JetTensor> {
        self.need("H_ij", 2, 6)?;
        let e = self.mean_berwald()?;
        self.cartan_along_y(e)
    }

    /// Landsberg tensor `L_ijk = ∇_0 C_ijk`.
    pub fn landsberg(&self) -> Result<&JetTensor> {
        self.cached(&self.cache.landsberg, "L_ijk", (1, 4), || {
            let c = self.cartan()?;
            self.cartan_along_y(c)
        })
    }

    /// Mean Landsberg tensor `J_i = g^jk L_ijk`.
    pub fn mean_landsberg(&self) -> Result<JetTensor> {
        let l = self.landsberg()?;
        Ok(JetTensor::from_fn(self.n, &[Lower], |i| {
            sum(self.n, |j| sum(self.n, |k| self.ginv.at(&[j, k]).mul_jet(l.at(&[i[0], j, k]))))
        }))
    }

    /// Coordinate jets of `x` in this geometry's jet space.
    pub fn x_jets(&self) -> Vec<Jet> {
        self.sample.x.iter().enumerate().map(|(k, &v)| Jet::var_x(self.space(), k, v)).collect()
    }

    /// Jets of a field over `(x, y)`; the result is an upper-index vector
    /// when it has `n` components.
    pub fn tangent_field(&self, field: &TangentFieldExpr) -> Result<Vec<Jet>> {
        let xs = self.x_jets();
        field.components.iter().map(|c| c.eval_generic(&xs, &self.ys)).collect()
    }

    /// Jets of a base vector field `X^i(x)`.
    pub fn vector_field(&self, field: &VectorFieldExpr) -> Result<JetTensor> {
        let xs = self.x_jets();
        let comps = field.eval_generic(&xs)?;
        Ok(JetTensor { n: self.n, variance: vec![Upper], comps })
    }

    /// Wraps a list of jets as a tensor with the given variance.
    pub fn tensor(&self, variance: &[Slot], comps: Vec<Jet>) -> JetTensor {
        JetTensor { n: self.n, variance: variance.to_vec(), comps }
    }
}

/// Gauss-Jordan inverse of a symmetric positive-definite jet matrix, with its
/// determinant.
fn invert(n: usize, m: &[Jet]) -> Result<(Vec<Jet>, Jet)> {
    let space = m[0].space().clone();
    let mut a: Vec<Vec<Jet>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    let mut inv: Vec<Vec<Jet>> =
        (0..n).map(|i| (0..n).map(|j| Jet::constant(&space, if i == j { 1.0 } else { 0.0 })).collect()).collect();
    let mut det = Jet::constant(&space, 1.0);
    for col in 0..n {
        let pivot = a[col][col].clone();
        det = det.mul_jet(&pivot);
        let p = pivot.recip()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul_jet(&p);
            inv[col][j] = inv[col][j].mul_jet(&p);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                let t = factor.mul_jet(&a[col][j]);
                a[row][j] = &a[row][j] - &t;
                let t = factor.mul_jet(&inv[col][j]);
                inv[row][j] = &inv[row][j] - &t;
            }
        }
    }
    Ok((inv.into_iter().flatten().collect(), det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_metric;

    fn funk2() -> MetricField {
        parse_metric("(sqrt((1-x1^2-x2^2)*(y1^2+y2^2)+(x1*y1+x2*y2)^2)+x1*y1+x2*y2)/(1-x1^2-x2^2)", 2)
            .unwrap()
            .with_guard("1-x1^2-x2^2")
            .unwrap()
    }

    #[test]
    fn euclidean_identity() {
        let m = parse_metric("sqrt(y1^2+y2^2)", 2).unwrap();
        let s = TangentSample::new(vec![0.3, 0.1], vec![1.0, -2.0]);
        let geo = Geometry::new(&m, &s, 1, 4).unwrap();
        let g = geo.value(geo.fundamental());
        assert!((g.get(&[0, 0]) - 1.0).abs() < 1e-14 && g.get(&[0, 1]).abs() < 1e-14);
        assert!(geo.value(geo.spray().unwrap()).max_abs() < 1e-14);
        assert!(geo.value(geo.cartan().unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn inverse_is_inverse() {
        let m = funk2();
        let s = TangentSample::new(vec![0.2, -0.1], vec![0.4, 1.0]);
        let geo = Geometry::new(&m, &s, 1, 3).unwrap();
        let g = geo.fundamental();
        let gi = geo.inverse();
        for i in 0..2 {
            for j in 0..2 {
                let p = sum(2, |k| g.at(&[i, k]).mul_jet(gi.at(&[k, j])));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p.value() - expect).abs() < 1e-13);
                assert!(p.coeffs()[1..].iter().all(|&c| c.abs() < 1e-11));
            }
        }
    }

    #[test]
    fn funk_spray_is_half_f_y() {
        let m = funk2();
        let s = TangentSample::new(vec![0.1, 0.0], vec![1.0, 0.0]);
        let geo = Geometry::new(&m, &s, 1, 2).unwrap();
        let g = geo.value(geo.spray().unwrap());
        let f = geo.f().value();
        assert!((g.get(&[0]) - 0.5 * f).abs() < 1e-12);
        assert!(g.get(&[1]).abs() < 1e-12);
    }

    #[test]
    fn order_requirements_are_reported() {
        let m = funk2();
        let s = TangentSample::new(vec![0.1, 0.0], vec![1.0, 0.0]);
        let geo = Geometry::new(&m, &s, 1, 2).unwrap();
        assert!(matches!(geo.riemann_trace(), Err(Error::TruncationOrderExceeded(_))));
    }

    #[test]
    fn funk_flag_curvature() {
        let m = funk2();
        let s = TangentSample::new(vec![0.3, -0.2], vec![0.7, 1.1]);
        let geo = Geometry::new(&m, &s, 2, 4).unwrap();
        let k = geo.flag_curvature(&[1.0, 0.0]).unwrap();
        assert!((k + 0.25).abs() < 1e-10, "{k}");
    }
}
