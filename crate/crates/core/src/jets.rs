//! Truncated multivariate Taylor jets over the `2n` variables `(x, y)`.
//!
//! A jet stores the Taylor coefficients `f^(α)(base) / α!` for every
//! multi-index `α = (αx, αy)` with `|αx| ≤ ox` and `|αy| ≤ oy`. This box
//! truncation is closed under divisors, so products, compositions and
//! partial derivatives are exact within the stored orders. Differentiating in
//! `x` lowers `ox` by one, in `y` lowers `oy` by one.
//!
//! Monomials are listed degree by degree, so the monomials of a lower-order
//! space are a prefix of those of a higher-order space. Truncation is then
//! plain index slicing.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::expr::{Expr, Scalar};

pub const MAX_DIM: usize = 4;
pub const MAX_X_ORDER: usize = 3;
pub const MAX_Y_ORDER: usize = 7;

type Mono = [u8; MAX_DIM];

/// Requested truncation orders for a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetSpec {
    pub n: usize,
    pub max_x_order: usize,
    pub max_y_order: usize,
}

impl JetSpec {
    pub fn new(n: usize, max_x_order: usize, max_y_order: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidParameter(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if max_x_order > MAX_X_ORDER || max_y_order > MAX_Y_ORDER {
            return Err(Error::TruncationOrderExceeded(format!(
                "x order {max_x_order} (max {MAX_X_ORDER}), y order {max_y_order} (max {MAX_Y_ORDER})"
            )));
        }
        Ok(Self { n, max_x_order, max_y_order })
    }

    pub fn max_total_order(&self) -> usize {
        self.max_x_order + self.max_y_order
    }
}

/// A multi-index over `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    pub x: Mono,
    pub y: Mono,
}

impl MultiIndex {
    pub fn new(x: &[u8], y: &[u8]) -> Self {
        let mut m = MultiIndex::default();
        m.x[..x.len()].copy_from_slice(x);
        m.y[..y.len()].copy_from_slice(y);
        m
    }

    pub fn y_only(y: &[u8]) -> Self {
        Self::new(&[], y)
    }

    pub fn x_order(&self) -> usize {
        self.x.iter().map(|&a| a as usize).sum()
    }

    pub fn y_order(&self) -> usize {
        self.y.iter().map(|&a| a as usize).sum()
    }

    pub fn total(&self) -> usize {
        self.x_order() + self.y_order()
    }

    /// `α!`
    pub fn factorial(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|&a| factorial(a as usize)).product()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn monomials(n: usize, max_deg: usize) -> Vec<Mono> {
    fn rec(n: usize, var: usize, left: usize, cur: &mut Mono, out: &mut Vec<Mono>) {
        if var == n - 1 {
            cur[var] = left as u8;
            out.push(*cur);
            cur[var] = 0;
            return;
        }
        for a in (0..=left).rev() {
            cur[var] = a as u8;
            rec(n, var + 1, left - a, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    for d in 0..=max_deg {
        rec(n, 0, d, &mut [0; MAX_DIM], &mut out);
    }
    out
}

fn degree(m: &Mono) -> usize {
    m.iter().map(|&a| a as usize).sum()
}

struct Block {
    monos: Vec<Mono>,
    index: HashMap<Mono, usize>,
    /// `(a, b, a + b)` for every pair whose degree sum stays within the order.
    prod: Vec<(u32, u32, u32)>,
    /// `up[k][j]` = index of `monos[j] + e_k`, or `u32::MAX` past the order.
    up: Vec<Vec<u32>>,
}

impl Block {
    fn new(n: usize, order: usize) -> Self {
        let monos = monomials(n, order);
        let index: HashMap<Mono, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut prod = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate() {
                if degree(ma) + degree(mb) <= order {
                    let mut s = [0u8; MAX_DIM];
                    for v in 0..n {
                        s[v] = ma[v] + mb[v];
                    }
                    prod.push((a as u32, b as u32, index[&s] as u32));
                }
            }
        }
        let up = (0..n)
            .map(|k| {
                monos
                    .iter()
                    .map(|m| {
                        let mut s = *m;
                        s[k] += 1;
                        index.get(&s).map_or(u32::MAX, |&i| i as u32)
                    })
                    .collect()
            })
            .collect();
        Block { monos, index, prod, up }
    }

    fn len(&self) -> usize {
        self.monos.len()
    }

    /// Number of monomials of degree `≤ order` in `n` variables.
    fn count(n: usize, order: usize) -> usize {
        // C(n + order, n)
        let mut c = 1usize;
        for i in 1..=n {
            c = c * (order + i) / i;
        }
        c
    }
}

/// Shared monomial tables for one `(n, ox, oy)` truncation.
pub struct JetSpace {
    pub n: usize,
    pub ox: usize,
    pub oy: usize,
    xb: Block,
    yb: Block,
}

impl std::fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "JetSpace(n={}, ox={}, oy={})", self.n, self.ox, self.oy)
    }
}

static SPACES: Lazy<Mutex<HashMap<(usize, usize, usize), Arc<JetSpace>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl JetSpace {
    pub fn get(n: usize, ox: usize, oy: usize) -> Arc<JetSpace> {
        let mut cache = SPACES.lock().unwrap_or_else(|p| p.into_inner());
        cache
            .entry((n, ox, oy))
            .or_insert_with(|| Arc::new(JetSpace { n, ox, oy, xb: Block::new(n, ox), yb: Block::new(n, oy) }))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.xb.len() * self.yb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ny(&self) -> usize {
        self.yb.len()
    }
}

/// A truncated Taylor jet at a base point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet({:?}, value={})", self.space, self.value())
    }
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Jet { space: space.clone(), c: vec![0.0; space.len()] }
    }

    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Self {
        let mut j = Self::zero(space);
        j.c[0] = v;
        j
    }

    /// The coordinate function `x_k`, with value `base` at the expansion point.
    pub fn var_x(space: &Arc<JetSpace>, k: usize, base: f64) -> Self {
        let mut j = Self::constant(space, base);
        if space.ox > 0 {
            let ny = space.ny();
            j.c[space.xb.up[k][0] as usize * ny] = 1.0;
        }
        j
    }

    pub fn var_y(space: &Arc<JetSpace>, k: usize, base: f64) -> Self {
        let mut j = Self::constant(space, base);
        if space.oy > 0 {
            j.c[space.yb.up[k][0] as usize] = 1.0;
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.space.ox, self.space.oy)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    /// Taylor coefficient `f^(α)(base)/α!`.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<f64> {
        let ix = self.space.xb.index.get(&alpha.x);
        let iy = self.space.yb.index.get(&alpha.y);
        match (ix, iy) {
            (Some(&ix), Some(&iy)) if alpha.x[self.space.n..].iter().all(|&a| a == 0) => {
                Ok(self.c[ix * self.space.ny() + iy])
            }
            _ => Err(Error::OrderOutOfSpec(format!(
                "{alpha:?} outside orders (x {}, y {})",
                self.space.ox, self.space.oy
            ))),
        }
    }

    /// Partial derivative `f^(α)(base)`.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<f64> {
        Ok(self.coeff(alpha)? * alpha.factorial())
    }

    /// Restricts to lower orders.
    pub fn truncate(&self, ox: usize, oy: usize) -> Jet {
        let (sox, soy) = self.orders();
        assert!(ox <= sox && oy <= soy, "cannot truncate {sox},{soy} to {ox},{oy}");
        if ox == sox && oy == soy {
            return self.clone();
        }
        let space = JetSpace::get(self.space.n, ox, oy);
        let (nx, ny, sny) = (space.xb.len(), space.ny(), self.space.ny());
        let mut c = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            c.extend_from_slice(&self.c[ix * sny..ix * sny + ny]);
        }
        Jet { space, c }
    }

    /// Re-expresses a jet of a `y`-independent function at a higher `y`
    /// order (the new coefficients are exactly zero).
    pub fn extend_y(&self, oy: usize) -> Jet {
        let space = JetSpace::get(self.space.n, self.space.ox, oy);
        let (nx, ny, sny) = (space.xb.len(), space.ny(), self.space.ny());
        let mut c = vec![0.0; nx * ny];
        for ix in 0..nx {
            let keep = sny.min(ny);
            c[ix * ny..ix * ny + keep].copy_from_slice(&self.c[ix * sny..ix * sny + keep]);
        }
        Jet { space, c }
    }

    fn common(&self, other: &Jet) -> (Jet, Jet) {
        let ox = self.space.ox.min(other.space.ox);
        let oy = self.space.oy.min(other.space.oy);
        (self.truncate(ox, oy), other.truncate(ox, oy))
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        if Arc::ptr_eq(&self.space, &other.space) {
            let c = self.c.iter().zip(&other.c).map(|(&a, &b)| f(a, b)).collect();
            return Jet { space: self.space.clone(), c };
        }
        let (a, b) = self.common(other);
        a.zip(&b, f)
    }

    pub fn add_const(&self, v: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += v;
        r
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().map(|v| v * s).collect() }
    }

    /// `self += s * other`, truncating `self` if `other` has lower orders.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        if !Arc::ptr_eq(&self.space, &other.space) {
            let (a, b) = self.common(other);
            *self = a;
            return self.axpy(s, &b);
        }
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += s * b;
        }
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        if !Arc::ptr_eq(&self.space, &other.space) {
            let (a, b) = self.common(other);
            return a.mul_jet(&b);
        }
        let sp = &self.space;
        let ny = sp.ny();
        let nx = sp.xb.len();
        let nonzero = |c: &[f64]| -> Vec<bool> {
            (0..nx).map(|ix| c[ix * ny..(ix + 1) * ny].iter().any(|&v| v != 0.0)).collect()
        };
        let (nu, nv) = (nonzero(&self.c), nonzero(&other.c));
        let mut out = vec![0.0; self.c.len()];
        for &(a, b, c) in &sp.xb.prod {
            let (a, b, c) = (a as usize, b as usize, c as usize);
            if !nu[a] || !nv[b] {
                continue;
            }
            let ua = &self.c[a * ny..(a + 1) * ny];
            let vb = &other.c[b * ny..(b + 1) * ny];
            let oc = &mut out[c * ny..(c + 1) * ny];
            for &(p, q, r) in &sp.yb.prod {
                oc[r as usize] += ua[p as usize] * vb[q as usize];
            }
        }
        Jet { space: self.space.clone(), c: out }
    }

    /// `Σ_k coeffs[k] (self − self(base))^k`, the composition with a
    /// univariate function given by its Taylor coefficients at `self(base)`.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let k_max = coeffs.len() - 1;
        let mut r = Jet::constant(&self.space, coeffs[k_max]);
        for k in (0..k_max).rev() {
            r = r.mul_jet(&delta);
            r.c[0] += coeffs[k];
        }
        r
    }

    fn order_total(&self) -> usize {
        self.space.ox + self.space.oy
    }

    pub fn recip(&self) -> Result<Jet> {
        let u = self.value();
        if u == 0.0 {
            return Err(Error::domain("division by zero"));
        }
        let k = self.order_total();
        let coeffs: Vec<f64> = (0..=k).map(|i| (-1f64).powi(i as i32) / u.powi(i as i32 + 1)).collect();
        Ok(self.compose(&coeffs))
    }

    /// Real power `self^a` for a positive base.
    pub fn powf_jet(&self, a: f64) -> Result<Jet> {
        let u = self.value();
        if u < 0.0 || (u == 0.0 && (a < 0.0 || self.order_total() > 0)) {
            return Err(Error::domain(format!("power {a} of base {u}")));
        }
        let k = self.order_total();
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut binom = 1.0;
        for i in 0..=k {
            coeffs.push(binom * u.powf(a - i as f64));
            binom *= (a - i as f64) / (i as f64 + 1.0);
        }
        Ok(self.compose(&coeffs))
    }

    pub fn derivative_x(&self, k: usize) -> Jet {
        self.derivative(k, true)
    }

    pub fn derivative_y(&self, k: usize) -> Jet {
        self.derivative(k, false)
    }

    fn derivative(&self, k: usize, in_x: bool) -> Jet {
        let sp = &self.space;
        let (ox, oy) = (sp.ox, sp.oy);
        assert!(
            if in_x { ox > 0 } else { oy > 0 },
            "derivative beyond jet order (ox {ox}, oy {oy})"
        );
        let target = if in_x { JetSpace::get(sp.n, ox - 1, oy) } else { JetSpace::get(sp.n, ox, oy - 1) };
        let (tnx, tny, sny) = (target.xb.len(), target.ny(), sp.ny());
        let mut c = vec![0.0; tnx * tny];
        for ix in 0..tnx {
            for iy in 0..tny {
                let (six, siy, mult) = if in_x {
                    let s = sp.xb.up[k][ix] as usize;
                    (s, iy, sp.xb.monos[s][k] as f64)
                } else {
                    let s = sp.yb.up[k][iy] as usize;
                    (ix, s, sp.yb.monos[s][k] as f64)
                };
                c[ix * tny + iy] = mult * self.c[six * sny + siy];
            }
        }
        Jet { space: target, c }
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        Jet::constant(&self.space, c)
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_jet(o)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul_jet(&o.recip()?))
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn sqrt(&self) -> Result<Self> {
        if self.value() < 0.0 {
            return Err(Error::domain(format!("sqrt of negative value {}", self.value())));
        }
        self.powf_jet(0.5)
    }
    fn exp(&self) -> Self {
        let u = self.value().exp();
        let k = self.order_total();
        let coeffs: Vec<f64> = (0..=k).map(|i| u / factorial(i)).collect();
        self.compose(&coeffs)
    }
    fn ln(&self) -> Result<Self> {
        let u = self.value();
        if u <= 0.0 {
            return Err(Error::domain(format!("ln of non-positive value {u}")));
        }
        let k = self.order_total();
        let mut coeffs = vec![u.ln()];
        for i in 1..=k {
            coeffs.push((-1f64).powi(i as i32 + 1) / (i as f64 * u.powi(i as i32)));
        }
        Ok(self.compose(&coeffs))
    }
    fn abs(&self) -> Result<Self> {
        let u = self.value();
        if u == 0.0 && self.order_total() > 0 {
            return Err(Error::domain("abs is not differentiable where its argument vanishes"));
        }
        Ok(if u < 0.0 { self.neg() } else { self.clone() })
    }
    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(result)
    }
    fn powf(&self, a: f64) -> Result<Self> {
        self.powf_jet(a)
    }
}

impl std::ops::Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Scalar::add(self, o)
    }
}

impl std::ops::Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Scalar::sub(self, o)
    }
}

impl std::ops::Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.mul_jet(o)
    }
}

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Coordinate jets `(x_1..x_n, y_1..y_n)` at a base point.
pub fn coordinate_jets(x: &[f64], y: &[f64], spec: JetSpec) -> (Vec<Jet>, Vec<Jet>) {
    let space = JetSpace::get(spec.n, spec.max_x_order, spec.max_y_order);
    let xs = x.iter().enumerate().map(|(k, &v)| Jet::var_x(&space, k, v)).collect();
    let ys = y.iter().enumerate().map(|(k, &v)| Jet::var_y(&space, k, v)).collect();
    (xs, ys)
}

/// All truncated Taylor coefficients of `ast` at `(x, y)`.
pub fn jet_of(ast: &Expr, x: &[f64], y: &[f64], spec: JetSpec) -> Result<Jet> {
    if x.len() != spec.n || y.len() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: x.len().min(y.len()) });
    }
    let (xs, ys) = coordinate_jets(x, y, spec);
    ast.eval_generic(&xs, &ys)
}

/// Number of stored coefficients for a spec.
pub fn coefficient_count(spec: JetSpec) -> usize {
    Block::count(spec.n, spec.max_x_order) * Block::count(spec.n, spec.max_y_order)
}

/// Central-difference estimate of `∂^α ast` at `(x, y)` with two levels of
/// Richardson extrapolation (steps `h`, `h/2`, `h/4`). The `y` step follows
/// each component's size so that stencils stay clear of coordinate axes.
/// The raw stencils are second-order accurate with an even error expansion,
/// so the extrapolated value has truncation error `O(h⁶)`; the documented
/// model is `O(h⁴)` to leave room for the roundoff term `ε/h^|α|`.
pub fn fd_oracle(ast: &Expr, guard: Option<&Expr>, x: &[f64], y: &[f64], alpha: &MultiIndex) -> Result<f64> {
    let n = x.len();
    if alpha.total() > 4 {
        return Err(Error::OrderOutOfSpec(format!("fd_oracle supports |α| ≤ 4, got {}", alpha.total())));
    }
    let hx = 0.03;
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
    // orders per variable (x then y)
    let orders: Vec<u8> = alpha.x[..n].iter().chain(alpha.y[..n].iter()).copied().collect();
    let steps: Vec<f64> =
        (0..2 * n).map(|v| if v < n { hx } else { 0.05 * y[v - n].abs().max(0.2 * ynorm) }).collect();

    let raw = |scale: f64| -> Result<f64> {
        let mut pt: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        stencil_sum(ast, guard, &orders, &steps, scale, 0, &mut pt, n)
    };
    let d0 = raw(1.0)?;
    let d1 = raw(0.5)?;
    let d2 = raw(0.25)?;
    let r1a = (4.0 * d1 - d0) / 3.0;
    let r1b = (4.0 * d2 - d1) / 3.0;
    Ok((16.0 * r1b - r1a) / 15.0)
}

fn stencil(m: u8) -> &'static [(i32, f64)] {
    match m {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
    }
}

#[allow(clippy::too_many_arguments)]
fn stencil_sum(
    ast: &Expr,
    guard: Option<&Expr>,
    orders: &[u8],
    steps: &[f64],
    scale: f64,
    var: usize,
    pt: &mut Vec<f64>,
    n: usize,
) -> Result<f64> {
    if var == orders.len() {
        if let Some(g) = guard {
            if g.eval(&pt[..n], &[])? <= 0.0 {
                return Err(Error::StencilLeavesDomain);
            }
        }
        return ast.eval(&pt[..n], &pt[n..]);
    }
    let m = orders[var];
    if m == 0 {
        return stencil_sum(ast, guard, orders, steps, scale, var + 1, pt, n);
    }
    let h = steps[var] * scale;
    let orig = pt[var];
    let mut acc = 0.0;
    for &(off, w) in stencil(m) {
        pt[var] = orig + off as f64 * h;
        acc += w * stencil_sum(ast, guard, orders, steps, scale, var + 1, pt, n)?;
    }
    pt[var] = orig;
    Ok(acc / h.powi(m as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn spec(n: usize, ox: usize, oy: usize) -> JetSpec {
        JetSpec::new(n, ox, oy).unwrap()
    }

    #[test]
    fn polynomial_coefficients() {
        let e = parse_expr("x1*y1^2", 1).unwrap();
        let j = jet_of(&e, &[2.0], &[3.0], spec(1, 1, 2)).unwrap();
        assert_eq!(j.coeff(&MultiIndex::y_only(&[2])).unwrap(), 2.0);
        assert_eq!(j.partial(&MultiIndex::new(&[1], &[1])).unwrap(), 6.0);
        assert_eq!(j.value(), 18.0);
    }

    #[test]
    fn euclidean_hessian_is_identity() {
        let e = parse_expr("0.5*(y1^2+y2^2)", 2).unwrap();
        let j = jet_of(&e, &[0.3, -0.2], &[1.0, 2.0], spec(2, 0, 2)).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut y = [0u8; 2];
                y[a] += 1;
                y[b] += 1;
                let v = j.partial(&MultiIndex::y_only(&y)).unwrap();
                assert_eq!(v, if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn exp_mixed_partial() {
        let e = parse_expr("exp(x1)*y1", 1).unwrap();
        let j = jet_of(&e, &[0.0], &[1.0], spec(1, 1, 1)).unwrap();
        assert!((j.partial(&MultiIndex::new(&[1], &[1])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_second_derivative() {
        let e = parse_expr("sqrt(y1^2+y2^2)", 2).unwrap();
        let j = jet_of(&e, &[0.0, 0.0], &[0.0, 1.0], spec(2, 0, 2)).unwrap();
        assert!((j.partial(&MultiIndex::y_only(&[2, 0])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn out_of_spec_partial() {
        let e = parse_expr("y1^3", 1).unwrap();
        let j = jet_of(&e, &[0.0], &[1.0], spec(1, 0, 2)).unwrap();
        assert!(matches!(j.partial(&MultiIndex::y_only(&[3])), Err(Error::OrderOutOfSpec(_))));
        assert!(matches!(JetSpec::new(2, 4, 2), Err(Error::TruncationOrderExceeded(_))));
    }

    #[test]
    fn abs_at_zero_rejected_only_when_differentiated() {
        let e = parse_expr("abs(y1)", 1).unwrap();
        assert!(jet_of(&e, &[0.0], &[0.0], spec(1, 0, 1)).is_err());
        assert_eq!(jet_of(&e, &[0.0], &[0.0], spec(1, 0, 0)).unwrap().value(), 0.0);
        let j = jet_of(&e, &[0.0], &[-2.0], spec(1, 0, 2)).unwrap();
        assert_eq!(j.partial(&MultiIndex::y_only(&[1])).unwrap(), -1.0);
    }

    #[test]
    fn fd_oracle_matches_polynomial() {
        let e = parse_expr("x1*y1^3", 1).unwrap();
        let j = jet_of(&e, &[0.7], &[1.3], spec(1, 1, 3)).unwrap();
        for alpha in [
            MultiIndex::new(&[1], &[0]),
            MultiIndex::new(&[0], &[2]),
            MultiIndex::new(&[1], &[2]),
            MultiIndex::new(&[1], &[3]),
        ] {
            let a = j.partial(&alpha).unwrap();
            let b = fd_oracle(&e, None, &[0.7], &[1.3], &alpha).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{alpha:?}: {a} vs {b}");
        }
    }

    #[test]
    fn fd_oracle_guard() {
        let e = parse_expr("sqrt(y1^2+y2^2)/(1-x1^2-x2^2)", 2).unwrap();
        let g = parse_expr("1-x1^2-x2^2", 2).unwrap();
        let r = fd_oracle(&e, Some(&g), &[0.999, 0.0], &[1.0, 0.0], &MultiIndex::new(&[1, 0], &[]));
        assert_eq!(r, Err(Error::StencilLeavesDomain));
    }

    #[test]
    fn truncation_is_prefix() {
        let e = parse_expr("exp(x1+x2*y1)*y2^2", 2).unwrap();
        let big = jet_of(&e, &[0.1, 0.2], &[0.3, 0.4], spec(2, 2, 4)).unwrap();
        let small = jet_of(&e, &[0.1, 0.2], &[0.3, 0.4], spec(2, 1, 2)).unwrap();
        let t = big.truncate(1, 2);
        for (a, b) in t.coeffs().iter().zip(small.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn coefficient_count_matches_space() {
        let s = spec(3, 2, 6);
        assert_eq!(coefficient_count(s), JetSpace::get(3, 2, 6).len());
        assert_eq!(coefficient_count(s), 10 * 84);
    }
}
