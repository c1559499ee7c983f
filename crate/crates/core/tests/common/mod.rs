//! Finite-difference oracles that bypass the jet pipeline.
#![allow(dead_code)]

use finslerlab::expr::{parse_expr, Expr, MetricField};
use finslerlab::jets::{fd_oracle, MultiIndex};
use finslerlab::tensor::{index_tuples, TensorValue};
use nalgebra::DMatrix;

pub fn alpha(n: usize, dx: &[usize], dy: &[usize]) -> MultiIndex {
    let mut x = vec![0u8; n];
    let mut y = vec![0u8; n];
    for &k in dx {
        x[k] += 1;
    }
    for &k in dy {
        y[k] += 1;
    }
    MultiIndex::new(&x, &y)
}

pub struct Oracle {
    pub n: usize,
    pub f: Expr,
    pub f2: Expr,
    pub guard: Option<Expr>,
}

impl Oracle {
    pub fn new(m: &MetricField) -> Self {
        let f2 = parse_expr(&format!("({})^2", m.f), m.n).unwrap();
        Oracle { n: m.n, f: m.f.clone(), f2, guard: m.guard.clone() }
    }

    pub fn d(&self, e: &Expr, x: &[f64], y: &[f64], dx: &[usize], dy: &[usize]) -> f64 {
        fd_oracle(e, self.guard.as_ref(), x, y, &alpha(self.n, dx, dy)).unwrap()
    }

    pub fn fundamental(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| 0.5 * self.d(&self.f2, x, y, &[], &[i, j]))
    }

    /// `G^i = ¼ g^il ([F²]_{x^k y^l} y^k − [F²]_{x^l})`.
    pub fn spray(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let gi = self.fundamental(x, y).try_inverse().unwrap();
        let w: Vec<f64> = (0..n)
            .map(|l| {
                let mixed: f64 = (0..n).map(|k| self.d(&self.f2, x, y, &[k], &[l]) * y[k]).sum();
                mixed - self.d(&self.f2, x, y, &[l], &[])
            })
            .collect();
        (0..n).map(|i| 0.25 * (0..n).map(|l| gi[(i, l)] * w[l]).sum::<f64>()).collect()
    }
}

/// `R^i_k` from explicit spray expressions `G^i(x, y)`, every derivative by
/// finite differences.
pub fn riemann_from_spray(g: &[Expr], guard: Option<&Expr>, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let n = g.len();
    let d = |e: &Expr, dx: &[usize], dy: &[usize]| fd_oracle(e, guard, x, y, &alpha(n, dx, dy)).unwrap();
    let gv: Vec<f64> = g.iter().map(|e| e.eval(x, y).unwrap()).collect();
    let gy = DMatrix::from_fn(n, n, |i, j| d(&g[i], &[], &[j]));
    DMatrix::from_fn(n, n, |i, k| {
        let mut r = 2.0 * d(&g[i], &[k], &[]);
        for j in 0..n {
            r -= y[j] * d(&g[i], &[j], &[k]);
            r += 2.0 * gv[j] * d(&g[i], &[], &[j, k]);
            r -= gy[(i, j)] * gy[(j, k)];
        }
        r
    })
}

/// `g_y(R v, v) / (g(y,y) g(v,v) − g(y,v)²)`.
pub fn flag_from(r: &DMatrix<f64>, g: &DMatrix<f64>, y: &[f64], v: &[f64]) -> f64 {
    let n = y.len();
    let ip = |a: &[f64], b: &[f64]| -> f64 { (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g[(i, j)] * a[i] * b[j]).sum() };
    let rv: Vec<f64> = (0..n).map(|i| (0..n).map(|k| r[(i, k)] * v[k]).sum()).collect();
    ip(&rv, v) / (ip(y, y) * ip(v, v) - ip(y, v).powi(2))
}

/// Christoffel symbols `γ^i_jk` of the conformal metric `4δ/(1+|x|²)²`.
pub fn sphere_christoffel(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let s = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
    let phi: Vec<f64> = x.iter().map(|v| -2.0 * v / s).collect();
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                if i == j {
                    v += phi[k];
                }
                if i == k {
                    v += phi[j];
                }
                if j == k {
                    v -= phi[i];
                }
                out[(i * n + j) * n + k] = v;
            }
        }
    }
    out
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len().max(2) - 1) as f64;
    (m, var.sqrt())
}

/// Largest `|T(…a…b…) + T(…b…a…)|`.
pub fn antisymmetry(t: &TensorValue, a: usize, b: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for idx in index_tuples(t.n(), t.rank()) {
        let mut s = idx.clone();
        s.swap(a, b);
        worst = worst.max((t.get(&idx) + t.get(&s)).abs());
    }
    worst
}

/// Expected verdicts in the order projective, affine, Killing, I, E, C, H;
/// `?` marks entries with no independent ground truth.
pub const MATRIX: [(&str, &str, &str); 30] = [
    ("euclidean", "rotation", "YYYYYYY"),
    ("euclidean", "translation", "YYYYYYY"),
    ("euclidean", "dilation", "YYnYYYY"),
    ("euclidean", "c-projective", "YnnYYYY"),
    ("euclidean", "random-cubic", "nnnnnnn"),
    ("sphere_chart", "rotation", "YYYYYYY"),
    ("sphere_chart", "translation", "nnnnnnn"),
    ("sphere_chart", "dilation", "nnnnnnn"),
    ("sphere_chart", "c-projective", "nnnnnnn"),
    ("sphere_chart", "random-cubic", "nnnnnnn"),
    ("funk", "rotation", "YYYYYYY"),
    ("funk", "translation", "Ynnnn??"),
    ("funk", "dilation", "Ynn????"),
    ("funk", "c-projective", "Ynnnn??"),
    ("funk", "random-cubic", "nnnnnnn"),
    ("randers", "rotation", "YYnnYYY"),
    ("randers", "translation", "YYYYYYY"),
    ("randers", "dilation", "YYnYYYY"),
    ("randers", "c-projective", "YnnnYYY"),
    ("randers", "random-cubic", "nnnnnnn"),
    ("quartic_minkowski", "rotation", "YYnnYYY"),
    ("quartic_minkowski", "translation", "YYYYYYY"),
    ("quartic_minkowski", "dilation", "YYnYYYY"),
    ("quartic_minkowski", "c-projective", "YnnnYYY"),
    ("quartic_minkowski", "random-cubic", "nnnnnnn"),
    ("randers_poly", "rotation", "nnnnnnn"),
    ("randers_poly", "translation", "nnnnnnn"),
    ("randers_poly", "dilation", "nnnnnnn"),
    ("randers_poly", "c-projective", "nnnnnnn"),
    ("randers_poly", "random-cubic", "nnnnnnn"),
];
