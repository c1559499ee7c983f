use serde::Serialize;

use crate::jets::Jet;

/// Index position of a tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Upper,
    Lower,
}

pub use Slot::{Lower, Upper};

/// A point of the slit tangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Value of the domain guard at `x` (`+inf` without a guard).
    pub margin: f64,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        TangentSample { x, y, margin: f64::INFINITY }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Row-major offset of a multi-index.
pub fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// All index tuples of length `rank` in row-major order.
pub fn index_tuples(n: usize, rank: usize) -> Vec<Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total)
        .map(|mut k| {
            let mut idx = vec![0; rank];
            for slot in (0..rank).rev() {
                idx[slot] = k % n;
                k /= n;
            }
            idx
        })
        .collect()
}

/// Components of a tensor at a base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorValue {
    pub base: TangentSample,
    pub variance: Vec<Slot>,
    pub components: Vec<f64>,
}

impl TensorValue {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[flat(self.n(), idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &TensorValue) -> f64 {
        self.components.iter().zip(&other.components).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest deviation from invariance under swapping slots `a` and `b`.
    pub fn asymmetry(&self, a: usize, b: usize) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for idx in index_tuples(n, self.rank()) {
            let mut s = idx.clone();
            s.swap(a, b);
            worst = worst.max((self.get(&idx) - self.get(&s)).abs());
        }
        worst
    }
}

/// Jets of every component of a tensor field at a sample.
#[derive(Debug, Clone)]
pub struct JetTensor {
    pub n: usize,
    pub variance: Vec<Slot>,
    pub comps: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(n: usize, variance: &[Slot], mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let comps = index_tuples(n, variance.len()).iter().map(|idx| f(idx)).collect();
        JetTensor { n, variance: variance.to_vec(), comps }
    }

    pub fn scalar(n: usize, j: Jet) -> Self {
        JetTensor { n, variance: vec![], comps: vec![j] }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn at(&self, idx: &[usize]) -> &Jet {
        &self.comps[flat(self.n, idx)]
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetTensor {
        JetTensor { n: self.n, variance: self.variance.clone(), comps: self.comps.iter().map(f).collect() }
    }

    pub fn zip(&self, other: &JetTensor, f: impl Fn(&Jet, &Jet) -> Jet) -> JetTensor {
        debug_assert_eq!(self.comps.len(), other.comps.len());
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &JetTensor) -> JetTensor {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &JetTensor) -> JetTensor {
        self.zip(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> JetTensor {
        self.map(|j| j.scale(s))
    }

    /// `∂/∂y^k` of every component, appended as a new lower slot.
    pub fn vertical(&self) -> JetTensor {
        self.derivative(false)
    }

    /// `∂/∂x^k` of every component, appended as a new lower slot.
    pub fn horizontal_partial(&self) -> JetTensor {
        self.derivative(true)
    }

    fn derivative(&self, in_x: bool) -> JetTensor {
        let n = self.n;
        let mut variance = self.variance.clone();
        variance.push(Lower);
        let mut comps = Vec::with_capacity(self.comps.len() * n);
        for c in &self.comps {
            for k in 0..n {
                comps.push(if in_x { c.derivative_x(k) } else { c.derivative_y(k) });
            }
        }
        JetTensor { n, variance, comps }
    }

    /// Contracts slot `slot` with the vector `v` (jets).
    pub fn contract_vec(&self, slot: usize, v: &[Jet]) -> JetTensor {
        let n = self.n;
        let mut variance = self.variance.clone();
        variance.remove(slot);
        let build = |idx: &[usize]| {
            let mut full: Vec<usize> = idx.to_vec();
            full.insert(slot, 0);
            let mut acc = self.at(&full).mul_jet(&v[0]);
            for (r, vr) in v.iter().enumerate().skip(1) {
                full[slot] = r;
                acc = &acc + &self.at(&full).mul_jet(vr);
            }
            acc
        };
        JetTensor::from_fn(n, &variance, build)
    }

    /// Contraction of slots `a < b`.
    pub fn trace(&self, a: usize, b: usize) -> JetTensor {
        assert!(a < b);
        let n = self.n;
        let mut variance = self.variance.clone();
        variance.remove(b);
        variance.remove(a);
        let build = |idx: &[usize]| {
            let mut full: Vec<usize> = idx.to_vec();
            full.insert(a, 0);
            full.insert(b, 0);
            let mut acc = self.at(&full).clone();
            for r in 1..n {
                full[a] = r;
                full[b] = r;
                acc = &acc + self.at(&full);
            }
            acc
        };
        JetTensor::from_fn(n, &variance, build)
    }

    /// Reorders slots: new slot `s` is old slot `perm[s]`.
    pub fn permute(&self, perm: &[usize]) -> JetTensor {
        let variance: Vec<Slot> = perm.iter().map(|&p| self.variance[p]).collect();
        JetTensor::from_fn(self.n, &variance, |idx| {
            let mut old = vec![0; idx.len()];
            for (s, &p) in perm.iter().enumerate() {
                old[p] = idx[s];
            }
            self.at(&old).clone()
        })
    }

    pub fn value(&self, base: &TangentSample) -> TensorValue {
        TensorValue {
            base: base.clone(),
            variance: self.variance.clone(),
            components: self.comps.iter().map(|c| c.value()).collect(),
        }
    }
}
