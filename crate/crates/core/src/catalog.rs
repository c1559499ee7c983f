//! Built-in metrics, vector fields and seeded sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_metric, parse_vector_field, MetricField, VectorFieldExpr};
use crate::geometry::Geometry;
use crate::tensor::TangentSample;

/// Known geometric properties of a catalog metric.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Properties {
    pub riemannian: bool,
    pub berwald: bool,
    pub landsberg: bool,
    pub locally_minkowski: bool,
    pub isotropic_s: bool,
    /// Constant flag curvature, when known.
    pub constant_flag: Option<f64>,
    /// `λ̂/F` in `J + λ̂ I = 0`, when known and `I ≠ 0`.
    pub iml_constant: Option<f64>,
}

/// Where samples are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    /// Half-width of the sampling box (or radius when `ball`).
    pub radius: f64,
    pub ball: bool,
    /// Minimum `|y_i| / |y|` for every component.
    pub axis_margin: f64,
}

impl Default for Region {
    fn default() -> Self {
        Region { radius: 0.5, ball: false, axis_margin: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub label: String,
    #[serde(serialize_with = "ser_metric")]
    pub metric: MetricField,
    pub properties: Properties,
    pub region: Region,
}

fn ser_metric<S: serde::Serializer>(m: &MetricField, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.f.to_string())
}

fn check_n(n: usize) -> Result<()> {
    if !(1..=crate::jets::MAX_DIM).contains(&n) {
        return Err(Error::InvalidParameter(format!("dimension {n} outside 1..={}", crate::jets::MAX_DIM)));
    }
    Ok(())
}

fn join(n: usize, f: impl Fn(usize) -> String, sep: &str) -> String {
    (1..=n).map(f).collect::<Vec<_>>().join(sep)
}

fn norm_y(n: usize) -> String {
    format!("sqrt({})", join(n, |i| format!("y{i}^2"), "+"))
}

pub fn euclidean(n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    Ok(CatalogEntry {
        label: "euclidean".into(),
        metric: parse_metric(&norm_y(n), n)?.with_label("euclidean"),
        properties: Properties {
            riemannian: true,
            berwald: true,
            landsberg: true,
            locally_minkowski: true,
            isotropic_s: true,
            constant_flag: Some(0.0),
            iml_constant: None,
        },
        region: Region { radius: 1.0, ..Region::default() },
    })
}

/// Round sphere of radius 1 in stereographic coordinates, `F = 2|y|/(1+|x|²)`.
pub fn sphere_chart(n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    let src = format!("2*{}/(1+{})", norm_y(n), join(n, |i| format!("x{i}^2"), "+"));
    Ok(CatalogEntry {
        label: "sphere_chart".into(),
        metric: parse_metric(&src, n)?.with_label("sphere_chart"),
        properties: Properties {
            riemannian: true,
            berwald: true,
            landsberg: true,
            locally_minkowski: false,
            isotropic_s: true,
            constant_flag: if n >= 2 { Some(1.0) } else { None },
            iml_constant: None,
        },
        region: Region { radius: 1.0, ..Region::default() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMode {
    /// `β = b_i y^i` with constant `b`.
    Constant,
    /// `b_1 + 0.2 x_2`, `b_2 + 0.1 x_1²` in the first two components; `dβ ≠ 0`.
    Polynomial,
}

/// Randers metric `|y| + b_i(x) y^i`.
pub fn randers(n: usize, b: &[f64], mode: BetaMode) -> Result<CatalogEntry> {
    check_n(n)?;
    if b.len() != n {
        return Err(Error::InvalidParameter(format!("Randers covector has {} components, need {n}", b.len())));
    }
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bn >= 1.0 {
        return Err(Error::InvalidParameter(format!("Randers covector norm {bn} must be < 1")));
    }
    let coeff = |i: usize| -> String {
        let base = format!("{:?}", b[i - 1]);
        match (mode, i) {
            (BetaMode::Polynomial, 1) if n >= 2 => format!("({base}+0.2*x2)"),
            (BetaMode::Polynomial, 1) => format!("({base}+0.1*x1^2)"),
            (BetaMode::Polynomial, 2) => format!("({base}+0.1*x1^2)"),
            _ => format!("({base})"),
        }
    };
    let beta = join(n, |i| format!("{}*y{i}", coeff(i)), "+");
    let src = format!("{}+{beta}", norm_y(n));
    let label = match mode {
        BetaMode::Constant => "randers",
        BetaMode::Polynomial => "randers_poly",
    };
    let mut metric = parse_metric(&src, n)?.with_label(label);
    let mut region = Region::default();
    let constant = mode == BetaMode::Constant;
    if !constant {
        metric = metric.with_guard(&format!("1-({})", join(n, |i| format!("{}^2", coeff(i)), "+")))?;
        region.radius = 0.5;
    }
    Ok(CatalogEntry {
        label: label.into(),
        metric,
        properties: Properties {
            riemannian: false,
            berwald: constant,
            landsberg: constant,
            locally_minkowski: constant,
            isotropic_s: constant,
            constant_flag: if constant { Some(0.0) } else { None },
            iml_constant: if constant && n >= 2 { Some(0.0) } else { None },
        },
        region,
    })
}

/// Funk metric on the unit ball,
/// `F = (√((1−|x|²)|y|² + ⟨x,y⟩²) + ⟨x,y⟩)/(1−|x|²)`.
pub fn funk(n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    let r2 = format!("(1-{})", join(n, |i| format!("x{i}^2"), "-"));
    let xy = format!("({})", join(n, |i| format!("x{i}*y{i}"), "+"));
    let yy = format!("({})", join(n, |i| format!("y{i}^2"), "+"));
    let src = format!("(sqrt({r2}*{yy}+{xy}^2)+{xy})/{r2}");
    Ok(CatalogEntry {
        label: "funk".into(),
        metric: parse_metric(&src, n)?.with_label("funk").with_guard(&r2)?,
        properties: Properties {
            riemannian: false,
            berwald: false,
            landsberg: false,
            locally_minkowski: false,
            isotropic_s: true,
            constant_flag: if n >= 2 { Some(-0.25) } else { None },
            iml_constant: if n >= 2 { Some(0.5) } else { None },
        },
        region: Region { radius: 0.6, ball: true, axis_margin: 0.0 },
    })
}

/// `F = (Σ y_i⁴)^{1/4}`; strongly convex away from the coordinate axes.
pub fn quartic_minkowski(n: usize) -> Result<CatalogEntry> {
    check_n(n)?;
    let src = format!("pow({}, 0.25)", join(n, |i| format!("y{i}^4"), "+"));
    Ok(CatalogEntry {
        label: "quartic_minkowski".into(),
        metric: parse_metric(&src, n)?.with_label("quartic_minkowski"),
        properties: Properties {
            riemannian: n == 1,
            berwald: true,
            landsberg: true,
            locally_minkowski: true,
            isotropic_s: true,
            constant_flag: Some(0.0),
            iml_constant: if n >= 2 { Some(0.0) } else { None },
        },
        region: Region { radius: 1.0, ball: false, axis_margin: 0.05 },
    })
}

pub const METRIC_LABELS: [&str; 6] = ["euclidean", "sphere_chart", "randers", "randers_poly", "funk", "quartic_minkowski"];

/// Looks up a catalog metric by label with default parameters.
pub fn metric(label: &str, n: usize) -> Result<CatalogEntry> {
    let b = |n: usize| {
        let mut b = vec![0.0; n];
        b[0] = 0.3;
        b
    };
    match label {
        "euclidean" => euclidean(n),
        "sphere_chart" | "sphere" => sphere_chart(n),
        "randers" => randers(n, &b(n), BetaMode::Constant),
        "randers_poly" => randers(n, &b(n), BetaMode::Polynomial),
        "funk" => funk(n),
        "quartic_minkowski" | "quartic" => quartic_minkowski(n),
        other => Err(Error::InvalidParameter(format!("unknown catalog metric `{other}`"))),
    }
}

/// A labelled vector field on the base.
#[derive(Debug, Clone, Serialize)]
pub struct NamedField {
    pub label: String,
    #[serde(serialize_with = "ser_field")]
    pub field: VectorFieldExpr,
}

fn ser_field<S: serde::Serializer>(f: &VectorFieldExpr, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(f.components.len()))?;
    for c in &f.components {
        seq.serialize_element(&c.to_string())?;
    }
    seq.end()
}

fn named(label: &str, comps: Vec<String>, n: usize) -> Result<NamedField> {
    Ok(NamedField { label: label.into(), field: parse_vector_field(&comps, n)? })
}

/// Rotation in the `x1, x2` plane.
pub fn rotation(n: usize) -> Result<NamedField> {
    if n < 2 {
        return Err(Error::InvalidParameter("rotation needs n ≥ 2".into()));
    }
    let mut c = vec!["0".to_string(); n];
    c[0] = "-x2".into();
    c[1] = "x1".into();
    named("rotation", c, n)
}

/// Unit translation along axis `axis` (0-based).
pub fn translation(n: usize, axis: usize) -> Result<NamedField> {
    let mut c = vec!["0".to_string(); n];
    c[axis] = "1".into();
    let label = if axis == 0 { "translation".to_string() } else { format!("translation-{}", axis + 1) };
    named(&label, c, n)
}

pub fn dilation(n: usize) -> Result<NamedField> {
    named("dilation", (1..=n).map(|i| format!("x{i}")).collect(), n)
}

/// `X^i = a^i + b^i_j x^j + x^i (c_j x^j)`.
pub fn projective_family(n: usize, a: &[f64], b: &[Vec<f64>], c: &[f64]) -> Result<NamedField> {
    let cx = join(n, |j| format!("{:?}*x{j}", c[j - 1]), "+");
    let comps = (1..=n)
        .map(|i| {
            let lin = join(n, |j| format!("{:?}*x{j}", b[i - 1][j - 1]), "+");
            format!("{:?}+{lin}+x{i}*({cx})", a[i - 1])
        })
        .collect();
    named("c-projective", comps, n)
}

/// The projective family with `a = b = 0`, `c = e_1`.
pub fn c_projective(n: usize) -> Result<NamedField> {
    let mut c = vec![0.0; n];
    c[0] = 1.0;
    projective_family(n, &vec![0.0; n], &vec![vec![0.0; n]; n], &c)
}

/// A fixed cubic polynomial field with pseudo-random coefficients.
pub fn random_cubic(n: usize) -> Result<NamedField> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CAFE);
    let mut monos: Vec<Vec<usize>> = vec![vec![]];
    for deg in 1..=3 {
        let mut next = Vec::new();
        for m in monos.iter().filter(|m| m.len() == deg - 1) {
            let start = m.last().copied().unwrap_or(1);
            for v in start..=n {
                let mut mm = m.clone();
                mm.push(v);
                next.push(mm);
            }
        }
        monos.extend(next);
    }
    let comps = (0..n)
        .map(|_| {
            monos
                .iter()
                .map(|m| {
                    let coef = ((rng.gen::<f64>() - 0.5) * 1000.0).round() / 1000.0;
                    let body = if m.is_empty() {
                        "1".to_string()
                    } else {
                        m.iter().map(|v| format!("x{v}")).collect::<Vec<_>>().join("*")
                    };
                    format!("({coef:?})*{body}")
                })
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    named("random-cubic", comps, n)
}

pub const FIELD_LABELS: [&str; 5] = ["rotation", "translation", "dilation", "c-projective", "random-cubic"];

/// Looks up a catalog vector field.
pub fn vector_field(label: &str, n: usize) -> Result<NamedField> {
    match label {
        "rotation" => rotation(n),
        "translation" => translation(n, 0),
        "dilation" => dilation(n),
        "c-projective" | "c-family" => c_projective(n),
        "random-cubic" => random_cubic(n),
        other => {
            if let Some(k) = other.strip_prefix("translation-").and_then(|s| s.parse::<usize>().ok()) {
                if (1..=n).contains(&k) {
                    return translation(n, k - 1);
                }
            }
            Err(Error::InvalidParameter(format!("unknown catalog vector field `{other}`")))
        }
    }
}

/// Every catalog field that makes sense in dimension `n`.
pub fn catalog_vector_fields(n: usize) -> Result<Vec<NamedField>> {
    let mut out = Vec::new();
    if n >= 2 {
        out.push(rotation(n)?);
    }
    for k in 0..n {
        out.push(translation(n, k)?);
    }
    out.push(dilation(n)?);
    out.push(c_projective(n)?);
    out.push(random_cubic(n)?);
    Ok(out)
}

/// Draws `count` accepted samples: guard margin ≥ 1e-3, `F > 0` and a
/// positive-definite fundamental tensor.
pub fn sample_points(metric: &MetricField, region: &Region, count: usize, seed: u64) -> Result<Vec<TangentSample>> {
    let n = metric.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_attempts = 200 * count.max(1);
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let x: Vec<f64> = (0..n).map(|_| region.radius * (2.0 * rng.gen::<f64>() - 1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        if region.ball && x.iter().map(|v| v * v).sum::<f64>() > region.radius * region.radius {
            continue;
        }
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ynorm < 0.3 || y.iter().any(|v| v.abs() < region.axis_margin * ynorm) {
            continue;
        }
        let margin = match metric.guard_value(&x) {
            Ok(m) => m,
            Err(_) => continue,
        };
        if !(margin >= 1e-3) {
            continue;
        }
        let s = TangentSample { x, y, margin };
        if Geometry::new(metric, &s, 0, 2).is_err() {
            continue;
        }
        out.push(s);
    }
    if out.len() < count {
        return Err(Error::InsufficientSamples { got: out.len(), need: count });
    }
    Ok(out)
}

impl CatalogEntry {
    pub fn samples(&self, count: usize, seed: u64) -> Result<Vec<TangentSample>> {
        sample_points(&self.metric, &self.region, count, seed)
    }
}
