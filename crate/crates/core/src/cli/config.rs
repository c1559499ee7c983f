//! Run configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{self, CatalogEntry, NamedField, Properties, Region};
use crate::error::{Error, Result};
use crate::expr::{parse_metric, parse_vector_field};

/// Residual tolerances by how a quantity is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TierTolerances {
    /// Quantities read directly off jets.
    pub jet: f64,
    /// Quantities involving a flow-pullback derivative.
    pub flow: f64,
    /// Quantities involving indicatrix quadrature.
    pub quadrature: f64,
}

impl Default for TierTolerances {
    fn default() -> Self {
        TierTolerances { jet: 1e-8, flow: 1e-5, quadrature: 1e-3 }
    }
}

impl TierTolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.jet) && ok(self.flow) && ok(self.quadrature)) {
            return Err(Error::Config("tolerances must be positive and finite".into()));
        }
        if !(self.jet <= self.flow && self.flow <= self.quadrature) {
            return Err(Error::Config(format!(
                "tolerance tiers must satisfy jet ≤ flow ≤ quadrature (got {:e}, {:e}, {:e})",
                self.jet, self.flow, self.quadrature
            )));
        }
        Ok(())
    }
}

/// Where the Finsler function comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSource {
    /// Catalog label.
    pub catalog: Option<String>,
    /// Inline expression for `F`.
    pub expr: Option<String>,
    /// Metric file (TOML with `f`, optional `guard`, `label`, `dim`).
    pub file: Option<PathBuf>,
    /// Domain guard for inline expressions.
    pub guard: Option<String>,
    /// Covector for the Randers catalog entries.
    pub randers_b: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    f: String,
    guard: Option<String>,
    label: Option<String>,
    dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicConfig {
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub time: f64,
    pub steps: usize,
    /// `flag`, `ricci`, `s`, `tau` or `none`.
    pub probe: String,
    /// Random flags per point for the flag-curvature probe.
    pub flags: usize,
    /// Keep every `stride`-th point in the CSV and the probe.
    pub stride: Option<usize>,
    /// Integrate this vector field's integral curve instead of a geodesic.
    pub along: Option<String>,
    pub csv: Option<PathBuf>,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        GeodesicConfig {
            x0: None,
            y0: None,
            time: 1.0,
            steps: 1000,
            probe: "flag".into(),
            flags: 5,
            stride: None,
            along: None,
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub metric: MetricSource,
    pub dim: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Catalog field labels or `[c1; c2; …]` component lists.
    pub fields: Vec<String>,
    /// Random flags per sample in reports.
    pub flags: usize,
    pub tolerances: TierTolerances,
    pub output: Option<PathBuf>,
    pub geodesic: GeodesicConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: MetricSource::default(),
            dim: None,
            samples: 20,
            seed: 1,
            fields: Vec::new(),
            flags: 5,
            tolerances: TierTolerances::default(),
            output: None,
            geodesic: GeodesicConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn dim(&self) -> Result<usize> {
        self.dim.ok_or_else(|| Error::Config("missing dimension: pass --dim N or set `dim` in the config".into()))
    }

    /// Resolves the metric source into a catalog-style entry.
    pub fn metric_entry(&self) -> Result<CatalogEntry> {
        let m = &self.metric;
        let sources = [m.catalog.is_some(), m.expr.is_some(), m.file.is_some()].iter().filter(|b| **b).count();
        if sources != 1 {
            return Err(Error::Config("give exactly one of --metric, --metric-expr, --metric-file".into()));
        }
        if let Some(path) = &m.file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read metric file {}: {e}", path.display())))?;
            let mf: MetricFile =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
            let n = match (self.dim, mf.dim) {
                (Some(n), _) => n,
                (None, Some(n)) => n,
                (None, None) => self.dim()?,
            };
            let label = mf.label.unwrap_or_else(|| "custom".into());
            return custom(&mf.f, mf.guard.as_deref(), &label, n);
        }
        let n = self.dim()?;
        if let Some(src) = &m.expr {
            return custom(src, m.guard.as_deref(), "custom", n);
        }
        let label = m.catalog.as_deref().unwrap_or_default();
        match (&m.randers_b, label) {
            (Some(b), "randers") => catalog::randers(n, b, catalog::BetaMode::Constant),
            (Some(b), "randers_poly") => catalog::randers(n, b, catalog::BetaMode::Polynomial),
            (Some(_), _) => Err(Error::Config("randers_b only applies to randers and randers_poly".into())),
            (None, _) => catalog::metric(label, n),
        }
    }

    /// Resolves the configured fields; an empty list means every catalog field.
    pub fn field_list(&self, n: usize) -> Result<(Vec<NamedField>, bool)> {
        if self.fields.is_empty() {
            return Ok((catalog::catalog_vector_fields(n)?, false));
        }
        let fields = self.fields.iter().map(|f| parse_field(f, n)).collect::<Result<Vec<_>>>()?;
        Ok((fields, true))
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.geodesic.steps == 0 {
            return Err(Error::Config("geodesic steps must be at least 1".into()));
        }
        Ok(())
    }
}

fn custom(src: &str, guard: Option<&str>, label: &str, n: usize) -> Result<CatalogEntry> {
    let mut metric = parse_metric(src, n)?.with_label(label);
    if let Some(g) = guard {
        metric = metric.with_guard(g)?;
    }
    Ok(CatalogEntry { label: label.into(), metric, properties: Properties::default(), region: Region::default() })
}

/// A catalog field label, or components `[c1; c2; …]`.
pub fn parse_field(spec: &str, n: usize) -> Result<NamedField> {
    let t = spec.trim();
    if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let comps: Vec<&str> = inner.split(';').map(str::trim).collect();
        return Ok(NamedField { label: t.to_string(), field: parse_vector_field(&comps, n)? });
    }
    catalog::vector_field(t, n)
}
