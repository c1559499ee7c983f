//! The `finslerlab` command line: configuration, reports and the
//! verification harness.
//!
//! Exit statuses: 0 pass, 1 identity failure, 2 configuration error,
//! 3 domain or numerical error.

pub mod config;
pub mod harness;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use crate::catalog::{self, CatalogEntry};
use crate::error::Error;
use crate::geodesics::{self, ProbeStats, Quantity, Trajectory};
use crate::symmetry::{self, ClassificationReport, Tolerances};
pub use config::{RunConfig, TierTolerances};
pub use harness::{Harness, Located, Row, Suite, SuiteOutcome};
use report::{ReportDocument, Status, Timings};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit status for an engine error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::IndexOutOfRange { .. }
        | Error::YVariableInVectorField { .. }
        | Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Parser, Debug)]
#[command(name = "finslerlab", version, about = "Numerical Finsler geometry engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog metric label.
    #[arg(long)]
    metric: Option<String>,
    /// Inline expression for F in x1.., y1..
    #[arg(long = "metric-expr", allow_hyphen_values = true)]
    metric_expr: Option<String>,
    /// Metric file (TOML with `f`, optional `guard`, `label`, `dim`).
    #[arg(long = "metric-file")]
    metric_file: Option<PathBuf>,
    /// Domain guard for --metric-expr (positive inside the domain).
    #[arg(long, allow_hyphen_values = true)]
    guard: Option<String>,
    /// Covector for the Randers catalog entries, comma separated.
    #[arg(long = "randers-b", value_delimiter = ',', allow_hyphen_values = true)]
    randers_b: Option<Vec<f64>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Vector field: catalog label or `[c1; c2; …]`; repeatable.
    #[arg(long = "field", allow_hyphen_values = true)]
    fields: Vec<String>,
    #[arg(long = "tol-jet")]
    tol_jet: Option<f64>,
    #[arg(long = "tol-flow")]
    tol_flow: Option<f64>,
    #[arg(long = "tol-quadrature")]
    tol_quadrature: Option<f64>,
    /// Write the JSON report document here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the JSON report document instead of the text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone, Default)]
struct GeodesicArgs {
    /// Initial point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Initial velocity, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y0: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    time: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// flag, ricci, s, tau or none.
    #[arg(long)]
    probe: Option<String>,
    /// Random flags per point for the flag-curvature probe.
    #[arg(long)]
    flags: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Follow this vector field's integral curve instead of a geodesic.
    #[arg(long, allow_hyphen_values = true)]
    along: Option<String>,
    /// Trajectory CSV path (stdout when absent and --json is not given).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump every tensor at seeded samples.
    Report {
        #[command(flatten)]
        common: Common,
        /// Random flags per sample.
        #[arg(long)]
        flags: Option<usize>,
    },
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Classify vector fields (projective, affine, Killing, I/E/C/H).
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a geodesic or an integral curve and probe it.
    Geodesic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        geo: GeodesicArgs,
    },
    /// List catalog metrics and vector fields.
    Catalog {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        json: bool,
    },
}

fn merge(common: &Common) -> Result<RunConfig, Error> {
    let mut c = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flag_source = common.metric.is_some() || common.metric_expr.is_some() || common.metric_file.is_some();
    if flag_source {
        c.metric.catalog = common.metric.clone();
        c.metric.expr = common.metric_expr.clone();
        c.metric.file = common.metric_file.clone();
    }
    if common.guard.is_some() {
        c.metric.guard = common.guard.clone();
    }
    if common.randers_b.is_some() {
        c.metric.randers_b = common.randers_b.clone();
    }
    if common.dim.is_some() {
        c.dim = common.dim;
    }
    if let Some(s) = common.samples {
        c.samples = s;
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if !common.fields.is_empty() {
        c.fields = common.fields.clone();
    }
    if let Some(t) = common.tol_jet {
        c.tolerances.jet = t;
    }
    if let Some(t) = common.tol_flow {
        c.tolerances.flow = t;
    }
    if let Some(t) = common.tol_quadrature {
        c.tolerances.quadrature = t;
    }
    if common.output.is_some() {
        c.output = common.output.clone();
    }
    c.validate()?;
    Ok(c)
}

/// Outcome of a subcommand before it is turned into an exit status.
enum Failure {
    Config(String),
    Engine(Located),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if let Error::Config(msg) = e {
            Failure::Config(msg)
        } else if exit_code(&e) == EXIT_CONFIG {
            Failure::Config(e.to_string())
        } else {
            Failure::Engine(e.into())
        }
    }
}

impl From<Located> for Failure {
    fn from(e: Located) -> Self {
        if let Error::Config(msg) = e.error {
            Failure::Config(msg)
        } else if exit_code(&e.error) == EXIT_CONFIG {
            Failure::Config(e.to_string())
        } else {
            Failure::Engine(e)
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn write_doc<P: Serialize>(io: &mut Io, doc: &ReportDocument<P>, json: bool) -> Result<(), Failure> {
    let text = doc.to_json();
    if let Some(p) = &doc.config.output {
        std::fs::write(p, &text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
    }
    if json {
        let _ = writeln!(io.out, "{text}");
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("FINSLERLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("FINSLERLAB_THREADS must be a positive integer, got `{v}`")))?;
    // A pool configured earlier in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_CONFIG
                }
            };
        }
    };
    let sub = match &cli.command {
        Command::Report { .. } => "report",
        Command::Verify { .. } => "verify",
        Command::Classify { .. } => "classify",
        Command::Geodesic { .. } => "geodesic",
        Command::Catalog { .. } => "catalog",
    };
    let mut io = Io { out, err };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Report { common, flags } => cmd_report(&mut io, &common, flags),
        Command::Verify { common, suite } => cmd_verify(&mut io, &common, suite),
        Command::Classify { common } => cmd_classify(&mut io, &common),
        Command::Geodesic { common, geo } => cmd_geodesic(&mut io, &common, &geo),
        Command::Catalog { dim, json } => cmd_catalog(&mut io, dim, json),
    });
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            let mut cmd = Cli::command();
            let usage = cmd.find_subcommand_mut(sub).map(|c| c.render_usage().to_string().replacen("Usage: ", "Usage: finslerlab ", 1))
                .unwrap_or_default();
            let _ = writeln!(io.err, "error: {msg}\n\n{usage}");
            EXIT_CONFIG
        }
        Err(Failure::Engine(e)) => {
            let _ = writeln!(io.err, "error: {e}");
            EXIT_NUMERIC
        }
    }
}

fn setup(common: &Common) -> Result<(RunConfig, CatalogEntry), Failure> {
    let config = merge(common)?;
    let entry = config.metric_entry()?;
    Ok((config, entry))
}

fn cmd_report(io: &mut Io, common: &Common, flags: Option<usize>) -> Result<i32, Failure> {
    let (mut config, entry) = setup(common)?;
    if let Some(f) = flags {
        config.flags = f;
    }
    let mut timings = Timings::default();
    let payload = timings.stage("report", || report::tensor_report(&entry, &config))?;
    timings.total_ms = timings.stages.iter().map(|s| s.1).sum();
    let doc = ReportDocument::new("report", &config, Status::Pass, payload, timings);
    if config.output.is_none() || common.json {
        let _ = writeln!(io.out, "{}", doc.to_json());
        if let Some(p) = &config.output {
            std::fs::write(p, doc.to_json()).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
        }
        return Ok(EXIT_PASS);
    }
    write_doc(io, &doc, false)?;
    let _ = writeln!(io.out, "{} samples of {} written to {}", doc.payload.samples.len(), entry.label, config.output.as_ref().unwrap().display());
    Ok(EXIT_PASS)
}

#[derive(Debug, Clone, Serialize)]
struct VerifyPayload {
    suite: Suite,
    metric: String,
    expression: String,
    dim: usize,
    pass: bool,
    outcome: SuiteOutcome,
}

fn fmt_tol(t: Option<f64>) -> String {
    t.map_or_else(|| "info".to_string(), |t| format!("{t:.0e}"))
}

fn cmd_verify(io: &mut Io, common: &Common, suite: Suite) -> Result<i32, Failure> {
    let (config, entry) = setup(common)?;
    let n = entry.metric.n;
    let (fields, explicit) = config.field_list(n)?;
    let h = Harness {
        entry: &entry,
        fields: &fields,
        explicit_fields: explicit,
        samples: config.samples,
        seed: config.seed,
        tol: config.tolerances,
    };
    let mut timings = Timings::default();
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let mut outcome = SuiteOutcome::default();
    for s in suites {
        let o = timings.stage(s.name(), || h.run(s))?;
        outcome.rows.extend(o.rows);
        outcome.skipped.extend(o.skipped);
    }
    timings.total_ms = timings.stages.iter().map(|s| s.1).sum();
    let pass = outcome.pass();
    let payload = VerifyPayload {
        suite,
        metric: entry.label.clone(),
        expression: entry.metric.f.to_string(),
        dim: n,
        pass,
        outcome,
    };
    let doc = ReportDocument::new("verify", &config, if pass { Status::Pass } else { Status::Fail }, payload, timings);
    write_doc(io, &doc, common.json)?;
    if !common.json {
        let o = &doc.payload.outcome;
        for r in &o.rows {
            let mark = if r.tier.is_none() { "INFO" } else if r.pass { "PASS" } else { "FAIL" };
            let field = r.field.as_deref().map(|f| format!(" [{f}]")).unwrap_or_default();
            let _ = writeln!(
                io.out,
                "{mark} {:<20} {}{field}: {:.3e} (tol {})",
                r.suite.name(),
                r.identity,
                r.residual,
                fmt_tol(r.tolerance)
            );
        }
        for s in &o.skipped {
            let field = s.field.as_deref().map(|f| format!(" [{f}]")).unwrap_or_default();
            let _ = writeln!(io.out, "SKIP {:<20}{field}: {}", s.suite.name(), s.reason);
        }
        let failed = o.failures().count();
        let _ = writeln!(io.out, "{} checks, {failed} failed, {} skipped", o.rows.len(), o.skipped.len());
        let worst = o.failures().max_by(|a, b| {
            let ra = a.residual / a.tolerance.unwrap_or(1.0).max(f64::MIN_POSITIVE);
            let rb = b.residual / b.tolerance.unwrap_or(1.0).max(f64::MIN_POSITIVE);
            ra.total_cmp(&rb)
        });
        if let Some(w) = worst {
            let _ = write!(io.out, "worst: {} {} residual {:.3e}", w.suite.name(), w.identity, w.residual);
            if let Some(s) = &w.worst {
                let _ = write!(io.out, " at x = {:?}, y = {:?}", s.x, s.y);
            }
            let _ = writeln!(io.out);
        }
    }
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Debug, Clone, Serialize)]
struct ClassifyPayload {
    metric: String,
    dim: usize,
    reports: Vec<ClassificationReport>,
    consistent: bool,
}

fn cmd_classify(io: &mut Io, common: &Common) -> Result<i32, Failure> {
    let (config, entry) = setup(common)?;
    if config.samples < 20 {
        return Err(Failure::Config(format!("classify needs at least 20 samples, got {}", config.samples)));
    }
    let n = entry.metric.n;
    let (fields, _) = config.field_list(n)?;
    let samples = entry.samples(config.samples, config.seed)?;
    let mut timings = Timings::default();
    let mut reports = Vec::new();
    for f in &fields {
        let r = timings.stage(&f.label, || symmetry::classify(&entry.metric, &f.field, &f.label, &samples, Tolerances::default()));
        reports.push(r.map_err(|e| Located { error: e, context: format!("classify {}", f.label), sample: None })?);
    }
    timings.total_ms = timings.stages.iter().map(|s| s.1).sum();
    let consistent = reports
        .iter()
        .all(|r| r.lemma_b.map_or(true, |b| b <= config.tolerances.flow) && (!r.projective.pass || r.euler <= config.tolerances.jet));
    let payload = ClassifyPayload { metric: entry.label.clone(), dim: n, reports, consistent };
    let status = if consistent { Status::Pass } else { Status::Fail };
    let doc = ReportDocument::new("classify", &config, status, payload, timings);
    write_doc(io, &doc, common.json)?;
    if !common.json {
        let mark = |v: &symmetry::Verdict| if v.pass { "✓" } else { "✗" };
        let _ = writeln!(io.out, "{:<16} proj affine Killing I   E   C   H   lemma-B", "field");
        for r in &doc.payload.reports {
            let lb = r.lemma_b.map_or("-".to_string(), |b| format!("{b:.1e}"));
            let _ = writeln!(
                io.out,
                "{:<16} {:<4} {:<6} {:<7} {:<3} {:<3} {:<3} {:<3} {lb}",
                r.field,
                mark(&r.projective),
                mark(&r.affine),
                mark(&r.killing),
                mark(&r.i_invariant),
                mark(&r.e_invariant),
                mark(&r.c_projective),
                mark(&r.h_invariant),
            );
        }
    }
    Ok(if consistent { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Debug, Clone, Serialize)]
struct GeodesicPayload {
    metric: String,
    along: Option<String>,
    points: usize,
    step: f64,
    f_drift: f64,
    end: (f64, Vec<f64>, Vec<f64>),
    probe: Option<ProbeStats>,
}

fn cmd_geodesic(io: &mut Io, common: &Common, a: &GeodesicArgs) -> Result<i32, Failure> {
    let (mut config, entry) = setup(common)?;
    let g = &mut config.geodesic;
    if a.x0.is_some() {
        g.x0 = a.x0.clone();
    }
    if a.y0.is_some() {
        g.y0 = a.y0.clone();
    }
    if let Some(t) = a.time {
        g.time = t;
    }
    if let Some(s) = a.steps {
        g.steps = s;
    }
    if let Some(p) = &a.probe {
        g.probe = p.clone();
    }
    if let Some(f) = a.flags {
        g.flags = f;
    }
    if a.stride.is_some() {
        g.stride = a.stride;
    }
    if a.along.is_some() {
        g.along = a.along.clone();
    }
    if a.csv.is_some() {
        g.csv = a.csv.clone();
    }
    config.validate()?;
    let g = config.geodesic.clone();
    let n = entry.metric.n;
    let x0 = g.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let y0 = g.y0.clone().unwrap_or(e1);
    if x0.len() != n || y0.len() != n {
        return Err(Failure::Config(format!("x0 and y0 need {n} components")));
    }
    let quantity = match g.probe.as_str() {
        "flag" => Some(Quantity::FlagCurvature { flags: g.flags, seed: config.seed }),
        "ricci" => Some(Quantity::RicciOverF2),
        "s" => Some(Quantity::SOverF),
        "tau" => Some(Quantity::Tau),
        "none" => None,
        other => return Err(Failure::Config(format!("unknown probe `{other}` (flag, ricci, s, tau, none)"))),
    };
    let quantity = quantity.filter(|q| n >= 2 || !matches!(q, Quantity::FlagCurvature { .. }));
    let mut timings = Timings::default();
    let curve: Trajectory = match &g.along {
        Some(label) => {
            let f = config::parse_field(label, n)?;
            timings.stage("integrate", || geodesics::integrate_flow(&f.field, &x0, g.time, g.steps, Some(&entry.metric)))?
        }
        None => timings.stage("integrate", || geodesics::integrate_geodesic(&entry.metric, &x0, &y0, g.time, g.steps))?,
    };
    let stride = g.stride.unwrap_or((g.steps / 100).max(1));
    let kept = curve.subsample(stride);
    let probe = match quantity {
        Some(q) => Some(timings.stage("probe", || geodesics::probe_constancy(&entry.metric, &kept, q))?),
        None => None,
    };
    timings.total_ms = timings.stages.iter().map(|s| s.1).sum();
    let csv = kept.to_csv(probe.as_ref().map(|p| (p.quantity, p.per_point.as_slice())))?;
    match &g.csv {
        Some(p) => std::fs::write(p, &csv).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?,
        None if !common.json => {
            let _ = write!(io.out, "{csv}");
        }
        None => {}
    }
    let last = curve.last();
    let payload = GeodesicPayload {
        metric: entry.label.clone(),
        along: g.along.clone(),
        points: kept.len(),
        step: curve.step,
        f_drift: curve.f_drift(),
        end: (last.t, last.x.clone(), last.y.clone()),
        probe,
    };
    if let Some(p) = &payload.probe {
        let _ = writeln!(
            io.err,
            "{}: mean {:.9e}, max deviation {:.3e} over {} evaluations; F drift {:.3e}",
            p.quantity, p.mean, p.max_deviation, p.evaluations, payload.f_drift
        );
    }
    let doc = ReportDocument::new("geodesic", &config, Status::Pass, payload, timings);
    write_doc(io, &doc, common.json)?;
    Ok(EXIT_PASS)
}

#[derive(Debug, Clone, Serialize)]
struct CatalogListing {
    dim: usize,
    metrics: Vec<CatalogEntry>,
    fields: Vec<catalog::NamedField>,
}

fn cmd_catalog(io: &mut Io, dim: usize, json: bool) -> Result<i32, Failure> {
    let metrics = catalog::METRIC_LABELS.iter().map(|l| catalog::metric(l, dim)).collect::<Result<Vec<_>, _>>()?;
    let fields = catalog::catalog_vector_fields(dim)?;
    let listing = CatalogListing { dim, metrics, fields };
    if json {
        let _ = writeln!(io.out, "{}", serde_json::to_string_pretty(&listing).expect("catalog serialization"));
        return Ok(EXIT_PASS);
    }
    let _ = writeln!(io.out, "metrics (n = {dim}):");
    for m in &listing.metrics {
        let p = &m.properties;
        let mut tags = Vec::new();
        for (on, name) in [
            (p.riemannian, "riemannian"),
            (p.berwald, "berwald"),
            (p.landsberg, "landsberg"),
            (p.locally_minkowski, "locally-minkowski"),
            (p.isotropic_s, "isotropic-S"),
        ] {
            if on {
                tags.push(name.to_string());
            }
        }
        if let Some(k) = p.constant_flag {
            tags.push(format!("K = {k}"));
        }
        let _ = writeln!(io.out, "  {:<18} F = {}", m.label, m.metric.f);
        if let Some(g) = &m.metric.guard {
            let _ = writeln!(io.out, "  {:<18} guard {g} > 0", "");
        }
        if !tags.is_empty() {
            let _ = writeln!(io.out, "  {:<18} {}", "", tags.join(", "));
        }
    }
    let _ = writeln!(io.out, "vector fields:");
    for f in &listing.fields {
        let comps: Vec<String> = f.field.components.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(io.out, "  {:<18} ({})", f.label, comps.join(", "));
    }
    Ok(EXIT_PASS)
}
