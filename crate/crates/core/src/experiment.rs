//! Experiment registry: strict configuration, dispatch over a grid of
//! dimensions, and tabular reports.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cones::{ConeDescriptor, ConePair};
use crate::error::{Error, Result};
use crate::gaussian::derive_seed;
use crate::geometry::{concentration_report, GeometrySummary, TAIL_LEVELS};
use crate::lowerbound::{minimax_lower_radius, LowerBoundCurve, LowerRadiusParams, PriorSampler};
use crate::testing::{
    glrt_radius, kpiece_radius, product_cone, truncation_radius, RadiusEstimate, RadiusParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    SubspaceScaling,
    Circular,
    OrthantScaling,
    MonotoneScaling,
    ProductSuboptimality,
    Kpiece,
    Concentration,
    LowerBounds,
    GeometryReport,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        Self::SubspaceScaling,
        Self::Circular,
        Self::OrthantScaling,
        Self::MonotoneScaling,
        Self::ProductSuboptimality,
        Self::Kpiece,
        Self::Concentration,
        Self::LowerBounds,
        Self::GeometryReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SubspaceScaling => "subspace-scaling",
            Self::Circular => "circular",
            Self::OrthantScaling => "orthant-scaling",
            Self::MonotoneScaling => "monotone-scaling",
            Self::ProductSuboptimality => "product-suboptimality",
            Self::Kpiece => "kpiece",
            Self::Concentration => "concentration",
            Self::LowerBounds => "lower-bounds",
            Self::GeometryReport => "geometry-report",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment \"{s}\"")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::config(
                "format",
                format!("expected csv or json, got \"{other}\""),
            )),
        }
    }
}

/// Cone names accepted by `geometry-report` and the command line.
pub const CONE_NAMES: [&str; 6] = [
    "orthant",
    "monotone",
    "monotone-centered",
    "circular",
    "subspace",
    "product",
];

/// A validated experiment configuration with defaults filled in.
/// `experiment` is absent only for the single-purpose command-line reports
/// ([`radius_report`], [`lower_bound_report`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentName>,
    pub dims: Vec<usize>,
    pub sigma: f64,
    pub rho: f64,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    pub out: Option<String>,
    pub format: OutputFormat,
    pub cone: Option<String>,
}

impl ExperimentConfig {
    pub const DEFAULT_SIGMA: f64 = 1.0;
    pub const DEFAULT_RHO: f64 = 0.1;
    pub const DEFAULT_ALPHA: f64 = FRAC_PI_4;
    pub const DEFAULT_N: usize = 4000;
    pub const DEFAULT_SEED: u64 = 1;
    const KEYS: [&'static str; 10] = [
        "experiment",
        "dims",
        "sigma",
        "rho",
        "alpha",
        "n",
        "seed",
        "out",
        "format",
        "cone",
    ];

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn number(map: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::config(key, "expected a finite number")),
    }
}

fn unsigned(map: &Map<String, Value>, key: &str, default: u64) -> Result<u64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::config(key, "expected a nonnegative integer")),
    }
}

fn string<'a>(map: &'a Map<String, Value>, key: &str) -> Result<Option<&'a str>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(Error::config(key, "expected a string")),
    }
}

/// Strict validation of a raw JSON configuration document. Unknown keys are
/// rejected and the first offending field is reported.
pub fn validate_config(raw: &Value) -> Result<ExperimentConfig> {
    let cfg = validate_settings(raw)?;
    if cfg.experiment.is_none() {
        return Err(Error::config("experiment", "required"));
    }
    Ok(cfg)
}

/// Like [`validate_config`] but `experiment` may be omitted.
pub fn validate_settings(raw: &Value) -> Result<ExperimentConfig> {
    let map = raw
        .as_object()
        .ok_or_else(|| Error::config("$", "expected a JSON object"))?;
    if let Some(k) = map
        .keys()
        .find(|k| !ExperimentConfig::KEYS.contains(&k.as_str()))
    {
        return Err(Error::config(k.clone(), "unknown key"));
    }
    let experiment: Option<ExperimentName> =
        string(map, "experiment")?.map(str::parse).transpose()?;
    let dims_raw = map
        .get("dims")
        .ok_or_else(|| Error::config("dims", "nonempty required"))?;
    let arr = dims_raw
        .as_array()
        .ok_or_else(|| Error::config("dims", "expected an array of integers"))?;
    if arr.is_empty() {
        return Err(Error::config("dims", "nonempty required"));
    }
    let mut dims = Vec::with_capacity(arr.len());
    for (i, v) in arr.iter().enumerate() {
        let d = v
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::config(format!("dims[{i}]"), "expected a positive integer"))?;
        dims.push(d as usize);
    }
    if let Some(i) = dims.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::config(
            format!("dims[{}]", i + 1),
            "dims must be strictly increasing",
        ));
    }
    let sigma = number(map, "sigma", ExperimentConfig::DEFAULT_SIGMA)?;
    if sigma <= 0.0 {
        return Err(Error::config("sigma", "sigma > 0 required"));
    }
    let rho = number(map, "rho", ExperimentConfig::DEFAULT_RHO)?;
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::config("rho", "rho ∈ (0, 0.5)"));
    }
    let alpha = number(map, "alpha", ExperimentConfig::DEFAULT_ALPHA)?;
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(Error::config("alpha", "alpha ∈ (0, π/2)"));
    }
    let n = unsigned(map, "n", ExperimentConfig::DEFAULT_N as u64)? as usize;
    if n < 2 {
        return Err(Error::config("n", "n >= 2 required"));
    }
    let seed = unsigned(map, "seed", ExperimentConfig::DEFAULT_SEED)?;
    let out = string(map, "out")?.map(str::to_owned);
    let format = string(map, "format")?
        .map(str::parse)
        .transpose()?
        .unwrap_or(OutputFormat::Csv);
    let cone = string(map, "cone")?.map(str::to_owned);
    if let Some(c) = &cone {
        if !CONE_NAMES.contains(&c.as_str()) {
            return Err(Error::config(
                "cone",
                format!(
                    "unknown cone \"{c}\"; expected one of {}",
                    CONE_NAMES.join(", ")
                ),
            ));
        }
    }
    Ok(ExperimentConfig {
        experiment,
        dims,
        sigma,
        rho,
        alpha,
        n,
        seed,
        out,
        format,
        cone,
    })
}

/// Build a named cone. For `subspace`, `d` is the rank `k` and the ambient
/// dimension is `2k`; `product` is `C(α, d−1) × R`.
pub fn named_cone(name: &str, d: usize, alpha: f64, seed: u64) -> Result<ConeDescriptor> {
    match name {
        "orthant" => ConeDescriptor::orthant(d),
        "monotone" => ConeDescriptor::monotone(d),
        "monotone-centered" => ConeDescriptor::induced(ConePair::constants_vs_monotone(d)?),
        "circular" => ConeDescriptor::circular(d, alpha),
        "subspace" => ConeDescriptor::random_subspace(2 * d, d, derive_seed(seed, d as u64)),
        "product" => Ok(product_cone(d, alpha)?.0),
        other => Err(Error::config("cone", format!("unknown cone \"{other}\""))),
    }
}

/// Tabular results with ordered columns plus optional nested summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Nested JSON objects, e.g. one geometry summary per dimension.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub summaries: Vec<Value>,
    pub metadata: Value,
}

impl ExperimentReport {
    /// Value of `column` in row `i`.
    pub fn get(&self, i: usize, column: &str) -> Option<&Value> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows.get(i)?.get(j)
    }

    pub fn column_f64(&self, column: &str) -> Vec<Option<f64>> {
        (0..self.rows.len())
            .map(|i| self.get(i, column).and_then(Value::as_f64))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(cell))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: OutputFormat, w: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(w),
            OutputFormat::Json => self.write_json(w),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Row builder keeping column order.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new() -> Self {
        Self {
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<(&str, Value)>) {
        if self.columns.is_empty() {
            self.columns = row.iter().map(|(k, _)| k.to_string()).collect();
        }
        debug_assert_eq!(self.columns.len(), row.len());
        self.rows.push(row.into_iter().map(|(_, v)| v).collect());
    }
}

fn radius_params(cfg: &ExperimentConfig) -> RadiusParams {
    RadiusParams {
        rho: cfg.rho,
        n: cfg.n,
        seed: cfg.seed,
        ..RadiusParams::default()
    }
}

fn radius_row(
    cone: &str,
    d: usize,
    cfg: &ExperimentConfig,
    norm_name: &str,
    norm: f64,
    result: Result<RadiusEstimate>,
) -> Vec<(&'static str, Value)> {
    let head = |ratio_val: Value| -> Vec<(&'static str, Value)> {
        vec![
            ("cone", json!(cone)),
            ("d", json!(d)),
            ("sigma", json!(cfg.sigma)),
            ("rho", json!(cfg.rho)),
            (leak(norm_name), ratio_val),
        ]
    };
    match result {
        Ok(r) => {
            let p = r
                .evaluations
                .iter()
                .find(|p| p.epsilon == r.hi)
                .or(r.evaluations.last());
            let (lo2, hi2) = r.bracket_sq();
            let mut row = head(json!(r.radius_sq() / (cfg.sigma * cfg.sigma * norm)));
            row.extend([
                ("epsilon", json!(r.epsilon)),
                ("radius_sq", json!(r.radius_sq())),
                ("bracket_lo", json!(lo2)),
                ("bracket_hi", json!(hi2)),
                ("type1", json!(p.map(|p| p.type1.mean))),
                ("type2", json!(p.map(|p| p.type2_worst.mean))),
                ("total", json!(p.map(|p| p.total))),
                (
                    "threshold",
                    json!(p.map(|p| p.best_threshold).filter(|t| t.is_finite())),
                ),
                ("monotonicity_violations", json!(r.monotonicity_violations)),
                ("seed", json!(cfg.seed)),
                ("n", json!(cfg.n)),
                ("status", json!("ok")),
            ]);
            row
        }
        Err(e) => {
            let mut row = head(Value::Null);
            for k in [
                "epsilon",
                "radius_sq",
                "bracket_lo",
                "bracket_hi",
                "type1",
                "type2",
                "total",
                "threshold",
                "monotonicity_violations",
            ] {
                row.push((k, Value::Null));
            }
            row.extend([
                ("seed", json!(cfg.seed)),
                ("n", json!(cfg.n)),
                ("status", json!(e.to_string())),
            ]);
            row
        }
    }
}

/// Column names are static; this maps the few dynamic names onto statics.
fn leak(name: &str) -> &'static str {
    match name {
        "radius_sq_over_sqrt_k" => "radius_sq_over_sqrt_k",
        "radius_sq_over_sqrt_d" => "radius_sq_over_sqrt_d",
        "radius_sq_over_sqrt_log_d" => "radius_sq_over_sqrt_log_d",
        "radius_sq_over_sigma_sq" => "radius_sq_over_sigma_sq",
        _ => "ratio",
    }
}

fn status<T>(r: &Result<T>) -> Value {
    match r {
        Ok(_) => json!("ok"),
        Err(e) => json!(e.to_string()),
    }
}

/// `θ₀` with `k` constant pieces of near-equal length.
pub fn piecewise_theta(d: usize, k: usize) -> Vec<f64> {
    (0..d).map(|i| (i * k / d) as f64).collect()
}

fn finish(
    table: Table,
    summaries: Vec<Value>,
    cfg: &ExperimentConfig,
    command: &str,
    start: Instant,
) -> ExperimentReport {
    let metadata = json!({
        "command": command,
        "config": cfg.to_value(),
        "version": env!("CARGO_PKG_VERSION"),
        "build": format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    ExperimentReport {
        columns: table.columns,
        rows: table.rows,
        summaries,
        metadata,
    }
}

/// GLRT radius of `({0}, K)` for a named cone at every configured dimension.
pub fn radius_report(cone: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    named_cone(cone, 2, cfg.alpha, cfg.seed)?;
    let mut table = Table::new();
    let params = radius_params(cfg);
    for &d in &cfg.dims {
        let r = named_cone(cone, d, cfg.alpha, cfg.seed)
            .and_then(ConePair::zero_vs)
            .and_then(|p| glrt_radius(&p, cfg.sigma, &params));
        table.push(radius_row(cone, d, cfg, "radius_sq_over_sigma_sq", 1.0, r));
    }
    Ok(finish(
        table,
        Vec::new(),
        cfg,
        &format!("radius {cone}"),
        start,
    ))
}

/// Prior names accepted by [`lower_bound_report`].
pub const PRIOR_NAMES: [&str; 3] = ["orthant-sparse", "monotone-fg", "monotone-fg-centered"];

fn named_prior(name: &str, d: usize) -> Result<PriorSampler> {
    match name {
        "orthant-sparse" => PriorSampler::orthant_sparse(d),
        "monotone-fg" => PriorSampler::monotone_fg(d, false),
        "monotone-fg-centered" => PriorSampler::monotone_fg(d, true),
        other => Err(Error::config(
            "prior",
            format!(
                "unknown prior \"{other}\"; expected one of {}",
                PRIOR_NAMES.join(", ")
            ),
        )),
    }
}

fn lower_bound_rows(table: &mut Table, priors: &[&str], cfg: &ExperimentConfig) {
    for &d in &cfg.dims {
        for &name in priors {
            let lp = LowerRadiusParams {
                n_pairs: cfg.n,
                seed: cfg.seed,
                ..LowerRadiusParams::default()
            };
            let res = named_prior(name, d)
                .and_then(|s| LowerBoundCurve::new(s, cfg.n, cfg.seed))
                .and_then(|c| minimax_lower_radius(&c, cfg.rho, &lp).map(|r| (c, r)));
            match res {
                Ok((curve, r)) => {
                    for (label, eps) in [
                        ("half", r.epsilon / 2.0),
                        ("radius", r.epsilon),
                        ("double", 2.0 * r.epsilon),
                    ] {
                        let p = curve.at(eps);
                        let st = status(&p);
                        let p = p.ok();
                        table.push(vec![
                            ("prior", json!(name)),
                            ("d", json!(d)),
                            ("point", json!(label)),
                            ("epsilon", json!(eps)),
                            ("epsilon_sq", json!(eps * eps)),
                            ("moment", json!(p.as_ref().map(|p| p.moment))),
                            ("moment_se", json!(p.as_ref().map(|p| p.moment_se))),
                            ("error_lb", json!(p.as_ref().map(|p| p.error_lb))),
                            ("method", json!(p.as_ref().map(|p| p.method.as_str()))),
                            ("heavy_tail", json!(p.as_ref().map(|p| p.heavy_tail))),
                            ("lower_radius_sq", json!(r.radius_sq())),
                            ("bracket_hi_sq", json!(r.hi * r.hi)),
                            ("seed", json!(cfg.seed)),
                            ("n", json!(cfg.n)),
                            ("status", st),
                        ]);
                    }
                }
                Err(e) => {
                    let mut row = vec![
                        ("prior", json!(name)),
                        ("d", json!(d)),
                        ("point", json!("radius")),
                    ];
                    for k in [
                        "epsilon",
                        "epsilon_sq",
                        "moment",
                        "moment_se",
                        "error_lb",
                        "method",
                        "heavy_tail",
                        "lower_radius_sq",
                        "bracket_hi_sq",
                    ] {
                        row.push((k, Value::Null));
                    }
                    row.extend([
                        ("seed", json!(cfg.seed)),
                        ("n", json!(cfg.n)),
                        ("status", json!(e.to_string())),
                    ]);
                    table.push(row);
                }
            }
        }
    }
}

/// χ² lower-bound curve points and lower radius for the named priors.
pub fn lower_bound_report(priors: &[&str], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    for p in priors {
        if !PRIOR_NAMES.contains(p) {
            named_prior(p, 4)?;
        }
    }
    let mut table = Table::new();
    lower_bound_rows(&mut table, priors, cfg);
    Ok(finish(
        table,
        Vec::new(),
        cfg,
        &format!("lower-bound {}", priors.join(",")),
        start,
    ))
}

/// Run one experiment over the configured grid of dimensions.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut table = Table::new();
    let mut summaries = Vec::new();
    let params = radius_params(cfg);
    let sigma = cfg.sigma;
    let experiment = cfg
        .experiment
        .ok_or_else(|| Error::config("experiment", "required"))?;
    match experiment {
        ExperimentName::SubspaceScaling => {
            for &k in &cfg.dims {
                let r = named_cone("subspace", k, cfg.alpha, cfg.seed)
                    .and_then(ConePair::zero_vs)
                    .and_then(|p| glrt_radius(&p, sigma, &params));
                let mut row = radius_row(
                    "subspace",
                    2 * k,
                    cfg,
                    "radius_sq_over_sqrt_k",
                    (k as f64).sqrt(),
                    r,
                );
                row.insert(1, ("k", json!(k)));
                table.push(row);
            }
        }
        ExperimentName::Circular
        | ExperimentName::OrthantScaling
        | ExperimentName::MonotoneScaling => {
            let (name, norm_name): (&str, &str) = match experiment {
                ExperimentName::Circular => ("circular", "radius_sq_over_sigma_sq"),
                ExperimentName::OrthantScaling => ("orthant", "radius_sq_over_sqrt_d"),
                _ => ("monotone", "radius_sq_over_sqrt_log_d"),
            };
            for &d in &cfg.dims {
                let norm = match name {
                    "circular" => 1.0,
                    "orthant" => (d as f64).sqrt(),
                    _ => (d as f64).ln().sqrt(),
                };
                let r = named_cone(name, d, cfg.alpha, cfg.seed)
                    .and_then(ConePair::zero_vs)
                    .and_then(|p| glrt_radius(&p, sigma, &params));
                table.push(radius_row(name, d, cfg, norm_name, norm, r));
            }
        }
        ExperimentName::ProductSuboptimality => {
            for &d in &cfg.dims {
                let res = product_cone(d, cfg.alpha).and_then(|(cone, coords)| {
                    let pair = ConePair::zero_vs(cone)?;
                    let g = glrt_radius(&pair, sigma, &params)?;
                    let t = truncation_radius(&pair, &coords, sigma, &params)?;
                    Ok((g, t))
                });
                let st = status(&res);
                let (g, t) = match res {
                    Ok((g, t)) => (Some(g), Some(t)),
                    Err(_) => (None, None),
                };
                let gr = g.as_ref().map(|r| r.radius_sq());
                let tr = t.as_ref().map(|r| r.radius_sq());
                let ratio = gr.zip(tr).map(|(a, b)| a / b);
                table.push(vec![
                    ("d", json!(d)),
                    ("sigma", json!(sigma)),
                    ("rho", json!(cfg.rho)),
                    ("alpha", json!(cfg.alpha)),
                    ("glr_radius_sq", json!(gr)),
                    (
                        "glr_bracket_lo",
                        json!(g.as_ref().map(|r| r.bracket_sq().0)),
                    ),
                    (
                        "glr_bracket_hi",
                        json!(g.as_ref().map(|r| r.bracket_sq().1)),
                    ),
                    ("trunc_radius_sq", json!(tr)),
                    (
                        "trunc_bracket_lo",
                        json!(t.as_ref().map(|r| r.bracket_sq().0)),
                    ),
                    (
                        "trunc_bracket_hi",
                        json!(t.as_ref().map(|r| r.bracket_sq().1)),
                    ),
                    ("ratio", json!(ratio)),
                    (
                        "ratio_over_sqrt_d",
                        json!(ratio.map(|x| x / (d as f64).sqrt())),
                    ),
                    ("seed", json!(cfg.seed)),
                    ("n", json!(cfg.n)),
                    ("status", st),
                ]);
            }
        }
        ExperimentName::Kpiece => {
            for &d in &cfg.dims {
                let mut ks = vec![1, 4, d];
                ks.retain(|&k| k <= d);
                ks.dedup();
                for k in ks {
                    let res = kpiece_radius(&piecewise_theta(d, k), sigma, &params);
                    let st = status(&res);
                    let r = res.ok().map(|(_, r)| r);
                    let scale =
                        ((k as f64) * (std::f64::consts::E * d as f64 / k as f64).ln()).sqrt();
                    table.push(vec![
                        ("d", json!(d)),
                        ("k", json!(k)),
                        ("sigma", json!(sigma)),
                        ("rho", json!(cfg.rho)),
                        ("radius_sq", json!(r.as_ref().map(|r| r.radius_sq()))),
                        ("bracket_lo", json!(r.as_ref().map(|r| r.bracket_sq().0))),
                        ("bracket_hi", json!(r.as_ref().map(|r| r.bracket_sq().1))),
                        (
                            "radius_sq_over_sqrt_k_log_ed_over_k",
                            json!(r.as_ref().map(|r| r.radius_sq() / (sigma * sigma * scale))),
                        ),
                        ("seed", json!(cfg.seed)),
                        ("n", json!(cfg.n)),
                        ("status", st),
                    ]);
                }
            }
        }
        ExperimentName::Concentration => {
            let cones: Vec<&str> = match &cfg.cone {
                Some(c) => vec![c.as_str()],
                None => vec!["orthant", "monotone"],
            };
            for &d in &cfg.dims {
                for &name in &cones {
                    let res = named_cone(name, d, cfg.alpha, cfg.seed)
                        .and_then(|c| concentration_report(&c, cfg.n, cfg.seed));
                    let st = status(&res);
                    let r = res.ok();
                    let mut row = vec![
                        ("cone", json!(name)),
                        ("d", json!(d)),
                        ("width", json!(r.as_ref().map(|r| r.width.mean))),
                        ("width_se", json!(r.as_ref().map(|r| r.width.stderr))),
                        ("variance", json!(r.as_ref().map(|r| r.variance.mean))),
                        ("variance_se", json!(r.as_ref().map(|r| r.variance.stderr))),
                    ];
                    for (i, t) in TAIL_LEVELS.iter().enumerate() {
                        let (up, lo, se_up, se_lo) = match &r {
                            Some(r) => (
                                Some(r.tails[i].upper.mean),
                                Some(r.tails[i].lower.mean),
                                Some(r.tails[i].upper.stderr),
                                Some(r.tails[i].lower.stderr),
                            ),
                            None => (None, None, None, None),
                        };
                        let names: [&'static str; 4] = match i {
                            0 => ["upper_0.5", "upper_0.5_se", "lower_0.5", "lower_0.5_se"],
                            1 => ["upper_1", "upper_1_se", "lower_1", "lower_1_se"],
                            _ => ["upper_2", "upper_2_se", "lower_2", "lower_2_se"],
                        };
                        debug_assert!(*t > 0.0);
                        row.extend([
                            (names[0], json!(up)),
                            (names[1], json!(se_up)),
                            (names[2], json!(lo)),
                            (names[3], json!(se_lo)),
                        ]);
                    }
                    row.extend([
                        (
                            "within_bounds_3se",
                            json!(r.as_ref().map(|r| r.within_bounds(3.0))),
                        ),
                        ("seed", json!(cfg.seed)),
                        ("n", json!(cfg.n)),
                        ("status", st),
                    ]);
                    table.push(row);
                }
            }
        }
        ExperimentName::LowerBounds => {
            lower_bound_rows(&mut table, &["orthant-sparse", "monotone-fg"], cfg)
        }
        ExperimentName::GeometryReport => {
            let name = cfg.cone.as_deref().unwrap_or("monotone");
            for &d in &cfg.dims {
                let res = named_cone(name, d, cfg.alpha, cfg.seed)
                    .and_then(|c| GeometrySummary::compute(&c, cfg.n, cfg.seed));
                let st = status(&res);
                let s = res.ok();
                if let Some(s) = &s {
                    summaries.push(serde_json::to_value(s)?);
                }
                table.push(vec![
                    ("cone", json!(name)),
                    ("d", json!(d)),
                    ("width", json!(s.as_ref().map(|s| s.width.mean))),
                    ("width_se", json!(s.as_ref().map(|s| s.width.stderr))),
                    ("width_sq", json!(s.as_ref().map(|s| s.width_sq.mean))),
                    ("width_sq_se", json!(s.as_ref().map(|s| s.width_sq.stderr))),
                    ("inf_inner", json!(s.as_ref().map(|s| s.inf_inner))),
                    ("sup_inner", json!(s.as_ref().map(|s| s.sup_inner))),
                    (
                        "lr_second_term",
                        json!(s.as_ref().and_then(|s| s.lr_second_term)),
                    ),
                    (
                        "opt_second_term",
                        json!(s.as_ref().and_then(|s| s.opt_second_term)),
                    ),
                    ("delta_lr_sq", json!(s.as_ref().map(|s| s.delta_lr_sq))),
                    ("delta_opt_sq", json!(s.as_ref().map(|s| s.delta_opt_sq))),
                    ("seed", json!(cfg.seed)),
                    ("n", json!(cfg.n)),
                    ("status", st),
                ]);
            }
        }
    }
    Ok(finish(table, summaries, cfg, experiment.as_str(), start))
}
