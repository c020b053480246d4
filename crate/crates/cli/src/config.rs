//! Experiment configs. A config is a TOML file with a `kind` key, optional
//! `seed` and `memory_ceiling_gib`, and the keys of that kind.

use maxpsh::catalog::{parse_chi, parse_scheme, ChiWeight, PshSpec, SequenceScheme};
use maxpsh::engine::{CurrentSpec, SliceFamily};
use maxpsh::grid::{Exclusion, GridDomain, Region};
use maxpsh::lab::{Estimator, VerdictRule, WeightKind};
use num_complex::Complex64;
use serde::Deserialize;
use serde::de::DeserializeOwned;

use crate::error::Failure;

pub const DEFAULT_CEILING_GIB: f64 = 2.0;

/// Rough resident bytes per grid node for one sampled function, its
/// Hessian field and one measure.
pub const BYTES_PER_NODE: u64 = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    MaDensity,
    SequenceScan,
    M1Scan,
    Blocki,
    Cegrell,
    Compare,
    Capacity,
    Certificate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::MaDensity => "ma-density",
            Kind::SequenceScan => "sequence-scan",
            Kind::M1Scan => "m1-scan",
            Kind::Blocki => "blocki",
            Kind::Cegrell => "cegrell",
            Kind::Compare => "compare",
            Kind::Capacity => "capacity",
            Kind::Certificate => "certificate",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExclusionConfig {
    /// Remove `|x| < radius`.
    Ball { radius: f64 },
    /// Keep only `|x| < radius`.
    OutsideBall { radius: f64 },
    /// Remove `|z_var| < radius`, `var` counted from 1.
    Axis { var: usize, radius: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub h: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// Per-axis `[lo, hi]`; overrides `lo`/`hi`.
    pub bounds: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub exclude: Vec<ExclusionConfig>,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridDomain, Failure> {
        let excluded = self
            .exclude
            .iter()
            .map(|e| match *e {
                ExclusionConfig::Ball { radius } => Ok(Exclusion::ball(radius)),
                ExclusionConfig::OutsideBall { radius } => Ok(Exclusion::outside_ball(radius)),
                ExclusionConfig::Axis { var, radius } if var >= 1 => Ok(Exclusion::CoordinateAxis { var: var - 1, radius }),
                ExclusionConfig::Axis { .. } => Err(Failure::config("axis exclusions count variables from 1")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let bounds = match (&self.bounds, self.lo, self.hi) {
            (Some(b), _, _) => b.clone(),
            (None, Some(lo), Some(hi)) => vec![[lo, hi]; 2 * self.n],
            _ => return Err(Failure::config("grid needs either `bounds` or both `lo` and `hi`")),
        };
        GridDomain::new(self.n, &bounds, self.h, excluded).map_err(Failure::config)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionConfig {
    Polydisc {
        radius: f64,
        #[serde(default)]
        inner: f64,
    },
    Ball {
        radius: f64,
    },
}

impl RegionConfig {
    pub fn build(&self) -> Region {
        match *self {
            RegionConfig::Polydisc { radius, inner } => Region::Polydisc { inner: [inner; 2], outer: [radius; 2] },
            RegionConfig::Ball { radius } => Region::Ball { radius },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentKindConfig {
    #[default]
    Trivial,
    Omega,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub tail_ratio: Option<f64>,
    pub bounded_ratio: Option<f64>,
    pub zero_floor: Option<f64>,
}

fn rule(r: &Option<RuleConfig>) -> Result<VerdictRule, Failure> {
    let mut out = VerdictRule::default();
    if let Some(r) = r {
        out.tail_ratio = r.tail_ratio.unwrap_or(out.tail_ratio);
        out.bounded_ratio = r.bounded_ratio.unwrap_or(out.bounded_ratio);
        out.zero_floor = r.zero_floor.unwrap_or(out.zero_floor);
    }
    let ok = (0.0..=1.0).contains(&out.tail_ratio) && (0.0..=1.0).contains(&out.bounded_ratio) && out.zero_floor >= 0.0;
    if !ok {
        return Err(Failure::config("rule thresholds: ratios in [0, 1] and a nonnegative zero floor"));
    }
    Ok(out)
}

fn current(kind: CurrentKindConfig, q: Option<usize>, n: usize) -> Result<CurrentSpec, Failure> {
    let t = match kind {
        CurrentKindConfig::Trivial => CurrentSpec::trivial(n),
        CurrentKindConfig::Omega => CurrentSpec::omega(q.unwrap_or(1)),
    };
    let t = match (kind, q) {
        (CurrentKindConfig::Trivial, Some(q)) => CurrentSpec { q, ..t },
        _ => t,
    };
    t.validate(n).map_err(Failure::config)?;
    Ok(t)
}

fn indices(from: u32, to: u32) -> Result<Vec<u32>, Failure> {
    if from == 0 || to < from {
        return Err(Failure::config(format!("index range {from}..={to} must satisfy 1 <= j_from <= j_to")));
    }
    Ok((from..=to).collect())
}

fn spec(text: &str, n: Option<usize>) -> Result<PshSpec, Failure> {
    match n {
        Some(n) => PshSpec::parse_in(text, n),
        None => PshSpec::parse(text),
    }
    .map_err(|e| Failure::config(format!("spec `{text}`: {e}")))
}

fn scheme(text: &str) -> Result<SequenceScheme, Failure> {
    parse_scheme(text).map_err(|e| Failure::config(format!("scheme `{text}`: {e}")))
}

fn chi(text: &str) -> Result<ChiWeight, Failure> {
    parse_chi(text).map_err(|e| Failure::config(format!("chi `{text}`: {e}")))
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::config(format!("`{name}` must be positive, got {v}")))
    }
}

// ---------------------------------------------------------------- raw configs

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaDensityRaw {
    spec: String,
    n: Option<usize>,
    grid: GridConfig,
    #[serde(default)]
    current: CurrentKindConfig,
    q: Option<usize>,
    #[serde(default)]
    finite_difference: bool,
    #[serde(default)]
    density_csv: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanRaw {
    spec: String,
    n: Option<usize>,
    scheme: String,
    region: RegionConfig,
    j_from: u32,
    j_to: u32,
    /// Weight exponent for `sequence-scan`.
    a: Option<f64>,
    /// `shifted` for `(|u|+1)^{-a}`, `abs` for `|u|^{-a}`.
    weight: Option<String>,
    /// Truncation level for `m1-scan`.
    t: Option<f64>,
    #[serde(default = "auto")]
    estimator: Estimator,
    grid: Option<GridConfig>,
    smoothing: Option<f64>,
    finite_difference: Option<bool>,
    rule: Option<RuleConfig>,
}

fn auto() -> Estimator {
    Estimator::Auto
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockiRaw {
    chi: String,
    w0: [f64; 2],
    r: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CegrellRaw {
    j_from: u32,
    j_to: Option<u32>,
    #[serde(default = "one")]
    rho: f64,
    /// Also estimate the mass on a 4-D grid of this spacing.
    grid_h: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomRaw {
    cases: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareRaw {
    u: Option<String>,
    v: Option<String>,
    n: Option<usize>,
    grid: GridConfig,
    #[serde(default)]
    current: CurrentKindConfig,
    q: Option<usize>,
    delta_shift: Option<f64>,
    tolerance: Option<f64>,
    boundary_tol: Option<f64>,
    #[serde(default)]
    finite_difference: bool,
    smoothing: Option<f64>,
    random: Option<RandomRaw>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopesRaw {
    outer: f64,
    inner: Vec<f64>,
    eps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacityRaw {
    grid: GridConfig,
    k: RegionConfig,
    #[serde(default)]
    current: CurrentKindConfig,
    q: Option<usize>,
    #[serde(default)]
    candidates: Vec<String>,
    envelopes: Option<EnvelopesRaw>,
    #[serde(default)]
    finite_difference: bool,
    smoothing: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateRaw {
    u: String,
    scheme: String,
    grid: GridConfig,
    /// Variable held fixed on every leaf, counted from 1.
    fixed: usize,
    #[serde(default = "stride")]
    stride: usize,
    j_from: u32,
    j_to: u32,
    finite_difference: Option<bool>,
    smoothing: Option<f64>,
    rule: Option<RuleConfig>,
}

fn stride() -> usize {
    1
}

// ---------------------------------------------------------------- validated plans

#[derive(Debug, Clone)]
pub enum Quantity {
    Weighted(WeightKind),
    M1(f64),
}

#[derive(Debug, Clone)]
pub enum Plan {
    MaDensity { spec: PshSpec, grid: GridDomain, current: CurrentSpec, finite_difference: bool, density_csv: bool },
    Scan {
        spec: PshSpec,
        scheme: SequenceScheme,
        quantity: Quantity,
        region: Region,
        js: Vec<u32>,
        estimator: Estimator,
        grid: Option<GridDomain>,
        smoothing: Option<f64>,
        finite_difference: bool,
        rule: VerdictRule,
    },
    Blocki { chi: ChiWeight, w0: Complex64, r: f64 },
    Cegrell { js: Vec<u32>, rho: f64, grid_h: Option<f64> },
    Compare {
        pair: Option<(PshSpec, PshSpec)>,
        cases: Option<usize>,
        grid: GridDomain,
        current: CurrentSpec,
        options: maxpsh::comparison::ComparisonOptions,
    },
    Capacity {
        grid: GridDomain,
        k: Region,
        current: CurrentSpec,
        candidates: Vec<PshSpec>,
        options: maxpsh::comparison::CapacityOptions,
    },
    Certificate {
        u: PshSpec,
        scheme: SequenceScheme,
        grid: GridDomain,
        family: SliceFamily,
        js: Vec<u32>,
        options: maxpsh::comparison::CertificateOptions,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub memory_ceiling_gib: f64,
    pub plan: Plan,
}

fn take<T: DeserializeOwned>(table: toml::Table) -> Result<T, Failure> {
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Failure::config(e.message().to_string()))
}

impl ExperimentConfig {
    /// Parse and validate; nothing is computed or allocated per node here.
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Failure::config(e.to_string()))?;
        let kind: Kind = match table.remove("kind") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| Failure::config(format!("kind: {}", e.message())))?,
            None => return Err(Failure::config("missing `kind`")),
        };
        let seed = match table.remove("seed") {
            Some(toml::Value::Integer(s)) if s >= 0 => s as u64,
            Some(other) => return Err(Failure::config(format!("seed must be a nonnegative integer, got {other}"))),
            None => 0,
        };
        let memory_ceiling_gib = match table.remove("memory_ceiling_gib") {
            Some(v) => positive("memory_ceiling_gib", v.as_float().or(v.as_integer().map(|i| i as f64)).unwrap_or(f64::NAN))?,
            None => DEFAULT_CEILING_GIB,
        };
        let plan = match kind {
            Kind::MaDensity => {
                let r: MaDensityRaw = take(table)?;
                let grid = r.grid.build()?;
                let spec = spec(&r.spec, r.n.or(Some(grid.n())))?;
                let current = current(r.current, r.q, grid.n())?;
                Plan::MaDensity { spec, grid, current, finite_difference: r.finite_difference, density_csv: r.density_csv }
            }
            Kind::SequenceScan | Kind::M1Scan => {
                let r: ScanRaw = take(table)?;
                let quantity = if kind == Kind::SequenceScan {
                    if r.t.is_some() {
                        return Err(Failure::config("`t` belongs to m1-scan"));
                    }
                    let a = r.a.ok_or_else(|| Failure::config("sequence-scan needs the exponent `a`"))?;
                    let w = match r.weight.as_deref().unwrap_or("shifted") {
                        "shifted" => WeightKind::ShiftedPower { a },
                        "abs" => WeightKind::AbsPower { a },
                        other => return Err(Failure::config(format!("unknown weight `{other}` (shifted or abs)"))),
                    };
                    w.validate().map_err(Failure::config)?;
                    Quantity::Weighted(w)
                } else {
                    if r.a.is_some() || r.weight.is_some() {
                        return Err(Failure::config("`a` and `weight` belong to sequence-scan"));
                    }
                    Quantity::M1(positive("t", r.t.ok_or_else(|| Failure::config("m1-scan needs the truncation `t`"))?)?)
                };
                let grid = r.grid.as_ref().map(GridConfig::build).transpose()?;
                let spec = spec(&r.spec, r.n.or(grid.as_ref().map(|g| g.n())))?;
                let region = r.region.build();
                if region.is_empty(spec.n()) {
                    return Err(Failure::config("scan region is empty"));
                }
                if let Some(s) = r.smoothing {
                    positive("smoothing", s)?;
                }
                Plan::Scan {
                    spec,
                    scheme: scheme(&r.scheme)?,
                    quantity,
                    region,
                    js: indices(r.j_from, r.j_to)?,
                    estimator: r.estimator,
                    grid,
                    smoothing: r.smoothing,
                    finite_difference: r.finite_difference.unwrap_or(true),
                    rule: rule(&r.rule)?,
                }
            }
            Kind::Blocki => {
                let r: BlockiRaw = take(table)?;
                let w0 = Complex64::new(r.w0[0], r.w0[1]);
                let m = w0.norm();
                if !(r.r > 0.0 && 2.0 * r.r < m.min(1.0 - m)) {
                    return Err(Failure::config(format!("need 0 < 2r < min(|w0|, 1 - |w0|); r = {}, |w0| = {m}", r.r)));
                }
                Plan::Blocki { chi: chi(&r.chi)?, w0, r: r.r }
            }
            Kind::Cegrell => {
                let r: CegrellRaw = take(table)?;
                if !(r.rho > 0.0 && r.rho <= 1.0) {
                    return Err(Failure::config(format!("rho must lie in (0, 1], got {}", r.rho)));
                }
                if let Some(h) = r.grid_h {
                    positive("grid_h", h)?;
                }
                Plan::Cegrell { js: indices(r.j_from, r.j_to.unwrap_or(r.j_from))?, rho: r.rho, grid_h: r.grid_h }
            }
            Kind::Compare => {
                let r: CompareRaw = take(table)?;
                let grid = r.grid.build()?;
                let n = r.n.unwrap_or(grid.n());
                let pair = match (&r.u, &r.v, &r.random) {
                    (Some(u), Some(v), None) => Some((spec(u, Some(n))?, spec(v, Some(n))?)),
                    (None, None, Some(_)) => None,
                    _ => return Err(Failure::config("compare needs either both `u` and `v` or a `[random]` table")),
                };
                let cases = r.random.as_ref().map(|x| x.cases);
                if cases == Some(0) {
                    return Err(Failure::config("random.cases must be positive"));
                }
                let mut options = maxpsh::comparison::ComparisonOptions {
                    delta_shift: r.delta_shift,
                    tolerance: r.tolerance,
                    finite_difference: r.finite_difference,
                    smoothing: r.smoothing,
                    ..Default::default()
                };
                if let Some(b) = r.boundary_tol {
                    options.boundary_tol = b;
                }
                Plan::Compare { pair, cases, current: current(r.current, r.q, grid.n())?, grid, options }
            }
            Kind::Capacity => {
                let r: CapacityRaw = take(table)?;
                let grid = r.grid.build()?;
                let n = grid.n();
                let mut candidates = r.candidates.iter().map(|c| spec(c, Some(n))).collect::<Result<Vec<_>, _>>()?;
                if let Some(e) = &r.envelopes {
                    candidates.extend(maxpsh::comparison::default_candidates(n, e.outer, &e.inner, e.eps).map_err(Failure::config)?);
                }
                if candidates.is_empty() {
                    return Err(Failure::config("capacity needs `candidates` or an `[envelopes]` table"));
                }
                let options = maxpsh::comparison::CapacityOptions { finite_difference: r.finite_difference, smoothing: r.smoothing };
                Plan::Capacity { k: r.k.build(), current: current(r.current, r.q, n)?, grid, candidates, options }
            }
            Kind::Certificate => {
                let r: CertificateRaw = take(table)?;
                let grid = r.grid.build()?;
                if !(1..=2).contains(&r.fixed) {
                    return Err(Failure::config("`fixed` must be 1 or 2"));
                }
                let family = SliceFamily::lattice(&grid, r.fixed - 1, r.stride).map_err(Failure::config)?;
                let mut options = maxpsh::comparison::CertificateOptions { rule: rule(&r.rule)?, smoothing: r.smoothing, ..Default::default() };
                if let Some(fd) = r.finite_difference {
                    options.finite_difference = fd;
                }
                Plan::Certificate {
                    u: spec(&r.u, Some(grid.n()))?,
                    scheme: scheme(&r.scheme)?,
                    grid,
                    family,
                    js: indices(r.j_from, r.j_to)?,
                    options,
                }
            }
        };
        Ok(ExperimentConfig { kind, seed, memory_ceiling_gib, plan })
    }

    /// Grid nodes the run allocates at peak, and a byte estimate.
    pub fn footprint(&self) -> (u64, u64) {
        let nodes = |g: &GridDomain| g.len() as u64;
        let (count, fields) = match &self.plan {
            Plan::MaDensity { grid, .. } => (nodes(grid), 1),
            Plan::Scan { grid: Some(g), js, estimator, .. } if *estimator != Estimator::RadialProduct && *estimator != Estimator::BiRadial => {
                (nodes(g), js.len().min(rayon::current_num_threads()) as u64)
            }
            Plan::Scan { .. } | Plan::Blocki { .. } => (0, 0),
            Plan::Cegrell { grid_h: Some(h), rho, .. } => {
                let per_axis = ((2.0 * (rho + 2.0 * h)) / h + 1e-9).floor() as u64 + 1;
                (per_axis.pow(4), 1)
            }
            Plan::Cegrell { .. } => (0, 0),
            Plan::Compare { grid, cases: None, .. } => (nodes(grid), 2),
            Plan::Compare { grid, cases: Some(c), .. } => (nodes(grid), 2 * rayon::current_num_threads().min(*c) as u64),
            Plan::Capacity { grid, .. } => (nodes(grid), 1),
            Plan::Certificate { grid, js, .. } => (nodes(grid), js.len() as u64),
        };
        (count, count * fields * BYTES_PER_NODE)
    }
}
