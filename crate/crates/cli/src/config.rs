use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pulsefront::fronts::{FrontConfig, RunBudget};
use pulsefront::model::{
    make_xin_example, read_table, CoefficientProfile, ProblemInstance, ReactionProfile, ThetaMap,
};
use pulsefront::numerics::PeriodicSpline;
use pulsefront::pde::{DatumStyle, Scheme};
use pulsefront::spectral::{DecayRootConfig, NewtonConfig};
use pulsefront::stability::{FrameConfig, StabilityConfig};

/// A problem with the configuration itself; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub workers: usize,
    pub profile: Option<ProfileSection>,
    pub numerics: NumericsSection,
    pub budget: BudgetSection,
    pub output: OutputSection,
    pub homogenize: HomogenizeSection,
    pub eigen: EigenSection,
    pub steady: NewtonConfig,
    pub scan: ScanSection,
    pub stability: StabilitySection,
    pub decay: DecaySection,
    pub quench: QuenchSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            profile: None,
            numerics: NumericsSection::default(),
            budget: BudgetSection::default(),
            output: OutputSection::default(),
            homogenize: HomogenizeSection::default(),
            eigen: EigenSection::default(),
            steady: NewtonConfig::default(),
            scan: ScanSection::default(),
            stability: StabilitySection::default(),
            decay: DecaySection::default(),
            quench: QuenchSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cubic,
    Xin,
    Tabulated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub family: Family,
    pub period: f64,
    pub a_mean: f64,
    pub a_amplitude: f64,
    pub theta: f64,
    pub theta_amplitude: f64,
    pub scale: f64,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub a_table: Option<PathBuf>,
    pub theta_table: Option<PathBuf>,
    pub xin_delta: f64,
    pub xin_lambda: f64,
    pub xin_mu: f64,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            family: Family::Cubic,
            period: 1.0,
            a_mean: 1.0,
            a_amplitude: 0.0,
            theta: 0.3,
            theta_amplitude: 0.0,
            scale: 1.0,
            gamma: None,
            delta: None,
            a_table: None,
            theta_table: None,
            xin_delta: 0.2,
            xin_lambda: 0.0,
            xin_mu: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatumKind {
    Step,
    Ramp,
    Tanh,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub nodes_per_period: usize,
    pub max_h: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub half_width: Option<f64>,
    pub datum: DatumKind,
    pub datum_width: f64,
    pub interface: f64,
    pub tol_puls: f64,
    pub tol_stat: f64,
    pub stationary_window: f64,
    pub transient_min: f64,
    pub transient_periods: f64,
    pub snapshots_per_period: usize,
    pub level_interval: f64,
    pub check_interval: f64,
    pub quad_n: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let f = FrontConfig::default();
        Self {
            nodes_per_period: f.nodes_per_period,
            max_h: f.max_h,
            dt: f.dt,
            scheme: f.scheme,
            half_width: f.half_width,
            datum: DatumKind::Step,
            datum_width: 1.0,
            interface: f.interface,
            tol_puls: f.tol_puls,
            tol_stat: f.tol_stat,
            stationary_window: f.stationary_window,
            transient_min: f.transient_min,
            transient_periods: f.transient_periods,
            snapshots_per_period: f.snapshots_per_period,
            level_interval: f.level_interval,
            check_interval: f.check_interval,
            quad_n: 2048,
        }
    }
}

impl NumericsSection {
    pub fn front_config(&self) -> FrontConfig {
        FrontConfig {
            nodes_per_period: self.nodes_per_period,
            max_h: self.max_h,
            dt: self.dt,
            scheme: self.scheme,
            half_width: self.half_width,
            datum: match self.datum {
                DatumKind::Step => DatumStyle::Step,
                DatumKind::Ramp => DatumStyle::Ramp {
                    width: self.datum_width,
                },
                DatumKind::Tanh => DatumStyle::Tanh {
                    width: self.datum_width,
                },
            },
            interface: self.interface,
            tol_puls: self.tol_puls,
            tol_stat: self.tol_stat,
            stationary_window: self.stationary_window,
            transient_min: self.transient_min,
            transient_periods: self.transient_periods,
            snapshots_per_period: self.snapshots_per_period,
            level_interval: self.level_interval,
            check_interval: self.check_interval,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub t_max: f64,
    pub max_steps: Option<u64>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            t_max: 3000.0,
            max_steps: None,
        }
    }
}

impl BudgetSection {
    pub fn budget(&self) -> RunBudget {
        RunBudget {
            t_max: self.t_max,
            max_steps: self.max_steps.unwrap_or(u64::MAX),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub prefix: String,
    pub json: bool,
    pub plotdata: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            prefix: String::new(),
            json: true,
            plotdata: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomogenizeSection {
    pub tol_c: f64,
    pub periods: Vec<f64>,
}

impl Default for HomogenizeSection {
    fn default() -> Self {
        Self {
            tol_c: 1e-10,
            periods: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenBoundary {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenSection {
    pub boundary: EigenBoundary,
    pub state: f64,
    pub radius: f64,
    pub nodes: usize,
    pub nodes_per_period: usize,
    pub radii: Vec<f64>,
}

impl Default for EigenSection {
    fn default() -> Self {
        Self {
            boundary: EigenBoundary::Periodic,
            state: 0.0,
            radius: 10.0,
            nodes: 2001,
            nodes_per_period: 256,
            radii: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub periods: Vec<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            periods: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityDatum {
    Shifted,
    Perturbed,
    Step,
    Initialv2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub datum: StabilityDatum,
    pub shift: f64,
    pub bump: f64,
    pub left_offset: f64,
    pub right_offset: f64,
    pub t_max: f64,
    pub probe_interval: Option<f64>,
    pub stop_error: f64,
    pub stabilization_periods: f64,
    pub fit_periods: f64,
    pub search_periods: f64,
    pub far_field: f64,
    pub supersub: bool,
    pub supersub_k: Option<f64>,
    pub spectrum: bool,
    pub spectrum_nodes_per_period: usize,
    pub spectrum_half_width: f64,
    pub spectrum_margin: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        let s = StabilityConfig::default();
        Self {
            datum: StabilityDatum::Perturbed,
            shift: 3.0,
            bump: 0.05,
            left_offset: 0.15,
            right_offset: 0.1,
            t_max: s.t_max,
            probe_interval: s.probe_interval,
            stop_error: s.stop_error,
            stabilization_periods: s.stabilization_periods,
            fit_periods: s.fit_periods,
            search_periods: s.search_periods,
            far_field: s.far_field,
            supersub: false,
            supersub_k: None,
            spectrum: false,
            spectrum_nodes_per_period: 10,
            spectrum_half_width: 20.0,
            spectrum_margin: 0.05,
        }
    }
}

impl StabilitySection {
    pub fn config(&self, scheme: Scheme) -> StabilityConfig {
        StabilityConfig {
            t_max: self.t_max,
            probe_interval: self.probe_interval,
            stop_error: self.stop_error,
            stabilization_periods: self.stabilization_periods,
            fit_periods: self.fit_periods,
            search_periods: self.search_periods,
            scheme,
            far_field: self.far_field,
        }
    }

    pub fn frame_config(&self, dt: f64) -> FrameConfig {
        FrameConfig {
            nodes_per_period: Some(self.spectrum_nodes_per_period),
            half_width: Some(self.spectrum_half_width),
            dt,
            ..FrameConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    pub speed: Option<f64>,
    pub nodes: usize,
    pub mu_max: f64,
    pub mu_step: f64,
    pub tol: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        let d = DecayRootConfig::default();
        Self {
            speed: None,
            nodes: d.nodes,
            mu_max: d.mu_max,
            mu_step: d.mu_step,
            tol: d.tol,
        }
    }
}

impl DecaySection {
    pub fn root_config(&self) -> DecayRootConfig {
        DecayRootConfig {
            nodes: self.nodes,
            mu_max: self.mu_max,
            mu_step: self.mu_step,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuenchSection {
    pub delta: f64,
    pub mu: f64,
    pub lambdas: Vec<f64>,
}

impl Default for QuenchSection {
    fn default() -> Self {
        Self {
            delta: 0.2,
            mu: 0.3,
            lambdas: vec![0.0, 1.0, 2.0, 3.0, 4.0],
        }
    }
}

/// `(key, description)`; defaults are read from the `Default` impls.
pub const KEYS: &[(&str, &str)] = &[
    (
        "workers",
        "worker threads for sweeps and the linearized period map",
    ),
    ("profile.family", "cubic | xin | tabulated"),
    ("profile.period", "period L of the medium"),
    (
        "profile.a_mean",
        "diffusivity a(y) = a_mean + a_amplitude cos(2πy)",
    ),
    ("profile.a_amplitude", "cosine amplitude of a"),
    (
        "profile.theta",
        "intermediate zero θ(y) = theta + theta_amplitude cos(2πy)",
    ),
    ("profile.theta_amplitude", "cosine amplitude of θ"),
    ("profile.scale", "reaction is scale·u(1-u)(u-θ)"),
    (
        "profile.gamma",
        "stability margin γ; automatic with delta when absent",
    ),
    (
        "profile.delta",
        "stability margin δ; automatic with gamma when absent",
    ),
    (
        "profile.a_table",
        "tabulated family: `y a` table with `# period=1` header",
    ),
    (
        "profile.theta_table",
        "tabulated family: `y θ` table with `# period=1` header",
    ),
    (
        "profile.xin_delta",
        "xin family: δ in a = 1 + δλ sin(2πy), f = μ²u(1-u)(u-1/2+δ)",
    ),
    ("profile.xin_lambda", "xin family: λ"),
    ("profile.xin_mu", "xin family: μ"),
    ("numerics.nodes_per_period", "grid nodes per period"),
    ("numerics.max_h", "largest grid step"),
    ("numerics.dt", "time step"),
    ("numerics.scheme", "imex | crank-nicolson"),
    (
        "numerics.half_width",
        "half-width of the window; sized from decay rates when absent",
    ),
    ("numerics.datum", "initial front shape: step | ramp | tanh"),
    ("numerics.datum_width", "width of the ramp or tanh datum"),
    ("numerics.interface", "position of the initial interface"),
    (
        "numerics.tol_puls",
        "pulsating-relation tolerance for propagating fronts",
    ),
    ("numerics.tol_stat", "stationary residual tolerance"),
    (
        "numerics.stationary_window",
        "time window over which a stationary front must stay put",
    ),
    (
        "numerics.transient_min",
        "minimum time discarded as transient",
    ),
    (
        "numerics.transient_periods",
        "transient measured in front periods L/|c|",
    ),
    (
        "numerics.snapshots_per_period",
        "snapshots per front period for profile extraction",
    ),
    ("numerics.level_interval", "time between level-set samples"),
    ("numerics.check_interval", "time between convergence checks"),
    (
        "numerics.quad_n",
        "quadrature nodes for averaged quantities",
    ),
    ("budget.t_max", "largest simulated time per front run"),
    (
        "budget.max_steps",
        "largest step count per front run; unlimited when absent",
    ),
    ("output.prefix", "prefix of every artifact file name"),
    ("output.json", "write JSON reports"),
    ("output.plotdata", "write whitespace-separated plot data"),
    (
        "homogenize.tol_c",
        "bisection tolerance on the averaged speed",
    ),
    (
        "homogenize.periods",
        "decreasing periods for the convergence sweep; none skips it",
    ),
    ("eigen.boundary", "periodic | dirichlet"),
    (
        "eigen.state",
        "constant state the operator is linearized about",
    ),
    ("eigen.radius", "half-width R of the Dirichlet interval"),
    ("eigen.nodes", "interior nodes of the Dirichlet grid"),
    (
        "eigen.nodes_per_period",
        "nodes per period of the periodic grid",
    ),
    (
        "eigen.radii",
        "increasing R values for the λ₁,R trace; none skips it",
    ),
    ("steady.nodes_per_period", "Newton grid nodes per period"),
    ("steady.tol", "Newton sup-norm residual tolerance"),
    ("steady.max_iter", "Newton iterations per seed"),
    ("steady.max_halvings", "step halvings per Newton iteration"),
    (
        "steady.trivial_tol",
        "distance from 0 or 1 below which a state is trivial",
    ),
    (
        "steady.semistable_band",
        "|λ₁| below this is reported as semistable-boundary",
    ),
    ("scan.periods", "monotone period grid"),
    ("stability.datum", "shifted | perturbed | step | initialv2"),
    (
        "stability.shift",
        "shifted datum: front translated by this distance",
    ),
    (
        "stability.bump",
        "perturbed datum: amplitude of the added gaussian",
    ),
    (
        "stability.left_offset",
        "initialv2 datum: lower state plus this on x < 0",
    ),
    (
        "stability.right_offset",
        "initialv2 datum: upper state minus this on x ≥ 0",
    ),
    ("stability.t_max", "largest simulated time"),
    (
        "stability.probe_interval",
        "time between phase probes; a quarter period when absent",
    ),
    (
        "stability.stop_error",
        "stop once the aligned error falls below this",
    ),
    (
        "stability.stabilization_periods",
        "periods over which τ must settle",
    ),
    (
        "stability.fit_periods",
        "minimum span of the rate fit in periods",
    ),
    (
        "stability.search_periods",
        "phase search half-width in periods",
    ),
    (
        "stability.far_field",
        "window fraction where far-field conditions are checked",
    ),
    (
        "stability.supersub",
        "also verify the explicit super/subsolutions",
    ),
    (
        "stability.supersub_k",
        "Lipschitz constant K used there; lip_K when absent",
    ),
    (
        "stability.spectrum",
        "also compute the linearized period-map spectrum",
    ),
    (
        "stability.spectrum_nodes_per_period",
        "coarse frame nodes per period",
    ),
    ("stability.spectrum_half_width", "coarse frame half-width"),
    (
        "stability.spectrum_margin",
        "margin over e^{-γT/2} when counting modes",
    ),
    (
        "decay.speed",
        "speed for the T_μ roots; measured from a front run when absent",
    ),
    ("decay.nodes", "minimum nodes of the T_μ discretization"),
    ("decay.mu_max", "upper end of the μ scan"),
    ("decay.mu_step", "μ scan step"),
    ("decay.tol", "root bisection tolerance"),
    ("quench.delta", "δ of the xin family"),
    ("quench.mu", "μ of the xin family"),
    ("quench.lambdas", "λ grid; sorted ascending in the output"),
];

fn defaults_value() -> toml::Table {
    let cfg = ExperimentConfig {
        profile: Some(ProfileSection::default()),
        ..ExperimentConfig::default()
    };
    toml::Table::try_from(&cfg).expect("defaults serialize")
}

fn lookup<'a>(table: &'a toml::Table, key: &str) -> Option<&'a toml::Value> {
    match key.split_once('.') {
        Some((section, rest)) => table.get(section)?.as_table()?.get(rest),
        None => table.get(key),
    }
}

fn show(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

/// Text listing every key with its default.
pub fn keys_help() -> String {
    let defaults = defaults_value();
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from(
        "CONFIG KEYS (TOML, one level of [section] headers; unknown keys are rejected)\n\
         The [profile] section is required except for quench-scan.\n\n",
    );
    for (key, doc) in KEYS {
        let d = lookup(&defaults, key)
            .map(show)
            .unwrap_or_else(|| "(auto)".into());
        out.push_str(&format!("  {key:<width$}  default {d}\n      {doc}\n"));
    }
    out
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, col)
}

/// Parses the text and names the offending key on failure.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let key = e
            .message()
            .split('`')
            .nth(1)
            .map(str::to_string)
            .or_else(|| e.span().map(|s| text[s].trim().to_string()))
            .unwrap_or_else(|| "?".into());
        let at = e.span().map(|s| {
            let (l, c) = line_col(text, s.start);
            format!(" (line {l}, column {c})")
        });
        ConfigError::new(
            key,
            format!("{}{}", e.message().trim(), at.unwrap_or_default()),
        )
    })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::new("--config", format!("cannot read {}: {e}", path.display()))
    })?;
    let mut cfg = parse(&text)?;
    if let Some(p) = cfg.profile.as_mut() {
        let base = path.parent().unwrap_or(Path::new("."));
        for t in [&mut p.a_table, &mut p.theta_table].into_iter().flatten() {
            if t.is_relative() {
                *t = base.join(&*t);
            }
        }
    }
    Ok(cfg)
}

impl ExperimentConfig {
    /// First 16 hex digits of the SHA-256 of the resolved configuration.
    pub fn hash(&self) -> String {
        let text = self.canonical();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// The configuration with every default filled in.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn profile(&self) -> Result<&ProfileSection, ConfigError> {
        self.profile
            .as_ref()
            .ok_or_else(|| ConfigError::new("profile", "missing [profile] section"))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        let n = &self.numerics;
        for (key, v) in [
            ("numerics.dt", n.dt),
            ("numerics.max_h", n.max_h),
            ("numerics.tol_puls", n.tol_puls),
            ("numerics.tol_stat", n.tol_stat),
            ("budget.t_max", self.budget.t_max),
            ("stability.t_max", self.stability.t_max),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::new(key, format!("must be positive, got {v}")));
            }
        }
        if n.nodes_per_period < 4 {
            return Err(ConfigError::new(
                "numerics.nodes_per_period",
                "must be at least 4",
            ));
        }
        if n.quad_n < 2 {
            return Err(ConfigError::new("numerics.quad_n", "must be at least 2"));
        }
        Ok(())
    }
}

impl ProfileSection {
    /// Builds the instance; model rejections are configuration errors.
    pub fn instance(&self) -> Result<ProblemInstance, ConfigError> {
        let model = |key: &str| {
            let key = key.to_string();
            move |e: pulsefront::model::ModelError| ConfigError::new(key.clone(), e.to_string())
        };
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(ConfigError::new("profile.period", "must be positive"));
        }
        if self.family == Family::Xin {
            return make_xin_example(self.xin_delta, self.xin_lambda, self.xin_mu)
                .and_then(|i| i.with_period(self.period))
                .map_err(model("profile.xin_lambda"));
        }
        let coeff = match (&self.a_table, self.family) {
            (Some(path), Family::Tabulated) => {
                let samples = read_table(path).map_err(model("profile.a_table"))?;
                CoefficientProfile::tabulated(samples).map_err(model("profile.a_table"))?
            }
            (Some(_), _) => {
                return Err(ConfigError::new(
                    "profile.a_table",
                    "only used with family = \"tabulated\"",
                ))
            }
            _ if self.a_amplitude == 0.0 => {
                CoefficientProfile::constant(self.a_mean).map_err(model("profile.a_mean"))?
            }
            _ => CoefficientProfile::cosine(self.a_mean, self.a_amplitude)
                .map_err(model("profile.a_amplitude"))?,
        };
        let theta =
            match (&self.theta_table, self.family) {
                (Some(path), Family::Tabulated) => {
                    let samples = read_table(path).map_err(model("profile.theta_table"))?;
                    ThetaMap::Tabulated(PeriodicSpline::new(samples).ok_or_else(|| {
                        ConfigError::new("profile.theta_table", "too few samples")
                    })?)
                }
                (Some(_), _) => {
                    return Err(ConfigError::new(
                        "profile.theta_table",
                        "only used with family = \"tabulated\"",
                    ))
                }
                _ if self.theta_amplitude == 0.0 => ThetaMap::Constant(self.theta),
                _ => ThetaMap::Cosine {
                    mean: self.theta,
                    amplitude: self.theta_amplitude,
                },
            };
        let reaction = match (self.gamma, self.delta) {
            (Some(g), Some(d)) => ReactionProfile::scaled_cubic(theta, self.scale, g, d)
                .map_err(model("profile.theta"))?,
            (None, None) => {
                ReactionProfile::cubic_auto(theta, self.scale).map_err(model("profile.theta"))?
            }
            (Some(_), None) => {
                return Err(ConfigError::new(
                    "profile.delta",
                    "give both gamma and delta or neither",
                ))
            }
            (None, Some(_)) => {
                return Err(ConfigError::new(
                    "profile.gamma",
                    "give both gamma and delta or neither",
                ))
            }
        };
        let report = reaction.validate(256).map_err(model("profile"))?;
        if let Some(v) = report.violations.first() {
            return Err(ConfigError::new(
                "profile",
                format!(
                    "hypothesis {:?} fails at y={}, u={} (value {})",
                    v.condition, v.y, v.u, v.value
                ),
            ));
        }
        ProblemInstance::new(coeff, reaction, self.period).map_err(model("profile.period"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf_keys(t: &toml::Table, prefix: &str, out: &mut Vec<String>) {
        for (k, v) in t {
            let key = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            match v.as_table() {
                Some(inner) => leaf_keys(inner, &key, out),
                None => out.push(key),
            }
        }
    }

    #[test]
    fn every_default_key_is_documented() {
        let mut keys = Vec::new();
        leaf_keys(&defaults_value(), "", &mut keys);
        for k in keys {
            assert!(KEYS.iter().any(|(d, _)| *d == k), "undocumented key {k}");
        }
    }

    #[test]
    fn every_documented_key_parses() {
        for (key, _) in KEYS {
            let (section, leaf) = key.split_once('.').unwrap_or(("", key));
            let defaults = defaults_value();
            let value = lookup(&defaults, key)
                .cloned()
                .unwrap_or(toml::Value::Float(1.0));
            let value = if leaf == "max_steps" {
                toml::Value::Integer(10)
            } else {
                value
            };
            let value = if leaf.ends_with("_table") {
                toml::Value::String("t.txt".into())
            } else {
                value
            };
            let text = if section.is_empty() {
                format!("{leaf} = {value}\n")
            } else {
                format!("[{section}]\n{leaf} = {value}\n")
            };
            parse(&text).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse("[numerics]\nbogus_key = 1\n").unwrap_err();
        assert_eq!(e.key, "bogus_key");
        let e = parse("[nosuch]\nx = 1\n").unwrap_err();
        assert_eq!(e.key, "nosuch");
    }

    #[test]
    fn hash_depends_on_resolved_values_only() {
        let a = parse("[profile]\ntheta = 0.3\n").unwrap();
        let b = parse("[profile]\nfamily = \"cubic\"\ntheta = 0.3\nperiod = 1.0\n").unwrap();
        let c = parse("[profile]\ntheta = 0.35\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn missing_profile_is_a_config_error() {
        let cfg = parse("workers = 2\n").unwrap();
        assert_eq!(cfg.profile().unwrap_err().key, "profile");
    }

    #[test]
    fn rejected_model_names_the_key() {
        let cfg =
            parse("[profile]\nfamily = \"xin\"\nxin_delta = 0.2\nxin_lambda = 5.0\n").unwrap();
        assert_eq!(
            cfg.profile().unwrap().instance().unwrap_err().key,
            "profile.xin_lambda"
        );
        let cfg = parse("[profile]\ntheta = 1.2\n").unwrap();
        assert_eq!(
            cfg.profile().unwrap().instance().unwrap_err().key,
            "profile.theta"
        );
    }

    #[test]
    fn help_lists_defaults() {
        let h = keys_help();
        assert!(h.contains("profile.theta "));
        assert!(h.contains("default 0.3"));
        assert!(h.contains("stability.probe_interval"));
    }
}
