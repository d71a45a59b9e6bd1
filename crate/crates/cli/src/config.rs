//! Sweep configuration: a TOML document, optionally patched by `--set`
//! overrides, deserialized with unknown keys rejected.
//!
//! Any scalar in the `[ensemble]` or `[two_group]` block may be replaced by a
//! range `{ min, max, count, scale = "linear" | "log" }`. At most two ranges
//! are allowed; the first one in block order is the outer grid axis.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use tlsync_core::dynamics::FlowKind;
use tlsync_core::oracle::{PairCoupling, MAX_SITES};
use tlsync_core::spectral::{Window, DEFAULT_SYNC_THRESHOLD};
use tlsync_core::two_group::RunControls;
use tlsync_core::{BlochVector, CrossPhase, EnsembleParams, IntegratorControls, TwoGroupParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Flowfield,
    Stability,
    PhaseDiagram,
    FreqShift,
    TwoGroup,
    Arnold,
    PhaseTuning,
    Oracle,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Flowfield => "flowfield",
            Mode::Stability => "stability",
            Mode::PhaseDiagram => "phase_diagram",
            Mode::FreqShift => "freq_shift",
            Mode::TwoGroup => "two_group",
            Mode::Arnold => "arnold",
            Mode::PhaseTuning => "phase_tuning",
            Mode::Oracle => "oracle",
        }
    }

    pub fn uses_two_groups(self) -> bool {
        matches!(self, Mode::TwoGroup | Mode::Arnold | Mode::PhaseTuning)
    }

    /// Allowed number of ranged parameters.
    fn range_bounds(self) -> (usize, usize) {
        match self {
            Mode::Simulate | Mode::Flowfield | Mode::TwoGroup | Mode::Oracle => (0, 0),
            Mode::Stability => (0, 2),
            Mode::PhaseDiagram | Mode::FreqShift | Mode::Arnold | Mode::PhaseTuning => (1, 2),
        }
    }

    fn default_t_end(self) -> f64 {
        match self {
            Mode::Simulate => 400.0,
            Mode::Flowfield => 50.0,
            Mode::Stability => 0.0,
            Mode::PhaseDiagram => 1000.0,
            Mode::FreqShift => 600.0,
            Mode::TwoGroup | Mode::Arnold | Mode::PhaseTuning => 1000.0,
            Mode::Oracle => 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == last {
                    return self.max;
                }
                let f = k as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }

    fn check(&self, path: &str) -> Result<(), CliError> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(CliError::config(path, "range bounds must be finite"));
        }
        if self.count < 2 {
            return Err(CliError::config(path, "a range needs count >= 2"));
        }
        if !(self.max > self.min) {
            return Err(CliError::config(path, "a range needs max > min"));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(CliError::config(path, "a log range needs min > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Scalar(f64),
    Range(RangeSpec),
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Scalar(v)
    }
}

/// A ranged parameter expanded to its grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub values: Vec<f64>,
    pub scale: Scale,
}

fn axes_of(section: &str, fields: &[(&'static str, Param)]) -> Result<Vec<Axis>, CliError> {
    let mut axes = Vec::new();
    for (name, p) in fields {
        match p {
            Param::Range(r) => {
                r.check(&format!("{section}.{name}"))?;
                axes.push(Axis { name, values: r.values(), scale: r.scale });
            }
            Param::Scalar(v) if !v.is_finite() => {
                return Err(CliError::config(format!("{section}.{name}"), "value must be finite"));
            }
            Param::Scalar(_) => {}
        }
    }
    Ok(axes)
}

/// Values of every field at one grid point.
fn point(fields: &[(&'static str, Param)], axes: &[Axis], index: &[usize]) -> Vec<f64> {
    fields
        .iter()
        .map(|(name, p)| match p {
            Param::Scalar(v) => *v,
            Param::Range(_) => {
                let k = axes.iter().position(|a| a.name == *name).expect("axis for every range");
                axes[k].values[index[k]]
            }
        })
        .collect()
}

/// Single ensemble in ratio parametrization: `coupling = V/(γ₊+γ₋)`,
/// `gain_ratio = γ₊/γ₋`, `gamma_sum = γ₊+γ₋` sets the unit of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleBlock {
    pub omega0: Param,
    pub coupling: Param,
    pub theta: Param,
    pub gain_ratio: Param,
    pub gamma_sum: Param,
}

impl Default for EnsembleBlock {
    fn default() -> Self {
        Self {
            omega0: 1.0.into(),
            coupling: 1.0.into(),
            theta: FRAC_PI_2.into(),
            gain_ratio: 5.0.into(),
            gamma_sum: 1.0.into(),
        }
    }
}

/// Scalar ensemble parameters at one grid point, in configuration units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsemblePoint {
    pub omega0: f64,
    pub coupling: f64,
    pub theta: f64,
    pub gain_ratio: f64,
    pub gamma_sum: f64,
}

impl EnsemblePoint {
    pub fn params(&self) -> tlsync_core::Result<EnsembleParams> {
        EnsembleParams::from_ratios(self.omega0, self.coupling, self.theta, self.gain_ratio, self.gamma_sum)
    }
}

impl EnsembleBlock {
    fn fields(&self) -> [(&'static str, Param); 5] {
        [
            ("omega0", self.omega0),
            ("coupling", self.coupling),
            ("theta", self.theta),
            ("gain_ratio", self.gain_ratio),
            ("gamma_sum", self.gamma_sum),
        ]
    }

    pub fn axes(&self) -> Result<Vec<Axis>, CliError> {
        axes_of("ensemble", &self.fields())
    }

    pub fn at(&self, axes: &[Axis], index: &[usize]) -> EnsemblePoint {
        let v = point(&self.fields(), axes, index);
        EnsemblePoint { omega0: v[0], coupling: v[1], theta: v[2], gain_ratio: v[3], gamma_sum: v[4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossPhaseName {
    #[default]
    Shared,
    Conjugate,
}

/// Two detuned groups. Rates, couplings and detuning are absolute; with the
/// default `gamma_plus = 1` they are in units of `γ₊`. Both groups share
/// `coupling` as their intra-group strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoGroupBlock {
    pub delta: Param,
    pub coupling: Param,
    pub coupling_ab: Param,
    pub theta_a: Param,
    pub theta_b: Param,
    pub theta_ab: Param,
    pub gain_ratio: Param,
    pub gamma_plus: Param,
    pub cross_phase: CrossPhaseName,
}

impl Default for TwoGroupBlock {
    fn default() -> Self {
        Self {
            delta: 0.1.into(),
            coupling: 6.0.into(),
            coupling_ab: 1.0.into(),
            theta_a: FRAC_PI_2.into(),
            theta_b: FRAC_PI_2.into(),
            theta_ab: FRAC_PI_2.into(),
            gain_ratio: 5.0.into(),
            gamma_plus: 1.0.into(),
            cross_phase: CrossPhaseName::Shared,
        }
    }
}

impl TwoGroupBlock {
    fn fields(&self) -> [(&'static str, Param); 8] {
        [
            ("delta", self.delta),
            ("coupling", self.coupling),
            ("coupling_ab", self.coupling_ab),
            ("theta_a", self.theta_a),
            ("theta_b", self.theta_b),
            ("theta_ab", self.theta_ab),
            ("gain_ratio", self.gain_ratio),
            ("gamma_plus", self.gamma_plus),
        ]
    }

    pub fn axes(&self) -> Result<Vec<Axis>, CliError> {
        axes_of("two_group", &self.fields())
    }

    pub fn at(&self, axes: &[Axis], index: &[usize]) -> Result<TwoGroupParams, String> {
        let v = point(&self.fields(), axes, index);
        let (delta, coupling, coupling_ab, theta_a, theta_b, theta_ab, gain_ratio, gamma_plus) =
            (v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
        if !(gain_ratio > 0.0) {
            return Err(format!("gain_ratio = {gain_ratio} must be positive"));
        }
        let p = TwoGroupParams {
            delta,
            coupling_a: coupling,
            coupling_b: coupling,
            coupling_ab,
            theta_a,
            theta_b,
            theta_ab,
            gamma_plus,
            gamma_minus: if gain_ratio.is_infinite() { 0.0 } else { gamma_plus / gain_ratio },
            cross_phase: match self.cross_phase {
                CrossPhaseName::Shared => CrossPhase::Shared,
                CrossPhaseName::Conjugate => CrossPhase::Conjugate,
            },
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowName {
    #[default]
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    /// Defaults depend on the mode and are filled in by [`Config::resolve`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    pub dt_sample: f64,
    pub method: MethodName,
    pub rtol: f64,
    pub atol: f64,
    pub substeps: usize,
    /// When absent, single-ensemble modes discard
    /// `max(20/(γ₊+γ₋), 40π/|ω₀|)` or half the run, whichever is longer;
    /// two-group modes discard half the run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient_fraction: Option<f64>,
    pub window: WindowName,
    pub sync_threshold: f64,
    pub carrier: f64,
    pub initial: [f64; 3],
    pub initial_b: [f64; 3],
}

impl Default for RunBlock {
    fn default() -> Self {
        let two = RunControls::default();
        Self {
            t_end: None,
            dt_sample: 0.1,
            method: MethodName::Adaptive,
            rtol: 1e-9,
            atol: 1e-9,
            substeps: 10,
            transient_fraction: None,
            window: WindowName::Rectangular,
            sync_threshold: DEFAULT_SYNC_THRESHOLD,
            carrier: two.carrier,
            initial: BlochVector::DEFAULT_INITIAL.to_array(),
            initial_b: two.initial_b.to_array(),
        }
    }
}

impl RunBlock {
    pub fn t_end(&self) -> f64 {
        self.t_end.expect("resolved before use")
    }

    pub fn integrator(&self) -> IntegratorControls {
        match self.method {
            MethodName::Adaptive => IntegratorControls::adaptive(self.rtol, self.atol),
            MethodName::Fixed => IntegratorControls::fixed(self.substeps),
        }
    }

    pub fn window(&self) -> Window {
        match self.window {
            WindowName::Rectangular => Window::Rectangular,
            WindowName::Hann => Window::Hann,
        }
    }

    pub fn initial(&self) -> BlochVector {
        BlochVector::from_array(self.initial)
    }

    pub fn two_group_controls(&self) -> RunControls {
        RunControls {
            t_end: self.t_end(),
            dt_sample: self.dt_sample,
            integrator: self.integrator(),
            transient_fraction: self.transient_fraction.unwrap_or(0.5),
            window: self.window(),
            carrier: self.carrier,
            sync_threshold: self.sync_threshold,
            initial_a: self.initial(),
            initial_b: BlochVector::from_array(self.initial_b),
        }
    }

    fn check(&self, mode: Mode) -> Result<(), CliError> {
        let t_end = self.t_end();
        if mode != Mode::Stability && !(t_end.is_finite() && t_end >= self.dt_sample) {
            return Err(CliError::config("run.t_end", "must be finite and at least dt_sample"));
        }
        if !(self.dt_sample > 0.0 && self.dt_sample.is_finite()) {
            return Err(CliError::config("run.dt_sample", "must be positive"));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(CliError::config("run.rtol", "tolerances must be positive"));
        }
        if self.substeps == 0 {
            return Err(CliError::config("run.substeps", "must be at least 1"));
        }
        if let Some(f) = self.transient_fraction {
            if !(0.0..1.0).contains(&f) {
                return Err(CliError::config("run.transient_fraction", "must lie in [0, 1)"));
            }
        }
        if !(self.sync_threshold >= 0.0) {
            return Err(CliError::config("run.sync_threshold", "must be non-negative"));
        }
        if !self.carrier.is_finite() {
            return Err(CliError::config("run.carrier", "must be finite"));
        }
        for (name, v) in [("run.initial", self.initial), ("run.initial_b", self.initial_b)] {
            if !BlochVector::from_array(v).is_physical() {
                return Err(CliError::config(name, "must lie inside the unit ball"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowName {
    #[default]
    Meanfield,
    Bare,
    Interaction,
    Coherent,
    Dissipative,
    InteractionDissipative,
}

impl FlowName {
    pub fn kind(self) -> FlowKind {
        match self {
            FlowName::Meanfield => FlowKind::MeanField,
            FlowName::Bare => FlowKind::Bare,
            FlowName::Interaction => FlowKind::Interaction,
            FlowName::Coherent => FlowKind::Coherent,
            FlowName::Dissipative => FlowKind::Dissipative,
            FlowName::InteractionDissipative => FlowKind::InteractionDissipative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowfieldBlock {
    pub flow: FlowName,
    pub polar: usize,
    pub azimuth: usize,
    pub radius: f64,
}

impl Default for FlowfieldBlock {
    fn default() -> Self {
        Self { flow: FlowName::Meanfield, polar: 9, azimuth: 16, radius: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    #[default]
    Hamiltonian,
    Collective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleBlock {
    pub sites: Vec<usize>,
    pub model: ModelName,
    pub positivity_tol: f64,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self { sites: vec![1, 2, 4, 6], model: ModelName::Hamiltonian, positivity_tol: 1e-8 }
    }
}

impl OracleBlock {
    pub fn coupling(&self) -> PairCoupling {
        match self.model {
            ModelName::Hamiltonian => PairCoupling::Hamiltonian,
            ModelName::Collective => PairCoupling::Collective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub ensemble: EnsembleBlock,
    pub two_group: TwoGroupBlock,
    pub run: RunBlock,
    pub flowfield: FlowfieldBlock,
    pub oracle: OracleBlock,
    pub output: OutputBlock,
    /// Worker threads; 0 or absent uses every core. Never affects results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// Parses a TOML document into a table.
pub fn parse_table(text: &str, origin: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| CliError::config(origin, e.to_string().trim_end()))
}

/// Applies a `key=value` override; the value is read as TOML and falls back
/// to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "expected key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(|part| part.trim().is_empty()) {
        return Err(CliError::config(assignment, "empty key"));
    }
    let value = value.trim();
    let parsed = format!("x = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let parts: Vec<&str> = key.split('.').map(str::trim).collect();
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::config(key, format!("`{part}` is not a table"))),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// Deserializes a table, reporting the dotted path of the offending field.
pub fn from_table(table: toml::Table) -> Result<Config, CliError> {
    serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        let message = message.lines().next().unwrap_or_default().to_string();
        CliError::config(if path == "." { "config".to_string() } else { path }, message)
    })
}

impl Config {
    /// Loads a config file (or defaults) and applies overrides.
    pub fn load(text: Option<(&str, &str)>, overrides: &[String]) -> Result<Config, CliError> {
        let mut table = match text {
            Some((text, origin)) => parse_table(text, origin)?,
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        from_table(table)
    }

    /// Fixes the mode, fills mode-dependent defaults and validates.
    pub fn resolve(mut self, mode: Option<Mode>) -> Result<Config, CliError> {
        let mode = match (mode, self.mode) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::config("mode", format!("config is for `{}`, not `{}`", b.name(), a.name())))
            }
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => return Err(CliError::config("mode", "no mode given")),
        };
        self.mode = Some(mode);
        if self.run.t_end.is_none() {
            self.run.t_end = Some(mode.default_t_end());
        }
        self.validate()?;
        Ok(self)
    }

    pub fn mode(&self) -> Mode {
        self.mode.expect("resolved config")
    }

    pub fn axes(&self) -> Result<Vec<Axis>, CliError> {
        if self.mode().uses_two_groups() {
            self.two_group.axes()
        } else {
            self.ensemble.axes()
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let mode = self.mode();
        let axes = self.axes()?;
        let (lo, hi) = mode.range_bounds();
        if axes.len() < lo || axes.len() > hi {
            let what = match (lo, hi) {
                (0, 0) => "takes no ranged parameters".to_string(),
                (l, h) => format!("needs {l} to {h} ranged parameters"),
            };
            let block = if mode.uses_two_groups() { "two_group" } else { "ensemble" };
            return Err(CliError::config(block, format!("mode `{}` {what}, found {}", mode.name(), axes.len())));
        }
        self.run.check(mode)?;
        for index in grid_indices(&axes) {
            if mode.uses_two_groups() {
                self.two_group.at(&axes, &index).map_err(|e| CliError::config("two_group", e))?;
            } else {
                self.ensemble.at(&axes, &index).params().map_err(|e| CliError::config("ensemble", e.to_string()))?;
            }
        }
        match mode {
            Mode::Flowfield => {
                let f = &self.flowfield;
                if f.polar < 2 || f.azimuth < 1 {
                    return Err(CliError::config("flowfield.polar", "need polar >= 2 and azimuth >= 1"));
                }
                if !(f.radius > 0.0 && f.radius <= 1.0) {
                    return Err(CliError::config("flowfield.radius", "must lie in (0, 1]"));
                }
            }
            Mode::Oracle => {
                let o = &self.oracle;
                if o.sites.is_empty() || o.sites.iter().any(|&n| n == 0 || n > MAX_SITES) {
                    return Err(CliError::config("oracle.sites", format!("each entry must lie in 1..={MAX_SITES}")));
                }
                if !(o.positivity_tol >= 0.0) {
                    return Err(CliError::config("oracle.positivity_tol", "must be non-negative"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// `config.<dotted key> = <value>` lines describing everything that
    /// influences the results. Output paths and the thread count are left
    /// out, so reruns with different values produce identical files.
    pub fn echo(&self) -> Vec<String> {
        let mode = self.mode();
        let mut lines = vec![format!("config.mode = \"{}\"", mode.name())];
        let mut push = |section: &str, value: toml::Value| flatten(&format!("config.{section}"), &value, &mut lines);
        if mode.uses_two_groups() {
            push("two_group", toml::Value::try_from(self.two_group).expect("serializable"));
        } else {
            push("ensemble", toml::Value::try_from(self.ensemble).expect("serializable"));
        }
        if mode != Mode::Stability {
            push("run", toml::Value::try_from(self.run).expect("serializable"));
        }
        match mode {
            Mode::Flowfield => push("flowfield", toml::Value::try_from(self.flowfield).expect("serializable")),
            Mode::Oracle => push("oracle", toml::Value::try_from(self.oracle.clone()).expect("serializable")),
            _ => {}
        }
        lines
    }
}

/// Row-major list of grid indices; a single empty index when there are no axes.
pub fn grid_indices(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<String>) {
    match value {
        toml::Value::Table(t) if !t.contains_key("min") => {
            for (k, v) in t {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        v => out.push(format!("{prefix} = {}", inline(v))),
    }
}

/// Single-line TOML rendering; floats use the shortest round-trip form.
fn inline(value: &toml::Value) -> String {
    match value {
        toml::Value::Float(f) => {
            if f.is_nan() {
                "nan".into()
            } else if f.is_infinite() {
                if *f > 0.0 { "inf".into() } else { "-inf".into() }
            } else {
                format!("{f:?}")
            }
        }
        toml::Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        toml::Value::Table(t) => {
            let items: Vec<String> = t.iter().map(|(k, v)| format!("{k} = {}", inline(v))).collect();
            format!("{{ {} }}", items.join(", "))
        }
        other => other.to_string(),
    }
}

/// Rebuilds the configuration from the `# config.` lines of an output file.
pub fn config_from_header(text: &str) -> Result<Config, CliError> {
    let doc: Vec<&str> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.strip_prefix("# config."))
        .collect();
    if doc.is_empty() {
        return Err(CliError::config("header", "no configuration lines found"));
    }
    let config = from_table(parse_table(&doc.join("\n"), "header")?)?;
    config.resolve(None)
}
