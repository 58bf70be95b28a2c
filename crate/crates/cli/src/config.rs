//! Flat `key = value` run configuration.
//!
//! Shared firm keys (`sigma`, `quality`, ...) set both firms; suffixed keys
//! (`sigma1`, `sigma2`, ...) set one firm and win over the shared key
//! regardless of line order.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use credit_contagion::mc::McConfig;
use credit_contagion::model::MAX_ABS_CORRELATION;
use credit_contagion::{
    BondContract, CdsContract, FirmParams, Flavor, GridKind, NumericsConfig, PairModel, PricingError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Survival,
    Bond,
    Cds,
    Sweep,
    Validate,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Survival,
        Command::Bond,
        Command::Cds,
        Command::Sweep,
        Command::Validate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Survival => "survival",
            Command::Bond => "bond",
            Command::Cds => "cds",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }
}

/// What a sweep prices at each axis value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Survival,
    Bond,
    Cds,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Survival => "survival",
            Quantity::Bond => "bond",
            Quantity::Cds => "cds",
        }
    }
}

fn parse_named<T: Copy>(all: &[T], name: impl Fn(T) -> &'static str, s: &str) -> Option<T> {
    all.iter().copied().find(|&v| name(v) == s)
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_named(&Command::ALL, Command::as_str, s)
            .ok_or_else(|| format!("expected one of survival, bond, cds, sweep, validate; got `{s}`"))
    }
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_named(&[Quantity::Survival, Quantity::Bond, Quantity::Cds], Quantity::as_str, s)
            .ok_or_else(|| format!("expected one of survival, bond, cds; got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmInput {
    pub sigma: f64,
    pub q: f64,
    pub gamma: f64,
    pub face: f64,
    /// `V(0)/b(0)`; ignored when `v0` is given.
    pub quality: f64,
    pub v0: Option<f64>,
}

impl Default for FirmInput {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            q: 0.0,
            gamma: 0.03,
            face: 100.0,
            quality: 2.0,
            v0: None,
        }
    }
}

impl FirmInput {
    pub fn build(&self, maturity: f64) -> Result<FirmParams, PricingError> {
        match self.v0 {
            Some(v0) => FirmParams::new(v0, self.sigma, self.q, self.gamma, self.face),
            None => FirmParams::from_credit_quality(self.quality, self.sigma, self.q, self.gamma, self.face, maturity),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    /// Required for `sweep`, absent otherwise.
    pub quantity: Option<Quantity>,
    /// `None` prices every flavor.
    pub flavor: Option<Flavor>,
    pub firms: [FirmInput; 2],
    pub rf: f64,
    pub rho: f64,
    pub omega: f64,
    pub recovery: f64,
    pub maturity: f64,
    /// Survival horizon; defaults to the maturity.
    pub t: Option<f64>,
    pub numerics: NumericsConfig,
    pub mc: McConfig,
    pub sweep: Option<Sweep>,
    pub output: Option<String>,
}

impl RunSpec {
    pub fn base(command: Command) -> Self {
        Self {
            command,
            quantity: None,
            flavor: None,
            firms: [FirmInput::default(); 2],
            rf: 0.05,
            rho: 0.4,
            omega: 0.7,
            recovery: 0.5,
            maturity: 5.0,
            t: None,
            numerics: NumericsConfig::default(),
            mc: McConfig::default(),
            sweep: None,
            output: None,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.t.unwrap_or(self.maturity)
    }

    pub fn model(&self) -> Result<PairModel, PricingError> {
        let f1 = self.firms[0].build(self.maturity)?;
        let f2 = self.firms[1].build(self.maturity)?;
        PairModel::new(f1, f2, self.rho, self.rf, self.maturity)
    }

    pub fn bond(&self) -> Result<BondContract, PricingError> {
        BondContract::new(self.firms[0].face, self.maturity, self.omega)
    }

    pub fn cds(&self, flavor: Flavor) -> Result<CdsContract, PricingError> {
        CdsContract::new(self.firms[0].face, self.maturity, self.recovery, flavor)
    }

    pub fn flavors(&self) -> Vec<Flavor> {
        self.flavor.map_or_else(|| Flavor::ALL.to_vec(), |f| vec![f])
    }

    /// Copy with one numeric key replaced, as a sweep point.
    pub fn with_value(&self, key: &str, value: f64) -> Result<RunSpec, String> {
        let mut spec = self.clone();
        apply(&mut spec, key, &value.to_string())?;
        Ok(spec)
    }

    /// Parameter invariants that do not depend on what is priced.
    fn check(&self) -> Result<(), (String, String)> {
        if !(self.rho.abs() <= MAX_ABS_CORRELATION) {
            return Err((
                "rho".into(),
                format!("{} is outside the admissible interval [-{MAX_ABS_CORRELATION}, {MAX_ABS_CORRELATION}]", self.rho),
            ));
        }
        let named = |e: PricingError| match &e {
            PricingError::InvalidParameter { name, .. } => (name.to_string(), e.to_string()),
            _ => ("model".to_string(), e.to_string()),
        };
        self.model().map_err(named)?;
        self.bond().map_err(named)?;
        self.cds(Flavor::First).map_err(named)?;
        self.numerics.validate().map_err(named)?;
        self.mc.validate().map_err(named)?;
        if let Some(t) = self.t {
            if !(t.is_finite() && t > 0.0) {
                return Err(("t".into(), format!("{t} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: key `{}`: {}", self.key, self.message),
            None => write!(f, "key `{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const SHARED_FIRM_KEYS: [&str; 6] = ["sigma", "q", "gamma", "face", "quality", "v0"];

fn number(value: &str) -> Result<f64, String> {
    let v: f64 = value.parse().map_err(|_| format!("`{value}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{value}` is not finite"))
    }
}

fn count(value: &str) -> Result<usize, String> {
    value.parse().map_err(|_| format!("`{value}` is not a non-negative integer"))
}

fn flag(value: &str) -> Result<bool, String> {
    value.parse().map_err(|_| format!("`{value}` is not true or false"))
}

fn set_firm(firm: &mut FirmInput, field: &str, value: &str) -> Result<(), String> {
    match field {
        "sigma" => firm.sigma = number(value)?,
        "q" => firm.q = number(value)?,
        "gamma" => firm.gamma = number(value)?,
        "face" => firm.face = number(value)?,
        "quality" => firm.quality = number(value)?,
        "v0" => firm.v0 = Some(number(value)?),
        _ => unreachable!("not a firm key: {field}"),
    }
    Ok(())
}

/// Split `sigma2` into (`sigma`, 1); `None` if not a per-firm key.
fn firm_key(key: &str) -> Option<(&str, usize)> {
    let (stem, last) = key.split_at(key.len().checked_sub(1)?);
    let index = match last {
        "1" => 0,
        "2" => 1,
        _ => return None,
    };
    SHARED_FIRM_KEYS.contains(&stem).then_some((stem, index))
}

/// Is `key` a numeric key that a sweep may vary?
pub fn is_numeric_key(key: &str) -> bool {
    SHARED_FIRM_KEYS.contains(&key)
        || firm_key(key).is_some()
        || matches!(
            key,
            "rf" | "rho" | "omega" | "R" | "recovery" | "T" | "maturity" | "t" | "series_tol"
        )
}

fn apply(spec: &mut RunSpec, key: &str, value: &str) -> Result<(), String> {
    if SHARED_FIRM_KEYS.contains(&key) {
        for firm in spec.firms.iter_mut() {
            set_firm(firm, key, value)?;
        }
        return Ok(());
    }
    if let Some((stem, i)) = firm_key(key) {
        return set_firm(&mut spec.firms[i], stem, value);
    }
    match key {
        "command" => spec.command = value.parse()?,
        "quantity" => spec.quantity = Some(value.parse()?),
        "flavor" => spec.flavor = if value == "all" { None } else { Some(value.parse()?) },
        "rf" => spec.rf = number(value)?,
        "rho" => spec.rho = number(value)?,
        "omega" => spec.omega = number(value)?,
        "R" | "recovery" => spec.recovery = number(value)?,
        "T" | "maturity" => spec.maturity = number(value)?,
        "t" => spec.t = Some(number(value)?),
        "series_tol" => spec.numerics.series_tol = number(value)?,
        "n_max" => spec.numerics.n_max = count(value)?,
        "theta_nodes" => spec.numerics.theta_nodes = count(value)?,
        "r_nodes" => spec.numerics.r_nodes = count(value)?,
        "inner_nodes" => spec.numerics.inner_nodes = count(value)?,
        "time_nodes" => spec.numerics.time_nodes = count(value)?,
        "sparse_level" => {
            spec.numerics.sparse_level = value.parse().map_err(|_| format!("`{value}` is not a non-negative integer"))?
        }
        "grid_kind" => spec.numerics.grid_kind = value.parse::<GridKind>().map_err(|e| e.to_string())?,
        "paths" => spec.mc.paths = count(value)?,
        "steps_per_year" => spec.mc.steps_per_year = count(value)?,
        "seed" => spec.mc.seed = value.parse().map_err(|_| format!("`{value}` is not a 64-bit unsigned integer"))?,
        "bridge" => spec.mc.bridge = flag(value)?,
        "antithetic" => spec.mc.antithetic = flag(value)?,
        "output" => spec.output = Some(value.to_string()),
        "sweep" => spec.sweep = Some(parse_sweep(value)?),
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

fn parse_sweep(value: &str) -> Result<Sweep, String> {
    let (axis, list) = value
        .split_once(':')
        .ok_or_else(|| "expected `axis: v1,v2,...`".to_string())?;
    let axis = axis.trim();
    if !is_numeric_key(axis) {
        return Err(format!("`{axis}` is not a numeric key that can be swept"));
    }
    let values = list
        .split(',')
        .map(|v| number(v.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    Ok(Sweep {
        axis: axis.to_string(),
        values,
    })
}

/// Shared keys go first so per-firm keys override them.
fn precedence(key: &str) -> u8 {
    if key == "command" {
        0
    } else if SHARED_FIRM_KEYS.contains(&key) {
        1
    } else {
        2
    }
}

/// Parse a configuration. `overrides` (for example from `--set`) replace
/// keys of the same name in `text`.
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<RunSpec, ConfigError> {
    let mut entries: Vec<(Option<usize>, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
            line: Some(i + 1),
            key: line.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_string();
        if entries.iter().any(|e| e.1 == key) {
            return Err(ConfigError {
                line: Some(i + 1),
                key,
                message: "given more than once".into(),
            });
        }
        entries.push((Some(i + 1), key, value.trim().to_string()));
    }
    for (key, value) in overrides {
        let key = key.trim();
        entries.retain(|e| e.1 != key);
        entries.push((None, key.to_string(), value.trim().to_string()));
    }
    entries.sort_by_key(|e| precedence(&e.1));

    let command = entries.iter().find(|e| e.1 == "command").ok_or_else(|| ConfigError {
        line: None,
        key: "command".into(),
        message: "missing; give it on the command line or in the file".into(),
    })?;
    let command: Command = command.2.parse().map_err(|m| ConfigError {
        line: command.0,
        key: "command".into(),
        message: m,
    })?;
    let mut spec = RunSpec::base(command);
    for (line, key, value) in &entries {
        apply(&mut spec, key, value).map_err(|message| ConfigError {
            line: *line,
            key: key.clone(),
            message,
        })?;
    }

    let line_of = |key: &str| entries.iter().find(|e| e.1 == key).and_then(|e| e.0);
    let fail = |key: &str, message: String| ConfigError {
        line: line_of(key),
        key: key.to_string(),
        message,
    };
    match (spec.command, &spec.sweep, spec.quantity) {
        (Command::Sweep, None, _) => return Err(fail("sweep", "the sweep command needs `sweep = axis: values`".into())),
        (Command::Sweep, Some(_), None) => {
            return Err(fail("quantity", "the sweep command needs `quantity = survival | bond | cds`".into()))
        }
        (Command::Sweep, _, _) => {}
        (_, Some(_), _) => return Err(fail("sweep", format!("not allowed for the {} command", spec.command.as_str()))),
        (_, None, Some(_)) => return Err(fail("quantity", "only used by the sweep command".into())),
        _ => {}
    }
    spec.check().map_err(|(key, message)| fail(&key, message))?;
    if let Some(sweep) = &spec.sweep {
        for &v in &sweep.values {
            let point = spec.with_value(&sweep.axis, v).map_err(|m| fail("sweep", m))?;
            point
                .check()
                .map_err(|(key, message)| fail("sweep", format!("at {} = {v}: {key}: {message}", sweep.axis)))?;
        }
    }
    Ok(spec)
}

pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    parse_config_with(text, &[])
}

/// Canonical text form; `parse_config(render(spec)) == spec`.
pub fn render(spec: &RunSpec) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("command", spec.command.as_str().into());
    if let Some(q) = spec.quantity {
        line("quantity", q.as_str().into());
    }
    line("flavor", spec.flavor.map_or("all".to_string(), |f| f.as_str().to_string()));
    for (i, firm) in spec.firms.iter().enumerate() {
        let n = i + 1;
        line(&format!("sigma{n}"), firm.sigma.to_string());
        line(&format!("q{n}"), firm.q.to_string());
        line(&format!("gamma{n}"), firm.gamma.to_string());
        line(&format!("face{n}"), firm.face.to_string());
        line(&format!("quality{n}"), firm.quality.to_string());
        if let Some(v0) = firm.v0 {
            line(&format!("v0{n}"), v0.to_string());
        }
    }
    line("rf", spec.rf.to_string());
    line("rho", spec.rho.to_string());
    line("omega", spec.omega.to_string());
    line("R", spec.recovery.to_string());
    line("T", spec.maturity.to_string());
    if let Some(t) = spec.t {
        line("t", t.to_string());
    }
    let n = &spec.numerics;
    line("series_tol", n.series_tol.to_string());
    line("n_max", n.n_max.to_string());
    line("theta_nodes", n.theta_nodes.to_string());
    line("r_nodes", n.r_nodes.to_string());
    line("inner_nodes", n.inner_nodes.to_string());
    line("grid_kind", n.grid_kind.as_str().into());
    line("sparse_level", n.sparse_level.to_string());
    line("time_nodes", n.time_nodes.to_string());
    let mc = &spec.mc;
    line("paths", mc.paths.to_string());
    line("steps_per_year", mc.steps_per_year.to_string());
    line("seed", mc.seed.to_string());
    line("bridge", mc.bridge.to_string());
    line("antithetic", mc.antithetic.to_string());
    if let Some(sweep) = &spec.sweep {
        let values: Vec<String> = sweep.values.iter().map(f64::to_string).collect();
        line("sweep", format!("{}: {}", sweep.axis, values.join(",")));
    }
    if let Some(path) = &spec.output {
        line("output", path.clone());
    }
    out
}
