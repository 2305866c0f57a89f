//! Run configuration: scenario schemas, presets, TOML files and flag overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

/// Where a configuration value came from, for error messages.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Flag(String),
    File { path: PathBuf, line: usize },
    Preset(String),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flag(name) => write!(f, "flag --{name}"),
            Self::File { path, line } => write!(f, "{}:{line}", path.display()),
            Self::Preset(name) => write!(f, "preset {name}"),
            Self::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

impl ConfigError {
    fn new(origin: Origin, message: impl Into<String>) -> Self {
        Self {
            origin,
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Cho2,
    Rotor2,
    Ensembles,
    ChainHarmonic,
    ChainRotor,
    Fieldtheory,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Self::Cho2,
        Self::Rotor2,
        Self::Ensembles,
        Self::ChainHarmonic,
        Self::ChainRotor,
        Self::Fieldtheory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cho2 => "cho2",
            Self::Rotor2 => "rotor2",
            Self::Ensembles => "ensembles",
            Self::ChainHarmonic => "chain-harmonic",
            Self::ChainRotor => "chain-rotor",
            Self::Fieldtheory => "fieldtheory",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn schema(self) -> Vec<ParamSpec> {
        use ParamKind::*;
        fn p(name: &'static str, kind: ParamKind, default: &'static str, help: &'static str) -> ParamSpec {
            ParamSpec {
                name,
                kind,
                default,
                help,
            }
        }
        match self {
            Self::Cho2 => vec![
                p("omega_sq", Positive, "10", "pre-quench on-site frequency squared"),
                p("kappa", NonNegative, "100", "coupling"),
                p("omega_f_sq", Real, "0", "post-quench on-site frequency squared"),
            ],
            Self::Rotor2 => vec![
                p("omega_sq", Positive, "10", "pre-quench on-site frequency squared"),
                p("kappa", NonNegative, "100", "coupling"),
                p("M", Cutoff, "auto", "momentum cutoff, or auto"),
                p("max_m", Count, "80", "largest cutoff tried by auto"),
            ],
            Self::Ensembles => vec![
                p("omega_sq", PositiveList, "10", "comma-separated omega^2 values"),
                p("kappa", PositiveList, "100", "comma-separated kappa values"),
                p("max_m", Count, "80", "largest cutoff tried by auto"),
                p("deg_tol", Positive, "1e-9", "relative energy window of a degenerate block"),
            ],
            Self::ChainHarmonic => vec![
                p("n", Count, "32", "number of sites"),
                p("omega_sq", Positive, "1.5", "pre-quench on-site frequency squared"),
                p("kappa", NonNegative, "0.5", "nearest-neighbour coupling"),
                p("omega_f_sq", NonNegative, "0", "post-quench on-site frequency squared"),
            ],
            Self::ChainRotor => vec![
                p("n", CountList, "4", "comma-separated chain lengths"),
                p("omega_sq", Positive, "1.5", "pre-quench on-site frequency squared"),
                p("kappa", NonNegative, "0.5", "nearest-neighbour coupling"),
                p("M", Cutoff, "auto", "momentum cutoff per site, auto for 8, 6, 4 at N = 2, 3, 4"),
            ],
            Self::Fieldtheory => vec![
                p("length", Positive, "49e-6", "condensate length L [m]"),
                p("n1d", Positive, "70e6", "linear density [1/m]"),
                p("g1d", Positive, "8.594e-39", "1D interaction strength [J m]"),
                p("mass", Positive, "1.433e-25", "atomic mass [kg]"),
                p("tunnel", NonNegative, "4.775220833456485", "tunnel coupling J [rad/s]"),
                p("temperature", NonNegative, "49e-9", "temperature [K]"),
                p("r0", Auto, "auto", "compactification radius [m^1/2], auto for sqrt(L)"),
                p("hbar", Positive, "1.054571817e-34", "reduced Planck constant [J s]"),
                p("kb", Positive, "1.380649e-23", "Boltzmann constant [J/K]"),
                p("mc_samples", Count, "20000", "Monte Carlo draws per time point"),
            ],
        }
    }

    pub fn default_grid(self) -> TimeGrid {
        let lin = |stop, count| TimeGrid {
            start: 0.0,
            stop,
            count,
            spacing: Spacing::Linear,
        };
        match self {
            Self::Cho2 => TimeGrid {
                start: 1e-1,
                stop: 1e4,
                count: 200,
                spacing: Spacing::Log,
            },
            Self::Rotor2 => lin(30.0, 601),
            Self::Ensembles => lin(16.0 * PI, 1601),
            Self::ChainHarmonic | Self::ChainRotor => lin(40.0, 801),
            Self::Fieldtheory => lin(0.03, 301),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    Positive,
    NonNegative,
    /// Integer `>= 1`.
    Count,
    /// `auto` or an integer `>= 1`.
    Cutoff,
    /// `auto` or a positive real.
    Auto,
    PositiveList,
    CountList,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub help: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Int(usize),
    Auto(AutoTag),
    Reals(Vec<f64>),
    Ints(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// A value before it is checked against the scenario schema.
#[derive(Debug, Clone)]
enum Raw {
    Text(String),
    Toml(toml::Value),
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_count(s: &str) -> Option<usize> {
    s.trim().parse::<usize>().ok().filter(|&n| n >= 1)
}

impl ParamKind {
    fn describe(self) -> &'static str {
        match self {
            Self::Real => "a finite number",
            Self::Positive => "a number > 0",
            Self::NonNegative => "a number >= 0",
            Self::Count => "an integer >= 1",
            Self::Cutoff => "auto or an integer >= 1",
            Self::Auto => "auto or a number > 0",
            Self::PositiveList => "a list of numbers > 0",
            Self::CountList => "a list of integers >= 1",
        }
    }

    fn from_text(self, s: &str) -> Option<ParamValue> {
        let s = s.trim();
        let real = |ok: fn(f64) -> bool| parse_real(s).filter(|&x| ok(x)).map(ParamValue::Real);
        match self {
            Self::Real => real(|_| true),
            Self::Positive => real(|x| x > 0.0),
            Self::NonNegative => real(|x| x >= 0.0),
            Self::Count => parse_count(s).map(ParamValue::Int),
            Self::Cutoff if s == "auto" => Some(ParamValue::Auto(AutoTag::Auto)),
            Self::Cutoff => parse_count(s).map(ParamValue::Int),
            Self::Auto if s == "auto" => Some(ParamValue::Auto(AutoTag::Auto)),
            Self::Auto => real(|x| x > 0.0),
            Self::PositiveList => s
                .split(',')
                .map(|x| parse_real(x).filter(|&x| x > 0.0))
                .collect::<Option<Vec<_>>>()
                .map(ParamValue::Reals),
            Self::CountList => s
                .split(',')
                .map(parse_count)
                .collect::<Option<Vec<_>>>()
                .map(ParamValue::Ints),
        }
    }

    fn from_toml(self, v: &toml::Value) -> Option<ParamValue> {
        use toml::Value;
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Integer(i) => i.to_string(),
            Value::Float(x) => format!("{x:e}"),
            Value::Array(items) => items
                .iter()
                .map(|x| match x {
                    Value::Integer(i) => Some(i.to_string()),
                    Value::Float(f) => Some(format!("{f:e}")),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?
                .join(","),
            _ => return None,
        };
        self.from_text(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl TimeGrid {
    /// `start:stop:count`, optionally prefixed by `lin:` or `log:`.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let (spacing, rest) = match parts.as_slice() {
            ["log", rest @ ..] => (Spacing::Log, rest),
            ["lin", rest @ ..] => (Spacing::Linear, rest),
            rest => (Spacing::Linear, rest),
        };
        let [a, b, n] = rest else {
            return Err(format!("time grid {s:?} is not [lin:|log:]start:stop:count"));
        };
        let bad = |what: &str| format!("time grid {s:?}: invalid {what}");
        let grid = Self {
            start: parse_real(a).ok_or_else(|| bad("start"))?,
            stop: parse_real(b).ok_or_else(|| bad("stop"))?,
            count: parse_count(n).ok_or_else(|| bad("count"))?,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.start >= 0.0) || !(self.stop >= self.start) || self.count == 0 {
            return Err(format!(
                "time grid needs 0 <= start <= stop and count >= 1, got {}:{}:{}",
                self.start, self.stop, self.count
            ));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err("log time grid needs start > 0".into());
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        let mut ts: Vec<f64> = (0..self.count)
            .map(|k| {
                let f = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * f,
                    Spacing::Log => (self.start.ln() + (self.stop / self.start).ln() * f).exp(),
                }
            })
            .collect();
        ts[0] = self.start;
        ts[self.count - 1] = self.stop;
        ts
    }
}

/// A named parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub scenario: Scenario,
    pub params: &'static [(&'static str, &'static str)],
    pub grid: Option<&'static str>,
    pub description: &'static str,
}

pub fn presets() -> Vec<Preset> {
    let p = |name, scenario, params, grid, description| Preset {
        name,
        scenario,
        params,
        grid,
        description,
    };
    vec![
        p("fig2", Scenario::Rotor2, &[("omega_sq", "5"), ("kappa", "10")], None, "log-Gaussian momentum marginal"),
        p("fig3", Scenario::Rotor2, &[("omega_sq", "10"), ("kappa", "100")], Some("0:30:601"), "compact vs non-compact entropy"),
        p("fig4a", Scenario::Rotor2, &[("omega_sq", "100"), ("kappa", "10")], Some("0:60:1201"), "weak coupling"),
        p("fig4b", Scenario::Rotor2, &[("omega_sq", "1.5"), ("kappa", "0.5")], Some("0:60:1201"), "shallow well"),
        p("fig4c", Scenario::Rotor2, &[("omega_sq", "0.1"), ("kappa", "100")], Some("0:60:1201"), "strong coupling"),
        p("fig5", Scenario::ChainRotor, &[("n", "2,3,4"), ("omega_sq", "1.5"), ("kappa", "0.5")], Some("0:40:801"), "short rotor chains"),
        p(
            "paper-2024",
            Scenario::Fieldtheory,
            &[
                ("length", "49e-6"),
                ("n1d", "70e6"),
                ("g1d", "8.594e-39"),
                ("mass", "1.433e-25"),
                ("tunnel", "4.775220833456485"),
                ("temperature", "49e-9"),
            ],
            Some("0:0.03:301"),
            "split 1D condensates",
        ),
    ]
}

pub fn find_preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// A validated run description.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub parameters: BTreeMap<String, ParamValue>,
    pub time_grid: TimeGrid,
    pub output: PathBuf,
    pub seed: u64,
    /// Worker threads; `None` uses the machine parallelism.
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults for `scenario`, writing into `output`.
    pub fn new(scenario: Scenario, output: impl Into<PathBuf>) -> Self {
        ConfigBuilder {
            scenario: Some((scenario, Origin::Default)),
            output: Some(output.into()),
            ..Default::default()
        }
        .finish()
        .expect("schema defaults are valid")
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.parameters.get(key) {
            Some(ParamValue::Real(x)) => *x,
            Some(ParamValue::Int(n)) => *n as f64,
            other => panic!("parameter {key} is not real: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        match self.parameters.get(key) {
            Some(ParamValue::Int(n)) => *n,
            other => panic!("parameter {key} is not an integer: {other:?}"),
        }
    }

    /// `None` for `auto`.
    pub fn optional(&self, key: &str) -> Option<f64> {
        match self.parameters.get(key) {
            Some(ParamValue::Auto(_)) => None,
            _ => Some(self.real(key)),
        }
    }

    pub fn reals(&self, key: &str) -> Vec<f64> {
        match self.parameters.get(key) {
            Some(ParamValue::Reals(v)) => v.clone(),
            other => panic!("parameter {key} is not a list: {other:?}"),
        }
    }

    pub fn counts(&self, key: &str) -> Vec<usize> {
        match self.parameters.get(key) {
            Some(ParamValue::Ints(v)) => v.clone(),
            other => panic!("parameter {key} is not an integer list: {other:?}"),
        }
    }

    /// Set one parameter from text, as a flag would.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let origin = Origin::Flag(key.to_string());
        let spec = lookup(self.scenario, key, &origin)?;
        let v = spec
            .kind
            .from_text(value)
            .ok_or_else(|| ConfigError::new(origin, format!("{key} must be {}, got {value:?}", spec.kind.describe())))?;
        self.parameters.insert(key.to_string(), v);
        Ok(())
    }

    /// Build from command-line arguments. Precedence, lowest first: schema
    /// defaults, `--preset`, `--config`, then individual flags.
    pub fn from_args(scenario: Option<&str>, args: &[String]) -> Result<Self> {
        let mut b = ConfigBuilder::default();
        if let Some(s) = scenario {
            let origin = Origin::Flag("scenario".into());
            let sc = Scenario::parse(s).ok_or_else(|| unknown_scenario(s, origin.clone()))?;
            b.scenario = Some((sc, origin));
        }
        let flags = split_flags(args)?;
        if let Some((_, v)) = flags.iter().find(|(k, _)| k == "preset") {
            b.apply_preset(v)?;
        }
        if let Some((_, v)) = flags.iter().find(|(k, _)| k == "config") {
            b.apply_file(Path::new(v))?;
        }
        for (key, value) in flags {
            let origin = Origin::Flag(key.clone());
            match key.as_str() {
                "preset" | "config" => {}
                "t" => b.grid = Some((TimeGrid::parse(&value).map_err(|m| ConfigError::new(origin.clone(), m))?, origin)),
                "output" => b.output = Some(PathBuf::from(value)),
                "seed" => b.seed = Some(value.parse().map_err(|_| ConfigError::new(origin, format!("seed must be a u64, got {value:?}")))?),
                "threads" => b.threads = Some(parse_count(&value).ok_or_else(|| ConfigError::new(origin, format!("threads must be >= 1, got {value:?}")))?),
                _ => {
                    b.params.insert(key.replace('-', "_"), (Raw::Text(value), origin));
                }
            }
        }
        b.finish()
    }

    /// Build from a TOML file alone.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut b = ConfigBuilder::default();
        b.apply_file(path)?;
        b.finish()
    }
}

fn unknown_scenario(s: &str, origin: Origin) -> ConfigError {
    let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
    ConfigError::new(origin, format!("unknown scenario {s:?}, expected one of {}", names.join(", ")))
}

fn lookup(scenario: Scenario, key: &str, origin: &Origin) -> Result<ParamSpec> {
    scenario.schema().into_iter().find(|p| p.name == key).ok_or_else(|| {
        let names: Vec<&str> = scenario.schema().iter().map(|p| p.name).collect();
        ConfigError::new(
            origin.clone(),
            format!("{} has no parameter {key:?}; known: {}", scenario.name(), names.join(", ")),
        )
    })
}

/// `--key value` and `--key=value` pairs.
fn split_flags(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            return Err(ConfigError::new(Origin::Flag(a.clone()), "expected --key value"));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| ConfigError::new(Origin::Flag(flag.to_string()), "missing value"))?;
                (flag.to_string(), v.clone())
            }
        };
        out.push((key, value));
    }
    Ok(out)
}

#[derive(Debug, Default)]
struct ConfigBuilder {
    scenario: Option<(Scenario, Origin)>,
    params: BTreeMap<String, (Raw, Origin)>,
    grid: Option<(TimeGrid, Origin)>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
}

impl ConfigBuilder {
    fn set_scenario(&mut self, sc: Scenario, origin: Origin) -> Result<()> {
        match &self.scenario {
            Some((have, from)) if *have != sc => Err(ConfigError::new(
                origin,
                format!("scenario {} conflicts with {} from {from}", sc.name(), have.name()),
            )),
            Some(_) => Ok(()),
            None => {
                self.scenario = Some((sc, origin));
                Ok(())
            }
        }
    }

    fn apply_preset(&mut self, name: &str) -> Result<()> {
        let origin = Origin::Preset(name.to_string());
        let p = find_preset(name).ok_or_else(|| {
            let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
            ConfigError::new(Origin::Flag("preset".into()), format!("unknown preset {name:?}, expected one of {}", names.join(", ")))
        })?;
        self.set_scenario(p.scenario, origin.clone())?;
        for (k, v) in p.params {
            self.params.insert(k.to_string(), (Raw::Text(v.to_string()), origin.clone()));
        }
        if let Some(g) = p.grid {
            self.grid = Some((TimeGrid::parse(g).expect("preset grids are valid"), origin));
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let at = |line| Origin::File {
            path: path.to_path_buf(),
            line,
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(at(0), format!("cannot read config: {e}")))?;
        let table: toml::Table = toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| line_at(&text, s.start));
            ConfigError::new(at(line), e.message().to_string())
        })?;
        let line_of = |section: Option<&str>, key: &str| find_line(&text, section, key);
        for (key, value) in &table {
            let origin = at(line_of(None, key));
            match (key.as_str(), value) {
                ("scenario", toml::Value::String(s)) => {
                    let sc = Scenario::parse(s).ok_or_else(|| unknown_scenario(s, origin.clone()))?;
                    self.set_scenario(sc, origin)?;
                }
                ("preset", toml::Value::String(s)) => self.apply_preset(s)?,
                ("output", toml::Value::String(s)) => self.output = Some(PathBuf::from(s)),
                ("seed", toml::Value::Integer(i)) if *i >= 0 => self.seed = Some(*i as u64),
                ("threads", toml::Value::Integer(i)) if *i >= 1 => self.threads = Some(*i as usize),
                ("parameters", toml::Value::Table(t)) => {
                    for (k, v) in t {
                        self.params
                            .insert(k.clone(), (Raw::Toml(v.clone()), at(line_of(Some("parameters"), k))));
                    }
                }
                ("time_grid", toml::Value::Table(t)) => {
                    let origin = at(line_of(None, "[time_grid]"));
                    let get = |k: &str| t.get(k).ok_or_else(|| ConfigError::new(origin.clone(), format!("time_grid needs {k}")));
                    let num = |k: &str| -> Result<f64> {
                        match get(k)? {
                            toml::Value::Float(x) => Ok(*x),
                            toml::Value::Integer(i) => Ok(*i as f64),
                            _ => Err(ConfigError::new(at(line_of(Some("time_grid"), k)), format!("{k} must be a number"))),
                        }
                    };
                    let count = match get("count")? {
                        toml::Value::Integer(i) if *i >= 1 => *i as usize,
                        _ => return Err(ConfigError::new(at(line_of(Some("time_grid"), "count")), "count must be an integer >= 1")),
                    };
                    let spacing = match t.get("spacing").and_then(|v| v.as_str()).unwrap_or("linear") {
                        "linear" => Spacing::Linear,
                        "log" => Spacing::Log,
                        other => return Err(ConfigError::new(at(line_of(Some("time_grid"), "spacing")), format!("spacing must be linear or log, got {other:?}"))),
                    };
                    let grid = TimeGrid {
                        start: num("start")?,
                        stop: num("stop")?,
                        count,
                        spacing,
                    };
                    grid.validate().map_err(|m| ConfigError::new(origin.clone(), m))?;
                    self.grid = Some((grid, origin));
                }
                _ => return Err(ConfigError::new(origin, format!("unexpected entry {key:?}"))),
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig> {
        let (scenario, _) = self
            .scenario
            .ok_or_else(|| ConfigError::new(Origin::Default, "no scenario given"))?;
        let mut parameters = BTreeMap::new();
        for spec in scenario.schema() {
            let v = spec.kind.from_text(spec.default).expect("schema defaults parse");
            parameters.insert(spec.name.to_string(), v);
        }
        for (key, (raw, origin)) in self.params {
            let spec = lookup(scenario, &key, &origin)?;
            let (v, shown) = match &raw {
                Raw::Text(s) => (spec.kind.from_text(s), format!("{s:?}")),
                Raw::Toml(t) => (spec.kind.from_toml(t), t.to_string()),
            };
            let v = v.ok_or_else(|| {
                ConfigError::new(origin.clone(), format!("{key} must be {}, got {shown}", spec.kind.describe()))
            })?;
            parameters.insert(key, v);
        }
        Ok(RunConfig {
            scenario,
            parameters,
            time_grid: self.grid.map_or_else(|| scenario.default_grid(), |g| g.0),
            output: self.output.unwrap_or_else(|| PathBuf::from("out")),
            seed: self.seed.unwrap_or(0),
            threads: self.threads,
        })
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line of `key = ...` inside `[section]` (or the top level), or of a
/// literal header such as `[time_grid]`; `0` when not found.
fn find_line(text: &str, section: Option<&str>, key: &str) -> usize {
    let mut current: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l == key {
            return i + 1;
        }
        if let Some(h) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = Some(h.trim().to_string());
            continue;
        }
        let in_section = current.as_deref() == section;
        if in_section && l.split('=').next().map(str::trim) == Some(key) {
            return i + 1;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn grid_forms() {
        let g = TimeGrid::parse("log:1e-1:1e4:200").unwrap();
        let ts = g.points();
        assert_eq!((ts.len(), ts[0], ts[199]), (200, 1e-1, 1e4));
        assert!((ts[1] / ts[0] - ts[199] / ts[198]).abs() < 1e-12);
        let ts = TimeGrid::parse("0:30:600").unwrap().points();
        assert_eq!((ts.len(), ts[0], ts[599]), (600, 0.0, 30.0));
        assert_eq!(TimeGrid::parse("2:2:1").unwrap().points(), vec![2.0]);
        for bad in ["log:0:1:5", "1:0:5", "0:1:0", "0:1", "a:1:2"] {
            assert!(TimeGrid::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_presets() {
        let c = RunConfig::from_args(Some("rotor2"), &args("--preset fig3 --kappa 50 --M 12 --t 0:1:3")).unwrap();
        assert_eq!(c.real("omega_sq"), 10.0);
        assert_eq!(c.real("kappa"), 50.0);
        assert_eq!(c.count("M"), 12);
        assert_eq!(c.time_grid.count, 3);
        let c = RunConfig::from_args(Some("cho2"), &args("--omega-sq=3")).unwrap();
        assert_eq!(c.real("omega_sq"), 3.0);
        assert_eq!(c.time_grid.spacing, Spacing::Log);
    }

    #[test]
    fn schema_violations() {
        let e = RunConfig::from_args(Some("cho2"), &args("--kapa 3")).unwrap_err();
        assert_eq!(e.origin, Origin::Flag("kapa".into()));
        assert!(RunConfig::from_args(Some("cho2"), &args("--kappa -1")).is_err());
        assert!(RunConfig::from_args(Some("rotor2"), &args("--M 0")).is_err());
        assert!(RunConfig::from_args(Some("nope"), &[]).is_err());
        assert!(RunConfig::from_args(Some("cho2"), &args("--preset fig3")).is_err());
        assert!(RunConfig::from_args(Some("cho2"), &args("--kappa")).is_err());
    }

    #[test]
    fn every_preset_is_valid() {
        for p in presets() {
            let c = RunConfig::from_args(None, &args(&format!("--preset {}", p.name))).unwrap();
            assert_eq!(c.scenario, p.scenario);
        }
        let c = RunConfig::from_args(None, &args("--preset fig4c")).unwrap();
        assert_eq!((c.real("omega_sq"), c.real("kappa")), (0.1, 100.0));
        let c = RunConfig::from_args(None, &args("--preset fig5")).unwrap();
        assert_eq!(c.counts("n"), vec![2, 3, 4]);
        assert_eq!(c.parameters["M"], ParamValue::Auto(AutoTag::Auto));
    }

    #[test]
    fn toml_file_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "scenario = \"ensembles\"\nseed = 7\n\n[parameters]\nomega_sq = [5, 10.5]\nkappa = 100\n\n[time_grid]\nstart = 0\nstop = 10\ncount = 11\n",
        )
        .unwrap();
        let c = RunConfig::from_file(&path).unwrap();
        assert_eq!(c.reals("omega_sq"), vec![5.0, 10.5]);
        assert_eq!(c.reals("kappa"), vec![100.0]);
        assert_eq!(c.seed, 7);
        assert_eq!(c.time_grid.points().len(), 11);

        std::fs::write(&path, "scenario = \"ensembles\"\n[parameters]\nkappa = -3\n").unwrap();
        let e = RunConfig::from_file(&path).unwrap_err();
        assert_eq!(e.origin, Origin::File { path: path.clone(), line: 3 });
        std::fs::write(&path, "scenario = \"cho2\"\n[parameters\n").unwrap();
        let e = RunConfig::from_file(&path).unwrap_err();
        assert!(matches!(e.origin, Origin::File { line: 2, .. }), "{e}");
    }
}
