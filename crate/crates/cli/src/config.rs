//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! model = heston
//! horizon = 7
//! heston.kappa = 0.4
//! position.right.side = right
//! position.right.lower = 11
//! il.exits = 10, 12, 20
//! ```
//!
//! Keys are dotted; each command starts from its own preset and the file,
//! then `--set key=value` overrides, are applied on top.

use crate::error::CliError;
use ilrep_core::gbm::GbmParams;
use ilrep_core::heston::{HestonParams, McConfig};
use ilrep_core::replication::StrikeGrid;
use ilrep_core::{PriceInterval, Position, Side};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Gbm { sigma: f64, spot: f64 },
    Heston(HestonParams),
}

impl Model {
    pub fn spot(&self) -> f64 {
        match self {
            Model::Gbm { spot, .. } => *spot,
            Model::Heston(p) => p.spot,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionSpec {
    pub name: String,
    pub side: Side,
    pub lower: f64,
    pub upper: f64,
    pub liquidity: f64,
    pub entry: f64,
}

impl PositionSpec {
    pub fn interval(&self) -> PriceInterval {
        PriceInterval::new(self.lower, self.upper).expect("validated")
    }

    pub fn position(&self) -> Position {
        Position::new(self.liquidity, self.interval(), self.entry, self.side).expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Sweep {
    pub kappa: Vec<f64>,
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Grid {
    pub points: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub horizon: f64,
    pub positions: Vec<PositionSpec>,
    pub exits: Vec<f64>,
    pub mc: McConfig,
    pub shared_paths: bool,
    pub n_strikes: usize,
    pub adaptive_split: bool,
    pub maturity_tolerance: f64,
    pub table1: Table1Sweep,
    pub figure1: Figure1Grid,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Il,
    Table1,
    Figure1,
    Hedge,
}

/// One `key = value` entry and where it came from.
#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    origin: String,
}

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = format!("{source}:{}", idx + 1);
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::validation(format!("{origin}: expected `key = value`, got `{content}`")));
            };
            raw.insert(key.trim(), value.trim(), origin)?;
        }
        Ok(raw)
    }

    /// Applies a `key=value` override from the command line.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(CliError::validation(format!("--set expects key=value, got `{assignment}`")));
        };
        let key = key.trim();
        self.entries.remove(key);
        self.insert(key, value.trim(), format!("--set {key}"))
    }

    pub fn set_value(&mut self, key: &str, value: impl ToString, origin: &str) {
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), origin: origin.to_string() });
    }

    fn insert(&mut self, key: &str, value: &str, origin: String) -> Result<(), CliError> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
            return Err(CliError::validation(format!("{origin}: invalid key `{key}`")));
        }
        if let Some(prev) = self.entries.get(key) {
            return Err(CliError::validation(format!("{origin}: key `{key}` already set at {}", prev.origin)));
        }
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), origin });
        Ok(())
    }

    /// Layers `other` on top of `self`.
    pub fn merge(mut self, other: RawConfig) -> RawConfig {
        self.entries.extend(other.entries);
        self
    }
}

fn preset(preset: Preset) -> RawConfig {
    let mut raw = RawConfig::default();
    let mut put = |k: &str, v: &str| raw.set_value(k, v, "default");
    put("heston.mu", "0.1");
    put("heston.kappa", "0.4");
    put("heston.theta", "0.4");
    put("heston.xi", "0.15");
    put("heston.rho", "-0.3");
    put("heston.v0", "0.3");
    put("heston.spot", "10");
    put("gbm.sigma", "0.7");
    put("gbm.spot", "10");
    put("mc.paths", "1000000");
    put("mc.steps", "256");
    put("mc.seed", "20230101");
    put("mc.shared_paths", "true");
    put("quadrature.strikes", "1001");
    put("quadrature.adaptive_split", "false");
    put("hedge.maturity_tolerance", "1e-6");
    put("table1.kappa", "0.3, 0.4, 0.5");
    put("table1.theta", "0.3, 0.4, 0.5");
    put("table1.xi", "0.1, 0.15, 0.2");
    put("figure1.points", "50");
    put("figure1.sigma_min", "0.05");
    put("figure1.sigma_max", "1.5");
    put("figure1.t_max", "1");
    put("il.exits", "5, 10, 11, 12, 14, 20");

    let (right, left) = match preset {
        Preset::Figure1 | Preset::Hedge => ((11.0, 12.0), (8.0, 9.0)),
        Preset::Il | Preset::Table1 => ((11.0, 14.0), (6.0, 9.0)),
    };
    for (name, (lo, hi)) in [("right", right), ("left", left)] {
        put(&format!("position.{name}.side"), name);
        put(&format!("position.{name}.lower"), &lo.to_string());
        put(&format!("position.{name}.upper"), &hi.to_string());
        put(&format!("position.{name}.liquidity"), "1");
        put(&format!("position.{name}.entry"), "10");
    }

    match preset {
        Preset::Table1 => {
            put("model", "heston");
            // seven-year exit horizon
            put("horizon", "7");
        }
        Preset::Figure1 | Preset::Il | Preset::Hedge => {
            put("model", "gbm");
            put("horizon", &(30.0 / 365.0).to_string());
        }
    }
    raw
}

struct Reader<'a> {
    raw: &'a RawConfig,
    used: std::cell::RefCell<Vec<String>>,
}

impl<'a> Reader<'a> {
    fn entry(&self, key: &str) -> Result<&'a Entry, CliError> {
        self.used.borrow_mut().push(key.to_string());
        self.raw.entries.get(key).ok_or_else(|| CliError::validation(format!("missing required key `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T, CliError> {
        let e = self.entry(key)?;
        e.value
            .parse()
            .map_err(|_| CliError::validation(format!("{}: `{key}` expects {what}, got `{}`", e.origin, e.value)))
    }

    fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key, "a number")?;
        if !v.is_finite() {
            let e = self.entry(key)?;
            return Err(CliError::validation(format!("{}: `{key}` must be finite", e.origin)));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let e = self.entry(key)?;
        e.value
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::validation(format!("{}: `{key}` has a bad number `{s}`", e.origin)))
            })
            .collect()
    }

    fn bool(&self, key: &str) -> Result<bool, CliError> {
        let e = self.entry(key)?;
        match e.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(CliError::validation(format!("{}: `{key}` expects true/false, got `{}`", e.origin, e.value))),
        }
    }

    fn origin(&self, key: &str) -> String {
        self.raw.entries.get(key).map(|e| e.origin.clone()).unwrap_or_else(|| "config".into())
    }
}

impl ExperimentConfig {
    pub fn preset(which: Preset) -> Self {
        Self::from_raw(&preset(which)).expect("presets are valid")
    }

    /// Preset for `which`, overlaid with `user` entries.
    pub fn load(which: Preset, user: RawConfig) -> Result<Self, CliError> {
        Self::from_raw(&preset(which).merge(user))
    }

    fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let r = Reader { raw, used: Default::default() };
        let invalid = |key: &str, e: ilrep_core::Error| CliError::validation(format!("{}: {e}", r.origin(key)));

        let model_name: String = r.parse("model", "gbm|heston")?;
        let horizon = r.f64("horizon")?;
        if horizon <= 0.0 {
            return Err(CliError::validation(format!("{}: horizon must be positive", r.origin("horizon"))));
        }
        // both blocks are read so that neither is reported as unknown
        let gbm_sigma = r.f64("gbm.sigma")?;
        let gbm_spot = r.f64("gbm.spot")?;
        let heston = HestonParams {
            mu: r.f64("heston.mu")?,
            kappa: r.f64("heston.kappa")?,
            theta: r.f64("heston.theta")?,
            xi: r.f64("heston.xi")?,
            rho: r.f64("heston.rho")?,
            v0: r.f64("heston.v0")?,
            spot: r.f64("heston.spot")?,
        };
        let model = match model_name.to_ascii_lowercase().as_str() {
            "gbm" => {
                GbmParams::new(gbm_sigma, horizon, gbm_spot).map_err(|e| invalid("gbm.sigma", e))?;
                Model::Gbm { sigma: gbm_sigma, spot: gbm_spot }
            }
            "heston" => {
                heston.validate().map_err(|e| invalid("heston.rho", e))?;
                Model::Heston(heston)
            }
            other => {
                return Err(CliError::validation(format!(
                    "{}: unknown model `{other}` (expected gbm|heston)",
                    r.origin("model")
                )))
            }
        };

        let n_paths: i64 = r.parse("mc.paths", "an integer")?;
        let n_steps: i64 = r.parse("mc.steps", "an integer")?;
        if n_paths < 1 {
            return Err(CliError::validation(format!("{}: mc.paths must be at least 1", r.origin("mc.paths"))));
        }
        if n_steps < 1 {
            return Err(CliError::validation(format!("{}: mc.steps must be at least 1", r.origin("mc.steps"))));
        }
        let mc = McConfig::new(n_paths as usize, n_steps as usize, r.parse("mc.seed", "an unsigned 64-bit integer")?)
            .map_err(|e| invalid("mc.paths", e))?;

        let n_strikes: i64 = r.parse("quadrature.strikes", "an integer")?;
        if n_strikes < 2 {
            return Err(CliError::validation(format!(
                "{}: quadrature.strikes must be at least 2",
                r.origin("quadrature.strikes")
            )));
        }

        let mut names: Vec<String> = raw
            .entries
            .keys()
            .filter_map(|k| k.strip_prefix("position."))
            .filter_map(|rest| rest.split_once('.').map(|(name, _)| name.to_string()))
            .collect();
        names.dedup();
        let mut positions = Vec::new();
        for name in names {
            let key = |field: &str| format!("position.{name}.{field}");
            let side_key = key("side");
            let side: Side = r
                .entry(&side_key)?
                .value
                .parse()
                .map_err(|e| invalid(&side_key, e))?;
            let spec = PositionSpec {
                side,
                lower: r.f64(&key("lower"))?,
                upper: r.f64(&key("upper"))?,
                liquidity: r.f64(&key("liquidity"))?,
                entry: r.f64(&key("entry"))?,
                name: name.clone(),
            };
            let interval = PriceInterval::new(spec.lower, spec.upper).map_err(|e| invalid(&key("lower"), e))?;
            Position::new(spec.liquidity, interval, spec.entry, spec.side).map_err(|e| invalid(&key("entry"), e))?;
            positions.push(spec);
        }

        positions.sort_by_key(|p| (p.side == Side::Left, p.name.clone()));

        let exits = r.list("il.exits")?;
        if let Some(bad) = exits.iter().find(|&&p| p <= 0.0) {
            return Err(CliError::validation(format!("{}: exit price {bad} must be positive", r.origin("il.exits"))));
        }

        let table1 = Table1Sweep {
            kappa: r.list("table1.kappa")?,
            theta: r.list("table1.theta")?,
            xi: r.list("table1.xi")?,
        };
        let figure1 = Figure1Grid {
            points: r.parse("figure1.points", "an integer")?,
            sigma_min: r.f64("figure1.sigma_min")?,
            sigma_max: r.f64("figure1.sigma_max")?,
            t_max: r.f64("figure1.t_max")?,
        };
        if figure1.points < 2 || figure1.sigma_min <= 0.0 || figure1.sigma_max < figure1.sigma_min || figure1.t_max <= 0.0 {
            return Err(CliError::validation("figure1 grid needs points >= 2, 0 < sigma_min <= sigma_max, t_max > 0"));
        }

        let maturity_tolerance = r.f64("hedge.maturity_tolerance")?;
        let output = match raw.entries.get("output") {
            Some(_) => Some(PathBuf::from(r.entry("output")?.value.clone())),
            None => None,
        };

        let cfg = ExperimentConfig {
            model,
            horizon,
            positions,
            exits,
            mc,
            shared_paths: r.bool("mc.shared_paths")?,
            n_strikes: n_strikes as usize,
            adaptive_split: r.bool("quadrature.adaptive_split")?,
            maturity_tolerance,
            table1,
            figure1,
            output,
        };

        let used = r.used.borrow();
        if let Some((key, e)) = raw.entries.iter().find(|(k, _)| !used.contains(k)) {
            return Err(CliError::validation(format!("{}: unknown key `{key}`", e.origin)));
        }
        Ok(cfg)
    }

    pub fn gbm(&self) -> Option<GbmParams> {
        match self.model {
            Model::Gbm { sigma, spot } => GbmParams::new(sigma, self.horizon, spot).ok(),
            Model::Heston(_) => None,
        }
    }

    pub fn strike_grid(&self, interval: &PriceInterval) -> StrikeGrid {
        StrikeGrid::uniform(interval, self.n_strikes).expect("validated")
    }

    pub fn first_position(&self, side: Side) -> Option<&PositionSpec> {
        self.positions.iter().find(|p| p.side == side)
    }
}
