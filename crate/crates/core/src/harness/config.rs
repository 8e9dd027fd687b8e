//! Line-oriented `key = value` configuration.
//!
//! ```text
//! # comments start with '#'
//! variant = one-clique
//! L = 10
//! f_cl = 0.1
//! init = regular 6 all     # group level mass|all
//! init = clique 6 all
//! t_end = 200
//! axis1 = f_cl 0 0.2 5     # sweeps only: name start stop count
//! ```
//!
//! Groups without `init` lines start with their whole share at
//! `init_level`, which defaults to the level nearest reputation 0.6.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::dynamics::IntegratorSettings;
use crate::model::{
    BehaviorParams, CliqueParams, CommunityState, Group, ModelParams, ReputationGrid, Variant,
    MASS_TOLERANCE,
};
use crate::oracle::OracleSettings;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    /// 1-based line of the offending entry, when there is one.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMass {
    Value(f64),
    /// The group's whole share.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitEntry {
    pub group: Group,
    pub level: usize,
    pub mass: InitMass,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBlock {
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub variant: Variant,
    pub steps: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub f_cl: f64,
    pub f_acl: f64,
    /// `f_acl = f_cl`: the anti-clique follows the clique size.
    pub f_acl_tied: bool,
    pub p_lambda: f64,
    pub gamma: f64,
    pub initial: Vec<InitEntry>,
    pub init_level: Option<usize>,
    pub t_end: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub sample_interval: f64,
    pub oracle: Option<OracleBlock>,
    pub output_dir: PathBuf,
    pub field_n: usize,
    key_lines: BTreeMap<&'static str, usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            variant: Variant::NoClique,
            steps: 10,
            alpha: 0.0,
            sigma: 0.0,
            f_cl: 0.0,
            f_acl: 0.0,
            f_acl_tied: false,
            p_lambda: 0.0,
            gamma: 1.0,
            initial: Vec::new(),
            init_level: None,
            t_end: 100.0,
            abs_tol: 1e-7,
            rel_tol: 1e-7,
            sample_interval: 1.0,
            oracle: None,
            output_dir: PathBuf::from("out"),
            field_n: 21,
            key_lines: BTreeMap::new(),
        }
    }
}

/// Numeric scenario fields a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Sigma,
    FCl,
    FAcl,
    PLambda,
    Gamma,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Sigma => "sigma",
            SweepParam::FCl => "f_cl",
            SweepParam::FAcl => "f_acl",
            SweepParam::PLambda => "p_lambda",
            SweepParam::Gamma => "gamma",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "alpha" => SweepParam::Alpha,
            "sigma" => SweepParam::Sigma,
            "f_cl" => SweepParam::FCl,
            "f_acl" => SweepParam::FAcl,
            "p_lambda" => SweepParam::PLambda,
            "gamma" => SweepParam::Gamma,
            other => return Err(format!("`{other}` is not a sweepable parameter")),
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + span * i as f64 / (self.count - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepMetric {
    #[default]
    FinalPc,
    FinalState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub metric: SweepMetric,
}

/// Everything a configuration document can hold.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub scenario: ScenarioConfig,
    pub axis1: Option<SweepAxis>,
    pub axis2: Option<SweepAxis>,
    pub metric: SweepMetric,
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("{key}: cannot parse `{value}`")))
}

fn ranged(line: usize, key: &str, value: &str, lo: f64, hi: f64) -> Result<f64, ConfigError> {
    let v: f64 = parse_num(line, key, value)?;
    if !(lo..=hi).contains(&v) {
        return Err(ConfigError::at(
            line,
            format!("{key} = {v} outside [{lo}, {hi}]"),
        ));
    }
    Ok(v)
}

fn positive(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse_num(line, key, value)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(ConfigError::at(
            line,
            format!("{key} = {v} must be positive"),
        ));
    }
    Ok(v)
}

fn parse_axis(line: usize, key: &str, value: &str) -> Result<SweepAxis, ConfigError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let [name, start, stop, count] = parts[..] else {
        return Err(ConfigError::at(
            line,
            format!("{key}: expected `name start stop count`"),
        ));
    };
    let param = name
        .parse()
        .map_err(|e: String| ConfigError::at(line, format!("{key}: {e}")))?;
    let count: usize = parse_num(line, key, count)?;
    if count == 0 {
        return Err(ConfigError::at(
            line,
            format!("{key}: count must be at least 1"),
        ));
    }
    Ok(SweepAxis {
        param,
        start: parse_num(line, key, start)?,
        stop: parse_num(line, key, stop)?,
        count,
    })
}

/// Parses a whole document, scenario and sweep keys alike.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ConfigError> {
    let mut c = ScenarioConfig::default();
    let mut axis1 = None;
    let mut axis2 = None;
    let mut metric = SweepMetric::default();
    let (mut oracle_n, mut oracle_dt, mut oracle_seed) = (None, 0.05, 1u64);

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::at(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        let known: &'static str = match key {
            "name" => {
                c.name = value.to_string();
                "name"
            }
            "variant" => {
                c.variant = value
                    .parse()
                    .map_err(|_| ConfigError::at(line, format!("variant: unknown `{value}`")))?;
                "variant"
            }
            "L" | "steps" => {
                c.steps = parse_num(line, key, value)?;
                if c.steps == 0 {
                    return Err(ConfigError::at(line, "L must be at least 1"));
                }
                "L"
            }
            "alpha" => {
                c.alpha = ranged(line, key, value, -1.0, 1.0)?;
                "alpha"
            }
            "sigma" => {
                c.sigma = ranged(line, key, value, -1.0, 1.0)?;
                "sigma"
            }
            "f_cl" => {
                c.f_cl = ranged(line, key, value, 0.0, 1.0)?;
                "f_cl"
            }
            "f_acl" => {
                if value == "f_cl" {
                    c.f_acl_tied = true;
                } else {
                    c.f_acl = ranged(line, key, value, 0.0, 1.0)?;
                    c.f_acl_tied = false;
                }
                "f_acl"
            }
            "p_lambda" => {
                c.p_lambda = ranged(line, key, value, 0.0, 0.5)?;
                "p_lambda"
            }
            "gamma" => {
                c.gamma = ranged(line, key, value, 0.0, 1.0)?;
                "gamma"
            }
            "init" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [group, level, mass] = parts[..] else {
                    return Err(ConfigError::at(line, "init: expected `group level mass`"));
                };
                let group = group
                    .parse()
                    .map_err(|_| ConfigError::at(line, format!("init: unknown group `{group}`")))?;
                let level = parse_num(line, "init level", level)?;
                let mass = if mass == "all" {
                    InitMass::All
                } else {
                    InitMass::Value(ranged(line, "init mass", mass, 0.0, 1.0)?)
                };
                c.initial.push(InitEntry {
                    group,
                    level,
                    mass,
                    line,
                });
                "init"
            }
            "init_level" => {
                c.init_level = Some(parse_num(line, key, value)?);
                "init_level"
            }
            "t_end" => {
                c.t_end = positive(line, key, value)?;
                "t_end"
            }
            "abs_tol" => {
                c.abs_tol = positive(line, key, value)?;
                "abs_tol"
            }
            "rel_tol" => {
                c.rel_tol = positive(line, key, value)?;
                "rel_tol"
            }
            "sample_interval" => {
                c.sample_interval = positive(line, key, value)?;
                "sample_interval"
            }
            "oracle_n" => {
                oracle_n = Some(parse_num(line, key, value)?);
                "oracle_n"
            }
            "oracle_dt" => {
                oracle_dt = ranged(line, key, value, f64::MIN_POSITIVE, 0.1)?;
                "oracle_dt"
            }
            "oracle_seed" => {
                oracle_seed = parse_num(line, key, value)?;
                "oracle_seed"
            }
            "output_dir" => {
                c.output_dir = PathBuf::from(value);
                "output_dir"
            }
            "field_n" => {
                c.field_n = parse_num(line, key, value)?;
                if c.field_n < 2 {
                    return Err(ConfigError::at(line, "field_n must be at least 2"));
                }
                "field_n"
            }
            "axis1" => {
                axis1 = Some(parse_axis(line, key, value)?);
                "axis1"
            }
            "axis2" => {
                axis2 = Some(parse_axis(line, key, value)?);
                "axis2"
            }
            "metric" => {
                metric = match value {
                    "final_pc" => SweepMetric::FinalPc,
                    "final_state" => SweepMetric::FinalState,
                    other => {
                        return Err(ConfigError::at(line, format!("metric: unknown `{other}`")))
                    }
                };
                "metric"
            }
            other => return Err(ConfigError::at(line, format!("unknown key `{other}`"))),
        };
        c.key_lines.insert(known, line);
    }
    if let Some(n) = oracle_n {
        if n < 4 {
            return Err(ConfigError::at(
                c.key_lines["oracle_n"],
                "oracle_n must be at least 4",
            ));
        }
        c.oracle = Some(OracleBlock {
            n,
            dt: oracle_dt,
            seed: oracle_seed,
        });
    }
    c.validate()?;
    Ok(ConfigDocument {
        scenario: c,
        axis1,
        axis2,
        metric,
    })
}

/// Parses and validates a scenario configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_document(text).map(|d| d.scenario)
}

/// Parses a sweep: a scenario plus `axis1`, `axis2` and optionally `metric`.
pub fn parse_sweep_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let doc = parse_document(text)?;
    let (Some(axis1), Some(axis2)) = (doc.axis1, doc.axis2) else {
        return Err(ConfigError::general("a sweep needs both axis1 and axis2"));
    };
    let sweep = SweepConfig {
        base: doc.scenario,
        axis1,
        axis2,
        metric: doc.metric,
    };
    // Every grid point must be a valid scenario.
    for a in axis1.values() {
        for b in axis2.values() {
            sweep.point(a, b)?;
        }
    }
    Ok(sweep)
}

impl ScenarioConfig {
    fn line_of(&self, key: &str) -> Option<usize> {
        self.key_lines.get(key).copied()
    }

    fn error_at(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line_of(key),
            message: message.into(),
        }
    }

    pub fn effective_f_acl(&self) -> f64 {
        if self.f_acl_tied {
            self.f_cl
        } else {
            self.f_acl
        }
    }

    /// Level used for groups without `init` lines.
    pub fn default_level(&self) -> usize {
        self.init_level
            .unwrap_or_else(|| (0.6 * self.steps as f64).round() as usize)
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let (f_cl, f_acl) = match self.variant {
            Variant::NoClique => (0.0, 0.0),
            Variant::OneClique => (self.f_cl, 0.0),
            Variant::TwoCliques => (self.f_cl, self.effective_f_acl()),
        };
        let grid =
            ReputationGrid::new(self.steps).map_err(|e| self.error_at("L", e.to_string()))?;
        let behavior = BehaviorParams::new(self.alpha, self.sigma)
            .map_err(|e| self.error_at("alpha", e.to_string()))?;
        let clique = CliqueParams::new(f_cl, f_acl, self.p_lambda, self.gamma)
            .map_err(|e| self.error_at("f_cl", e.to_string()))?;
        ModelParams::new(self.variant, grid, behavior, clique)
            .map_err(|e| self.error_at("variant", e.to_string()))
    }

    pub fn initial_state(&self, params: &ModelParams) -> Result<CommunityState, ConfigError> {
        let mut state = CommunityState::zeros(params);
        let default_level = self.default_level();
        if default_level > self.steps {
            return Err(self.error_at(
                "init_level",
                format!("init_level {default_level} outside grid 0..={}", self.steps),
            ));
        }
        for &g in params.variant.groups() {
            let share = params.group_fraction(g);
            let entries: Vec<&InitEntry> = self.initial.iter().filter(|e| e.group == g).collect();
            if entries.is_empty() {
                state.group_mut(g)[default_level] = share;
                continue;
            }
            for e in &entries {
                if e.level > self.steps {
                    return Err(ConfigError::at(
                        e.line,
                        format!("init level {} outside grid 0..={}", e.level, self.steps),
                    ));
                }
                state.group_mut(g)[e.level] += match e.mass {
                    InitMass::All => share,
                    InitMass::Value(m) => m,
                };
            }
            let sum = state.group_sum(g);
            if (sum - share).abs() > MASS_TOLERANCE {
                return Err(ConfigError::at(
                    entries[0].line,
                    format!("{g} initial masses sum to {sum}, but the group share is {share}"),
                ));
            }
        }
        for e in &self.initial {
            if e.group.index() >= params.group_count() {
                return Err(ConfigError::at(
                    e.line,
                    format!("group {} absent from {}", e.group, self.variant),
                ));
            }
        }
        Ok(state)
    }

    /// Starting level of each group for the agent oracle, which needs every
    /// group concentrated on a single level.
    pub fn initial_levels(&self, params: &ModelParams) -> Result<Vec<usize>, ConfigError> {
        let state = self.initial_state(params)?;
        params
            .variant
            .groups()
            .iter()
            .map(|&g| {
                let occupied: Vec<usize> = state
                    .group(g)
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| **m > 0.0)
                    .map(|(k, _)| k)
                    .collect();
                match occupied[..] {
                    [] => Ok(self.default_level()),
                    [k] => Ok(k),
                    _ => Err(self.error_at(
                        "init",
                        format!("the oracle needs all {g} members on one level"),
                    )),
                }
            })
            .collect()
    }

    pub fn integrator_settings(&self) -> IntegratorSettings {
        IntegratorSettings::new(self.t_end)
            .with_tolerances(self.abs_tol, self.rel_tol)
            .with_sample_interval(self.sample_interval.min(self.t_end))
    }

    pub fn oracle_settings(&self) -> Option<OracleSettings> {
        self.oracle.map(|o| OracleSettings {
            n: o.n,
            dt: o.dt,
            t_end: self.t_end,
            seed: o.seed,
            sample_interval: self.sample_interval.min(self.t_end),
        })
    }

    /// Checks that the scenario yields valid parameters and initial state.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sample_interval > self.t_end {
            return Err(self.error_at("sample_interval", "sample_interval exceeds t_end"));
        }
        let params = self.model_params()?;
        self.initial_state(&params)?;
        Ok(())
    }

    /// Copy with one numeric field replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> ScenarioConfig {
        let mut c = self.clone();
        match param {
            SweepParam::Alpha => c.alpha = value,
            SweepParam::Sigma => c.sigma = value,
            SweepParam::FCl => c.f_cl = value,
            SweepParam::FAcl => {
                c.f_acl = value;
                c.f_acl_tied = false;
            }
            SweepParam::PLambda => c.p_lambda = value,
            SweepParam::Gamma => c.gamma = value,
        }
        c
    }
}

impl SweepConfig {
    /// Scenario at grid point `(a, b)` of the two axes.
    pub fn point(&self, a: f64, b: f64) -> Result<ScenarioConfig, ConfigError> {
        let c = self
            .base
            .with_param(self.axis1.param, a)
            .with_param(self.axis2.param, b);
        c.validate().map_err(|e| ConfigError {
            line: e.line,
            message: format!(
                "at {} = {a}, {} = {b}: {}",
                self.axis1.param, self.axis2.param, e.message
            ),
        })?;
        Ok(c)
    }
}
