//! Run configuration: a flat TOML table, overridden key by key from the
//! command line and validated per scenario.

use std::path::Path;

use heatlab_core::master::Engine;
use heatlab_core::scenarios::Backend;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("malformed override `{0}`: expected key=value")]
    Override(String),
    #[error("missing required key `{key}` for {context}")]
    Missing { key: &'static str, context: &'static str },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Mbody,
    Superradiance,
    Superabsorption,
    Engine,
    Battery,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mbody => "mbody",
            Self::Superradiance => "superradiance",
            Self::Superabsorption => "superabsorption",
            Self::Engine => "engine",
            Self::Battery => "battery",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// A particle number, an explicit list, or a range `"a..b"` / `"a..b:step"`
/// (inclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LSpec {
    One(usize),
    List(Vec<usize>),
    Range(String),
}

impl LSpec {
    pub fn values(&self) -> ConfigResult<Vec<usize>> {
        match self {
            Self::One(l) => Ok(vec![*l]),
            Self::List(v) => Ok(v.clone()),
            Self::Range(s) => parse_range(s),
        }
    }
}

fn parse_range(s: &str) -> ConfigResult<Vec<usize>> {
    let bad = || ConfigError::Invalid {
        key: "L_list",
        message: format!("`{s}` is not a range a..b or a..b:step"),
    };
    let (range, step) = match s.split_once(':') {
        Some((r, st)) => (r, st.trim().parse::<usize>().map_err(|_| bad())?),
        None => (s, 1),
    };
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if step == 0 || b < a {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

/// Noise order: an integer or the string `"L"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MSpec {
    Order(usize),
    Symbol(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<LSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<MSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_q: Option<f64>,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub omega_big: Option<f64>,
    #[serde(rename = "E1", default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(rename = "E0", default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(rename = "Em1", default, skip_serializing_if = "Option::is_none")]
    pub em1: Option<f64>,
    #[serde(rename = "beta_H0", default, skip_serializing_if = "Option::is_none")]
    pub beta_h0: Option<f64>,
    #[serde(rename = "beta_C0", default, skip_serializing_if = "Option::is_none")]
    pub beta_c0: Option<f64>,
    #[serde(rename = "beta_W0", default, skip_serializing_if = "Option::is_none")]
    pub beta_w0: Option<f64>,
    #[serde(rename = "gamma_H", default, skip_serializing_if = "Option::is_none")]
    pub gamma_h: Option<f64>,
    #[serde(rename = "gamma_C", default, skip_serializing_if = "Option::is_none")]
    pub gamma_c: Option<f64>,
    #[serde(rename = "gamma_W", default, skip_serializing_if = "Option::is_none")]
    pub gamma_w: Option<f64>,
    #[serde(rename = "up_H", default, skip_serializing_if = "Option::is_none")]
    pub up_h: Option<f64>,
    #[serde(rename = "down_H", default, skip_serializing_if = "Option::is_none")]
    pub down_h: Option<f64>,
    #[serde(rename = "up_C", default, skip_serializing_if = "Option::is_none")]
    pub up_c: Option<f64>,
    #[serde(rename = "down_C", default, skip_serializing_if = "Option::is_none")]
    pub down_c: Option<f64>,
    #[serde(rename = "up_W", default, skip_serializing_if = "Option::is_none")]
    pub up_w: Option<f64>,
    #[serde(rename = "down_W", default, skip_serializing_if = "Option::is_none")]
    pub down_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(rename = "L_list", default, skip_serializing_if = "Option::is_none")]
    pub l_list: Option<LSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positivity_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_override: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    /// Real symmetric Hamiltonian for a custom `bounds` or `evolve` run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Vec<Vec<f64>>>,
    /// Real symmetric noise operator for a custom run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Vec<Vec<f64>>>,
    /// Bath inverse temperature of a custom run; absent means zero temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Diagonal initial state of a custom run in the given basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub populations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `key=value` overrides; values are read as TOML literals and fall
/// back to strings (`m=L`, `L=2..10`).
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> ConfigResult<()> {
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .filter(|(k, _)| !k.trim().is_empty())
            .ok_or_else(|| ConfigError::Override(item.clone()))?;
        table.insert(key.trim().to_string(), parse_value(value.trim()));
    }
    Ok(())
}

pub fn from_table(table: toml::Table) -> ConfigResult<RunConfig> {
    let cfg: RunConfig = table.try_into().map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.check_nonnegative()?;
    if let Some(l) = &cfg.l {
        l.values()?;
    }
    if cfg.scenario.is_some() {
        cfg.validate_scenario(cfg.scenario()?)?;
    }
    Ok(cfg)
}

pub fn parse_str(text: &str, overrides: &[String]) -> ConfigResult<RunConfig> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    apply_overrides(&mut table, overrides)?;
    from_table(table)
}

/// Reads `path` (if any) and applies the overrides on top.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> ConfigResult<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    parse_str(&text, overrides)
}

pub fn require<T: Clone>(value: &Option<T>, key: &'static str, context: &'static str) -> ConfigResult<T> {
    value.clone().ok_or(ConfigError::Missing { key, context })
}

impl RunConfig {
    fn check_nonnegative(&self) -> ConfigResult<()> {
        let fields: [(&'static str, Option<f64>); 22] = [
            ("g", self.g),
            ("gamma0", self.gamma0),
            ("Omega", self.omega_big),
            ("beta_H0", self.beta_h0),
            ("beta_C0", self.beta_c0),
            ("beta_W0", self.beta_w0),
            ("gamma_H", self.gamma_h),
            ("gamma_C", self.gamma_c),
            ("gamma_W", self.gamma_w),
            ("up_H", self.up_h),
            ("down_H", self.down_h),
            ("up_C", self.up_c),
            ("down_C", self.down_c),
            ("up_W", self.up_w),
            ("down_W", self.down_w),
            ("dt", self.dt),
            ("t_final", self.t_final),
            ("freq_tol", self.freq_tol),
            ("element_tol", self.element_tol),
            ("positivity_tol", self.positivity_tol),
            ("xi_override", self.xi_override),
            ("beta", self.beta),
        ];
        for (key, value) in fields {
            if let Some(x) = value {
                if !(x >= 0.0) || x.is_nan() {
                    return Err(ConfigError::Invalid {
                        key,
                        message: format!("must be nonnegative, got {x}"),
                    });
                }
            }
        }
        for (key, value) in [("omega_q", self.omega_q), ("E1", self.e1), ("E0", self.e0), ("Em1", self.em1)] {
            if let Some(x) = value {
                if !x.is_finite() {
                    return Err(ConfigError::Invalid {
                        key,
                        message: format!("must be finite, got {x}"),
                    });
                }
            }
        }
        if let Some(p) = &self.populations {
            if p.iter().any(|x| !(*x >= 0.0)) {
                return Err(ConfigError::Invalid {
                    key: "populations",
                    message: "must be nonnegative".into(),
                });
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> ConfigResult<ScenarioKind> {
        require(&self.scenario, "scenario", "this command")
    }

    /// Single particle number for scenario and evolve runs.
    pub fn single_l(&self, context: &'static str) -> ConfigResult<usize> {
        match require(&self.l, "L", context)? {
            LSpec::One(l) => Ok(l),
            other => match other.values()?.as_slice() {
                [l] => Ok(*l),
                _ => Err(ConfigError::Invalid {
                    key: "L",
                    message: "a single particle number is required here; use L_list for sweeps".into(),
                }),
            },
        }
    }

    /// Swept particle numbers from `L_list`, or from a list/range given as `L`.
    pub fn sweep_ls(&self) -> ConfigResult<Vec<usize>> {
        if let Some(list) = &self.l_list {
            return list.values();
        }
        match &self.l {
            Some(spec @ (LSpec::List(_) | LSpec::Range(_))) => spec.values(),
            _ => Err(ConfigError::Missing {
                key: "L_list",
                context: "sweep",
            }),
        }
    }

    /// `Some(m)` for a fixed order, `None` for `m = L`.
    pub fn m_order(&self) -> ConfigResult<Option<usize>> {
        match require(&self.m, "m", "scenario mbody")? {
            MSpec::Order(m) => Ok(Some(m)),
            MSpec::Symbol(s) if s.trim() == "L" => Ok(None),
            MSpec::Symbol(s) => Err(ConfigError::Invalid {
                key: "m",
                message: format!("expected an integer or \"L\", got \"{s}\""),
            }),
        }
    }

    /// Checks every key the scenario needs, naming the first one missing.
    pub fn validate_scenario(&self, kind: ScenarioKind) -> ConfigResult<()> {
        let ctx = match kind {
            ScenarioKind::Mbody => "scenario mbody",
            ScenarioKind::Superradiance => "scenario superradiance",
            ScenarioKind::Superabsorption => "scenario superabsorption",
            ScenarioKind::Engine => "scenario engine",
            ScenarioKind::Battery => "scenario battery",
        };
        let need = |v: Option<f64>, key: &'static str| require(&v, key, ctx).map(|_| ());
        match kind {
            ScenarioKind::Mbody => {
                self.m_order()?;
            }
            ScenarioKind::Superradiance => {
            }
            ScenarioKind::Superabsorption => {
                need(self.omega_big, "Omega")?;
            }
            ScenarioKind::Engine => {
                let explicit = [self.up_h, self.down_h, self.up_c, self.down_c, self.up_w, self.down_w];
                if explicit.iter().any(Option::is_some) {
                    for (v, key) in explicit.iter().zip(["up_H", "down_H", "up_C", "down_C", "up_W", "down_W"]) {
                        need(*v, key)?;
                    }
                } else {
                    need(self.gamma_h, "gamma_H")?;
                    need(self.gamma_c, "gamma_C")?;
                    need(self.gamma_w, "gamma_W")?;
                    need(self.beta_h0, "beta_H0")?;
                    need(self.beta_c0, "beta_C0")?;
                }
            }
            ScenarioKind::Battery => {
                need(self.e1, "E1")?;
                need(self.e0, "E0")?;
                need(self.em1, "Em1")?;
                need(self.beta_h0, "beta_H0")?;
                need(self.beta_c0, "beta_C0")?;
                need(self.gamma_h, "gamma_H")?;
                need(self.gamma_c, "gamma_C")?;
            }
        }
        Ok(())
    }
}
