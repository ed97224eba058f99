//! Key-value scenario configuration.
//!
//! Files are plain text, one `key = value` pair per line, `#` comments.
//! Dotted keys mirror the structure (`law.variant`, `scheme.cfl`,
//! `ic.left.rho`, ...). Command-line overrides use the same dotted keys,
//! last one wins.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::solver::{FluxKind, InitialCondition, Scenario, SchemeConfig};
use crate::state::StandardState;
use crate::thermo::{GasModel, LawSpec, ThermoError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    BadLine(usize),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("key `{key}`: cannot parse value {value:?}")]
    BadValue { key: String, value: String },
    #[error("key `{key}`: unsupported value {value:?} (expected one of {expected})")]
    UnknownChoice { key: String, value: String, expected: &'static str },
    #[error("invalid override {0:?}: expected `key=value`")]
    BadOverride(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsed configuration: dotted keys to raw string values.
#[derive(Clone, Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or(ConfigError::BadLine(lineno + 1))?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Apply `key=value` overrides, last one winning.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), ConfigError> {
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| ConfigError::BadOverride(entry.clone()))?;
            self.entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.get(key).ok_or(ConfigError::MissingKey(key))
    }

    pub fn require_f64(&self, key: &'static str) -> Result<f64, ConfigError> {
        parse_value(key, self.require(key)?)
    }

    pub fn f64_or(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        self.get(key).map_or(Ok(default), |v| parse_value(key, v))
    }

    pub fn usize_or(&self, key: &'static str, default: usize) -> Result<usize, ConfigError> {
        self.get(key).map_or(Ok(default), |v| parse_value(key, v))
    }

    pub fn require_usize(&self, key: &'static str) -> Result<usize, ConfigError> {
        parse_value(key, self.require(key)?)
    }

    pub fn u64_or(&self, key: &'static str, default: u64) -> Result<u64, ConfigError> {
        self.get(key).map_or(Ok(default), |v| parse_value(key, v))
    }

    /// Gas model from `gamma`, `law.variant`, `law.p_bar`, `law.chi_bound`,
    /// `law.exponent`. Validated construction: laws that fail the hypothesis
    /// verifier are rejected here.
    pub fn build_model(&self) -> Result<GasModel, ConfigError> {
        self.build_model_inner(true)
    }

    /// Same keys, but keeps laws that fail verification (for `verify-eos`).
    pub fn build_model_unvalidated(&self) -> Result<GasModel, ConfigError> {
        self.build_model_inner(false)
    }

    fn build_model_inner(&self, validated: bool) -> Result<GasModel, ConfigError> {
        let gamma = self.require_f64("gamma")?;
        let variant = self.get("law.variant").unwrap_or("perfect");
        let spec = match variant {
            "perfect" => LawSpec::Perfect,
            "third-law" => LawSpec::ThirdLaw,
            "cold-pressure" => {
                LawSpec::ColdPressure { cold_pressure: self.require_f64("law.p_bar")? }
            }
            "power" => LawSpec::Power { exponent: self.f64_or("law.exponent", 2.0)? },
            other => {
                return Err(ConfigError::UnknownChoice {
                    key: "law.variant".into(),
                    value: other.into(),
                    expected: "perfect | third-law | cold-pressure | power",
                })
            }
        };
        let chi_bound = match self.get("law.chi_bound") {
            Some(v) => Some(parse_value("law.chi_bound", v)?),
            None => None,
        };
        let model = if validated {
            GasModel::with_chi_bound(gamma, spec, chi_bound)?
        } else {
            GasModel::unvalidated_with_chi_bound(gamma, spec, chi_bound)?
        };
        Ok(model)
    }

    fn state(&self, prefix: &str, model: &GasModel) -> Result<StandardState<1>, ConfigError> {
        let key = |suffix: &str| format!("{prefix}.{suffix}");
        let get_f64 = |suffix: &str| -> Result<Option<f64>, ConfigError> {
            match self.get(&key(suffix)) {
                Some(v) => Ok(Some(parse_value(&key(suffix), v)?)),
                None => Ok(None),
            }
        };
        let rho = get_f64("rho")?.ok_or(ConfigError::MissingKey("ic.*.rho"))?;
        if let Some(p) = get_f64("p")? {
            let u = get_f64("u")?.unwrap_or(0.0);
            let e = p / ((model.gamma() - 1.0) * rho);
            let theta = model.temperature(rho, e)?;
            return Ok(StandardState::new(rho, theta, [u]));
        }
        if let Some(theta) = get_f64("theta")? {
            let u = get_f64("u")?.unwrap_or(0.0);
            return Ok(StandardState::new(rho, theta, [u]));
        }
        if let Some(total_energy) = get_f64("E")? {
            let momentum = get_f64("m")?.unwrap_or(0.0);
            let cons = crate::state::ConsState::new(rho, [momentum], total_energy);
            return Ok(model.to_standard(&cons)?);
        }
        Err(ConfigError::MissingKey("ic.*.p | ic.*.theta | ic.*.E"))
    }

    /// Scenario from `grid.*`, `scheme.*`, `ic.*`, `seed`.
    pub fn build_scenario(&self) -> Result<Scenario, ConfigError> {
        let model = self.build_model()?;
        let n_x = self.require_usize("grid.nx")?;
        let t_end = self.require_f64("grid.t_end")?;
        let flux = match self.get("scheme.flux").unwrap_or("lax-friedrichs") {
            "lax-friedrichs" => FluxKind::LaxFriedrichs,
            "rusanov" => FluxKind::Rusanov,
            "hll" => FluxKind::Hll,
            other => {
                return Err(ConfigError::UnknownChoice {
                    key: "scheme.flux".into(),
                    value: other.into(),
                    expected: "lax-friedrichs | rusanov | hll",
                })
            }
        };
        let scheme = SchemeConfig {
            flux,
            cfl: self.f64_or("scheme.cfl", 0.9)?,
            viscosity_eps: self.f64_or("scheme.viscosity", 0.0)?,
        };
        let ic = match self.require("ic.type")? {
            "riemann" => InitialCondition::Riemann {
                left: self.state("ic.left", &model)?,
                right: self.state("ic.right", &model)?,
            },
            "constant" => InitialCondition::Constant { state: self.state("ic.left", &model)? },
            "smooth-wave" => InitialCondition::SmoothWave {
                base: self.state("ic.left", &model)?,
                amplitude: self.f64_or("ic.amplitude", 0.1)?,
                wavenumber: self.usize_or("ic.wavenumber", 1)? as u32,
                velocity_amplitude: self.f64_or("ic.velocity_amplitude", 0.0)?,
            },
            other => {
                return Err(ConfigError::UnknownChoice {
                    key: "ic.type".into(),
                    value: other.into(),
                    expected: "riemann | constant | smooth-wave",
                })
            }
        };
        Ok(Scenario { model, n_x, t_end, ic, scheme, seed: self.u64_or("seed", 0)? })
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOD: &str = "\
# classic shock tube
gamma = 1.4
law.variant = perfect
grid.nx = 100
grid.t_end = 0.2
scheme.flux = lax-friedrichs
scheme.cfl = 0.9
scheme.viscosity = 0.0
ic.type = riemann
ic.left.rho = 1.0
ic.left.u = 0.0
ic.left.p = 1.0
ic.right.rho = 0.125
ic.right.u = 0.0
ic.right.p = 0.1
seed = 7
";

    #[test]
    fn parse_and_build_scenario() {
        let config = Config::parse(SOD).unwrap();
        let scenario = config.build_scenario().unwrap();
        assert_eq!(scenario.n_x, 100);
        assert_eq!(scenario.seed, 7);
        match scenario.ic {
            InitialCondition::Riemann { left, right } => {
                assert!((left.rho - 1.0).abs() < 1e-15);
                // theta = p / rho for the perfect gas
                assert!((left.theta - 1.0).abs() < 1e-12);
                assert!((right.theta - 0.8).abs() < 1e-12);
            }
            _ => panic!("expected riemann"),
        }
    }

    #[test]
    fn missing_gamma_names_the_key() {
        let config = Config::parse("grid.nx = 10\n").unwrap();
        let err = config.build_scenario().unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn gamma_one_rejected() {
        let config = Config::parse("gamma = 1.0\nic.type = constant\n").unwrap();
        assert!(config.build_model().is_err());
    }

    #[test]
    fn overrides_last_wins() {
        let mut config = Config::parse(SOD).unwrap();
        config
            .apply_overrides(&["grid.nx=400".into(), "grid.nx=200".into()])
            .unwrap();
        assert_eq!(config.build_scenario().unwrap().n_x, 200);
    }

    #[test]
    fn conservative_state_keys_accepted() {
        let text = "\
gamma = 2.0
grid.nx = 8
grid.t_end = 0.05
ic.type = constant
ic.left.rho = 1.0
ic.left.m = 0.0
ic.left.E = 1.0
";
        let scenario = Config::parse(text).unwrap().build_scenario().unwrap();
        match scenario.ic {
            InitialCondition::Constant { state } => {
                assert!((state.theta - 1.0).abs() < 1e-11);
            }
            _ => panic!("expected constant"),
        }
    }

    #[test]
    fn power_law_only_buildable_unvalidated() {
        let text = "gamma = 1.4\nlaw.variant = power\nlaw.exponent = 2.0\n";
        let config = Config::parse(text).unwrap();
        assert!(config.build_model().is_err());
        let model = config.build_model_unvalidated().unwrap();
        assert!(!model.hypothesis_report().passed);
    }
}
