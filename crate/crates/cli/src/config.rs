//! `--config` files: a flat JSON object whose keys are the long flag names
//! (`"nL"`, `"T"`, `"clamp-eps"`, ...). A flag given on the command line
//! always wins over the file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::io::read_json;

pub const SEED_ENV: &str = "HUBNET_SEED";

#[derive(Debug, Default)]
pub struct Config {
    values: Map<String, Value>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        match read_json::<Value>(path)? {
            Value::Object(values) => Ok(Self { values }),
            _ => Err(CliError::invalid(format!(
                "{}: config must be a JSON object",
                path.display()
            ))),
        }
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> CliResult<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                serde_json::from_value(v.clone())
                    .map_err(|e| CliError::invalid(format!("config key {key:?}: {e}")))
            })
            .transpose()
    }

    /// The flag if given, else the config entry.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> CliResult<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> CliResult<T> {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::invalid(format!("--{key} is required")))
    }

    /// Seed from the flag, the config file, then `HUBNET_SEED`, else 0.
    pub fn seed(&self, flag: Option<u64>) -> CliResult<u64> {
        if let Some(seed) = self.pick(flag, "seed")? {
            return Ok(seed);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
            }),
            Err(_) => Ok(0),
        }
    }
}
