//! JSON run manifests: `{"command": ..., "parameters": {...}, "output_format": ...}`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use kmodel_core::sim::SimConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{CellRequest, OutputFormat, Request, SimulateRequest, UncertaintyInput, DEFAULT_SPHERE_SAMPLES};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestCommand {
    Constants,
    Uncertainty,
    Spread,
    Cell,
    Transition,
    Simulate,
    Reproduce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: ManifestCommand,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub output_format: Option<OutputFormat>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::usage(format!("invalid manifest: {e}"))
                .with_context(serde_json::json!({ "path": path.display().to_string() }))
        })
    }

    /// Validates every parameter and builds the request. Relative paths are
    /// resolved against `base_dir`.
    pub fn to_request(&self, default_seed: u64, base_dir: &Path) -> Result<Request, CliError> {
        let mut p = Params::new(&self.parameters);
        let request = match self.command {
            ManifestCommand::Constants => Request::Constants,
            ManifestCommand::Reproduce => Request::Reproduce,
            ManifestCommand::Uncertainty => match (p.opt_f64("time_s")?, p.opt_f64("distance_cm")?) {
                (Some(t), None) => Request::Uncertainty(UncertaintyInput::Time(t)),
                (None, Some(d)) => Request::Uncertainty(UncertaintyInput::Distance(d)),
                _ => return Err(CliError::usage("uncertainty needs exactly one of time_s or distance_cm")),
            },
            ManifestCommand::Spread => {
                let config = p.path("config")?;
                Request::Spread {
                    config: if config.is_relative() { base_dir.join(config) } else { config },
                    oracle: p.opt_bool("oracle")?.unwrap_or(false),
                }
            }
            ManifestCommand::Cell => {
                let mass_g = p.f64("mass_g")?;
                match p.opt_f64("radius_cm")? {
                    None => Request::Cell(CellRequest::Point { mass_g }),
                    Some(radius_cm) => Request::Cell(CellRequest::Sphere {
                        mass_g,
                        radius_cm,
                        samples: p.opt_u64("samples")?.unwrap_or(DEFAULT_SPHERE_SAMPLES),
                        seed: p.opt_u64("seed")?.unwrap_or(default_seed),
                    }),
                }
            }
            ManifestCommand::Transition => Request::Transition {
                density_g_cm3: p.f64("density_g_cm3")?,
            },
            ManifestCommand::Simulate => Request::Simulate(SimulateRequest {
                config: SimConfig {
                    mass: p.f64("mass_g")?,
                    cell_length: p.f64("cell_cm")?,
                    initial_sigma: p.f64("sigma0_cm")?,
                    duration: p.f64("duration_s")?,
                    time_step: p.f64("dt_s")?,
                    seed: p.opt_u64("seed")?.unwrap_or(default_seed),
                    dimensions: p.opt_u64("dims")?.unwrap_or(3) as usize,
                },
                runs: p.opt_u64("runs")?.unwrap_or(1) as usize,
            }),
        };
        p.finish()?;
        Ok(request)
    }
}

struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    used: BTreeSet<&'static str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a BTreeMap<String, Value>) -> Self {
        Params {
            map,
            used: BTreeSet::new(),
        }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.map.get(key)
    }

    fn invalid(key: &str, expected: &str, value: &Value) -> CliError {
        CliError::usage(format!("parameter {key} must be {expected}"))
            .with_context(serde_json::json!({ "parameter": key, "value": value }))
    }

    fn opt_f64(&mut self, key: &'static str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| Self::invalid(key, "a number", v)),
        }
    }

    fn f64(&mut self, key: &'static str) -> Result<f64, CliError> {
        self.opt_f64(key)?
            .ok_or_else(|| CliError::usage(format!("missing parameter {key}")))
    }

    fn opt_u64(&mut self, key: &'static str) -> Result<Option<u64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| Self::invalid(key, "a non-negative integer", v)),
        }
    }

    fn opt_bool(&mut self, key: &'static str) -> Result<Option<bool>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_bool().map(Some).ok_or_else(|| Self::invalid(key, "true or false", v)),
        }
    }

    fn path(&mut self, key: &'static str) -> Result<PathBuf, CliError> {
        match self.get(key) {
            None => Err(CliError::usage(format!("missing parameter {key}"))),
            Some(Value::String(s)) => Ok(PathBuf::from(s)),
            Some(v) => Err(Self::invalid(key, "a path string", v)),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        let unknown: Vec<&String> = self.map.keys().filter(|k| !self.used.contains(k.as_str())).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(format!("unknown parameters: {unknown:?}"))
                .with_context(serde_json::json!({ "unknown": unknown })))
        }
    }
}
