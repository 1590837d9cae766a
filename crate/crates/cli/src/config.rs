//! Run configuration: a single JSON document layered over the scenario preset.

use std::path::{Path, PathBuf};

use asi_sim::dynamics::{DephasingMode, DeviceParams, IntegrationConfig};
use asi_sim::scenarios::{DriveParams, Engine, ScenarioName, ScenarioSpec, SweepKind, SweepSetup};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unknown names or keys, out-of-range parameters (exit 2).
    Config(String),
    /// Integration, eigensolver, I/O or property failures (exit 3).
    Numerical(String),
    /// The reader of stdout went away.
    Closed,
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Closed => 0,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
            Failure::Closed => "",
        }
    }
}

fn root(e: &asi_sim::Error) -> &asi_sim::Error {
    match e {
        asi_sim::Error::Scenario { source, .. } => root(source),
        other => other,
    }
}

impl From<asi_sim::Error> for Failure {
    fn from(e: asi_sim::Error) -> Self {
        use asi_sim::Error as E;
        let msg = e.to_string();
        match root(&e) {
            E::StepUnderflow { .. } | E::Integration { .. } | E::Eigen => Failure::Numerical(msg),
            _ => Failure::Config(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::Closed;
        }
        Failure::Numerical(format!("I/O error: {e}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { path: None, format: Format::Csv }
    }
}

/// Everything a run needs. Frequencies are MHz (/2π), durations ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    pub engine: Engine,
    pub drive: DriveParams,
    pub device: DeviceParams,
    pub integration: IntegrationConfig,
    pub dephasing: DephasingMode,
    pub duration_ns: Option<f64>,
    pub samples: usize,
    pub delta_phi: f64,
    pub sweep: SweepSetup,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn preset(scenario: ScenarioName, engine: Engine) -> Self {
        let s = ScenarioSpec::preset(scenario, engine);
        Self {
            scenario,
            engine,
            drive: s.drive,
            device: s.device,
            integration: s.integration,
            dephasing: s.dephasing,
            duration_ns: s.duration_ns,
            samples: s.samples,
            delta_phi: s.delta_phi,
            sweep: sweep_preset(SweepKind::Dphi),
            output: OutputConfig::default(),
        }
    }

    pub fn spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            name: self.scenario,
            engine: self.engine,
            drive: self.drive.clone(),
            device: self.device.clone(),
            integration: self.integration.clone(),
            dephasing: self.dephasing,
            duration_ns: self.duration_ns,
            samples: self.samples,
            delta_phi: self.delta_phi,
        }
    }

    /// Reseeds the quasi-static sampler; no effect in Markovian mode.
    pub fn apply_seed(&mut self, seed: u64) {
        if let DephasingMode::QuasiStatic { samples, .. } = self.dephasing {
            self.dephasing = DephasingMode::QuasiStatic { samples, seed };
        }
    }
}

/// Sweep defaults: the ν scan needs a long window to resolve rates near decoupling.
pub fn sweep_preset(kind: SweepKind) -> SweepSetup {
    match kind {
        SweepKind::Nu => SweepSetup { window_ns: 20_000.0, ..SweepSetup::default() },
        SweepKind::Dphi => SweepSetup::default(),
    }
}

pub fn parse_scenario(name: &str) -> Result<ScenarioName, Failure> {
    name.parse().map_err(|e: asi_sim::Error| Failure::Config(e.to_string()))
}

pub fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Recursive object merge; non-object values in `over` replace `base`.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn string_field(v: &Value, key: &str) -> Result<Option<String>, Failure> {
    match v.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(Failure::Config(format!("`{key}` must be a string, got {other}"))),
    }
}

/// Resolves the preset (command line first, then the file) and layers the file on top.
pub fn resolve(cli_scenario: Option<&str>, cli_engine: Option<Engine>, file: Option<Value>) -> Result<RunConfig, Failure> {
    let file = file.unwrap_or_else(|| Value::Object(Default::default()));
    if !file.is_object() {
        return Err(Failure::Config("configuration must be a JSON object".into()));
    }
    let name = match (cli_scenario, string_field(&file, "scenario")?) {
        (Some(n), _) => n.to_string(),
        (None, Some(n)) => n,
        (None, None) => return Err(Failure::Config("no scenario given".into())),
    };
    let scenario = parse_scenario(&name)?;
    let engine = match (cli_engine, string_field(&file, "engine")?) {
        (Some(e), _) => e,
        (None, Some(e)) => e.parse::<Engine>()?,
        (None, None) => Engine::Effective,
    };
    let mut value = serde_json::to_value(RunConfig::preset(scenario, engine)).expect("config serializes");
    merge(&mut value, file);
    let mut cfg: RunConfig = serde_json::from_value(value).map_err(|e| Failure::Config(format!("configuration: {e}")))?;
    cfg.scenario = scenario;
    cfg.engine = engine;
    Ok(cfg)
}

/// Sweep setup from the optional `sweep` object of a configuration file.
pub fn resolve_sweep(kind: SweepKind, file: Option<Value>) -> Result<SweepSetup, Failure> {
    let mut value = serde_json::to_value(sweep_preset(kind)).expect("setup serializes");
    if let Some(file) = file {
        let obj = file.as_object().ok_or_else(|| Failure::Config("configuration must be a JSON object".into()))?;
        // the rest of the document must still be a valid run configuration
        if let Some(bad) = obj.keys().find(|k| !RUN_KEYS.contains(&k.as_str())) {
            return Err(Failure::Config(format!("configuration: unknown field `{bad}`")));
        }
        if let Some(s) = obj.get("sweep") {
            merge(&mut value, s.clone());
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::Config(format!("sweep configuration: {e}")))
}

const RUN_KEYS: &[&str] =
    &["scenario", "engine", "drive", "device", "integration", "dephasing", "duration_ns", "samples", "delta_phi", "sweep", "output"];

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn presets_round_trip_through_json() {
        for name in ScenarioName::ALL {
            let cfg = RunConfig::preset(name, Engine::Full);
            let back: RunConfig = serde_json::from_value(serde_json::to_value(&cfg).unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        assert_eq!(
            RUN_KEYS.len(),
            serde_json::to_value(RunConfig::preset(ScenarioName::Fig2a, Engine::Full)).unwrap().as_object().unwrap().len()
        );
    }

    #[test]
    fn partial_overrides_keep_preset_values() {
        let cfg = resolve(Some("fig3_4spin_down"), None, Some(json!({"integration": {"rtol": 1e-9}, "drive": {"nu_mhz": 99.0}}))).unwrap();
        assert_eq!(cfg.integration.fock_cutoff, 7);
        assert_eq!(cfg.integration.rtol, 1e-9);
        assert_eq!(cfg.drive.nu_mhz, 99.0);
        assert_eq!(cfg.drive.delta_mhz, 235.0);
    }

    #[test]
    fn unknown_keys_and_names_are_config_errors() {
        for bad in [json!({"bogus": 1}), json!({"device": {"qubitz": []}}), json!({"integration": {"method": "euler"}})] {
            assert_eq!(resolve(Some("fig2a"), None, Some(bad)).unwrap_err().code(), 2);
        }
        let err = resolve(Some("fig7"), None, None).unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.message().contains("ghz3"));
        assert_eq!(resolve_sweep(SweepKind::Nu, Some(json!({"sweeps": {}}))).unwrap_err().code(), 2);
    }

    #[test]
    fn cli_choices_win_over_the_file() {
        let cfg = resolve(Some("ghz3"), Some(Engine::Full), Some(json!({"scenario": "fig2a", "engine": "lindblad"}))).unwrap();
        assert_eq!((cfg.scenario, cfg.engine), (ScenarioName::Ghz3, Engine::Full));
        let cfg = resolve(None, None, Some(json!({"scenario": "fig2b", "engine": "lindblad"}))).unwrap();
        assert_eq!((cfg.scenario, cfg.engine), (ScenarioName::Fig2b, Engine::FullLindblad));
    }

    #[test]
    fn seed_only_touches_quasi_static_mode() {
        let mut cfg = RunConfig::preset(ScenarioName::Ghz3, Engine::FullLindblad);
        cfg.apply_seed(9);
        assert_eq!(cfg.dephasing, DephasingMode::Markovian);
        cfg.dephasing = DephasingMode::QuasiStatic { samples: 4, seed: 0 };
        cfg.apply_seed(9);
        assert_eq!(cfg.dephasing, DephasingMode::QuasiStatic { samples: 4, seed: 9 });
    }
}
