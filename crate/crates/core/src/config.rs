//! Engine configuration: a `key = value` file plus environment overrides,
//! validated and fully loaded at startup.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::descriptors::{CrippenTable, DEFAULT_RADIUS, DEFAULT_WIDTH};
use crate::grpo::DEFAULT_GROUP_SIZE;
use crate::patterns::{builtin_library, Library};
use crate::promptkit::TaskCatalog;
use crate::retrieval::{ExampleStore, DEFAULT_K};
use crate::reward::{RewardConfig, RewardEngine};

pub const ENV_CONFIG: &str = "CHEMREWARD_CONFIG";
pub const ENV_BIND: &str = "CHEMREWARD_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8787";

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub fingerprint_radius: u32,
    pub fingerprint_width: usize,
    pub top_k: usize,
    pub rollout_n: usize,
    pub reward_config: Option<PathBuf>,
    pub feature_library: Option<PathBuf>,
    pub crippen_table: Option<PathBuf>,
    pub task_catalog: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub bind: String,
    pub seed: u64,
    pub workers: usize,
    pub absent_score: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            fingerprint_radius: DEFAULT_RADIUS,
            fingerprint_width: DEFAULT_WIDTH,
            top_k: DEFAULT_K,
            rollout_n: DEFAULT_GROUP_SIZE,
            reward_config: None,
            feature_library: None,
            crippen_table: None,
            task_catalog: None,
            store: None,
            bind: DEFAULT_BIND.to_string(),
            seed: 0,
            workers: 4,
            absent_score: 0.5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("loading {path}: {message}")]
    Load { path: String, message: String },
}

impl EngineConfig {
    /// Relative paths resolve against `base` (the config file's directory).
    pub fn parse(text: &str, base: &Path) -> Result<EngineConfig, ConfigError> {
        let mut c = EngineConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ConfigError::Syntax { line, message };
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected 'key = value', got '{l}'")))?;
            if !seen.insert(k.to_string()) {
                return Err(err(format!("duplicate key '{k}'")));
            }
            fn num<N: std::str::FromStr>(k: &str, v: &str, line: usize) -> Result<N, ConfigError> {
                v.parse().map_err(|_| ConfigError::Syntax {
                    line,
                    message: format!("'{k}' expects a number, got '{v}'"),
                })
            }
            let path = |v: &str| Some(base.join(v));
            match k {
                "fingerprint_radius" => c.fingerprint_radius = num(k, v, line)?,
                "fingerprint_width" => c.fingerprint_width = num(k, v, line)?,
                "top_k" => c.top_k = num(k, v, line)?,
                "rollout_n" => c.rollout_n = num(k, v, line)?,
                "seed" => c.seed = num(k, v, line)?,
                "workers" => c.workers = num(k, v, line)?,
                "absent_score" => c.absent_score = num(k, v, line)?,
                "bind" => c.bind = v.to_string(),
                "reward_config" => c.reward_config = path(v),
                "feature_library" => c.feature_library = path(v),
                "crippen_table" => c.crippen_table = path(v),
                "task_catalog" => c.task_catalog = path(v),
                "store" => c.store = path(v),
                _ => return Err(err(format!("unknown key '{k}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<EngineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Load {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        EngineConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// `explicit` wins over `$CHEMREWARD_CONFIG`; `$CHEMREWARD_BIND`
    /// overrides the bind address either way.
    pub fn load(explicit: Option<&Path>) -> Result<EngineConfig, ConfigError> {
        let env_path = std::env::var_os(ENV_CONFIG).map(PathBuf::from);
        let mut c = match explicit.map(Path::to_path_buf).or(env_path) {
            Some(p) => EngineConfig::from_file(&p)?,
            None => EngineConfig::default(),
        };
        if let Ok(bind) = std::env::var(ENV_BIND) {
            c.bind = bind;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !self.fingerprint_width.is_power_of_two() || self.fingerprint_width < 64 {
            return bad(format!("fingerprint_width {} is not a power of two >= 64", self.fingerprint_width));
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1".into());
        }
        if self.rollout_n < 2 {
            return bad("rollout_n must be at least 2".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.absent_score) {
            return bad("absent_score must lie in [0, 1]".into());
        }
        if self.bind.is_empty() {
            return bad("bind is empty".into());
        }
        for p in [
            &self.reward_config,
            &self.feature_library,
            &self.crippen_table,
            &self.task_catalog,
            &self.store,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                return bad(format!("{} does not exist", p.display()));
            }
        }
        Ok(())
    }

    /// Effective configuration in the file format.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let _ = writeln!(s, "fingerprint_radius = {}", self.fingerprint_radius);
        let _ = writeln!(s, "fingerprint_width = {}", self.fingerprint_width);
        let _ = writeln!(s, "top_k = {}", self.top_k);
        let _ = writeln!(s, "rollout_n = {}", self.rollout_n);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "absent_score = {}", self.absent_score);
        let _ = writeln!(s, "bind = {}", self.bind);
        for (k, v) in [
            ("reward_config", opt(&self.reward_config)),
            ("feature_library", opt(&self.feature_library)),
            ("crippen_table", opt(&self.crippen_table)),
            ("task_catalog", opt(&self.task_catalog)),
            ("store", opt(&self.store)),
        ] {
            match v {
                Some(v) => {
                    let _ = writeln!(s, "{k} = {v}");
                }
                None if k == "store" => {
                    let _ = writeln!(s, "# {k} = (none)");
                }
                None => {
                    let _ = writeln!(s, "# {k} = (built-in)");
                }
            }
        }
        s
    }
}

/// Everything a request needs, loaded once and shared read-only.
#[derive(Debug)]
pub struct Engine {
    pub config: EngineConfig,
    pub reward: RewardEngine<f64>,
    pub catalog: TaskCatalog,
    pub store: Option<ExampleStore>,
}

impl Engine {
    pub fn load(config: EngineConfig) -> Result<Engine, ConfigError> {
        config.validate()?;
        let load_err = |p: &Path, e: &dyn std::fmt::Display| ConfigError::Load {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        let reward_cfg = match &config.reward_config {
            Some(p) => RewardConfig::from_file(p).map_err(|e| load_err(p, &e))?,
            None => RewardConfig::builtin(),
        };
        let library = match &config.feature_library {
            Some(p) => Library::from_file(p).map_err(|e| load_err(p, &e))?,
            None => builtin_library(),
        };
        let table = match &config.crippen_table {
            Some(p) => CrippenTable::from_file(p).map_err(|e| load_err(p, &e))?,
            None => CrippenTable::builtin().clone(),
        };
        let catalog = match &config.task_catalog {
            Some(p) => TaskCatalog::from_dir(p).map_err(|e| load_err(p, &e))?,
            None => TaskCatalog::builtin(),
        };
        let store = match &config.store {
            Some(p) => Some(ExampleStore::load(p).map_err(|e| load_err(p, &e))?),
            None => None,
        };
        Ok(Engine {
            reward: RewardEngine::new(reward_cfg, library, table),
            catalog,
            store,
            config,
        })
    }

    pub fn builtin() -> Engine {
        Engine::load(EngineConfig::default()).expect("built-in engine loads")
    }
}
