//! Server configuration, loadable from TOML or JSON.

use std::path::{Path, PathBuf};

use launcher_client::{DEFAULT_GATEWAY_PORT, DEFAULT_PORT};
use launcher_core::sim::SimConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Sim,
    /// Real hardware; not available in this build.
    External,
}

/// When the reservoir stirrer runs on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StirPolicy {
    /// Stir when the fill sensor stays empty for two supervision ticks.
    pub on_sensor: bool,
    /// Stir once after every released ball.
    pub after_launch: bool,
}

impl Default for StirPolicy {
    fn default() -> Self {
        Self {
            on_sensor: true,
            after_launch: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    /// 0 picks a free port.
    pub tcp_port: u16,
    pub gateway_port: u16,
    /// Console assets served at `/`; a placeholder page when absent.
    pub static_dir: Option<PathBuf>,
    pub backend: BackendKind,
    pub sim: SimConfig,
    pub stir: StirPolicy,
    /// Longest a session waits for the controller before answering with an
    /// error (ms).
    pub max_latency_budget_ms: u64,
    /// Snapshot rate pushed to WebSocket subscribers (Hz).
    pub snapshot_hz: f64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            tcp_port: DEFAULT_PORT,
            gateway_port: DEFAULT_GATEWAY_PORT,
            static_dir: None,
            backend: BackendKind::Sim,
            sim: SimConfig::default(),
            stir: StirPolicy::default(),
            max_latency_budget_ms: 500,
            snapshot_hz: 5.0,
        }
    }
}

impl ServerConfig {
    /// Both ports 0, for tests.
    pub fn ephemeral() -> Self {
        Self {
            tcp_port: 0,
            gateway_port: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tcp_port != 0 && self.tcp_port == self.gateway_port {
            return Err(ServerError::Config(format!(
                "tcp_port and gateway_port are both {}",
                self.tcp_port
            )));
        }
        if self.max_latency_budget_ms == 0 {
            return Err(ServerError::Config("max_latency_budget_ms must be positive".into()));
        }
        if !(self.snapshot_hz > 0.0 && self.snapshot_hz <= 100.0) {
            return Err(ServerError::Config(format!(
                "snapshot_hz = {} is outside (0, 100]",
                self.snapshot_hz
            )));
        }
        self.sim.validate()?;
        Ok(())
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
