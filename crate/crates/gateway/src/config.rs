use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use veilgate_core::chat::{ChatClient, EchoClient, HttpChatClient};
use veilgate_core::detection::{DetectorMode, DetectorSettings, LlmDetectorSettings};

use crate::error::{GatewayError, Result};

/// Upstream URL value that selects the built-in echo model.
pub const ECHO_UPSTREAM: &str = "echo";
pub const ENV_PREFIX: &str = "LG_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    /// Base URL of the chat-completions server, or `echo`.
    pub upstream_url: String,
    pub model: String,
    pub temperature: f64,
    pub detector: DetectorSettings,
    pub timeout_secs: u64,
    pub vault_dir: PathBuf,
    pub listen: String,
    /// Start every prompt from an empty vault instead of the session's.
    pub reset_vault_per_prompt: bool,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            upstream_url: ECHO_UPSTREAM.to_string(),
            model: "default".to_string(),
            temperature: 0.0,
            detector: DetectorSettings::default(),
            timeout_secs: 60,
            vault_dir: PathBuf::from("vaults"),
            listen: "127.0.0.1:8787".to_string(),
            reset_vault_per_prompt: false,
        }
    }
}

impl GatewayConfig {
    /// Reads a `.json` or TOML file, then applies `LG_*` overrides from the
    /// process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut config = match path {
            Some(path) => Self::from_file(path)?,
            None => GatewayConfig::default(),
        };
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| GatewayError::storage(path, e))?;
        if path.extension().is_some_and(|ext| ext == "json") {
            serde_json::from_str(&raw).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&raw).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))
        }
    }

    /// Applies overrides such as `LG_UPSTREAM_URL` or `LG_DETECTOR_MODE`.
    /// Unrelated variables are ignored; unknown `LG_` names are an error.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        for (key, value) in vars {
            let Some(name) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let bad = |what: &str| GatewayError::Config(format!("{key}={value:?}: {what}"));
            match name {
                "UPSTREAM_URL" => self.upstream_url = value.clone(),
                "MODEL" => self.model = value.clone(),
                "TEMPERATURE" => self.temperature = value.parse().map_err(|_| bad("not a number"))?,
                "TIMEOUT_SECS" => self.timeout_secs = value.parse().map_err(|_| bad("not an integer"))?,
                "VAULT_DIR" => self.vault_dir = PathBuf::from(&value),
                "LISTEN" => self.listen = value.clone(),
                "RESET_VAULT_PER_PROMPT" => {
                    self.reset_vault_per_prompt = value.parse().map_err(|_| bad("expected true or false"))?
                }
                "DETECTOR_MODE" => {
                    self.detector.mode = serde_json::from_value(serde_json::Value::String(value.clone()))
                        .map_err(|_| bad("expected pattern, llm, ner-service or hybrid"))?;
                }
                "RULES_FILE" => self.detector.rules_file = Some(PathBuf::from(&value)),
                "NER_SERVICE_URL" => self.detector.ner_service_url = Some(value.clone()),
                "NER_THRESHOLD" => {
                    self.detector.ner_threshold = Some(value.parse().map_err(|_| bad("not a number"))?)
                }
                "LLM_URL" => self.llm_settings().url = value.clone(),
                "LLM_MODEL" => self.llm_settings().model = value.clone(),
                _ => return Err(bad("unknown setting")),
            }
        }
        Ok(())
    }

    fn llm_settings(&mut self) -> &mut LlmDetectorSettings {
        self.detector.llm.get_or_insert_with(|| LlmDetectorSettings {
            url: String::new(),
            model: String::new(),
            temperature: None,
            system_prompt: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout_secs == 0 {
            return Err(GatewayError::Config("timeout_secs must be greater than 0".into()));
        }
        if self.upstream_url.trim().is_empty() {
            return Err(GatewayError::Config("upstream_url is empty".into()));
        }
        let llm_ready = self
            .detector
            .llm
            .as_ref()
            .is_some_and(|l| !l.url.is_empty() && !l.model.is_empty());
        match self.detector.mode {
            DetectorMode::Llm if !llm_ready => {
                Err(GatewayError::Config("llm detector needs detector.llm.url and detector.llm.model".into()))
            }
            DetectorMode::NerService if self.detector.ner_service_url.is_none() => {
                Err(GatewayError::Config("ner-service detector needs detector.ner_service_url".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    /// Builds the upstream client. Must not be called from inside an async
    /// runtime: the HTTP client is blocking.
    pub fn upstream(&self) -> Result<Arc<dyn ChatClient>> {
        if self.upstream_url == ECHO_UPSTREAM {
            return Ok(Arc::new(EchoClient));
        }
        let client = HttpChatClient::new(&self.upstream_url, self.model.clone(), self.timeout())?
            .with_temperature(self.temperature);
        Ok(Arc::new(client))
    }
}
