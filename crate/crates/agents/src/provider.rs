use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vrpkit_core::ClassifyOptions;

use crate::rule::RuleBasedProvider;

/// Agent roles: generation, judgment, revision, error analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Ga,
    Ja,
    Ra,
    Eaa,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Ga => "GA",
            Role::Ja => "JA",
            Role::Ra => "RA",
            Role::Eaa => "EAA",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("provider transport: {0}")]
    Transport(String),
    #[error("provider response: {0}")]
    Response(String),
    #[error("provider cannot answer: {0}")]
    Unavailable(String),
}

/// A text model answering one prompt at a time.
pub trait Provider {
    fn name(&self) -> &str;
    fn complete(&mut self, role: Role, prompt: &str) -> Result<String, ProviderError>;
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&mut self, role: Role, prompt: &str) -> Result<String, ProviderError> {
        (**self).complete(role, prompt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProviderKind {
    RuleBased,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    /// Full chat-completions URL (remote only).
    pub endpoint: Option<String>,
    pub model: String,
    /// Environment variable holding the API key.
    pub key_env: String,
    pub max_rounds: usize,
    pub timeout: Duration,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::RuleBased,
            endpoint: None,
            model: "gpt-4.1".into(),
            key_env: "OPENAI_API_KEY".into(),
            max_rounds: 5,
            timeout: Duration::from_secs(120),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.max_rounds == 0 {
            return Err(ProviderError::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Builds the configured provider. Remote providers fail here, before any
/// network traffic, when the endpoint or key is missing.
pub fn build_provider(cfg: &ProviderConfig, opts: ClassifyOptions) -> Result<Box<dyn Provider>, ProviderError> {
    cfg.validate()?;
    match cfg.kind {
        ProviderKind::RuleBased => Ok(Box::new(RuleBasedProvider::new(opts))),
        ProviderKind::Remote => Ok(Box::new(RemoteProvider::from_config(cfg)?)),
    }
}

/// Chat-completion client for OpenAI-compatible endpoints.
pub struct RemoteProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    key: String,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Reply,
}

#[derive(Deserialize)]
struct Reply {
    content: Option<String>,
}

impl RemoteProvider {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        let endpoint = cfg
            .endpoint
            .clone()
            .ok_or_else(|| ProviderError::Config("remote provider needs an endpoint".into()))?;
        let key = std::env::var(&cfg.key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| ProviderError::Config(format!("environment variable {} is not set", cfg.key_env)))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(RemoteProvider {
            client,
            endpoint,
            model: cfg.model.clone(),
            key,
        })
    }
}

impl Provider for RemoteProvider {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&mut self, _role: Role, prompt: &str) -> Result<String, ProviderError> {
        let body = ChatRequest {
            model: &self.model,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: 0.0,
        };
        let resp = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(ProviderError::Transport(format!("HTTP {status}: {}", text.trim())));
        }
        let parsed: ChatResponse = resp.json().map_err(|e| ProviderError::Response(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ProviderError::Response("no choices in reply".into()))
    }
}
