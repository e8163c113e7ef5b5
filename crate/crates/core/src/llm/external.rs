use serde_json::{json, Value};

use super::{build_prompt, ContextChooser, ElectionQuery, LlmError, ProviderConfig};

/// Chat-completion HTTP provider.
///
/// Posts `{model, messages:[{role:"user", content}]}` to the configured
/// endpoint with bearer auth taken from an environment variable, and reads
/// the first choice's message content.
pub struct ExternalChooser {
    cfg: ProviderConfig,
    agent: ureq::Agent,
}

impl ExternalChooser {
    pub fn new(cfg: ProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(true)
            .build()
            .into();
        Self { cfg, agent }
    }

    fn request(&self, prompt: &str) -> Result<String, LlmError> {
        let body = json!({
            "model": self.cfg.model_name,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut req = self.agent.post(&self.cfg.endpoint_url);
        match std::env::var(&self.cfg.api_key_env_var) {
            Ok(key) if !key.is_empty() => {
                req = req.header("Authorization", format!("Bearer {key}"));
            }
            _ => tracing::debug!(var = %self.cfg.api_key_env_var, "no API key in environment"),
        }
        let mut resp = req.send_json(&body).map_err(map_err)?;
        let reply: Value = resp.body_mut().read_json().map_err(map_err)?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| LlmError::Unparseable(reply.to_string()))
    }
}

fn map_err(e: ureq::Error) -> LlmError {
    match e {
        ureq::Error::Timeout(_) => LlmError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => LlmError::Timeout,
        other => LlmError::Transport(other.to_string()),
    }
}

impl ContextChooser for ExternalChooser {
    fn name(&self) -> &str {
        "external"
    }

    fn choose_option(&mut self, query: &ElectionQuery) -> Result<usize, LlmError> {
        query.validate()?;
        let reply = self.request(&build_prompt(query))?;
        parse_choice(&reply, query.options.len()).ok_or(LlmError::Unparseable(reply))
    }
}

/// First integer in `1..=n` appearing in `reply`, as a 0-based index.
pub fn parse_choice(reply: &str, n: usize) -> Option<usize> {
    reply
        .split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse::<usize>().ok())
        .find(|v| (1..=n).contains(v))
        .map(|v| v - 1)
}
