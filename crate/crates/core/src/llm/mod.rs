//! Language-model assistance for candidate election.
//!
//! The tracker only needs "pick one of these N sentences"; providers sit
//! behind [`ContextChooser`]. Failures never propagate: [`choose`] turns
//! them into `None` and the election proceeds without a bonus.

mod external;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use external::{parse_choice, ExternalChooser};
pub use mock::{tokens, MockChooser};

/// Lead sentence of every prompt; the material replaces the placeholder.
pub const PROMPT_LEAD: &str = "The user was just reading: <Reading Material>, which option is most likely to be read next by the user?";

pub const DEFAULT_MODEL: &str = "gpt-4o-mini";
pub const DEFAULT_TIMEOUT_MS: u64 = 3000;
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionQuery {
    pub material: String,
    /// Recently read sentences, most recent last.
    pub recent_history: String,
    pub options: Vec<String>,
}

impl ElectionQuery {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(2..=3).contains(&self.options.len()) {
            return Err(LlmError::InvalidQuery(format!(
                "expected 2 or 3 options, got {}",
                self.options.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("unparseable reply: {0:?}")]
    Unparseable(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

/// Chooses the option most likely to be read next. Returns a 0-based index.
pub trait ContextChooser: Send {
    fn name(&self) -> &str;

    fn choose_option(&mut self, query: &ElectionQuery) -> Result<usize, LlmError>;
}

/// Asks `chooser`, logging and swallowing any failure.
pub fn choose(chooser: &mut dyn ContextChooser, query: &ElectionQuery) -> Option<usize> {
    if let Err(e) = query.validate() {
        tracing::warn!(error = %e, "skipping language model consultation");
        return None;
    }
    match chooser.choose_option(query) {
        Ok(i) if i < query.options.len() => Some(i),
        Ok(i) => {
            tracing::warn!(provider = chooser.name(), index = i, "choice out of range");
            None
        }
        Err(e) => {
            tracing::warn!(provider = chooser.name(), error = %e, "election proceeds without bonus");
            None
        }
    }
}

fn flatten(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Deterministic prompt text for `q`.
pub fn build_prompt(q: &ElectionQuery) -> String {
    let mut out = PROMPT_LEAD.replace("<Reading Material>", &flatten(&q.material));
    out.push_str("\nRecent reading history: ");
    out.push_str(&flatten(&q.recent_history));
    out.push_str("\nOptions:\n");
    for (i, opt) in q.options.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, flatten(opt)));
    }
    out.push_str("Answer with the option number only.");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    External,
    /// Fault injection: every request times out.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub provider: ProviderKind,
    pub endpoint_url: String,
    pub model_name: String,
    pub timeout_ms: u64,
    pub api_key_env_var: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            provider: ProviderKind::Mock,
            endpoint_url: DEFAULT_ENDPOINT.to_string(),
            model_name: DEFAULT_MODEL.to_string(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            api_key_env_var: DEFAULT_API_KEY_ENV.to_string(),
        }
    }
}

impl ProviderConfig {
    pub fn mock() -> Self {
        Self::default()
    }

    pub fn external(endpoint_url: impl Into<String>) -> Self {
        Self {
            provider: ProviderKind::External,
            endpoint_url: endpoint_url.into(),
            ..Self::default()
        }
    }

    pub fn always_timeout() -> Self {
        Self { provider: ProviderKind::Timeout, ..Self::default() }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms.max(1))
    }

    pub fn build(&self) -> Box<dyn ContextChooser> {
        match self.provider {
            ProviderKind::Mock => Box::new(MockChooser::default()),
            ProviderKind::External => Box::new(ExternalChooser::new(self.clone())),
            ProviderKind::Timeout => Box::new(TimeoutChooser::default()),
        }
    }
}

/// Provider that fails every request with a timeout, for degradation tests.
#[derive(Debug, Default, Clone)]
pub struct TimeoutChooser {
    pub calls: usize,
}

impl ContextChooser for TimeoutChooser {
    fn name(&self) -> &str {
        "always-timeout"
    }

    fn choose_option(&mut self, _query: &ElectionQuery) -> Result<usize, LlmError> {
        self.calls += 1;
        Err(LlmError::Timeout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(options: &[&str]) -> ElectionQuery {
        ElectionQuery {
            material: "Some text.\nMore text.".into(),
            recent_history: "Some text.".into(),
            options: options.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn prompt_is_deterministic_and_labelled() {
        let q = query(&["First option.", "Second option."]);
        let a = build_prompt(&q);
        assert_eq!(a, build_prompt(&q));
        assert!(a.contains("\n1. First option.\n"));
        assert!(a.contains("\n2. Second option.\n"));
        assert!(!a.contains("3."));
        assert!(a.starts_with("The user was just reading: Some text. More text., which option is most likely to be read next by the user?"));
        assert!(a.ends_with("Answer with the option number only."));
    }

    #[test]
    fn options_are_flattened() {
        let q = query(&["line one\nline   two", "b", "c"]);
        let p = build_prompt(&q);
        assert!(p.contains("\n1. line one line two\n"));
        assert!(p.contains("\n3. c\n"));
    }

    #[test]
    fn failures_become_absent() {
        let mut c = TimeoutChooser::default();
        assert_eq!(choose(&mut c, &query(&["a", "b"])), None);
        assert_eq!(c.calls, 1);
        // Invalid queries never reach the provider.
        assert_eq!(choose(&mut c, &query(&["a"])), None);
        assert_eq!(c.calls, 1);
    }

    struct OutOfRange;
    impl ContextChooser for OutOfRange {
        fn name(&self) -> &str {
            "oob"
        }
        fn choose_option(&mut self, _q: &ElectionQuery) -> Result<usize, LlmError> {
            Ok(7)
        }
    }

    #[test]
    fn out_of_range_choice_is_dropped() {
        assert_eq!(choose(&mut OutOfRange, &query(&["a", "b"])), None);
    }
}
