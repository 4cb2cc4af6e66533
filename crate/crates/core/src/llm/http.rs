//! OpenAI-compatible `/chat/completions` backend.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{approx_tokens, Backend, CompletionRequest, CompletionResult, LlmError, REQUEST_TIMEOUT};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Base URL up to and including the API version, e.g.
    /// `https://api.openai.com/v1`.
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            timeout: REQUEST_TIMEOUT,
        }
    }

    /// Reads the bearer token from the named environment variable, if set.
    pub fn api_key_from_env(mut self, var: &str) -> Self {
        self.api_key = std::env::var(var).ok().filter(|k| !k.is_empty());
        self
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f32,
    max_tokens: u32,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    stop: &'a [String],
    stream: bool,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend { config, agent }
    }

    fn body(&self, request: &CompletionRequest) -> String {
        let mut messages = Vec::with_capacity(2);
        if !request.system_text.is_empty() {
            messages.push(WireMessage {
                role: "system",
                content: &request.system_text,
            });
        }
        messages.push(WireMessage {
            role: "user",
            content: &request.user_text,
        });
        let wire = WireRequest {
            model: &self.config.model,
            messages,
            temperature: request.temperature,
            max_tokens: request.max_output_tokens,
            stop: &request.stop_sequences,
            stream: false,
        };
        serde_json::to_string(&wire).expect("request serializes")
    }
}

/// Parses a chat-completions response body. Missing usage falls back to
/// the synthetic count.
fn parse_response(body: &str, request: &CompletionRequest, backend_id: String) -> Result<CompletionResult, LlmError> {
    let wire: WireResponse = serde_json::from_str(body).map_err(|e| LlmError::InvalidResponse(e.to_string()))?;
    let text = wire
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| LlmError::InvalidResponse("no message content in response".into()))?;
    let (input_tokens, output_tokens) = match wire.usage {
        Some(u) => (u.prompt_tokens, u.completion_tokens),
        None => (
            approx_tokens(&request.system_text) + approx_tokens(&request.user_text),
            approx_tokens(&text),
        ),
    };
    Ok(CompletionResult {
        text,
        input_tokens,
        output_tokens,
        backend_id,
    })
}

impl Backend for HttpBackend {
    fn id(&self) -> String {
        format!("http:{}", self.config.model)
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let mut req = self
            .agent
            .post(&self.config.endpoint())
            .header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = req
            .send(self.body(request).as_str())
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        match status {
            200..=299 => parse_response(&body, request, self.id()),
            429 => Err(LlmError::RateLimited),
            500..=599 => Err(LlmError::Transport(format!("status {status}: {body}"))),
            _ => Err(LlmError::Api { status, body }),
        }
    }
}
