//! Chat-completion backends, retries and token accounting.
//!
//! Every agent call goes through [`LlmClient::complete`], which enforces the
//! in-flight limit, retries transient failures and records usage in the
//! shared [`UsageLedger`] under the calling agent's label.

mod ledger;
mod scripted;

#[cfg(feature = "http")]
mod http;

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ledger::{LedgerSnapshot, Usage, UsageLedger};
pub use scripted::{read_script, write_script, Fault, ScriptEntry, ScriptedBackend};

#[cfg(feature = "http")]
pub use http::{HttpBackend, HttpConfig};

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 2048;
pub const REQUEST_TIMEOUT: Duration = Duration::from_secs(120);
pub const DEFAULT_IN_FLIGHT: usize = 4;

/// Price-derived weights for input and output tokens (0.004 and 0.012 per
/// thousand tokens, normalized to sum to one).
pub const INPUT_WEIGHT: f64 = 0.25;
pub const OUTPUT_WEIGHT: f64 = 0.75;

/// Weighted token cost `0.25 * input + 0.75 * output`, in whatever unit the
/// counts are given (tokens, millions of tokens).
pub fn weighted_cost(input_tokens: f64, output_tokens: f64) -> f64 {
    INPUT_WEIGHT * input_tokens + OUTPUT_WEIGHT * output_tokens
}

/// Synthetic token count used wherever a provider does not report usage.
pub fn approx_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_text: String,
    pub user_text: String,
    pub temperature: f32,
    pub max_output_tokens: u32,
    #[serde(default)]
    pub stop_sequences: Vec<String>,
}

impl CompletionRequest {
    /// Greedy request (temperature 0.0) with the default output budget.
    pub fn new(system_text: impl Into<String>, user_text: impl Into<String>) -> Self {
        CompletionRequest {
            system_text: system_text.into(),
            user_text: user_text.into(),
            temperature: 0.0,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            stop_sequences: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub backend_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited,
    #[error("scripted backend exhausted after {served} responses")]
    BackendExhausted { served: usize },
    #[error("backend returned status {status}: {body}")]
    Api { status: u16, body: String },
    #[error("invalid response: {0}")]
    InvalidResponse(String),
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LlmError::Transport(_) | LlmError::RateLimited)
    }
}

pub trait Backend: Send + Sync {
    fn id(&self) -> String;
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    pub fn no_delay() -> Self {
        RetryPolicy {
            base_delay: Duration::ZERO,
            ..Self::default()
        }
    }

    /// Delay before attempt `attempt + 1`, doubling each time.
    pub fn delay_after(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt.saturating_sub(1))
    }
}

struct InFlight {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut active = self.0.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.0.freed.notify_one();
    }
}

pub struct LlmClient {
    backend: Box<dyn Backend>,
    ledger: UsageLedger,
    retry: RetryPolicy,
    in_flight: InFlight,
}

impl LlmClient {
    pub fn new(backend: impl Backend + 'static) -> Self {
        Self::with_options(backend, RetryPolicy::default(), DEFAULT_IN_FLIGHT)
    }

    pub fn with_options(backend: impl Backend + 'static, retry: RetryPolicy, in_flight_limit: usize) -> Self {
        LlmClient {
            backend: Box::new(backend),
            ledger: UsageLedger::default(),
            retry,
            in_flight: InFlight {
                limit: in_flight_limit.max(1),
                active: Mutex::new(0),
                freed: Condvar::new(),
            },
        }
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    pub fn ledger(&self) -> &UsageLedger {
        &self.ledger
    }

    /// Sends `request`, retrying transport errors and rate limits with
    /// exponential backoff. Only the successful attempt is recorded.
    pub fn complete(&self, agent: &str, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let outcome = {
                let _permit = self.in_flight.acquire();
                self.backend.complete(request)
            };
            match outcome {
                Ok(result) => {
                    self.ledger.record(agent, result.input_tokens, result.output_tokens);
                    return Ok(result);
                }
                Err(e) if e.is_retryable() && attempt < self.retry.max_attempts => {
                    let delay = self.retry.delay_after(attempt);
                    if !delay.is_zero() {
                        std::thread::sleep(delay);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn weighted_cost_basics() {
        assert_eq!(weighted_cost(0.0, 0.0), 0.0);
        assert_eq!(weighted_cost(4.0, 4.0), 4.0);
        assert!((weighted_cost(73.5, 1.6) - 19.575).abs() < 1e-9);
    }

    #[test]
    fn approx_tokens_rounds_up() {
        assert_eq!(approx_tokens(""), 0);
        assert_eq!(approx_tokens("abcd"), 1);
        assert_eq!(approx_tokens("abcde"), 2);
        assert_eq!(approx_tokens("10–3"), 1);
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(100),
        };
        assert_eq!(p.delay_after(1), Duration::from_millis(100));
        assert_eq!(p.delay_after(2), Duration::from_millis(200));
    }

    struct Concurrency {
        active: AtomicUsize,
        peak: AtomicUsize,
    }

    struct SlowBackend(Arc<Concurrency>);

    impl Backend for SlowBackend {
        fn id(&self) -> String {
            "slow".into()
        }
        fn complete(&self, _: &CompletionRequest) -> Result<CompletionResult, LlmError> {
            let now = self.0.active.fetch_add(1, Ordering::SeqCst) + 1;
            self.0.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(5));
            self.0.active.fetch_sub(1, Ordering::SeqCst);
            Ok(CompletionResult {
                text: "ok".into(),
                input_tokens: 1,
                output_tokens: 1,
                backend_id: "slow".into(),
            })
        }
    }

    #[test]
    fn in_flight_limit_is_enforced() {
        let stats = Arc::new(Concurrency {
            active: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        });
        let client = LlmClient::with_options(SlowBackend(stats.clone()), RetryPolicy::no_delay(), 2);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    for _ in 0..4 {
                        client.complete("judge", &CompletionRequest::new("", "")).unwrap();
                    }
                });
            }
        });
        assert!(stats.peak.load(Ordering::SeqCst) <= 2);
        assert_eq!(client.ledger().total().calls, 32);
    }
}
