//! Blocking JSON-over-HTTP client shared by the remote renderer and the
//! expert-service clients.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HttpError {
    #[error("request timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("remote error (status {status}): {message}")]
    Status { status: u16, message: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl HttpError {
    /// Failures worth retrying: timeouts, connection problems and 5xx.
    pub fn is_transient(&self) -> bool {
        match self {
            HttpError::Timeout | HttpError::Transport(_) => true,
            HttpError::Status { status, .. } => *status >= 500,
            HttpError::Malformed(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            backoff_ms: 100,
        }
    }
}

/// Counting semaphore bounding concurrent in-flight requests.
#[derive(Debug)]
struct Limiter {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("limiter poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("limiter poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("limiter poisoned") += 1;
        self.0.cv.notify_one();
    }
}

const MAX_BODY: u64 = 256 * 1024 * 1024;

#[derive(Clone)]
pub struct JsonClient {
    agent: ureq::Agent,
    base: String,
    limiter: Arc<Limiter>,
}

impl std::fmt::Debug for JsonClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JsonClient").field("base", &self.base).finish()
    }
}

impl JsonClient {
    pub fn new(base_url: &str, max_in_flight: usize) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
            base: base_url.trim_end_matches('/').to_string(),
            limiter: Arc::new(Limiter {
                free: Mutex::new(max_in_flight.max(1)),
                cv: Condvar::new(),
            }),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// One POST attempt.
    pub fn post<B: Serialize, R: DeserializeOwned>(
        &self,
        route: &str,
        body: &B,
        timeout: Duration,
    ) -> Result<R, HttpError> {
        let _permit = self.limiter.acquire();
        let url = format!("{}{}", self.base, route);
        let resp = self
            .agent
            .post(&url)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .send_json(body)
            .map_err(map_transport)?;
        let status = resp.status().as_u16();
        let text = resp
            .into_body()
            .with_config()
            .limit(MAX_BODY)
            .read_to_string()
            .map_err(map_transport)?;
        if !(200..300).contains(&status) {
            return Err(HttpError::Status {
                status,
                message: error_message(&text),
            });
        }
        serde_json::from_str(&text).map_err(|e| HttpError::Malformed(format!("bad JSON: {e}")))
    }

    /// POST with retries on transient failures.
    pub fn post_retry<B: Serialize, R: DeserializeOwned>(
        &self,
        route: &str,
        body: &B,
        timeout: Duration,
        policy: &RetryPolicy,
    ) -> Result<R, HttpError> {
        let attempts = policy.max_attempts.max(1);
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(policy.backoff_ms << (attempt - 1)));
            }
            match self.post(route, body, timeout) {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() => {
                    tracing::debug!(route, attempt, error = %e, "transient HTTP failure");
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Checks that the endpoint's host accepts TCP connections.
    pub fn probe(&self, timeout: Duration) -> Result<(), HttpError> {
        use std::net::{TcpStream, ToSocketAddrs};
        let rest = self
            .base
            .split_once("://")
            .map(|(_, r)| r)
            .unwrap_or(&self.base);
        let hostport = rest.split('/').next().unwrap_or(rest);
        let hostport = if hostport.contains(':') {
            hostport.to_string()
        } else {
            format!("{hostport}:80")
        };
        let addrs = hostport
            .to_socket_addrs()
            .map_err(|e| HttpError::Transport(format!("{hostport}: {e}")))?;
        let mut last = HttpError::Transport(format!("{hostport}: no address"));
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(_) => return Ok(()),
                Err(e) => last = HttpError::Transport(format!("{hostport}: {e}")),
            }
        }
        Err(last)
    }
}

fn map_transport(e: ureq::Error) -> HttpError {
    match e {
        ureq::Error::Timeout(_) => HttpError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => HttpError::Timeout,
        ureq::Error::Json(j) => HttpError::Malformed(j.to_string()),
        other => HttpError::Transport(other.to_string()),
    }
}

fn error_message(body: &str) -> String {
    #[derive(Deserialize)]
    struct ErrBody {
        error: Option<String>,
        message: Option<String>,
    }
    match serde_json::from_str::<ErrBody>(body) {
        Ok(ErrBody { error: Some(m), .. }) | Ok(ErrBody { message: Some(m), .. }) => m,
        _ => body.trim().to_string(),
    }
}
