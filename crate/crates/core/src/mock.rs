//! In-process HTTP server for tests and local demos. Every route accepts a
//! JSON POST and answers with whatever the handler returns.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct MockReply {
    pub status: u16,
    pub body: Value,
    pub delay: Duration,
}

impl MockReply {
    pub fn ok(body: Value) -> Self {
        Self {
            status: 200,
            body,
            delay: Duration::ZERO,
        }
    }

    pub fn error(status: u16, message: &str) -> Self {
        Self {
            status,
            body: json!({ "error": message }),
            delay: Duration::ZERO,
        }
    }

    pub fn delayed(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

type Handler = dyn Fn(&str, Value) -> MockReply + Send + Sync;

pub struct MockServer {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Serves on an ephemeral localhost port until dropped.
    pub fn start<F>(handler: F) -> std::io::Result<Self>
    where
        F: Fn(&str, Value) -> MockReply + Send + Sync + 'static,
    {
        let server = tiny_http::Server::http("127.0.0.1:0")
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock server has no IP address"))?;
        let server = Arc::new(server);
        let handler: Arc<Handler> = Arc::new(handler);
        let srv = Arc::clone(&server);
        let worker = std::thread::spawn(move || {
            for mut req in srv.incoming_requests() {
                let handler = Arc::clone(&handler);
                std::thread::spawn(move || {
                    let mut body = String::new();
                    let _ = req.as_reader().read_to_string(&mut body);
                    let value = serde_json::from_str(&body).unwrap_or(Value::Null);
                    let path = req.url().to_string();
                    let reply = handler(&path, value);
                    if !reply.delay.is_zero() {
                        std::thread::sleep(reply.delay);
                    }
                    let header = tiny_http::Header::from_bytes(
                        &b"Content-Type"[..],
                        &b"application/json"[..],
                    )
                    .expect("static header");
                    let resp = tiny_http::Response::from_string(reply.body.to_string())
                        .with_status_code(reply.status)
                        .with_header(header);
                    let _ = req.respond(resp);
                });
            }
        });
        Ok(Self {
            addr,
            server,
            worker: Some(worker),
        })
    }

    /// A render service that returns the request's `masked_block` unchanged.
    pub fn echo_renderer() -> std::io::Result<Self> {
        Self::start(|path, body| match path {
            "/render" => MockReply::ok(json!({
                "request_id": body["request_id"],
                "rendered_block": body["masked_block"],
                "model_info": { "name": "echo" },
            })),
            _ => MockReply::error(404, "unknown route"),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
