//! HTTP front end for [`MockHandler`].

use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Response, Server};

use super::profile::{MockHandler, MockProfile};
use super::MockError;

const WORKERS: usize = 8;

/// A running mock server. Stops when dropped.
pub struct MockServer {
    server: Arc<Server>,
    handler: Arc<MockHandler>,
    workers: Vec<JoinHandle<()>>,
    port: u16,
}

impl MockServer {
    /// Starts serving `profile` on 127.0.0.1. Port 0 picks a free port.
    pub fn start(profile: MockProfile, port: u16) -> Result<Self, MockError> {
        Self::bind(profile, &format!("127.0.0.1:{port}"))
    }

    pub fn bind(profile: MockProfile, addr: &str) -> Result<Self, MockError> {
        let handler = Arc::new(MockHandler::new(profile)?);
        let server = Arc::new(Server::http(addr).map_err(|e| MockError::Bind(e.to_string()))?);
        let port = server.server_addr().to_ip().map(|a| a.port()).ok_or_else(|| MockError::Bind("not an IP socket".into()))?;
        let workers = (0..WORKERS)
            .map(|_| {
                let (server, handler) = (Arc::clone(&server), Arc::clone(&handler));
                std::thread::spawn(move || serve(&server, &handler))
            })
            .collect();
        Ok(MockServer { server, handler, workers, port })
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    pub fn url(&self) -> String {
        format!("http://127.0.0.1:{}", self.port)
    }

    pub fn handler(&self) -> &MockHandler {
        &self.handler
    }

    /// Blocks until the server is stopped from another thread or the
    /// process exits.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

fn serve(server: &Server, handler: &MockHandler) {
    while let Ok(mut request) = server.recv() {
        let mut body = Vec::new();
        let reply = match request.as_reader().read_to_end(&mut body) {
            Ok(_) => {
                let path = request.url().split('?').next().unwrap_or("").to_string();
                handler.handle(request.method().as_str(), &path, &body)
            }
            Err(e) => super::profile::MockReply { status: 400, body: format!("{{\"error\":{:?}}}", e.to_string()), delay_ms: 0 },
        };
        if reply.delay_ms > 0 {
            std::thread::sleep(Duration::from_millis(reply.delay_ms));
        }
        let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
        let response = Response::from_string(reply.body).with_status_code(reply.status).with_header(header);
        // the client may have given up already
        let _ = request.respond(response);
    }
}
