//! A tiny in-process chat-completion mock for integration tests.
//!
//! [`MockChatServer`] binds an ephemeral localhost port and answers
//! HTTP POSTs shaped like chat-completion calls. Responses come from a
//! script of [`Reply`] values consumed in order; once the script is
//! exhausted the server echoes the last user message back, which makes
//! "model returns the input unchanged" the default behaviour.
//!
//! The server also records what it saw — request count, request
//! bodies, and the high-water mark of concurrent in-flight requests —
//! so tests can assert on retry counts and parallelism limits.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

/// What the server sends back for one request.
#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub mode: ReplyMode,
}

#[derive(Debug, Clone)]
pub enum ReplyMode {
    /// Answer with the last user message's content, wrapped in a
    /// well-formed chat-completion body.
    Echo,
    /// Answer with this text, wrapped in a well-formed body.
    Text(String),
    /// Answer with this body verbatim (for malformed-shape tests).
    RawJson(String),
    /// Answer with an empty body.
    Empty,
}

impl Reply {
    pub fn ok_echo() -> Self {
        Self { status: 200, mode: ReplyMode::Echo }
    }

    pub fn ok_text(text: impl Into<String>) -> Self {
        Self { status: 200, mode: ReplyMode::Text(text.into()) }
    }

    pub fn error(status: u16) -> Self {
        Self {
            status,
            mode: ReplyMode::RawJson(format!("{{\"error\":{{\"code\":{status}}}}}")),
        }
    }

    pub fn raw_json(status: u16, body: impl Into<String>) -> Self {
        Self { status, mode: ReplyMode::RawJson(body.into()) }
    }
}

#[derive(Default)]
struct ServerState {
    script: Mutex<VecDeque<Reply>>,
    request_bodies: Mutex<Vec<String>>,
    requests: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    delay_ms: AtomicUsize,
    shutdown: AtomicBool,
}

pub struct MockChatServer {
    state: Arc<ServerState>,
    addr: std::net::SocketAddr,
    accept_thread: Option<JoinHandle<()>>,
}

impl MockChatServer {
    /// Start the server on an OS-assigned localhost port.
    pub fn start() -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(ServerState::default());

        let accept_state = Arc::clone(&state);
        let accept_thread = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if accept_state.shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let conn_state = Arc::clone(&accept_state);
                std::thread::spawn(move || {
                    let _ = handle_connection(stream, &conn_state);
                });
            }
        });

        Ok(Self { state, addr, accept_thread: Some(accept_thread) })
    }

    /// Base URL suitable for a provider preset, e.g.
    /// `http://127.0.0.1:PORT/v1/chat/completions`.
    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    /// Queue replies to be consumed in order before echo kicks in.
    pub fn script(&self, replies: impl IntoIterator<Item = Reply>) {
        self.state.script.lock().unwrap().extend(replies);
    }

    /// Hold each request open this long before answering, so tests can
    /// observe overlapping requests.
    pub fn set_delay(&self, delay: Duration) {
        self.state
            .delay_ms
            .store(delay.as_millis() as usize, Ordering::SeqCst);
    }

    pub fn request_count(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    /// Highest number of requests that were in flight at once.
    pub fn max_concurrency(&self) -> usize {
        self.state.max_in_flight.load(Ordering::SeqCst)
    }

    pub fn request_bodies(&self) -> Vec<String> {
        self.state.request_bodies.lock().unwrap().clone()
    }
}

impl Drop for MockChatServer {
    fn drop(&mut self) {
        self.state.shutdown.store(true, Ordering::SeqCst);
        // Wake the accept loop with a throwaway connection.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.accept_thread.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(stream: TcpStream, state: &ServerState) -> std::io::Result<()> {
    let body = read_request_body(&stream)?;

    let current = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.max_in_flight.fetch_max(current, Ordering::SeqCst);
    state.requests.fetch_add(1, Ordering::SeqCst);
    state.request_bodies.lock().unwrap().push(body.clone());

    let delay = state.delay_ms.load(Ordering::SeqCst);
    if delay > 0 {
        std::thread::sleep(Duration::from_millis(delay as u64));
    }

    let reply = state
        .script
        .lock()
        .unwrap()
        .pop_front()
        .unwrap_or_else(Reply::ok_echo);
    let response_body = match reply.mode {
        ReplyMode::Echo => completion_body(&last_user_content(&body)),
        ReplyMode::Text(text) => completion_body(&text),
        ReplyMode::RawJson(raw) => raw,
        ReplyMode::Empty => String::new(),
    };

    state.in_flight.fetch_sub(1, Ordering::SeqCst);
    write_response(stream, reply.status, &response_body)
}

/// Read one HTTP/1.1 request and return its body. Headers are parsed
/// only far enough to find Content-Length.
fn read_request_body(stream: &TcpStream) -> std::io::Result<String> {
    let mut reader = BufReader::new(stream);
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some(value) = line
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
            .and_then(|v| v.parse::<usize>().ok())
        {
            content_length = value;
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    Ok(String::from_utf8_lossy(&body).into_owned())
}

fn write_response(mut stream: TcpStream, status: u16, body: &str) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        401 => "Unauthorized",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Unknown",
    };
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\n\
         Content-Type: application/json\r\n\
         Content-Length: {}\r\n\
         Connection: close\r\n\r\n{body}",
        body.len(),
    );
    stream.write_all(response.as_bytes())?;
    stream.flush()
}

/// Pull the last user message's content out of a chat-completion
/// request body; empty string if the shape is unexpected.
fn last_user_content(body: &str) -> String {
    let Ok(value) = serde_json::from_str::<serde_json::Value>(body) else {
        return String::new();
    };
    value["messages"]
        .as_array()
        .and_then(|messages| {
            messages
                .iter()
                .rev()
                .find(|m| m["role"] == "user")
                .and_then(|m| m["content"].as_str())
        })
        .unwrap_or_default()
        .to_string()
}

/// A minimal well-formed chat-completion response carrying `text`.
fn completion_body(text: &str) -> String {
    serde_json::json!({
        "choices": [{
            "index": 0,
            "message": { "role": "assistant", "content": text },
            "finish_reason": "stop",
        }]
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(url: &str, body: &str) -> (u16, String) {
        // hand-rolled client keeps this crate free of HTTP dependencies
        let address = url
            .strip_prefix("http://")
            .and_then(|rest| rest.split_once('/'))
            .map(|(authority, _)| authority)
            .unwrap();
        let path = url.splitn(4, '/').nth(3).map(|p| format!("/{p}")).unwrap();
        let mut stream = TcpStream::connect(address).unwrap();
        let request = format!(
            "POST {path} HTTP/1.1\r\nHost: {address}\r\nContent-Type: application/json\r\n\
             Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len(),
        );
        stream.write_all(request.as_bytes()).unwrap();
        let mut response = String::new();
        BufReader::new(stream).read_to_string(&mut response).unwrap();
        let status: u16 = response
            .split_whitespace()
            .nth(1)
            .and_then(|s| s.parse().ok())
            .unwrap();
        let body = response
            .split_once("\r\n\r\n")
            .map(|(_, b)| b.to_string())
            .unwrap_or_default();
        (status, body)
    }

    fn chat_request(content: &str) -> String {
        serde_json::json!({
            "model": "m",
            "messages": [
                { "role": "system", "content": "fix" },
                { "role": "user", "content": content },
            ],
        })
        .to_string()
    }

    #[test]
    fn echoes_last_user_message_by_default() {
        let server = MockChatServer::start().unwrap();
        let (status, body) = post(&server.url(), &chat_request("வணக்கம்"));
        assert_eq!(status, 200);
        let value: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(value["choices"][0]["message"]["content"], "வணக்கம்");
        assert_eq!(server.request_count(), 1);
    }

    #[test]
    fn scripted_replies_come_first_then_echo() {
        let server = MockChatServer::start().unwrap();
        server.script([Reply::error(429), Reply::ok_text("fixed")]);

        let (status, _) = post(&server.url(), &chat_request("a"));
        assert_eq!(status, 429);
        let (status, body) = post(&server.url(), &chat_request("b"));
        assert_eq!(status, 200);
        assert!(body.contains("fixed"));
        let (status, body) = post(&server.url(), &chat_request("c"));
        assert_eq!(status, 200);
        assert!(body.contains("\"c\""));
        assert_eq!(server.request_count(), 3);
    }

    #[test]
    fn concurrency_high_water_mark_is_tracked() {
        let server = MockChatServer::start().unwrap();
        server.set_delay(Duration::from_millis(80));
        let url = server.url();
        std::thread::scope(|scope| {
            for _ in 0..4 {
                scope.spawn(|| post(&url, &chat_request("x")));
            }
        });
        assert_eq!(server.request_count(), 4);
        assert!(server.max_concurrency() >= 2, "overlap expected with a delay");
        assert!(server.max_concurrency() <= 4);
    }

    #[test]
    fn request_bodies_are_recorded() {
        let server = MockChatServer::start().unwrap();
        post(&server.url(), &chat_request("நல்ல"));
        let bodies = server.request_bodies();
        assert_eq!(bodies.len(), 1);
        assert!(bodies[0].contains("நல்ல"));
    }

    #[test]
    fn shutdown_is_clean() {
        let server = MockChatServer::start().unwrap();
        post(&server.url(), &chat_request("x"));
        drop(server); // Drop joins the accept thread; reaching here is the test
    }
}
