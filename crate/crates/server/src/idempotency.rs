//! Replay of mutating requests that carry the same `x-request-id`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use axum::body::{to_bytes, Body, Bytes};
use axum::extract::{Request, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::middleware::Next;
use axum::response::{IntoResponse, Response};

use crate::error::ApiError;
use crate::state::AppState;

pub const REQUEST_ID: &str = "x-request-id";
const MAX_BODY: usize = 64 * 1024 * 1024;

#[derive(Clone)]
pub struct Stored {
    status: StatusCode,
    content_type: Option<HeaderValue>,
    disposition: Option<HeaderValue>,
    body: Bytes,
}

/// Bounded FIFO of finished responses keyed by method, path and request id.
pub struct ReplayCache {
    capacity: usize,
    order: VecDeque<String>,
    entries: HashMap<String, Stored>,
}

impl ReplayCache {
    pub fn new(capacity: usize) -> ReplayCache {
        ReplayCache { capacity, order: VecDeque::new(), entries: HashMap::new() }
    }

    fn get(&self, key: &str) -> Option<Stored> {
        self.entries.get(key).cloned()
    }

    fn put(&mut self, key: String, value: Stored) {
        if self.entries.insert(key.clone(), value).is_none() {
            self.order.push_back(key);
        }
        while self.order.len() > self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.entries.remove(&old);
            }
        }
    }
}

fn rebuild(stored: Stored) -> Response {
    let mut resp = Response::new(Body::from(stored.body));
    *resp.status_mut() = stored.status;
    if let Some(ct) = stored.content_type {
        resp.headers_mut().insert("content-type", ct);
    }
    if let Some(cd) = stored.disposition {
        resp.headers_mut().insert("content-disposition", cd);
    }
    resp.headers_mut().insert("x-idempotent-replay", HeaderValue::from_static("true"));
    resp
}

/// Answers a repeated mutating request from the cache instead of running
/// it again. Server errors are not cached so that a retry can succeed.
pub async fn replay(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let mutating = matches!(*req.method(), Method::POST | Method::PUT | Method::PATCH | Method::DELETE);
    let id = req.headers().get(REQUEST_ID).and_then(|v| v.to_str().ok()).map(str::to_string);
    let (true, Some(id)) = (mutating, id) else {
        return next.run(req).await;
    };
    let key = format!("{} {} {}", req.method(), req.uri(), id);
    if let Some(hit) = state.replay.lock().unwrap().get(&key) {
        return rebuild(hit);
    }
    let resp = next.run(req).await;
    let (parts, body) = resp.into_parts();
    let bytes = match to_bytes(body, MAX_BODY).await {
        Ok(b) => b,
        Err(e) => return ApiError::internal(format!("buffering response: {e}")).into_response(),
    };
    let stored = Stored {
        status: parts.status,
        content_type: parts.headers.get("content-type").cloned(),
        disposition: parts.headers.get("content-disposition").cloned(),
        body: bytes.clone(),
    };
    if !parts.status.is_server_error() {
        state.replay.lock().unwrap().put(key, stored);
    }
    Response::from_parts(parts, Body::from(bytes))
}
