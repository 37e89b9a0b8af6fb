//! A live server on an ephemeral port, plus a JSON client.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use circos_server::{bind, build_state, serve_on, AppState, ServerConfig};
use reqwest::{Client, Method, Response};
use serde_json::Value;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub const CORPUS: &str = concat!(
    r#"{"id":"c1","annotation":"genome-wide methylation heatmap with links","config":"<ideogram><split><heatmap><split><chord>"}"#,
    "\n",
    r#"{"id":"c2","annotation":"copy number histogram and structural variants","config":"<ideogram><split><histogram><split><chord>"}"#,
    "\n",
    r#"{"id":"c3","annotation":"gene density tiles and expression line","config":"<ideogram><split><tile><split><line>"}"#,
    "\n",
    r#"{"id":"c4","annotation":"conservation scatter with highlights","config":"<ideogram><split><scatter><highlight><split><chord>"}"#,
    "\n",
);

pub const KARYOTYPE: &str = "id,label,length,color\nhs1,chr1,1000,\nhs2,chr2,600,\n";
pub const SIGNAL: &str = "block,start,end,value\nhs1,0,200,3\nhs1,150,400,7\nhs2,0,300,1\n";
pub const LINKS: &str = "src_block,src_start,src_end,dst_block,dst_start,dst_end,value\nhs1,0,100,hs2,0,100,1\n";

pub struct TestServer {
    pub base: String,
    pub client: Client,
    pub state: Arc<AppState>,
    stop: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<std::io::Result<()>>>,
}

pub fn config_in(dir: &std::path::Path) -> ServerConfig {
    ServerConfig {
        port: 0,
        corpus_path: Some(dir.join("corpus.jsonl")),
        session_dir: Some(dir.join("sessions")),
        ..ServerConfig::default()
    }
}

impl TestServer {
    pub async fn start(config: ServerConfig) -> TestServer {
        let state = build_state(&config).expect("state");
        let listener = bind(&config.host, 0).await.expect("bind");
        let addr = listener.local_addr().unwrap();
        let (stop, rx) = oneshot::channel();
        let task = tokio::spawn(serve_on(listener, state.clone(), async {
            let _ = rx.await;
        }));
        TestServer { base: format!("http://{addr}"), client: Client::new(), state, stop: Some(stop), task: Some(task) }
    }

    pub async fn temp() -> (TestServer, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        (TestServer::start(config_in(dir.path())).await, dir)
    }

    /// Stops the server and waits for the session flush.
    pub async fn stop(mut self) {
        let _ = self.stop.take().unwrap().send(());
        self.task.take().unwrap().await.unwrap().unwrap();
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub async fn send(&self, method: Method, path: &str, body: Option<Value>) -> Response {
        let mut req = self.client.request(method, self.url(path));
        if let Some(b) = body {
            req = req.json(&b);
        }
        req.send().await.expect("request")
    }

    pub async fn json(&self, method: Method, path: &str, body: Option<Value>) -> (u16, Value) {
        let resp = self.send(method, path, body).await;
        let status = resp.status().as_u16();
        let text = resp.text().await.unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    pub async fn raw(&self, method: Method, path: &str, content_type: &str, body: &str) -> (u16, Value) {
        let resp = self
            .client
            .request(method, self.url(path))
            .header("content-type", content_type)
            .body(body.to_string())
            .send()
            .await
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.json().await.unwrap_or(Value::Null))
    }

    pub async fn import(&self, jsonl: &str) -> Value {
        let (status, body) = self.raw(Method::POST, "/api/corpus/import", "application/x-ndjson", jsonl).await;
        assert_eq!(status, 200, "{body}");
        body
    }

    pub async fn upload(&self, session: &str, kind: &str, csv: &str) -> (u16, Value) {
        self.raw(Method::POST, &format!("/api/data?sessionId={session}&kind={kind}"), "text/csv", csv).await
    }
}

pub fn sessions_dir(dir: &std::path::Path) -> PathBuf {
    dir.join("sessions")
}
