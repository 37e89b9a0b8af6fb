mod common;

use circos_core::config::{CircosConfig, Ring, TrackKind};
use common::{TestServer, KARYOTYPE};
use proptest::prelude::*;
use reqwest::Method;

#[derive(Debug, Clone)]
enum Op {
    PutConfig(CircosConfig),
    Import(String, CircosConfig),
    Upload,
    DeleteData(usize),
}

fn config() -> impl Strategy<Value = CircosConfig> {
    let kind = (0..TrackKind::ALL.len()).prop_map(|i| TrackKind::ALL[i]);
    prop::collection::vec(prop::collection::vec(kind, 1..=2), 1..=4)
        .prop_map(|rings| CircosConfig::new(rings.into_iter().map(|r| Ring::new(r).unwrap()).collect()))
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        config().prop_map(Op::PutConfig),
        ("[a-z]{1,4}", config()).prop_map(|(id, c)| Op::Import(id, c)),
        Just(Op::Upload),
        (1usize..4).prop_map(Op::DeleteData),
    ]
}

fn request(srv: &TestServer, op: &Op, rid: &str) -> reqwest::RequestBuilder {
    let req = match op {
        Op::PutConfig(c) => srv.client.put(srv.url("/api/session/p/config")).body(c.to_bare_string()),
        Op::Import(id, c) => srv
            .client
            .post(srv.url("/api/corpus/import"))
            .body(format!("{{\"id\":\"{id}\",\"annotation\":\"{id}\",\"config\":\"{}\"}}\n", c.to_bare_string())),
        Op::Upload => srv
            .client
            .post(srv.url("/api/data?sessionId=p&kind=karyotype"))
            .header("content-type", "text/csv")
            .body(KARYOTYPE),
        Op::DeleteData(n) => srv.client.delete(srv.url(&format!("/api/data/ds{n}?sessionId=p"))),
    };
    req.header("x-request-id", rid)
}

async fn snapshot(srv: &TestServer) -> (serde_json::Value, u64) {
    let (_, session) = srv.json(Method::GET, "/api/session/p", None).await;
    (session, srv.state.corpus().corpus.version())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn retried_mutations_are_replayed(ops in prop::collection::vec(op(), 1..8)) {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async {
            let (srv, _dir) = TestServer::temp().await;
            for (i, op) in ops.iter().enumerate() {
                let rid = format!("req-{i}");
                let first = request(&srv, op, &rid).send().await.unwrap();
                let (status, body) = (first.status(), first.text().await.unwrap());
                let before = snapshot(&srv).await;
                let again = request(&srv, op, &rid).send().await.unwrap();
                assert_eq!(again.status(), status);
                assert_eq!(again.headers()["x-idempotent-replay"], "true");
                assert_eq!(again.text().await.unwrap(), body);
                assert_eq!(snapshot(&srv).await, before, "{op:?} ran twice");
            }
            srv.stop().await;
        });
    }

    #[test]
    fn failures_always_use_the_envelope(
        path in "/api/[a-z/{}%0-9.]{0,24}",
        body in "[ -~]{0,40}",
        method in prop::sample::select(vec![Method::GET, Method::POST, Method::PUT, Method::PATCH, Method::DELETE]),
    ) {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async {
            let (srv, _dir) = TestServer::temp().await;
            let resp = srv
                .client
                .request(method, srv.url(&path))
                .header("content-type", "application/json")
                .body(body)
                .send()
                .await
                .unwrap();
            let status = resp.status();
            let ct = resp.headers().get("content-type").map(|v| v.to_str().unwrap().to_string());
            let text = resp.text().await.unwrap();
            assert!(!status.is_server_error(), "{status} {text}");
            if !status.is_success() {
                assert_eq!(ct.as_deref(), Some("application/json"), "{status} {text}");
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                assert!(v["code"].is_string() && v["message"].is_string(), "{text}");
                assert!(v.as_object().unwrap().keys().all(|k| ["code", "message", "detail"].contains(&k.as_str())));
            }
            srv.stop().await;
        });
    }
}
