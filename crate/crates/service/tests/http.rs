use pqbench_core::registry::Registry;
use serde_json::{json, Value};

async fn start() -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(pqbench_service::serve(listener, Registry::builtin()));
    format!("http://{addr}")
}

#[tokio::test]
async fn status_codes_and_bodies() {
    let base = start().await;
    let http = reqwest::Client::new();

    let r = http.get(format!("{base}/health")).send().await.unwrap();
    assert_eq!(r.status(), 200);
    assert_eq!(r.text().await.unwrap(), "ok");

    let r = http.get(format!("{base}/registry/Kyber-768")).send().await.unwrap();
    assert_eq!(r.status(), 200);
    let v: Value = r.json().await.unwrap();
    assert_eq!(v["public_key_bytes"], 1184);

    let r = http.get(format!("{base}/registry/nope")).send().await.unwrap();
    assert_eq!(r.status(), 404);
    let v: Value = r.json().await.unwrap();
    assert_eq!(v["kind"], "not_found");

    let r = http.get(format!("{base}/nist-level/0")).send().await.unwrap();
    assert_eq!(r.status(), 400);

    let r = http
        .post(format!("{base}/security-level"))
        .json(&json!({"class": "discrete_log_pk", "size_bits": 256}))
        .send()
        .await
        .unwrap();
    let v: Value = r.json().await.unwrap();
    assert_eq!((v["classical_bits"].as_u64(), v["postquantum_bits"].as_u64()), (Some(128), Some(0)));

    let r = http
        .post(format!("{base}/bench/kem"))
        .json(&json!({"scheme": "nope"}))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 404);

    let r = http
        .post(format!("{base}/report"))
        .json(&json!({"text": "a | b | c"}))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 400);

    let r = http.post(format!("{base}/tls/measure")).body("{").send().await.unwrap();
    assert!(r.status().is_client_error());
}

#[tokio::test]
async fn concurrent_benchmarks_are_serialized() {
    let base = start().await;
    let http = reqwest::Client::new();
    let body = json!({"scheme": "stub", "interval_seconds": 0.2});
    let start = std::time::Instant::now();
    let (a, b) = tokio::join!(
        http.post(format!("{base}/bench/sig")).json(&body).send(),
        http.post(format!("{base}/bench/sig")).json(&body).send(),
    );
    assert_eq!(a.unwrap().status(), 200);
    assert_eq!(b.unwrap().status(), 200);
    // each request spends at least 3 x 0.2 s timing
    assert!(start.elapsed().as_secs_f64() >= 1.2);
}
