use pqbench_client::{Client, ClientError};
use pqbench_core::api::{self, BenchRequest, ErrorKind, OutputFormat, ReportRequest, SecurityLevelRequest, TlsMeasureRequest};
use pqbench_core::bench::{Operation, CYCLES_SIG_TXT};
use pqbench_core::registry::{AlgoClassKind, Registry};

async fn start() -> Client {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(pqbench_service::serve(listener, Registry::builtin()));
    let c = Client::new(&format!("http://{addr}"));
    c.health().await.unwrap();
    c
}

#[tokio::test]
async fn lookups_match_in_process() {
    let c = start().await;
    let reg = Registry::builtin();
    assert_eq!(c.schemes().await.unwrap(), api::schemes(&reg));
    assert_eq!(c.assess("Saber").await.unwrap().emit(), "Saber|14|y|n|y|y");
    assert_eq!(c.registry_entry("Dilithium IV").await.unwrap().payload_bytes, 3366);
    let lvl = c
        .security_level(&SecurityLevelRequest {
            class: AlgoClassKind::Hash,
            size_bits: 512,
        })
        .await
        .unwrap();
    assert_eq!((lvl.classical_bits, lvl.postquantum_bits), (256, 170));
    assert_eq!(c.nist_level(3).await.unwrap(), api::nist_level(3).unwrap());
}

#[tokio::test]
async fn errors_carry_kind() {
    let c = start().await;
    let err = c.assess("Unknown").await.unwrap_err();
    assert!(matches!(err, ClientError::Api(ref e) if e.kind == ErrorKind::NotFound), "{err}");
    let err = c.nist_level(7).await.unwrap_err();
    assert!(matches!(err, ClientError::Api(ref e) if e.kind == ErrorKind::BadRequest), "{err}");
    let mut req = BenchRequest::new("stub");
    req.min_samples = Some(0);
    let err = c.bench_kem(&req).await.unwrap_err();
    assert!(matches!(err, ClientError::Api(ref e) if e.kind == ErrorKind::BadRequest), "{err}");
}

#[tokio::test]
async fn unreachable_service() {
    let c = Client::new("http://127.0.0.1:1");
    assert!(matches!(c.health().await, Err(ClientError::Http(_))));
}

#[tokio::test]
async fn bench_and_measure() {
    let c = start().await;
    let mut req = BenchRequest::new("stub");
    req.interval_seconds = Some(0.05);
    let recs = c.bench_kem(&req).await.unwrap();
    let ops: Vec<Operation> = recs.iter().map(|r| r.operation).collect();
    assert_eq!(ops, [Operation::Keygen, Operation::Encaps, Operation::Decaps]);
    let recs = c.bench_sig(&req).await.unwrap();
    assert_eq!(recs.len(), 3);

    let req = TlsMeasureRequest {
        suite: "SABER-KEM+Dilithium IV".into(),
        iterations: Some(5),
        seed: Some(3),
    };
    let remote = c.tls_measure(&req).await.unwrap();
    let local = api::tls_measure(&Registry::builtin(), &req).unwrap();
    assert_eq!(remote.messages, local.messages);
    assert_eq!(remote.record.bytes, local.record.bytes);
    assert_eq!(remote.record.stats.n, 5);
}

#[tokio::test]
async fn report_over_http() {
    let c = start().await;
    let out = c
        .report(&ReportRequest {
            text: CYCLES_SIG_TXT.into(),
            format: OutputFormat::Csv,
        })
        .await
        .unwrap();
    assert_eq!(out.output.lines().count(), 54);
}
