use std::io::{BufRead, BufReader};
use std::process::{Command, Output, Stdio};

use pqbench_core::bench::{parse_text, Operation, CYCLES_KEM_TXT, CYCLES_SIG_TXT};
use pqbench_core::registry::Registry;

fn pqbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqbench"))
        .args(args)
        .env_remove("PQBENCH_REGISTRY")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn assess_saber() {
    let o = pqbench(&["assess", "Saber"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Saber|14|y|n|y|y\n");
}

#[test]
fn unknown_verb_is_usage_error() {
    let o = pqbench(&["bogus-verb"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(pqbench(&["bench-kem"]).status.code(), Some(1));
    assert_eq!(pqbench(&["assess", "Saber", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(pqbench(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_2() {
    let o = pqbench(&["assess", "NoSuchScheme"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert_eq!(pqbench(&["bench-kem", "--scheme", "nope"]).status.code(), Some(2));
    assert_eq!(pqbench(&["report", "--in", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(pqbench(&["assess", "Saber", "--server", "http://127.0.0.1:1"]).status.code(), Some(2));
}

#[test]
fn bench_kem_emits_three_records() {
    let o = pqbench(&["bench-kem", "--scheme", "lwe-toy", "--interval", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = parse_text(&stdout(&o)).unwrap();
    let ops: Vec<Operation> = report.records.iter().map(|r| r.operation).collect();
    assert_eq!(ops, [Operation::Keygen, Operation::Encaps, Operation::Decaps]);
    assert!(report.records.iter().all(|r| r.scheme == "lwe-toy" && r.stats.n >= 30));
}

#[test]
fn bench_sig_csv() {
    let o = pqbench(&["bench-sig", "--scheme", "stub", "--interval", "0.1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "scheme,operation,n,mean_us,stddev_us");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("stub,keypair,"));
}

#[test]
fn report_fixture_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text, rows) in [("kem.txt", CYCLES_KEM_TXT, 31), ("sig.txt", CYCLES_SIG_TXT, 53)] {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let o = pqbench(&["report", "--in", path.to_str().unwrap(), "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).lines().count(), rows + 1, "{name}");
    }
}

#[test]
fn tls_measure_is_seed_deterministic_in_bytes() {
    let run = |seed: &str| {
        let o = pqbench(&["tls-measure", "--suite", "Kyber-768+Dilithium IV", "--iterations", "5", "--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
        let r = parse_text(&stdout(&o)).unwrap().records.remove(0);
        assert_eq!(r.operation, Operation::Handshake);
        assert_eq!(r.stats.n, 5);
        r.bytes.unwrap()
    };
    assert_eq!(run("4"), run("4"));
    let saber = pqbench(&["tls-measure", "--suite", "SABER-KEM+Dilithium IV", "--iterations", "2"]);
    let kyber = pqbench(&["tls-measure", "--suite", "Kyber-768+Dilithium IV", "--iterations", "2"]);
    let total = |o: &Output| {
        let b = parse_text(&stdout(o)).unwrap().records[0].bytes.unwrap();
        b.read + b.write
    };
    // both KEM names are nine characters, so the labels cost the same
    assert_eq!(total(&kyber) - total(&saber), 192);
}

#[test]
fn registry_override_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let mut reg = Registry::builtin();
    reg.assessments.retain(|a| a.name != "Saber");
    reg.write_dir(dir.path()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pqbench"))
        .args(["assess", "Saber"])
        .env("PQBENCH_REGISTRY", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_pqbench"))
        .args(["assess", "Kyber"])
        .env("PQBENCH_REGISTRY", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tls_serve_and_client_over_tcp() {
    let mut server = Command::new(env!("CARGO_BIN_EXE_pqbench"))
        .args(["tls-serve", "--listen", "127.0.0.1:0", "--suite", "lwe-toy+fs-dlog", "--max-connections", "3", "--seed", "5"])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(server.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server exited before listening").unwrap();
        if let Some(rest) = line.split("addr=").nth(1) {
            break rest.split_whitespace().next().unwrap().to_string();
        }
    };
    let o = pqbench(&["tls-client", "--connect", &addr, "--suite", "lwe-toy+fs-dlog", "--iterations", "3", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_text(&stdout(&o)).unwrap().records.remove(0);
    assert_eq!(r.stats.n, 3);
    std::thread::spawn(move || lines.for_each(drop));
    assert!(server.wait().unwrap().success());
}

#[test]
fn tls_client_with_wrong_seed_fails_certificate_check() {
    let mut server = Command::new(env!("CARGO_BIN_EXE_pqbench"))
        .args(["tls-serve", "--listen", "127.0.0.1:0", "--suite", "stub+stub", "--max-connections", "1", "--seed", "5"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(server.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().unwrap().unwrap();
        if let Some(rest) = line.split("addr=").nth(1) {
            break rest.split_whitespace().next().unwrap().to_string();
        }
    };
    let o = pqbench(&["tls-client", "--connect", &addr, "--suite", "stub+stub", "--seed", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("certificate"));
    std::thread::spawn(move || lines.for_each(drop));
    assert_eq!(server.wait().unwrap().code(), Some(2));
}

#[test]
fn remote_mode_matches_local() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    rt.spawn(pqbench_service::serve(listener, Registry::builtin()));

    let local = pqbench(&["assess", "Saber"]);
    let remote = pqbench(&["assess", "Saber", "--server", &url]);
    assert_eq!(stdout(&local), stdout(&remote));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kem.txt");
    std::fs::write(&path, CYCLES_KEM_TXT).unwrap();
    let args = ["report", "--in", path.to_str().unwrap(), "--format", "csv"];
    let remote_args: Vec<&str> = args.iter().copied().chain(["--server", &url]).collect();
    assert_eq!(stdout(&pqbench(&args)), stdout(&pqbench(&remote_args)));

    let o = pqbench(&["bench-kem", "--scheme", "stub", "--interval", "0.05", "--server", &url]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(parse_text(&stdout(&o)).unwrap().records.len(), 3);

    let o = pqbench(&["tls-serve", "--suite", "stub+stub", "--server", &url]);
    assert_eq!(o.status.code(), Some(1));
}
