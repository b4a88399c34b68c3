use std::fmt;
use std::net::TcpListener;
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::transport::{MemoryTransport, Transport};
use super::{
    decode_message, derive_keys, encode_message, finished_mac, Certificate, HandshakeMessage,
    MessageKind, SuiteConfig, TlsError, CERT_VERIFY_CONTEXT,
};
use crate::bench::{BenchRecord, BenchStats, ByteCounts, Clock, Operation};
use crate::kex::SigScheme;

pub const DEFAULT_ITERATIONS: u32 = 50;

/// The pinned issuer key a client trusts.
#[derive(Clone)]
pub struct TrustAnchor {
    pub scheme: Arc<dyn SigScheme>,
    pub public: Vec<u8>,
}

impl fmt::Debug for TrustAnchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrustAnchor")
            .field("scheme", &self.scheme.name())
            .field("public_len", &self.public.len())
            .finish()
    }
}

pub struct Issuer {
    scheme: Arc<dyn SigScheme>,
    public: Vec<u8>,
    secret: Vec<u8>,
}

impl Issuer {
    pub fn generate(scheme: Arc<dyn SigScheme>, rng: &mut dyn RngCore) -> Result<Self, TlsError> {
        let (public, secret) = scheme.keypair(rng)?;
        Ok(Issuer { scheme, public, secret })
    }

    pub fn anchor(&self) -> TrustAnchor {
        TrustAnchor {
            scheme: self.scheme.clone(),
            public: self.public.clone(),
        }
    }

    pub fn issue(
        &self,
        subject: &str,
        sig_scheme: &str,
        key: &[u8],
        rng: &mut dyn RngCore,
    ) -> Result<Certificate, TlsError> {
        let body = Certificate::signed_bytes(subject, sig_scheme, key);
        Ok(Certificate {
            subject: subject.to_string(),
            sig_scheme: sig_scheme.to_string(),
            subject_public_key: key.to_vec(),
            issuer_signature: self.scheme.sign(&self.secret, &body, rng)?,
        })
    }
}

/// A suite the server accepts together with its certificate and signing key.
#[derive(Debug, Clone)]
pub struct ServerSuite {
    pub suite: SuiteConfig,
    pub cert: Certificate,
    signing_key: Vec<u8>,
}

impl ServerSuite {
    pub fn generate(suite: SuiteConfig, subject: &str, issuer: &Issuer, rng: &mut dyn RngCore) -> Result<Self, TlsError> {
        let (pk, sk) = suite.sig.keypair(rng)?;
        let cert = issuer.issue(subject, suite.sig.name(), &pk, rng)?;
        Ok(ServerSuite {
            suite,
            cert,
            signing_key: sk,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub suites: Vec<ServerSuite>,
    /// Sent verbatim as the EncryptedExtensions payload.
    pub extensions: Vec<u8>,
}

impl ServerConfig {
    pub fn generate(
        suites: Vec<SuiteConfig>,
        subject: &str,
        issuer: &Issuer,
        rng: &mut dyn RngCore,
    ) -> Result<Self, TlsError> {
        let suites = suites
            .into_iter()
            .map(|s| ServerSuite::generate(s, subject, issuer, rng))
            .collect::<Result<_, _>>()?;
        Ok(ServerConfig {
            suites,
            extensions: Vec::new(),
        })
    }
}

/// Suites in preference order; the key share is made with the first one.
#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub suites: Vec<SuiteConfig>,
    pub trust: TrustAnchor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageSize {
    pub kind: MessageKind,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientOutcome {
    pub suite: String,
    pub messages: Vec<MessageSize>,
    pub read_bytes: u64,
    pub write_bytes: u64,
    pub key_digest: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerOutcome {
    pub suite: String,
    pub key_digest: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandshakeTranscript {
    pub suite: String,
    pub messages: Vec<MessageSize>,
    pub client_read_bytes: u64,
    pub client_write_bytes: u64,
    pub wall_time_us: f64,
    pub client_key_digest: Vec<u8>,
    pub server_key_digest: Vec<u8>,
}

impl HandshakeTranscript {
    pub fn total_bytes(&self) -> u64 {
        self.client_read_bytes + self.client_write_bytes
    }
}

/// Frames seen so far, in order, and their sizes.
#[derive(Default)]
struct Transcript {
    bytes: Vec<u8>,
    sizes: Vec<MessageSize>,
}

impl Transcript {
    fn push(&mut self, kind: MessageKind, frame: &[u8]) {
        self.bytes.extend_from_slice(frame);
        self.sizes.push(MessageSize {
            kind,
            bytes: frame.len() as u64,
        });
    }
}

fn recv_message(t: &mut dyn Transport, expected: MessageKind) -> Result<(HandshakeMessage, Vec<u8>), TlsError> {
    let frame = t.recv()?.ok_or(TlsError::PeerClosed)?;
    let msg = decode_message(&frame)?;
    if msg.kind() != expected {
        return Err(TlsError::UnexpectedMessage {
            expected,
            received: msg.kind(),
        });
    }
    Ok((msg, frame))
}

fn cert_verify_input(transcript: &[u8], suite: &SuiteConfig) -> Vec<u8> {
    let mut input = CERT_VERIFY_CONTEXT.to_vec();
    input.extend(suite.hash.hash(transcript));
    input
}

pub fn client_handshake(
    cfg: &ClientConfig,
    transport: &mut dyn Transport,
    rng: &mut dyn RngCore,
) -> Result<ClientOutcome, TlsError> {
    let offered: Vec<String> = cfg.suites.iter().map(|s| s.label.clone()).collect();
    let first = cfg
        .suites
        .first()
        .ok_or_else(|| TlsError::NegotiationFailure(Vec::new()))?;
    let (pk, sk) = first.kem.keypair(rng)?;
    let mut tr = Transcript::default();

    let ch = encode_message(&HandshakeMessage::ClientHello {
        offered_suites: offered.clone(),
        kem_public: pk,
    });
    transport.send(&ch)?;
    tr.push(MessageKind::ClientHello, &ch);

    // the server closes without answering when nothing matches
    let Some(frame) = transport.recv()? else {
        return Err(TlsError::NegotiationFailure(offered));
    };
    let msg = decode_message(&frame)?;
    let HandshakeMessage::ServerHello { chosen_suite, kem_ciphertext } = msg else {
        return Err(TlsError::UnexpectedMessage {
            expected: MessageKind::ServerHello,
            received: msg.kind(),
        });
    };
    let suite = cfg
        .suites
        .iter()
        .find(|s| s.label == chosen_suite && s.kem.name() == first.kem.name())
        .ok_or_else(|| TlsError::NegotiationFailure(offered.clone()))?;
    tr.push(MessageKind::ServerHello, &frame);
    let h = suite.hash.as_ref();
    let ss = suite
        .kem
        .decaps(&sk, &kem_ciphertext)
        .map_err(|e| TlsError::DecapsFailure(e.to_string()))?;
    let keys = derive_keys(&ss, &h.hash(&tr.bytes), h);

    let (_, frame) = recv_message(transport, MessageKind::EncryptedExtensions)?;
    tr.push(MessageKind::EncryptedExtensions, &frame);

    let (msg, frame) = recv_message(transport, MessageKind::Certificate)?;
    let HandshakeMessage::Certificate { cert } = msg else { unreachable!() };
    if cert.sig_scheme != suite.sig.name() {
        return Err(TlsError::CertVerifyFailure(format!(
            "certificate is for {}, suite uses {}",
            cert.sig_scheme,
            suite.sig.name()
        )));
    }
    if !cert.verify(&cfg.trust) {
        return Err(TlsError::CertVerifyFailure("issuer signature does not verify".into()));
    }
    tr.push(MessageKind::Certificate, &frame);

    let (msg, frame) = recv_message(transport, MessageKind::CertificateVerify)?;
    let HandshakeMessage::CertificateVerify { signature } = msg else { unreachable!() };
    if !suite
        .sig
        .verify(&cert.subject_public_key, &cert_verify_input(&tr.bytes, suite), &signature)
    {
        return Err(TlsError::CertVerifyFailure("CertificateVerify signature does not verify".into()));
    }
    tr.push(MessageKind::CertificateVerify, &frame);

    let (msg, frame) = recv_message(transport, MessageKind::FinishedServer)?;
    let HandshakeMessage::FinishedServer { mac } = msg else { unreachable!() };
    if mac != finished_mac(&keys.server_finished, &tr.bytes, h) {
        return Err(TlsError::MacMismatch);
    }
    tr.push(MessageKind::FinishedServer, &frame);

    let fin = encode_message(&HandshakeMessage::FinishedClient {
        mac: finished_mac(&keys.client_finished, &tr.bytes, h),
    });
    transport.send(&fin)?;
    tr.push(MessageKind::FinishedClient, &fin);

    let (write, read) = tr.sizes.iter().fold((0, 0), |(w, r), m| {
        if m.kind.from_client() {
            (w + m.bytes, r)
        } else {
            (w, r + m.bytes)
        }
    });
    Ok(ClientOutcome {
        suite: suite.label.clone(),
        messages: tr.sizes,
        read_bytes: read,
        write_bytes: write,
        key_digest: keys.digest(h),
    })
}

/// Server state after its flight has been built, waiting for the client Finished.
pub struct PendingServer {
    suite: String,
    client_finished: Vec<u8>,
    key_digest: Vec<u8>,
}

/// Answers a ClientHello frame with ServerHello through FinishedServer.
/// Returns `NegotiationFailure` when no offered suite is supported.
pub fn server_flight(
    cfg: &ServerConfig,
    client_hello: &[u8],
    rng: &mut dyn RngCore,
) -> Result<(Vec<Vec<u8>>, PendingServer), TlsError> {
    let msg = decode_message(client_hello)?;
    let HandshakeMessage::ClientHello { offered_suites, kem_public } = msg else {
        return Err(TlsError::UnexpectedMessage {
            expected: MessageKind::ClientHello,
            received: msg.kind(),
        });
    };
    let chosen = offered_suites
        .iter()
        .find_map(|label| cfg.suites.iter().find(|s| &s.suite.label == label))
        .ok_or_else(|| TlsError::NegotiationFailure(offered_suites.clone()))?;
    let suite = &chosen.suite;
    let h = suite.hash.as_ref();
    let (ct, ss) = suite.kem.encaps(&kem_public, rng)?;

    let mut transcript = client_hello.to_vec();
    let mut frames = Vec::new();
    let mut emit = |m: HandshakeMessage, transcript: &mut Vec<u8>| {
        let f = encode_message(&m);
        transcript.extend_from_slice(&f);
        frames.push(f);
    };
    emit(
        HandshakeMessage::ServerHello {
            chosen_suite: suite.label.clone(),
            kem_ciphertext: ct,
        },
        &mut transcript,
    );
    let keys = derive_keys(&ss, &h.hash(&transcript), h);
    emit(
        HandshakeMessage::EncryptedExtensions {
            payload: cfg.extensions.clone(),
        },
        &mut transcript,
    );
    emit(
        HandshakeMessage::Certificate {
            cert: chosen.cert.clone(),
        },
        &mut transcript,
    );
    let signature = suite
        .sig
        .sign(&chosen.signing_key, &cert_verify_input(&transcript, suite), rng)?;
    emit(HandshakeMessage::CertificateVerify { signature }, &mut transcript);
    let mac = finished_mac(&keys.server_finished, &transcript, h);
    emit(HandshakeMessage::FinishedServer { mac }, &mut transcript);

    Ok((
        frames,
        PendingServer {
            suite: suite.label.clone(),
            client_finished: finished_mac(&keys.client_finished, &transcript, h),
            key_digest: keys.digest(h),
        },
    ))
}

impl PendingServer {
    pub fn finish(self, client_finished_frame: &[u8]) -> Result<ServerOutcome, TlsError> {
        let msg = decode_message(client_finished_frame)?;
        let HandshakeMessage::FinishedClient { mac } = msg else {
            return Err(TlsError::UnexpectedMessage {
                expected: MessageKind::FinishedClient,
                received: msg.kind(),
            });
        };
        if mac != self.client_finished {
            return Err(TlsError::MacMismatch);
        }
        Ok(ServerOutcome {
            suite: self.suite,
            key_digest: self.key_digest,
        })
    }
}

/// Runs the server side of one handshake.
pub fn serve_connection(
    cfg: &ServerConfig,
    transport: &mut dyn Transport,
    rng: &mut dyn RngCore,
) -> Result<ServerOutcome, TlsError> {
    let ch = transport.recv()?.ok_or(TlsError::PeerClosed)?;
    let (frames, pending) = server_flight(cfg, &ch, rng)?;
    for f in &frames {
        transport.send(f)?;
    }
    let fin = transport.recv()?.ok_or(TlsError::PeerClosed)?;
    pending.finish(&fin)
}

/// Client and server over an in-memory channel, the server on its own thread.
pub fn run_handshake(
    client: &ClientConfig,
    server: &ServerConfig,
    rng: &mut dyn RngCore,
) -> Result<HandshakeTranscript, TlsError> {
    let mut server_rng = ChaCha20Rng::seed_from_u64(rng.next_u64());
    let (mut c, mut s) = MemoryTransport::pair();
    thread::scope(|scope| {
        let handle = scope.spawn(move || serve_connection(server, &mut s, &mut server_rng));
        let start = Instant::now();
        let out = client_handshake(client, &mut c, rng);
        let wall_time_us = start.elapsed().as_nanos() as f64 / 1e3;
        drop(c);
        let server_out = handle.join().expect("server thread panicked");
        let out = out?;
        let server_out = server_out?;
        Ok(HandshakeTranscript {
            suite: out.suite,
            messages: out.messages,
            client_read_bytes: out.read_bytes,
            client_write_bytes: out.write_bytes,
            wall_time_us,
            client_key_digest: out.key_digest,
            server_key_digest: server_out.key_digest,
        })
    })
}

/// A client-side transport, plus the server thread when it runs in-process.
pub struct Connection {
    pub transport: Box<dyn Transport>,
    pub server: Option<JoinHandle<Result<ServerOutcome, TlsError>>>,
}

/// Each call opens an in-memory channel and serves it on a new thread.
pub fn memory_connector(server: Arc<ServerConfig>, seed: u64) -> impl FnMut() -> Result<Connection, TlsError> {
    let mut count = 0u64;
    move || {
        let (c, mut s) = MemoryTransport::pair();
        let cfg = server.clone();
        let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(count));
        count += 1;
        let handle = thread::spawn(move || serve_connection(&cfg, &mut s, &mut rng));
        Ok(Connection {
            transport: Box::new(c),
            server: Some(handle),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub suite: String,
    pub iterations: u32,
    pub stats: BenchStats,
    pub bytes: ByteCounts,
    pub messages: Vec<MessageSize>,
}

impl Measurement {
    pub fn to_record(&self) -> BenchRecord {
        let mut r = BenchRecord::new(&self.suite, Operation::Handshake, self.stats);
        r.bytes = Some(self.bytes);
        r
    }
}

/// Runs `iterations` handshakes one after another and reports client-side
/// timing. Byte counts must not change between iterations, and in-process
/// servers must derive the client's keys.
pub fn measure_handshake(
    client: &ClientConfig,
    connect: &mut dyn FnMut() -> Result<Connection, TlsError>,
    iterations: u32,
    clock: &dyn Clock,
    rng: &mut dyn RngCore,
) -> Result<Measurement, TlsError> {
    assert!(iterations >= 1, "iterations must be at least 1");
    let abort = |completed: u32, e: TlsError| TlsError::MeasurementAborted {
        completed,
        source: Box::new(e),
    };
    let mut durations = Vec::with_capacity(iterations as usize);
    let mut first: Option<ClientOutcome> = None;
    let start = clock.now_ns();
    for i in 0..iterations {
        let mut conn = connect().map_err(|e| abort(i, e))?;
        let t0 = clock.now_ns();
        let out = client_handshake(client, conn.transport.as_mut(), rng);
        let t1 = clock.now_ns();
        drop(conn.transport);
        let server = conn.server.map(|h| h.join().expect("server thread panicked"));
        let out = out.map_err(|e| abort(i, e))?;
        if let Some(server) = server {
            let server = server.map_err(|e| abort(i, e))?;
            if server.key_digest != out.key_digest {
                return Err(abort(i, TlsError::KeyMismatch));
            }
        }
        match &first {
            None => first = Some(out),
            Some(f) if f.messages != out.messages => {
                return Err(abort(
                    i,
                    TlsError::ByteCountDrift(format!("{:?} then {:?}", f.messages, out.messages)),
                ))
            }
            Some(_) => {}
        }
        durations.push(t1 - t0);
    }
    let first = first.expect("at least one iteration");
    let stats = BenchStats::from_durations(&durations, clock.now_ns() - start).expect("iterations >= 1");
    Ok(Measurement {
        suite: first.suite,
        iterations,
        stats,
        bytes: ByteCounts {
            read: first.read_bytes,
            write: first.write_bytes,
        },
        messages: first.messages,
    })
}

/// Accepts connections and serves each on its own thread. With a limit, stops
/// accepting after that many and returns each connection's result.
pub fn serve_tcp(
    listener: TcpListener,
    cfg: Arc<ServerConfig>,
    max_connections: Option<usize>,
    seed: u64,
) -> Result<Vec<Result<ServerOutcome, TlsError>>, TlsError> {
    let mut handles = Vec::new();
    for (i, stream) in listener.incoming().enumerate() {
        if max_connections.is_some_and(|m| i >= m) {
            break;
        }
        let stream = stream?;
        let cfg = cfg.clone();
        let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(i as u64));
        handles.push(thread::spawn(move || {
            let mut t = super::TcpTransport::from_stream(stream);
            serve_connection(&cfg, &mut t, &mut rng)
        }));
        if max_connections.is_some_and(|m| i + 1 >= m) {
            break;
        }
    }
    Ok(handles
        .into_iter()
        .map(|h| h.join().expect("connection thread panicked"))
        .collect())
}
