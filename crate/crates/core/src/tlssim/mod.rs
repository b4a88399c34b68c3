//! A TLS 1.3-shaped handshake between a client and a server with pluggable
//! KEM and signature suites. Every message is framed and counted so the
//! byte cost of each suite can be compared exactly.

mod handshake;
mod transport;

pub use handshake::{
    client_handshake, measure_handshake, memory_connector, run_handshake, serve_connection,
    serve_tcp, server_flight, ClientConfig, PendingServer, ClientOutcome, Connection, HandshakeTranscript,
    Issuer, Measurement, MessageSize, ServerConfig, ServerOutcome, ServerSuite, TrustAnchor,
    DEFAULT_ITERATIONS,
};
pub use transport::{ClockedTransport, MemoryTransport, TcpTransport, Transport};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::hash::{HashFunction, MixHash};
use crate::kex::{kem_by_name, sig_by_name, Kem, KexError, SigScheme, StubKem, StubSig};
use crate::registry::{Registry, SchemeKind};
use crate::wire::{self, Reader, WireError};

/// Largest frame payload accepted from a peer.
pub const MAX_FRAME_LEN: usize = 16 << 20;

pub const FRAME_HEADER_LEN: usize = 5;

#[derive(Debug, Error)]
pub enum TlsError {
    #[error("no common suite among {0:?}")]
    NegotiationFailure(Vec<String>),
    #[error("certificate verification failed: {0}")]
    CertVerifyFailure(String),
    #[error("finished MAC mismatch")]
    MacMismatch,
    #[error("decapsulation failed: {0}")]
    DecapsFailure(String),
    #[error("key exchange error: {0}")]
    Kex(#[from] KexError),
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("frame length {0} exceeds limit")]
    LengthOverflow(usize),
    #[error("expected {expected}, received {received}")]
    UnexpectedMessage { expected: MessageKind, received: MessageKind },
    #[error("peer closed the connection")]
    PeerClosed,
    #[error("client and server derived different keys")]
    KeyMismatch,
    #[error("byte counts changed between iterations: {0}")]
    ByteCountDrift(String),
    #[error("measurement aborted after {completed} handshakes: {source}")]
    MeasurementAborted {
        completed: u32,
        #[source]
        source: Box<TlsError>,
    },
    #[error("unknown suite component {0:?}")]
    UnknownScheme(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<WireError> for TlsError {
    fn from(e: WireError) -> Self {
        match e {
            WireError::LengthOverflow(n) => TlsError::LengthOverflow(n),
            other => TlsError::MalformedFrame(other.to_string()),
        }
    }
}

/// A KEM, a signature scheme and a hash under one label.
#[derive(Clone)]
pub struct SuiteConfig {
    pub label: String,
    pub kem: Arc<dyn Kem>,
    pub sig: Arc<dyn SigScheme>,
    pub hash: Arc<dyn HashFunction>,
}

impl fmt::Debug for SuiteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuiteConfig")
            .field("label", &self.label)
            .field("kem", &self.kem.name())
            .field("sig", &self.sig.name())
            .field("hash", &self.hash.name())
            .finish()
    }
}

impl SuiteConfig {
    pub fn new(label: &str, kem: Arc<dyn Kem>, sig: Arc<dyn SigScheme>, hash: Arc<dyn HashFunction>) -> Self {
        SuiteConfig {
            label: label.to_string(),
            kem,
            sig,
            hash,
        }
    }

    /// Zero-length stub payloads under `label`; the baseline for byte accounting.
    pub fn empty_stub(label: &str) -> Self {
        let h: Arc<dyn HashFunction> = Arc::new(MixHash::default());
        SuiteConfig::new(
            label,
            Arc::new(StubKem::new("stub", 0, 0, h.clone())),
            Arc::new(StubSig::new("stub", 0, 0, h.clone())),
            h,
        )
    }

    /// Resolves `KEM+SIG`. Each half is a toy scheme name, or a registry name
    /// which becomes a stub sized like the registered scheme.
    pub fn by_name(label: &str, registry: &Registry) -> Result<Self, TlsError> {
        let (kem_name, sig_name) = label
            .split_once('+')
            .ok_or_else(|| TlsError::UnknownScheme(format!("{label} (expected KEM+SIG)")))?;
        let h: Arc<dyn HashFunction> = Arc::new(MixHash::default());
        let kem: Arc<dyn Kem> = match kem_by_name(kem_name) {
            Some(k) => Arc::from(k),
            None => {
                let meta = registry
                    .lookup(kem_name)
                    .ok()
                    .filter(|m| m.kind == SchemeKind::Kem)
                    .ok_or_else(|| TlsError::UnknownScheme(kem_name.to_string()))?;
                Arc::new(StubKem::new(
                    &meta.name,
                    meta.public_key_bytes as usize,
                    meta.payload_bytes as usize,
                    h.clone(),
                ))
            }
        };
        let sig: Arc<dyn SigScheme> = match sig_by_name(sig_name) {
            Some(s) => Arc::from(s),
            None => {
                let meta = registry
                    .lookup(sig_name)
                    .ok()
                    .filter(|m| m.kind == SchemeKind::Signature)
                    .ok_or_else(|| TlsError::UnknownScheme(sig_name.to_string()))?;
                Arc::new(StubSig::new(
                    &meta.name,
                    meta.public_key_bytes as usize,
                    meta.payload_bytes as usize,
                    h.clone(),
                ))
            }
        };
        Ok(SuiteConfig::new(label, kem, sig, h))
    }
}

/// Toy certificate with a single pinned issuer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub subject: String,
    pub sig_scheme: String,
    pub subject_public_key: Vec<u8>,
    pub issuer_signature: Vec<u8>,
}

impl Certificate {
    /// The bytes the issuer signs: subject, scheme and key, length-prefixed.
    pub fn signed_bytes(subject: &str, sig_scheme: &str, key: &[u8]) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_bytes(&mut buf, subject.as_bytes());
        wire::put_bytes(&mut buf, sig_scheme.as_bytes());
        wire::put_bytes(&mut buf, key);
        buf
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Self::signed_bytes(&self.subject, &self.sig_scheme, &self.subject_public_key);
        wire::put_bytes(&mut buf, &self.issuer_signature);
        buf
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(Certificate {
            subject: r.string()?,
            sig_scheme: r.string()?,
            subject_public_key: r.bytes()?.to_vec(),
            issuer_signature: r.bytes()?.to_vec(),
        })
    }

    pub fn verify(&self, anchor: &TrustAnchor) -> bool {
        let body = Self::signed_bytes(&self.subject, &self.sig_scheme, &self.subject_public_key);
        anchor.scheme.verify(&anchor.public, &body, &self.issuer_signature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    ClientHello = 1,
    ServerHello = 2,
    EncryptedExtensions = 3,
    Certificate = 4,
    CertificateVerify = 5,
    FinishedServer = 6,
    FinishedClient = 7,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        MessageKind::ClientHello,
        MessageKind::ServerHello,
        MessageKind::EncryptedExtensions,
        MessageKind::Certificate,
        MessageKind::CertificateVerify,
        MessageKind::FinishedServer,
        MessageKind::FinishedClient,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn from_client(self) -> bool {
        matches!(self, MessageKind::ClientHello | MessageKind::FinishedClient)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HandshakeMessage {
    ClientHello { offered_suites: Vec<String>, kem_public: Vec<u8> },
    ServerHello { chosen_suite: String, kem_ciphertext: Vec<u8> },
    EncryptedExtensions { payload: Vec<u8> },
    Certificate { cert: Certificate },
    CertificateVerify { signature: Vec<u8> },
    FinishedServer { mac: Vec<u8> },
    FinishedClient { mac: Vec<u8> },
}

impl HandshakeMessage {
    pub fn kind(&self) -> MessageKind {
        match self {
            HandshakeMessage::ClientHello { .. } => MessageKind::ClientHello,
            HandshakeMessage::ServerHello { .. } => MessageKind::ServerHello,
            HandshakeMessage::EncryptedExtensions { .. } => MessageKind::EncryptedExtensions,
            HandshakeMessage::Certificate { .. } => MessageKind::Certificate,
            HandshakeMessage::CertificateVerify { .. } => MessageKind::CertificateVerify,
            HandshakeMessage::FinishedServer { .. } => MessageKind::FinishedServer,
            HandshakeMessage::FinishedClient { .. } => MessageKind::FinishedClient,
        }
    }
}

/// Tag byte, 4-byte big-endian payload length, payload. Multi-field payloads
/// length-prefix each field; single-field payloads are the raw bytes.
pub fn encode_message(msg: &HandshakeMessage) -> Vec<u8> {
    let mut payload = Vec::new();
    match msg {
        HandshakeMessage::ClientHello { offered_suites, kem_public } => {
            let labels: Vec<Vec<u8>> = offered_suites.iter().map(|s| s.as_bytes().to_vec()).collect();
            wire::put_list(&mut payload, &labels);
            wire::put_bytes(&mut payload, kem_public);
        }
        HandshakeMessage::ServerHello { chosen_suite, kem_ciphertext } => {
            wire::put_bytes(&mut payload, chosen_suite.as_bytes());
            wire::put_bytes(&mut payload, kem_ciphertext);
        }
        HandshakeMessage::Certificate { cert } => payload = cert.to_bytes(),
        HandshakeMessage::EncryptedExtensions { payload: p }
        | HandshakeMessage::CertificateVerify { signature: p }
        | HandshakeMessage::FinishedServer { mac: p }
        | HandshakeMessage::FinishedClient { mac: p } => payload.extend_from_slice(p),
    }
    assert!(payload.len() <= MAX_FRAME_LEN, "frame payload too long");
    let mut frame = Vec::with_capacity(FRAME_HEADER_LEN + payload.len());
    frame.push(msg.kind().tag());
    wire::put_u32(&mut frame, payload.len() as u32);
    frame.extend(payload);
    frame
}

pub fn decode_message(frame: &[u8]) -> Result<HandshakeMessage, TlsError> {
    if frame.len() < FRAME_HEADER_LEN {
        return Err(TlsError::MalformedFrame(format!("{} bytes is shorter than a header", frame.len())));
    }
    let kind = MessageKind::from_tag(frame[0])
        .ok_or_else(|| TlsError::MalformedFrame(format!("unknown tag {}", frame[0])))?;
    let len = u32::from_be_bytes(frame[1..5].try_into().unwrap()) as usize;
    if len > MAX_FRAME_LEN {
        return Err(TlsError::LengthOverflow(len));
    }
    let payload = &frame[FRAME_HEADER_LEN..];
    if payload.len() != len {
        return Err(TlsError::MalformedFrame(format!(
            "header says {len} payload bytes, frame has {}",
            payload.len()
        )));
    }
    let raw = payload.to_vec();
    let mut r = Reader::new(payload);
    let msg = match kind {
        MessageKind::ClientHello => {
            let offered_suites = r
                .list()?
                .into_iter()
                .map(|l| String::from_utf8(l).map_err(|_| TlsError::MalformedFrame("non-utf8 suite label".into())))
                .collect::<Result<_, _>>()?;
            HandshakeMessage::ClientHello {
                offered_suites,
                kem_public: r.bytes()?.to_vec(),
            }
        }
        MessageKind::ServerHello => HandshakeMessage::ServerHello {
            chosen_suite: r.string()?,
            kem_ciphertext: r.bytes()?.to_vec(),
        },
        MessageKind::Certificate => HandshakeMessage::Certificate {
            cert: Certificate::read(&mut r)?,
        },
        MessageKind::EncryptedExtensions => return Ok(HandshakeMessage::EncryptedExtensions { payload: raw }),
        MessageKind::CertificateVerify => return Ok(HandshakeMessage::CertificateVerify { signature: raw }),
        MessageKind::FinishedServer => return Ok(HandshakeMessage::FinishedServer { mac: raw }),
        MessageKind::FinishedClient => return Ok(HandshakeMessage::FinishedClient { mac: raw }),
    };
    r.finish()?;
    Ok(msg)
}

/// Handshake traffic keys and Finished keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKeys {
    pub client_handshake: Vec<u8>,
    pub server_handshake: Vec<u8>,
    pub client_finished: Vec<u8>,
    pub server_finished: Vec<u8>,
}

impl SessionKeys {
    /// Hash of all four keys; equal on both sides after a good handshake.
    pub fn digest(&self, hash: &dyn HashFunction) -> Vec<u8> {
        hash.hash_parts(&[
            &self.client_handshake,
            &self.server_handshake,
            &self.client_finished,
            &self.server_finished,
        ])
    }
}

pub const KEY_LABELS: [&str; 4] = ["c hs", "s hs", "fin c", "fin s"];

/// `key = H(secret ‖ transcript_hash ‖ label)` for each label.
pub fn derive_keys(shared_secret: &[u8], transcript_hash: &[u8], hash: &dyn HashFunction) -> SessionKeys {
    let [c, s, fc, fs] = KEY_LABELS.map(|l| hash.hash_parts(&[shared_secret, transcript_hash, l.as_bytes()]));
    SessionKeys {
        client_handshake: c,
        server_handshake: s,
        client_finished: fc,
        server_finished: fs,
    }
}

/// Prefix of the CertificateVerify signature input.
pub const CERT_VERIFY_CONTEXT: &[u8] = b"pqbench server CertificateVerify";

/// `H(key ‖ H(transcript))`.
pub fn finished_mac(key: &[u8], transcript: &[u8], hash: &dyn HashFunction) -> Vec<u8> {
    hash.hash_parts(&[key, &hash.hash(transcript)])
}
