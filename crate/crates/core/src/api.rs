//! Request and response types shared by the HTTP service, its client and the
//! CLI, and the in-process handlers that answer them.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{
    bench_kem as run_bench_kem, bench_sig as run_bench_sig, emit_chart_data, emit_csv, emit_cycle_csv,
    emit_cycle_table, emit_text, parse_text, BenchConfig, BenchRecord, CycleTable, GroupBy,
};
use crate::kex::{kem_by_name, sig_by_name, KEM_NAMES, SIG_NAMES};
use crate::registry::{
    classical_security_bits, nist_level_equivalent, postquantum_security_bits, AlgoClass, AlgoClassKind, Registry,
    SchemeMetadata, SecurityAssessment,
};
use crate::tlssim::{
    measure_handshake, memory_connector, ClientConfig, Issuer, ServerConfig, SuiteConfig, DEFAULT_ITERATIONS,
};

pub const DEFAULT_SEED: u64 = 1;

/// Signs server certificates in in-process handshake measurements.
pub const ISSUER_SCHEME: &str = "fs-dlog";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    BadRequest,
    NotFound,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::BadRequest,
            message: message.into(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::NotFound,
            message: message.into(),
        }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::Failed,
            message: message.into(),
        }
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ApiError {}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Chart,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "chart" => Ok(OutputFormat::Chart),
            _ => Err(format!("unknown format {s:?} (expected text, csv or chart)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Text => "text",
            OutputFormat::Csv => "csv",
            OutputFormat::Chart => "chart",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeList {
    /// Runnable KEMs.
    pub kems: Vec<String>,
    /// Runnable signature schemes.
    pub signatures: Vec<String>,
    /// Size metadata for the registered candidates.
    pub registry: Vec<SchemeMetadata>,
}

pub fn schemes(reg: &Registry) -> SchemeList {
    SchemeList {
        kems: KEM_NAMES.iter().map(|s| s.to_string()).collect(),
        signatures: SIG_NAMES.iter().map(|s| s.to_string()).collect(),
        registry: reg.schemes().cloned().collect(),
    }
}

pub fn lookup(reg: &Registry, name: &str) -> Result<SchemeMetadata, ApiError> {
    reg.lookup(name).cloned().map_err(|e| ApiError::not_found(e.to_string()))
}

pub fn assess(reg: &Registry, name: &str) -> Result<SecurityAssessment, ApiError> {
    reg.assess(name).cloned().map_err(|e| ApiError::not_found(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityLevelRequest {
    pub class: AlgoClassKind,
    pub size_bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityLevel {
    pub class: AlgoClassKind,
    pub size_bits: u32,
    pub classical_bits: u32,
    pub postquantum_bits: u32,
}

pub fn security_level(req: SecurityLevelRequest) -> Result<SecurityLevel, ApiError> {
    let a = AlgoClass::new(req.class, req.size_bits);
    let bad = |e: crate::registry::RegistryError| ApiError::bad_request(e.to_string());
    Ok(SecurityLevel {
        class: req.class,
        size_bits: req.size_bits,
        classical_bits: classical_security_bits(a).map_err(bad)?,
        postquantum_bits: postquantum_security_bits(a).map_err(bad)?,
    })
}

pub fn nist_level(level: u8) -> Result<AlgoClass, ApiError> {
    nist_level_equivalent(level).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRequest {
    pub scheme: String,
    #[serde(default)]
    pub interval_seconds: Option<f64>,
    #[serde(default)]
    pub min_samples: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl BenchRequest {
    pub fn new(scheme: &str) -> Self {
        BenchRequest {
            scheme: scheme.to_string(),
            interval_seconds: None,
            min_samples: None,
            seed: None,
        }
    }

    fn config(&self) -> Result<BenchConfig, ApiError> {
        let mut cfg = BenchConfig::default();
        if let Some(i) = self.interval_seconds {
            cfg = cfg.with_interval(i).map_err(|e| ApiError::bad_request(e.to_string()))?;
        }
        if let Some(n) = self.min_samples {
            cfg = cfg.with_min_samples(n).map_err(|e| ApiError::bad_request(e.to_string()))?;
        }
        Ok(cfg)
    }

    fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.seed.unwrap_or(DEFAULT_SEED))
    }
}

pub fn bench_kem(req: &BenchRequest) -> Result<Vec<BenchRecord>, ApiError> {
    let kem = kem_by_name(&req.scheme)
        .ok_or_else(|| ApiError::not_found(format!("unknown KEM {:?}; available: {}", req.scheme, KEM_NAMES.join(", "))))?;
    run_bench_kem(kem.as_ref(), &req.config()?, &mut req.rng()).map_err(|e| ApiError::failed(e.to_string()))
}

pub fn bench_sig(req: &BenchRequest) -> Result<Vec<BenchRecord>, ApiError> {
    let sig = sig_by_name(&req.scheme).ok_or_else(|| {
        ApiError::not_found(format!("unknown signature scheme {:?}; available: {}", req.scheme, SIG_NAMES.join(", ")))
    })?;
    run_bench_sig(sig.as_ref(), &req.config()?, &mut req.rng()).map_err(|e| ApiError::failed(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TlsMeasureRequest {
    /// `KEM+SIG`, each half a runnable scheme or a registry name.
    pub suite: String,
    #[serde(default)]
    pub iterations: Option<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageBytes {
    pub message: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlsMeasureResponse {
    pub record: BenchRecord,
    pub messages: Vec<MessageBytes>,
}

/// Client and server configs for `suite`, with a fresh issuer.
pub fn tls_configs(reg: &Registry, suite: &str, rng: &mut ChaCha20Rng) -> Result<(ClientConfig, ServerConfig), ApiError> {
    let suite = SuiteConfig::by_name(suite, reg).map_err(|e| ApiError::not_found(e.to_string()))?;
    let issuer_scheme = sig_by_name(ISSUER_SCHEME).expect("issuer scheme is built in");
    let issuer = Issuer::generate(Arc::from(issuer_scheme), rng).map_err(|e| ApiError::failed(e.to_string()))?;
    let server = ServerConfig::generate(vec![suite.clone()], "pqbench.test", &issuer, rng)
        .map_err(|e| ApiError::failed(e.to_string()))?;
    let client = ClientConfig {
        suites: vec![suite],
        trust: issuer.anchor(),
    };
    Ok((client, server))
}

pub fn tls_measure(reg: &Registry, req: &TlsMeasureRequest) -> Result<TlsMeasureResponse, ApiError> {
    let iterations = req.iterations.unwrap_or(DEFAULT_ITERATIONS);
    if iterations == 0 {
        return Err(ApiError::bad_request("iterations must be at least 1"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(req.seed.unwrap_or(DEFAULT_SEED));
    let (client, server) = tls_configs(reg, &req.suite, &mut rng)?;
    let mut connect = memory_connector(Arc::new(server), rng.gen());
    let clock = crate::bench::SystemClock::new();
    let m = measure_handshake(&client, &mut connect, iterations, &clock, &mut rng)
        .map_err(|e| ApiError::failed(e.to_string()))?;
    Ok(TlsMeasureResponse {
        record: m.to_record(),
        messages: m
            .messages
            .iter()
            .map(|s| MessageBytes {
                message: s.kind.to_string(),
                bytes: s.bytes,
            })
            .collect(),
    })
}

pub fn render_records(records: &[BenchRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => emit_text(records),
        OutputFormat::Csv => emit_csv(records),
        OutputFormat::Chart => emit_chart_data(records, GroupBy::Scheme),
    }
}

fn render_table(table: &CycleTable, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => emit_cycle_table(table),
        OutputFormat::Csv => emit_cycle_csv(table),
        OutputFormat::Chart => {
            let mut out = String::new();
            for (i, op) in table.columns.iter().enumerate() {
                let _ = writeln!(out, "# {op}");
                for row in &table.rows {
                    let _ = writeln!(out, "{} {}", row.scheme, row.cycles[i].1);
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRequest {
    /// Bench text grammar and/or cycle tables.
    pub text: String,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub output: String,
}

/// Re-emits parsed records, then each cycle table, in `format`.
pub fn report(req: &ReportRequest) -> Result<ReportResponse, ApiError> {
    let parsed = parse_text(&req.text).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mut parts = Vec::new();
    if !parsed.records.is_empty() {
        parts.push(render_records(&parsed.records, req.format));
    }
    parts.extend(parsed.tables.iter().map(|t| render_table(t, req.format)));
    Ok(ReportResponse {
        output: parts.join("\n"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{CYCLES_KEM_TXT, CYCLES_SIG_TXT};

    #[test]
    fn report_csv_has_one_line_per_row() {
        for (text, rows) in [(CYCLES_KEM_TXT, 31), (CYCLES_SIG_TXT, 53)] {
            let out = report(&ReportRequest {
                text: text.into(),
                format: OutputFormat::Csv,
            })
            .unwrap()
            .output;
            assert_eq!(out.lines().count(), rows + 1);
        }
        let out = report(&ReportRequest {
            text: CYCLES_KEM_TXT.into(),
            format: OutputFormat::Text,
        })
        .unwrap();
        let again = report(&ReportRequest {
            text: out.output.clone(),
            format: OutputFormat::Text,
        })
        .unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn lookups() {
        let reg = Registry::builtin();
        assert_eq!(assess(&reg, "Saber").unwrap().emit(), "Saber|14|y|n|y|y");
        assert_eq!(assess(&reg, "nope").unwrap_err().kind, ErrorKind::NotFound);
        assert_eq!(lookup(&reg, "Kyber-768").unwrap().public_key_bytes, 1184);
        let s = security_level(SecurityLevelRequest {
            class: AlgoClassKind::Hash,
            size_bits: 256,
        })
        .unwrap();
        assert_eq!((s.classical_bits, s.postquantum_bits), (128, 85));
        assert_eq!(nist_level(9).unwrap_err().kind, ErrorKind::BadRequest);
    }

    #[test]
    fn tls_measure_is_reproducible_in_bytes() {
        let reg = Registry::builtin();
        let req = TlsMeasureRequest {
            suite: "Kyber-768+Dilithium IV".into(),
            iterations: Some(3),
            seed: Some(9),
        };
        let a = tls_measure(&reg, &req).unwrap();
        let b = tls_measure(&reg, &req).unwrap();
        assert_eq!(a.messages, b.messages);
        assert_eq!(a.record.bytes, b.record.bytes);
        assert_eq!(a.record.stats.n, 3);
        assert_eq!(a.messages.len(), 7);
    }

    #[test]
    fn bench_rejects_unknown_and_bad_config() {
        assert_eq!(bench_kem(&BenchRequest::new("nope")).unwrap_err().kind, ErrorKind::NotFound);
        let mut req = BenchRequest::new("stub");
        req.interval_seconds = Some(-1.0);
        assert_eq!(bench_kem(&req).unwrap_err().kind, ErrorKind::BadRequest);
    }
}
