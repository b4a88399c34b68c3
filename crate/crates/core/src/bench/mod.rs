//! Interval-based benchmark harness: time an operation repeatedly for a set
//! interval, report mean and sample standard deviation, and rerun once with a
//! longer interval when too few samples were collected.

mod report;

pub use report::{
    emit_chart_data, emit_csv, emit_cycle_csv, emit_cycle_table, emit_record, emit_text, parse_text, CycleRow, CycleTable,
    GroupBy, ParseError, Report, CSV_HEADER, CYCLES_KEM_TXT, CYCLES_SIG_TXT,
};

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kex::{Kem, SigScheme};
use crate::registry::SchemeKind;

/// Keys, ciphertexts and signatures prepared before a timed phase.
pub const POOL_SIZE: usize = 16;

pub const DEFAULT_INTERVAL_SECONDS: f64 = 3.0;
pub const DEFAULT_MIN_SAMPLES: u64 = 30;
pub const RERUN_FACTOR: f64 = 1.25;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error("benchmark failed: {0}")]
    Failure(String),
}

/// Monotonic time source in nanoseconds.
pub trait Clock: Send + Sync {
    fn now_ns(&self) -> u64;

    /// Cycle counter reading, if the platform exposes one.
    fn cycles(&self) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ns(&self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }

    #[cfg(target_arch = "x86_64")]
    fn cycles(&self) -> Option<u64> {
        // SAFETY: RDTSC is available on every x86_64 CPU and has no side effects.
        Some(unsafe { core::arch::x86_64::_rdtsc() })
    }
}

/// Manually advanced clock; clones share the same time.
#[derive(Debug, Clone, Default)]
pub struct FakeClock {
    now: Arc<AtomicU64>,
}

impl FakeClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, ns: u64) {
        self.now.fetch_add(ns, Ordering::SeqCst);
    }

    pub fn advance_ms(&self, ms: u64) {
        self.advance(ms * 1_000_000);
    }
}

impl Clock for FakeClock {
    fn now_ns(&self) -> u64 {
        self.now.load(Ordering::SeqCst)
    }
}

#[derive(Clone)]
pub struct BenchConfig {
    pub interval_seconds: f64,
    pub min_samples: u64,
    pub clock: Arc<dyn Clock>,
}

impl fmt::Debug for BenchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchConfig")
            .field("interval_seconds", &self.interval_seconds)
            .field("min_samples", &self.min_samples)
            .finish_non_exhaustive()
    }
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            interval_seconds: DEFAULT_INTERVAL_SECONDS,
            min_samples: DEFAULT_MIN_SAMPLES,
            clock: Arc::new(SystemClock::new()),
        }
    }
}

impl BenchConfig {
    pub fn new(interval_seconds: f64, min_samples: u64) -> Result<Self, BenchError> {
        Self::default().with_interval(interval_seconds)?.with_min_samples(min_samples)
    }

    pub fn with_interval(mut self, interval_seconds: f64) -> Result<Self, BenchError> {
        if !(interval_seconds.is_finite() && interval_seconds > 0.0) {
            return Err(BenchError::InvalidConfig(format!(
                "interval must be a positive number of seconds, got {interval_seconds}"
            )));
        }
        self.interval_seconds = interval_seconds;
        Ok(self)
    }

    pub fn with_min_samples(mut self, min_samples: u64) -> Result<Self, BenchError> {
        if min_samples == 0 {
            return Err(BenchError::InvalidConfig("min_samples must be at least 1".into()));
        }
        self.min_samples = min_samples;
        Ok(self)
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    fn interval_ns(&self) -> u64 {
        (self.interval_seconds * 1e9).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchStats {
    pub n: u64,
    pub mean_us: f64,
    pub stddev_us: f64,
    pub total_elapsed_us: f64,
    /// Mean cycles per call when the clock has a cycle counter.
    pub mean_cycles: Option<u64>,
}

impl BenchStats {
    /// Statistics over per-call durations in nanoseconds. Uses the `n - 1`
    /// denominator; a single sample has deviation 0.
    pub fn from_durations(durations_ns: &[u64], total_elapsed_ns: u64) -> Option<Self> {
        let n = durations_ns.len();
        if n == 0 {
            return None;
        }
        let sum: u128 = durations_ns.iter().map(|&d| u128::from(d)).sum();
        let mean = sum as f64 / n as f64;
        let var = if n == 1 {
            0.0
        } else {
            durations_ns.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        };
        Some(BenchStats {
            n: n as u64,
            mean_us: mean / 1e3,
            stddev_us: var.sqrt() / 1e3,
            total_elapsed_us: total_elapsed_ns as f64 / 1e3,
            mean_cycles: None,
        })
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "operation panicked".into())
}

/// Calls `op` until the elapsed time reaches the interval. A call that starts
/// before the cutoff is completed and counted, so there is at least one call.
pub fn try_run_timed<F, E>(mut op: F, config: &BenchConfig) -> Result<BenchStats, BenchError>
where
    F: FnMut() -> Result<(), E>,
    E: fmt::Display,
{
    let clock = config.clock.as_ref();
    let interval = config.interval_ns();
    let mut durations = Vec::new();
    let mut cycles: Option<u128> = Some(0);
    let start = clock.now_ns();
    loop {
        let c0 = clock.cycles();
        let t0 = clock.now_ns();
        match catch_unwind(AssertUnwindSafe(&mut op)) {
            Ok(Ok(())) => {}
            Ok(Err(e)) => return Err(BenchError::Failure(e.to_string())),
            Err(payload) => return Err(BenchError::Failure(panic_message(payload.as_ref()))),
        }
        let t1 = clock.now_ns();
        let c1 = clock.cycles();
        durations.push(t1.saturating_sub(t0));
        cycles = match (cycles, c0, c1) {
            (Some(acc), Some(a), Some(b)) => Some(acc + u128::from(b.wrapping_sub(a))),
            _ => None,
        };
        if t1.saturating_sub(start) >= interval {
            let mut stats = BenchStats::from_durations(&durations, t1 - start).expect("at least one call");
            stats.mean_cycles = cycles.map(|c| (c / durations.len() as u128) as u64);
            return Ok(stats);
        }
    }
}

pub fn run_timed<F: FnMut()>(mut op: F, config: &BenchConfig) -> Result<BenchStats, BenchError> {
    try_run_timed(
        || {
            op();
            Ok::<(), std::convert::Infallible>(())
        },
        config,
    )
}

/// Runs once; if fewer than `min_samples` calls fit, reruns once with the
/// interval `mean × min_samples × 1.25` and returns the rerun alone.
pub fn try_adaptive_bench<F, E>(mut op: F, config: &BenchConfig) -> Result<BenchStats, BenchError>
where
    F: FnMut() -> Result<(), E>,
    E: fmt::Display,
{
    let first = try_run_timed(&mut op, config)?;
    if first.n >= config.min_samples {
        return Ok(first);
    }
    let seconds = first.mean_us * 1e-6 * config.min_samples as f64 * RERUN_FACTOR;
    let rerun = config.clone().with_interval(seconds.max(1e-9))?;
    try_run_timed(op, &rerun)
}

pub fn adaptive_bench<F: FnMut()>(mut op: F, config: &BenchConfig) -> Result<BenchStats, BenchError> {
    try_adaptive_bench(
        || {
            op();
            Ok::<(), std::convert::Infallible>(())
        },
        config,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Keygen,
    Encaps,
    Decaps,
    Keypair,
    Sign,
    Verify,
    Handshake,
}

impl Operation {
    pub const ALL: [Operation; 7] = [
        Operation::Keygen,
        Operation::Encaps,
        Operation::Decaps,
        Operation::Keypair,
        Operation::Sign,
        Operation::Verify,
        Operation::Handshake,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Keygen => "keygen",
            Operation::Encaps => "encaps",
            Operation::Decaps => "decaps",
            Operation::Keypair => "keypair",
            Operation::Sign => "sign",
            Operation::Verify => "verify",
            Operation::Handshake => "handshake",
        }
    }

    /// The scheme kind this operation belongs to; `None` for handshakes.
    pub fn kind(self) -> Option<SchemeKind> {
        match self {
            Operation::Keygen | Operation::Encaps | Operation::Decaps => Some(SchemeKind::Kem),
            Operation::Keypair | Operation::Sign | Operation::Verify => Some(SchemeKind::Signature),
            Operation::Handshake => None,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operation::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| format!("unknown operation {s:?}"))
    }
}

/// Client-side byte counters for handshake records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteCounts {
    pub read: u64,
    pub write: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub scheme: String,
    pub operation: Operation,
    pub stats: BenchStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bytes: Option<ByteCounts>,
}

impl BenchRecord {
    pub fn new(scheme: &str, operation: Operation, stats: BenchStats) -> Self {
        BenchRecord {
            scheme: scheme.to_string(),
            operation,
            stats,
            bytes: None,
        }
    }
}

fn failure<E: fmt::Display>(e: E) -> BenchError {
    BenchError::Failure(e.to_string())
}

/// Times keygen, encaps against one fixed key and decaps against a pool of
/// ciphertexts prepared outside the timed region.
pub fn bench_kem(kem: &dyn Kem, config: &BenchConfig, rng: &mut dyn RngCore) -> Result<Vec<BenchRecord>, BenchError> {
    let keygen = try_adaptive_bench(|| kem.keypair(rng).map(drop), config)?;

    let (pk, sk) = kem.keypair(rng).map_err(failure)?;
    let encaps = try_adaptive_bench(|| kem.encaps(&pk, rng).map(drop), config)?;

    let pool = (0..POOL_SIZE)
        .map(|_| kem.encaps(&pk, rng).map(|(ct, _)| ct))
        .collect::<Result<Vec<_>, _>>()
        .map_err(failure)?;
    let mut i = 0;
    let decaps = try_adaptive_bench(
        || {
            i = (i + 1) % pool.len();
            kem.decaps(&sk, &pool[i]).map(drop)
        },
        config,
    )?;

    Ok(vec![
        BenchRecord::new(kem.name(), Operation::Keygen, keygen),
        BenchRecord::new(kem.name(), Operation::Encaps, encaps),
        BenchRecord::new(kem.name(), Operation::Decaps, decaps),
    ])
}

/// Times keypair, signing under one fixed key and verification of a pool of
/// pre-made signatures.
pub fn bench_sig(sig: &dyn SigScheme, config: &BenchConfig, rng: &mut dyn RngCore) -> Result<Vec<BenchRecord>, BenchError> {
    let keypair = try_adaptive_bench(|| sig.keypair(rng).map(drop), config)?;

    let (pk, sk) = sig.keypair(rng).map_err(failure)?;
    let messages: Vec<Vec<u8>> = (0..POOL_SIZE as u32).map(|i| i.to_be_bytes().to_vec()).collect();
    let mut i = 0;
    let sign = try_adaptive_bench(
        || {
            i = (i + 1) % messages.len();
            sig.sign(&sk, &messages[i], rng).map(drop)
        },
        config,
    )?;

    let sigs = messages
        .iter()
        .map(|m| sig.sign(&sk, m, rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(failure)?;
    let verify = try_adaptive_bench(
        || {
            i = (i + 1) % messages.len();
            if sig.verify(&pk, &messages[i], &sigs[i]) {
                Ok(())
            } else {
                Err("signature did not verify")
            }
        },
        config,
    )?;

    Ok(vec![
        BenchRecord::new(sig.name(), Operation::Keypair, keypair),
        BenchRecord::new(sig.name(), Operation::Sign, sign),
        BenchRecord::new(sig.name(), Operation::Verify, verify),
    ])
}
