use std::io::IsTerminal;
use std::net::TcpListener;
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tracing_subscriber::EnvFilter;

use pqbench_client::{Client, ClientError};
use pqbench_core::api::{
    self, ApiError, BenchRequest, OutputFormat, ReportRequest, TlsMeasureRequest, DEFAULT_SEED,
};
use pqbench_core::bench::{BenchRecord, SystemClock};
use pqbench_core::registry::{Registry, SecurityAssessment};
use pqbench_core::tlssim::{measure_handshake, serve_tcp, Connection, TcpTransport, TlsError, DEFAULT_ITERATIONS};

/// Benchmarks, handshake profiles and security assessments for toy
/// post-quantum schemes.
#[derive(Parser)]
#[command(name = "pqbench", version)]
struct Cli {
    /// Run against a pqbench-service at this URL instead of in-process.
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, default_value_t = OutputFormat::Text, value_parser = parse_format)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scheme: String,
    /// Timing interval per operation, in seconds.
    #[arg(long)]
    interval: Option<f64>,
    #[arg(long)]
    min_samples: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Time keygen, encaps and decaps of a KEM.
    BenchKem(BenchArgs),
    /// Time keypair, sign and verify of a signature scheme.
    BenchSig(BenchArgs),
    /// Serve handshakes over TCP.
    TlsServe {
        #[arg(long, default_value = "127.0.0.1:4433")]
        listen: String,
        /// `KEM+SIG`.
        #[arg(long)]
        suite: String,
        /// Exit after this many connections.
        #[arg(long)]
        max_connections: Option<usize>,
    },
    /// Run handshakes against a tls-serve started with the same suite and seed.
    TlsClient {
        #[arg(long)]
        connect: String,
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        iterations: u32,
    },
    /// Measure repeated in-memory handshakes.
    TlsMeasure {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: u32,
    },
    /// Print the security assessment line for a scheme.
    Assess { name: String },
    /// Re-emit a bench text file or cycle table.
    Report {
        #[arg(long = "in", value_name = "FILE")]
        input: std::path::PathBuf,
    },
    /// A short tour: assessments, two benchmarks and two handshake profiles.
    Demo,
}

/// Failure after arguments parsed; exit code 2.
#[derive(Debug)]
struct RunError(String);

impl From<ApiError> for RunError {
    fn from(e: ApiError) -> Self {
        RunError(e.message)
    }
}

impl From<ClientError> for RunError {
    fn from(e: ClientError) -> Self {
        RunError(e.to_string())
    }
}

impl From<TlsError> for RunError {
    fn from(e: TlsError) -> Self {
        RunError(e.to_string())
    }
}

enum Backend {
    Local(Registry),
    Remote(Client, tokio::runtime::Runtime),
}

impl Backend {
    fn new(server: Option<&str>) -> Result<Self, RunError> {
        match server {
            None => Ok(Backend::Local(registry()?)),
            Some(url) => {
                let rt = tokio::runtime::Builder::new_current_thread()
                    .enable_all()
                    .build()
                    .map_err(|e| RunError(e.to_string()))?;
                Ok(Backend::Remote(Client::new(url), rt))
            }
        }
    }

    fn bench_kem(&self, req: &BenchRequest) -> Result<Vec<BenchRecord>, RunError> {
        Ok(match self {
            Backend::Local(_) => api::bench_kem(req)?,
            Backend::Remote(c, rt) => rt.block_on(c.bench_kem(req))?,
        })
    }

    fn bench_sig(&self, req: &BenchRequest) -> Result<Vec<BenchRecord>, RunError> {
        Ok(match self {
            Backend::Local(_) => api::bench_sig(req)?,
            Backend::Remote(c, rt) => rt.block_on(c.bench_sig(req))?,
        })
    }

    fn tls_measure(&self, req: &TlsMeasureRequest) -> Result<BenchRecord, RunError> {
        Ok(match self {
            Backend::Local(reg) => api::tls_measure(reg, req)?,
            Backend::Remote(c, rt) => rt.block_on(c.tls_measure(req))?,
        }
        .record)
    }

    fn assess(&self, name: &str) -> Result<SecurityAssessment, RunError> {
        Ok(match self {
            Backend::Local(reg) => api::assess(reg, name)?,
            Backend::Remote(c, rt) => rt.block_on(c.assess(name))?,
        })
    }

    fn report(&self, req: &ReportRequest) -> Result<String, RunError> {
        Ok(match self {
            Backend::Local(_) => api::report(req)?,
            Backend::Remote(c, rt) => rt.block_on(c.report(req))?,
        }
        .output)
    }
}

fn registry() -> Result<Registry, RunError> {
    Registry::from_env().map_err(|e| RunError(format!("loading registry: {e}")))
}

fn render_assessments(rows: &[SecurityAssessment], format: OutputFormat) -> String {
    let mut out = String::new();
    if format == OutputFormat::Csv {
        out.push_str("name,venerability_years,np_hard,problem_reduction,rom_secure,qrom_secure\n");
    }
    for a in rows {
        let line = a.emit();
        out.push_str(&if format == OutputFormat::Csv { line.replace('|', ",") } else { line });
        out.push('\n');
    }
    out
}

fn bench_request(args: &BenchArgs, seed: u64) -> BenchRequest {
    BenchRequest {
        scheme: args.scheme.clone(),
        interval_seconds: args.interval,
        min_samples: args.min_samples,
        seed: Some(seed),
    }
}

fn tls_serve(listen: &str, suite: &str, max_connections: Option<usize>, seed: u64) -> Result<String, RunError> {
    let reg = registry()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (_, server) = api::tls_configs(&reg, suite, &mut rng)?;
    let listener = TcpListener::bind(listen).map_err(|e| RunError(format!("cannot listen on {listen}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| RunError(e.to_string()))?;
    tracing::info!(%addr, suite, "listening");
    let results = serve_tcp(listener, Arc::new(server), max_connections, seed)?;
    let failed = results.iter().filter(|r| r.is_err()).count();
    for r in &results {
        match r {
            Ok(o) => tracing::info!(suite = %o.suite, "handshake complete"),
            Err(e) => tracing::warn!(error = %e, "handshake failed"),
        }
    }
    if failed > 0 {
        return Err(RunError(format!("{failed} of {} handshakes failed", results.len())));
    }
    Ok(String::new())
}

fn tls_client(connect: &str, suite: &str, iterations: u32, seed: u64, format: OutputFormat) -> Result<String, RunError> {
    if iterations == 0 {
        return Err(RunError("iterations must be at least 1".into()));
    }
    let reg = registry()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (client, _) = api::tls_configs(&reg, suite, &mut rng)?;
    let mut connector = || {
        Ok(Connection {
            transport: Box::new(TcpTransport::connect(connect)?),
            server: None,
        })
    };
    let m = measure_handshake(&client, &mut connector, iterations, &SystemClock::new(), &mut rng)?;
    Ok(api::render_records(&[m.to_record()], format))
}

fn demo(backend: &Backend, seed: u64, format: OutputFormat) -> Result<String, RunError> {
    let mut out = String::new();
    let names = ["Saber", "Kyber", "NTRU", "SIKE", "Rainbow"];
    let rows = names.iter().filter_map(|n| backend.assess(n).ok()).collect::<Vec<_>>();
    out.push_str(&render_assessments(&rows, format));
    out.push('\n');
    let mut records = Vec::new();
    let mut req = BenchRequest {
        scheme: "lwe-toy".into(),
        interval_seconds: Some(0.2),
        min_samples: None,
        seed: Some(seed),
    };
    records.extend(backend.bench_kem(&req)?);
    req.scheme = "fs-dlog".into();
    records.extend(backend.bench_sig(&req)?);
    for suite in ["SABER-KEM+Dilithium IV", "Kyber-768+Dilithium IV", "ecdh-toy+fs-dlog"] {
        records.push(backend.tls_measure(&TlsMeasureRequest {
            suite: suite.into(),
            iterations: Some(10),
            seed: Some(seed),
        })?);
    }
    out.push_str(&api::render_records(&records, format));
    Ok(out)
}

fn run(cli: Cli) -> Result<String, RunError> {
    let Cli {
        server,
        seed,
        format,
        command,
    } = cli;
    match command {
        Command::TlsServe {
            listen,
            suite,
            max_connections,
        } => tls_serve(&listen, &suite, max_connections, seed),
        Command::TlsClient {
            connect,
            suite,
            iterations,
        } => tls_client(&connect, &suite, iterations, seed, format),
        command => {
            let backend = Backend::new(server.as_deref())?;
            match command {
                Command::BenchKem(args) => {
                    Ok(api::render_records(&backend.bench_kem(&bench_request(&args, seed))?, format))
                }
                Command::BenchSig(args) => {
                    Ok(api::render_records(&backend.bench_sig(&bench_request(&args, seed))?, format))
                }
                Command::TlsMeasure { suite, iterations } => {
                    let rec = backend.tls_measure(&TlsMeasureRequest {
                        suite,
                        iterations: Some(iterations),
                        seed: Some(seed),
                    })?;
                    Ok(api::render_records(&[rec], format))
                }
                Command::Assess { name } => Ok(render_assessments(&[backend.assess(&name)?], format)),
                Command::Report { input } => {
                    let text = std::fs::read_to_string(&input)
                        .map_err(|e| RunError(format!("reading {}: {e}", input.display())))?;
                    backend.report(&ReportRequest { text, format })
                }
                Command::Demo => demo(&backend, seed, format),
                Command::TlsServe { .. } | Command::TlsClient { .. } => unreachable!("handled above"),
            }
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if cli.server.is_some() && matches!(cli.command, Command::TlsServe { .. } | Command::TlsClient { .. }) {
        eprintln!("error: --server does not apply to tls-serve or tls-client, which speak TCP directly");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(RunError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
