use std::io::IsTerminal;

use clap::Parser;
use tokio::net::TcpListener;
use tracing_subscriber::EnvFilter;

use pqbench_core::registry::Registry;

/// Serve the pqbench operations over HTTP/JSON.
#[derive(Parser)]
#[command(name = "pqbench-service", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: String,
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let args = Args::parse();
    let registry = match Registry::from_env() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let listener = match TcpListener::bind(&args.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {}: {e}", args.listen);
            std::process::exit(2);
        }
    };
    tracing::info!(addr = %listener.local_addr().unwrap(), "listening");
    if let Err(e) = pqbench_service::serve(listener, registry).await {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
