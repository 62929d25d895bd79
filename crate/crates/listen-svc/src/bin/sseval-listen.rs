use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use sseval_listen::{router, service_from_config, ServiceConfig};

/// Serve a two-phase listening test.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// TOML service configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `bind` from the configuration.
    #[arg(long)]
    bind: Option<String>,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let run = async {
        let mut cfg = ServiceConfig::load(&args.config)?;
        if let Some(b) = args.bind {
            cfg.bind = b;
        }
        let service = service_from_config(&cfg)?;
        let rec = service.recovery();
        eprintln!(
            "replayed {} log records ({} torn bytes dropped); {} trials per phase",
            rec.records,
            rec.truncated_bytes,
            service.study().n_trials()
        );
        let listener = tokio::net::TcpListener::bind(&cfg.bind).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(Arc::new(service))).await?;
        Ok::<(), Box<dyn std::error::Error>>(())
    };
    match run.await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
