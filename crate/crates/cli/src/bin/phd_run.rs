//! Runs a host program with an embedded controller listening for a director.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;

use anyhow::{Context, Result};
use clap::Parser;
use phd_core::controller::{exit_status, listen, spawn_session, RuntimeConfig, Transport};
use phd_core::direction::Capacities;
use phd_core::session::{Session, SessionConfig};

#[derive(Parser)]
#[command(name = "phd-run", version, about)]
struct Args {
    /// Host program source.
    program: PathBuf,
    /// Address to accept a director on, e.g. 127.0.0.1:7000.
    #[arg(long)]
    listen: String,
    #[arg(long, default_value = "tcp")]
    transport: Transport,
    /// Largest trace buffer a command may ask for.
    #[arg(long, default_value_t = Capacities::default().trace)]
    trace_cap: u64,
    /// Largest count budget a command may ask for.
    #[arg(long, default_value_t = Capacities::default().count)]
    count_cap: u64,
    /// Refuse `print` until a breakpoint has been issued.
    #[arg(long)]
    strict_directability: bool,
    /// Commands to make available at runtime, one per line.
    #[arg(long)]
    predirect: Option<PathBuf>,
    /// Wait for a director and stop before the first statement.
    #[arg(long)]
    pause_at_start: bool,
    #[arg(long, default_value_t = RuntimeConfig::default().max_call_depth)]
    max_call_depth: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("phd-run: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<u8> {
    let source = std::fs::read_to_string(&args.program)
        .with_context(|| format!("reading {}", args.program.display()))?;
    let predirect = match &args.predirect {
        Some(p) => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        None => String::new(),
    };
    let config = SessionConfig {
        caps: Capacities {
            trace: args.trace_cap,
            count: args.count_cap,
        },
        strict: args.strict_directability,
    };
    let session = Session::load(&source, &predirect, config)?;
    let (tx, rx) = mpsc::channel();
    let addr = listen(&args.listen, args.transport, tx)
        .with_context(|| format!("listening on {}", args.listen))?;
    eprintln!("phd-run: listening on {addr}");
    let runtime = RuntimeConfig {
        pause_at_start: args.pause_at_start,
        max_call_depth: args.max_call_depth,
        ..RuntimeConfig::default()
    };
    let outcome = spawn_session(session, rx, runtime)?
        .join()
        .map_err(|_| anyhow::anyhow!("interpreter thread panicked"))?;
    match &outcome.result {
        Ok(n) => println!("{n}"),
        Err(e) => eprintln!("phd-run: {e}"),
    }
    Ok(exit_status(&outcome.result))
}
