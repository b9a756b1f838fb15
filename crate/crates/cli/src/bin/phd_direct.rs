//! Interactive director for a program run by `phd-run`.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::Parser;
use phd_cli::bridge;
use phd_core::controller::Transport;
use phd_core::direction::Capacities;
use phd_core::director::{DirectorHandle, DirectorLink, ServiceEvent};
use phd_core::session::{Session, SessionConfig};

const HELP: &str = "\
commands:
  print x
  break F/I [when a = b] | break L      unbreak F/I | unbreak L
  watch x [when a = b]                  unwatch x
  trace start x [when a = b] max N      trace stop|clear|print|full x
  count reads|writes|calls x [when a = b] max N
  count stop|clear|print|full [reads|writes|calls] x
  continue
  exec <controller program>
  facts | help | quit";

#[derive(Parser)]
#[command(name = "phd-direct", version, about)]
struct Args {
    /// Controller address, e.g. 127.0.0.1:7000.
    #[arg(long)]
    connect: String,
    #[arg(long, default_value = "tcp")]
    transport: Transport,
    /// The program the controller is running.
    #[arg(long)]
    program: PathBuf,
    /// The predirect list the controller was started with.
    #[arg(long)]
    predirect: Option<PathBuf>,
    /// Also serve the HTTP bridge on this address.
    #[arg(long)]
    bridge: Option<String>,
    #[arg(long, default_value_t = Capacities::default().trace)]
    trace_cap: u64,
    #[arg(long, default_value_t = Capacities::default().count)]
    count_cap: u64,
    #[arg(long)]
    strict_directability: bool,
    /// Seconds to wait for each controller answer.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phd-direct: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<()> {
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
    let timeout = Duration::from_secs(args.timeout);
    let handle = DirectorHandle::start(session, |on_event| {
        let mut link = match args.transport {
            Transport::Tcp => DirectorLink::connect_tcp(&args.connect, on_event)?,
            Transport::Udp => DirectorLink::connect_udp(&args.connect, on_event)?,
        };
        link.set_timeout(timeout);
        Ok(link)
    })
    .with_context(|| format!("connecting to {}", args.connect))?;

    let events = handle.subscribe();
    std::thread::spawn(move || {
        for e in events {
            match e {
                ServiceEvent::Break { text, .. } => println!("{text}"),
                ServiceEvent::ProcedureError(c) => {
                    eprintln!("controller: stored procedure failed: {c}")
                }
                ServiceEvent::Closed => eprintln!("controller closed the connection"),
                ServiceEvent::Facts(_) => {}
            }
        }
    });

    let bridge = match &args.bridge {
        Some(addr) => {
            let (local, t) = bridge::spawn(addr, handle.clone())
                .with_context(|| format!("starting bridge on {addr}"))?;
            eprintln!("phd-direct: bridge on http://{local}");
            Some(t)
        }
        None => None,
    };

    repl(&handle)?;
    if let Some(t) = bridge {
        let _ = t.join();
    }
    Ok(())
}

fn repl(handle: &DirectorHandle) -> Result<()> {
    let stdin = io::stdin();
    let mut out = io::stdout();
    for line in stdin.lock().lines() {
        let line = line?;
        let line = line.trim();
        match line {
            "" => continue,
            "quit" | "exit" => break,
            "help" => println!("{HELP}"),
            "facts" => match handle.facts() {
                Ok(fs) => {
                    for f in fs {
                        println!("{f}");
                    }
                }
                Err(e) => eprintln!("error: {e}"),
            },
            _ => match handle.command(line) {
                Ok(text) if text.is_empty() => {}
                Ok(text) => println!("{text}"),
                Err(e) => eprintln!("error: {e}"),
            },
        }
        out.flush()?;
    }
    Ok(())
}
