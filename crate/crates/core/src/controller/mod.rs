//! The controller side: runtime, transports, and a runner that executes a
//! session's program on a thread with room for deep recursion.

mod link;
mod runtime;

use std::io;
use std::net::{SocketAddr, TcpListener, UdpSocket};
use std::str::FromStr;
use std::sync::mpsc::{Receiver, Sender};
use std::thread;

pub use link::{
    attach_memory, serve_tcp, serve_udp, ChannelSink, Inbound, InboxSink, PacketSink, UdpSink,
};
pub use runtime::{Runtime, RuntimeStats, Step, EVENT_SEQ_BASE};

use crate::casp::MachineState;
use crate::host::{Interpreter, RunError, DEFAULT_MAX_CALL_DEPTH};
use crate::session::Session;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transport {
    #[default]
    Tcp,
    Udp,
}

impl FromStr for Transport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tcp" => Ok(Transport::Tcp),
            "udp" => Ok(Transport::Udp),
            other => Err(format!("unknown transport {other}; expected tcp or udp")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuntimeConfig {
    pub pause_at_start: bool,
    pub max_call_depth: usize,
    /// Stack for the interpreter thread.
    pub stack_size: usize,
    pub record_steps: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            pause_at_start: false,
            max_call_depth: DEFAULT_MAX_CALL_DEPTH,
            stack_size: 256 << 20,
            record_steps: false,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub result: Result<i64, RunError>,
    pub state: MachineState,
    pub steps: Vec<Step>,
    pub stats: RuntimeStats,
}

/// Process exit status for a run: the result clamped to 0..=255, or 70 if
/// the program failed.
pub fn exit_status(result: &Result<i64, RunError>) -> u8 {
    match result {
        Ok(n) => (*n).clamp(0, 255) as u8,
        Err(_) => 70,
    }
}

/// Binds `addr` and starts serving directors into `inbox`.
pub fn listen(addr: &str, transport: Transport, inbox: Sender<Inbound>) -> io::Result<SocketAddr> {
    match transport {
        Transport::Tcp => {
            let l = TcpListener::bind(addr)?;
            let local = l.local_addr()?;
            serve_tcp(l, inbox);
            Ok(local)
        }
        Transport::Udp => {
            let s = UdpSocket::bind(addr)?;
            let local = s.local_addr()?;
            serve_udp(s, inbox);
            Ok(local)
        }
    }
}

/// Runs the session's program on the calling thread.
pub fn run_session(
    session: &Session,
    inbox: Receiver<Inbound>,
    config: &RuntimeConfig,
) -> RunOutcome {
    let mut rt = Runtime::new(session, inbox);
    if config.record_steps {
        rt.record_steps();
    }
    if config.pause_at_start {
        rt.pause_at_start();
    }
    let result = Interpreter::new(&session.program)
        .with_max_depth(config.max_call_depth)
        .run(&mut rt);
    rt.finish();
    let (state, steps, stats) = rt.into_parts();
    RunOutcome {
        result,
        state,
        steps,
        stats,
    }
}

/// Runs the session's program on a new thread with `config.stack_size`.
pub fn spawn_session(
    session: Session,
    inbox: Receiver<Inbound>,
    config: RuntimeConfig,
) -> io::Result<thread::JoinHandle<RunOutcome>> {
    thread::Builder::new()
        .name("phd-interpreter".into())
        .stack_size(config.stack_size)
        .spawn(move || run_session(&session, inbox, &config))
}
