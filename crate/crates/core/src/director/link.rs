//! The director's connection to a controller.
//!
//! A reader thread sorts incoming packets: replies and errors go to whoever
//! is waiting in [`DirectorLink::exchange`], break events and errors from
//! stored procedures go to the event callback.

use std::io::{self, Read};
use std::net::{Shutdown, TcpStream, ToSocketAddrs, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::casp::CaspProgram;
use crate::controller::{attach_memory, Inbound, PacketSink, UdpSink, EVENT_SEQ_BASE};
use crate::wire::{decode_packet, DirectionPacket, ErrorCode, FrameDecoder, PacketBody};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkEvent {
    /// The controller stopped; the code of the label whose procedure broke.
    Break(i64),
    /// A stored procedure failed while the program ran.
    ProcedureError(ErrorCode),
    Closed,
}

pub type EventHandler = Box<dyn Fn(LinkEvent) + Send + Sync>;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("controller reported {0}")]
    Controller(ErrorCode),
    #[error("no reply within {0:?}")]
    Timeout(Duration),
    #[error("connection to the controller is closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A director's view of one controller: request/response plus what it
/// knows about the controller's mode.
pub trait Exchange {
    fn exchange(&mut self, program: &CaspProgram) -> Result<i64, LinkError>;
    /// Whether the controller is believed to be interactive.
    fn is_paused(&self) -> bool;
    fn set_paused(&mut self);
    /// Records a resume, unless a break event arrived after `breaks` were
    /// counted: that break has paused the controller again.
    fn set_resumed(&mut self, breaks: u64);
    /// Break events received so far.
    fn break_count(&self) -> u64;
}

#[derive(Default)]
struct Pause {
    paused: bool,
    breaks: u64,
}

#[derive(Default)]
struct Shared {
    pause: Mutex<Pause>,
    closed: AtomicBool,
}

impl Shared {
    fn pause(&self) -> std::sync::MutexGuard<'_, Pause> {
        self.pause.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub struct DirectorLink {
    sink: Box<dyn PacketSink>,
    replies: Receiver<DirectionPacket>,
    shared: Arc<Shared>,
    next_seq: u32,
    timeout: Duration,
    sent: u64,
}

struct Dispatch {
    shared: Arc<Shared>,
    replies: Sender<DirectionPacket>,
    on_event: EventHandler,
}

impl Dispatch {
    fn packet(&self, p: DirectionPacket) {
        match p.body {
            PacketBody::BreakEvent(code) => {
                {
                    let mut p = self.shared.pause();
                    p.paused = true;
                    p.breaks += 1;
                }
                (self.on_event)(LinkEvent::Break(code));
            }
            PacketBody::Error(code) if p.seq >= EVENT_SEQ_BASE => {
                (self.on_event)(LinkEvent::ProcedureError(code));
            }
            PacketBody::Reply(_) | PacketBody::Error(_) => {
                let _ = self.replies.send(p);
            }
            PacketBody::Exec(_) => log::debug!("ignoring EXEC from controller"),
        }
    }

    fn close(self) {
        self.shared.closed.store(true, Ordering::SeqCst);
        (self.on_event)(LinkEvent::Closed);
    }
}

impl DirectorLink {
    fn with_reader(
        sink: Box<dyn PacketSink>,
        on_event: EventHandler,
        reader: impl FnOnce(&Dispatch) + Send + 'static,
    ) -> Self {
        let shared = Arc::new(Shared::default());
        let (tx, rx) = mpsc::channel();
        let d = Dispatch {
            shared: shared.clone(),
            replies: tx,
            on_event,
        };
        thread::spawn(move || {
            reader(&d);
            d.close();
        });
        DirectorLink {
            sink,
            replies: rx,
            shared,
            next_seq: 1,
            timeout: DEFAULT_TIMEOUT,
            sent: 0,
        }
    }

    pub fn connect_tcp(addr: impl ToSocketAddrs, on_event: EventHandler) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut reader = stream.try_clone()?;
        Ok(Self::with_reader(Box::new(stream), on_event, move |d| {
            let mut decoder = FrameDecoder::new();
            let mut buf = [0u8; 8192];
            while let Ok(n @ 1..) = reader.read(&mut buf) {
                for item in decoder.feed(&buf[..n]) {
                    match item {
                        Ok(p) => d.packet(p),
                        Err(e) => log::warn!("bad packet from controller: {e}"),
                    }
                }
                if decoder.is_failed() {
                    let _ = reader.shutdown(Shutdown::Both);
                    return;
                }
            }
        }))
    }

    pub fn connect_udp(addr: impl ToSocketAddrs, on_event: EventHandler) -> io::Result<Self> {
        let peer = addr
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no address"))?;
        let bind = if peer.is_ipv4() {
            "0.0.0.0:0"
        } else {
            "[::]:0"
        };
        let socket = Arc::new(UdpSocket::bind(bind)?);
        socket.connect(peer)?;
        // Announces this director before it has anything to send.
        socket.send(&[])?;
        let reader = socket.clone();
        Ok(Self::with_reader(
            Box::new(UdpSink::new(socket, peer)),
            on_event,
            move |d| {
                let mut buf = vec![0u8; 65_535 + 12];
                while let Ok(n) = reader.recv(&mut buf) {
                    match decode_packet(&buf[..n]) {
                        Ok(p) => d.packet(p),
                        Err(e) => log::warn!("bad packet from controller: {e}"),
                    }
                }
            },
        ))
    }

    /// Attaches to a runtime in the same process.
    pub fn memory(inbox: &Sender<Inbound>, on_event: EventHandler) -> Self {
        let (sink, packets) = attach_memory(inbox);
        Self::with_reader(Box::new(sink), on_event, move |d| {
            for p in packets {
                d.packet(p);
            }
        })
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    pub fn is_closed(&self) -> bool {
        self.shared.closed.load(Ordering::SeqCst)
    }

    /// EXEC packets sent so far.
    pub fn execs_sent(&self) -> u64 {
        self.sent
    }

    /// Sends raw program text and waits for its answer.
    pub fn exchange_text(&mut self, text: &str) -> Result<i64, LinkError> {
        let seq = self.next_seq;
        self.next_seq = if seq + 1 >= EVENT_SEQ_BASE {
            1
        } else {
            seq + 1
        };
        self.sink.send(&DirectionPacket::exec(seq, text))?;
        self.sent += 1;
        loop {
            match self.replies.recv_timeout(self.timeout) {
                Ok(p) if p.seq != seq => log::debug!("dropping stale answer {p:?}"),
                Ok(p) => {
                    return match p.body {
                        PacketBody::Reply(n) => Ok(n),
                        PacketBody::Error(c) => Err(LinkError::Controller(c)),
                        _ => unreachable!("only answers are queued"),
                    }
                }
                Err(RecvTimeoutError::Timeout) => return Err(LinkError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(LinkError::Closed),
            }
        }
    }
}

impl Exchange for DirectorLink {
    fn exchange(&mut self, program: &CaspProgram) -> Result<i64, LinkError> {
        self.exchange_text(&program.to_string())
    }

    fn is_paused(&self) -> bool {
        self.shared.pause().paused
    }

    fn set_paused(&mut self) {
        self.shared.pause().paused = true;
    }

    fn set_resumed(&mut self, breaks: u64) {
        let mut p = self.shared.pause();
        if p.breaks == breaks {
            p.paused = false;
        }
    }

    fn break_count(&self) -> u64 {
        self.shared.pause().breaks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn break_during_resume_keeps_the_link_paused() {
        let (tx, rx) = mpsc::channel();
        let (etx, events) = mpsc::channel();
        let mut link = DirectorLink::memory(
            &tx,
            Box::new(move |e| {
                let _ = etx.send(e);
            }),
        );
        let Ok(Inbound::Attached(mut controller)) = rx.recv() else {
            panic!("expected an attach");
        };
        link.set_paused();
        let before = link.break_count();
        controller
            .send(&DirectionPacket::break_event(EVENT_SEQ_BASE, 1))
            .unwrap();
        assert_eq!(events.recv().unwrap(), LinkEvent::Break(1));
        link.set_resumed(before);
        assert!(link.is_paused());
        link.set_resumed(link.break_count());
        assert!(!link.is_paused());
    }

    #[test]
    fn procedure_errors_are_events_not_answers() {
        let (tx, rx) = mpsc::channel();
        let (etx, events) = mpsc::channel();
        let mut link = DirectorLink::memory(
            &tx,
            Box::new(move |e| {
                let _ = etx.send(e);
            }),
        );
        let Ok(Inbound::Attached(mut controller)) = rx.recv() else {
            panic!("expected an attach");
        };
        controller
            .send(&DirectionPacket::error(
                EVENT_SEQ_BASE + 3,
                ErrorCode::ArrayBounds,
            ))
            .unwrap();
        assert_eq!(
            events.recv().unwrap(),
            LinkEvent::ProcedureError(ErrorCode::ArrayBounds)
        );
        // A stale answer is skipped while waiting for seq 1.
        controller.send(&DirectionPacket::reply(9, 4)).unwrap();
        controller.send(&DirectionPacket::reply(1, 5)).unwrap();
        assert_eq!(link.exchange_text("v").unwrap(), 5);
        drop(controller);
        drop(rx);
        assert_eq!(events.recv().unwrap(), LinkEvent::Closed);
        assert!(link.is_closed());
    }
}
