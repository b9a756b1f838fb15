//! Packet transports.
//!
//! Network threads turn whatever arrives into [`Inbound`] messages on the
//! runtime's mailbox. The runtime answers through the [`PacketSink`] handed
//! over with [`Inbound::Attached`].

use std::fmt;
use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use crate::wire::{
    decode_packet, encode_packet, DirectionPacket, ErrorCode, FrameDecoder, WireError,
};

/// Largest datagram accepted over UDP.
const MAX_DATAGRAM: usize = 65_535 + 12;

pub trait PacketSink: Send {
    fn send(&mut self, p: &DirectionPacket) -> io::Result<()>;

    /// Called once the controller has nothing more to say.
    fn close(&mut self) {}
}

fn encode(p: &DirectionPacket) -> io::Result<Vec<u8>> {
    encode_packet(p).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))
}

impl PacketSink for TcpStream {
    fn send(&mut self, p: &DirectionPacket) -> io::Result<()> {
        self.write_all(&encode(p)?)
    }

    fn close(&mut self) {
        let _ = self.shutdown(Shutdown::Both);
    }
}

pub struct UdpSink {
    socket: Arc<UdpSocket>,
    peer: SocketAddr,
}

impl UdpSink {
    pub fn new(socket: Arc<UdpSocket>, peer: SocketAddr) -> Self {
        UdpSink { socket, peer }
    }
}

impl PacketSink for UdpSink {
    fn send(&mut self, p: &DirectionPacket) -> io::Result<()> {
        self.socket.send_to(&encode(p)?, self.peer).map(|_| ())
    }
}

/// Delivers packets to an in-process receiver.
pub struct ChannelSink(pub Sender<DirectionPacket>);

impl PacketSink for ChannelSink {
    fn send(&mut self, p: &DirectionPacket) -> io::Result<()> {
        self.0
            .send(p.clone())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "receiver gone"))
    }
}

pub enum Inbound {
    Attached(Box<dyn PacketSink>),
    Packet(DirectionPacket),
    Malformed(WireError),
    Detached,
}

impl fmt::Debug for Inbound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inbound::Attached(_) => f.write_str("Attached"),
            Inbound::Packet(p) => f.debug_tuple("Packet").field(p).finish(),
            Inbound::Malformed(e) => f.debug_tuple("Malformed").field(e).finish(),
            Inbound::Detached => f.write_str("Detached"),
        }
    }
}

/// The director's end of an in-process link. Packets pass through the wire
/// encoding on the way in. Dropping it detaches.
pub struct InboxSink {
    inbox: Sender<Inbound>,
}

impl PacketSink for InboxSink {
    fn send(&mut self, p: &DirectionPacket) -> io::Result<()> {
        let msg = match decode_packet(&encode(p)?) {
            Ok(p) => Inbound::Packet(p),
            Err(e) => Inbound::Malformed(e),
        };
        self.inbox
            .send(msg)
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "controller gone"))
    }
}

impl Drop for InboxSink {
    fn drop(&mut self) {
        let _ = self.inbox.send(Inbound::Detached);
    }
}

/// Attaches an in-process director to a runtime mailbox.
pub fn attach_memory(inbox: &Sender<Inbound>) -> (InboxSink, Receiver<DirectionPacket>) {
    let (tx, rx) = mpsc::channel();
    let _ = inbox.send(Inbound::Attached(Box::new(ChannelSink(tx))));
    (
        InboxSink {
            inbox: inbox.clone(),
        },
        rx,
    )
}

/// Accepts director connections. While one is attached, further connections
/// get an ERROR 7 and are closed.
pub fn serve_tcp(listener: TcpListener, inbox: Sender<Inbound>) -> JoinHandle<()> {
    let attached = Arc::new(AtomicBool::new(false));
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            if attached.swap(true, Ordering::SeqCst) {
                log::info!("refusing second director connection");
                let _ = stream.send(&DirectionPacket::error(0, ErrorCode::NotInteractive));
                let _ = stream.shutdown(Shutdown::Both);
                continue;
            }
            let _ = stream.set_nodelay(true);
            let sink = match stream.try_clone() {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("cannot clone director stream: {e}");
                    attached.store(false, Ordering::SeqCst);
                    continue;
                }
            };
            if inbox.send(Inbound::Attached(Box::new(sink))).is_err() {
                return;
            }
            let inbox = inbox.clone();
            let attached = attached.clone();
            thread::spawn(move || {
                read_stream(stream, &inbox);
                attached.store(false, Ordering::SeqCst);
                let _ = inbox.send(Inbound::Detached);
            });
        }
    })
}

fn read_stream(mut stream: TcpStream, inbox: &Sender<Inbound>) {
    let mut decoder = FrameDecoder::new();
    let mut buf = [0u8; 8192];
    loop {
        let n = match stream.read(&mut buf) {
            Ok(0) | Err(_) => return,
            Ok(n) => n,
        };
        for item in decoder.feed(&buf[..n]) {
            let msg = match item {
                Ok(p) => Inbound::Packet(p),
                Err(e) => Inbound::Malformed(e),
            };
            if inbox.send(msg).is_err() {
                return;
            }
        }
        if decoder.is_failed() {
            log::warn!("unrecoverable framing error, dropping director");
            let _ = stream.shutdown(Shutdown::Both);
            return;
        }
    }
}

/// Serves directors over UDP, one packet per datagram. The first peer to
/// send becomes the director; others are refused with ERROR 7. An empty
/// datagram only announces the sender.
pub fn serve_udp(socket: UdpSocket, inbox: Sender<Inbound>) -> JoinHandle<()> {
    let socket = Arc::new(socket);
    thread::spawn(move || {
        let mut peer: Option<SocketAddr> = None;
        let mut buf = vec![0u8; MAX_DATAGRAM];
        loop {
            let Ok((n, from)) = socket.recv_from(&mut buf) else {
                return;
            };
            match peer {
                Some(p) if p != from => {
                    let mut refuse = UdpSink::new(socket.clone(), from);
                    let _ = refuse.send(&DirectionPacket::error(0, ErrorCode::NotInteractive));
                    continue;
                }
                Some(_) => {}
                None => {
                    peer = Some(from);
                    let sink = UdpSink::new(socket.clone(), from);
                    if inbox.send(Inbound::Attached(Box::new(sink))).is_err() {
                        return;
                    }
                }
            }
            if n == 0 {
                continue;
            }
            let msg = match decode_packet(&buf[..n]) {
                Ok(p) => Inbound::Packet(p),
                Err(e) => Inbound::Malformed(e),
            };
            if inbox.send(msg).is_err() {
                return;
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::PacketBody;

    #[test]
    fn memory_link_round_trips_and_detaches() {
        let (tx, rx) = mpsc::channel();
        let (mut sink, _from_controller) = attach_memory(&tx);
        assert!(matches!(rx.recv().unwrap(), Inbound::Attached(_)));
        sink.send(&DirectionPacket::exec(3, "print")).unwrap();
        match rx.recv().unwrap() {
            Inbound::Packet(p) => assert_eq!(p.body, PacketBody::Exec("print".into())),
            other => panic!("{other:?}"),
        }
        drop(sink);
        assert!(matches!(rx.recv().unwrap(), Inbound::Detached));
    }

    #[test]
    fn tcp_refuses_second_director() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        serve_tcp(listener, tx);
        let mut first = TcpStream::connect(addr).unwrap();
        assert!(matches!(rx.recv().unwrap(), Inbound::Attached(_)));
        let mut second = TcpStream::connect(addr).unwrap();
        let mut bytes = Vec::new();
        second.read_to_end(&mut bytes).unwrap();
        assert_eq!(
            decode_packet(&bytes).unwrap(),
            DirectionPacket::error(0, ErrorCode::NotInteractive)
        );
        first.send(&DirectionPacket::exec(1, "x")).unwrap();
        assert!(matches!(rx.recv().unwrap(), Inbound::Packet(_)));
        drop(first);
        assert!(matches!(rx.recv().unwrap(), Inbound::Detached));
    }

    #[test]
    fn tcp_bad_magic_drops_connection() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        serve_tcp(listener, tx);
        let mut s = TcpStream::connect(addr).unwrap();
        assert!(matches!(rx.recv().unwrap(), Inbound::Attached(_)));
        s.write_all(b"NOPE\x01\x01\0\0\0\0\0\0").unwrap();
        assert!(matches!(rx.recv().unwrap(), Inbound::Malformed(e) if e.is_fatal()));
        assert!(matches!(rx.recv().unwrap(), Inbound::Detached));
    }
}
