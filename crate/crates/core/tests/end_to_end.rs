use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::mpsc;
use std::time::Duration;

use phd_core::controller::{listen, spawn_session, RuntimeConfig, Transport, EVENT_SEQ_BASE};
use phd_core::director::{Director, DirectorLink, LinkEvent, Outcome};
use phd_core::session::{Session, SessionConfig};
use phd_core::wire::{encode_packet, DirectionPacket, ErrorCode, FrameDecoder};

const COUNTER: &str = include_str!("../../../programs/counter.phd");
const COUNTER_PRE: &str = include_str!("../../../programs/counter.pre");
const WAIT: Duration = Duration::from_secs(20);

fn session() -> Session {
    Session::load(COUNTER, COUNTER_PRE, SessionConfig::default()).unwrap()
}

fn start(
    transport: Transport,
) -> (
    SocketAddr,
    std::thread::JoinHandle<phd_core::controller::RunOutcome>,
) {
    let (tx, rx) = mpsc::channel();
    let addr = listen("127.0.0.1:0", transport, tx).unwrap();
    let config = RuntimeConfig {
        pause_at_start: true,
        ..RuntimeConfig::default()
    };
    (addr, spawn_session(session(), rx, config).unwrap())
}

fn watch_then_finish(transport: Transport) {
    let (addr, host) = start(transport);
    let (etx, events) = mpsc::channel();
    let on_event = Box::new(move |e| {
        let _ = etx.send(e);
    });
    let link = match transport {
        Transport::Tcp => DirectorLink::connect_tcp(addr, on_event).unwrap(),
        Transport::Udp => DirectorLink::connect_udp(addr, on_event).unwrap(),
    };
    let mut d = Director::new(session(), link);
    assert_eq!(events.recv_timeout(WAIT).unwrap(), LinkEvent::Break(0));

    d.issue_line("watch v when v = 3").unwrap();
    d.issue_line("continue").unwrap();
    let LinkEvent::Break(code) = events.recv_timeout(WAIT).unwrap() else {
        panic!("expected a break");
    };
    assert!(code > 0);
    assert_eq!(d.issue_line("print v").unwrap(), Outcome::Value(3));
    assert_eq!(d.issue_line("print w").unwrap(), Outcome::Value(1));
    d.issue_line("unwatch v").unwrap();
    d.issue_line("continue").unwrap();
    let out = host.join().unwrap();
    // Only a stream can tell the director the session is over.
    if transport == Transport::Tcp {
        assert_eq!(events.recv_timeout(WAIT).unwrap(), LinkEvent::Closed);
    }
    assert_eq!(out.result, Ok(103));
    assert_eq!(out.stats.break_events, 2);
}

#[test]
fn tcp_watch_session() {
    watch_then_finish(Transport::Tcp);
}

#[test]
fn udp_watch_session() {
    watch_then_finish(Transport::Udp);
}

fn read_packet(s: &mut TcpStream, dec: &mut FrameDecoder) -> Option<DirectionPacket> {
    let mut buf = [0u8; 256];
    loop {
        if let Some(p) = dec.next_packet() {
            return Some(p.unwrap());
        }
        let n = s.read(&mut buf).ok()?;
        if n == 0 {
            return None;
        }
        dec.push(&buf[..n]);
    }
}

#[test]
fn raw_client_sees_the_protocol() {
    let (addr, host) = start(Transport::Tcp);
    let mut s = TcpStream::connect(addr).unwrap();
    s.set_read_timeout(Some(WAIT)).unwrap();
    let mut dec = FrameDecoder::new();
    assert_eq!(
        read_packet(&mut s, &mut dec),
        Some(DirectionPacket::break_event(EVENT_SEQ_BASE, 0))
    );

    // A second director is turned away.
    let mut other = TcpStream::connect(addr).unwrap();
    other.set_read_timeout(Some(WAIT)).unwrap();
    assert_eq!(
        read_packet(&mut other, &mut FrameDecoder::new()),
        Some(DirectionPacket::error(0, ErrorCode::NotInteractive))
    );

    // Well-framed packet of an unknown kind.
    s.write_all(b"DIRP\x01\x09\x00\x00\x00\x05\x00\x00")
        .unwrap();
    assert_eq!(
        read_packet(&mut s, &mut dec),
        Some(DirectionPacket::error(0, ErrorCode::Parse))
    );

    for (seq, text) in [
        (1, "w := 9"),
        (2, "@NOPE:{break}"),
        (3, "(("),
        (4, "continue"),
    ] {
        s.write_all(&encode_packet(&DirectionPacket::exec(seq, text)).unwrap())
            .unwrap();
    }
    assert_eq!(
        read_packet(&mut s, &mut dec),
        Some(DirectionPacket::reply(1, 9))
    );
    assert_eq!(
        read_packet(&mut s, &mut dec),
        Some(DirectionPacket::error(2, ErrorCode::UnknownLabel))
    );
    assert_eq!(
        read_packet(&mut s, &mut dec),
        Some(DirectionPacket::error(3, ErrorCode::Parse))
    );
    assert_eq!(
        read_packet(&mut s, &mut dec),
        Some(DirectionPacket::reply(4, 0))
    );
    assert_eq!(read_packet(&mut s, &mut dec), None);
    // `w := 9` set at the start is overwritten by main's first statement.
    assert_eq!(host.join().unwrap().result, Ok(103));
}

#[test]
fn breakpoint_by_position_over_tcp() {
    let (addr, host) = start(Transport::Tcp);
    let (etx, events) = mpsc::channel();
    let link = DirectorLink::connect_tcp(
        addr,
        Box::new(move |e| {
            let _ = etx.send(e);
        }),
    )
    .unwrap();
    let mut d = Director::new(session(), link);
    assert_eq!(events.recv_timeout(WAIT).unwrap(), LinkEvent::Break(0));
    d.issue_line("break main/0").unwrap();
    d.issue_line("break LOOP").unwrap();
    d.issue_line("unbreak LOOP").unwrap();
    d.issue_line("continue").unwrap();
    assert!(matches!(events.recv_timeout(WAIT).unwrap(), LinkEvent::Break(c) if c > 0));
    // main/0 stops before `w := 0` runs.
    assert_eq!(d.issue_line("print w").unwrap(), Outcome::Value(0));
    d.issue_line("exec v := 50; continue").unwrap();
    assert_eq!(events.recv_timeout(WAIT).unwrap(), LinkEvent::Closed);
    // step(1) makes w = v = 51, so the second step is skipped.
    assert_eq!(host.join().unwrap().result, Ok(151));
}
