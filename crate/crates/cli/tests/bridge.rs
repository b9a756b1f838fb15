use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::mpsc;
use std::time::Duration;

use phd_cli::bridge;
use phd_core::controller::{spawn_session, RuntimeConfig};
use phd_core::director::{DirectorHandle, DirectorLink};
use phd_core::session::{Session, SessionConfig};
use serde_json::{json, Value};

const COUNTER: &str = include_str!("../../../programs/counter.phd");
const COUNTER_PRE: &str = include_str!("../../../programs/counter.pre");
const WAIT: Duration = Duration::from_secs(20);

fn request(addr: SocketAddr, method: &str, path: &str, body: Option<&Value>) -> (u16, Value) {
    let mut s = TcpStream::connect(addr).unwrap();
    s.set_read_timeout(Some(WAIT)).unwrap();
    let body = body.map(|b| b.to_string()).unwrap_or_default();
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: test\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut text = String::new();
    s.read_to_string(&mut text).unwrap();
    let status = text[9..12].parse().unwrap();
    let (_, payload) = text.split_once("\r\n\r\n").unwrap();
    (status, serde_json::from_str(payload).unwrap_or(Value::Null))
}

/// Streams `/events`, passing each `event:` name on.
fn events(addr: SocketAddr) -> mpsc::Receiver<String> {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET /events HTTP/1.1\r\nHost: test\r\n\r\n").unwrap();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(s).lines() {
            let Ok(line) = line else { return };
            if let Some(name) = line.strip_prefix("event: ") {
                if tx.send(name.to_string()).is_err() {
                    return;
                }
            }
        }
    });
    rx
}

fn next_event(rx: &mpsc::Receiver<String>, want: &str) {
    loop {
        let got = rx.recv_timeout(WAIT).expect("event stream went quiet");
        if got == want {
            return;
        }
    }
}

#[test]
fn bridge_drives_a_session() {
    let session = Session::load(COUNTER, COUNTER_PRE, SessionConfig::default()).unwrap();
    let (tx, rx) = mpsc::channel();
    let config = RuntimeConfig {
        pause_at_start: true,
        ..RuntimeConfig::default()
    };
    let host = spawn_session(session.clone(), rx, config).unwrap();
    let handle =
        DirectorHandle::start(session, |on_event| Ok(DirectorLink::memory(&tx, on_event))).unwrap();
    let (addr, _server) = bridge::spawn("127.0.0.1:0", handle).unwrap();

    assert_eq!(request(addr, "GET", "/facts", None), (200, json!([])));
    let stream = events(addr);
    std::thread::sleep(Duration::from_millis(200));

    let (status, _) = request(
        addr,
        "POST",
        "/command",
        Some(&json!({ "line": "watch v when v = 3" })),
    );
    assert_eq!(status, 200);
    next_event(&stream, "facts");
    assert_eq!(
        request(addr, "GET", "/facts", None),
        (200, json!([{ "tag": "<<w>>", "subject": "v", "bit": 1 }]))
    );

    let (status, body) = request(
        addr,
        "POST",
        "/command",
        Some(&json!({ "line": "frobnicate" })),
    );
    assert_eq!(status, 400);
    assert!(body["error"].is_string());
    assert_eq!(request(addr, "GET", "/trace?var=v", None).0, 400);

    assert_eq!(
        request(
            addr,
            "POST",
            "/command",
            Some(&json!({ "line": "continue" }))
        )
        .0,
        200
    );
    next_event(&stream, "break");
    assert_eq!(
        request(addr, "GET", "/vars?name=v", None),
        (200, json!({ "name": "v", "value": 3 }))
    );
    let (status, body) = request(addr, "POST", "/command", Some(&json!({ "line": "exec w" })));
    assert_eq!((status, &body["value"]), (200, &json!(1)));

    assert_eq!(
        request(
            addr,
            "POST",
            "/command",
            Some(&json!({ "line": "unwatch v" }))
        )
        .0,
        200
    );
    assert_eq!(
        request(
            addr,
            "POST",
            "/command",
            Some(&json!({ "line": "continue" }))
        )
        .0,
        200
    );
    next_event(&stream, "closed");
    assert_eq!(host.join().unwrap().result, Ok(103));
    assert_eq!(request(addr, "GET", "/vars?name=v", None).0, 502);
}
