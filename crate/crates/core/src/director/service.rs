//! A director on its own thread, so a terminal and an HTTP bridge can drive
//! the same session. Commands are queued and run one at a time.

use std::io;
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread;

use thiserror::Error;

use super::{
    render_break, Director, DirectorError, DirectorLink, EventHandler, LinkEvent, Outcome,
};
use crate::direction::DirectorFact;
use crate::session::Session;
use crate::wire::ErrorCode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServiceEvent {
    Break { code: i64, text: String },
    ProcedureError(ErrorCode),
    Facts(Vec<DirectorFact>),
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    /// The command was malformed or cannot be issued in this session.
    #[error("{0}")]
    BadCommand(String),
    /// The controller refused the command or could not be reached.
    #[error("{0}")]
    Controller(String),
    #[error("director service has stopped")]
    Stopped,
}

impl From<DirectorError> for ServiceError {
    fn from(e: DirectorError) -> Self {
        if e.is_command_error() {
            ServiceError::BadCommand(e.to_string())
        } else {
            ServiceError::Controller(e.to_string())
        }
    }
}

type Reply<T> = Sender<Result<T, ServiceError>>;

enum Request {
    Line(String, Reply<Outcome>),
    Facts(Reply<Vec<DirectorFact>>),
}

type Subscribers = Arc<Mutex<Vec<Sender<ServiceEvent>>>>;

fn broadcast(subs: &Subscribers, e: &ServiceEvent) {
    let mut subs = subs.lock().unwrap_or_else(|p| p.into_inner());
    subs.retain(|s| s.send(e.clone()).is_ok());
}

#[derive(Clone)]
pub struct DirectorHandle {
    tx: Sender<Request>,
    subscribers: Subscribers,
}

impl DirectorHandle {
    /// Connects with `connect` and serves commands on a new thread.
    pub fn start(
        session: Session,
        connect: impl FnOnce(EventHandler) -> io::Result<DirectorLink>,
    ) -> io::Result<Self> {
        let subscribers: Subscribers = Arc::default();
        let subs = subscribers.clone();
        let image = session.clone();
        let link = connect(Box::new(move |e| {
            let e = match e {
                LinkEvent::Break(code) => ServiceEvent::Break {
                    code,
                    text: render_break(&image, code),
                },
                LinkEvent::ProcedureError(c) => ServiceEvent::ProcedureError(c),
                LinkEvent::Closed => ServiceEvent::Closed,
            };
            broadcast(&subs, &e);
        }))?;
        let (tx, rx) = mpsc::channel::<Request>();
        let subs = subscribers.clone();
        thread::Builder::new()
            .name("phd-director".into())
            .spawn(move || {
                let mut d = Director::new(session, link);
                for req in rx {
                    match req {
                        Request::Line(line, reply) => {
                            let before = d.fact_list();
                            let r = d.issue_line(&line);
                            let after = d.fact_list();
                            let _ = reply.send(r.map_err(ServiceError::from));
                            if before != after {
                                broadcast(&subs, &ServiceEvent::Facts(after));
                            }
                        }
                        Request::Facts(reply) => {
                            let _ = reply.send(Ok(d.fact_list()));
                        }
                    }
                }
            })?;
        Ok(DirectorHandle { tx, subscribers })
    }

    fn call<T>(&self, make: impl FnOnce(Reply<T>) -> Request) -> Result<T, ServiceError> {
        let (tx, rx) = mpsc::channel();
        self.tx.send(make(tx)).map_err(|_| ServiceError::Stopped)?;
        rx.recv().map_err(|_| ServiceError::Stopped)?
    }

    /// Issues one direction command.
    pub fn issue(&self, line: &str) -> Result<Outcome, ServiceError> {
        let line = line.to_string();
        self.call(|r| Request::Line(line, r))
    }

    /// Issues one direction command and returns its rendered output.
    pub fn command(&self, line: &str) -> Result<String, ServiceError> {
        self.issue(line).map(|o| o.to_string())
    }

    pub fn facts(&self) -> Result<Vec<DirectorFact>, ServiceError> {
        self.call(Request::Facts)
    }

    pub fn subscribe(&self) -> Receiver<ServiceEvent> {
        let (tx, rx) = mpsc::channel();
        self.subscribers
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .push(tx);
        rx
    }
}
