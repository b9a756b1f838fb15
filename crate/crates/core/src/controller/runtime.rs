//! The embedded controller: the state machine the host interpreter calls
//! into at every extension point.
//!
//! Director packets are only looked at while the program is stopped at an
//! extension point or after it has finished, so host statements never run
//! while the controller is interactive.

use std::collections::HashSet;
use std::sync::mpsc::{Receiver, TryRecvError};

use super::link::{Inbound, PacketSink};
use crate::casp::{
    eval_in_place, parse_casp, CaspError, CaspParseError, CaspProgram, Context, LabelCodec,
    MachineState, Mode,
};
use crate::host::{Controller, RunError};
use crate::label::Label;
use crate::session::Session;
use crate::wire::{DirectionPacket, ErrorCode, PacketBody};

/// Sequence numbers of packets the controller sends on its own (break
/// events, errors from stored procedures) start here, above anything a
/// director uses.
pub const EVENT_SEQ_BASE: u32 = 0x8000_0000;

/// One observable step, recorded when [`Runtime::record_steps`] is on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// A host statement ran while the controller was in this mode.
    Statement(Mode),
    /// A director program ran, starting in this mode.
    Exec(Mode),
    /// A BREAK_EVENT went out with this code.
    Break(i64),
    /// An interactive round ended.
    Resumed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuntimeStats {
    pub execs: u64,
    pub replies: u64,
    pub errors: u64,
    pub break_events: u64,
}

pub struct Runtime {
    codec: LabelCodec,
    globals: HashSet<String>,
    state: MachineState,
    mode: Mode,
    inbox: Receiver<Inbound>,
    inbox_open: bool,
    sink: Option<Box<dyn PacketSink>>,
    event_seq: u32,
    steps: Option<Vec<Step>>,
    stats: RuntimeStats,
}

fn error_code(e: &CaspError) -> ErrorCode {
    ErrorCode::from_u16(e.code()).expect("every evaluation error has a wire code")
}

impl Runtime {
    pub fn new(session: &Session, inbox: Receiver<Inbound>) -> Self {
        Runtime {
            codec: session.codec.clone(),
            globals: session.program.globals.iter().cloned().collect(),
            state: session.initial.clone(),
            mode: Mode::Batch,
            inbox,
            inbox_open: true,
            sink: None,
            event_seq: EVENT_SEQ_BASE,
            steps: None,
            stats: RuntimeStats::default(),
        }
    }

    pub fn record_steps(&mut self) {
        self.steps.get_or_insert_with(Vec::new);
    }

    pub fn steps(&self) -> &[Step] {
        self.steps.as_deref().unwrap_or(&[])
    }

    pub fn state(&self) -> &MachineState {
        &self.state
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn stats(&self) -> RuntimeStats {
        self.stats
    }

    pub fn into_parts(self) -> (MachineState, Vec<Step>, RuntimeStats) {
        (self.state, self.steps.unwrap_or_default(), self.stats)
    }

    fn record(&mut self, s: Step) {
        if let Some(steps) = &mut self.steps {
            steps.push(s);
        }
    }

    fn send(&mut self, p: DirectionPacket) {
        match &p.body {
            PacketBody::Reply(_) => self.stats.replies += 1,
            PacketBody::Error(_) => self.stats.errors += 1,
            PacketBody::BreakEvent(_) => self.stats.break_events += 1,
            PacketBody::Exec(_) => {}
        }
        if let Some(sink) = &mut self.sink {
            if let Err(e) = sink.send(&p) {
                log::warn!("director unreachable ({e}); continuing without it");
                self.sink = None;
            }
        }
    }

    fn next_event_seq(&mut self) -> u32 {
        let s = self.event_seq;
        self.event_seq = self.event_seq.wrapping_add(1) | EVENT_SEQ_BASE;
        s
    }

    fn recv(&mut self, block: bool) -> Option<Inbound> {
        if !self.inbox_open {
            return None;
        }
        let r = if block {
            self.inbox.recv().map_err(|_| TryRecvError::Disconnected)
        } else {
            self.inbox.try_recv()
        };
        match r {
            Ok(m) => Some(m),
            Err(TryRecvError::Empty) => None,
            Err(TryRecvError::Disconnected) => {
                self.inbox_open = false;
                None
            }
        }
    }

    /// Handles connection bookkeeping; returns the packet, if any.
    fn admin(&mut self, msg: Inbound) -> Option<DirectionPacket> {
        match msg {
            Inbound::Attached(s) => {
                log::info!("director attached");
                self.sink = Some(s);
                None
            }
            Inbound::Detached => {
                log::info!("director detached");
                self.sink = None;
                None
            }
            Inbound::Malformed(e) => {
                log::warn!("malformed packet: {e}");
                self.send(DirectionPacket::error(0, ErrorCode::Parse));
                None
            }
            Inbound::Packet(p) => Some(p),
        }
    }

    fn parse(&mut self, seq: u32, text: &str) -> Option<CaspProgram> {
        match parse_casp(text) {
            Ok(p) => Some(p),
            Err(e) => {
                let code = match e {
                    CaspParseError::NestedPlacement(_) => ErrorCode::NestedPlacement,
                    CaspParseError::Syntax { .. } => ErrorCode::Parse,
                };
                self.send(DirectionPacket::error(seq, code));
                None
            }
        }
    }

    fn exec(&mut self, seq: u32, prog: &CaspProgram, here: Option<&Label>) -> Option<Mode> {
        self.stats.execs += 1;
        self.record(Step::Exec(self.mode));
        let ctx = here.map_or(Context::Session, Context::At);
        match eval_in_place(&self.codec, ctx, &mut self.state, self.mode, prog) {
            Ok((m, n)) => {
                self.send(DirectionPacket::reply(seq, n));
                Some(m)
            }
            Err(e) => {
                self.send(DirectionPacket::error(seq, error_code(&e)));
                None
            }
        }
    }

    /// Runs every EXEC already queued, in batch mode. One that switches to
    /// interactive mode starts a round at `here`.
    fn drain(&mut self, here: Option<&Label>) {
        while let Some(msg) = self.recv(false) {
            let Some(p) = self.admin(msg) else { continue };
            let PacketBody::Exec(text) = &p.body else {
                log::debug!("ignoring {:?} from director", p.body);
                continue;
            };
            let Some(prog) = self.parse(p.seq, text) else {
                continue;
            };
            if prog.ends_in_continue() {
                self.stats.execs += 1;
                self.send(DirectionPacket::error(p.seq, ErrorCode::NotInteractive));
                continue;
            }
            if self.exec(p.seq, &prog, here) == Some(Mode::Interactive) {
                self.interactive_round(here);
            }
        }
    }

    /// Serves the director until a program switches back to batch mode. With
    /// no director attached, returns at once.
    fn interactive_round(&mut self, here: Option<&Label>) {
        self.mode = Mode::Interactive;
        while self.mode == Mode::Interactive {
            if self.sink.is_none() {
                log::info!("no director attached; resuming");
                break;
            }
            let Some(msg) = self.recv(true) else { break };
            let Some(p) = self.admin(msg) else { continue };
            let PacketBody::Exec(text) = &p.body else {
                log::debug!("ignoring {:?} from director", p.body);
                continue;
            };
            let Some(prog) = self.parse(p.seq, text) else {
                continue;
            };
            if let Some(m) = self.exec(p.seq, &prog, here) {
                self.mode = m;
            }
        }
        self.mode = Mode::Batch;
        self.record(Step::Resumed);
    }

    fn announce_break(&mut self, code: i64, here: Option<&Label>) {
        if self.sink.is_none() {
            log::info!("break (code {code}) with no director attached; continuing");
            return;
        }
        let seq = self.next_event_seq();
        self.send(DirectionPacket::break_event(seq, code));
        self.record(Step::Break(code));
        self.interactive_round(here);
    }

    /// Waits for a director, reports a break with code 0 and serves it
    /// before the program starts.
    pub fn pause_at_start(&mut self) {
        while self.sink.is_none() {
            let Some(msg) = self.recv(true) else { return };
            if let Some(p) = self.admin(msg) {
                log::debug!("ignoring {:?} before attach", p.body);
            }
        }
        self.announce_break(0, None);
    }

    /// Serves whatever the director sent before the program finished, then
    /// closes the connection.
    pub fn finish(&mut self) {
        self.drain(None);
        if let Some(mut sink) = self.sink.take() {
            sink.close();
        }
    }
}

impl Controller for Runtime {
    fn load(&self, var: &str) -> Option<i64> {
        if self.globals.contains(var) {
            self.state.counter(var)
        } else {
            None
        }
    }

    fn store(&mut self, var: &str, value: i64) -> bool {
        if !self.globals.contains(var) {
            return false;
        }
        match self.state.counters.get_mut(var) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    fn extension_point(&mut self, labels: &[Label]) -> Result<(), RunError> {
        let here = labels.first();
        self.drain(here);
        let mut first_break = None;
        for l in labels {
            let sp = match self.state.procedures.get(l) {
                None | Some(CaspProgram::Continue) => continue,
                Some(sp) => sp.clone(),
            };
            match eval_in_place(
                &self.codec,
                Context::At(l),
                &mut self.state,
                Mode::Batch,
                &sp,
            ) {
                Ok((Mode::Interactive, n)) => {
                    first_break.get_or_insert((n, l));
                }
                Ok(_) => {}
                Err(e) => {
                    log::warn!("stored procedure at {l} failed: {e}");
                    let seq = self.next_event_seq();
                    self.send(DirectionPacket::error(seq, error_code(&e)));
                }
            }
        }
        if let Some((code, l)) = first_break {
            self.announce_break(code, Some(l));
        }
        Ok(())
    }

    fn before_statement(&mut self) {
        if self.steps.is_some() {
            self.record(Step::Statement(self.mode));
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::mpsc;

    use super::*;
    use crate::controller::link::ChannelSink;
    use crate::host::run;
    use crate::session::SessionConfig;

    const SRC: &str = "int v int main(){ v := 1; extend{L}; v := v + 1; return v }";

    fn setup() -> (
        Runtime,
        mpsc::Sender<Inbound>,
        mpsc::Receiver<DirectionPacket>,
    ) {
        let s = Session::load(SRC, "", SessionConfig::default()).unwrap();
        let (tx, rx) = mpsc::channel();
        let (out_tx, out_rx) = mpsc::channel();
        tx.send(Inbound::Attached(Box::new(ChannelSink(out_tx))))
            .unwrap();
        let mut rt = Runtime::new(&s, rx);
        rt.record_steps();
        (rt, tx, out_rx)
    }

    fn exec(seq: u32, text: &str) -> Inbound {
        Inbound::Packet(DirectionPacket::exec(seq, text))
    }

    #[test]
    fn queued_execs_run_at_the_next_extension_point() {
        let (mut rt, tx, out) = setup();
        tx.send(exec(1, "v")).unwrap();
        tx.send(exec(2, "continue")).unwrap();
        tx.send(exec(3, "@L:{break}")).unwrap();
        tx.send(exec(4, "((")).unwrap();
        drop(tx);
        assert_eq!(
            run(
                &Session::load(SRC, "", SessionConfig::default())
                    .unwrap()
                    .program,
                &mut rt
            ),
            Ok(2)
        );
        let got: Vec<_> = out.try_iter().collect();
        assert_eq!(
            got,
            [
                DirectionPacket::reply(1, 0),
                DirectionPacket::error(2, ErrorCode::NotInteractive),
                DirectionPacket::error(3, ErrorCode::PlacementInBatch),
                DirectionPacket::error(4, ErrorCode::Parse),
            ]
        );
    }

    #[test]
    fn break_event_then_interactive_round() {
        let (mut rt, tx, out) = setup();
        let p = Session::load(SRC, "", SessionConfig::default())
            .unwrap()
            .program;
        let l = rt.codec.label_code(&Label::new("L").unwrap()).unwrap();
        tx.send(exec(1, "break")).unwrap();
        tx.send(exec(2, "@L:{if v = 1 then break else continue}"))
            .unwrap();
        tx.send(exec(3, "continue")).unwrap();
        let host = std::thread::spawn(move || (run(&p, &mut rt), rt));
        let mut got: Vec<_> = out.iter().take(4).collect();
        tx.send(exec(4, "v := 40")).unwrap();
        tx.send(exec(5, "continue")).unwrap();
        drop(tx);
        let (result, rt) = host.join().unwrap();
        assert_eq!(result, Ok(41));
        got.extend(out.try_iter());
        assert_eq!(
            got,
            [
                DirectionPacket::reply(1, 0),
                DirectionPacket::reply(2, l),
                DirectionPacket::reply(3, 0),
                DirectionPacket::break_event(EVENT_SEQ_BASE, l),
                DirectionPacket::reply(4, 40),
                DirectionPacket::reply(5, l),
            ]
        );
        assert!(rt
            .steps()
            .iter()
            .all(|s| *s != Step::Statement(Mode::Interactive)));
    }

    #[test]
    fn fails_open_without_a_director() {
        let s = Session::load(SRC, "", SessionConfig::default()).unwrap();
        let (tx, rx) = mpsc::channel();
        let mut rt = Runtime::new(&s, rx);
        rt.state
            .procedures
            .insert(Label::new("L").unwrap(), CaspProgram::Break);
        drop(tx);
        assert_eq!(run(&s.program, &mut rt), Ok(2));
        assert_eq!(rt.stats().break_events, 0);
    }

    #[test]
    fn failing_procedure_reports_and_continues() {
        let (mut rt, tx, out) = setup();
        rt.state
            .procedures
            .insert(Label::new("L").unwrap(), parse_casp("inc nope").unwrap());
        drop(tx);
        let p = Session::load(SRC, "", SessionConfig::default())
            .unwrap()
            .program;
        assert_eq!(run(&p, &mut rt), Ok(2));
        let got: Vec<_> = out.try_iter().collect();
        assert_eq!(
            got,
            [DirectionPacket::error(
                EVENT_SEQ_BASE,
                ErrorCode::UnknownIdentifier
            )]
        );
    }

    #[test]
    fn pause_at_start_uses_session_context() {
        let (mut rt, tx, out) = setup();
        tx.send(exec(1, "v := 7")).unwrap();
        tx.send(exec(2, "continue")).unwrap();
        rt.pause_at_start();
        let got: Vec<_> = out.try_iter().collect();
        assert_eq!(
            got,
            [
                DirectionPacket::break_event(EVENT_SEQ_BASE, 0),
                DirectionPacket::reply(1, 7),
                DirectionPacket::reply(2, 0),
            ]
        );
    }
}
