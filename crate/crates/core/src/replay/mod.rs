// SPDX-License-Identifier: Apache-2.0

//! The POV client as a sans-IO machine, plus an in-process driver that pairs
//! it with a [`Session`].
//!
//! A transport loop looks like:
//!
//! ```text
//! loop {
//!     send(replayer.take_output());
//!     if replayer.wants_close() { shutdown(Write) }
//!     match replayer.status() { Done => break, Waiting => {} }
//!     match recv() { Data(b) => replayer.feed(b), Eof => replayer.peer_closed() }
//! }
//! ```

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::pbf::PandoraBinary;
use crate::pov::wire::{
    decode_negotiation, encode_negotiation, MessageKind, NegotiationMessage, Type1Request,
};
use crate::pov::{substitute, Action, Bindings, PovError, PovScript, PovType};
use crate::range::frame::{encode_chunked, Channel, Frame, FrameDecoder};
use crate::range::{decode_verdict, format_verdict_report, Session, SessionConfig, SessionSeeds, Success, Verdict};
use crate::svm::LoadError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("connect failed: {0}")]
    Connect(String),
    #[error("timed out after {0} ms")]
    Timeout(u64),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("action {action}: {msg}")]
    ReadMismatch { action: usize, msg: String },
    #[error(transparent)]
    Script(#[from] PovError),
    #[error("client and server are both waiting")]
    Stalled,
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// One entry of what crossed the wire, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptEntry {
    Sent(Frame),
    Received(Frame),
    HalfClosed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayResult {
    pub pov_type: PovType,
    pub verdict: Verdict,
    pub transcript: Vec<TranscriptEntry>,
}

impl ReplayResult {
    pub fn report(&self, name: &str) -> String {
        format_verdict_report(&self.verdict, name)
    }

    /// Whether the verdict matches what the script set out to prove.
    pub fn succeeded(&self) -> bool {
        matches!(
            (self.pov_type, self.verdict.success),
            (PovType::Type1, Success::Type1) | (PovType::Type2, Success::Type2)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Needs more bytes from the server.
    Waiting,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Waiting {
    Nothing,
    Negotiation(MessageKind),
    Verdict,
}

pub struct Replayer {
    script: PovScript,
    pc: usize,
    bindings: Bindings,
    stdout: Vec<u8>,
    decoder: FrameDecoder,
    out: Vec<u8>,
    waiting: Waiting,
    close_requested: bool,
    peer_closed: bool,
    transcript: Vec<TranscriptEntry>,
    verdict: Option<Verdict>,
    /// Set once the verdict is in and buffered output has been checked
    /// against the remaining reads.
    settled: bool,
    error: Option<ReplayError>,
}

impl Replayer {
    pub fn new(script: PovScript) -> Result<Self, ReplayError> {
        script.validate()?;
        let mut r = Self {
            script,
            pc: 0,
            bindings: Bindings::default(),
            stdout: Vec::new(),
            decoder: FrameDecoder::new(),
            out: Vec::new(),
            waiting: Waiting::Nothing,
            close_requested: false,
            peer_closed: false,
            transcript: Vec::new(),
            verdict: None,
            settled: false,
            error: None,
        };
        r.advance();
        Ok(r)
    }

    pub fn take_output(&mut self) -> Vec<u8> {
        core::mem::take(&mut self.out)
    }

    /// True once the client has nothing more to send; the transport should
    /// shut down its write half.
    pub fn wants_close(&self) -> bool {
        self.close_requested
    }

    pub fn status(&self) -> Status {
        if self.settled || self.error.is_some() {
            Status::Done
        } else {
            Status::Waiting
        }
    }

    pub fn feed(&mut self, bytes: &[u8]) {
        if self.status() == Status::Done {
            return;
        }
        self.decoder.push(bytes);
        loop {
            match self.decoder.next_frame() {
                Ok(Some(f)) => {
                    self.receive(f);
                    self.advance();
                    if self.verdict.is_some() {
                        self.settled = true;
                    }
                    if self.status() == Status::Done {
                        return;
                    }
                }
                Ok(None) => return,
                Err(e) => return self.fail(ReplayError::Protocol(format!("{e}"))),
            }
        }
    }

    pub fn peer_closed(&mut self) {
        self.peer_closed = true;
        if self.status() == Status::Waiting {
            self.advance();
        }
        if self.status() == Status::Waiting {
            self.fail(ReplayError::Protocol("connection closed before the verdict".into()));
        }
    }

    /// Records a transcript entry for the transport's half-close.
    pub fn note_half_close(&mut self) {
        if !self.transcript.contains(&TranscriptEntry::HalfClosed) {
            self.transcript.push(TranscriptEntry::HalfClosed);
        }
    }

    pub fn finish(self) -> Result<ReplayResult, ReplayError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        match self.verdict {
            Some(verdict) => Ok(ReplayResult { pov_type: self.script.pov_type, verdict, transcript: self.transcript }),
            None => Err(ReplayError::Protocol("no verdict received".into())),
        }
    }

    fn fail(&mut self, e: ReplayError) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }

    fn send(&mut self, channel: Channel, payload: &[u8]) {
        let start = self.out.len();
        encode_chunked(channel, payload, &mut self.out);
        let mut d = FrameDecoder::new();
        d.push(&self.out[start..]);
        while let Ok(Some(f)) = d.next_frame() {
            self.transcript.push(TranscriptEntry::Sent(f));
        }
    }

    fn receive(&mut self, f: Frame) {
        self.transcript.push(TranscriptEntry::Received(f.clone()));
        match f.channel {
            Channel::Stdout => self.stdout.extend_from_slice(&f.payload),
            Channel::Verdict => match decode_verdict(&f.payload) {
                Ok(v) => self.verdict = Some(v),
                Err(e) => self.fail(ReplayError::Protocol(format!("bad verdict: {e}"))),
            },
            Channel::Negotiation => {
                let Waiting::Negotiation(kind) = self.waiting else {
                    return self.fail(ReplayError::Protocol("unexpected negotiation frame".into()));
                };
                match decode_negotiation(kind, &f.payload) {
                    Ok(NegotiationMessage::Type1Response { ipvalue, regvalue }) => {
                        self.bindings.set_word("ipvalue", ipvalue);
                        self.bindings.set_word("regvalue", regvalue);
                    }
                    Ok(NegotiationMessage::Type2Response(n)) => {
                        self.bindings.set_word("addr", n.addr);
                        self.bindings.set_word("size", n.size);
                        self.bindings.set_word("length", n.length);
                    }
                    Ok(_) => unreachable!("response kinds decode to responses"),
                    Err(e) => return self.fail(ReplayError::Protocol(format!("{e}"))),
                }
                self.waiting = Waiting::Nothing;
                self.pc += 1;
            }
            Channel::Stdin => self.fail(ReplayError::Protocol("server sent on the stdin channel".into())),
        }
    }

    /// Runs actions until one needs server input. Once the verdict is in,
    /// writes are dropped and reads can only use what already arrived.
    fn advance(&mut self) {
        while self.error.is_none() && !self.settled && self.waiting == Waiting::Nothing {
            let Some(action) = self.script.actions.get(self.pc).cloned() else {
                self.close();
                return;
            };
            let idx = self.pc;
            let mismatch = |msg: String| ReplayError::ReadMismatch { action: idx + 1, msg };
            match action {
                Action::Write(t) => match substitute(&t, &self.bindings) {
                    Ok(_) if self.verdict.is_some() => {}
                    Ok(bytes) => self.send(Channel::Stdin, &bytes),
                    Err(e) => return self.fail(e.into()),
                },
                Action::ReadN { count, capture } => {
                    let n = count as usize;
                    if self.stdout.len() < n {
                        if self.input_over() {
                            let have = self.stdout.len();
                            return self.fail(mismatch(format!("wanted {n} bytes, the server sent {have}")));
                        }
                        return;
                    }
                    let got: Vec<u8> = self.stdout.drain(..n).collect();
                    if let Some(name) = capture {
                        self.bindings.set_buffer(&name, got);
                    }
                }
                Action::ReadUntil { delim, capture } => {
                    let Some(i) = self.stdout.iter().position(|&b| b == delim) else {
                        if self.input_over() {
                            return self.fail(mismatch(format!("delimiter {delim:02x} never arrived")));
                        }
                        return;
                    };
                    let got: Vec<u8> = self.stdout.drain(..=i).collect();
                    if let Some(name) = capture {
                        self.bindings.set_buffer(&name, got);
                    }
                }
                Action::NegotiateType1 { .. } | Action::NegotiateType2 | Action::SubmitType2 { .. }
                    if self.verdict.is_some() =>
                {
                    return;
                }
                Action::NegotiateType1 { ipmask, regmask, regnum } => {
                    let m = NegotiationMessage::Type1Request(Type1Request { ipmask, regmask, regnum });
                    self.send(Channel::Negotiation, &encode_negotiation(&m));
                    self.waiting = Waiting::Negotiation(MessageKind::Type1Response);
                    return;
                }
                Action::NegotiateType2 => {
                    self.send(Channel::Negotiation, &encode_negotiation(&NegotiationMessage::Type2Request));
                    self.waiting = Waiting::Negotiation(MessageKind::Type2Response);
                    return;
                }
                Action::Slice { source, offset, len, dest } => {
                    let Some(src) = self.bindings.bytes_of(&source) else {
                        return self.fail(PovError::UnboundVariable { line: idx + 1, name: source }.into());
                    };
                    let (o, l) = (offset as usize, len as usize);
                    let Some(part) = src.get(o..o.saturating_add(l)) else {
                        let have = src.len();
                        return self.fail(mismatch(format!("slice {o}+{l} of `{source}` ({have} bytes)")));
                    };
                    let part = part.to_vec();
                    self.bindings.set_buffer(&dest, part);
                }
                Action::SubmitType2 { var } => {
                    let Some(bytes) = self.bindings.bytes_of(&var) else {
                        return self.fail(PovError::UnboundVariable { line: idx + 1, name: var }.into());
                    };
                    self.send(Channel::Negotiation, &bytes);
                }
                Action::WaitClose => {
                    self.close();
                    return;
                }
            }
            self.pc += 1;
        }
    }

    fn input_over(&self) -> bool {
        self.peer_closed || self.verdict.is_some()
    }

    fn close(&mut self) {
        self.close_requested = true;
        self.waiting = Waiting::Verdict;
    }
}

/// Replays `script` against an in-process session: no sockets, same bytes.
pub fn simulate(
    binary: &PandoraBinary,
    script: &PovScript,
    seeds: SessionSeeds,
    config: SessionConfig,
) -> Result<ReplayResult, ReplayError> {
    let mut server = Session::new(binary, seeds, config)?;
    let mut client = Replayer::new(script.clone())?;
    server.start();
    let mut closed = false;
    loop {
        let to_server = client.take_output();
        let progressed_out = !to_server.is_empty();
        server.feed(&to_server);
        if client.wants_close() && !closed {
            closed = true;
            client.note_half_close();
            server.close_input();
        }
        let to_client = server.take_output();
        let progressed_in = !to_client.is_empty();
        client.feed(&to_client);
        if client.status() == Status::Done {
            break;
        }
        if server.is_finished() && !progressed_in {
            client.peer_closed();
            break;
        }
        if !progressed_out && !progressed_in && !(client.wants_close() && !closed) {
            return Err(ReplayError::Stalled);
        }
    }
    client.finish()
}
