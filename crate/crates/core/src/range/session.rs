// SPDX-License-Identifier: Apache-2.0

//! One range session as a sans-IO state machine.
//!
//! The owner feeds it whatever bytes arrive from the client with
//! [`Session::feed`], reports EOF with [`Session::close_input`], and writes
//! out whatever [`Session::take_output`] returns. The VM runs inside those
//! calls until it blocks on input or ends. Frames are handled one at a time,
//! each followed by a VM run, so the output does not depend on how the
//! transport splits the byte stream.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::frame::{encode_chunked, encode_frame_into, Channel, Frame, FrameDecoder};
use super::judge::{judge_type1, judge_type2, negotiate_type1, negotiate_type2, DEFAULT_MASK_FLOOR};
use super::verdict::{encode_verdict, NegotiationEcho, Success, Verdict, VmEnd};
use crate::pbf::PandoraBinary;
use crate::pov::wire::{
    decode_negotiation, encode_negotiation, MessageKind, NegotiationMessage, Type1Negotiation, Type2Negotiation,
};
use crate::rng::{derive, SplitMix64};
use crate::svm::{ChunkIo, ExitKind, LoadError, MachineState, Recording, Secret, StepResult, DEFAULT_BUDGET, SECRET_SIZE};

const LABEL_SECRET: u64 = 0x5345_4352;
const LABEL_NEGOTIATION: u64 = 0x4E45_474F;
const LABEL_VM: u64 = 0x564D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub budget: u64,
    /// Minimum popcount of each type 1 mask.
    pub mask_floor: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, mask_floor: DEFAULT_MASK_FLOOR }
    }
}

/// `server` drives the secret page and negotiation stream; `vm` seeds the
/// challenge's `random` syscall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionSeeds {
    pub server: u64,
    pub vm: u64,
}

impl SessionSeeds {
    pub fn from_server_seed(server: u64) -> Self {
        Self { server, vm: derive(server, LABEL_VM) }
    }

    /// Seeds for the `index`-th connection of a server started with `seed`.
    /// Connection 0 uses `seed` itself.
    pub fn for_connection(seed: u64, index: u64) -> Self {
        Self::from_server_seed(if index == 0 { seed } else { derive(seed, index) })
    }
}

/// The secret page contents for a server seed.
pub fn secret_page(server_seed: u64) -> Box<Secret> {
    let mut secret = Box::new([0u8; SECRET_SIZE]);
    SplitMix64::new(derive(server_seed, LABEL_SECRET)).fill_bytes(&mut secret[..]);
    secret
}

#[derive(Debug, Clone, Copy)]
enum Negotiated {
    Nothing,
    Type1(Type1Negotiation),
    Type2(Type2Negotiation),
}

pub struct Session {
    config: SessionConfig,
    machine: Option<MachineState>,
    end: Option<ExitKind>,
    io: ChunkIo,
    secret: Box<Secret>,
    rng: SplitMix64,
    negotiated: Negotiated,
    submission: Option<Vec<u8>>,
    decoder: FrameDecoder,
    out: Vec<u8>,
    verdict: Option<Verdict>,
    started: bool,
}

impl Session {
    pub fn new(binary: &PandoraBinary, seeds: SessionSeeds, config: SessionConfig) -> Result<Self, LoadError> {
        let secret = secret_page(seeds.server);
        let mut machine = MachineState::load(binary, seeds.vm, &secret, config.budget)?;
        machine.set_recording(Recording::NONE);
        Ok(Self {
            config,
            machine: Some(machine),
            end: None,
            io: ChunkIo::new(),
            secret,
            rng: SplitMix64::new(derive(seeds.server, LABEL_NEGOTIATION)),
            negotiated: Negotiated::Nothing,
            submission: None,
            decoder: FrameDecoder::new(),
            out: Vec::new(),
            verdict: None,
            started: false,
        })
    }

    pub fn secret(&self) -> &Secret {
        &self.secret
    }

    /// Runs the VM up to its first blocking read. Idempotent; `feed` and
    /// `close_input` call it implicitly.
    pub fn start(&mut self) {
        if !self.started {
            self.started = true;
            self.pump();
        }
    }

    pub fn feed(&mut self, bytes: &[u8]) {
        self.start();
        if self.verdict.is_some() {
            return;
        }
        self.decoder.push(bytes);
        loop {
            match self.decoder.next_frame() {
                Ok(Some(frame)) => {
                    self.handle(frame);
                    if self.verdict.is_some() {
                        return;
                    }
                    self.pump();
                }
                Ok(None) => return,
                Err(e) => return self.finish_error(format!("protocol error: {e}")),
            }
        }
    }

    /// The client will send nothing more.
    pub fn close_input(&mut self) {
        self.start();
        if self.verdict.is_some() {
            return;
        }
        if self.decoder.pending() > 0 {
            return self.finish_error("protocol error: connection closed inside a frame".into());
        }
        self.io.close();
        self.pump();
    }

    /// Ends the session early, e.g. on a transport timeout.
    pub fn abort(&mut self, note: &str) {
        if self.verdict.is_none() {
            self.finish_error(note.to_string());
        }
    }

    pub fn take_output(&mut self) -> Vec<u8> {
        core::mem::take(&mut self.out)
    }

    pub fn is_finished(&self) -> bool {
        self.verdict.is_some()
    }

    pub fn verdict(&self) -> Option<&Verdict> {
        self.verdict.as_ref()
    }

    fn handle(&mut self, frame: Frame) {
        match frame.channel {
            Channel::Stdin => {
                if self.end.is_none() {
                    self.io.push(frame.payload);
                }
            }
            Channel::Negotiation => self.negotiation_frame(&frame.payload),
            ch => self.finish_error(format!("protocol error: client sent on channel {}", ch as u8)),
        }
    }

    fn negotiation_frame(&mut self, payload: &[u8]) {
        match self.negotiated {
            Negotiated::Nothing => {}
            Negotiated::Type2(_) if self.submission.is_none() => {
                self.submission = Some(payload.to_vec());
                return;
            }
            _ => return self.finish_error("protocol error: second negotiation".into()),
        }
        let response = match decode_negotiation(MessageKind::Request, payload) {
            Ok(NegotiationMessage::Type1Request(req)) => match negotiate_type1(req, &mut self.rng, self.config.mask_floor) {
                Ok(n) => {
                    self.negotiated = Negotiated::Type1(n);
                    NegotiationMessage::Type1Response { ipvalue: n.ipvalue, regvalue: n.regvalue }
                }
                Err(e) => return self.finish_error(format!("negotiation rejected: {e}")),
            },
            Ok(NegotiationMessage::Type2Request) => {
                let n = negotiate_type2();
                self.negotiated = Negotiated::Type2(n);
                NegotiationMessage::Type2Response(n)
            }
            Ok(_) => unreachable!("request decoding yields requests only"),
            Err(e) => return self.finish_error(format!("protocol error: {e}")),
        };
        encode_frame_into(&Frame::new(Channel::Negotiation, encode_negotiation(&response)), &mut self.out);
    }

    fn pump(&mut self) {
        if let Some(m) = self.machine.as_mut() {
            let r = m.run_until_blocked(&mut self.io);
            for chunk in self.io.take_sent() {
                encode_chunked(Channel::Stdout, &chunk, &mut self.out);
            }
            let end = match r {
                StepResult::Blocked => None,
                StepResult::Exited(s) => Some(ExitKind::Exited(s)),
                StepResult::Faulted(f) => Some(ExitKind::Faulted(f)),
                StepResult::BudgetExhausted => Some(ExitKind::BudgetExhausted),
                StepResult::Continue => unreachable!(),
            };
            if end.is_some() {
                self.end = end;
                self.machine = None;
            }
        }
        let Some(end) = &self.end else { return };
        if matches!(self.negotiated, Negotiated::Type2(_)) && self.submission.is_none() && !self.io.is_closed() {
            return;
        }
        let (success, negotiation) = match self.negotiated {
            Negotiated::Nothing => (Success::None, NegotiationEcho::None),
            Negotiated::Type1(n) => {
                let ok = judge_type1(end.fault(), &n);
                (if ok { Success::Type1 } else { Success::None }, NegotiationEcho::Type1(n))
            }
            Negotiated::Type2(n) => {
                let ok = self.submission.as_deref().is_some_and(|s| judge_type2(s, &self.secret, &n));
                (if ok { Success::Type2 } else { Success::None }, NegotiationEcho::Type2(n))
            }
        };
        let end = VmEnd::from(end.clone());
        self.finish(Verdict { end, success, negotiation, note: String::new() });
    }

    fn finish_error(&mut self, note: String) {
        let end = self.end.clone().map_or(VmEnd::Aborted, VmEnd::from);
        let negotiation = match self.negotiated {
            Negotiated::Nothing => NegotiationEcho::None,
            Negotiated::Type1(n) => NegotiationEcho::Type1(n),
            Negotiated::Type2(n) => NegotiationEcho::Type2(n),
        };
        self.machine = None;
        self.finish(Verdict { end, success: Success::None, negotiation, note });
    }

    fn finish(&mut self, v: Verdict) {
        encode_frame_into(&Frame::new(Channel::Verdict, encode_verdict(&v)), &mut self.out);
        self.verdict = Some(v);
    }
}

/// Runs a session against a complete client byte stream, closing the input
/// after it. Returns every byte the server sent and the verdict.
pub fn run_scripted_session(
    binary: &PandoraBinary,
    client_bytes: &[u8],
    seeds: SessionSeeds,
    config: SessionConfig,
) -> Result<(Vec<u8>, Verdict), LoadError> {
    let mut s = Session::new(binary, seeds, config)?;
    s.feed(client_bytes);
    s.close_input();
    let out = s.take_output();
    let v = s.verdict.take().expect("a closed session always reaches a verdict");
    Ok((out, v))
}
