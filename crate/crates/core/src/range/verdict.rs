// SPDX-License-Identifier: Apache-2.0

//! The verdict a session ends with, and its binary encoding on channel 3.
//!
//! ```text
//! u8   version (1)
//! u8   crashed (0/1)
//! u8   success (0 none, 1 type 1, 2 type 2)
//! u8   end (0 exited, 1 faulted, 2 budget exhausted, 3 aborted)
//! u32  exit status (0 unless exited)
//! -- if faulted --
//! u8   reason (0 exec, 1 read, 2 write, 3 invalid opcode, 4 stack)
//! u8   has access address (0/1)
//! u16  zero
//! u32  fault_ip, insn_ip, access address (0 if absent)
//! u32  r0 .. r7
//! -- always --
//! u8   negotiation type (0 none, 1, 2), u8[3] zero
//! u32  ipmask regmask regnum ipvalue regvalue     (type 1)
//! u32  addr size length                           (type 2)
//! u16  note length, then that many UTF-8 bytes
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::pov::wire::{Type1Negotiation, Type2Negotiation};
use crate::svm::{ExitKind, FaultReason, FaultRecord};

pub const VERDICT_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Success {
    None,
    Type1,
    Type2,
}

impl fmt::Display for Success {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Success::None => "none",
            Success::Type1 => "type1",
            Success::Type2 => "type2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegotiationEcho {
    None,
    Type1(Type1Negotiation),
    Type2(Type2Negotiation),
}

/// How the VM side of a session ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VmEnd {
    Exited(u32),
    Faulted(FaultRecord),
    BudgetExhausted,
    /// The session stopped before the VM did (protocol error, rejected
    /// negotiation).
    Aborted,
}

impl From<ExitKind> for VmEnd {
    fn from(k: ExitKind) -> Self {
        match k {
            ExitKind::Exited(s) => VmEnd::Exited(s),
            ExitKind::Faulted(f) => VmEnd::Faulted(f),
            ExitKind::BudgetExhausted => VmEnd::BudgetExhausted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub end: VmEnd,
    pub success: Success,
    pub negotiation: NegotiationEcho,
    /// Empty unless something went wrong.
    pub note: String,
}

impl Verdict {
    pub fn crashed(&self) -> bool {
        matches!(self.end, VmEnd::Faulted(_))
    }

    pub fn fault(&self) -> Option<&FaultRecord> {
        match &self.end {
            VmEnd::Faulted(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum VerdictError {
    #[error("verdict payload truncated")]
    Truncated,
    #[error("unsupported verdict version {0}")]
    Version(u8),
    #[error("bad {field} value {value}")]
    BadField { field: &'static str, value: u32 },
    #[error("verdict note is not UTF-8")]
    Note,
    #[error("{0} trailing bytes after verdict")]
    Trailing(usize),
}

const REASONS: [FaultReason; 5] = [
    FaultReason::ExecFault,
    FaultReason::ReadFault,
    FaultReason::WriteFault,
    FaultReason::InvalidOpcode,
    FaultReason::StackFault,
];

fn put(out: &mut Vec<u8>, w: u32) {
    out.extend_from_slice(&w.to_le_bytes());
}

pub fn encode_verdict(v: &Verdict) -> Vec<u8> {
    let mut out = Vec::with_capacity(96);
    let end = match v.end {
        VmEnd::Exited(_) => 0,
        VmEnd::Faulted(_) => 1,
        VmEnd::BudgetExhausted => 2,
        VmEnd::Aborted => 3,
    };
    let success = match v.success {
        Success::None => 0,
        Success::Type1 => 1,
        Success::Type2 => 2,
    };
    out.extend_from_slice(&[VERDICT_VERSION, v.crashed() as u8, success, end]);
    put(&mut out, if let VmEnd::Exited(s) = v.end { s } else { 0 });
    if let VmEnd::Faulted(f) = &v.end {
        let reason = REASONS.iter().position(|r| *r == f.reason).unwrap() as u8;
        out.extend_from_slice(&[reason, f.access_addr.is_some() as u8, 0, 0]);
        put(&mut out, f.fault_ip);
        put(&mut out, f.insn_ip);
        put(&mut out, f.access_addr.unwrap_or(0));
        for r in f.regs {
            put(&mut out, r);
        }
    }
    match v.negotiation {
        NegotiationEcho::None => out.extend_from_slice(&[0; 4]),
        NegotiationEcho::Type1(n) => {
            out.extend_from_slice(&[1, 0, 0, 0]);
            for w in [n.ipmask, n.regmask, n.regnum, n.ipvalue, n.regvalue] {
                put(&mut out, w);
            }
        }
        NegotiationEcho::Type2(n) => {
            out.extend_from_slice(&[2, 0, 0, 0]);
            for w in [n.addr, n.size, n.length] {
                put(&mut out, w);
            }
        }
    }
    let mut n = v.note.len().min(u16::MAX as usize);
    while !v.note.is_char_boundary(n) {
        n -= 1;
    }
    let note = &v.note.as_bytes()[..n];
    out.extend_from_slice(&(note.len() as u16).to_le_bytes());
    out.extend_from_slice(note);
    out
}

struct Reader<'a> {
    b: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], VerdictError> {
        if self.b.len() < n {
            return Err(VerdictError::Truncated);
        }
        let (head, rest) = self.b.split_at(n);
        self.b = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, VerdictError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, VerdictError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn bad(field: &'static str, value: impl Into<u32>) -> VerdictError {
    VerdictError::BadField { field, value: value.into() }
}

pub fn decode_verdict(bytes: &[u8]) -> Result<Verdict, VerdictError> {
    let mut r = Reader { b: bytes };
    let version = r.u8()?;
    if version != VERDICT_VERSION {
        return Err(VerdictError::Version(version));
    }
    let crashed = r.u8()?;
    let success = match r.u8()? {
        0 => Success::None,
        1 => Success::Type1,
        2 => Success::Type2,
        s => return Err(bad("success", s)),
    };
    let end_kind = r.u8()?;
    let status = r.u32()?;
    let end = match end_kind {
        0 => VmEnd::Exited(status),
        1 => {
            let reason = r.u8()?;
            let reason = *REASONS.get(usize::from(reason)).ok_or(bad("reason", reason))?;
            let has_access = r.u8()?;
            if has_access > 1 {
                return Err(bad("access flag", has_access));
            }
            if r.take(2)? != [0, 0] {
                return Err(bad("padding", 1u32));
            }
            let fault_ip = r.u32()?;
            let insn_ip = r.u32()?;
            let access = r.u32()?;
            let mut regs = [0; 8];
            for reg in &mut regs {
                *reg = r.u32()?;
            }
            let access_addr = (has_access == 1).then_some(access);
            VmEnd::Faulted(FaultRecord { reason, fault_ip, insn_ip, access_addr, regs })
        }
        2 => VmEnd::BudgetExhausted,
        3 => VmEnd::Aborted,
        e => return Err(bad("end", e)),
    };
    if end_kind != 0 && status != 0 {
        return Err(bad("status", status));
    }
    if crashed != u8::from(end_kind == 1) {
        return Err(bad("crashed", crashed));
    }
    let neg = r.take(4)?;
    if neg[1..] != [0, 0, 0] {
        return Err(bad("padding", 1u32));
    }
    let negotiation = match neg[0] {
        0 => NegotiationEcho::None,
        1 => NegotiationEcho::Type1(Type1Negotiation {
            ipmask: r.u32()?,
            regmask: r.u32()?,
            regnum: r.u32()?,
            ipvalue: r.u32()?,
            regvalue: r.u32()?,
        }),
        2 => NegotiationEcho::Type2(Type2Negotiation { addr: r.u32()?, size: r.u32()?, length: r.u32()? }),
        t => return Err(bad("negotiation type", t)),
    };
    let len = u16::from_le_bytes([r.u8()?, r.u8()?]);
    let note = core::str::from_utf8(r.take(usize::from(len))?).map_err(|_| VerdictError::Note)?;
    if !r.b.is_empty() {
        return Err(VerdictError::Trailing(r.b.len()));
    }
    Ok(Verdict { end, success, negotiation, note: note.into() })
}
