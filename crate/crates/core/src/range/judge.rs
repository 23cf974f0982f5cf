// SPDX-License-Identifier: Apache-2.0

use alloc::format;
use alloc::string::String;
use core::fmt::Write as _;

use super::verdict::{NegotiationEcho, Verdict};
use crate::pov::wire::{Type1Negotiation, Type1Request, Type2Negotiation};
use crate::rng::SplitMix64;
use crate::isa::NREGS;
use crate::svm::{FaultRecord, Secret, SECRET_ADDR, SECRET_SIZE};

/// Minimum popcount for each type 1 mask unless configured otherwise.
pub const DEFAULT_MASK_FLOOR: u32 = 20;
/// Bytes a type 2 POV must leak.
pub const TYPE2_LENGTH: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum NegotiationRejected {
    #[error("ipmask {mask:08x} has popcount {popcount}, need at least {floor}")]
    WeakIpMask { mask: u32, popcount: u32, floor: u32 },
    #[error("regmask {mask:08x} has popcount {popcount}, need at least {floor}")]
    WeakRegMask { mask: u32, popcount: u32, floor: u32 },
    #[error("regnum {0} is out of range")]
    BadRegnum(u32),
}

/// Accepts or rejects a type 1 request and draws the target values.
pub fn negotiate_type1(
    req: Type1Request,
    rng: &mut SplitMix64,
    floor: u32,
) -> Result<Type1Negotiation, NegotiationRejected> {
    let ip_pop = req.ipmask.count_ones();
    if ip_pop < floor {
        return Err(NegotiationRejected::WeakIpMask { mask: req.ipmask, popcount: ip_pop, floor });
    }
    let reg_pop = req.regmask.count_ones();
    if reg_pop < floor {
        return Err(NegotiationRejected::WeakRegMask { mask: req.regmask, popcount: reg_pop, floor });
    }
    if req.regnum as usize >= NREGS {
        return Err(NegotiationRejected::BadRegnum(req.regnum));
    }
    let ipvalue = rng.next_u32();
    let regvalue = rng.next_u32();
    Ok(Type1Negotiation { ipmask: req.ipmask, regmask: req.regmask, regnum: req.regnum, ipvalue, regvalue })
}

pub fn negotiate_type2() -> Type2Negotiation {
    Type2Negotiation { addr: SECRET_ADDR, size: SECRET_SIZE as u32, length: TYPE2_LENGTH }
}

pub fn judge_type1(fault: Option<&FaultRecord>, n: &Type1Negotiation) -> bool {
    let Some(f) = fault else { return false };
    let Some(&reg) = f.regs.get(n.regnum as usize) else { return false };
    (f.fault_ip & n.ipmask) == (n.ipvalue & n.ipmask) && (reg & n.regmask) == (n.regvalue & n.regmask)
}

pub fn judge_type2(submission: &[u8], secret: &Secret, n: &Type2Negotiation) -> bool {
    if submission.len() != n.length as usize || submission.is_empty() {
        return false;
    }
    let size = (n.size as usize).min(secret.len());
    secret[..size].windows(submission.len()).any(|w| w == submission)
}

/// The human-readable block printed after a replay.
pub fn format_verdict_report(v: &Verdict, name: &str) -> String {
    let mut s = format!("# {name}\n");
    match v.negotiation {
        NegotiationEcho::None => s.push_str("# negotiation type: none"),
        NegotiationEcho::Type1(n) => {
            let _ = write!(
                s,
                "# negotiation type: 1\n# type 1 masks: {:08x} {:08x}\n# type 1 pov: {:08x} {:08x} {}",
                n.ipmask, n.regmask, n.ipvalue, n.regvalue, n.regnum
            );
        }
        NegotiationEcho::Type2(n) => {
            let _ = write!(s, "# negotiation type: 2\n# type 2 pov: {:08x} {:08x} {:08x}", n.addr, n.size, n.length);
        }
    }
    s
}
