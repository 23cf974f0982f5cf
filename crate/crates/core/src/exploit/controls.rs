// SPDX-License-Identifier: Apache-2.0

//! From a crash to a verified type 1 POV.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::fuzz::{execute, CrashInput};
use super::pattern::{cyclic_pattern, pattern_offset_u32, MAX_PATTERN};
use crate::pbf::PandoraBinary;
use crate::pov::{Action, PovScript, PovType, Template, Token};
use crate::range::{SessionConfig, SessionSeeds};
use crate::replay::simulate;
use crate::rng::derive;
use crate::svm::{ExitKind, FaultReason, FaultRecord, Recording};

/// Probe patterns are at least this long, so a crash that only just reached
/// the return address still gets a full pattern behind its prefix.
pub const PROBE_MIN: usize = 256;

/// Mask pair tried when full masks fail verification.
pub const FALLBACK_MASK: u32 = 0x7F7F_7F7F;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayConfig {
    pub vm_seed: u64,
    pub budget: u64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self { vm_seed: 0, budget: 200_000 }
    }
}

fn fault_of(binary: &PandoraBinary, input: &[u8], cfg: ReplayConfig) -> Option<FaultRecord> {
    match execute(binary, input, cfg.vm_seed, cfg.budget, Recording::NONE).kind {
        ExitKind::Faulted(f) => Some(f),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("input does not reproduce a {0} fault")]
pub struct NotReproducible(pub FaultReason);

/// Greedy chunk removal with halving chunk sizes, keeping the fault reason.
pub fn minimize(binary: &PandoraBinary, c: &CrashInput, cfg: ReplayConfig) -> Result<CrashInput, NotReproducible> {
    let reason = c.fault.reason;
    let keeps = |bytes: &[u8]| fault_of(binary, bytes, cfg).filter(|f| f.reason == reason);
    let mut fault = keeps(&c.bytes).ok_or(NotReproducible(reason))?;
    let mut cur = c.bytes.clone();
    let mut chunk = cur.len() / 2;
    while chunk > 0 {
        let mut i = 0;
        while i < cur.len() {
            let end = (i + chunk).min(cur.len());
            let mut cand = cur[..i].to_vec();
            cand.extend_from_slice(&cur[end..]);
            match keeps(&cand) {
                Some(f) => {
                    cur = cand;
                    fault = f;
                }
                None => i += chunk,
            }
        }
        chunk /= 2;
    }
    let edges = execute(binary, &cur, cfg.vm_seed, cfg.budget, Recording::EDGES).edges.len();
    Ok(CrashInput { bytes: cur, fault, edges })
}

/// Which input bytes land in the fault ip and registers. Offsets index the
/// full input, dialog prefix included.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ControlMap {
    pub ip_offset: Option<usize>,
    pub reg_offsets: BTreeMap<u8, usize>,
    pub dialog_prefix: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no suffix probe put a pattern value in the fault ip")]
pub struct NoControl;

fn overlaps(a: usize, b: usize) -> bool {
    a.abs_diff(b) < 4
}

/// Replaces ever shorter suffixes of the crash with a cyclic pattern until the
/// fault ip reads back as pattern bytes.
pub fn locate_controls(binary: &PandoraBinary, c: &CrashInput, cfg: ReplayConfig) -> Result<ControlMap, NoControl> {
    let len = c.bytes.len();
    if len < 4 {
        return Err(NoControl);
    }
    for k in 0..len {
        let plen = (len - k).clamp(PROBE_MIN, MAX_PATTERN);
        let mut probe = c.bytes[..k].to_vec();
        probe.extend(cyclic_pattern(plen).expect("clamped"));
        let Some(f) = fault_of(binary, &probe, cfg) else { continue };
        let Some(ip) = pattern_offset_u32(f.fault_ip, plen) else { continue };
        let ip_offset = k + ip;
        let mut reg_offsets = BTreeMap::new();
        for (r, &v) in f.regs.iter().enumerate() {
            let Some(o) = pattern_offset_u32(v, plen) else { continue };
            let o = k + o;
            if !overlaps(o, ip_offset) && reg_offsets.values().all(|&p| !overlaps(o, p)) {
                reg_offsets.insert(r as u8, o);
            }
        }
        return Ok(ControlMap { ip_offset: Some(ip_offset), reg_offsets, dialog_prefix: c.bytes[..k].to_vec() });
    }
    Err(NoControl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum InsufficientControl {
    #[error("the fault ip is not controlled")]
    NoIp,
    #[error("no register is controlled")]
    NoRegister,
    #[error("control windows overlap or precede the dialog prefix")]
    BadLayout,
}

/// A type 1 POV for `m`: full masks, lowest controlled register.
pub fn synthesize_pov(m: &ControlMap) -> Result<PovScript, InsufficientControl> {
    let ip = m.ip_offset.ok_or(InsufficientControl::NoIp)?;
    let (&regnum, &reg) = m.reg_offsets.iter().next().ok_or(InsufficientControl::NoRegister)?;
    let base = m.dialog_prefix.len();
    if ip < base || reg < base || overlaps(ip, reg) {
        return Err(InsufficientControl::BadLayout);
    }
    let mut fields = [(reg - base, "regvalue"), (ip - base, "ipvalue")];
    fields.sort();
    let mut tokens = Vec::new();
    let mut at = 0;
    for (off, var) in fields {
        if off > at {
            tokens.push(Token::Pad { count: (off - at) as u32, byte: b'a' });
        }
        tokens.push(Token::Var(var.into()));
        at = off + 4;
    }
    let mut actions = alloc::vec![Action::NegotiateType1 { ipmask: u32::MAX, regmask: u32::MAX, regnum: u32::from(regnum) }];
    if !m.dialog_prefix.is_empty() {
        actions.push(Action::Write(Template(alloc::vec![Token::Literal(m.dialog_prefix.clone())])));
    }
    actions.push(Action::Write(Template(tokens)));
    actions.push(Action::WaitClose);
    Ok(PovScript { pov_type: PovType::Type1, actions })
}

fn with_masks(script: &PovScript, mask: u32) -> PovScript {
    let mut s = script.clone();
    for a in &mut s.actions {
        if let Action::NegotiateType1 { ipmask, regmask, .. } = a {
            *ipmask = mask;
            *regmask = mask;
        }
    }
    s
}

/// Seeds for the `i`-th verification trial.
pub fn trial_seeds(seed: u64, i: u64) -> SessionSeeds {
    SessionSeeds::from_server_seed(derive(seed, i))
}

fn all_succeed(script: &PovScript, binary: &PandoraBinary, trials: u64, seed: u64, config: SessionConfig) -> bool {
    (0..trials).all(|i| simulate(binary, script, trial_seeds(seed, i), config).is_ok_and(|r| r.succeeded()))
}

/// The script that verifies: `script` itself, or its 7f-masked variant when
/// full masks fail. `None` if neither holds in every trial.
pub fn verify_and_adjust(
    script: &PovScript,
    binary: &PandoraBinary,
    trials: u64,
    seed: u64,
    config: SessionConfig,
) -> Option<PovScript> {
    if all_succeed(script, binary, trials, seed, config) {
        return Some(script.clone());
    }
    let full = matches!(script.type1_request(), Some((u32::MAX, u32::MAX, _)));
    if full {
        let relaxed = with_masks(script, FALLBACK_MASK);
        if all_succeed(&relaxed, binary, trials, seed, config) {
            return Some(relaxed);
        }
    }
    None
}

pub fn verify_exploit(script: &PovScript, binary: &PandoraBinary, trials: u64, seed: u64) -> bool {
    verify_and_adjust(script, binary, trials, seed, SessionConfig::default()).is_some()
}
