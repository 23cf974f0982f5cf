// SPDX-License-Identifier: Apache-2.0

//! Automatic exploitation: fuzz for a crash, shrink it, find which input
//! bytes reach the fault ip and registers, and emit a type 1 POV that is
//! checked against in-process sessions before it is returned.

pub mod controls;
pub mod fuzz;
pub mod pattern;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use controls::{
    locate_controls, minimize, synthesize_pov, trial_seeds, verify_and_adjust, verify_exploit, ControlMap,
    InsufficientControl, NoControl, NotReproducible, ReplayConfig, FALLBACK_MASK, PROBE_MIN,
};
pub use fuzz::{crash_key, fuzz, CrashInput, FuzzConfig, FuzzStats, Fuzzer};
pub use pattern::{cyclic_pattern, pattern_offset, pattern_offset_u32, TooLong, MAX_PATTERN};

use crate::pbf::PandoraBinary;
use crate::pov::{serialize_pov, PovScript};
use crate::range::SessionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub fuzz: FuzzConfig,
    pub replay: ReplayConfig,
    pub trials: u64,
    pub verify_seed: u64,
    pub session: SessionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fuzz: FuzzConfig::default(),
            replay: ReplayConfig::default(),
            trials: 3,
            verify_seed: 0x5645_5249_4659,
            session: SessionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploit {
    pub script: PovScript,
    pub crash: CrashInput,
    pub minimized: CrashInput,
    pub controls: ControlMap,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("fuzzing found no crash")]
    NoCrash,
    #[error("none of {0} crashes led to a verified POV")]
    NoExploit(usize),
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Tries each crash in order; the first one that yields a verified POV wins.
/// Every step is appended to `log`.
pub fn exploit_crashes(
    binary: &PandoraBinary,
    crashes: &[CrashInput],
    config: &PipelineConfig,
    log: &mut Vec<String>,
) -> Result<Exploit, PipelineError> {
    if crashes.is_empty() {
        log.push("no crashes".into());
        return Err(PipelineError::NoCrash);
    }
    for (i, crash) in crashes.iter().enumerate() {
        log.push(format!("crash {i}: {} bytes, {}", crash.bytes.len(), crash.fault));
        log.push(format!("crash {i}: input {}", hex(&crash.bytes)));
        let min = match minimize(binary, crash, config.replay) {
            Ok(m) => m,
            Err(e) => {
                log.push(format!("crash {i}: {e}"));
                continue;
            }
        };
        log.push(format!("crash {i}: minimized to {} bytes: {}", min.bytes.len(), hex(&min.bytes)));
        let controls = match locate_controls(binary, &min, config.replay) {
            Ok(c) => c,
            Err(e) => {
                log.push(format!("crash {i}: {e}"));
                continue;
            }
        };
        log.push(format!(
            "crash {i}: prefix {} bytes, ip offset {:?}, registers {:?}",
            controls.dialog_prefix.len(),
            controls.ip_offset,
            controls.reg_offsets
        ));
        let script = match synthesize_pov(&controls) {
            Ok(s) => s,
            Err(e) => {
                log.push(format!("crash {i}: {e}"));
                continue;
            }
        };
        match verify_and_adjust(&script, binary, config.trials, config.verify_seed, config.session) {
            Some(script) => {
                log.push(format!("crash {i}: verified over {} sessions", config.trials));
                for line in serialize_pov(&script).lines() {
                    log.push(format!("pov: {line}"));
                }
                return Ok(Exploit { script, crash: crash.clone(), minimized: min, controls });
            }
            None => log.push(format!("crash {i}: verification failed")),
        }
    }
    Err(PipelineError::NoExploit(crashes.len()))
}

/// Single-worker pipeline: deterministic for fixed seeds.
pub fn run_pipeline(
    binary: &PandoraBinary,
    seeds: &[Vec<u8>],
    config: &PipelineConfig,
    log: &mut Vec<String>,
) -> Result<Exploit, PipelineError> {
    let crashes = fuzz(binary, seeds, config.fuzz);
    log.push(format!("fuzz: {} execs, {} distinct crashes", config.fuzz.execs, crashes.len()));
    exploit_crashes(binary, &crashes, config, log)
}
