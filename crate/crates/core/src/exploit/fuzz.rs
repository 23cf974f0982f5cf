// SPDX-License-Identifier: Apache-2.0

//! Edge-coverage-guided mutational fuzzing over stdin.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::pbf::PandoraBinary;
use crate::rng::SplitMix64;
use crate::svm::{run_with_io, ExitKind, FaultReason, FaultRecord, LineIo, Recording, SECRET_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    /// Total executions, seeds included.
    pub execs: u64,
    pub rng_seed: u64,
    /// Seed for the challenge's own `random` syscall.
    pub vm_seed: u64,
    /// Instruction budget per execution.
    pub budget: u64,
    pub max_len: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self { execs: 50_000, rng_seed: 0, vm_seed: 0, budget: 200_000, max_len: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrashInput {
    pub bytes: Vec<u8>,
    pub fault: FaultRecord,
    /// Distinct edges the crashing run covered.
    pub edges: usize,
}

impl CrashInput {
    /// Crashes with equal keys are considered the same bug.
    pub fn key(&self) -> (FaultReason, u32) {
        crash_key(&self.fault)
    }
}

pub fn crash_key(f: &FaultRecord) -> (FaultReason, u32) {
    (f.reason, f.insn_ip)
}

pub(crate) const FUZZ_SECRET: [u8; SECRET_SIZE] = [0; SECRET_SIZE];

/// Result of one local execution.
pub(crate) struct Exec {
    pub kind: ExitKind,
    pub edges: BTreeSet<(u32, u32)>,
}

pub(crate) fn execute(binary: &PandoraBinary, input: &[u8], vm_seed: u64, budget: u64, recording: Recording) -> Exec {
    let mut io = LineIo::new(input);
    match run_with_io(binary, vm_seed, &FUZZ_SECRET, &mut io, budget, recording) {
        Ok((kind, m)) => Exec { kind, edges: m.edges().clone() },
        // Unloadable binaries and blocking are impossible with LineIo over a
        // verified image; treat as a clean exit so fuzzing just finds nothing.
        Err(_) => Exec { kind: ExitKind::Exited(0), edges: BTreeSet::new() },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FuzzStats {
    pub execs: u64,
    pub corpus: usize,
    pub edges: usize,
    pub crashes: usize,
}

pub struct Fuzzer<'a> {
    binary: &'a PandoraBinary,
    config: FuzzConfig,
    rng: SplitMix64,
    seeds: VecDeque<Vec<u8>>,
    corpus: Vec<Vec<u8>>,
    seen: BTreeSet<(u32, u32)>,
    keys: BTreeSet<(FaultReason, u32)>,
    crashes: Vec<CrashInput>,
    execs: u64,
}

impl<'a> Fuzzer<'a> {
    pub fn new(binary: &'a PandoraBinary, seeds: &[Vec<u8>], config: FuzzConfig) -> Self {
        let mut seeds: VecDeque<Vec<u8>> = seeds.iter().cloned().collect();
        if seeds.is_empty() {
            seeds.push_back(Vec::new());
        }
        Self {
            binary,
            config,
            rng: SplitMix64::new(config.rng_seed),
            seeds,
            corpus: Vec::new(),
            seen: BTreeSet::new(),
            keys: BTreeSet::new(),
            crashes: Vec::new(),
            execs: 0,
        }
    }

    pub fn execs(&self) -> u64 {
        self.execs
    }

    pub fn done(&self) -> bool {
        self.execs >= self.config.execs
    }

    pub fn stats(&self) -> FuzzStats {
        FuzzStats { execs: self.execs, corpus: self.corpus.len(), edges: self.seen.len(), crashes: self.crashes.len() }
    }

    pub fn crashes(&self) -> &[CrashInput] {
        &self.crashes
    }

    pub fn into_crashes(self) -> Vec<CrashInput> {
        self.crashes
    }

    /// Runs one input. Returns the crash if it is a new one.
    pub fn exec_one(&mut self) -> Option<&CrashInput> {
        let (input, is_seed) = match self.seeds.pop_front() {
            Some(s) => (s, true),
            None => (self.mutate(), false),
        };
        self.execs += 1;
        let run = execute(self.binary, &input, self.config.vm_seed, self.config.budget, Recording::EDGES);
        let before = self.seen.len();
        self.seen.extend(run.edges.iter().copied());
        let new_edges = self.seen.len() > before;
        if let ExitKind::Faulted(fault) = run.kind {
            if self.keys.insert(crash_key(&fault)) {
                self.crashes.push(CrashInput { bytes: input, fault, edges: run.edges.len() });
                return self.crashes.last();
            }
        } else if new_edges || is_seed {
            self.corpus.push(input);
        }
        None
    }

    fn pick(&mut self) -> &[u8] {
        if self.corpus.is_empty() {
            return &[];
        }
        let i = self.rng.below(self.corpus.len() as u64) as usize;
        &self.corpus[i]
    }

    fn mutate(&mut self) -> Vec<u8> {
        let mut data = self.pick().to_vec();
        let rounds = 1 + self.rng.below(4);
        for _ in 0..rounds {
            self.mutate_once(&mut data);
        }
        data.truncate(self.config.max_len);
        data
    }

    fn mutate_once(&mut self, data: &mut Vec<u8>) {
        let rng = &mut self.rng;
        let pos = |rng: &mut SplitMix64, len: usize| rng.below(len as u64 + 1) as usize;
        match rng.below(5) {
            // bit flip
            0 if !data.is_empty() => {
                let i = rng.below(data.len() as u64) as usize;
                data[i] ^= 1 << rng.below(8);
            }
            // byte randomization
            1 if !data.is_empty() => {
                let i = rng.below(data.len() as u64) as usize;
                data[i] = rng.next_u32() as u8;
            }
            // block duplication
            2 if !data.is_empty() => {
                let start = rng.below(data.len() as u64) as usize;
                let len = 1 + rng.below((data.len() - start).min(32) as u64) as usize;
                let block = data[start..start + len].to_vec();
                let at = pos(rng, data.len());
                data.splice(at..at, block);
            }
            // splice with another corpus entry
            3 if self.corpus.len() > 1 => {
                let other = self.corpus[self.rng.below(self.corpus.len() as u64) as usize].clone();
                let cut = pos(&mut self.rng, data.len());
                let from = pos(&mut self.rng, other.len());
                data.truncate(cut);
                data.extend_from_slice(&other[from..]);
            }
            // length extension: a random block at a random position
            _ => {
                let len = 1 + rng.below(64) as usize;
                let mut block = alloc::vec![0u8; len];
                rng.fill_bytes(&mut block);
                let at = pos(rng, data.len());
                data.splice(at..at, block);
            }
        }
    }
}

/// Fuzzes until `config.execs` executions, returning one input per distinct
/// crash in discovery order.
pub fn fuzz(binary: &PandoraBinary, seeds: &[Vec<u8>], config: FuzzConfig) -> Vec<CrashInput> {
    let mut f = Fuzzer::new(binary, seeds, config);
    while !f.done() {
        f.exec_one();
    }
    f.into_crashes()
}
