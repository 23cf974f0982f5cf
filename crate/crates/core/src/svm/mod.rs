// SPDX-License-Identifier: Apache-2.0

//! The sandboxed VM that runs PBF challenge binaries.
//!
//! Execution is fully deterministic: the only inputs are the binary, the
//! syscall-7 PRNG seed, the secret page contents, the bytes offered on fd 0
//! (and their chunking) and the instruction budget.
//!
//! Address space:
//!
//! | range                       | perms | contents                   |
//! |-----------------------------|-------|----------------------------|
//! | section vaddrs              | r-x / rw- | code and data sections |
//! | `0x43470000..0x43471000`    | r--   | per-session secret page    |
//! | `0x50000000..0xb0000000`    | rw-   | `allocate` arena (bump)    |
//! | `0xba000000..0xbaaab000`    | rw-   | stack, `r7 = 0xbaaaaffc`   |
//!
//! Syscalls (`SYS`, number in `r0`, result in `r0`):
//!
//! | r0 | name       | arguments             | result                         |
//! |----|------------|-----------------------|--------------------------------|
//! | 1  | terminate  | r1 status             | run ends with `Exited(status)` |
//! | 2  | transmit   | r1 fd, r2 addr, r3 len| bytes written                  |
//! | 3  | receive    | r1 fd, r2 addr, r3 len| bytes read, 0 once closed      |
//! | 4  | fdwait     |                       | bit 0 set if fd 0 is readable  |
//! | 5  | allocate   | r1 len                | page-aligned address, 0 on failure |
//! | 6  | deallocate | r1 addr, r2 len       | 0 on success, 1 on failure     |
//! | 7  | random     | r1 addr, r2 len       | len                            |
//!
//! A bad fd or unknown syscall number yields `0xffffffff`. Buffers passed to
//! transmit, receive and random must be entirely readable (transmit) or
//! writable (receive, random); otherwise the machine faults.

mod io;
pub mod memory;

pub use io::{ChunkIo, LineIo, Recv, SysIo};
pub use memory::{Access, AccessError, Memory, Region, RegionKind};

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::isa::{Instruction, Opcode, Reg, INSN_LEN, SP};
use crate::pbf::{PandoraBinary, Perms, SectionKind, PAGE_SIZE};
use crate::rng::SplitMix64;

pub const STACK_BASE: u32 = 0xBA00_0000;
pub const STACK_END: u32 = 0xBAAA_B000;
pub const STACK_TOP: u32 = 0xBAAA_AFFC;
pub const SECRET_ADDR: u32 = 0x4347_0000;
pub const SECRET_SIZE: usize = 4096;
pub const HEAP_BASE: u32 = 0x5000_0000;
pub const HEAP_LIMIT: u32 = 0xB000_0000;
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Largest transfer a single transmit/receive/random call performs.
pub const MAX_IO_CHUNK: usize = 65536;

pub const SYS_TERMINATE: u32 = 1;
pub const SYS_TRANSMIT: u32 = 2;
pub const SYS_RECEIVE: u32 = 3;
pub const SYS_FDWAIT: u32 = 4;
pub const SYS_ALLOCATE: u32 = 5;
pub const SYS_DEALLOCATE: u32 = 6;
pub const SYS_RANDOM: u32 = 7;

const ERR: u32 = u32::MAX;

pub type Secret = [u8; SECRET_SIZE];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("section at {vaddr:#x} collides with a reserved VM region")]
    MapConflict { vaddr: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultReason {
    ExecFault,
    ReadFault,
    WriteFault,
    InvalidOpcode,
    StackFault,
}

impl fmt::Display for FaultReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Snapshot taken when a run faults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultRecord {
    pub reason: FaultReason,
    /// The attempted target for `ExecFault`; the faulting instruction's
    /// address for every other reason.
    pub fault_ip: u32,
    /// Address of the instruction that was executing when the fault hit.
    pub insn_ip: u32,
    /// Data address for read/write/stack faults.
    pub access_addr: Option<u32>,
    pub regs: [u32; 8],
}

impl fmt::Display for FaultRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at ip {:08x} (insn {:08x})", self.reason, self.fault_ip, self.insn_ip)?;
        if let Some(a) = self.access_addr {
            write!(f, " addr {a:08x}")?;
        }
        for (i, r) in self.regs.iter().enumerate() {
            write!(f, " r{i}={r:08x}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub z: bool,
    pub l: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Continue,
    /// `receive` found no input; the instruction will be retried.
    Blocked,
    Exited(u32),
    Faulted(FaultRecord),
    BudgetExhausted,
}

/// What the machine records as it runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recording {
    pub trace: bool,
    pub edges: bool,
}

impl Recording {
    pub const ALL: Recording = Recording { trace: true, edges: true };
    pub const EDGES: Recording = Recording { trace: false, edges: true };
    pub const NONE: Recording = Recording { trace: false, edges: false };
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub regs: [u32; 8],
    pub ip: u32,
    pub flags: Flags,
    pub memory: Memory,
    pub budget: u64,
    pub prng: SplitMix64,
    heap_next: u32,
    recording: Recording,
    prev_ip: u32,
    steps: u64,
    trace: Vec<u32>,
    edges: BTreeSet<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExitKind {
    Exited(u32),
    Faulted(FaultRecord),
    BudgetExhausted,
}

impl ExitKind {
    pub fn fault(&self) -> Option<&FaultRecord> {
        match self {
            ExitKind::Faulted(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub kind: ExitKind,
    pub steps: u64,
    /// Executed instruction addresses, in order (empty unless recorded).
    pub trace: Vec<u32>,
    /// `(previous ip, ip)` transitions; the first instruction pairs with 0.
    pub edges: BTreeSet<(u32, u32)>,
    pub stdout: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("input channel returned Pending during a blocking run")]
    WouldBlock,
}

impl MachineState {
    pub fn load(binary: &PandoraBinary, seed: u64, secret: &Secret, budget: u64) -> Result<Self, LoadError> {
        let mut memory = Memory::new();
        let reserved = [
            (STACK_BASE, u64::from(STACK_END - STACK_BASE), Perms::RW, RegionKind::Stack),
            (SECRET_ADDR, SECRET_SIZE as u64, Perms::READ, RegionKind::Secret),
        ];
        for (start, len, perms, kind) in reserved {
            memory.map(start, len, perms, kind);
        }
        let heap = (u64::from(HEAP_BASE), u64::from(HEAP_LIMIT));
        for s in &binary.sections {
            let (start, end) = s.page_span();
            let in_heap = start < heap.1 && end > heap.0;
            let kind = match s.kind {
                SectionKind::Code => RegionKind::Code,
                SectionKind::Data => RegionKind::Data,
            };
            if in_heap || !memory.map(s.vaddr, u64::from(s.mem_size), s.perms, kind) {
                return Err(LoadError::MapConflict { vaddr: s.vaddr });
            }
            memory.poke(s.vaddr, &s.data);
        }
        memory.poke(SECRET_ADDR, secret);
        let mut regs = [0; 8];
        regs[SP.index()] = STACK_TOP;
        Ok(Self {
            regs,
            ip: binary.entry(),
            flags: Flags::default(),
            memory,
            budget,
            prng: SplitMix64::new(seed),
            heap_next: HEAP_BASE,
            recording: Recording::ALL,
            prev_ip: 0,
            steps: 0,
            trace: Vec::new(),
            edges: BTreeSet::new(),
        })
    }

    pub fn set_recording(&mut self, recording: Recording) {
        self.recording = recording;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn trace(&self) -> &[u32] {
        &self.trace
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn reg(&self, r: Reg) -> u32 {
        self.regs[r.index()]
    }

    fn set(&mut self, r: Reg, v: u32) {
        self.regs[r.index()] = v;
    }

    fn fault(&self, reason: FaultReason, fault_ip: u32, insn_ip: u32, access_addr: Option<u32>) -> FaultRecord {
        FaultRecord { reason, fault_ip, insn_ip, access_addr, regs: self.regs }
    }

    /// Executes one instruction.
    pub fn step(&mut self, io: &mut impl SysIo) -> StepResult {
        if self.budget == 0 {
            return StepResult::BudgetExhausted;
        }
        let ip = self.ip;
        let raw = match self.memory.fetch(ip) {
            Ok(raw) => raw,
            Err(_) => return StepResult::Faulted(self.fault(FaultReason::ExecFault, ip, ip, None)),
        };
        let result = self.execute(ip, Instruction::decode(raw), io);
        if result == StepResult::Blocked {
            return result;
        }
        self.budget -= 1;
        self.steps += 1;
        if self.recording.trace {
            self.trace.push(ip);
        }
        if self.recording.edges {
            self.edges.insert((self.prev_ip, ip));
        }
        self.prev_ip = ip;
        result
    }

    fn jump(&mut self, ip: u32, target: u32) -> StepResult {
        if self.memory.is_executable(target) {
            self.ip = target;
            StepResult::Continue
        } else {
            StepResult::Faulted(self.fault(FaultReason::ExecFault, target, ip, None))
        }
    }

    fn push(&mut self, ip: u32, value: u32) -> Result<(), StepResult> {
        let sp = self.reg(SP).wrapping_sub(4);
        self.memory
            .write_u32(sp, value)
            .map_err(|e| StepResult::Faulted(self.fault(FaultReason::StackFault, ip, ip, Some(e.addr))))?;
        self.set(SP, sp);
        Ok(())
    }

    fn pop(&mut self, ip: u32) -> Result<u32, StepResult> {
        let sp = self.reg(SP);
        let value = self
            .memory
            .read_u32(sp)
            .map_err(|e| StepResult::Faulted(self.fault(FaultReason::StackFault, ip, ip, Some(e.addr))))?;
        self.set(SP, sp.wrapping_add(4));
        Ok(value)
    }

    fn execute(&mut self, ip: u32, insn: Instruction, io: &mut impl SysIo) -> StepResult {
        let Instruction::Op { opcode, rd, rs1, rs2, imm } = insn else {
            return StepResult::Faulted(self.fault(FaultReason::InvalidOpcode, ip, ip, None));
        };
        let next = ip.wrapping_add(INSN_LEN);
        let a = self.reg(rs1);
        let b = self.reg(rs2);
        let mem_fault = |s: &Self, reason, e: AccessError| StepResult::Faulted(s.fault(reason, ip, ip, Some(e.addr)));
        match opcode {
            Opcode::Movi => self.set(rd, imm),
            Opcode::Mov => self.set(rd, a),
            Opcode::Add => self.set(rd, a.wrapping_add(b)),
            Opcode::Addi => self.set(rd, a.wrapping_add(imm)),
            Opcode::Sub => self.set(rd, a.wrapping_sub(b)),
            Opcode::Xor => self.set(rd, a ^ b),
            Opcode::And => self.set(rd, a & b),
            Opcode::Or => self.set(rd, a | b),
            Opcode::Cmp | Opcode::Cmpi => {
                let rhs = if opcode == Opcode::Cmp { b } else { imm };
                self.flags = Flags { z: a == rhs, l: a < rhs };
            }
            Opcode::Jmp => return self.jump(ip, imm),
            Opcode::Jz | Opcode::Jnz | Opcode::Jl => {
                let taken = match opcode {
                    Opcode::Jz => self.flags.z,
                    Opcode::Jnz => !self.flags.z,
                    _ => self.flags.l,
                };
                if taken {
                    return self.jump(ip, imm);
                }
            }
            Opcode::Call => {
                if let Err(r) = self.push(ip, next) {
                    return r;
                }
                return self.jump(ip, imm);
            }
            Opcode::Push => {
                if let Err(r) = self.push(ip, a) {
                    return r;
                }
            }
            Opcode::Pop => match self.pop(ip) {
                Ok(v) => self.set(rd, v),
                Err(r) => return r,
            },
            Opcode::Ret => {
                return match self.pop(ip) {
                    Ok(target) => self.jump(ip, target),
                    Err(r) => r,
                }
            }
            Opcode::Ldw => match self.memory.read_u32(a.wrapping_add(imm)) {
                Ok(v) => self.set(rd, v),
                Err(e) => return mem_fault(self, FaultReason::ReadFault, e),
            },
            Opcode::Ldb => {
                let mut byte = [0];
                if let Err(e) = self.memory.read(a.wrapping_add(imm), &mut byte) {
                    return mem_fault(self, FaultReason::ReadFault, e);
                }
                self.set(rd, u32::from(byte[0]));
            }
            Opcode::Stw => {
                if let Err(e) = self.memory.write_u32(a.wrapping_add(imm), b) {
                    return mem_fault(self, FaultReason::WriteFault, e);
                }
            }
            Opcode::Stb => {
                if let Err(e) = self.memory.write(a.wrapping_add(imm), &[b as u8]) {
                    return mem_fault(self, FaultReason::WriteFault, e);
                }
            }
            Opcode::Sys => {
                if let Some(r) = self.syscall(ip, io) {
                    return r;
                }
            }
            Opcode::Nop => {}
        }
        self.ip = next;
        StepResult::Continue
    }

    /// Returns `Some` when the syscall ends the step with something other
    /// than `Continue`.
    fn syscall(&mut self, ip: u32, io: &mut impl SysIo) -> Option<StepResult> {
        let [r0, r1, r2, r3, ..] = self.regs;
        let reg0 = Reg::new(0).expect("r0");
        let fault = |s: &Self, reason, e: AccessError| Some(StepResult::Faulted(s.fault(reason, ip, ip, Some(e.addr))));
        let result = match r0 {
            SYS_TERMINATE => return Some(StepResult::Exited(r1)),
            SYS_TRANSMIT => {
                if r1 != 1 {
                    ERR
                } else {
                    let len = (r3 as usize).min(MAX_IO_CHUNK);
                    let mut buf = vec![0; len];
                    if let Err(e) = self.memory.read(r2, &mut buf) {
                        return fault(self, FaultReason::ReadFault, e);
                    }
                    if len > 0 {
                        io.transmit(&buf);
                    }
                    len as u32
                }
            }
            SYS_RECEIVE => {
                if r1 != 0 {
                    ERR
                } else if r3 == 0 {
                    0
                } else {
                    let len = (r3 as usize).min(MAX_IO_CHUNK);
                    if let Err(e) = self.memory.check_range(r2, len as u32, Access::Write) {
                        return fault(self, FaultReason::WriteFault, e);
                    }
                    let mut buf = vec![0; len];
                    match io.receive(&mut buf) {
                        Recv::Pending => return Some(StepResult::Blocked),
                        Recv::Closed => 0,
                        Recv::Data(n) => {
                            let n = n.min(len);
                            self.memory.poke(r2, &buf[..n]);
                            n as u32
                        }
                    }
                }
            }
            SYS_FDWAIT => u32::from(io.stdin_ready()),
            SYS_ALLOCATE => self.allocate(r1),
            SYS_DEALLOCATE => u32::from(!self.memory.unmap_heap(r1, r2)),
            SYS_RANDOM => {
                let len = (r2 as usize).min(MAX_IO_CHUNK);
                if let Err(e) = self.memory.check_range(r1, len as u32, Access::Write) {
                    return fault(self, FaultReason::WriteFault, e);
                }
                let mut buf = vec![0; len];
                self.prng.fill_bytes(&mut buf);
                self.memory.poke(r1, &buf);
                len as u32
            }
            _ => ERR,
        };
        self.set(reg0, result);
        None
    }

    fn allocate(&mut self, len: u32) -> u32 {
        if len == 0 {
            return 0;
        }
        let start = self.heap_next;
        let end = u64::from(start) + u64::from(len).div_ceil(u64::from(PAGE_SIZE)) * u64::from(PAGE_SIZE);
        if end > u64::from(HEAP_LIMIT) || !self.memory.map(start, end - u64::from(start), Perms::RW, RegionKind::Heap) {
            return 0;
        }
        self.heap_next = end as u32;
        start
    }

    /// Steps until the machine exits, faults, runs out of budget or blocks.
    pub fn run_until_blocked(&mut self, io: &mut impl SysIo) -> StepResult {
        loop {
            match self.step(io) {
                StepResult::Continue => continue,
                other => return other,
            }
        }
    }

    /// Consumes the machine into an outcome; `kind` is the terminal step.
    pub fn into_outcome(self, kind: ExitKind, stdout: Vec<u8>) -> ExecOutcome {
        ExecOutcome { kind, steps: self.steps, trace: self.trace, edges: self.edges, stdout }
    }
}

/// Runs a fresh machine to completion over `io`, which must never return
/// [`Recv::Pending`].
pub fn run_machine(mut m: MachineState, io: &mut impl SysIo) -> Result<(ExitKind, MachineState), RunError> {
    let kind = match m.run_until_blocked(io) {
        StepResult::Exited(status) => ExitKind::Exited(status),
        StepResult::Faulted(f) => ExitKind::Faulted(f),
        StepResult::BudgetExhausted => ExitKind::BudgetExhausted,
        StepResult::Blocked => return Err(RunError::WouldBlock),
        StepResult::Continue => unreachable!("run_until_blocked never returns Continue"),
    };
    Ok((kind, m))
}

/// Loads and runs `binary` on a fixed input delivered line by line.
pub fn run(binary: &PandoraBinary, seed: u64, secret: &Secret, input: &[u8], budget: u64) -> Result<ExecOutcome, RunError> {
    let machine = MachineState::load(binary, seed, secret, budget)?;
    let mut io = LineIo::new(input);
    let (kind, machine) = run_machine(machine, &mut io)?;
    Ok(machine.into_outcome(kind, io.output))
}

/// Like [`run`] for any blocking channel, with a choice of what to record.
pub fn run_with_io(
    binary: &PandoraBinary,
    seed: u64,
    secret: &Secret,
    io: &mut impl SysIo,
    budget: u64,
    recording: Recording,
) -> Result<(ExitKind, MachineState), RunError> {
    let mut machine = MachineState::load(binary, seed, secret, budget)?;
    machine.set_recording(recording);
    run_machine(machine, io)
}
