// SPDX-License-Identifier: Apache-2.0

//! Pandora cyber range core.
//!
//! Everything here is pure computation over owned buffers and builds with
//! `no_std` + `alloc`: the PBF container, the pvm32 VM, the assembler, the POV
//! script language and wire codecs, the sans-IO session and replay machines,
//! and the fuzz-to-POV exploit pipeline. Sockets, files and the CLI live in
//! the `pandora` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asm;
pub mod corpus;
pub mod exploit;
pub mod isa;
pub mod pbf;
pub mod pov;
pub mod range;
pub mod replay;
pub mod rng;
pub mod svm;
