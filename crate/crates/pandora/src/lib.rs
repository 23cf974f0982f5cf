// SPDX-License-Identifier: Apache-2.0

//! Host-side Pandora tooling on top of `pandora-core`: the TCP range server,
//! the TCP replay client, parallel fuzzing workers, the corpus manifest and
//! the `pandora` command line.

pub mod cli;
pub mod client;
pub mod manifest;
pub mod server;
pub mod workers;

pub use pandora_core as core;
