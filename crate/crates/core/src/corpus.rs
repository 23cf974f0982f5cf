// SPDX-License-Identifier: Apache-2.0

//! The bundled challenge binaries and their reference POVs, compiled in from
//! `corpus/`.

use alloc::vec::Vec;

use crate::asm::{assemble, AsmError};
use crate::pbf::PandoraBinary;
use crate::pov::{parse_pov, PovError, PovScript};

pub struct Source {
    pub name: &'static str,
    pub file: &'static str,
    pub asm: &'static str,
    pub pov_file: Option<&'static str>,
    pub pov: Option<&'static str>,
}

macro_rules! corpus_file {
    ($f:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/", $f))
    };
}

pub const SOURCES: [Source; 4] = [
    Source {
        name: "greeter",
        file: "greeter.s",
        asm: corpus_file!("greeter.s"),
        pov_file: Some("greeter_ref.pov"),
        pov: Some(corpus_file!("greeter_ref.pov")),
    },
    Source { name: "counter", file: "counter.s", asm: corpus_file!("counter.s"), pov_file: None, pov: None },
    Source {
        name: "leaky",
        file: "leaky.s",
        asm: corpus_file!("leaky.s"),
        pov_file: Some("leaky_ref.pov"),
        pov: Some(corpus_file!("leaky_ref.pov")),
    },
    Source { name: "dataabort", file: "dataabort.s", asm: corpus_file!("dataabort.s"), pov_file: None, pov: None },
];

/// The corpus manifest text (TOML); parsed by the std crate.
pub const MANIFEST: &str = corpus_file!("manifest.toml");

pub struct Challenge {
    pub name: &'static str,
    pub binary: PandoraBinary,
    pub reference_pov: Option<PovScript>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("{file}: {source}")]
    Asm { file: &'static str, source: AsmError },
    #[error("{file}: {source}")]
    Pov { file: &'static str, source: PovError },
    #[error("no corpus challenge named `{0}`")]
    Unknown(alloc::string::String),
}

pub fn build_source(s: &Source) -> Result<Challenge, CorpusError> {
    let binary = assemble(s.asm).map_err(|source| CorpusError::Asm { file: s.file, source })?;
    let reference_pov = match (s.pov_file, s.pov) {
        (Some(file), Some(text)) => Some(parse_pov(text).map_err(|source| CorpusError::Pov { file, source })?),
        _ => None,
    };
    Ok(Challenge { name: s.name, binary, reference_pov })
}

pub fn build_corpus() -> Result<Vec<Challenge>, CorpusError> {
    SOURCES.iter().map(build_source).collect()
}

pub fn challenge(name: &str) -> Result<Challenge, CorpusError> {
    let s = SOURCES.iter().find(|s| s.name == name).ok_or_else(|| CorpusError::Unknown(name.into()))?;
    build_source(s)
}
