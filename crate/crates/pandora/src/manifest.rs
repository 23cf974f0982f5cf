// SPDX-License-Identifier: Apache-2.0

//! The corpus manifest: what each bundled challenge is expected to do.

use std::collections::BTreeMap;

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
pub struct Manifest {
    #[serde(rename = "challenge")]
    pub challenges: Vec<ChallengeSpec>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ChallengeSpec {
    pub name: String,
    pub source: String,
    pub class: String,
    pub reference_pov: Option<String>,
    pub seed_input: Option<String>,
    pub dialog_prefix: Option<String>,
    /// Offsets from the start of the overflowing field.
    pub ip_offset: Option<usize>,
    /// Register name (`r5`) to offset.
    #[serde(default)]
    pub reg_offsets: BTreeMap<String, usize>,
    pub regnum: Option<u32>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// The manifest compiled into `pandora-core`.
    pub fn bundled() -> Self {
        Self::parse(pandora_core::corpus::MANIFEST).expect("bundled manifest is valid")
    }

    pub fn get(&self, name: &str) -> Option<&ChallengeSpec> {
        self.challenges.iter().find(|c| c.name == name)
    }
}

impl ChallengeSpec {
    /// `reg_offsets` keyed by register index.
    pub fn reg_offsets_by_index(&self) -> BTreeMap<u8, usize> {
        self.reg_offsets
            .iter()
            .filter_map(|(k, &v)| Some((k.strip_prefix('r')?.parse().ok()?, v)))
            .collect()
    }
}
