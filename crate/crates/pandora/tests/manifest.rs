// SPDX-License-Identifier: Apache-2.0

use pandora::manifest::Manifest;
use pandora_core::corpus::{challenge, SOURCES};
use pandora_core::exploit::{cyclic_pattern, run_pipeline, FuzzConfig, PipelineConfig};
use pandora_core::range::secret_page;
use pandora_core::svm::{run, FaultReason};

#[test]
fn manifest_lists_every_source() {
    let m = Manifest::bundled();
    let names: Vec<&str> = m.challenges.iter().map(|c| c.name.as_str()).collect();
    let sources: Vec<&str> = SOURCES.iter().map(|s| s.name).collect();
    assert_eq!(names, sources);
    for (entry, src) in m.challenges.iter().zip(&SOURCES) {
        assert_eq!(entry.source, src.file);
        assert_eq!(entry.reference_pov.as_deref(), src.pov_file);
        assert!(challenge(&entry.name).is_ok());
    }
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(Manifest::parse("[[challenge]]\nname = \"x\"\nsource = \"x.s\"\nclass = \"y\"\nbogus = 1\n").is_err());
}

fn word(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

#[test]
fn greeter_offsets_match_execution() {
    let entry = Manifest::bundled().get("greeter").cloned().unwrap();
    let prefix = entry.dialog_prefix.clone().unwrap().into_bytes();
    let ip_offset = entry.ip_offset.unwrap();
    let regs = entry.reg_offsets_by_index();
    assert_eq!(regs.keys().copied().collect::<Vec<_>>(), vec![entry.regnum.unwrap() as u8]);

    let pattern = cyclic_pattern(80).unwrap();
    let mut input = prefix.clone();
    input.extend(&pattern);
    input.push(b'\n');
    let bin = challenge("greeter").unwrap().binary;
    let out = run(&bin, 0, &secret_page(0), &input, 1_000_000).unwrap();
    let f = out.kind.fault().expect("greeter should fault").clone();
    assert_eq!(f.reason, FaultReason::ExecFault);
    assert_eq!(f.fault_ip, word(&pattern, ip_offset));
    for (&r, &off) in &regs {
        assert_eq!(f.regs[r as usize], word(&pattern, off));
    }
}

#[test]
fn pipeline_recovers_manifest_constants() {
    let entry = Manifest::bundled().get("greeter").cloned().unwrap();
    let bin = challenge("greeter").unwrap().binary;
    let config = PipelineConfig { fuzz: FuzzConfig { execs: 20_000, ..FuzzConfig::default() }, ..PipelineConfig::default() };
    let mut log = Vec::new();
    let e = run_pipeline(&bin, &[entry.seed_input.clone().unwrap().into_bytes()], &config, &mut log).unwrap();
    let prefix = entry.dialog_prefix.clone().unwrap().into_bytes();
    assert_eq!(e.controls.dialog_prefix, prefix);
    let skew = prefix.len();
    assert_eq!(e.controls.ip_offset, entry.ip_offset.map(|o| o + skew));
    let expect: std::collections::BTreeMap<u8, usize> =
        entry.reg_offsets_by_index().into_iter().map(|(r, o)| (r, o + skew)).collect();
    assert!(expect.iter().all(|(r, o)| e.controls.reg_offsets.get(r) == Some(o)), "{:?}", e.controls);
    assert_eq!(e.script.type1_request().map(|t| t.2), entry.regnum);
}
