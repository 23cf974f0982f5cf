// SPDX-License-Identifier: Apache-2.0

//! Parallel fuzzing. Each worker owns a private VM and mutation stream;
//! crashes flow through one channel into a collector that keeps the first
//! input seen for each crash key. Only a single worker is deterministic:
//! with more, arrival order depends on scheduling.

use std::collections::BTreeSet;
use std::sync::mpsc;
use std::thread;

use pandora_core::exploit::{fuzz, CrashInput, FuzzConfig, Fuzzer};
use pandora_core::pbf::PandoraBinary;
use pandora_core::rng::derive;

pub fn fuzz_parallel(binary: &PandoraBinary, seeds: &[Vec<u8>], config: FuzzConfig, workers: usize) -> Vec<CrashInput> {
    if workers <= 1 {
        return fuzz(binary, seeds, config);
    }
    let workers = workers as u64;
    let (tx, rx) = mpsc::channel::<CrashInput>();
    thread::scope(|s| {
        for w in 0..workers {
            let tx = tx.clone();
            let share = config.execs / workers + u64::from(w < config.execs % workers);
            let cfg = FuzzConfig { execs: share, rng_seed: derive(config.rng_seed, w), ..config };
            s.spawn(move || {
                let mut f = Fuzzer::new(binary, seeds, cfg);
                while !f.done() {
                    if let Some(c) = f.exec_one() {
                        if tx.send(c.clone()).is_err() {
                            return;
                        }
                    }
                }
            });
        }
        drop(tx);
        let mut keys = BTreeSet::new();
        rx.into_iter().filter(|c| keys.insert(c.key())).collect()
    })
}
