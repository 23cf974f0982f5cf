// SPDX-License-Identifier: Apache-2.0

//! SplitMix64, the only source of randomness inside the range.

/// SplitMix64 generator (Steele, Lea, Flood). Every random stream in the range
/// (VM `random` syscall, session secrets, negotiation values, fuzzer mutations)
/// is one of these, seeded explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.state)
    }

    pub fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    /// Uniform value in `0..bound`. `bound` must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Lemire's multiply-shift; the bias is below 2^-32 for the bounds used here.
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }

    pub fn state(&self) -> u64 {
        self.state
    }
}

/// The SplitMix64 output finalizer.
pub const fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for sub-stream `label` of `seed`.
pub const fn derive(seed: u64, label: u64) -> u64 {
    mix(mix(seed ^ 0x5041_4E44_4F52_4121).wrapping_add(mix(label.wrapping_add(1))))
}
