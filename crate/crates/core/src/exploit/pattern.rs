// SPDX-License-Identifier: Apache-2.0

//! Cyclic patterns: `Aa0Aa1...Zz9`, where every 4-byte window is unique.

use alloc::vec::Vec;

/// 26 * 26 * 10 triplets of 3 bytes.
pub const MAX_PATTERN: usize = 26 * 26 * 10 * 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("pattern length {0} exceeds {MAX_PATTERN}")]
pub struct TooLong(pub usize);

pub fn cyclic_pattern(n: usize) -> Result<Vec<u8>, TooLong> {
    if n > MAX_PATTERN {
        return Err(TooLong(n));
    }
    let mut out = Vec::with_capacity(n);
    'fill: for u in b'A'..=b'Z' {
        for l in b'a'..=b'z' {
            for d in b'0'..=b'9' {
                for b in [u, l, d] {
                    if out.len() == n {
                        break 'fill;
                    }
                    out.push(b);
                }
            }
        }
    }
    Ok(out)
}

/// Position of `window` in `cyclic_pattern(n)`, trying the bytes as given and
/// then reversed. `n` is clamped to [`MAX_PATTERN`].
pub fn pattern_offset(window: [u8; 4], n: usize) -> Option<usize> {
    let p = cyclic_pattern(n.min(MAX_PATTERN)).expect("clamped");
    let find = |w: [u8; 4]| p.windows(4).position(|x| x == w);
    find(window).or_else(|| {
        let mut r = window;
        r.reverse();
        find(r)
    })
}

/// [`pattern_offset`] for a register value read back from pattern memory.
pub fn pattern_offset_u32(value: u32, n: usize) -> Option<usize> {
    pattern_offset(value.to_le_bytes(), n)
}
