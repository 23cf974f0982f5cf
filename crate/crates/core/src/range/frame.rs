// SPDX-License-Identifier: Apache-2.0

//! Multiplexed frames: `50 | channel | len u32 LE | payload`.

use alloc::vec::Vec;

pub const FRAME_MAGIC: u8 = 0x50;
pub const FRAME_HEADER_LEN: usize = 6;
pub const MAX_FRAME_PAYLOAD: usize = 65536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Channel {
    Stdin = 0,
    Stdout = 1,
    Negotiation = 2,
    Verdict = 3,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Stdin, Channel::Stdout, Channel::Negotiation, Channel::Verdict];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.get(usize::from(b)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub channel: Channel,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(channel: Channel, payload: impl Into<Vec<u8>>) -> Self {
        Self { channel, payload: payload.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("bad frame magic {0:#04x}")]
    BadMagic(u8),
    #[error("unknown channel {0}")]
    BadChannel(u8),
    #[error("frame payload of {0} bytes exceeds the 65536-byte limit")]
    Oversized(u32),
}

/// Appends the encoding of `f` to `out`.
///
/// # Panics
/// If the payload is larger than [`MAX_FRAME_PAYLOAD`]; use
/// [`encode_chunked`] for arbitrary data.
pub fn encode_frame_into(f: &Frame, out: &mut Vec<u8>) {
    assert!(f.payload.len() <= MAX_FRAME_PAYLOAD, "frame payload too large");
    out.reserve(FRAME_HEADER_LEN + f.payload.len());
    out.push(FRAME_MAGIC);
    out.push(f.channel as u8);
    out.extend_from_slice(&(f.payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&f.payload);
}

pub fn encode_frame(f: &Frame) -> Vec<u8> {
    let mut out = Vec::new();
    encode_frame_into(f, &mut out);
    out
}

/// Splits `data` into as many maximal frames as needed. Empty data produces
/// one empty frame.
pub fn encode_chunked(channel: Channel, data: &[u8], out: &mut Vec<u8>) {
    if data.is_empty() {
        encode_frame_into(&Frame::new(channel, Vec::new()), out);
    }
    for chunk in data.chunks(MAX_FRAME_PAYLOAD) {
        encode_frame_into(&Frame::new(channel, chunk), out);
    }
}

/// Decodes one frame from the front of `buf`. `Ok(None)` means more bytes are
/// needed; header errors are reported as soon as the header is visible.
pub fn decode_frame(buf: &[u8]) -> Result<Option<(Frame, usize)>, FrameError> {
    let Some(&magic) = buf.first() else { return Ok(None) };
    if magic != FRAME_MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    let Some(&ch) = buf.get(1) else { return Ok(None) };
    let channel = Channel::from_byte(ch).ok_or(FrameError::BadChannel(ch))?;
    if buf.len() < FRAME_HEADER_LEN {
        return Ok(None);
    }
    let len = u32::from_le_bytes([buf[2], buf[3], buf[4], buf[5]]);
    if len as usize > MAX_FRAME_PAYLOAD {
        return Err(FrameError::Oversized(len));
    }
    let total = FRAME_HEADER_LEN + len as usize;
    if buf.len() < total {
        return Ok(None);
    }
    Ok(Some((Frame::new(channel, &buf[FRAME_HEADER_LEN..total]), total)))
}

/// Incremental decoder for a byte stream.
#[derive(Debug, Default, Clone)]
pub struct FrameDecoder {
    buf: Vec<u8>,
    failed: Option<FrameError>,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// The next complete frame. Errors are sticky.
    pub fn next_frame(&mut self) -> Result<Option<Frame>, FrameError> {
        if let Some(e) = self.failed {
            return Err(e);
        }
        match decode_frame(&self.buf) {
            Ok(Some((frame, used))) => {
                self.buf.drain(..used);
                Ok(Some(frame))
            }
            Ok(None) => Ok(None),
            Err(e) => {
                self.failed = Some(e);
                Err(e)
            }
        }
    }

    /// Bytes received but not yet part of a complete frame.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }
}
