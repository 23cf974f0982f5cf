// SPDX-License-Identifier: Apache-2.0

//! The channel pair a challenge binary sees: fd 0 in, fd 1 out.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recv {
    /// `n > 0` bytes were written to the front of the buffer.
    Data(usize),
    /// The peer closed its side; the binary sees a zero-length read.
    Closed,
    /// Nothing buffered yet. Only non-blocking transports return this; the
    /// VM suspends the `receive` syscall until more input is offered.
    Pending,
}

pub trait SysIo {
    /// Called with a non-empty buffer.
    fn receive(&mut self, buf: &mut [u8]) -> Recv;
    fn transmit(&mut self, data: &[u8]);
    /// Whether a `receive` would complete without suspending.
    fn stdin_ready(&mut self) -> bool;
}

impl<T: SysIo + ?Sized> SysIo for &mut T {
    fn receive(&mut self, buf: &mut [u8]) -> Recv {
        (**self).receive(buf)
    }
    fn transmit(&mut self, data: &[u8]) {
        (**self).transmit(data)
    }
    fn stdin_ready(&mut self) -> bool {
        (**self).stdin_ready()
    }
}

/// Fixed input delivered one line at a time, like a terminal: each receive
/// returns at most up to and including the next `\n`. Used for local runs and
/// fuzzing, where the whole input is known up front.
#[derive(Debug, Clone, Default)]
pub struct LineIo {
    input: Vec<u8>,
    pos: usize,
    pub output: Vec<u8>,
}

impl LineIo {
    pub fn new(input: impl Into<Vec<u8>>) -> Self {
        Self { input: input.into(), pos: 0, output: Vec::new() }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl SysIo for LineIo {
    fn receive(&mut self, buf: &mut [u8]) -> Recv {
        let rest = &self.input[self.pos..];
        if rest.is_empty() {
            return Recv::Closed;
        }
        let line = rest.iter().position(|&b| b == b'\n').map_or(rest.len(), |i| i + 1);
        let n = line.min(buf.len());
        buf[..n].copy_from_slice(&rest[..n]);
        self.pos += n;
        Recv::Data(n)
    }

    fn transmit(&mut self, data: &[u8]) {
        self.output.extend_from_slice(data);
    }

    fn stdin_ready(&mut self) -> bool {
        true
    }
}

/// Input arriving as discrete chunks (one per network frame). A receive
/// never spans two chunks. Transmits are kept separately so each can become
/// its own outbound frame.
#[derive(Debug, Clone, Default)]
pub struct ChunkIo {
    chunks: VecDeque<Vec<u8>>,
    front_pos: usize,
    closed: bool,
    sent: Vec<Vec<u8>>,
}

impl ChunkIo {
    pub fn new() -> Self {
        Self::default()
    }

    /// Input that is complete: the stream is closed after the last chunk.
    pub fn with_chunks<I, C>(chunks: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<u8>>,
    {
        let mut io = Self::new();
        for c in chunks {
            io.push(c.into());
        }
        io.close();
        io
    }

    pub fn push(&mut self, chunk: Vec<u8>) {
        if !chunk.is_empty() {
            self.chunks.push_back(chunk);
        }
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn take_sent(&mut self) -> Vec<Vec<u8>> {
        core::mem::take(&mut self.sent)
    }

    pub fn sent_bytes(&self) -> Vec<u8> {
        self.sent.concat()
    }
}

impl SysIo for ChunkIo {
    fn receive(&mut self, buf: &mut [u8]) -> Recv {
        let Some(front) = self.chunks.front() else {
            return if self.closed { Recv::Closed } else { Recv::Pending };
        };
        let rest = &front[self.front_pos..];
        let n = rest.len().min(buf.len());
        buf[..n].copy_from_slice(&rest[..n]);
        self.front_pos += n;
        if self.front_pos == front.len() {
            self.chunks.pop_front();
            self.front_pos = 0;
        }
        Recv::Data(n)
    }

    fn transmit(&mut self, data: &[u8]) {
        self.sent.push(data.to_vec());
    }

    fn stdin_ready(&mut self) -> bool {
        self.closed || !self.chunks.is_empty()
    }
}
