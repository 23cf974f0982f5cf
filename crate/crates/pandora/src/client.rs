// SPDX-License-Identifier: Apache-2.0

//! TCP transport for the replay client.

use std::io::{ErrorKind, Read, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use pandora_core::pov::PovScript;
use pandora_core::replay::{ReplayError, ReplayResult, Replayer, Status};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Runs `script` against a range server. `timeout` bounds the whole replay.
pub fn replay_tcp(script: &PovScript, host: &str, port: u16, timeout: Duration) -> Result<ReplayResult, ReplayError> {
    let deadline = Instant::now() + timeout;
    let timed_out = || ReplayError::Timeout(timeout.as_millis() as u64);
    let connect_err = |e: &dyn std::fmt::Display| ReplayError::Connect(format!("{host}:{port}: {e}"));
    let addrs: Vec<_> = (host, port).to_socket_addrs().map_err(|e| connect_err(&e))?.collect();
    let mut last = None;
    let mut stream = None;
    for a in addrs {
        match TcpStream::connect_timeout(&a, timeout) {
            Ok(s) => {
                stream = Some(s);
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let mut stream = stream.ok_or_else(|| match last {
        Some(e) => connect_err(&e),
        None => connect_err(&"no addresses"),
    })?;
    stream.set_nodelay(true).map_err(|e| connect_err(&e))?;

    let mut client = Replayer::new(script.clone())?;
    let mut closed = false;
    let mut buf = vec![0u8; 64 * 1024];
    let io_err = |e: std::io::Error| ReplayError::Protocol(format!("connection: {e}"));
    loop {
        let out = client.take_output();
        if !out.is_empty() {
            // The server may already have hung up after an early verdict; a
            // failed write is only fatal if no verdict follows.
            if stream.write_all(&out).is_err() {
                closed = true;
            }
        }
        if client.wants_close() && !closed {
            closed = true;
            client.note_half_close();
            let _ = stream.shutdown(Shutdown::Write);
        }
        if client.status() == Status::Done {
            break;
        }
        let left = deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            return Err(timed_out());
        }
        stream.set_read_timeout(Some(left)).map_err(io_err)?;
        match stream.read(&mut buf) {
            Ok(0) => client.peer_closed(),
            Ok(n) => client.feed(&buf[..n]),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => return Err(timed_out()),
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) if e.kind() == ErrorKind::ConnectionReset => client.peer_closed(),
            Err(e) => return Err(io_err(e)),
        }
    }
    client.finish()
}
