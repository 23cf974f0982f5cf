// SPDX-License-Identifier: Apache-2.0

//! TCP transport for range sessions: one thread and one VM per connection.

use std::io::{self, ErrorKind, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use log::{debug, info, warn};
use pandora_core::pbf::PandoraBinary;
use pandora_core::range::{Session, SessionConfig, SessionSeeds, Verdict};

pub const DEFAULT_PORT: u16 = 1996;

#[derive(Debug, Clone, Copy)]
pub struct ServerConfig {
    pub seed: u64,
    pub session: SessionConfig,
    /// How long a session waits for the client before giving up.
    pub idle_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { seed: 0, session: SessionConfig::default(), idle_timeout: Duration::from_secs(30) }
    }
}

pub struct Server {
    listener: TcpListener,
    binary: Arc<PandoraBinary>,
    config: ServerConfig,
    counter: Arc<AtomicU64>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, binary: PandoraBinary, config: ServerConfig) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        Ok(Self { listener, binary: Arc::new(binary), config, counter: Arc::new(AtomicU64::new(0)) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until `limit` sessions have been started (forever
    /// if `None`), then waits for running sessions and returns their verdicts
    /// in connection order.
    pub fn serve(self, limit: Option<u64>) -> io::Result<Vec<Verdict>> {
        let mut handles = Vec::new();
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let index = self.counter.fetch_add(1, Ordering::SeqCst);
            let seeds = SessionSeeds::for_connection(self.config.seed, index);
            let binary = Arc::clone(&self.binary);
            let config = self.config;
            handles.push(thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                match handle_connection(stream, &binary, seeds, config) {
                    Ok(v) => {
                        info!("session {index} ({peer:?}): success={} crashed={} {}", v.success, v.crashed(), v.note);
                        Some(v)
                    }
                    Err(e) => {
                        warn!("session {index} ({peer:?}): {e}");
                        None
                    }
                }
            }));
            if limit.is_some_and(|n| index + 1 >= n) {
                break;
            }
        }
        Ok(handles.into_iter().filter_map(|h| h.join().ok().flatten()).collect())
    }
}

/// Runs one session over `stream` and returns its verdict.
pub fn handle_connection(
    mut stream: TcpStream,
    binary: &PandoraBinary,
    seeds: SessionSeeds,
    config: ServerConfig,
) -> io::Result<Verdict> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(config.idle_timeout))?;
    let mut session =
        Session::new(binary, seeds, config.session).map_err(|e| io::Error::new(ErrorKind::InvalidInput, e))?;
    session.start();
    let mut buf = vec![0u8; 64 * 1024];
    loop {
        let out = session.take_output();
        if !out.is_empty() {
            stream.write_all(&out)?;
        }
        if session.is_finished() {
            break;
        }
        match stream.read(&mut buf) {
            Ok(0) => session.close_input(),
            Ok(n) => session.feed(&buf[..n]),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                session.abort("timed out waiting for the client");
            }
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => {
                session.abort("connection error");
                debug!("read error: {e}");
                let _ = stream.write_all(&session.take_output());
                break;
            }
        }
    }
    stream.flush()?;
    let _ = stream.shutdown(Shutdown::Both);
    Ok(session.verdict().expect("finished sessions have a verdict").clone())
}
